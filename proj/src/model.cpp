#include "sme/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace sme {

namespace {

// m += alpha * a b^T
void add_outer(Matrix& m, double alpha, std::span<const double> a, std::span<const double> b) {
    for (std::size_t r = 0; r < m.rows(); ++r) axpy(alpha * a[r], b, m.row(r));
}

// t(i, j, k) += alpha * a_i b_j c_k
void add_outer3(Tensor3& t, double alpha, std::span<const double> a, std::span<const double> b,
                std::span<const double> c) {
    auto w = t.values();
    const std::size_t n2 = t.dim2();
    const std::size_t n3 = t.dim3();
    for (std::size_t i = 0; i < t.dim1(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const double coef = alpha * a[i] * b[j];
            double* fiber = w.data() + (i * n2 + j) * n3;
            for (std::size_t k = 0; k < n3; ++k) fiber[k] += coef * c[k];
        }
    }
}

// out_k += alpha * sum_{i,j} a_i b_j t(i, j, k)
void add_mode12_contract(const Tensor3& t, double alpha, std::span<const double> a, std::span<const double> b,
                         std::span<double> out) {
    const auto w = t.values();
    const std::size_t n2 = t.dim2();
    const std::size_t n3 = t.dim3();
    for (std::size_t i = 0; i < t.dim1(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const double coef = alpha * a[i] * b[j];
            const double* fiber = w.data() + (i * n2 + j) * n3;
            for (std::size_t k = 0; k < n3; ++k) out[k] += coef * fiber[k];
        }
    }
}

void fill_uniform(std::span<double> values, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : values) v = dist(rng);
}

}  // namespace

std::string_view to_string(Form form) { return form == Form::linear ? "linear" : "bilinear"; }

Form parse_form(std::string_view text) {
    if (text == "linear") return Form::linear;
    if (text == "bilinear") return Form::bilinear;
    throw ConfigError("unknown model form '" + std::string(text) + "' (expected linear or bilinear)");
}

std::span<const double> EmbeddingTable::row(SymbolId id) const {
    if (id >= vectors_.rows()) throw LookupError("embedding id " + std::to_string(id) + " out of range");
    return vectors_.row(id);
}

std::span<double> EmbeddingTable::row(SymbolId id) {
    if (id >= vectors_.rows()) throw LookupError("embedding id " + std::to_string(id) + " out of range");
    return vectors_.row(id);
}

void EmbeddingTable::normalize_rows() {
    for (std::size_t r = 0; r < vectors_.rows(); ++r) {
        auto row = vectors_.row(r);
        const double n = norm2(row);
        if (n > 0.0)
            for (auto& v : row) v /= n;
    }
}

Form form_of(const Params& params) {
    return std::holds_alternative<LinearParams>(params) ? Form::linear : Form::bilinear;
}

std::size_t params_dim_p(const Params& params) {
    return std::visit([](const auto& p) { return p.left_bias.size(); }, params);
}

std::size_t params_dim_d(const Params& params) {
    if (const auto* lin = std::get_if<LinearParams>(&params)) return lin->w_left_entity.cols();
    return std::get<BilinearParams>(params).w_left.dim2();
}

Params zero_params(Form form, std::size_t p, std::size_t d) {
    if (form == Form::linear) return LinearParams(p, d);
    return BilinearParams(p, d);
}

Model init_model(const ModelSpec& spec, std::size_t symbols, std::mt19937_64& rng) {
    if (spec.dim_d == 0 || spec.dim_p == 0) throw ConfigError("embedding and output dimensions must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.dim_d));
    Model model{EmbeddingTable(symbols, spec.dim_d), zero_params(spec.form, spec.dim_p, spec.dim_d)};
    fill_uniform(model.embeddings.matrix().values(), bound, rng);
    model.embeddings.normalize_rows();
    if (auto* lin = std::get_if<LinearParams>(&model.params)) {
        for (Matrix* m : {&lin->w_left_entity, &lin->w_left_relation, &lin->w_right_entity, &lin->w_right_relation})
            fill_uniform(m->values(), bound, rng);
    } else {
        auto& bil = std::get<BilinearParams>(model.params);
        fill_uniform(bil.w_left.values(), bound, rng);
        fill_uniform(bil.w_right.values(), bound, rng);
    }
    return model;
}

Vector g_left(const LinearParams& params, std::span<const double> e_lhs, std::span<const double> e_rel) {
    Vector out = matvec(params.w_left_entity, e_lhs);
    axpy(1.0, matvec(params.w_left_relation, e_rel).span(), out.span());
    axpy(1.0, params.left_bias.span(), out.span());
    return out;
}

Vector g_right(const LinearParams& params, std::span<const double> e_rhs, std::span<const double> e_rel) {
    Vector out = matvec(params.w_right_entity, e_rhs);
    axpy(1.0, matvec(params.w_right_relation, e_rel).span(), out.span());
    axpy(1.0, params.right_bias.span(), out.span());
    return out;
}

Vector g_left(const BilinearParams& params, std::span<const double> e_lhs, std::span<const double> e_rel) {
    Vector out = matvec(mode3_contract(params.w_left, e_rel), e_lhs);
    axpy(1.0, params.left_bias.span(), out.span());
    return out;
}

Vector g_right(const BilinearParams& params, std::span<const double> e_rhs, std::span<const double> e_rel) {
    Vector out = matvec(mode3_contract(params.w_right, e_rel), e_rhs);
    axpy(1.0, params.right_bias.span(), out.span());
    return out;
}

Vector g_left(const Params& params, std::span<const double> e_lhs, std::span<const double> e_rel) {
    return std::visit([&](const auto& p) { return g_left(p, e_lhs, e_rel); }, params);
}

Vector g_right(const Params& params, std::span<const double> e_rhs, std::span<const double> e_rel) {
    return std::visit([&](const auto& p) { return g_right(p, e_rhs, e_rel); }, params);
}

double energy(const Model& model, const Triple& t) {
    const auto e_lhs = model.embeddings.row(t.lhs);
    const auto e_rel = model.embeddings.row(t.rel);
    const auto e_rhs = model.embeddings.row(t.rhs);
    const Vector left = g_left(model.params, e_lhs, e_rel);
    const Vector right = g_right(model.params, e_rhs, e_rel);
    return -dot(left, right);
}

namespace {

// Adds scale * d(energy)/d(theta) into `param_grad` and the three slot row
// gradients kept apart per slot.
double add_slot_gradients(const Model& model, const Triple& t, double scale, Params& param_grad,
                                   std::span<double> lhs_grad, std::span<double> rel_grad,
                                   std::span<double> rhs_grad) {
    if (param_grad.index() != model.params.index()) throw ShapeError("gradient buffer form differs from model form");
    const auto e_lhs = model.embeddings.row(t.lhs);
    const auto e_rel = model.embeddings.row(t.rel);
    const auto e_rhs = model.embeddings.row(t.rhs);

    if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        auto& g = std::get<LinearParams>(param_grad);
        const Vector left = g_left(*lin, e_lhs, e_rel);
        const Vector right = g_right(*lin, e_rhs, e_rel);
        // dE/dleft = -right, dE/dright = -left
        add_outer(g.w_left_entity, -scale, right, e_lhs);
        add_outer(g.w_left_relation, -scale, right, e_rel);
        add_outer(g.w_right_entity, -scale, left, e_rhs);
        add_outer(g.w_right_relation, -scale, left, e_rel);
        axpy(-scale, right, g.left_bias.span());
        axpy(-scale, left, g.right_bias.span());
        axpy(-scale, matvec_transposed(lin->w_left_entity, right).span(), lhs_grad);
        axpy(-scale, matvec_transposed(lin->w_right_entity, left).span(), rhs_grad);
        axpy(-scale, matvec_transposed(lin->w_left_relation, right).span(), rel_grad);
        axpy(-scale, matvec_transposed(lin->w_right_relation, left).span(), rel_grad);
        return -dot(left, right);
    }

    const auto& bil = std::get<BilinearParams>(model.params);
    auto& g = std::get<BilinearParams>(param_grad);
    const Matrix left_map = mode3_contract(bil.w_left, e_rel);
    const Matrix right_map = mode3_contract(bil.w_right, e_rel);
    Vector left = matvec(left_map, e_lhs);
    axpy(1.0, bil.left_bias.span(), left.span());
    Vector right = matvec(right_map, e_rhs);
    axpy(1.0, bil.right_bias.span(), right.span());

    add_outer3(g.w_left, -scale, right, e_lhs, e_rel);
    add_outer3(g.w_right, -scale, left, e_rhs, e_rel);
    axpy(-scale, right, g.left_bias.span());
    axpy(-scale, left, g.right_bias.span());
    axpy(-scale, matvec_transposed(left_map, right).span(), lhs_grad);
    axpy(-scale, matvec_transposed(right_map, left).span(), rhs_grad);
    add_mode12_contract(bil.w_left, -scale, right, e_lhs, rel_grad);
    add_mode12_contract(bil.w_right, -scale, left, e_rhs, rel_grad);
    return -dot(left, right);
}

}  // namespace

GradientBundle energy_gradients(const Model& model, const Triple& t) {
    const std::size_t d = model.dim_d();
    GradientBundle out{zero_params(model.form(), model.dim_p(), d), Vector(d), Vector(d), Vector(d)};
    add_slot_gradients(model, t, 1.0, out.params, out.lhs.span(), out.rel.span(), out.rhs.span());
    return out;
}

bool all_finite(const Params& params) {
    if (const auto* lin = std::get_if<LinearParams>(&params)) {
        return all_finite(lin->w_left_entity.values()) && all_finite(lin->w_left_relation.values()) &&
               all_finite(lin->w_right_entity.values()) && all_finite(lin->w_right_relation.values()) &&
               all_finite(lin->left_bias.span()) && all_finite(lin->right_bias.span());
    }
    const auto& bil = std::get<BilinearParams>(params);
    return all_finite(bil.w_left.values()) && all_finite(bil.w_right.values()) && all_finite(bil.left_bias.span()) &&
           all_finite(bil.right_bias.span());
}

bool all_finite(const Model& model) {
    return all_finite(model.embeddings.matrix().values()) && all_finite(model.params);
}

RelationOperators::RelationOperators(const Model& model) { reset(model); }

void RelationOperators::reset(const Model& model) {
    model_ = &model;
    if (entries_.size() != model.embeddings.size()) {
        entries_.assign(model.embeddings.size(), Entry{});
        ready_ids_.clear();
    }
    for (auto id : ready_ids_) entries_[id].ready = false;
    ready_ids_.clear();
}

RelationOperators::Entry& RelationOperators::entry(SymbolId rel) {
    const auto e_rel = model_->embeddings.row(rel);
    Entry& e = entries_[rel];
    if (e.ready) return e;
    if (const auto* lin = std::get_if<LinearParams>(&model_->params)) {
        e.left_offset = matvec(lin->w_left_relation, e_rel);
        axpy(1.0, lin->left_bias.span(), e.left_offset.span());
        e.right_offset = matvec(lin->w_right_relation, e_rel);
        axpy(1.0, lin->right_bias.span(), e.right_offset.span());
    } else {
        const auto& bil = std::get<BilinearParams>(model_->params);
        e.left_map = mode3_contract(bil.w_left, e_rel);
        e.right_map = mode3_contract(bil.w_right, e_rel);
    }
    e.ready = true;
    ready_ids_.push_back(rel);
    return e;
}

Vector RelationOperators::g_left(SymbolId lhs, SymbolId rel) {
    const Entry& e = entry(rel);
    const auto e_lhs = model_->embeddings.row(lhs);
    if (const auto* lin = std::get_if<LinearParams>(&model_->params)) {
        Vector out = matvec(lin->w_left_entity, e_lhs);
        axpy(1.0, e.left_offset.span(), out.span());
        return out;
    }
    Vector out = matvec(e.left_map, e_lhs);
    axpy(1.0, std::get<BilinearParams>(model_->params).left_bias.span(), out.span());
    return out;
}

Vector RelationOperators::g_right(SymbolId rhs, SymbolId rel) {
    const Entry& e = entry(rel);
    const auto e_rhs = model_->embeddings.row(rhs);
    if (const auto* lin = std::get_if<LinearParams>(&model_->params)) {
        Vector out = matvec(lin->w_right_entity, e_rhs);
        axpy(1.0, e.right_offset.span(), out.span());
        return out;
    }
    Vector out = matvec(e.right_map, e_rhs);
    axpy(1.0, std::get<BilinearParams>(model_->params).right_bias.span(), out.span());
    return out;
}

double RelationOperators::energy(const Triple& t) { return -dot(g_left(t.lhs, t.rel), g_right(t.rhs, t.rel)); }

BatchGradient::BatchGradient(const Model& model)
    : params_(zero_params(model.form(), model.dim_p(), model.dim_d())),
      rows_(model.embeddings.size(), model.dim_d()),
      touched_flag_(model.embeddings.size(), 0) {
    if (model.form() == Form::bilinear) {
        pending_left_ = Matrix(model.embeddings.size(), model.dim_p() * model.dim_d());
        pending_right_ = Matrix(model.embeddings.size(), model.dim_p() * model.dim_d());
        pending_flag_.assign(model.embeddings.size(), 0);
    }
}

std::span<double> BatchGradient::touch(SymbolId id) {
    if (!touched_flag_[id]) {
        touched_flag_[id] = 1;
        touched_.push_back(id);
    }
    return rows_.row(id);
}

double BatchGradient::add(RelationOperators& ops, const Triple& t, double scale) {
    const Model& model = ops.model();
    if (model.embeddings.size() != rows_.rows() || model.params.index() != params_.index())
        throw ShapeError("batch gradient does not match the model");
    const Vector left = ops.g_left(t.lhs, t.rel);
    const Vector right = ops.g_right(t.rhs, t.rel);
    const auto e_lhs = model.embeddings.row(t.lhs);
    const auto e_rel = model.embeddings.row(t.rel);
    const auto e_rhs = model.embeddings.row(t.rhs);

    // dE/dleft = -right, dE/dright = -left
    if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        auto& g = std::get<LinearParams>(params_);
        add_outer(g.w_left_entity, -scale, right, e_lhs);
        add_outer(g.w_left_relation, -scale, right, e_rel);
        add_outer(g.w_right_entity, -scale, left, e_rhs);
        add_outer(g.w_right_relation, -scale, left, e_rel);
        axpy(-scale, right, g.left_bias.span());
        axpy(-scale, left, g.right_bias.span());
        axpy(-scale, matvec_transposed(lin->w_left_entity, right).span(), touch(t.lhs));
        axpy(-scale, matvec_transposed(lin->w_right_entity, left).span(), touch(t.rhs));
        const auto rel_grad = touch(t.rel);
        axpy(-scale, matvec_transposed(lin->w_left_relation, right).span(), rel_grad);
        axpy(-scale, matvec_transposed(lin->w_right_relation, left).span(), rel_grad);
        return -dot(left, right);
    }

    auto& g = std::get<BilinearParams>(params_);
    const RelationOperators::Entry& ops_entry = ops.entry(t.rel);
    axpy(-scale, right, g.left_bias.span());
    axpy(-scale, left, g.right_bias.span());
    axpy(-scale, matvec_transposed(ops_entry.left_map, right).span(), touch(t.lhs));
    axpy(-scale, matvec_transposed(ops_entry.right_map, left).span(), touch(t.rhs));
    touch(t.rel);

    // The tensor and relation-row terms are linear in right (x) e_lhs and
    // left (x) e_rhs, so those outer products are summed per relation.
    if (!pending_flag_[t.rel]) {
        pending_flag_[t.rel] = 1;
        pending_.push_back(t.rel);
    }
    const std::size_t d = model.dim_d();
    auto pl = pending_left_.row(t.rel);
    auto pr = pending_right_.row(t.rel);
    for (std::size_t i = 0; i < right.size(); ++i) {
        axpy(-scale * right[i], e_lhs, pl.subspan(i * d, d));
        axpy(-scale * left[i], e_rhs, pr.subspan(i * d, d));
    }
    return -dot(left, right);
}

void BatchGradient::finish(const Model& model) {
    if (pending_.empty()) return;
    const auto& bil = std::get<BilinearParams>(model.params);
    auto& g = std::get<BilinearParams>(params_);
    const std::size_t p = g.w_left.dim1();
    const std::size_t d = g.w_left.dim2();
    for (const SymbolId rel : pending_) {
        const auto e_rel = model.embeddings.row(rel);
        const auto rel_grad = rows_.row(rel);
        for (auto [w, grad, pending] : {std::tuple{&bil.w_left, &g.w_left, pending_left_.row(rel)},
                                        std::tuple{&bil.w_right, &g.w_right, pending_right_.row(rel)}}) {
            const auto wv = w->values();
            auto gv = grad->values();
            for (std::size_t ij = 0; ij < p * d; ++ij) {
                const double c = pending[ij];
                if (c == 0.0) continue;
                axpy(c, e_rel, gv.subspan(ij * d, d));
                axpy(c, wv.subspan(ij * d, d), rel_grad);
            }
            std::ranges::fill(pending, 0.0);
        }
        pending_flag_[rel] = 0;
    }
    pending_.clear();
}

void BatchGradient::clear() {
    params_ = zero_params(form_of(params_), params_dim_p(params_), params_dim_d(params_));
    for (auto id : touched_) {
        std::ranges::fill(rows_.row(id), 0.0);
        touched_flag_[id] = 0;
    }
    touched_.clear();
    for (auto id : pending_) {
        std::ranges::fill(pending_left_.row(id), 0.0);
        std::ranges::fill(pending_right_.row(id), 0.0);
        pending_flag_[id] = 0;
    }
    pending_.clear();
}

}  // namespace sme
