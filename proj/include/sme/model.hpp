#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <variant>

#include "sme/dataset.hpp"
#include "sme/tensor.hpp"

namespace sme {

enum class Form : std::uint8_t { linear = 0, bilinear = 1 };

std::string_view to_string(Form form);
Form parse_form(std::string_view text);

// One d-dimensional row per dictionary symbol; entities and relation types
// share the table.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t symbols, std::size_t dim) : vectors_(symbols, dim) {}
    explicit EmbeddingTable(Matrix vectors) : vectors_(std::move(vectors)) {}

    std::size_t size() const { return vectors_.rows(); }
    std::size_t dim() const { return vectors_.cols(); }

    // Throws LookupError for an id outside the table.
    std::span<const double> row(SymbolId id) const;
    std::span<double> row(SymbolId id);

    // Projects every row onto the unit sphere.
    void normalize_rows();

    const Matrix& matrix() const { return vectors_; }
    Matrix& matrix() { return vectors_; }

    bool operator==(const EmbeddingTable&) const = default;

private:
    Matrix vectors_;
};

// g_left(l, r) = w_left_entity * l + w_left_relation * r + left_bias, and the
// mirror for the right-hand side.
struct LinearParams {
    Matrix w_left_entity;
    Matrix w_left_relation;
    Matrix w_right_entity;
    Matrix w_right_relation;
    Vector left_bias;
    Vector right_bias;

    LinearParams() = default;
    LinearParams(std::size_t p, std::size_t d)
        : w_left_entity(p, d), w_left_relation(p, d), w_right_entity(p, d), w_right_relation(p, d),
          left_bias(p), right_bias(p) {}

    bool operator==(const LinearParams&) const = default;
};

// g_left(l, r) = (w_left contracted with r along mode 3) * l + left_bias.
// Tensor shape is (p, d, d): output, entity, relation.
struct BilinearParams {
    Tensor3 w_left;
    Tensor3 w_right;
    Vector left_bias;
    Vector right_bias;

    BilinearParams() = default;
    BilinearParams(std::size_t p, std::size_t d)
        : w_left(p, d, d), w_right(p, d, d), left_bias(p), right_bias(p) {}

    bool operator==(const BilinearParams&) const = default;
};

using Params = std::variant<LinearParams, BilinearParams>;

Form form_of(const Params& params);
std::size_t params_dim_p(const Params& params);
std::size_t params_dim_d(const Params& params);

// Zero-filled parameters of the given form and shape.
Params zero_params(Form form, std::size_t p, std::size_t d);

struct ModelSpec {
    Form form = Form::bilinear;
    std::size_t dim_d = 10;
    std::size_t dim_p = 10;
};

struct Model {
    EmbeddingTable embeddings;
    Params params;

    Form form() const { return form_of(params); }
    std::size_t dim_d() const { return embeddings.dim(); }
    std::size_t dim_p() const { return params_dim_p(params); }

    bool operator==(const Model&) const = default;
};

// Embedding rows and weights drawn uniformly in [-1/sqrt(d), 1/sqrt(d)],
// embedding rows then projected to unit norm; biases start at zero.
Model init_model(const ModelSpec& spec, std::size_t symbols, std::mt19937_64& rng);

Vector g_left(const LinearParams& params, std::span<const double> e_lhs, std::span<const double> e_rel);
Vector g_right(const LinearParams& params, std::span<const double> e_rhs, std::span<const double> e_rel);
Vector g_left(const BilinearParams& params, std::span<const double> e_lhs, std::span<const double> e_rel);
Vector g_right(const BilinearParams& params, std::span<const double> e_rhs, std::span<const double> e_rel);

Vector g_left(const Params& params, std::span<const double> e_lhs, std::span<const double> e_rel);
Vector g_right(const Params& params, std::span<const double> e_rhs, std::span<const double> e_rel);

// Energy of a triple: -dot(g_left, g_right). Lower means more plausible; the
// ranking score is -energy.
double energy(const Model& model, const Triple& t);

// Partial derivatives of energy(t). `params` mirrors the model parameters;
// lhs/rel/rhs are the derivatives with respect to each slot's embedding row.
// When two slots name the same symbol, the row gradient is the sum of the
// slot gradients.
struct GradientBundle {
    Params params;
    Vector lhs;
    Vector rel;
    Vector rhs;
};

GradientBundle energy_gradients(const Model& model, const Triple& t);

bool all_finite(const Params& params);
bool all_finite(const Model& model);

// Relation-dependent parts of g_left and g_right for one parameter set, built
// on first use per relation id. Bilinear form: the p x d matrices W x3 e_rel
// of both sides. Linear form: the vectors W_relation e_rel + bias of both
// sides. Call reset() whenever the model changes.
class RelationOperators {
public:
    explicit RelationOperators(const Model& model);

    void reset(const Model& model);
    const Model& model() const { return *model_; }

    Vector g_left(SymbolId lhs, SymbolId rel);
    Vector g_right(SymbolId rhs, SymbolId rel);
    double energy(const Triple& t);

private:
    friend class BatchGradient;

    struct Entry {
        bool ready = false;
        Matrix left_map;
        Matrix right_map;
        Vector left_offset;
        Vector right_offset;
    };

    Entry& entry(SymbolId rel);

    const Model* model_;
    std::vector<Entry> entries_;
    std::vector<SymbolId> ready_ids_;
};

// Running sum of scale * d(energy)/d(theta) over triples scored with the
// same parameters. For the bilinear form the tensor and relation-row terms
// are gathered per relation and expanded by finish(), so add() costs O(p d).
class BatchGradient {
public:
    explicit BatchGradient(const Model& model);

    // Adds scale * gradient of energy(t) and returns energy(t).
    double add(RelationOperators& ops, const Triple& t, double scale);

    // Expands the deferred terms. Must run before the parameters change.
    void finish(const Model& model);

    const Params& params() const { return params_; }
    const std::vector<SymbolId>& touched() const { return touched_; }
    std::span<const double> row(SymbolId id) const { return rows_.row(id); }

    // Zeroes the sum for the next batch.
    void clear();

private:
    std::span<double> touch(SymbolId id);

    Params params_;
    Matrix rows_;
    std::vector<std::uint8_t> touched_flag_;
    std::vector<SymbolId> touched_;
    Matrix pending_left_;
    Matrix pending_right_;
    std::vector<std::uint8_t> pending_flag_;
    std::vector<SymbolId> pending_;
};

}  // namespace sme
