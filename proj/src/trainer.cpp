#include "sme/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "sme/evaluator.hpp"

namespace sme {

namespace {

template <typename F>
void for_each_block(Params& params, const Params& other, F&& f) {
    if (auto* lin = std::get_if<LinearParams>(&params)) {
        const auto& o = std::get<LinearParams>(other);
        f(lin->w_left_entity.values(), o.w_left_entity.values());
        f(lin->w_left_relation.values(), o.w_left_relation.values());
        f(lin->w_right_entity.values(), o.w_right_entity.values());
        f(lin->w_right_relation.values(), o.w_right_relation.values());
        f(lin->left_bias.span(), o.left_bias.span());
        f(lin->right_bias.span(), o.right_bias.span());
    } else {
        auto& bil = std::get<BilinearParams>(params);
        const auto& o = std::get<BilinearParams>(other);
        f(bil.w_left.values(), o.w_left.values());
        f(bil.w_right.values(), o.w_right.values());
        f(bil.left_bias.span(), o.left_bias.span());
        f(bil.right_bias.span(), o.right_bias.span());
    }
}

}  // namespace

std::string_view to_string(CorruptionMode mode) {
    switch (mode) {
        case CorruptionMode::lhs: return "lhs";
        case CorruptionMode::rhs: return "rhs";
        case CorruptionMode::both: return "both";
        case CorruptionMode::rel: return "rel";
        case CorruptionMode::all: return "all";
    }
    return "both";
}

CorruptionMode parse_corruption_mode(std::string_view text) {
    if (text == "lhs") return CorruptionMode::lhs;
    if (text == "rhs") return CorruptionMode::rhs;
    if (text == "both") return CorruptionMode::both;
    if (text == "rel") return CorruptionMode::rel;
    if (text == "all") return CorruptionMode::all;
    throw ConfigError("unknown corruption mode '" + std::string(text) + "' (expected lhs, rhs, both, rel or all)");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be > 0");
    if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be > 0");
    if (epochs_max < 1) throw ConfigError("epochs_max must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (negatives < 1) throw ConfigError("negatives per positive must be >= 1");
}

std::string format_epoch(const EpochRecord& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f val_auc=%.6f secs=%.3f", r.epoch, r.mean_loss, r.valid_auc,
                  r.seconds);
    return buf;
}

namespace {

SymbolId draw_other(SymbolId original, std::span<const SymbolId> pool, std::mt19937_64& rng) {
    const auto it = std::lower_bound(pool.begin(), pool.end(), original);
    const bool present = it != pool.end() && *it == original;
    const std::size_t choices = pool.size() - (present ? 1 : 0);
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, choices - 1)(rng);
    if (present && pick >= static_cast<std::size_t>(it - pool.begin())) ++pick;
    return pool[pick];
}

}  // namespace

Triple corrupt(const Triple& t, CorruptionMode mode, const Dictionary& dict, std::mt19937_64& rng) {
    enum Slot { lhs, rel, rhs };
    Slot slot = lhs;
    switch (mode) {
        case CorruptionMode::lhs: slot = lhs; break;
        case CorruptionMode::rhs: slot = rhs; break;
        case CorruptionMode::rel: slot = rel; break;
        case CorruptionMode::both: slot = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? lhs : rhs; break;
        case CorruptionMode::all: slot = static_cast<Slot>(std::uniform_int_distribution<int>(0, 2)(rng)); break;
    }
    Triple out = t;
    if (slot == rel) {
        if (dict.relation_count() < 2) throw ConfigError("relation corruption needs at least two relation types");
        out.rel = draw_other(t.rel, dict.relations(), rng);
    } else {
        if (dict.entity_count() < 2) throw ConfigError("corruption needs at least two entities");
        SymbolId& target = slot == lhs ? out.lhs : out.rhs;
        target = draw_other(target, dict.entities(), rng);
    }
    return out;
}

double ranking_loss(double e_pos, double e_neg, double margin) { return std::max(0.0, margin + e_pos - e_neg); }

SgdWorkspace::SgdWorkspace(const Model& model) : ops_(model), grad_(model) {}

double sgd_step(std::span<const TrainingPair> batch, Model& model, const TrainConfig& config,
                SgdWorkspace& ws) {
    if (batch.empty()) return 0.0;
    ws.ops_.reset(model);
    ws.grad_.clear();

    double total = 0.0;
    bool any_update = false;
    for (const auto& pair : batch) {
        const double e_pos = ws.ops_.energy(pair.positive);
        const double e_neg = ws.ops_.energy(pair.negative);
        const double loss = ranking_loss(e_pos, e_neg, config.margin);
        if (!std::isfinite(loss)) throw NumericalError("non-finite ranking loss during training");
        total += loss;
        if (loss <= 0.0) continue;
        any_update = true;
        // d(loss)/d(theta) = dE(pos)/d(theta) - dE(neg)/d(theta)
        ws.grad_.add(ws.ops_, pair.positive, 1.0);
        ws.grad_.add(ws.ops_, pair.negative, -1.0);
    }
    if (!any_update) return total / static_cast<double>(batch.size());

    ws.grad_.finish(model);
    bool finite = all_finite(ws.grad_.params());
    for (auto id : ws.grad_.touched()) finite = finite && all_finite(ws.grad_.row(id));
    if (!finite) throw NumericalError("non-finite gradient during training");

    const double lr = config.learning_rate;
    for_each_block(model.params, ws.grad_.params(),
                   [lr](std::span<double> w, std::span<const double> g) { axpy(-lr, g, w); });
    for (auto id : ws.grad_.touched()) axpy(-lr, ws.grad_.row(id), model.embeddings.row(id));
    return total / static_cast<double>(batch.size());
}

double sgd_step(std::span<const TrainingPair> batch, Model& model, const TrainConfig& config) {
    SgdWorkspace ws(model);
    return sgd_step(batch, model, config, ws);
}

double train_epoch(const TripleSet& positives, const Dictionary& dict, Model& model,
                   const TrainConfig& config, std::mt19937_64& rng) {
    if (positives.empty()) throw ConfigError("no positive training records");
    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    SgdWorkspace ws(model);
    std::vector<TrainingPair> batch;
    batch.reserve(config.batch_size * config.negatives);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t stop = std::min(order.size(), start + config.batch_size);
        batch.clear();
        for (std::size_t i = start; i < stop; ++i) {
            const Triple& pos = positives[order[i]].triple;
            for (std::size_t k = 0; k < config.negatives; ++k)
                batch.push_back({pos, corrupt(pos, config.corruption_mode, dict, rng)});
        }
        total += sgd_step(batch, model, config, ws) * static_cast<double>(batch.size());
    }
    model.embeddings.normalize_rows();
    if (!all_finite(model)) throw NumericalError("model parameters became non-finite");
    return total / static_cast<double>(positives.size() * config.negatives);
}

TrainResult train(const TripleSet& train_set, const TripleSet& valid, const Dictionary& dict, const ModelSpec& spec,
                  const TrainConfig& config, const EpochObserver& observer) {
    config.validate();
    if (train_set.empty()) throw ConfigError("empty training set");
    if (valid.empty()) throw ConfigError("empty validation set");
    const TripleSet positives = positives_of(train_set);
    if (positives.empty()) throw ConfigError("training set has no positive records");

    std::mt19937_64 rng(config.seed);
    Model model = init_model(spec, dict.size(), rng);
    TrainResult result{model, {}};
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs_max; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = train_epoch(positives, dict, model, config, rng);
        rec.valid_auc = auc_pr(score_set(model, valid));
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.trace.epochs.push_back(rec);
        if (observer) observer(rec);

        if (epoch == 1 || rec.valid_auc > result.trace.best_valid_auc) {
            result.model = model;
            result.trace.best_epoch = epoch;
            result.trace.best_valid_auc = rec.valid_auc;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    return result;
}

}  // namespace sme
