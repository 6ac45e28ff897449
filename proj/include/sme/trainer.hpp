#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sme/dataset.hpp"
#include "sme/model.hpp"

namespace sme {

// Which slot of a positive triple is replaced to form a negative. `both`
// picks lhs or rhs with equal probability; `all` picks lhs, rel or rhs with
// equal probability.
enum class CorruptionMode { lhs, rhs, both, rel, all };

std::string_view to_string(CorruptionMode mode);
CorruptionMode parse_corruption_mode(std::string_view text);

inline constexpr std::size_t unlimited_patience = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
    double learning_rate = 0.01;
    double margin = 1.0;
    std::size_t epochs_max = 500;
    std::size_t batch_size = 32;
    CorruptionMode corruption_mode = CorruptionMode::both;
    // Corrupted samples drawn per positive per epoch.
    std::size_t negatives = 1;
    std::size_t patience = 10;
    std::uint64_t seed = 0;

    // Throws ConfigError on an invalid combination.
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double valid_auc = 0.0;
    double seconds = 0.0;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_valid_auc = 0.0;
};

// `epoch=<n> loss=<f> val_auc=<f> secs=<f>`
std::string format_epoch(const EpochRecord& record);

// Replaces the chosen slot by a uniformly drawn symbol of the same role
// (entity for lhs/rhs, relation type for rel) different from the original.
// Corruptions are not filtered against the training set.
Triple corrupt(const Triple& t, CorruptionMode mode, const Dictionary& dict, std::mt19937_64& rng);

// max(0, margin + e_pos - e_neg)
double ranking_loss(double e_pos, double e_neg, double margin);

struct TrainingPair {
    Triple positive;
    Triple negative;
};

// Reusable gradient buffers sized for one model.
class SgdWorkspace {
public:
    explicit SgdWorkspace(const Model& model);

private:
    friend double sgd_step(std::span<const TrainingPair> batch, Model& model, const TrainConfig& config,
                           SgdWorkspace& workspace);

    RelationOperators ops_;
    BatchGradient grad_;
};

// One mini-batch update. Losses and gradients are taken at the parameters
// before the update; every pair with positive loss adds its gradient, and the
// summed gradient is applied with step learning_rate. Returns the mean loss.
// Throws NumericalError on a non-finite loss or gradient.
double sgd_step(std::span<const TrainingPair> batch, Model& model, const TrainConfig& config,
                SgdWorkspace& workspace);
double sgd_step(std::span<const TrainingPair> batch, Model& model, const TrainConfig& config);

// Shuffles the positives, pairs each with `negatives` corruptions and runs sgd_step
// over consecutive batches, then renormalizes every embedding row. Returns the
// mean loss over all pairs of the epoch.
double train_epoch(const TripleSet& positives, const Dictionary& dict, Model& model,
                   const TrainConfig& config, std::mt19937_64& rng);

struct TrainResult {
    Model model;
    TrainTrace trace;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

// Trains on the positive records of `train` and early-stops on AUC-PR over
// `valid`. Returns the best-validation snapshot.
TrainResult train(const TripleSet& train, const TripleSet& valid, const Dictionary& dict, const ModelSpec& spec,
                  const TrainConfig& config, const EpochObserver& observer = {});

}  // namespace sme
