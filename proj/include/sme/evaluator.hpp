#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sme/dataset.hpp"
#include "sme/model.hpp"
#include "sme/trainer.hpp"

namespace sme {

struct ScoredSet {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
};

// score_i = -energy(triple_i). Transformed embeddings are cached per
// (symbol, relation) pair, so repeated pairs cost one dot product each.
ScoredSet score_set(const Model& model, const TripleSet& triples);

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;

    bool operator==(const PrPoint&) const = default;
};

// Precision-recall points for thresholds walked from the highest score down.
// Tied scores form one threshold. The curve starts at (0, 1).
std::vector<PrPoint> pr_curve(const ScoredSet& scored);

// Trapezoidal area under a curve ordered by recall.
double trapezoid_area(const std::vector<PrPoint>& curve);

// Throws UndefinedMetricError unless both labels occur.
double auc_pr(const ScoredSet& scored);

struct FoldResult {
    std::size_t fold = 0;
    double auc = 0.0;
    std::vector<PrPoint> curve;
    TrainTrace trace;
};

struct EvalReport {
    std::string dataset;
    Form form = Form::bilinear;
    std::vector<double> per_fold_auc;
    double mean = 0.0;
    double std = 0.0;
    std::vector<std::vector<PrPoint>> curves;
    std::map<std::string, std::string> config;
};

// Mean and sample standard deviation (n - 1 denominator; 0 for one value).
std::pair<double, double> mean_and_std(const std::vector<double>& values);

struct CrossValidationOptions {
    std::size_t jobs = 1;
    // Invoked once per completed epoch with the fold index; may be called
    // from worker threads when jobs > 1 (calls are serialized).
    std::function<void(std::size_t fold, const EpochRecord&)> on_epoch;
    std::function<void(const FoldResult&)> on_fold;
    // Restrict to a subset of folds; empty means all.
    std::vector<std::size_t> folds;
};

// Per-fold training seed: independent of the number of worker threads.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

// Trains one freshly initialised model per fold and scores that fold's test
// records.
EvalReport cross_validate(const Dataset& data, const FoldSplit& split, const std::string& dataset_name,
                          const ModelSpec& spec, const TrainConfig& config,
                          const CrossValidationOptions& options = {});

// Line-oriented report.
void write_text_report(std::ostream& out, const EvalReport& report);

// Structured report with keys: dataset, form, per_fold_auc, mean, std,
// spread, config, and pr_curves when `with_curves` is set.
std::string report_to_json(const EvalReport& report, bool with_curves = false);
EvalReport report_from_json(const std::string& text);

}  // namespace sme
