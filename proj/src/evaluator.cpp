#include "sme/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace sme {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Lazily computed g_left / g_right per (symbol, relation) pair.
class TransformCache {
public:
    TransformCache(RelationOperators& ops, bool left) : ops_(ops), left_(left) {}

    std::span<const double> get(SymbolId symbol, SymbolId rel) {
        const std::uint64_t key = (static_cast<std::uint64_t>(symbol) << 32) | rel;
        auto [it, inserted] = slots_.try_emplace(key, slots_.size());
        if (inserted) {
            const Vector v = left_ ? ops_.g_left(symbol, rel) : ops_.g_right(symbol, rel);
            storage_.insert(storage_.end(), v.begin(), v.end());
        }
        const std::size_t p = ops_.model().dim_p();
        return {storage_.data() + it->second * p, p};
    }

private:
    RelationOperators& ops_;
    bool left_;
    std::unordered_map<std::uint64_t, std::size_t> slots_;
    std::vector<double> storage_;
};

}  // namespace

ScoredSet score_set(const Model& model, const TripleSet& triples) {
    ScoredSet out;
    out.scores.reserve(triples.size());
    out.labels.reserve(triples.size());
    RelationOperators ops(model);
    TransformCache left(ops, true);
    TransformCache right(ops, false);
    for (const auto& r : triples) {
        const auto& t = r.triple;
        const double score = dot(left.get(t.lhs, t.rel), right.get(t.rhs, t.rel));
        if (!std::isfinite(score)) throw NumericalError("non-finite score");
        out.scores.push_back(score);
        out.labels.push_back(r.label);
    }
    return out;
}

std::vector<PrPoint> pr_curve(const ScoredSet& s) {
    if (s.scores.size() != s.labels.size()) throw ShapeError("scores and labels differ in length");
    const std::size_t positives =
        static_cast<std::size_t>(std::count(s.labels.begin(), s.labels.end(), std::uint8_t{1}));
    if (positives == 0 || positives == s.labels.size())
        throw UndefinedMetricError("AUC-PR needs at least one positive and one negative label");

    if (!all_finite(s.scores)) throw NumericalError("AUC-PR over non-finite scores");
    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });

    std::vector<PrPoint> curve{{0.0, 1.0}};
    std::size_t tp = 0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = s.scores[order[i]];
        while (i < order.size() && s.scores[order[i]] == threshold) {
            tp += s.labels[order[i]] == 1 ? 1 : 0;
            ++seen;
            ++i;
        }
        curve.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                         static_cast<double>(tp) / static_cast<double>(seen)});
    }
    return curve;
}

double trapezoid_area(const std::vector<PrPoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].recall - curve[i - 1].recall) * (curve[i].precision + curve[i - 1].precision) / 2.0;
    return area;
}

double auc_pr(const ScoredSet& scored) { return trapezoid_area(pr_curve(scored)); }

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
    // splitmix64 over (seed, fold)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(fold) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

EvalReport cross_validate(const Dataset& data, const FoldSplit& split, const std::string& dataset_name,
                          const ModelSpec& spec, const TrainConfig& config, const CrossValidationOptions& options) {
    config.validate();
    std::vector<std::size_t> folds = options.folds;
    if (folds.empty()) {
        folds.resize(split.fold_count());
        std::iota(folds.begin(), folds.end(), std::size_t{0});
    }
    for (auto f : folds)
        if (f >= split.fold_count()) throw ConfigError("fold index " + std::to_string(f) + " out of range");

    std::vector<FoldResult> results(folds.size());
    std::mutex callback_mutex;

    auto run_fold = [&](std::size_t slot) {
        const std::size_t fold = folds[slot];
        TrainConfig cfg = config;
        cfg.seed = fold_seed(config.seed, fold);
        EpochObserver observer;
        if (options.on_epoch) {
            observer = [&, fold](const EpochRecord& rec) {
                std::lock_guard lock(callback_mutex);
                options.on_epoch(fold, rec);
            };
        }
        TrainResult trained =
            train(split.train(data.records, fold), split.valid(data.records, fold), data.dict, spec, cfg, observer);
        FoldResult& res = results[slot];
        res.fold = fold;
        res.curve = pr_curve(score_set(trained.model, split.test(data.records, fold)));
        res.auc = trapezoid_area(res.curve);
        res.trace = std::move(trained.trace);
        if (options.on_fold) {
            std::lock_guard lock(callback_mutex);
            options.on_fold(res);
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, folds.size()));
    if (jobs == 1) {
        for (std::size_t i = 0; i < folds.size(); ++i) run_fold(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (std::size_t i; (i = next.fetch_add(1)) < folds.size();) run_fold(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = folds.size();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    EvalReport report;
    report.dataset = dataset_name;
    report.form = spec.form;
    for (auto& r : results) {
        report.per_fold_auc.push_back(r.auc);
        report.curves.push_back(std::move(r.curve));
    }
    std::tie(report.mean, report.std) = mean_and_std(report.per_fold_auc);
    report.config = {
        {"form", std::string(to_string(spec.form))},
        {"dim_d", std::to_string(spec.dim_d)},
        {"dim_p", std::to_string(spec.dim_p)},
        {"lr", format_double(config.learning_rate)},
        {"margin", format_double(config.margin)},
        {"epochs", std::to_string(config.epochs_max)},
        {"batch", std::to_string(config.batch_size)},
        {"patience", config.patience == unlimited_patience ? "inf" : std::to_string(config.patience)},
        {"corruption", std::string(to_string(config.corruption_mode))},
        {"negatives", std::to_string(config.negatives)},
        {"seed", std::to_string(config.seed)},
        {"folds", std::to_string(split.fold_count())},
    };
    return report;
}

void write_text_report(std::ostream& out, const EvalReport& report) {
    out << "# SME link prediction, area under the precision-recall curve\n";
    out << "# spread is the sample standard deviation over folds\n";
    out << "dataset=" << report.dataset << " form=" << to_string(report.form)
        << " folds=" << report.per_fold_auc.size() << '\n';
    out << "config";
    for (const auto& [k, v] : report.config) out << ' ' << k << '=' << v;
    out << '\n';
    for (std::size_t i = 0; i < report.per_fold_auc.size(); ++i)
        out << "fold=" << i << " auc=" << format_fixed(report.per_fold_auc[i]) << '\n';
    out << "mean=" << format_fixed(report.mean) << " std=" << format_fixed(report.std) << '\n';
}

std::string report_to_json(const EvalReport& report, bool with_curves) {
    nlohmann::json j;
    j["dataset"] = report.dataset;
    j["form"] = std::string(to_string(report.form));
    j["per_fold_auc"] = report.per_fold_auc;
    j["mean"] = report.mean;
    j["std"] = report.std;
    j["spread"] = "sample standard deviation over folds";
    j["config"] = report.config;
    if (with_curves) {
        nlohmann::json curves = nlohmann::json::array();
        for (const auto& c : report.curves) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : c) pts.push_back({p.recall, p.precision});
            curves.push_back(std::move(pts));
        }
        j["pr_curves"] = std::move(curves);
    }
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    EvalReport r;
    try {
        r.dataset = j.at("dataset").get<std::string>();
        r.form = parse_form(j.at("form").get<std::string>());
        r.per_fold_auc = j.at("per_fold_auc").get<std::vector<double>>();
        r.mean = j.at("mean").get<double>();
        r.std = j.at("std").get<double>();
        r.config = j.at("config").get<std::map<std::string, std::string>>();
        if (j.contains("pr_curves")) {
            for (const auto& c : j["pr_curves"]) {
                std::vector<PrPoint> pts;
                for (const auto& p : c) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
                r.curves.push_back(std::move(pts));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return r;
}

}  // namespace sme
