#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sme/cli.hpp"
#include "sme/dataset.hpp"
#include "sme/evaluator.hpp"
#include "sme/model.hpp"
#include "sme/trainer.hpp"

using namespace sme;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

template <class F>
void run_criterion(int id, const std::string& title, F&& body) {
    try {
        report(id, title, body());
    } catch (const std::exception& e) {
        report(id, title, {false, std::string("error: ") + e.what()});
    }
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// Benchmark settings used for the cross-validated runs.
struct RunSetup {
    ModelSpec spec;
    TrainConfig config;
};

RunSetup setup_for(const std::string& dataset, Form form) {
    RunSetup s;
    s.spec.form = form;
    s.config.learning_rate = 0.001;
    s.config.corruption_mode = CorruptionMode::all;
    s.config.negatives = 20;
    if (dataset == "umls") {
        s.spec.dim_d = 20;
        s.spec.dim_p = 10;
        s.config.epochs_max = 150;
        s.config.patience = 20;
    } else if (dataset == "kinships") {
        s.spec.dim_d = 20;
        s.spec.dim_p = 20;
        s.config.epochs_max = 200;
        s.config.patience = 30;
    } else {
        s.config.epochs_max = 200;
        s.config.patience = 30;
    }
    return s;
}

struct CvResult {
    EvalReport report;
    double seconds;
};

CvResult cross_validated(const fs::path& dir, const std::string& dataset, Form form) {
    const Manifest m = read_manifest(dir / (dataset + ".manifest"));
    const Dataset data = load_triples(m.triples);
    const FoldSplit split = make_folds(data.records.size(), m.folds, m.seed);
    const RunSetup s = setup_for(dataset, form);
    const auto start = Clock::now();
    EvalReport r = cross_validate(data, split, dataset, s.spec, s.config);
    const double secs = seconds_since(start);
    std::fprintf(stderr, "%s %s: mean=%.4f std=%.4f (%.0f s)\n", dataset.c_str(), std::string(to_string(form)).c_str(),
                 r.mean, r.std, secs);
    return {std::move(r), secs};
}

std::string summary(const CvResult& r) {
    return fmt("%s mean=%.4f std=%.4f", std::string(to_string(r.report.form)).c_str(), r.report.mean, r.report.std);
}

Outcome table1_counts(const fs::path& dir) {
    struct Expected {
        const char* name;
        std::size_t relations, entities, records;
    };
    const Expected expected[] = {{"umls", 49, 135, 893025}, {"kinships", 26, 104, 281216}, {"nations", 56, 14, 11191}};
    int matched = 0;
    std::string detail;
    for (const auto& e : expected) {
        std::istringstream in;
        std::ostringstream out, err;
        const int code = run_cli({"inspect", (dir / (std::string(e.name) + ".manifest")).string()}, in, out, err);
        if (code != exit_ok) return {false, std::string(e.name) + ": inspect failed: " + err.str()};
        const Manifest m = read_manifest(dir / (std::string(e.name) + ".manifest"));
        const Dataset d = load_triples(m.triples);
        const std::size_t got[] = {d.dict.relation_count(), d.dict.entity_count(), d.records.size()};
        const std::size_t want[] = {e.relations, e.entities, e.records};
        for (int i = 0; i < 3; ++i) matched += got[i] == want[i];
        detail += fmt("%s rel=%zu/%zu ent=%zu/%zu rec=%zu/%zu; ", e.name, got[0], want[0], got[1], want[1], got[2],
                      want[2]);
    }
    detail += fmt("%d of 9 counts match (got/expected)", matched);
    return {matched == 9, detail};
}

double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

Outcome gradient_suite() {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    std::size_t coords = 0;
    for (Form form : {Form::linear, Form::bilinear}) {
        for (int instance = 0; instance < 20; ++instance) {
            Model m = oracle::random_model(form, 7, 4, 3, rng);
            const Triple t{static_cast<SymbolId>(rng() % 7), static_cast<SymbolId>(rng() % 7),
                           static_cast<SymbolId>(rng() % 7)};
            const GradientBundle g = energy_gradients(m, t);
            const auto f = [&] { return energy(m, t); };

            Params analytic = g.params;
            const auto params = oracle::coordinates(m.params);
            const auto grads = oracle::coordinates(analytic);
            for (std::size_t i = 0; i < params.size(); ++i, ++coords)
                worst = std::max(worst, rel_error(*grads[i], oracle::central_difference(params[i], 1e-5, f)));

            // Rows shared between slots receive the sum of their slot gradients.
            std::vector<Vector> row_grads(7, Vector(m.dim_d()));
            const std::pair<SymbolId, const Vector*> slots[] = {{t.lhs, &g.lhs}, {t.rel, &g.rel}, {t.rhs, &g.rhs}};
            for (const auto& [id, grad] : slots)
                for (std::size_t j = 0; j < m.dim_d(); ++j) row_grads[id][j] += (*grad)[j];
            for (const SymbolId id : {t.lhs, t.rel, t.rhs}) {
                auto row = m.embeddings.row(id);
                for (std::size_t j = 0; j < row.size(); ++j, ++coords)
                    worst = std::max(worst, rel_error(row_grads[id][j], oracle::central_difference(&row[j], 1e-5, f)));
            }
        }
    }
    const double secs = seconds_since(start);
    return {worst < 1e-4 && secs < 10.0,
            fmt("40 instances, %zu coordinates, max relative error %.2e, %.3f s", coords, worst, secs)};
}

Outcome energy_suite() {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (Form form : {Form::linear, Form::bilinear}) {
        for (int instance = 0; instance < 100; ++instance) {
            const std::size_t d = 1 + rng() % 8;
            const std::size_t p = 1 + rng() % 8;
            const Model m = oracle::random_model(form, 9, d, p, rng);
            const Triple t{static_cast<SymbolId>(rng() % 9), static_cast<SymbolId>(rng() % 9),
                           static_cast<SymbolId>(rng() % 9)};
            worst = std::max(worst, std::abs(energy(m, t) - oracle::energy(m, t)));
        }
    }
    return {worst <= 1e-12, fmt("200 instances, max absolute difference %.2e", worst)};
}

Outcome auc_suite() {
    std::mt19937_64 rng(99);
    int mismatches = 0;
    int tie_heavy = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 49;
        // Every third set draws scores from a handful of values.
        const bool ties = trial % 3 == 0;
        tie_heavy += ties;
        ScoredSet s;
        for (std::size_t i = 0; i < n; ++i) {
            s.scores.push_back(ties ? static_cast<double>(rng() % 4) : std::uniform_real_distribution<double>(-3, 3)(rng));
            s.labels.push_back(rng() % 2);
        }
        // Both labels must occur for the metric to be defined.
        const std::size_t pos = rng() % n;
        s.labels[pos] = 1;
        s.labels[(pos + 1 + rng() % (n - 1)) % n] = 0;
        if (auc_pr(s) != oracle::auc_pr(s)) ++mismatches;
    }
    return {mismatches == 0, fmt("1000 sets (%d tie-heavy), %d mismatches", tie_heavy, mismatches)};
}

Outcome determinism(const fs::path& dir) {
    const fs::path tmp = fs::temp_directory_path() / "sme_acceptance";
    fs::create_directories(tmp);
    const auto train_once = [&](const std::string& name) {
        std::istringstream in;
        std::ostringstream out, err;
        const int code = run_cli({"train", "--dataset", (dir / "nations.manifest").string(), "--fold", "2", "--epochs",
                                  "5", "--seed", "17", "--out", (tmp / name).string()},
                                 in, out, err);
        if (code != exit_ok) throw std::runtime_error("train failed: " + err.str());
        std::ifstream f(tmp / name, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    };
    const std::string a = train_once("a.sme");
    const std::string b = train_once("b.sme");
    fs::remove_all(tmp);
    return {a == b && !a.empty(), fmt("model files of %zu and %zu bytes are %s", a.size(), b.size(),
                                      a == b ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: acceptance <benchmark-dir>\n";
        return 2;
    }
    const fs::path dir = argv[1];

    run_criterion(4, "dataset counts", [&] { return table1_counts(dir); });
    run_criterion(5, "gradient suite", [] { return gradient_suite(); });
    run_criterion(6, "energy oracle", [] { return energy_suite(); });
    run_criterion(7, "AUC oracle", [] { return auc_suite(); });
    run_criterion(8, "train determinism", [&] { return determinism(dir); });

    run_criterion(3, "nations", [&] {
        const CvResult bil = cross_validated(dir, "nations", Form::bilinear);
        const CvResult lin = cross_validated(dir, "nations", Form::linear);
        return Outcome{bil.report.mean >= 0.78 && bil.report.mean > lin.report.mean,
                       summary(bil) + ", " + summary(lin) + " (need bilinear >= 0.78 and > linear)"};
    });
    run_criterion(2, "kinships", [&] {
        const CvResult bil = cross_validated(dir, "kinships", Form::bilinear);
        const CvResult lin = cross_validated(dir, "kinships", Form::linear);
        return Outcome{bil.report.mean >= 0.80 && lin.report.mean <= 0.40,
                       summary(bil) + ", " + summary(lin) + " (need bilinear >= 0.80, linear <= 0.40)"};
    });
    run_criterion(1, "umls", [&] {
        const CvResult bil = cross_validated(dir, "umls", Form::bilinear);
        const CvResult lin = cross_validated(dir, "umls", Form::linear);
        const double secs = bil.seconds + lin.seconds;
        return Outcome{bil.report.mean >= 0.95 && lin.report.mean >= 0.95 && secs < 20 * 60,
                       summary(bil) + ", " + summary(lin) +
                           fmt(" (need both >= 0.95 within 1200 s; took %.0f s)", secs)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
