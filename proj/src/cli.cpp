#include "sme/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sme/dataset.hpp"
#include "sme/errors.hpp"
#include "sme/evaluator.hpp"
#include "sme/model_io.hpp"
#include "sme/trainer.hpp"

namespace sme {

namespace {

enum class LogLevel { quiet, info, debug };

LogLevel log_level_from_env() {
    const char* env = std::getenv("SME_LOG");
    if (env == nullptr || *env == '\0') return LogLevel::info;
    const std::string_view v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    throw ConfigError("SME_LOG must be quiet, info or debug (got '" + std::string(v) + "')");
}

template <typename T>
T parse_setting(const std::string& key, const std::string& text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("setting " + key + ": invalid value '" + text + "'");
    return value;
}

std::size_t parse_patience(const std::string& text) {
    if (text == "inf") return unlimited_patience;
    return parse_setting<std::size_t>("patience", text);
}

std::string format_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Values given on the command line; unset options keep manifest or default
// values.
struct RunOptions {
    std::string dataset;
    std::string form;
    std::size_t dim_d = 0;
    std::size_t dim_p = 0;
    double lr = 0.0;
    double margin = 0.0;
    std::size_t epochs = 0;
    std::string patience;
    std::size_t batch = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::string corruption;
    std::size_t negatives = 0;
    std::size_t jobs = 1;
    std::string out;

    std::map<std::string, CLI::Option*> given;

    bool has(const std::string& name) const {
        auto it = given.find(name);
        return it != given.end() && it->second->count() > 0;
    }
};

void add_run_options(CLI::App& cmd, RunOptions& o) {
    o.given["dataset"] = cmd.add_option("--dataset", o.dataset, "dataset manifest (or a triple file)")->required();
    o.given["form"] = cmd.add_option("--form", o.form, "model form: linear or bilinear");
    o.given["dim_d"] = cmd.add_option("--dim-d", o.dim_d, "embedding dimension d");
    o.given["dim_p"] = cmd.add_option("--dim-p", o.dim_p, "transformed embedding dimension p");
    o.given["lr"] = cmd.add_option("--lr", o.lr, "SGD learning rate");
    o.given["margin"] = cmd.add_option("--margin", o.margin, "ranking margin");
    o.given["epochs"] = cmd.add_option("--epochs", o.epochs, "maximum number of epochs");
    o.given["patience"] = cmd.add_option("--patience", o.patience, "epochs without validation gain (or inf)");
    o.given["batch"] = cmd.add_option("--batch", o.batch, "mini-batch size");
    o.given["folds"] = cmd.add_option("--folds", o.folds, "number of cross-validation folds");
    o.given["seed"] = cmd.add_option("--seed", o.seed, "random seed");
    o.given["corruption"] = cmd.add_option("--corruption", o.corruption, "corrupted slot: lhs, rhs, both, rel or all");
    o.given["negatives"] = cmd.add_option("--negatives", o.negatives, "corrupted samples per positive per epoch");
}

struct ResolvedRun {
    Manifest manifest;
    ModelSpec spec;
    TrainConfig config;
};

Manifest manifest_for(const std::string& path_text) {
    const std::filesystem::path path(path_text);
    if (!std::filesystem::exists(path)) throw ConfigError("dataset not found: " + path_text);
    if (path.extension() == ".manifest") return read_manifest(path);
    Manifest m;
    m.name = path.stem().string();
    m.triples = path;
    return m;
}

// defaults < manifest < command line
ResolvedRun resolve(const RunOptions& o) {
    ResolvedRun r;
    r.manifest = manifest_for(o.dataset);
    for (const auto& [key, value] : r.manifest.settings) {
        if (key == "form") r.spec.form = parse_form(value);
        else if (key == "dim_d") r.spec.dim_d = parse_setting<std::size_t>(key, value);
        else if (key == "dim_p") r.spec.dim_p = parse_setting<std::size_t>(key, value);
        else if (key == "lr") r.config.learning_rate = parse_setting<double>(key, value);
        else if (key == "margin") r.config.margin = parse_setting<double>(key, value);
        else if (key == "epochs") r.config.epochs_max = parse_setting<std::size_t>(key, value);
        else if (key == "patience") r.config.patience = parse_patience(value);
        else if (key == "batch") r.config.batch_size = parse_setting<std::size_t>(key, value);
        else if (key == "corruption") r.config.corruption_mode = parse_corruption_mode(value);
        else if (key == "negatives") r.config.negatives = parse_setting<std::size_t>(key, value);
        else throw ConfigError("manifest: unknown setting '" + key + "'");
    }
    r.config.seed = r.manifest.seed;

    if (o.has("form")) r.spec.form = parse_form(o.form);
    if (o.has("dim_d")) r.spec.dim_d = o.dim_d;
    if (o.has("dim_p")) r.spec.dim_p = o.dim_p;
    if (o.has("lr")) r.config.learning_rate = o.lr;
    if (o.has("margin")) r.config.margin = o.margin;
    if (o.has("epochs")) r.config.epochs_max = o.epochs;
    if (o.has("patience")) r.config.patience = parse_patience(o.patience);
    if (o.has("batch")) r.config.batch_size = o.batch;
    if (o.has("folds")) r.manifest.folds = o.folds;
    if (o.has("seed")) {
        r.manifest.seed = o.seed;
        r.config.seed = o.seed;
    }
    if (o.has("corruption")) r.config.corruption_mode = parse_corruption_mode(o.corruption);
    if (o.has("negatives")) r.config.negatives = o.negatives;

    if (r.spec.dim_d == 0 || r.spec.dim_p == 0) throw ConfigError("--dim-d and --dim-p must be positive");
    r.config.validate();
    return r;
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", 100.0 * fraction);
    return buf;
}

int cmd_inspect(const std::string& dataset, std::ostream& out) {
    const Manifest m = manifest_for(dataset);
    const Dataset data = load_triples(m.triples);
    const std::size_t pos = count_positives(data.records);
    out << "entities=" << data.dict.entity_count() << " relations=" << data.dict.relation_count()
        << " records=" << data.records.size()
        << " valid=" << percent(static_cast<double>(pos) / static_cast<double>(data.records.size())) << "%\n";
    return exit_ok;
}

int cmd_train(const RunOptions& o, std::size_t fold, LogLevel level, std::ostream& out) {
    const ResolvedRun run = resolve(o);
    const Dataset data = load_triples(run.manifest.triples);
    const FoldSplit split = make_folds(data.records.size(), run.manifest.folds, run.manifest.seed);
    if (fold >= split.fold_count()) throw ConfigError("--fold must be below the fold count");

    TrainConfig cfg = run.config;
    cfg.seed = fold_seed(run.config.seed, fold);
    EpochObserver observer;
    if (level != LogLevel::quiet) observer = [&](const EpochRecord& r) { out << format_epoch(r) << '\n'; };

    const TrainResult result =
        train(split.train(data.records, fold), split.valid(data.records, fold), data.dict, run.spec, cfg, observer);
    save_model(std::filesystem::path(o.out), data.dict, result.model);

    if (level != LogLevel::quiet) {
        const double test_auc = auc_pr(score_set(result.model, split.test(data.records, fold)));
        char buf[160];
        std::snprintf(buf, sizeof buf, "best_epoch=%zu val_auc=%.6f test_auc=%.6f", result.trace.best_epoch,
                      result.trace.best_valid_auc, test_auc);
        out << buf << '\n';
    }
    return exit_ok;
}

int cmd_eval(const RunOptions& o, bool curves, LogLevel level, std::ostream& out, std::ostream& err) {
    const ResolvedRun run = resolve(o);
    const Dataset data = load_triples(run.manifest.triples);
    const FoldSplit split = make_folds(data.records.size(), run.manifest.folds, run.manifest.seed);

    CrossValidationOptions cv;
    cv.jobs = o.jobs;
    if (level != LogLevel::quiet)
        cv.on_epoch = [&](std::size_t fold, const EpochRecord& r) { out << "fold=" << fold << ' ' << format_epoch(r) << '\n'; };
    if (level == LogLevel::debug) {
        cv.on_fold = [&](const FoldResult& r) {
            err << "fold " << r.fold << ": best epoch " << r.trace.best_epoch << ", test auc " << r.auc << '\n';
        };
    }
    const EvalReport report = cross_validate(data, split, run.manifest.name, run.spec, run.config, cv);

    std::ofstream text(o.out + ".txt");
    std::ofstream json(o.out + ".json");
    if (!text || !json) throw DataError("cannot write report files with prefix " + o.out);
    write_text_report(text, report);
    json << report_to_json(report, curves) << '\n';
    if (!text || !json) throw DataError("failed writing report files with prefix " + o.out);
    write_text_report(out, report);
    return exit_ok;
}

std::vector<std::string> split_triple(const std::string& text) {
    std::vector<std::string> fields;
    if (text.find('\t') != std::string::npos) {
        std::string field;
        std::istringstream ss(text);
        while (std::getline(ss, field, '\t')) fields.push_back(field);
    } else {
        std::istringstream ss(text);
        std::string field;
        while (ss >> field) fields.push_back(field);
    }
    if (fields.size() != 3 || std::ranges::any_of(fields, [](const std::string& f) { return f.empty(); }))
        throw ParseError("expected a triple 'lhs rel rhs', got '" + text + "'");
    return fields;
}

int cmd_score(const std::string& model_path, const std::vector<std::string>& triples, std::istream& in,
              std::ostream& out) {
    const ModelFile file = load_model(std::filesystem::path(model_path));
    auto score_one = [&](const std::string& text) {
        const auto f = split_triple(text);
        const Triple t{file.dict.at(f[0]), file.dict.at(f[1]), file.dict.at(f[2])};
        out << f[0] << '\t' << f[1] << '\t' << f[2] << '\t' << format_score(-energy(file.model, t)) << '\n';
    };
    if (!triples.empty()) {
        for (const auto& t : triples) score_one(t);
    } else {
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            score_one(line);
        }
    }
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semantic matching energy models for multi-relational data"};
    app.name("sme");
    app.require_subcommand(1);

    std::string inspect_dataset;
    auto* inspect = app.add_subcommand("inspect", "print dataset statistics");
    inspect->add_option("--dataset,dataset", inspect_dataset, "dataset manifest or triple file")->required();

    RunOptions train_opts;
    std::size_t fold = 0;
    auto* train_cmd = app.add_subcommand("train", "train one model on a cross-validation fold");
    add_run_options(*train_cmd, train_opts);
    train_cmd->add_option("--fold", fold, "fold whose test part is held out (0-based)");
    train_cmd->add_option("--out", train_opts.out, "model file to write")->required();

    RunOptions eval_opts;
    bool curves = false;
    auto* eval_cmd = app.add_subcommand("eval", "cross-validated AUC-PR evaluation");
    add_run_options(*eval_cmd, eval_opts);
    eval_cmd->add_option("--jobs", eval_opts.jobs, "folds trained in parallel")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--out", eval_opts.out, "report prefix (<out>.txt, <out>.json)")->required();
    eval_cmd->add_flag("--curves", curves, "include precision-recall curves in the JSON report");

    std::string model_path;
    std::vector<std::string> triples;
    auto* score_cmd = app.add_subcommand("score", "print score = -energy for triples");
    score_cmd->add_option("--model", model_path, "model file")->required();
    score_cmd->add_option("triples", triples, "triples as 'lhs rel rhs' (read from stdin when absent)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        const LogLevel level = log_level_from_env();
        if (*inspect) return cmd_inspect(inspect_dataset, out);
        if (*train_cmd) return cmd_train(train_opts, fold, level, out);
        if (*eval_cmd) return cmd_eval(eval_opts, curves, level, out, err);
        if (*score_cmd) return cmd_score(model_path, triples, in, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_usage;
}

}  // namespace sme
