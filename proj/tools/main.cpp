// har — build, verify, train and benchmark the activity-recognition models.
//
// Subcommands: ingest, synth, params, solve-cnn, gradcheck, train, benchmark,
// report. Settings come from built-in defaults, then an optional JSON config
// file (--config), then command-line flags; flags win. The fully resolved
// configuration is hashed and echoed into every output.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "har/dataset.hpp"
#include "har/error.hpp"
#include "har/gradcheck.hpp"
#include "har/harness.hpp"
#include "har/loss.hpp"
#include "har/model.hpp"
#include "har/pamap2.hpp"
#include "har/params.hpp"
#include "har/rng.hpp"
#include "har/solver.hpp"
#include "har/trainer.hpp"
#include "har/version.hpp"
#include "har/weights_io.hpp"
#include "har/zoo.hpp"

namespace {

using nlohmann::json;

// exit codes, documented in --help and the README
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;  // bad configuration or flags
constexpr int kExitData = 3;    // missing/malformed data or file i/o
constexpr int kExitVerify = 4;  // a verification suite failed
constexpr int kExitTrain = 5;   // training aborted

struct CliConfig {
    std::string data_dir = "data";
    std::string cache = "windows.cache";
    std::string out_dir = "out";
    std::vector<std::string> models = {"all"};
    std::uint64_t master_seed = 42;
    bool deterministic = true;
    std::size_t jobs = 1;
    bool synthetic = false;
    std::string normalization = "per-fold";

    std::size_t window = 200;
    std::size_t stride = 60;
    std::size_t max_gap = 10;

    std::size_t synth_subjects = 8;
    std::size_t synth_windows_per_class = 400;

    har::train::TrainConfig train;
};

json config_to_json(const CliConfig& c) {
    return {{"data_dir", c.data_dir},
            {"cache", c.cache},
            {"out_dir", c.out_dir},
            {"models", c.models},
            {"master_seed", c.master_seed},
            {"deterministic", c.deterministic},
            {"jobs", c.jobs},
            {"synthetic", c.synthetic},
            {"normalization", c.normalization},
            {"window", {{"size", c.window}, {"stride", c.stride}, {"max_gap", c.max_gap}}},
            {"synth", {{"subjects", c.synth_subjects}, {"windows_per_class", c.synth_windows_per_class}}},
            {"train",
             {{"learning_rate", c.train.learning_rate},
              {"batch_size", c.train.batch_size},
              {"max_epochs", c.train.max_epochs},
              {"patience", c.train.patience},
              {"beta1", c.train.beta1},
              {"beta2", c.train.beta2},
              {"epsilon", c.train.epsilon},
              {"validation_fraction", c.train.validation_fraction}}}};
}

// keys are validated so a typo in a config file fails loudly instead of
// silently keeping the default
void apply_config_file(CliConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw har::ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw har::ConfigError("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw har::ConfigError("config file '" + path + "': expected an object");

    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "data_dir") c.data_dir = value.get<std::string>();
            else if (key == "cache") c.cache = value.get<std::string>();
            else if (key == "out_dir") c.out_dir = value.get<std::string>();
            else if (key == "models") c.models = value.get<std::vector<std::string>>();
            else if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
            else if (key == "deterministic") c.deterministic = value.get<bool>();
            else if (key == "jobs") c.jobs = value.get<std::size_t>();
            else if (key == "synthetic") c.synthetic = value.get<bool>();
            else if (key == "normalization") c.normalization = value.get<std::string>();
            else if (key == "window") {
                for (const auto& [wk, wv] : value.items()) {
                    if (wk == "size") c.window = wv.get<std::size_t>();
                    else if (wk == "stride") c.stride = wv.get<std::size_t>();
                    else if (wk == "max_gap") c.max_gap = wv.get<std::size_t>();
                    else throw har::ConfigError("unknown config key 'window." + wk + "'");
                }
            } else if (key == "synth") {
                for (const auto& [sk, sv] : value.items()) {
                    if (sk == "subjects") c.synth_subjects = sv.get<std::size_t>();
                    else if (sk == "windows_per_class") c.synth_windows_per_class = sv.get<std::size_t>();
                    else throw har::ConfigError("unknown config key 'synth." + sk + "'");
                }
            } else if (key == "train") {
                for (const auto& [tk, tv] : value.items()) {
                    if (tk == "learning_rate") c.train.learning_rate = tv.get<double>();
                    else if (tk == "batch_size") c.train.batch_size = tv.get<std::size_t>();
                    else if (tk == "max_epochs") c.train.max_epochs = tv.get<std::size_t>();
                    else if (tk == "patience") c.train.patience = tv.get<std::size_t>();
                    else if (tk == "beta1") c.train.beta1 = tv.get<double>();
                    else if (tk == "beta2") c.train.beta2 = tv.get<double>();
                    else if (tk == "epsilon") c.train.epsilon = tv.get<double>();
                    else if (tk == "validation_fraction") c.train.validation_fraction = tv.get<double>();
                    else throw har::ConfigError("unknown config key 'train." + tk + "'");
                }
            } else {
                throw har::ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw har::ConfigError("config file '" + path + "': " + e.what());
    }
}

// "all" expands to the full zoo; names are validated here so every command
// fails before doing any work
std::vector<std::string> resolve_models(const std::vector<std::string>& selection) {
    std::vector<std::string> out;
    for (const std::string& m : selection) {
        if (m == "all") {
            for (const std::string& name : har::zoo::model_names()) out.push_back(name);
        } else if (har::zoo::is_model_name(m)) {
            out.push_back(m);
        } else {
            throw har::ConfigError("unknown model name '" + m + "'");
        }
    }
    if (out.empty()) throw har::ConfigError("no models selected");
    return out;
}

struct Resolved {
    CliConfig cfg;
    json echo;                    // fully materialized configuration
    std::uint64_t hash = 0;       // fnv-1a over the canonical dump
};

Resolved finalize(CliConfig cfg) {
    cfg.models = resolve_models(cfg.models);
    cfg.train.master_seed = cfg.master_seed;
    Resolved r;
    r.echo = config_to_json(cfg);
    r.echo["tool_version"] = std::string(har::kToolName) + " " + har::kToolVersion;
    r.hash = har::fnv1a64(r.echo.dump());
    r.echo["config_hash"] = r.hash;
    r.cfg = std::move(cfg);
    return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw har::IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw har::IoError("failed writing '" + path.string() + "'");
}

// echo the resolved configuration into the output directory
void write_config_echo(const Resolved& r) {
    std::error_code ec;
    std::filesystem::create_directories(r.cfg.out_dir, ec);
    if (ec)
        throw har::IoError("cannot create output directory '" + r.cfg.out_dir +
                           "': " + ec.message());
    write_text(std::filesystem::path(r.cfg.out_dir) / "config.json", r.echo.dump(2) + "\n");
}

har::data::WindowedDataset load_dataset(const Resolved& r) {
    if (r.cfg.synthetic) {
        std::printf("generating synthetic dataset: %zu subjects, %zu windows/class, seed %" PRIu64
                    "\n",
                    r.cfg.synth_subjects, r.cfg.synth_windows_per_class, r.cfg.master_seed);
        return har::data::generate_synthetic(r.cfg.synth_subjects, r.cfg.synth_windows_per_class,
                                             r.cfg.master_seed);
    }
    return har::data::load_cache(r.cfg.cache);
}

void print_window_counts(const har::data::WindowedDataset& ds) {
    std::map<int, std::array<std::size_t, har::data::kNumClasses>> counts;
    for (const har::data::Window& w : ds.windows) {
        auto& row = counts[w.subject_id];
        row[har::train::argmax_lowest(w.label)] += 1;
    }
    std::printf("%-10s", "subject");
    for (const char* name : har::data::kClassNames) std::printf(" %12s", name);
    std::printf(" %8s\n", "total");
    std::array<std::size_t, har::data::kNumClasses> col_total{};
    for (const auto& [subject, row] : counts) {
        std::size_t total = 0;
        std::printf("%-10d", subject);
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::printf(" %12zu", row[c]);
            total += row[c];
            col_total[c] += row[c];
        }
        std::printf(" %8zu\n", total);
    }
    std::printf("%-10s", "total");
    for (std::size_t c : col_total) std::printf(" %12zu", c);
    std::printf(" %8zu\n", ds.windows.size());
}

int cmd_synth(const Resolved& r) {
    const har::data::WindowedDataset ds = har::data::generate_synthetic(
        r.cfg.synth_subjects, r.cfg.synth_windows_per_class, r.cfg.master_seed);
    har::data::save_cache(ds, r.cfg.cache);
    std::printf("wrote %zu windows to %s\n", ds.windows.size(), r.cfg.cache.c_str());
    print_window_counts(ds);
    return kExitOk;
}

int cmd_ingest(const Resolved& r) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(r.cfg.data_dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("subject", 0) == 0 && entry.path().extension() == ".dat")
            files.push_back(entry.path().string());
    }
    if (ec) throw har::DataError("cannot read data directory '" + r.cfg.data_dir + "': " + ec.message());
    if (files.empty())
        throw har::DataError("no subject files found in '" + r.cfg.data_dir +
                             "' (expected subject*.dat)");
    std::sort(files.begin(), files.end());

    har::data::IngestOptions opts;
    opts.window = r.cfg.window;
    opts.stride = r.cfg.stride;
    opts.max_gap = r.cfg.max_gap;
    const har::data::WindowedDataset ds = har::data::ingest_pamap2(files, opts);
    har::data::save_cache(ds, r.cfg.cache);
    std::printf("ingested %zu files -> %zu windows -> %s\n", files.size(), ds.windows.size(),
                r.cfg.cache.c_str());
    print_window_counts(ds);
    return kExitOk;
}

int cmd_params() {
    const auto rows = har::zoo::verify_param_counts();
    std::printf("%-10s  %-13s  %9s  %9s  %6s\n", "model", "derivation", "expected", "computed",
                "delta");
    for (const auto& row : rows) {
        std::printf("%-10s  %-13s  %9zu  %9zu  %+6lld  %s\n", row.name.c_str(),
                    har::zoo::derivation_status_name(row.status), row.expected, row.computed,
                    row.delta, row.hard_match ? "ok" : "MISMATCH");
    }
    if (!har::zoo::all_counts_match(rows)) {
        std::printf("parameter-count verification FAILED\n");
        return kExitVerify;
    }
    std::printf("parameter-count verification passed\n");
    return kExitOk;
}

int cmd_solve_cnn(std::size_t target, const std::string& family_name, std::size_t show) {
    har::zoo::CnnSearchSpace space;
    space.family = har::zoo::solve_family_from_name(family_name);
    const har::zoo::SolveResult res = har::zoo::solve_conv_architecture(target, space);

    std::printf("target %zu, family %s: %zu exact match(es)\n", target,
                har::zoo::solve_family_name(res.family), res.exact.size());
    const auto& list = res.exact.empty() ? res.nearest : res.exact;
    if (res.exact.empty())
        std::printf("no exact match; %zu nearest:\n", res.nearest.size());
    for (std::size_t i = 0; i < list.size() && i < show; ++i) {
        const auto& cfg = list[i];
        std::printf("  [%zu] %s = %zu (delta %+lld)\n", i, cfg.str(res.family).c_str(), cfg.count,
                    static_cast<long long>(cfg.count) - static_cast<long long>(target));
    }
    if (list.size() > show) std::printf("  ... %zu more\n", list.size() - show);
    if (!res.has_canonical()) {
        std::printf("search space exhausted without candidates\n");
        return kExitVerify;
    }
    std::printf("canonical: %s = %zu\n", res.canonical().str(res.family).c_str(),
                res.canonical().count);
    return kExitOk;
}

// small spec per layer kind; every suite ends in the softmax readout the
// backward pass assumes
struct GradSuite {
    const char* name;
    har::nn::ModelSpec spec;
};

std::vector<GradSuite> gradcheck_suites() {
    using har::nn::Activation;
    using har::nn::LayerSpec;
    using har::nn::ModelSpec;
    auto make = [](const char* name, std::size_t steps, std::size_t channels,
                   std::vector<LayerSpec> layers) {
        ModelSpec s;
        s.name = name;
        s.input_steps = steps;
        s.input_channels = channels;
        s.num_classes = 4;
        s.layers = std::move(layers);
        return s;
    };
    std::vector<GradSuite> suites;
    suites.push_back({"dense_relu", make("dense_relu", 6, 3,
                                         {LayerSpec::flatten(), LayerSpec::dense(8, Activation::Relu),
                                          LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"dense_tanh", make("dense_tanh", 6, 3,
                                         {LayerSpec::flatten(), LayerSpec::dense(8, Activation::Tanh),
                                          LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"conv1d", make("conv1d", 12, 3,
                                     {LayerSpec::conv1d(4, 3, Activation::Relu),
                                      LayerSpec::maxpool1d(2), LayerSpec::conv1d(3, 2, Activation::Relu),
                                      LayerSpec::flatten(), LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"global_maxpool", make("global_maxpool", 12, 3,
                                             {LayerSpec::conv1d(4, 3, Activation::Relu),
                                              LayerSpec::global_maxpool1d(),
                                              LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"simple_rnn", make("simple_rnn", 9, 3,
                                         {LayerSpec::simple_rnn(6, Activation::Tanh, true),
                                          LayerSpec::simple_rnn(5, Activation::Relu, false),
                                          LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"lstm", make("lstm", 8, 3,
                                   {LayerSpec::lstm(5, true), LayerSpec::lstm(4, false),
                                    LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"gru", make("gru", 8, 3,
                                  {LayerSpec::gru(5, true), LayerSpec::gru(4, false),
                                   LayerSpec::dense(4, Activation::Softmax)})});
    suites.push_back({"dropout_inert", make("dropout_inert", 6, 3,
                                            {LayerSpec::flatten(), LayerSpec::dense(8, Activation::Relu),
                                             LayerSpec::dropout(0.3),
                                             LayerSpec::dense(4, Activation::Softmax)})});
    return suites;
}

int cmd_gradcheck(std::size_t instances, double tolerance, std::uint64_t seed) {
    har::Rng root(seed);
    bool all_pass = true;
    for (const GradSuite& suite : gradcheck_suites()) {
        har::Rng rng = root.stream(suite.name);
        double worst = 0.0;
        bool pass = true;
        for (std::size_t i = 0; i < instances; ++i) {
            har::nn::ParameterBundle params = har::nn::init_params(suite.spec, rng);
            har::Tensor x(std::vector<std::size_t>{suite.spec.input_steps, suite.spec.input_channels});
            for (double& v : x.flat()) v = rng.gaussian();
            har::Tensor target(std::vector<std::size_t>{suite.spec.num_classes});
            target.flat()[rng.index(suite.spec.num_classes)] = 1.0;
            const auto report =
                har::nn::gradient_check(suite.spec, params, x, target, tolerance);
            worst = std::max(worst, report.max_rel_error());
            pass = pass && report.pass;
        }
        std::printf("%-16s %zu instances, max rel error %.3e  %s\n", suite.name, instances, worst,
                    pass ? "ok" : "FAIL");
        all_pass = all_pass && pass;
    }
    if (!all_pass) {
        std::printf("gradient check FAILED (tolerance %.1e)\n", tolerance);
        return kExitVerify;
    }
    std::printf("gradient check passed (tolerance %.1e)\n", tolerance);
    return kExitOk;
}

int cmd_train(const Resolved& r, const std::string& model_name, std::size_t fold_index) {
    if (!har::zoo::is_model_name(model_name))
        throw har::ConfigError("unknown model name '" + model_name + "'");
    const har::data::WindowedDataset ds = load_dataset(r);
    const auto folds = har::data::make_loso_folds(ds.subject_ids());
    if (fold_index >= folds.size())
        throw har::ConfigError("fold " + std::to_string(fold_index) + " out of range (dataset has " +
                               std::to_string(folds.size()) + " folds)");
    const har::data::FoldAssignment& fold = folds[fold_index];

    har::eval::BenchmarkConfig bench;
    bench.models = {model_name};
    bench.train = r.cfg.train;
    bench.normalization = r.cfg.normalization;
    bench.config_hash = r.hash;
    bench.validate();

    write_config_echo(r);

    // mirror of run_fold, keeping the fitted weights and the training trace
    const std::uint64_t seed = har::train::fold_seed(r.cfg.master_seed, model_name, fold_index);
    const har::data::FoldSlices slices = har::data::split_fold(ds, fold);
    const har::data::Normalizer norm =
        r.cfg.normalization == "global"
            ? har::data::fit_normalizer(
                  [&] {
                      std::vector<const har::data::Window*> all;
                      for (const auto& w : ds.windows) all.push_back(&w);
                      return all;
                  }(),
                  "all subjects (test subject included)")
            : har::data::fit_normalizer(slices.train,
                                        "train subjects, fold " + std::to_string(fold_index));
    std::vector<har::data::Window> train_copy(slices.train.size()), test_copy(slices.test.size());
    std::vector<const har::data::Window*> train_ptrs(train_copy.size()), test_ptrs(test_copy.size());
    for (std::size_t i = 0; i < train_copy.size(); ++i) {
        train_copy[i] = *slices.train[i];
        har::data::apply_normalizer(norm, train_copy[i]);
        train_ptrs[i] = &train_copy[i];
    }
    for (std::size_t i = 0; i < test_copy.size(); ++i) {
        test_copy[i] = *slices.test[i];
        har::data::apply_normalizer(norm, test_copy[i]);
        test_ptrs[i] = &test_copy[i];
    }

    const har::nn::ModelSpec spec = har::zoo::build_model(model_name);
    har::Rng init_rng = har::Rng(seed).stream("init");
    har::nn::Model model = har::nn::Model::init(spec, init_rng);
    har::train::TrainConfig tc = r.cfg.train;
    tc.master_seed = seed;

    std::printf("training %s on fold %zu (test subject %d): %zu train / %zu test windows\n",
                model_name.c_str(), fold_index, fold.test_subject, train_ptrs.size(),
                test_ptrs.size());
    int code = kExitOk;
    json meta = {{"model", model_name},
                 {"fold", fold_index},
                 {"test_subject", fold.test_subject},
                 {"seed", seed},
                 {"config", r.echo}};
    const std::filesystem::path dir(r.cfg.out_dir);
    const std::string stem = model_name + "_fold" + std::to_string(fold_index);
    try {
        const har::train::FitResult fitted = har::train::fit(model, train_ptrs, tc);
        har::nn::save_weights(spec, model.params(), (dir / (stem + ".weights")).string());
        write_text(dir / (stem + "_trace.csv"), fitted.trace.to_csv());

        const har::train::Evaluation ev = har::train::evaluate(model, test_ptrs);
        std::printf("epochs %zu (best %zu), test accuracy %.2f%%, test loss %.4f\n",
                    fitted.trace.epochs_run, fitted.trace.best_epoch, 100.0 * ev.accuracy,
                    ev.mean_loss);
        meta["epochs_run"] = fitted.trace.epochs_run;
        meta["best_epoch"] = fitted.trace.best_epoch;
        meta["test_accuracy"] = 100.0 * ev.accuracy;
        meta["test_loss"] = ev.mean_loss;
        meta["weights"] = stem + ".weights";
        std::printf("wrote %s/{%s.weights,%s_trace.csv,%s_meta.json}\n", r.cfg.out_dir.c_str(),
                    stem.c_str(), stem.c_str(), stem.c_str());
    } catch (const har::TrainError& e) {
        std::fprintf(stderr, "training failed: %s\n", e.what());
        meta["failed"] = true;
        meta["failure_reason"] = e.what();
        code = kExitTrain;
    }
    write_text(dir / (stem + "_meta.json"), meta.dump(2) + "\n");
    return code;
}

int cmd_benchmark(const Resolved& r) {
    const har::data::WindowedDataset ds = load_dataset(r);

    har::eval::BenchmarkConfig bench;
    bench.models = r.cfg.models;
    bench.train = r.cfg.train;
    bench.jobs = r.cfg.jobs;
    bench.deterministic = r.cfg.deterministic;
    bench.normalization = r.cfg.normalization;
    bench.config_hash = r.hash;
    bench.validate();

    write_config_echo(r);
    const har::eval::BenchmarkReport report = har::eval::run_benchmark(ds, bench);
    const auto written = har::eval::emit_report(report, r.cfg.out_dir);

    std::printf("%s", har::eval::format_report_tables(report).c_str());
    std::printf("\nwrote:\n");
    for (const std::string& path : written) std::printf("  %s\n", path.c_str());

    std::size_t failed = 0;
    for (const auto& f : report.folds) failed += f.failed ? 1 : 0;
    if (failed == report.folds.size()) {
        std::fprintf(stderr, "every fold failed\n");
        return kExitTrain;
    }
    if (failed > 0) std::printf("warning: %zu of %zu folds failed (flagged in the report)\n", failed, report.folds.size());
    return kExitOk;
}

int cmd_report(const Resolved& r, const std::string& in_json, const std::string& weights_path,
               const std::string& model_name, std::size_t fold_index,
               const std::vector<std::string>& formats) {
    har::eval::BenchmarkReport report;
    if (!in_json.empty()) {
        std::ifstream in(in_json);
        if (!in) throw har::IoError("cannot open '" + in_json + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw har::IoError("cannot parse '" + in_json + "': " + e.what());
        }
        report = har::eval::report_from_json(j);
    } else if (!weights_path.empty()) {
        // evaluate a saved weight file on its fold's held-out subject
        if (!har::zoo::is_model_name(model_name))
            throw har::ConfigError("--weights needs --model (unknown or missing model name)");
        const har::data::WindowedDataset ds = load_dataset(r);
        const auto folds = har::data::make_loso_folds(ds.subject_ids());
        if (fold_index >= folds.size())
            throw har::ConfigError("fold " + std::to_string(fold_index) +
                                   " out of range (dataset has " + std::to_string(folds.size()) +
                                   " folds)");
        const har::data::FoldAssignment& fold = folds[fold_index];
        const har::data::FoldSlices slices = har::data::split_fold(ds, fold);
        const har::data::Normalizer norm =
            r.cfg.normalization == "global"
                ? har::data::fit_normalizer(
                      [&] {
                          std::vector<const har::data::Window*> all;
                          for (const auto& w : ds.windows) all.push_back(&w);
                          return all;
                      }(),
                      "all subjects (test subject included)")
                : har::data::fit_normalizer(slices.train,
                                            "train subjects, fold " + std::to_string(fold_index));
        std::vector<har::data::Window> test_copy(slices.test.size());
        std::vector<const har::data::Window*> test_ptrs(test_copy.size());
        for (std::size_t i = 0; i < test_copy.size(); ++i) {
            test_copy[i] = *slices.test[i];
            har::data::apply_normalizer(norm, test_copy[i]);
            test_ptrs[i] = &test_copy[i];
        }

        const har::nn::ModelSpec spec = har::zoo::build_model(model_name);
        har::nn::Model model(spec, har::nn::load_weights(spec, weights_path));
        const har::train::Evaluation ev = har::train::evaluate(model, test_ptrs);

        har::eval::FoldReport f;
        f.model = model_name;
        f.fold_index = fold_index;
        f.test_subject = fold.test_subject;
        f.train_windows = slices.train.size();
        f.test_windows = test_copy.size();
        f.seed = har::train::fold_seed(r.cfg.master_seed, model_name, fold_index);
        f.config_hash = r.hash;
        std::vector<std::size_t> labels(test_ptrs.size());
        for (std::size_t i = 0; i < test_ptrs.size(); ++i)
            labels[i] = har::train::argmax_lowest(test_ptrs[i]->label);
        f.confusion = har::eval::confusion_matrix(ev.predictions, labels, spec.num_classes);
        f.accuracy = f.confusion.accuracy_percent();
        f.loss = ev.mean_loss;

        report.folds = {f};
        report.model_order = {model_name};
        report.summaries = har::eval::summarize(report.folds, report.model_order);
        report.error_reduction_matrix = har::eval::error_reduction_matrix(report.summaries);
        report.dataset = ds.provenance;
        report.master_seed = r.cfg.master_seed;
        report.config_hash = r.hash;
        report.normalization = r.cfg.normalization;
        report.tool_version = std::string(har::kToolName) + " " + har::kToolVersion;
        report.stats_note = "accuracy std is the population standard deviation over successful folds";
    } else {
        throw har::ConfigError("report needs --in <report.json> or --weights <file>");
    }

    const auto written = har::eval::emit_report(report, r.cfg.out_dir, formats);
    std::printf("%s", har::eval::format_report_tables(report).c_str());
    std::printf("\nwrote:\n");
    for (const std::string& path : written) std::printf("  %s\n", path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(har::kToolName) +
                 " — activity-recognition benchmark (exit codes: 0 ok, 2 config, 3 data/io, 4 "
                 "verification, 5 training)"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");

    // flags shadow a default-initialized config; only flags the user actually
    // passed are applied on top of the config file
    CliConfig flags;
    std::vector<std::pair<CLI::Option*, std::function<void(CliConfig&)>>> overrides;
    auto opt = [&](CLI::Option* option, std::function<void(CliConfig&)> apply) {
        overrides.emplace_back(option, std::move(apply));
    };
    opt(app.add_option("--data", flags.data_dir, "raw dataset directory"),
        [&](CliConfig& c) { c.data_dir = flags.data_dir; });
    opt(app.add_option("--cache", flags.cache, "windowed dataset cache file"),
        [&](CliConfig& c) { c.cache = flags.cache; });
    opt(app.add_option("--out", flags.out_dir, "output directory"),
        [&](CliConfig& c) { c.out_dir = flags.out_dir; });
    opt(app.add_option("--models", flags.models, "comma-separated model names, or 'all'")
            ->delimiter(','),
        [&](CliConfig& c) { c.models = flags.models; });
    opt(app.add_option("--seed", flags.master_seed, "master seed"),
        [&](CliConfig& c) { c.master_seed = flags.master_seed; });
    opt(app.add_flag("--deterministic,!--no-deterministic", flags.deterministic,
                     "sequential fold execution (default on)"),
        [&](CliConfig& c) { c.deterministic = flags.deterministic; });
    opt(app.add_option("--jobs", flags.jobs, "fold-level worker threads (with --no-deterministic)"),
        [&](CliConfig& c) { c.jobs = flags.jobs; });
    opt(app.add_flag("--synthetic", flags.synthetic, "use the generated synthetic dataset"),
        [&](CliConfig& c) { c.synthetic = flags.synthetic; });
    opt(app.add_option("--normalization", flags.normalization,
                       "'per-fold' (leak-free) or 'global'"),
        [&](CliConfig& c) { c.normalization = flags.normalization; });
    opt(app.add_option("--window", flags.window, "window length in samples"),
        [&](CliConfig& c) { c.window = flags.window; });
    opt(app.add_option("--stride", flags.stride, "window stride in samples"),
        [&](CliConfig& c) { c.stride = flags.stride; });
    opt(app.add_option("--max-gap", flags.max_gap, "longest interpolatable dropout, in samples"),
        [&](CliConfig& c) { c.max_gap = flags.max_gap; });
    opt(app.add_option("--synth-subjects", flags.synth_subjects, "synthetic subject count"),
        [&](CliConfig& c) { c.synth_subjects = flags.synth_subjects; });
    opt(app.add_option("--synth-windows", flags.synth_windows_per_class,
                       "synthetic windows per class (total)"),
        [&](CliConfig& c) { c.synth_windows_per_class = flags.synth_windows_per_class; });
    opt(app.add_option("--lr", flags.train.learning_rate, "Adam learning rate"),
        [&](CliConfig& c) { c.train.learning_rate = flags.train.learning_rate; });
    opt(app.add_option("--batch", flags.train.batch_size, "batch size"),
        [&](CliConfig& c) { c.train.batch_size = flags.train.batch_size; });
    opt(app.add_option("--max-epochs", flags.train.max_epochs, "epoch cap"),
        [&](CliConfig& c) { c.train.max_epochs = flags.train.max_epochs; });
    opt(app.add_option("--patience", flags.train.patience, "early-stopping patience"),
        [&](CliConfig& c) { c.train.patience = flags.train.patience; });
    opt(app.add_option("--val-fraction", flags.train.validation_fraction,
                       "validation hold-out fraction"),
        [&](CliConfig& c) { c.train.validation_fraction = flags.train.validation_fraction; });

    CLI::App* synth = app.add_subcommand("synth", "generate the synthetic dataset cache");
    CLI::App* ingest = app.add_subcommand("ingest", "parse raw subject files into a window cache");
    CLI::App* params = app.add_subcommand("params", "verify model parameter counts");
    CLI::App* solve = app.add_subcommand("solve-cnn", "search conv architectures by parameter count");
    std::size_t solve_target = 51308;
    std::string solve_family = "cnn";
    std::size_t solve_show = 10;
    solve->add_option("--target", solve_target, "trainable-parameter target");
    solve->add_option("--family", solve_family, "cnn | hybrid-rnn | dense-only");
    solve->add_option("--show", solve_show, "list at most this many matches");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::size_t gc_instances = 10;
    double gc_tolerance = 1e-6;
    std::uint64_t gc_seed = 7;
    gradcheck->add_option("--instances", gc_instances, "random instances per layer suite");
    gradcheck->add_option("--tolerance", gc_tolerance, "max relative error allowed");
    gradcheck->add_option("--gc-seed", gc_seed, "suite seed");

    CLI::App* train = app.add_subcommand("train", "train one model on one fold");
    std::string train_model;
    std::size_t train_fold = 0;
    train->add_option("--model", train_model, "model name")->required();
    train->add_option("--fold", train_fold, "fold index (test subject position)");

    CLI::App* benchmark = app.add_subcommand("benchmark", "full LOSO benchmark over the model zoo");

    CLI::App* report = app.add_subcommand("report", "re-emit a stored report, or evaluate saved weights");
    std::string report_in, report_weights, report_model;
    std::size_t report_fold = 0;
    std::vector<std::string> report_formats = {"csv", "json", "plotdata"};
    report->add_option("--in", report_in, "stored report.json");
    report->add_option("--weights", report_weights, "weight file to evaluate");
    report->add_option("--model", report_model, "model name for --weights");
    report->add_option("--fold", report_fold, "fold index for --weights");
    report->add_option("--formats", report_formats, "any of csv,json,plotdata")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        CliConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        for (const auto& [option, apply] : overrides)
            if (option->count() > 0) apply(cfg);
        const Resolved r = finalize(std::move(cfg));
        std::printf("%s %s, config 0x%016" PRIx64 ", seed %" PRIu64 "\n", har::kToolName,
                    har::kToolVersion, r.hash, r.cfg.master_seed);

        if (synth->parsed()) return cmd_synth(r);
        if (ingest->parsed()) return cmd_ingest(r);
        if (params->parsed()) return cmd_params();
        if (solve->parsed()) return cmd_solve_cnn(solve_target, solve_family, solve_show);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_instances, gc_tolerance, gc_seed);
        if (train->parsed()) return cmd_train(r, train_model, train_fold);
        if (benchmark->parsed()) return cmd_benchmark(r);
        if (report->parsed())
            return cmd_report(r, report_in, report_weights, report_model, report_fold,
                              report_formats);
        throw har::ConfigError("no subcommand given");
    } catch (const har::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const har::TrainError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return kExitTrain;
    } catch (const har::ShapeError& e) {
        std::fprintf(stderr, "verification error: %s\n", e.what());
        return kExitVerify;
    } catch (const har::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const har::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
