#include "har/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "har/error.hpp"
#include "har/loss.hpp"
#include "har/model.hpp"
#include "har/rng.hpp"
#include "har/version.hpp"
#include "har/zoo.hpp"

namespace har::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool nan_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i] && !(std::isnan(a[i]) && std::isnan(b[i]))) return false;
    return true;
}

}  // namespace

bool BenchmarkReport::operator==(const BenchmarkReport& other) const {
    return folds == other.folds && summaries == other.summaries &&
           model_order == other.model_order &&
           nan_equal(error_reduction_matrix, other.error_reduction_matrix) &&
           dataset == other.dataset && master_seed == other.master_seed &&
           config_hash == other.config_hash && normalization == other.normalization &&
           tool_version == other.tool_version && stats_note == other.stats_note;
}

void BenchmarkConfig::validate() const {
    if (models.empty()) throw ConfigError("benchmark: no models selected");
    for (const std::string& m : models)
        if (!zoo::is_model_name(m)) throw ConfigError("unknown model name '" + m + "'");
    if (normalization != "per-fold" && normalization != "global")
        throw ConfigError("normalization must be 'per-fold' or 'global', got '" + normalization +
                          "'");
    if (jobs == 0) throw ConfigError("jobs must be at least 1");
    train.validate();
}

FoldReport run_fold(const std::string& model_name, const data::FoldAssignment& fold,
                    const data::WindowedDataset& dataset, const BenchmarkConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    FoldReport rep;
    rep.model = model_name;
    rep.fold_index = fold.fold_index;
    rep.test_subject = fold.test_subject;
    rep.seed = train::fold_seed(cfg.train.master_seed, model_name, fold.fold_index);
    rep.config_hash = cfg.config_hash;

    const data::FoldSlices slices = data::split_fold(dataset, fold);

    data::Normalizer norm;
    if (cfg.normalization == "global") {
        std::vector<const data::Window*> all;
        all.reserve(dataset.windows.size());
        for (const data::Window& w : dataset.windows) all.push_back(&w);
        norm = data::fit_normalizer(all, "all subjects (test subject included)");
    } else {
        norm = data::fit_normalizer(slices.train,
                                    "train subjects, fold " + std::to_string(fold.fold_index));
    }

    // fold-local normalized copies; the shared dataset is never modified
    std::vector<data::Window> train_copy(slices.train.size()), test_copy(slices.test.size());
    for (std::size_t i = 0; i < slices.train.size(); ++i) {
        train_copy[i] = *slices.train[i];
        data::apply_normalizer(norm, train_copy[i]);
    }
    for (std::size_t i = 0; i < slices.test.size(); ++i) {
        test_copy[i] = *slices.test[i];
        data::apply_normalizer(norm, test_copy[i]);
    }
    rep.train_windows = train_copy.size();
    rep.test_windows = test_copy.size();

    std::vector<const data::Window*> train_ptrs(train_copy.size()), test_ptrs(test_copy.size());
    for (std::size_t i = 0; i < train_copy.size(); ++i) train_ptrs[i] = &train_copy[i];
    for (std::size_t i = 0; i < test_copy.size(); ++i) test_ptrs[i] = &test_copy[i];

    try {
        const nn::ModelSpec spec = zoo::build_model(model_name);
        Rng init_rng = Rng(rep.seed).stream("init");
        nn::Model model = nn::Model::init(spec, init_rng);

        train::TrainConfig tc = cfg.train;
        tc.master_seed = rep.seed;
        const train::FitResult fitted = train::fit(model, train_ptrs, tc);
        rep.epochs_run = fitted.trace.epochs_run;
        rep.best_epoch = fitted.trace.best_epoch;

        const train::Evaluation ev = train::evaluate(model, test_ptrs);
        std::vector<std::size_t> labels(test_ptrs.size());
        for (std::size_t i = 0; i < test_ptrs.size(); ++i)
            labels[i] = train::argmax_lowest(test_ptrs[i]->label);
        rep.confusion = confusion_matrix(ev.predictions, labels, spec.num_classes);
        rep.accuracy = rep.confusion.accuracy_percent();
        rep.loss = ev.mean_loss;
    } catch (const TrainError& e) {
        rep.failed = true;
        rep.failure_reason = e.what();
        rep.accuracy = 0.0;
        rep.loss = 0.0;
        rep.epochs_run = 0;
        rep.best_epoch = 0;
        rep.confusion = ConfusionMatrix();
    }

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<ModelSummary> summarize(const std::vector<FoldReport>& folds,
                                    const std::vector<std::string>& model_order) {
    std::vector<ModelSummary> out;
    out.reserve(model_order.size());
    for (const std::string& name : model_order) {
        ModelSummary s;
        s.model = name;
        std::vector<double> accs, losses, epochs;
        for (const FoldReport& f : folds) {
            if (f.model != name) continue;
            ++s.folds_attempted;
            if (f.failed) {
                ++s.folds_failed;
                continue;
            }
            accs.push_back(f.accuracy);
            losses.push_back(f.loss);
            epochs.push_back(static_cast<double>(f.epochs_run));
        }
        if (!accs.empty()) s.stats = aggregate_stats(accs, losses, epochs);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> error_reduction_matrix(const std::vector<ModelSummary>& summaries) {
    const std::size_t n = summaries.size();
    std::vector<double> m(n * n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
        if (summaries[i].stats.folds == 0 || summaries[i].stats.mean_accuracy >= 100.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (summaries[j].stats.folds == 0) continue;
            m[i * n + j] =
                error_reduction(summaries[i].stats.mean_accuracy, summaries[j].stats.mean_accuracy);
        }
    }
    return m;
}

BenchmarkReport run_benchmark(const data::WindowedDataset& dataset, const BenchmarkConfig& cfg) {
    cfg.validate();
    const std::vector<int> subjects = dataset.subject_ids();
    if (subjects.size() < 2)
        throw DataError("benchmark needs at least 2 subjects, got " +
                        std::to_string(subjects.size()));
    const std::vector<data::FoldAssignment> folds = data::make_loso_folds(subjects);

    struct Task {
        std::size_t model;
        std::size_t fold;
    };
    std::vector<Task> tasks;
    tasks.reserve(cfg.models.size() * folds.size());
    for (std::size_t m = 0; m < cfg.models.size(); ++m)
        for (std::size_t f = 0; f < folds.size(); ++f) tasks.push_back({m, f});

    // results land in task order, so parallel and sequential runs emit
    // identical reports (per-fold seeds are schedule-independent)
    std::vector<FoldReport> results(tasks.size());
    const std::size_t jobs =
        cfg.deterministic ? 1 : std::min<std::size_t>(std::max<std::size_t>(cfg.jobs, 1), tasks.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            results[i] = run_fold(cfg.models[tasks[i].model], folds[tasks[i].fold], dataset, cfg);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> worker_error(jobs);
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    while (true) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= tasks.size()) break;
                        results[i] =
                            run_fold(cfg.models[tasks[i].model], folds[tasks[i].fold], dataset, cfg);
                    }
                } catch (...) {
                    worker_error[w] = std::current_exception();
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : worker_error)
            if (e) std::rethrow_exception(e);
    }

    BenchmarkReport rep;
    rep.folds = std::move(results);
    rep.model_order = cfg.models;
    rep.summaries = summarize(rep.folds, rep.model_order);
    rep.error_reduction_matrix = error_reduction_matrix(rep.summaries);
    rep.dataset = dataset.provenance;
    rep.master_seed = cfg.train.master_seed;
    rep.config_hash = cfg.config_hash;
    rep.normalization = cfg.normalization;
    rep.tool_version = std::string(kToolName) + " " + kToolVersion;
    rep.stats_note = "accuracy std is the population standard deviation over successful folds";
    return rep;
}

namespace {

nlohmann::json confusion_to_json(const ConfusionMatrix& m) {
    return {{"num_classes", m.num_classes}, {"counts", m.counts}};
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
    ConfusionMatrix m;
    m.num_classes = j.at("num_classes").get<std::size_t>();
    m.counts = j.at("counts").get<std::vector<std::size_t>>();
    if (m.counts.size() != m.num_classes * m.num_classes)
        throw IoError("report: confusion matrix count/size mismatch");
    return m;
}

}  // namespace

nlohmann::json report_to_json(const BenchmarkReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool_version"] = report.tool_version;
    j["master_seed"] = report.master_seed;
    j["config_hash"] = report.config_hash;
    j["normalization"] = report.normalization;
    j["stats_note"] = report.stats_note;
    j["dataset"] = {{"source_files", report.dataset.source_files},
                    {"units_note", report.dataset.units_note},
                    {"window_size", report.dataset.window_size},
                    {"stride", report.dataset.stride},
                    {"max_gap", report.dataset.max_gap},
                    {"synthetic", report.dataset.synthetic},
                    {"config_hash", report.dataset.config_hash}};
    j["model_order"] = report.model_order;

    nlohmann::json folds = nlohmann::json::array();
    for (const FoldReport& f : report.folds) {
        folds.push_back({{"model", f.model},
                         {"fold_index", f.fold_index},
                         {"test_subject", f.test_subject},
                         {"failed", f.failed},
                         {"failure_reason", f.failure_reason},
                         {"accuracy", f.accuracy},
                         {"loss", f.loss},
                         {"epochs_run", f.epochs_run},
                         {"best_epoch", f.best_epoch},
                         {"confusion", confusion_to_json(f.confusion)},
                         {"train_windows", f.train_windows},
                         {"test_windows", f.test_windows},
                         {"wall_seconds", f.wall_seconds},
                         {"seed", f.seed},
                         {"config_hash", f.config_hash}});
    }
    j["folds"] = std::move(folds);

    nlohmann::json summaries = nlohmann::json::array();
    for (const ModelSummary& s : report.summaries) {
        summaries.push_back({{"model", s.model},
                             {"folds", s.stats.folds},
                             {"mean_accuracy", s.stats.mean_accuracy},
                             {"accuracy_std", s.stats.accuracy_std},
                             {"accuracy_range", s.stats.accuracy_range},
                             {"mean_loss", s.stats.mean_loss},
                             {"mean_epochs", s.stats.mean_epochs},
                             {"folds_attempted", s.folds_attempted},
                             {"folds_failed", s.folds_failed}});
    }
    j["summaries"] = std::move(summaries);

    // NaN (undefined entry) serializes as null
    j["error_reduction_matrix"] = report.error_reduction_matrix;
    return j;
}

BenchmarkReport report_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1)
        throw IoError("report: unsupported schema version " + j.at("schema_version").dump());

    BenchmarkReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::uint64_t>();
    r.normalization = j.at("normalization").get<std::string>();
    r.stats_note = j.at("stats_note").get<std::string>();

    const nlohmann::json& d = j.at("dataset");
    r.dataset.source_files = d.at("source_files").get<std::vector<std::string>>();
    r.dataset.units_note = d.at("units_note").get<std::string>();
    r.dataset.window_size = d.at("window_size").get<std::size_t>();
    r.dataset.stride = d.at("stride").get<std::size_t>();
    r.dataset.max_gap = d.at("max_gap").get<std::size_t>();
    r.dataset.synthetic = d.at("synthetic").get<bool>();
    r.dataset.config_hash = d.at("config_hash").get<std::uint64_t>();

    r.model_order = j.at("model_order").get<std::vector<std::string>>();

    for (const nlohmann::json& fj : j.at("folds")) {
        FoldReport f;
        f.model = fj.at("model").get<std::string>();
        f.fold_index = fj.at("fold_index").get<std::size_t>();
        f.test_subject = fj.at("test_subject").get<int>();
        f.failed = fj.at("failed").get<bool>();
        f.failure_reason = fj.at("failure_reason").get<std::string>();
        f.accuracy = fj.at("accuracy").get<double>();
        f.loss = fj.at("loss").get<double>();
        f.epochs_run = fj.at("epochs_run").get<std::size_t>();
        f.best_epoch = fj.at("best_epoch").get<std::size_t>();
        f.confusion = confusion_from_json(fj.at("confusion"));
        f.train_windows = fj.at("train_windows").get<std::size_t>();
        f.test_windows = fj.at("test_windows").get<std::size_t>();
        f.wall_seconds = fj.at("wall_seconds").get<double>();
        f.seed = fj.at("seed").get<std::uint64_t>();
        f.config_hash = fj.at("config_hash").get<std::uint64_t>();
        r.folds.push_back(std::move(f));
    }

    for (const nlohmann::json& sj : j.at("summaries")) {
        ModelSummary s;
        s.model = sj.at("model").get<std::string>();
        s.stats.folds = sj.at("folds").get<std::size_t>();
        s.stats.mean_accuracy = sj.at("mean_accuracy").get<double>();
        s.stats.accuracy_std = sj.at("accuracy_std").get<double>();
        s.stats.accuracy_range = sj.at("accuracy_range").get<double>();
        s.stats.mean_loss = sj.at("mean_loss").get<double>();
        s.stats.mean_epochs = sj.at("mean_epochs").get<double>();
        s.folds_attempted = sj.at("folds_attempted").get<std::size_t>();
        s.folds_failed = sj.at("folds_failed").get<std::size_t>();
        r.summaries.push_back(std::move(s));
    }

    for (const nlohmann::json& e : j.at("error_reduction_matrix"))
        r.error_reduction_matrix.push_back(e.is_null() ? kNaN : e.get<double>());
    return r;
}

void strip_timings(BenchmarkReport& report) {
    for (FoldReport& f : report.folds) f.wall_seconds = 0.0;
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string file_header(const BenchmarkReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# tool: %s\n# config_hash: 0x%016llx\n# seed: %llu\n",
                  r.tool_version.c_str(), static_cast<unsigned long long>(r.config_hash),
                  static_cast<unsigned long long>(r.master_seed));
    return buf;
}

std::string summary_csv(const BenchmarkReport& r) {
    std::string out = file_header(r);
    out += "# " + r.stats_note + "\n";
    out += "model,folds_ok,folds_failed,mean_accuracy,accuracy_std,accuracy_range,mean_loss,"
           "mean_epochs\n";
    char line[256];
    for (const ModelSummary& s : r.summaries) {
        std::snprintf(line, sizeof(line), "%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.2f\n", s.model.c_str(),
                      s.stats.folds, s.folds_failed, s.stats.mean_accuracy, s.stats.accuracy_std,
                      s.stats.accuracy_range, s.stats.mean_loss, s.stats.mean_epochs);
        out += line;
    }
    return out;
}

std::string folds_csv(const BenchmarkReport& r) {
    std::string out = file_header(r);
    out += "model,fold,test_subject,failed,accuracy,loss,epochs,best_epoch,train_windows,"
           "test_windows,seed\n";
    char line[320];
    for (const FoldReport& f : r.folds) {
        std::snprintf(line, sizeof(line), "%s,%zu,%d,%d,%.6f,%.6f,%zu,%zu,%zu,%zu,%llu\n",
                      f.model.c_str(), f.fold_index, f.test_subject, f.failed ? 1 : 0, f.accuracy,
                      f.loss, f.epochs_run, f.best_epoch, f.train_windows, f.test_windows,
                      static_cast<unsigned long long>(f.seed));
        out += line;
    }
    return out;
}

std::string plotdata_dat(const BenchmarkReport& r) {
    // gnuplot-friendly whitespace columns; successful folds only
    std::string out = file_header(r);
    out += "# model fold accuracy loss epochs\n";
    char line[200];
    for (const FoldReport& f : r.folds) {
        if (f.failed) continue;
        std::snprintf(line, sizeof(line), "%s %zu %.6f %.6f %zu\n", f.model.c_str(), f.fold_index,
                      f.accuracy, f.loss, f.epochs_run);
        out += line;
    }
    return out;
}

}  // namespace

std::vector<std::string> emit_report(const BenchmarkReport& report, const std::string& out_dir,
                                     const std::vector<std::string>& formats) {
    namespace fs = std::filesystem;
    for (const std::string& f : formats)
        if (f != "csv" && f != "json" && f != "plotdata")
            throw ConfigError("unknown report format '" + f + "'");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    std::vector<std::string> written;
    const fs::path dir(out_dir);
    for (const std::string& f : formats) {
        if (f == "csv") {
            write_text_file(dir / "summary.csv", summary_csv(report));
            written.push_back((dir / "summary.csv").string());
            write_text_file(dir / "folds.csv", folds_csv(report));
            written.push_back((dir / "folds.csv").string());
        } else if (f == "json") {
            write_text_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
            written.push_back((dir / "report.json").string());
        } else {
            write_text_file(dir / "plotdata.dat", plotdata_dat(report));
            written.push_back((dir / "plotdata.dat").string());
        }
    }
    return written;
}

const std::vector<ReferenceRow>& reference_rows() {
    // published mean LOSO results this implementation is compared against;
    // NaN = not published
    static const std::vector<ReferenceRow> rows = {
        {"CNN", 92.8, 0.30, 347.0, 3.0, 9.4},
        {"CNN_LSTM", 91.5, 0.36, 256.8, 4.6, 14.4},
        {"CNN_GRU", 91.1, 0.34, kNaN, kNaN, kNaN},
        {"CNN_RNN", 90.1, 0.37, kNaN, kNaN, kNaN},
        {"LSTM", 90.1, 0.34, 425.0, kNaN, kNaN},
        {"GRU", 89.5, 0.35, 347.0, kNaN, kNaN},
        {"DL", 89.2, 0.55, 241.5, kNaN, kNaN},
        {"RNN", 86.9, 0.47, 400.5, kNaN, kNaN},
        {"Shallow_NN", 84.6, 0.71, 393.5, kNaN, kNaN},
    };
    return rows;
}

const ReferenceRow* reference_for(const std::string& model) {
    for (const ReferenceRow& r : reference_rows())
        if (model == r.model) return &r;
    return nullptr;
}

namespace {

std::string fmt_or_dash(double v, const char* fmt) {
    char buf[48];
    if (std::isnan(v)) {
        std::snprintf(buf, sizeof(buf), "%7s", "-");
    } else {
        std::snprintf(buf, sizeof(buf), fmt, v);
    }
    return buf;
}

}  // namespace

std::string format_report_tables(const BenchmarkReport& r) {
    std::string out;
    char line[320];

    out += "model        folds    acc%     std   range    loss  epochs  | ref acc    d(acc)  "
           "ref loss  d(loss)\n";
    for (const ModelSummary& s : r.summaries) {
        if (s.stats.folds == 0) {
            std::snprintf(line, sizeof(line), "%-12s %2zu/%-2zu  all folds failed\n",
                          s.model.c_str(), s.stats.folds, s.folds_attempted);
            out += line;
            continue;
        }
        const ReferenceRow* ref = reference_for(s.model);
        std::snprintf(line, sizeof(line), "%-12s %2zu/%-2zu %7.2f %7.2f %7.2f %7.3f %7.1f  |",
                      s.model.c_str(), s.stats.folds, s.folds_attempted, s.stats.mean_accuracy,
                      s.stats.accuracy_std, s.stats.accuracy_range, s.stats.mean_loss,
                      s.stats.mean_epochs);
        out += line;
        if (ref) {
            out += fmt_or_dash(ref->accuracy, "%8.1f");
            out += fmt_or_dash(s.stats.mean_accuracy - ref->accuracy, "%+10.2f");
            out += fmt_or_dash(ref->loss, "%10.2f");
            out += fmt_or_dash(s.stats.mean_loss - ref->loss, "%+9.2f");
        } else {
            out += "       -         -         -        -";
        }
        out += '\n';
    }

    // improvement block over the weakest successful model: raw accuracy
    // points and error reduction answer different questions, so emit both
    std::size_t base = r.summaries.size();
    for (std::size_t i = 0; i < r.summaries.size(); ++i) {
        if (r.summaries[i].stats.folds == 0) continue;
        if (base == r.summaries.size() ||
            r.summaries[i].stats.mean_accuracy < r.summaries[base].stats.mean_accuracy)
            base = i;
    }
    const std::size_t n = r.summaries.size();
    if (base < n && r.summaries[base].stats.mean_accuracy < 100.0 &&
        r.error_reduction_matrix.size() == n * n) {
        std::snprintf(line, sizeof(line), "\nimprovement over %s (%.2f%%):\n",
                      r.summaries[base].model.c_str(), r.summaries[base].stats.mean_accuracy);
        out += line;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == base || r.summaries[j].stats.folds == 0) continue;
            const double pts =
                r.summaries[j].stats.mean_accuracy - r.summaries[base].stats.mean_accuracy;
            const double er = r.error_reduction_matrix[base * n + j];
            std::snprintf(line, sizeof(line), "  %-12s %+7.2f pts   %s%% error reduction\n",
                          r.summaries[j].model.c_str(), pts, fmt_or_dash(er, "%.1f").c_str());
            out += line;
        }
    }
    return out;
}

}  // namespace har::eval
