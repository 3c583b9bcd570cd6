#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "har/dataset.hpp"
#include "har/metrics.hpp"
#include "har/trainer.hpp"

namespace har::eval {

// Outcome of training one model on one leave-one-subject-out fold.
// A fold that aborts (diverged training) is recorded with failed = true
// instead of crashing the benchmark; its metrics stay zero.
struct FoldReport {
    std::string model;
    std::size_t fold_index = 0;
    int test_subject = 0;
    bool failed = false;
    std::string failure_reason;

    double accuracy = 0.0;  // percent on the held-out subject
    double loss = 0.0;      // mean test cross-entropy
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    ConfusionMatrix confusion;
    std::size_t train_windows = 0;
    std::size_t test_windows = 0;

    double wall_seconds = 0.0;
    std::uint64_t seed = 0;         // fold seed all training randomness derives from
    std::uint64_t config_hash = 0;  // resolved run configuration

    bool operator==(const FoldReport&) const = default;
};

struct ModelSummary {
    std::string model;
    AggregateStats stats;  // over successful folds only
    std::size_t folds_attempted = 0;
    std::size_t folds_failed = 0;

    bool operator==(const ModelSummary&) const = default;
};

// Resolved benchmark settings. `normalization` is "per-fold" (z-score fitted
// on the fold's training subjects — the leak-free default) or "global"
// (fitted on everyone, test subject included; kept available because some
// published pipelines do this, and the leak is then explicit in the report).
struct BenchmarkConfig {
    std::vector<std::string> models;
    train::TrainConfig train;
    std::size_t jobs = 1;       // fold-level worker threads when > 1
    bool deterministic = true;  // forces sequential execution
    std::string normalization = "per-fold";
    std::uint64_t config_hash = 0;

    void validate() const;  // throws ConfigError
};

struct BenchmarkReport {
    std::vector<FoldReport> folds;  // model run order, then fold index
    std::vector<ModelSummary> summaries;
    std::vector<std::string> model_order;
    // error_reduction(mean of row model, mean of column model), row-major;
    // NaN where undefined (failed model or 100% baseline)
    std::vector<double> error_reduction_matrix;

    data::DatasetProvenance dataset;
    std::uint64_t master_seed = 0;
    std::uint64_t config_hash = 0;
    std::string normalization;
    std::string tool_version;
    std::string stats_note;

    bool operator==(const BenchmarkReport& other) const;  // NaN-tolerant on the matrix
};

// Train one model on one fold: per-fold seed, fold-local normalizer,
// Glorot init, fit, evaluate on the held-out subject.
FoldReport run_fold(const std::string& model_name, const data::FoldAssignment& fold,
                    const data::WindowedDataset& dataset, const BenchmarkConfig& cfg);

// Every (model, fold) pair; failures recorded per fold, never propagated.
// Per-fold seeds are schedule-independent, so parallel and sequential runs
// produce identical reports.
BenchmarkReport run_benchmark(const data::WindowedDataset& dataset, const BenchmarkConfig& cfg);

// Aggregates recomputable from the fold rows (used for report consistency).
std::vector<ModelSummary> summarize(const std::vector<FoldReport>& folds,
                                    const std::vector<std::string>& model_order);
std::vector<double> error_reduction_matrix(const std::vector<ModelSummary>& summaries);

// JSON serialization; round-trips to an equal in-memory report.
nlohmann::json report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& j);

// Zero all wall-clock fields (for byte-comparing two runs).
void strip_timings(BenchmarkReport& report);

// Write report files into out_dir. formats selects among "csv" (summary.csv
// + folds.csv), "json" (report.json), "plotdata" (plotdata.dat, gnuplot
// whitespace columns: model fold accuracy loss epochs). Returns the paths
// written; throws IoError on an unwritable destination.
std::vector<std::string> emit_report(const BenchmarkReport& report, const std::string& out_dir,
                                     const std::vector<std::string>& formats = {"csv", "json",
                                                                                "plotdata"});

// Published benchmark results this project measures itself against. These
// are context for diff-printing only — never assertion targets for real-data
// runs (training stochasticity and unpublished hyper-parameters prevent
// exact replication). NaN marks values that were never published.
struct ReferenceRow {
    const char* model;
    double accuracy;  // mean LOSO accuracy, percent
    double loss;      // mean cross-entropy
    double epochs;    // mean training epochs
    double acc_std;   // accuracy standard deviation
    double acc_range; // best-minus-worst accuracy
};
const std::vector<ReferenceRow>& reference_rows();
const ReferenceRow* reference_for(const std::string& model);

// Human-readable result table with side-by-side reference values, plus the
// improvement block over the weakest baseline (raw accuracy points and
// error reduction — both metrics, since they answer different questions).
std::string format_report_tables(const BenchmarkReport& report);

}  // namespace har::eval
