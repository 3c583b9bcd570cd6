#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "har/dataset.hpp"
#include "har/error.hpp"
#include "har/harness.hpp"
#include "har/metrics.hpp"
#include "har/pamap2.hpp"
#include "har/rng.hpp"

using namespace har;
using namespace har::eval;

namespace {

BenchmarkConfig quick_config(std::vector<std::string> models) {
    BenchmarkConfig cfg;
    cfg.models = std::move(models);
    cfg.train.max_epochs = 4;
    cfg.train.patience = 4;
    cfg.train.batch_size = 16;
    cfg.train.master_seed = 7;
    cfg.config_hash = 0xABCD;
    return cfg;
}

}  // namespace

TEST_CASE("accuracy percentages from prediction lists") {
    CHECK(eval::accuracy({0, 1, 2, 3}, {0, 1, 2, 3}) == 100.0);
    CHECK(eval::accuracy({0, 1, 2, 0, 0}, {0, 1, 1, 1, 1}) == doctest::Approx(40.0));

    // 3 of 5 correct
    CHECK(eval::accuracy({0, 1, 2, 3, 3}, {0, 1, 2, 0, 1}) == doctest::Approx(60.0));

    CHECK_THROWS_AS(eval::accuracy({}, {}), DataError);
    CHECK_THROWS_AS(eval::accuracy({0, 1}, {0}), DataError);

    SUBCASE("a uniform random guesser sits near 25 percent") {
        Rng rng(1);
        std::vector<std::size_t> pred, truth;
        for (int i = 0; i < 100000; ++i) {
            pred.push_back(rng.index(4));
            truth.push_back(rng.index(4));
        }
        CHECK(std::abs(eval::accuracy(pred, truth) - 25.0) < 1.0);
    }
}

TEST_CASE("confusion matrices count prediction/label pairs") {
    eval::ConfusionMatrix m = eval::confusion_matrix({0, 1, 2, 3}, {0, 1, 2, 3}, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(m.at(i, j) == (i == j ? 1 : 0));
    CHECK(m.trace() == 4);
    CHECK(m.total() == 4);
    CHECK(m.accuracy_percent() == 100.0);

    // rows are the true class, columns the prediction
    eval::ConfusionMatrix one = eval::confusion_matrix({2}, {1}, 4);
    CHECK(one.at(1, 2) == 1);
    CHECK(one.trace() == 0);

    SUBCASE("agrees with a counting loop on random data") {
        Rng rng(9);
        std::vector<std::size_t> pred, truth;
        for (int i = 0; i < 500; ++i) {
            pred.push_back(rng.index(4));
            truth.push_back(rng.index(4));
        }
        eval::ConfusionMatrix cm = eval::confusion_matrix(pred, truth, 4);
        std::array<std::array<std::size_t, 4>, 4> naive{};
        for (std::size_t i = 0; i < pred.size(); ++i) ++naive[truth[i]][pred[i]];
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < 4; ++p) CHECK(cm.at(t, p) == naive[t][p]);
        CHECK(cm.total() == 500);
        CHECK(cm.accuracy_percent() ==
              doctest::Approx(eval::accuracy(pred, truth)).epsilon(1e-12));
    }

    SUBCASE("out-of-range classes are refused") {
        CHECK_THROWS_AS(eval::confusion_matrix({4}, {0}, 4), DataError);
        eval::ConfusionMatrix empty;
        CHECK_THROWS_AS(empty.accuracy_percent(), DataError);
    }
}

TEST_CASE("aggregate statistics use the population standard deviation") {
    eval::AggregateStats s = eval::aggregate_stats({90.0, 92.0, 94.0}, {0.4, 0.3, 0.2},
                                                         {100.0, 200.0, 300.0});
    CHECK(s.folds == 3);
    CHECK(s.mean_accuracy == doctest::Approx(92.0));
    CHECK(s.accuracy_range == doctest::Approx(4.0));
    CHECK(s.accuracy_std == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
    CHECK(s.mean_loss == doctest::Approx(0.3));
    CHECK(s.mean_epochs == doctest::Approx(200.0));

    eval::AggregateStats single = eval::aggregate_stats({88.0}, {0.5}, {10.0});
    CHECK(single.accuracy_std == 0.0);
    CHECK(single.accuracy_range == 0.0);

    eval::AggregateStats flat = eval::aggregate_stats({91.0, 91.0}, {0.1, 0.1}, {5.0, 5.0});
    CHECK(flat.accuracy_std == 0.0);

    CHECK_THROWS_AS(eval::aggregate_stats({}, {}, {}), DataError);
}

TEST_CASE("error reduction measures the drop in wrong guesses") {
    CHECK(eval::error_reduction(90.0, 90.0) == 0.0);
    CHECK(eval::error_reduction(80.0, 90.0) == doctest::Approx(50.0));

    // the five published rounded-accuracy pairs
    CHECK(std::abs(eval::error_reduction(86.9, 90.1) - 24.7) < 1.0);
    CHECK(std::abs(eval::error_reduction(89.5, 91.1) - 14.8) < 1.0);
    CHECK(std::abs(eval::error_reduction(90.1, 91.5) - 14.4) < 1.0);
    CHECK(std::abs(eval::error_reduction(89.2, 90.1) - 8.4) < 1.0);
    CHECK(std::abs(eval::error_reduction(89.2, 89.5) - 3.5) < 1.0);

    // the same pair in raw accuracy points reads very differently
    CHECK(eval::error_reduction(84.6, 89.2) == doctest::Approx(29.87).epsilon(1e-3));
    CHECK(89.2 - 84.6 == doctest::Approx(4.6));

    CHECK(eval::error_reduction(95.0, 94.0) < 0.0);  // regressions go negative
    CHECK_THROWS_AS(eval::error_reduction(100.0, 99.0), DataError);
}

TEST_CASE("benchmark configs are validated before any training") {
    BenchmarkConfig cfg = quick_config({"Shallow_NN"});
    CHECK_NOTHROW(cfg.validate());

    BenchmarkConfig bad = cfg;
    bad.models = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.models = {"Perceptron9000"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.normalization = "minmax";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.jobs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("a fold trains on everyone but the held-out subject") {
    data::WindowedDataset ds = data::generate_synthetic(3, 24, 19);
    auto folds = data::make_loso_folds(ds.subject_ids());
    BenchmarkConfig cfg = quick_config({"Shallow_NN"});

    FoldReport rep = run_fold("Shallow_NN", folds[1], ds, cfg);
    CHECK_FALSE(rep.failed);
    CHECK(rep.model == "Shallow_NN");
    CHECK(rep.fold_index == 1);
    CHECK(rep.test_subject == 102);
    CHECK(rep.test_windows == 32);   // one subject's share
    CHECK(rep.train_windows == 64);  // the other two subjects
    CHECK(rep.epochs_run >= 1);
    CHECK(rep.confusion.total() == rep.test_windows);
    CHECK(rep.accuracy == doctest::Approx(rep.confusion.accuracy_percent()));
    CHECK(rep.seed == train::fold_seed(cfg.train.master_seed, "Shallow_NN", 1));
    CHECK(rep.config_hash == cfg.config_hash);
    CHECK(rep.wall_seconds > 0.0);

    SUBCASE("the same seed reproduces the fold bit for bit") {
        FoldReport again = run_fold("Shallow_NN", folds[1], ds, cfg);
        FoldReport a = rep, b = again;
        a.wall_seconds = 0.0;
        b.wall_seconds = 0.0;
        CHECK(a == b);
    }

    SUBCASE("a different master seed changes the outcome trace") {
        BenchmarkConfig other = cfg;
        other.train.master_seed = 8;
        FoldReport again = run_fold("Shallow_NN", folds[1], ds, other);
        CHECK(again.seed != rep.seed);
    }
}

TEST_CASE("the benchmark covers every model/fold pair and aggregates them") {
    data::WindowedDataset ds = data::generate_synthetic(2, 16, 23);
    BenchmarkConfig cfg = quick_config({"Shallow_NN"});

    BenchmarkReport report = run_benchmark(ds, cfg);
    REQUIRE(report.folds.size() == 2);  // one model, two subjects
    CHECK(report.model_order == std::vector<std::string>{"Shallow_NN"});
    REQUIRE(report.summaries.size() == 1);
    CHECK(report.summaries[0].folds_attempted == 2);
    CHECK(report.summaries[0].folds_failed == 0);
    CHECK(report.master_seed == cfg.train.master_seed);
    CHECK(report.dataset.synthetic);

    // aggregates recompute from the fold rows
    auto again = summarize(report.folds, report.model_order);
    CHECK(again[0].stats.mean_accuracy ==
          doctest::Approx(report.summaries[0].stats.mean_accuracy));
    CHECK(again[0].stats.accuracy_std ==
          doctest::Approx(report.summaries[0].stats.accuracy_std));

    // single-model run: the reduction matrix is the 1x1 zero
    REQUIRE(report.error_reduction_matrix.size() == 1);
    CHECK(report.error_reduction_matrix[0] == 0.0);
}

TEST_CASE("parallel and sequential benchmarks agree exactly") {
    data::WindowedDataset ds = data::generate_synthetic(2, 12, 31);
    BenchmarkConfig seq = quick_config({"Shallow_NN", "DL"});
    seq.train.max_epochs = 2;

    BenchmarkConfig par = seq;
    par.deterministic = false;
    par.jobs = 2;

    BenchmarkReport a = run_benchmark(ds, seq);
    BenchmarkReport b = run_benchmark(ds, par);
    strip_timings(a);
    strip_timings(b);
    CHECK(a == b);

    SUBCASE("model order in the config does not change per-model results") {
        BenchmarkConfig swapped = seq;
        swapped.models = {"DL", "Shallow_NN"};
        BenchmarkReport c = run_benchmark(ds, swapped);
        strip_timings(c);
        for (const FoldReport& fold : a.folds) {
            bool matched = false;
            for (const FoldReport& other : c.folds)
                if (other.model == fold.model && other.fold_index == fold.fold_index)
                    matched = other == fold;
            CHECK(matched);
        }
    }
}

TEST_CASE("reports survive the json round trip") {
    data::WindowedDataset ds = data::generate_synthetic(2, 12, 37);
    BenchmarkConfig cfg = quick_config({"Shallow_NN", "DL"});
    cfg.train.max_epochs = 2;
    BenchmarkReport report = run_benchmark(ds, cfg);

    nlohmann::json j = report_to_json(report);
    BenchmarkReport back = report_from_json(j);
    CHECK(back == report);

    SUBCASE("undefined reduction entries survive as null") {
        // make one model fail everywhere: its mean accuracy is undefined
        report.error_reduction_matrix[1] = std::nan("");
        nlohmann::json withnan = report_to_json(report);
        bool saw_null = false;
        for (const auto& v : withnan["error_reduction_matrix"]) saw_null |= v.is_null();
        CHECK(saw_null);
        BenchmarkReport parsed = report_from_json(withnan);
        CHECK(std::isnan(parsed.error_reduction_matrix[1]));
        CHECK(parsed == report);  // NaN-tolerant comparison
    }

    SUBCASE("the serialized form is versioned") { CHECK(j["schema_version"] == 1); }
}

TEST_CASE("report files land in the output directory") {
    namespace fs = std::filesystem;
    data::WindowedDataset ds = data::generate_synthetic(2, 12, 41);
    BenchmarkConfig cfg = quick_config({"Shallow_NN"});
    cfg.train.max_epochs = 2;
    BenchmarkReport report = run_benchmark(ds, cfg);

    const fs::path dir = fs::temp_directory_path() / "har_report_test";
    fs::remove_all(dir);
    auto written = emit_report(report, dir.string(), {"csv", "json", "plotdata"});
    CHECK(written.size() == 4);  // summary.csv, folds.csv, report.json, plotdata.dat
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "folds.csv"));
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "plotdata.dat"));

    // folds.csv: header + one row per fold
    std::ifstream folds_csv(dir / "folds.csv");
    std::size_t lines = 0;
    std::string line;
    bool wall_column = false;
    while (std::getline(folds_csv, line)) {
        if (line.empty() || line[0] == '#') continue;
        wall_column = wall_column || line.find("wall") != std::string::npos;
        ++lines;
    }
    CHECK(lines == 1 + report.folds.size());
    CHECK_FALSE(wall_column);  // timings stay out of the comparable outputs

    // plotdata: one data row per successful fold
    std::ifstream plot(dir / "plotdata.dat");
    std::size_t plot_rows = 0;
    while (std::getline(plot, line))
        if (!line.empty() && line[0] != '#') ++plot_rows;
    CHECK(plot_rows == report.folds.size());

    std::ifstream json_in(dir / "report.json");
    nlohmann::json parsed = nlohmann::json::parse(json_in);
    CHECK(report_from_json(parsed) == report);

    const std::string tables = format_report_tables(report);
    CHECK(tables.find("Shallow_NN") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("reference table carries the published baselines") {
    const auto& rows = reference_rows();
    CHECK(rows.size() == 9);
    const ReferenceRow* cnn = reference_for("CNN");
    REQUIRE(cnn != nullptr);
    CHECK(cnn->accuracy == doctest::Approx(92.8));
    const ReferenceRow* shallow = reference_for("Shallow_NN");
    REQUIRE(shallow != nullptr);
    CHECK(shallow->accuracy == doctest::Approx(84.6));
    CHECK(reference_for("NoSuchModel") == nullptr);
}
