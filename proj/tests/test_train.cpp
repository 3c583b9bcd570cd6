#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "doctest.h"
#include "har/dataset.hpp"
#include "har/error.hpp"
#include "har/layers.hpp"
#include "har/loss.hpp"
#include "har/model.hpp"
#include "har/rng.hpp"
#include "har/trainer.hpp"

using namespace har;
using nn::Activation;
using nn::LayerSpec;
using nn::ModelSpec;
using namespace har::train;

namespace {

// tiny 8x2 windows in four cleanly separated value planes, a little noise on
// top: the smallest dataset a model can actually learn something from
std::vector<data::Window> toy_windows(std::size_t per_class, std::uint64_t seed,
                                      std::size_t classes = 4) {
    Rng rng(seed);
    std::vector<data::Window> out;
    for (std::size_t cls = 0; cls < classes; ++cls) {
        for (std::size_t i = 0; i < per_class; ++i) {
            data::Window w;
            w.samples = Tensor({8, 2});
            for (double& v : w.samples.flat())
                v = static_cast<double>(cls) + 0.05 * rng.gaussian();
            w.label = Tensor({classes});
            w.label[cls] = 1.0;
            w.subject_id = 1;
            out.push_back(std::move(w));
        }
    }
    return out;
}

std::vector<const data::Window*> pointers(const std::vector<data::Window>& windows) {
    std::vector<const data::Window*> p;
    for (const data::Window& w : windows) p.push_back(&w);
    return p;
}

ModelSpec toy_spec(std::size_t classes = 4) {
    ModelSpec spec;
    spec.name = "toy";
    spec.input_steps = 8;
    spec.input_channels = 2;
    spec.num_classes = classes;
    spec.layers = {LayerSpec::flatten(), LayerSpec::dense(8, Activation::Relu),
                   LayerSpec::dense(classes, Activation::Softmax)};
    return spec;
}

}  // namespace

TEST_CASE("config validation rejects out-of-range knobs") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    TrainConfig bad = cfg;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.validation_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.patience = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.beta2 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("stratified split takes the floored fraction per class") {
    // 20/10/7/5 windows; floor(0.1 * n) per class -> 2,1,0,0 in val
    std::vector<data::Window> all;
    const std::size_t sizes[] = {20, 10, 7, 5};
    for (std::size_t cls = 0; cls < 4; ++cls) {
        auto group = toy_windows(sizes[cls], 100 + cls);
        for (std::size_t i = 0; i < sizes[cls]; ++i) {
            data::Window w = group[i];
            w.label = Tensor({4});
            w.label[cls] = 1.0;
            all.push_back(std::move(w));
        }
    }
    auto ptrs = pointers(all);

    Rng rng(7);
    ValSplit split = stratified_split(ptrs, 0.1, 4, rng);
    CHECK(split.val.size() == 3);
    CHECK(split.train.size() == 39);

    std::array<std::size_t, 4> val_by_class{}, train_by_class{};
    for (const data::Window* w : split.val) ++val_by_class[argmax_lowest(w->label)];
    for (const data::Window* w : split.train) ++train_by_class[argmax_lowest(w->label)];
    CHECK(val_by_class[0] == 2);
    CHECK(val_by_class[1] == 1);
    CHECK(val_by_class[2] == 0);
    CHECK(val_by_class[3] == 0);
    for (std::size_t c = 0; c < 4; ++c) CHECK(train_by_class[c] == sizes[c] - val_by_class[c]);

    SUBCASE("the same seed reproduces the same split") {
        Rng r1(55), r2(55), r3(56);
        ValSplit a = stratified_split(ptrs, 0.1, 4, r1);
        ValSplit b = stratified_split(ptrs, 0.1, 4, r2);
        ValSplit c = stratified_split(ptrs, 0.1, 4, r3);
        CHECK(a.val == b.val);
        CHECK(a.train == b.train);
        CHECK(a.val != c.val);  // different stream shuffles differently
    }

    SUBCASE("an empty class is reported") {
        // windows covering only three of four classes
        std::vector<const data::Window*> three;
        for (const data::Window* w : ptrs)
            if (argmax_lowest(w->label) != 3) three.push_back(w);
        Rng r(1);
        CHECK_THROWS_AS(stratified_split(three, 0.1, 4, r), ConfigError);
    }
}

TEST_CASE("early stopping tracks the best epoch with strict improvement") {
    ModelSpec spec = toy_spec();
    Rng rng(3);
    nn::ParameterBundle p1 = nn::init_params(spec, rng);
    nn::ParameterBundle p2 = nn::init_params(spec, rng);

    EarlyStopState stop(2);
    CHECK(stop.update(1.0, p1, 1));
    CHECK_FALSE(stop.should_stop());
    CHECK(stop.update(0.9, p2, 2));
    CHECK_FALSE(stop.should_stop());
    CHECK_FALSE(stop.update(0.95, p1, 3));
    CHECK_FALSE(stop.should_stop());
    CHECK_FALSE(stop.update(0.96, p1, 4));
    CHECK(stop.should_stop());

    CHECK(stop.best_epoch() == 2);
    CHECK(stop.best_loss() == 0.9);
    // the stored weights are the epoch-2 ones
    CHECK(stop.best_params().tensors[0].value[0] == p2.tensors[0].value[0]);

    SUBCASE("matching the best loss is not an improvement") {
        EarlyStopState s(5);
        CHECK(s.update(0.5, p1, 1));
        CHECK_FALSE(s.update(0.5, p2, 2));
        CHECK(s.best_epoch() == 1);
    }
}

TEST_CASE("training loss falls monotonically on separable data") {
    auto windows = toy_windows(10, 21);
    auto ptrs = pointers(windows);

    ModelSpec spec = toy_spec();
    Rng init(5);
    nn::Model model = nn::Model::init(spec, init);

    TrainConfig cfg;
    cfg.batch_size = 64;  // full batch for the 36-window training portion
    cfg.max_epochs = 5;
    cfg.patience = 10;
    cfg.master_seed = 17;

    FitResult result = fit(model, ptrs, cfg);
    REQUIRE(result.trace.train_loss.size() == 5);
    for (std::size_t e = 1; e < 5; ++e)
        CHECK(result.trace.train_loss[e] < result.trace.train_loss[e - 1]);
}

TEST_CASE("a fixed seed reproduces the whole trace bit for bit") {
    auto windows = toy_windows(10, 33);
    auto ptrs = pointers(windows);
    ModelSpec spec = toy_spec();

    TrainConfig cfg;
    cfg.max_epochs = 6;
    cfg.batch_size = 8;
    cfg.master_seed = 99;

    auto run = [&]() {
        Rng init(1);
        nn::Model model = nn::Model::init(spec, init);
        return fit(model, ptrs, cfg);
    };
    FitResult a = run();
    FitResult b = run();

    CHECK(a.trace.train_loss == b.trace.train_loss);
    CHECK(a.trace.val_loss == b.trace.val_loss);
    CHECK(a.trace.val_acc == b.trace.val_acc);
    CHECK(a.trace.epochs_run == b.trace.epochs_run);
    CHECK(a.trace.best_epoch == b.trace.best_epoch);
    for (std::size_t t = 0; t < a.best_params.tensors.size(); ++t)
        for (std::size_t i = 0; i < a.best_params.tensors[t].value.size(); ++i)
            CHECK(a.best_params.tensors[t].value[i] == b.best_params.tensors[t].value[i]);

    // a different seed takes a different path
    TrainConfig other = cfg;
    other.master_seed = 100;
    Rng init(1);
    nn::Model model = nn::Model::init(spec, init);
    FitResult c = fit(model, ptrs, other);
    CHECK(a.trace.train_loss != c.trace.train_loss);
}

TEST_CASE("early stopping fires after patience epochs without improvement") {
    auto windows = toy_windows(10, 77);
    auto ptrs = pointers(windows);
    ModelSpec spec = toy_spec();
    Rng init(2);
    nn::Model model = nn::Model::init(spec, init);

    TrainConfig cfg;
    cfg.max_epochs = 400;
    cfg.patience = 3;
    cfg.master_seed = 5;

    FitResult result = fit(model, ptrs, cfg);
    CHECK(result.trace.stopped_early);
    CHECK(result.trace.epochs_run < 400);
    CHECK(result.trace.epochs_run == result.trace.best_epoch + 3);

    // the recorded best epoch is the minimum of the validation curve
    const auto& vl = result.trace.val_loss;
    const double best = *std::min_element(vl.begin(), vl.end());
    CHECK(vl[result.trace.best_epoch - 1] == best);
}

TEST_CASE("the trace serializes one row per epoch") {
    TrainTrace trace;
    trace.train_loss = {1.5, 1.2};
    trace.val_loss = {1.6, 1.3};
    trace.val_acc = {0.5, 0.75};
    trace.epochs_run = 2;
    trace.best_epoch = 2;
    const std::string csv = trace.to_csv();
    CHECK(csv.find("epoch,train_loss,val_loss,val_acc") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n2,") != std::string::npos);
}

TEST_CASE("evaluation metrics match hand-computed fixtures") {
    // windows whose two channels directly one-hot the class pair: an identity
    // readout model classifies them perfectly
    const std::size_t classes = 4;
    std::vector<data::Window> windows;
    for (std::size_t cls = 0; cls < classes; ++cls) {
        data::Window w;
        w.samples = Tensor({1, 4});
        w.samples[cls] = 1.0;
        w.label = Tensor({classes});
        w.label[cls] = 1.0;
        windows.push_back(std::move(w));
    }

    ModelSpec spec;
    spec.name = "readout";
    spec.input_steps = 1;
    spec.input_channels = 4;
    spec.num_classes = 4;
    spec.layers = {LayerSpec::flatten(), LayerSpec::dense(4, Activation::Softmax)};

    SUBCASE("a perfect readout scores 100 percent with vanishing loss") {
        nn::ParameterBundle params = nn::allocate_params(spec);
        for (std::size_t i = 0; i < 4; ++i) params.tensors[0].value[i * 4 + i] = 40.0;
        nn::Model model(spec, params);
        Evaluation ev = evaluate(model, pointers(windows));
        CHECK(ev.accuracy == 1.0);
        CHECK(ev.mean_loss < 1e-9);
        CHECK(ev.predictions == std::vector<std::size_t>{0, 1, 2, 3});
    }

    SUBCASE("a zero model answers class 0 everywhere") {
        nn::Model model(spec, nn::allocate_params(spec));
        Evaluation ev = evaluate(model, pointers(windows));
        CHECK(ev.accuracy == doctest::Approx(0.25));
        CHECK(ev.mean_loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
        CHECK(ev.predictions == std::vector<std::size_t>(4, 0));
    }

    SUBCASE("three correct out of five") {
        // two extra windows whose labels contradict the readout
        std::vector<data::Window> five = windows;
        five.resize(3);  // classes 0..2 correct
        for (std::size_t k = 0; k < 2; ++k) {
            data::Window w;
            w.samples = Tensor({1, 4});
            w.samples[3] = 1.0;  // looks like class 3
            w.label = Tensor({classes});
            w.label[k] = 1.0;  // labeled 0 / 1
            five.push_back(std::move(w));
        }
        nn::ParameterBundle params = nn::allocate_params(spec);
        for (std::size_t i = 0; i < 4; ++i) params.tensors[0].value[i * 4 + i] = 40.0;
        nn::Model model(spec, params);
        Evaluation ev = evaluate(model, pointers(five));
        CHECK(ev.accuracy == doctest::Approx(0.6));
    }

    SUBCASE("an empty window set is an error") {
        nn::Model model(spec, nn::allocate_params(spec));
        std::vector<const data::Window*> none;
        CHECK_THROWS_AS(evaluate(model, none), TrainError);
    }
}

TEST_CASE("non-finite data aborts training with a diagnosis") {
    auto windows = toy_windows(10, 13);
    windows[3].samples[5] = std::numeric_limits<double>::quiet_NaN();
    auto ptrs = pointers(windows);

    ModelSpec spec = toy_spec();
    Rng init(4);
    nn::Model model = nn::Model::init(spec, init);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.master_seed = 8;
    CHECK_THROWS_AS(fit(model, ptrs, cfg), TrainError);
}

TEST_CASE("fold seeds separate models and folds") {
    const std::uint64_t a = fold_seed(42, "CNN", 0);
    CHECK(a == fold_seed(42, "CNN", 0));
    CHECK(a != fold_seed(42, "CNN", 1));
    CHECK(a != fold_seed(42, "GRU", 0));
    CHECK(a != fold_seed(43, "CNN", 0));
}
