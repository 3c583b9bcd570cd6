#include "har/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "har/error.hpp"
#include "har/loss.hpp"

namespace har::train {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (patience == 0) throw ConfigError("patience must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in (0,1)");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("validation_fraction must be in (0,1)");
    }
}

std::string TrainTrace::to_csv() const {
    std::string csv = "epoch,train_loss,val_loss,val_acc\n";
    char row[128];
    for (std::size_t e = 0; e < train_loss.size(); ++e) {
        std::snprintf(row, sizeof row, "%zu,%.17g,%.17g,%.17g\n", e + 1, train_loss[e], val_loss[e],
                      val_acc[e]);
        csv += row;
    }
    return csv;
}

bool EarlyStopState::update(double val_loss, const nn::ParameterBundle& params, std::size_t epoch) {
    if (val_loss < best_loss_) {
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        best_params_ = params;
        since_improvement_ = 0;
        return true;
    }
    ++since_improvement_;
    return false;
}

ValSplit stratified_split(const std::vector<const data::Window*>& windows, double fraction,
                          std::size_t num_classes, Rng& rng) {
    std::vector<std::vector<const data::Window*>> by_class(num_classes);
    for (const data::Window* w : windows) {
        std::size_t c = argmax_lowest(w->label);
        if (c >= num_classes) throw ConfigError("window label outside the class range");
        by_class[c].push_back(w);
    }
    ValSplit split;
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto& group = by_class[c];
        rng.shuffle(group);
        auto k = static_cast<std::size_t>(fraction * static_cast<double>(group.size()));
        split.val.insert(split.val.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(k));
        split.train.insert(split.train.end(), group.begin() + static_cast<std::ptrdiff_t>(k),
                           group.end());
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        bool present = std::any_of(split.train.begin(), split.train.end(),
                                   [&](const data::Window* w) { return argmax_lowest(w->label) == c; });
        if (!present) {
            throw ConfigError("class " + std::to_string(c) + " is absent from the training portion");
        }
    }
    return split;
}

double train_epoch(nn::Model& model, const std::vector<const data::Window*>& windows,
                   AdamState& state, const TrainConfig& cfg, Rng& shuffle_rng, Rng& dropout_rng,
                   const std::string& context) {
    if (windows.empty()) throw TrainError("train_epoch: no windows" + context);

    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    nn::ParameterBundle grads = nn::allocate_params(model.spec());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        std::size_t batch_n = std::min(cfg.batch_size, order.size() - start);
        grads.fill(0.0);
        for (std::size_t i = 0; i < batch_n; ++i) {
            const data::Window& w = *windows[order[start + i]];
            const Tensor& probs = model.forward(w.samples, true, &dropout_rng);
            double loss = categorical_crossentropy(probs, w.label);
            if (!std::isfinite(loss)) throw TrainError("non-finite training loss" + context);
            epoch_loss += loss;
            model.backward(w.label, grads);
        }
        double scale = 1.0 / static_cast<double>(batch_n);
        for (auto& t : grads.tensors) {
            for (double& g : t.value.flat()) g *= scale;
        }
        adam_step(model.params(), grads, state, cfg.adam(), context);
    }
    return epoch_loss / static_cast<double>(windows.size());
}

Evaluation evaluate(nn::Model& model, const std::vector<const data::Window*>& windows) {
    if (windows.empty()) throw TrainError("evaluate: no windows");
    Evaluation ev;
    ev.predictions.reserve(windows.size());
    std::size_t correct = 0;
    for (const data::Window* w : windows) {
        const Tensor& probs = model.forward(w->samples, false);
        ev.mean_loss += categorical_crossentropy(probs, w->label);
        std::size_t pred = argmax_lowest(probs);
        ev.predictions.push_back(pred);
        if (pred == argmax_lowest(w->label)) ++correct;
    }
    ev.mean_loss /= static_cast<double>(windows.size());
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(windows.size());
    return ev;
}

FitResult fit(nn::Model& model, const std::vector<const data::Window*>& train_windows,
              const TrainConfig& cfg) {
    cfg.validate();
    if (train_windows.empty()) throw TrainError("fit: no training windows");

    Rng root(cfg.master_seed);
    Rng split_rng = root.stream("val_split");
    Rng shuffle_rng = root.stream("shuffle");
    Rng dropout_rng = root.stream("dropout");

    ValSplit split = stratified_split(train_windows, cfg.validation_fraction,
                                      model.spec().num_classes, split_rng);
    if (split.val.empty()) {
        throw ConfigError("validation split is empty; add windows or raise validation_fraction");
    }

    AdamState state = AdamState::init(model.spec());
    EarlyStopState stopper(cfg.patience);
    FitResult result;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::string context = " (epoch " + std::to_string(epoch) + ")";
        double train_loss =
            train_epoch(model, split.train, state, cfg, shuffle_rng, dropout_rng, context);
        Evaluation val = evaluate(model, split.val);

        result.trace.train_loss.push_back(train_loss);
        result.trace.val_loss.push_back(val.mean_loss);
        result.trace.val_acc.push_back(val.accuracy);

        stopper.update(val.mean_loss, model.params(), epoch);
        if (stopper.should_stop()) {
            result.trace.stopped_early = true;
            break;
        }
    }
    result.trace.epochs_run = result.trace.train_loss.size();
    result.trace.best_epoch = stopper.best_epoch();
    model.set_params(stopper.best_params());
    result.best_params = stopper.best_params();
    return result;
}

std::uint64_t fold_seed(std::uint64_t master_seed, const std::string& model_name,
                        std::size_t fold_index) {
    return derive_seed(derive_seed(master_seed, model_name), static_cast<std::uint64_t>(fold_index));
}

}  // namespace har::train
