#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "har/adam.hpp"
#include "har/dataset.hpp"
#include "har/model.hpp"
#include "har/rng.hpp"

namespace har::train {

// Hyper-parameters for one fit() run. Defaults are the benchmark's
// documented choices; everything is config-overridable.
struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 1000;
    std::size_t patience = 20;  // epochs without val-loss improvement before stopping
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double validation_fraction = 0.1;  // of the training windows, stratified
    std::uint64_t master_seed = 0;

    void validate() const;  // throws ConfigError
    AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

// Per-epoch history of one fit() run. Epochs are 1-based.
struct TrainTrace {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_acc;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    bool stopped_early = false;

    std::string to_csv() const;  // header: epoch,train_loss,val_loss,val_acc
};

// Tracks the best validation loss seen and the weights that produced it.
// update() returns true when the epoch improved on the best.
class EarlyStopState {
  public:
    explicit EarlyStopState(std::size_t patience) : patience_(patience) {}

    bool update(double val_loss, const nn::ParameterBundle& params, std::size_t epoch);
    bool should_stop() const { return since_improvement_ >= patience_; }

    double best_loss() const { return best_loss_; }
    std::size_t best_epoch() const { return best_epoch_; }
    const nn::ParameterBundle& best_params() const { return best_params_; }

  private:
    std::size_t patience_;
    double best_loss_ = std::numeric_limits<double>::infinity();
    std::size_t best_epoch_ = 0;
    std::size_t since_improvement_ = 0;
    nn::ParameterBundle best_params_;
};

// Stratified hold-out split; val takes floor(fraction * n) per class.
struct ValSplit {
    std::vector<const data::Window*> train;
    std::vector<const data::Window*> val;
};
ValSplit stratified_split(const std::vector<const data::Window*>& windows, double fraction,
                          std::size_t num_classes, Rng& rng);

// One pass over the windows: epoch-specific shuffle, mean-gradient Adam step
// per batch (partial final batch included), returns the epoch's mean
// per-window loss. `context` is appended to abort diagnostics.
double train_epoch(nn::Model& model, const std::vector<const data::Window*>& windows,
                   AdamState& state, const TrainConfig& cfg, Rng& shuffle_rng, Rng& dropout_rng,
                   const std::string& context = "");

// Eval-mode metrics over a window set.
struct Evaluation {
    double accuracy = 0.0;  // fraction in [0,1]
    double mean_loss = 0.0;
    std::vector<std::size_t> predictions;  // argmax class per window
};
Evaluation evaluate(nn::Model& model, const std::vector<const data::Window*>& windows);

// Full training run: stratified validation split, Adam, early stopping on
// validation loss, best-epoch weight restore. All randomness derives from
// cfg.master_seed via named streams (val_split / shuffle / dropout), so a
// (seed, config, dataset) triple reproduces the trace bit-for-bit.
struct FitResult {
    TrainTrace trace;
    nn::ParameterBundle best_params;
};
FitResult fit(nn::Model& model, const std::vector<const data::Window*>& train_windows,
              const TrainConfig& cfg);

// Per-fold seed: independent stream per (master seed, model, fold).
std::uint64_t fold_seed(std::uint64_t master_seed, const std::string& model_name,
                        std::size_t fold_index);

}  // namespace har::train
