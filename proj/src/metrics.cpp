#include "har/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "har/error.hpp"

namespace har::eval {

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (std::size_t c : counts) n += c;
    return n;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < num_classes; ++i) n += at(i, i);
    return n;
}

double ConfusionMatrix::accuracy_percent() const {
    const std::size_t n = total();
    if (n == 0) throw DataError("confusion matrix is empty");
    return 100.0 * static_cast<double>(trace()) / static_cast<double>(n);
}

double accuracy(const std::vector<std::size_t>& predictions,
                const std::vector<std::size_t>& labels) {
    if (predictions.empty()) throw DataError("accuracy: empty input");
    if (predictions.size() != labels.size())
        throw DataError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t num_classes) {
    if (predictions.size() != labels.size())
        throw DataError("confusion_matrix: prediction/label length mismatch");
    ConfusionMatrix m(num_classes);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (labels[i] >= num_classes || predictions[i] >= num_classes)
            throw DataError("confusion_matrix: class index out of range at position " +
                            std::to_string(i));
        ++m.at(labels[i], predictions[i]);
    }
    return m;
}

AggregateStats aggregate_stats(const std::vector<double>& accuracies,
                               const std::vector<double>& losses,
                               const std::vector<double>& epochs) {
    const std::size_t n = accuracies.size();
    if (n == 0) throw DataError("aggregate_stats: no successful folds");
    if (losses.size() != n || epochs.size() != n)
        throw DataError("aggregate_stats: per-fold vectors have mismatched lengths");

    AggregateStats s;
    s.folds = n;
    for (double a : accuracies) s.mean_accuracy += a;
    for (double l : losses) s.mean_loss += l;
    for (double e : epochs) s.mean_epochs += e;
    s.mean_accuracy /= static_cast<double>(n);
    s.mean_loss /= static_cast<double>(n);
    s.mean_epochs /= static_cast<double>(n);

    double var = 0.0;
    for (double a : accuracies) var += (a - s.mean_accuracy) * (a - s.mean_accuracy);
    s.accuracy_std = std::sqrt(var / static_cast<double>(n));  // population std

    const auto [lo, hi] = std::minmax_element(accuracies.begin(), accuracies.end());
    s.accuracy_range = *hi - *lo;
    return s;
}

double error_reduction(double base_percent, double new_percent) {
    if (!(base_percent < 100.0))
        throw DataError("error_reduction: baseline accuracy must be below 100%");
    const double base_err = 100.0 - base_percent;
    const double new_err = 100.0 - new_percent;
    return 100.0 * (base_err - new_err) / base_err;
}

}  // namespace har::eval
