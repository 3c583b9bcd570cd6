#pragma once

#include <cstddef>
#include <vector>

namespace har::eval {

// Class-count table: rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::size_t> counts;  // row-major num_classes x num_classes

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t n) : num_classes(n), counts(n * n, 0) {}

    std::size_t& at(std::size_t truth, std::size_t pred) {
        return counts[truth * num_classes + pred];
    }
    std::size_t at(std::size_t truth, std::size_t pred) const {
        return counts[truth * num_classes + pred];
    }

    std::size_t total() const;
    std::size_t trace() const;
    double accuracy_percent() const;  // 100 * trace / total; throws DataError when empty

    bool operator==(const ConfusionMatrix&) const = default;
};

// Percentage of positions where prediction equals label.
double accuracy(const std::vector<std::size_t>& predictions,
                const std::vector<std::size_t>& labels);

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t num_classes);

// Per-model fold statistics. std is the population standard deviation (the
// choice is noted in report metadata); range is max - min.
struct AggregateStats {
    std::size_t folds = 0;
    double mean_accuracy = 0.0;
    double accuracy_std = 0.0;
    double accuracy_range = 0.0;
    double mean_loss = 0.0;
    double mean_epochs = 0.0;

    bool operator==(const AggregateStats&) const = default;
};

AggregateStats aggregate_stats(const std::vector<double>& accuracies,
                               const std::vector<double>& losses,
                               const std::vector<double>& epochs);

// Relative decrease in misclassification rate, in percent:
// 100 * ((100-base) - (100-new)) / (100-base). Distinct from the raw
// accuracy-point difference new - base; reports emit both.
double error_reduction(double base_percent, double new_percent);

}  // namespace har::eval
