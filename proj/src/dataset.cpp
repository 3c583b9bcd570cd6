#include "har/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "har/error.hpp"

namespace har::data {

std::vector<int> WindowedDataset::subject_ids() const {
    std::set<int> ids;
    for (const auto& w : windows) ids.insert(w.subject_id);
    return {ids.begin(), ids.end()};
}

Normalizer fit_normalizer(const std::vector<const Window*>& windows, std::string fitted_on) {
    if (windows.empty()) throw DataError("fit_normalizer: no windows to fit on");
    std::size_t channels = windows.front()->samples.dim(1);

    Normalizer norm;
    norm.mean.assign(channels, 0.0);
    norm.stdev.assign(channels, 0.0);
    norm.fitted_on = std::move(fitted_on);

    std::size_t rows = 0;
    for (const Window* w : windows) {
        std::size_t steps = w->samples.dim(0);
        rows += steps;
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t c = 0; c < channels; ++c) norm.mean[c] += w->samples(t, c);
        }
    }
    for (std::size_t c = 0; c < channels; ++c) norm.mean[c] /= static_cast<double>(rows);

    for (const Window* w : windows) {
        std::size_t steps = w->samples.dim(0);
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t c = 0; c < channels; ++c) {
                double d = w->samples(t, c) - norm.mean[c];
                norm.stdev[c] += d * d;
            }
        }
    }
    for (std::size_t c = 0; c < channels; ++c) {
        norm.stdev[c] = std::max(std::sqrt(norm.stdev[c] / static_cast<double>(rows)), 1e-8);
    }
    return norm;
}

void apply_normalizer(const Normalizer& norm, Window& w) {
    std::size_t channels = w.samples.dim(1);
    if (channels != norm.mean.size()) {
        throw DataError("apply_normalizer: window has " + std::to_string(channels) +
                        " channels, normalizer was fit on " + std::to_string(norm.mean.size()));
    }
    for (std::size_t t = 0; t < w.samples.dim(0); ++t) {
        for (std::size_t c = 0; c < channels; ++c) {
            w.samples(t, c) = (w.samples(t, c) - norm.mean[c]) / norm.stdev[c];
        }
    }
}

std::vector<FoldAssignment> make_loso_folds(const std::vector<int>& subjects) {
    std::vector<int> sorted = subjects;
    std::sort(sorted.begin(), sorted.end());
    const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
        throw DataError("make_loso_folds: duplicate subject id " + std::to_string(*dup));
    if (sorted.size() < 2) {
        throw DataError("make_loso_folds: need at least 2 subjects, got " +
                        std::to_string(sorted.size()));
    }
    std::vector<FoldAssignment> folds;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        FoldAssignment f;
        f.fold_index = i;
        f.test_subject = sorted[i];
        for (int s : sorted) {
            if (s != sorted[i]) f.train_subjects.push_back(s);
        }
        folds.push_back(std::move(f));
    }
    return folds;
}

FoldSlices split_fold(const WindowedDataset& ds, const FoldAssignment& fold) {
    FoldSlices slices;
    for (const auto& w : ds.windows) {
        if (w.subject_id == fold.test_subject) {
            slices.test.push_back(&w);
        } else if (std::find(fold.train_subjects.begin(), fold.train_subjects.end(), w.subject_id) !=
                   fold.train_subjects.end()) {
            slices.train.push_back(&w);
        }
    }
    if (slices.train.empty() || slices.test.empty()) {
        throw DataError("fold " + std::to_string(fold.fold_index) + " (test subject " +
                        std::to_string(fold.test_subject) + "): train or test side is empty");
    }
    return slices;
}

}  // namespace har::data
