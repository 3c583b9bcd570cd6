#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "har/tensor.hpp"

namespace har::data {

// One training example: a fixed-length sensor window and its one-hot label.
// segment_index/offset say where in the source recording the window came from.
struct Window {
    Tensor samples;  // steps x channels
    Tensor label;    // one-hot over the classes
    int subject_id = 0;
    std::size_t segment_index = 0;
    std::size_t offset = 0;
};

// Where a dataset came from; embedded in the cache file and in reports.
struct DatasetProvenance {
    std::vector<std::string> source_files;
    std::string units_note;
    std::size_t window_size = 0;
    std::size_t stride = 0;
    std::size_t max_gap = 0;
    bool synthetic = false;
    std::uint64_t config_hash = 0;

    bool operator==(const DatasetProvenance&) const = default;
};

struct WindowedDataset {
    std::vector<Window> windows;
    DatasetProvenance provenance;

    std::vector<int> subject_ids() const;  // distinct, ascending
};

// Per-channel z-score statistics. Fit on training subjects only — the test
// subject's data must never leak into the statistics.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stdev;  // population std, floored at 1e-8
    std::string fitted_on;

    bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(const std::vector<const Window*>& windows, std::string fitted_on);
void apply_normalizer(const Normalizer& norm, Window& w);

// Leave-one-subject-out fold: one test subject, everyone else trains.
struct FoldAssignment {
    std::size_t fold_index = 0;
    int test_subject = 0;
    std::vector<int> train_subjects;

    bool operator==(const FoldAssignment&) const = default;
};

std::vector<FoldAssignment> make_loso_folds(const std::vector<int>& subjects);

// Pointers into `ds` split by fold membership.
struct FoldSlices {
    std::vector<const Window*> train;
    std::vector<const Window*> test;
};
FoldSlices split_fold(const WindowedDataset& ds, const FoldAssignment& fold);

}  // namespace har::data
