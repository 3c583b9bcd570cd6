#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "har/layers.hpp"

namespace har::zoo {

// Families the parameter-count solver can enumerate:
//   Cnn       — fixed prefix Conv1D(24,k4)+Conv1D(56,k5), optional pool in
//               {none,2,3,4} after each conv, optional third conv
//               (filters <= max_conv3_filters, kernel <= max_conv3_kernel),
//               head in {flatten, global-max-pool}, 1-2 hidden dense layers
//               (width <= max_dense_width), output Dense(4).
//   HybridRnn — the same conv prefix + SimpleRNN(32,seq)+SimpleRNN(16,seq)+
//               SimpleRNN(16,last), free 1-2 hidden dense tail, Dense(4).
//   DenseOnly — Flatten + 0-2 hidden dense layers + Dense(4); zero hidden
//               layers means the direct-output configuration.
enum class SolveFamily { Cnn, HybridRnn, DenseOnly };

const char* solve_family_name(SolveFamily f);
SolveFamily solve_family_from_name(const std::string& name);

struct CnnSearchSpace {
    SolveFamily family = SolveFamily::Cnn;
    std::size_t max_dense_width = 256;
    std::size_t max_conv3_filters = 128;
    std::size_t max_conv3_kernel = 16;
    std::size_t nearest_k = 5;
};

// One enumerated configuration. Fields outside the family's knobs stay zero.
// pool values are 0 (none) or the pool width; hidden2 == 0 means a single
// hidden dense layer; hidden1 == 0 (DenseOnly only) means direct output.
struct SolvedConfig {
    std::size_t pool1 = 0;
    std::size_t pool2 = 0;
    std::size_t conv3_filters = 0;
    std::size_t conv3_kernel = 0;
    std::size_t pool3 = 0;
    bool global_pool = false;
    std::size_t hidden1 = 0;
    std::size_t hidden2 = 0;
    std::size_t count = 0;  // parameter count of the realized architecture

    // Sort key, lexicographic: fewest parameterized layers, then smallest
    // dense widths, then smallest third-conv size, then pools, then head.
    std::vector<std::size_t> sort_key(SolveFamily family) const;

    bool same_structure(const SolvedConfig& other) const;

    nn::ModelSpec to_spec(const std::string& name, SolveFamily family,
                          double dropout_rate) const;
    std::string str(SolveFamily family) const;
};

struct SolveResult {
    std::size_t target = 0;
    SolveFamily family = SolveFamily::Cnn;
    std::vector<SolvedConfig> exact;    // all exact matches, sorted by key
    std::vector<SolvedConfig> nearest;  // filled only when exact is empty; by |delta|, then key

    bool has_canonical() const { return !exact.empty() || !nearest.empty(); }
    // first exact match, else the nearest config
    const SolvedConfig& canonical() const;
};

// Exhaustive, deterministic enumeration of the family for exact
// parameter-count matches; falls back to the nearest_k closest counts.
SolveResult solve_conv_architecture(std::size_t target, const CnnSearchSpace& space);

}  // namespace har::zoo
