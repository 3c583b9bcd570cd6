#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "har/layers.hpp"

namespace har::zoo {

// How a canonical architecture was pinned down:
//   Explicit      — every layer size is known directly
//   Reconstructed — layer sizes recovered from the published parameter total
//                   (exact match, verified)
//   Searched      — topology chosen by the parameter-count solver
enum class DerivationStatus { Explicit, Reconstructed, Searched };

const char* derivation_status_name(DerivationStatus s);

struct CanonicalArchitecture {
    nn::ModelSpec spec;
    std::size_t expected_count = 0;
    DerivationStatus status = DerivationStatus::Explicit;
};

// The nine benchmark models, simplest first.
const std::vector<std::string>& model_names();
bool is_model_name(const std::string& name);

// Canonical architecture for one model; throws ConfigError on unknown names.
CanonicalArchitecture canonical(const std::string& name);
nn::ModelSpec build_model(const std::string& name);

// Parameter-count verification: computed (structural) vs expected counts.
// A mismatch on any explicit or reconstructed model is a hard failure; the
// searched CNN row reports its achieved count and delta instead.
struct CountRow {
    std::string name;
    std::size_t computed = 0;
    std::size_t expected = 0;
    long long delta = 0;  // computed - expected
    bool hard_match = true;
    DerivationStatus status = DerivationStatus::Explicit;
};

std::vector<CountRow> verify_param_counts();
bool all_counts_match(const std::vector<CountRow>& rows);

// Structured text manifest: name, status, expected/computed counts, layers.
std::string zoo_manifest();

inline constexpr double kZooDropoutRate = 0.3;

}  // namespace har::zoo
