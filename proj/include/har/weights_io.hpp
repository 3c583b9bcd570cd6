#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "har/layers.hpp"
#include "har/params.hpp"

namespace har::nn {

// Versioned binary weight format: magic, format version, fingerprint of the
// spec's canonical encoding, then per-tensor name + shape + little-endian
// 64-bit float payload. Loading validates the fingerprint and every shape
// against the spec, so weights can never silently attach to the wrong model.

std::vector<std::uint8_t> serialize_weights(const ModelSpec& spec, const ParameterBundle& params);
ParameterBundle deserialize_weights(const ModelSpec& spec, const std::vector<std::uint8_t>& bytes);

void save_weights(const ModelSpec& spec, const ParameterBundle& params, const std::string& path);
ParameterBundle load_weights(const ModelSpec& spec, const std::string& path);

}  // namespace har::nn
