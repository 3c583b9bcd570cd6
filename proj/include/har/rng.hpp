#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace har {

// FNV-1a 64-bit over raw bytes. Used for seed derivation and config hashing.
inline std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

// SplitMix64 finalizer; scrambles derived seeds so that related inputs give
// unrelated streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent stream seed from a parent seed and a tag. Streams for
// init, dropout, shuffling etc. all hang off the master seed this way, so
// enabling or disabling one consumer does not perturb the others.
inline std::uint64_t derive_seed(std::uint64_t parent, const std::string& tag) {
    return mix64(parent ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix64(parent ^ mix64(index));
}

// Deterministic 64-bit generator: std::mt19937_64 for the raw stream, with
// hand-rolled double/int draws (the std distributions are not bit-stable
// across standard libraries).
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

    // standard normal via Box-Muller
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // independent child stream identified by a tag
    Rng stream(const std::string& tag) const { return Rng(derive_seed(seed_, tag)); }
    Rng stream(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace har
