#include "har/solver.hpp"

#include <algorithm>
#include <cmath>

#include "har/error.hpp"

namespace har::zoo {

namespace {

// fixed conv prefix: Conv1D(6->24, k=4) + Conv1D(24->56, k=5)
constexpr long long kPrefixParams = 24 * (4 * 6 + 1) + 56 * (5 * 24 + 1);  // 600 + 6776
constexpr std::size_t kPrefixChannels = 56;
// hybrid recurrent stack: SimpleRNN 56->32, 32->16, 16->16
constexpr long long kHybridRecParams = 32 * (56 + 32 + 1) + 16 * (32 + 16 + 1) + 16 * (16 + 16 + 1);
constexpr std::size_t kHybridRecOut = 16;
constexpr long long kOutputClasses = 4;

// dense tail cost on top of a feature width F:
//   one hidden:  h1*(F+1) + 4*(h1+1)
//   two hidden:  h1*(F+1) + h2*(h1+1) + 4*(h2+1)
//   direct:      4*(F+1)
long long dense_cost(long long F, long long h1, long long h2) {
    if (h1 == 0) return kOutputClasses * (F + 1);
    long long c = h1 * (F + 1);
    if (h2 == 0) return c + kOutputClasses * (h1 + 1);
    return c + h2 * (h1 + 1) + kOutputClasses * (h2 + 1);
}

struct Candidate {
    long long abs_delta;
    SolvedConfig cfg;
};

// bounded best-k list ordered by (|delta|, sort key); deduplicates structures
class NearestSet {
  public:
    NearestSet(std::size_t k, SolveFamily family) : k_(k), family_(family) {}

    void offer(const SolvedConfig& cfg, long long delta) {
        if (k_ == 0) return;
        long long abs_delta = std::llabs(delta);
        // fast rejection before any key computation — this path runs millions of times
        if (items_.size() == k_ && abs_delta > items_.back().abs_delta) return;
        Candidate cand{abs_delta, cfg};
        auto before = [&](const Candidate& a, const Candidate& b) {
            if (a.abs_delta != b.abs_delta) return a.abs_delta < b.abs_delta;
            return a.cfg.sort_key(family_) < b.cfg.sort_key(family_);
        };
        if (items_.size() == k_ && !before(cand, items_.back())) return;
        for (const Candidate& c : items_) {
            if (c.cfg.same_structure(cfg)) return;
        }
        items_.insert(std::upper_bound(items_.begin(), items_.end(), cand, before), cand);
        if (items_.size() > k_) items_.pop_back();
    }

    std::vector<SolvedConfig> take() {
        std::vector<SolvedConfig> out;
        out.reserve(items_.size());
        for (Candidate& c : items_) out.push_back(c.cfg);
        return out;
    }

  private:
    std::size_t k_;
    SolveFamily family_;
    std::vector<Candidate> items_;
};

// Enumerate the dense tail for one fixed front end (feature width F, fixed
// front-end parameter cost). Exact matches are appended; near misses are
// offered to the nearest set. allow_direct enables the zero-hidden tail.
void scan_dense_tail(const SolvedConfig& front, long long front_cost, long long F,
                     long long target, const CnnSearchSpace& space, bool allow_direct,
                     std::vector<SolvedConfig>& exact, NearestSet& nearest) {
    long long rest = target - front_cost;
    long long maxw = static_cast<long long>(space.max_dense_width);

    auto emit = [&](long long h1, long long h2) {
        SolvedConfig cfg = front;
        cfg.hidden1 = static_cast<std::size_t>(h1);
        cfg.hidden2 = static_cast<std::size_t>(h2);
        long long count = front_cost + dense_cost(F, h1, h2);
        cfg.count = static_cast<std::size_t>(count);
        if (count == target) {
            exact.push_back(cfg);
        } else {
            nearest.offer(cfg, count - target);
        }
    };

    if (allow_direct) emit(0, 0);

    // single hidden layer: cost = h1*(F+5) + 4; solve h1, probe the rounding
    {
        double ideal = static_cast<double>(rest - 4) / static_cast<double>(F + 5);
        long long lo = std::clamp(static_cast<long long>(std::floor(ideal)), 1LL, maxw);
        long long hi = std::clamp(static_cast<long long>(std::ceil(ideal)), 1LL, maxw);
        emit(lo, 0);
        if (hi != lo) emit(hi, 0);
    }

    // two hidden layers: for each h1, h2*(h1+5) = rest - 4 - h1*(F+1)
    long long num = rest - 4 - (F + 1);  // value at h1 = 1
    for (long long h1 = 1; h1 <= maxw; ++h1, num -= F + 1) {
        long long den = h1 + 5;
        long long h2 = std::clamp((2 * num + den) / (2 * den), 1LL, maxw);  // round(num/den)
        emit(h1, h2);
        if (num < den) break;  // even h2 = 1 already overshoots for every larger h1
    }
}

void scan_cnn(std::size_t target, const CnnSearchSpace& space, std::vector<SolvedConfig>& exact,
              NearestSet& nearest) {
    constexpr std::size_t pools[] = {0, 2, 3, 4};
    for (std::size_t p1 : pools) {
        std::size_t len1 = 200 - 4 + 1;  // conv1, k=4
        if (p1) len1 /= p1;
        if (len1 < 5) continue;  // conv2 needs its kernel to fit
        for (std::size_t p2 : pools) {
            std::size_t len2 = len1 - 5 + 1;
            if (p2) len2 /= p2;
            if (len2 < 1) continue;

            // without a third conv
            for (bool gmp : {false, true}) {
                SolvedConfig front;
                front.pool1 = p1;
                front.pool2 = p2;
                front.global_pool = gmp;
                long long F = gmp ? static_cast<long long>(kPrefixChannels)
                                  : static_cast<long long>(len2 * kPrefixChannels);
                scan_dense_tail(front, kPrefixParams, F, static_cast<long long>(target), space,
                                false, exact, nearest);
            }

            // with a third conv
            for (std::size_t k3 = 1; k3 <= space.max_conv3_kernel; ++k3) {
                if (len2 < k3) break;
                for (std::size_t f3 = 1; f3 <= space.max_conv3_filters; ++f3) {
                    long long conv3 = static_cast<long long>(f3) *
                                      (static_cast<long long>(k3) * kPrefixChannels + 1);
                    for (std::size_t p3 : pools) {
                        std::size_t len3 = len2 - k3 + 1;
                        if (p3) len3 /= p3;
                        if (len3 < 1) continue;
                        for (bool gmp : {false, true}) {
                            SolvedConfig front;
                            front.pool1 = p1;
                            front.pool2 = p2;
                            front.conv3_filters = f3;
                            front.conv3_kernel = k3;
                            front.pool3 = p3;
                            front.global_pool = gmp;
                            long long F = gmp ? static_cast<long long>(f3)
                                              : static_cast<long long>(len3 * f3);
                            scan_dense_tail(front, kPrefixParams + conv3, F,
                                            static_cast<long long>(target), space, false, exact,
                                            nearest);
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

const char* solve_family_name(SolveFamily f) {
    switch (f) {
        case SolveFamily::Cnn: return "cnn";
        case SolveFamily::HybridRnn: return "hybrid-rnn";
        case SolveFamily::DenseOnly: return "dense-only";
    }
    return "?";
}

SolveFamily solve_family_from_name(const std::string& name) {
    if (name == "cnn") return SolveFamily::Cnn;
    if (name == "hybrid-rnn") return SolveFamily::HybridRnn;
    if (name == "dense-only") return SolveFamily::DenseOnly;
    throw ConfigError("unknown solver family '" + name + "'");
}

std::vector<std::size_t> SolvedConfig::sort_key(SolveFamily family) const {
    std::size_t layers = 1;  // output dense
    if (family == SolveFamily::Cnn) layers += 2 + (conv3_filters ? 1 : 0);
    if (family == SolveFamily::HybridRnn) layers += 5;
    layers += (hidden1 ? 1 : 0) + (hidden2 ? 1 : 0);
    // fewest parameterized layers, then smallest widths in architecture
    // order (third conv before the dense tail), then pools, then head
    return {layers, conv3_filters, conv3_kernel, hidden1, hidden2,
            pool1,  pool2,         pool3,        global_pool ? 1u : 0u};
}

bool SolvedConfig::same_structure(const SolvedConfig& other) const {
    return pool1 == other.pool1 && pool2 == other.pool2 &&
           conv3_filters == other.conv3_filters && conv3_kernel == other.conv3_kernel &&
           pool3 == other.pool3 && global_pool == other.global_pool &&
           hidden1 == other.hidden1 && hidden2 == other.hidden2;
}

nn::ModelSpec SolvedConfig::to_spec(const std::string& name, SolveFamily family,
                                    double dropout_rate) const {
    using nn::Activation;
    using nn::LayerSpec;
    nn::ModelSpec spec;
    spec.name = name;

    auto drop = [&](std::vector<LayerSpec>& layers) {
        if (dropout_rate > 0.0) layers.push_back(LayerSpec::dropout(dropout_rate));
    };

    if (family == SolveFamily::Cnn || family == SolveFamily::HybridRnn) {
        spec.layers.push_back(LayerSpec::conv1d(24, 4, Activation::Relu));
        if (family == SolveFamily::Cnn && pool1) spec.layers.push_back(LayerSpec::maxpool1d(pool1));
        drop(spec.layers);
        spec.layers.push_back(LayerSpec::conv1d(56, 5, Activation::Relu));
        if (family == SolveFamily::Cnn && pool2) spec.layers.push_back(LayerSpec::maxpool1d(pool2));
        drop(spec.layers);
    }

    Activation hidden_act = Activation::Relu;
    if (family == SolveFamily::HybridRnn) {
        hidden_act = Activation::Tanh;
        spec.layers.push_back(LayerSpec::simple_rnn(32, Activation::Tanh, true));
        drop(spec.layers);
        spec.layers.push_back(LayerSpec::simple_rnn(16, Activation::Tanh, true));
        drop(spec.layers);
        spec.layers.push_back(LayerSpec::simple_rnn(16, Activation::Tanh, false));
        drop(spec.layers);
    } else if (family == SolveFamily::Cnn) {
        if (conv3_filters) {
            spec.layers.push_back(
                LayerSpec::conv1d(conv3_filters, conv3_kernel, Activation::Relu));
            if (pool3) spec.layers.push_back(LayerSpec::maxpool1d(pool3));
            drop(spec.layers);
        }
        if (global_pool) {
            spec.layers.push_back(LayerSpec::global_maxpool1d());
        } else {
            spec.layers.push_back(LayerSpec::flatten());
        }
    } else {
        spec.layers.push_back(LayerSpec::flatten());
    }

    if (hidden1) {
        spec.layers.push_back(LayerSpec::dense(hidden1, hidden_act));
        drop(spec.layers);
    }
    if (hidden2) {
        spec.layers.push_back(LayerSpec::dense(hidden2, hidden_act));
        drop(spec.layers);
    }
    spec.layers.push_back(
        LayerSpec::dense(static_cast<std::size_t>(kOutputClasses), Activation::Softmax));
    return spec;
}

std::string SolvedConfig::str(SolveFamily family) const {
    std::string s;
    if (family == SolveFamily::Cnn || family == SolveFamily::HybridRnn) {
        s += "conv(24,k4)";
        if (pool1) s += " pool" + std::to_string(pool1);
        s += " conv(56,k5)";
        if (pool2) s += " pool" + std::to_string(pool2);
    }
    if (family == SolveFamily::HybridRnn) s += " rnn(32) rnn(16) rnn(16)";
    if (family == SolveFamily::Cnn) {
        if (conv3_filters) {
            s += " conv(" + std::to_string(conv3_filters) + ",k" + std::to_string(conv3_kernel) + ")";
            if (pool3) s += " pool" + std::to_string(pool3);
        }
        s += global_pool ? " gmp" : " flatten";
    }
    if (family == SolveFamily::DenseOnly) s += "flatten";
    if (hidden1) s += " dense(" + std::to_string(hidden1) + ")";
    if (hidden2) s += " dense(" + std::to_string(hidden2) + ")";
    s += " dense(4) = " + std::to_string(count);
    return s;
}

const SolvedConfig& SolveResult::canonical() const {
    if (!exact.empty()) return exact.front();
    if (!nearest.empty()) return nearest.front();
    throw ConfigError("solver produced no configurations");
}

SolveResult solve_conv_architecture(std::size_t target, const CnnSearchSpace& space) {
    if (space.max_dense_width == 0 ||
        (space.family == SolveFamily::Cnn &&
         (space.max_conv3_filters == 0 || space.max_conv3_kernel == 0))) {
        throw ConfigError("solver search space is empty");
    }

    SolveResult result;
    result.target = target;
    result.family = space.family;
    NearestSet nearest(space.nearest_k, space.family);

    switch (space.family) {
        case SolveFamily::Cnn:
            scan_cnn(target, space, result.exact, nearest);
            break;
        case SolveFamily::HybridRnn:
            scan_dense_tail({}, kPrefixParams + kHybridRecParams, kHybridRecOut,
                            static_cast<long long>(target), space, false, result.exact, nearest);
            break;
        case SolveFamily::DenseOnly:
            scan_dense_tail({}, 0, 200 * 6, static_cast<long long>(target), space, true,
                            result.exact, nearest);
            break;
    }

    std::sort(result.exact.begin(), result.exact.end(),
              [&](const SolvedConfig& a, const SolvedConfig& b) {
                  return a.sort_key(space.family) < b.sort_key(space.family);
              });
    result.exact.erase(std::unique(result.exact.begin(), result.exact.end(),
                                   [](const SolvedConfig& a, const SolvedConfig& b) {
                                       return a.same_structure(b);
                                   }),
                       result.exact.end());
    if (result.exact.empty()) result.nearest = nearest.take();
    return result;
}

}  // namespace har::zoo
