#include "har/zoo.hpp"

#include <cstdio>

#include "har/error.hpp"
#include "har/params.hpp"
#include "har/solver.hpp"

namespace har::zoo {

namespace {

using nn::Activation;
using nn::LayerSpec;
using nn::ModelSpec;

void drop(ModelSpec& spec) {
    spec.layers.push_back(LayerSpec::dropout(kZooDropoutRate));
}

ModelSpec base(const std::string& name) {
    ModelSpec spec;
    spec.name = name;
    return spec;  // 200x6 windows, 4 classes
}

// direct softmax readout of the flattened window; no hidden layers, so no
// dropout anywhere. 1200*4+4 = 4804.
ModelSpec shallow_nn() {
    ModelSpec spec = base("Shallow_NN");
    spec.layers.push_back(LayerSpec::flatten());
    spec.layers.push_back(LayerSpec::dense(4, Activation::Softmax));
    return spec;
}

// two relu hidden layers of 32. 1200*32+32 + 32*32+32 + 32*4+4 = 39620.
ModelSpec dl() {
    ModelSpec spec = base("DL");
    spec.layers.push_back(LayerSpec::flatten());
    spec.layers.push_back(LayerSpec::dense(32, Activation::Relu));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(32, Activation::Relu));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(4, Activation::Softmax));
    return spec;
}

// stacked 32-unit simple recurrences (relu) with a 64/32 relu dense tail.
// 32*(6+32+1) + 32*(32+32+1) + 32*64+64 + 64*32+32 + 32*4+4 = 7652.
ModelSpec rnn() {
    ModelSpec spec = base("RNN");
    spec.layers.push_back(LayerSpec::simple_rnn(32, Activation::Relu, true));
    drop(spec);
    spec.layers.push_back(LayerSpec::simple_rnn(32, Activation::Relu, false));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(64, Activation::Relu));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(32, Activation::Relu));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(4, Activation::Softmax));
    return spec;
}

// stacked 16-unit lstms with a tanh dense tail.
// 4*16*(6+16+1) + 4*16*(16+16+1) + 16*64+64 + 64*32+32 + 32*4+4 = 6884.
ModelSpec lstm_model() {
    ModelSpec spec = base("LSTM");
    spec.layers.push_back(LayerSpec::lstm(16, true));
    drop(spec);
    spec.layers.push_back(LayerSpec::lstm(16, false));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(64, Activation::Tanh));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(32, Activation::Tanh));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(4, Activation::Softmax));
    return spec;
}

// stacked 32-unit grus (double-bias formulation) with a tanh dense tail.
// 3*32*(6+32+2) + 3*32*(32+32+2) + 32*64+64 + 64*32+32 + 32*4+4 = 14500.
ModelSpec gru_model() {
    ModelSpec spec = base("GRU");
    spec.layers.push_back(LayerSpec::gru(32, true));
    drop(spec);
    spec.layers.push_back(LayerSpec::gru(32, false));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(64, Activation::Tanh));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(32, Activation::Tanh));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(4, Activation::Softmax));
    return spec;
}

// shared hybrid trunk: two relu conv blocks feeding a 32/16/16 recurrent
// stack (tanh) and a 64/32 tanh dense tail. only the recurrence kind varies.
ModelSpec hybrid(const std::string& name, nn::LayerKind kind) {
    ModelSpec spec = base(name);
    spec.layers.push_back(LayerSpec::conv1d(24, 4, Activation::Relu));
    drop(spec);
    spec.layers.push_back(LayerSpec::conv1d(56, 5, Activation::Relu));
    drop(spec);
    const std::size_t widths[3] = {32, 16, 16};
    for (int i = 0; i < 3; ++i) {
        const bool seq = i < 2;
        switch (kind) {
            case nn::LayerKind::SimpleRnn:
                spec.layers.push_back(LayerSpec::simple_rnn(widths[i], Activation::Tanh, seq));
                break;
            case nn::LayerKind::Lstm:
                spec.layers.push_back(LayerSpec::lstm(widths[i], seq));
                break;
            case nn::LayerKind::Gru:
                spec.layers.push_back(LayerSpec::gru(widths[i], seq));
                break;
            default:
                throw ConfigError("hybrid(): recurrence kind must be SimpleRnn, Lstm, or Gru");
        }
        drop(spec);
    }
    spec.layers.push_back(LayerSpec::dense(64, Activation::Tanh));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(32, Activation::Tanh));
    drop(spec);
    spec.layers.push_back(LayerSpec::dense(4, Activation::Softmax));
    return spec;
}

// frozen solver result for the 51308-parameter target: first exact match
// under the documented search order (solver.hpp). 600 + 6776 conv, then
// 3416 flattened features into a 12/172 relu tail. a test pins the solver
// output to this config so silent drift is caught.
ModelSpec cnn() {
    SolvedConfig cfg;
    cfg.pool1 = 3;
    cfg.hidden1 = 12;
    cfg.hidden2 = 172;
    cfg.count = 51308;
    return cfg.to_spec("CNN", SolveFamily::Cnn, kZooDropoutRate);
}

struct ZooEntry {
    const char* name;
    std::size_t expected;
    DerivationStatus status;
};

// simplest first; expected counts are the published totals.
constexpr ZooEntry kEntries[] = {
    {"Shallow_NN", 4804, DerivationStatus::Explicit},
    {"DL", 39620, DerivationStatus::Explicit},
    {"RNN", 7652, DerivationStatus::Explicit},
    {"LSTM", 6884, DerivationStatus::Explicit},
    {"GRU", 14500, DerivationStatus::Explicit},
    {"CNN", 51308, DerivationStatus::Searched},
    {"CNN_RNN", 14836, DerivationStatus::Reconstructed},
    {"CNN_GRU", 23348, DerivationStatus::Reconstructed},
    {"CNN_LSTM", 27316, DerivationStatus::Reconstructed},
};

}  // namespace

const char* derivation_status_name(DerivationStatus s) {
    switch (s) {
        case DerivationStatus::Explicit: return "explicit";
        case DerivationStatus::Reconstructed: return "reconstructed";
        case DerivationStatus::Searched: return "searched";
    }
    return "unknown";
}

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const ZooEntry& e : kEntries) v.emplace_back(e.name);
        return v;
    }();
    return names;
}

bool is_model_name(const std::string& name) {
    for (const ZooEntry& e : kEntries)
        if (name == e.name) return true;
    return false;
}

CanonicalArchitecture canonical(const std::string& name) {
    CanonicalArchitecture arch;
    bool known = false;
    for (const ZooEntry& e : kEntries) {
        if (name == e.name) {
            arch.expected_count = e.expected;
            arch.status = e.status;
            known = true;
            break;
        }
    }
    if (!known) throw ConfigError("unknown model name '" + name + "'");

    if (name == "Shallow_NN") arch.spec = shallow_nn();
    else if (name == "DL") arch.spec = dl();
    else if (name == "RNN") arch.spec = rnn();
    else if (name == "LSTM") arch.spec = lstm_model();
    else if (name == "GRU") arch.spec = gru_model();
    else if (name == "CNN") arch.spec = cnn();
    else if (name == "CNN_RNN") arch.spec = hybrid("CNN_RNN", nn::LayerKind::SimpleRnn);
    else if (name == "CNN_GRU") arch.spec = hybrid("CNN_GRU", nn::LayerKind::Gru);
    else arch.spec = hybrid("CNN_LSTM", nn::LayerKind::Lstm);
    return arch;
}

nn::ModelSpec build_model(const std::string& name) {
    return canonical(name).spec;
}

std::vector<CountRow> verify_param_counts() {
    std::vector<CountRow> rows;
    rows.reserve(std::size(kEntries));
    for (const ZooEntry& e : kEntries) {
        const CanonicalArchitecture arch = canonical(e.name);
        CountRow row;
        row.name = e.name;
        row.computed = nn::param_count(arch.spec);
        row.expected = arch.expected_count;
        row.delta = static_cast<long long>(row.computed) - static_cast<long long>(row.expected);
        row.status = arch.status;
        // searched rows report their delta; everything else must match exactly
        row.hard_match = arch.status == DerivationStatus::Searched || row.delta == 0;
        rows.push_back(row);
    }
    return rows;
}

bool all_counts_match(const std::vector<CountRow>& rows) {
    for (const CountRow& row : rows)
        if (!row.hard_match) return false;
    return true;
}

std::string zoo_manifest() {
    std::string out;
    char line[256];
    for (const ZooEntry& e : kEntries) {
        const CanonicalArchitecture arch = canonical(e.name);
        const std::size_t computed = nn::param_count(arch.spec);
        std::snprintf(line, sizeof(line), "%-10s  %-13s  expected %6zu  computed %6zu  %s\n",
                      e.name, derivation_status_name(arch.status), arch.expected_count, computed,
                      computed == arch.expected_count ? "ok" : "MISMATCH");
        out += line;
        out += "  ";
        out += nn::canonical_encoding(arch.spec);
        out += '\n';
    }
    return out;
}

}  // namespace har::zoo
