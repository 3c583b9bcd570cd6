#include "har/weights_io.hpp"

#include <cstdio>

#include "har/binio.hpp"
#include "har/error.hpp"

namespace har::nn {

namespace {

constexpr std::uint32_t kMagic = 0x57524148;  // "HARW" little-endian
constexpr std::uint32_t kVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::vector<std::uint8_t> serialize_weights(const ModelSpec& spec, const ParameterBundle& params) {
    ParameterBundle expected = allocate_params(spec);
    if (!params.same_layout(expected)) {
        throw ShapeError("serialize_weights: parameters do not match spec '" + spec.name + "'");
    }
    ByteWriter w;
    w.u32(kMagic);
    w.u32(kVersion);
    w.u64(spec_fingerprint(spec));
    w.u32(static_cast<std::uint32_t>(params.tensors.size()));
    for (const auto& t : params.tensors) {
        w.str(t.name);
        w.u32(static_cast<std::uint32_t>(t.value.rank()));
        for (std::size_t d : t.value.shape()) w.u64(d);
        for (double v : t.value.flat()) w.f64(v);
    }
    return w.bytes;
}

ParameterBundle deserialize_weights(const ModelSpec& spec, const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes, "weight stream");
    if (r.u32() != kMagic) throw IoError("weight stream: bad magic, not a weight file");
    std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw IoError("weight stream: unsupported format version " + std::to_string(version));
    }
    std::uint64_t fp = r.u64();
    std::uint64_t want = spec_fingerprint(spec);
    if (fp != want) {
        throw ShapeError("weight stream was saved for a different model (fingerprint " + hex64(fp) +
                         ", spec '" + spec.name + "' has " + hex64(want) + ")");
    }

    ParameterBundle expected = allocate_params(spec);
    std::uint32_t n = r.u32();
    if (n != expected.tensors.size()) {
        throw IoError("weight stream: holds " + std::to_string(n) + " tensors, spec needs " +
                      std::to_string(expected.tensors.size()));
    }
    for (auto& t : expected.tensors) {
        std::string name = r.str();
        if (name != t.name) {
            throw IoError("weight stream: tensor '" + name + "' where '" + t.name + "' expected");
        }
        std::uint32_t rank = r.u32();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
        if (shape != t.value.shape()) {
            throw IoError("weight stream: tensor '" + name + "' has shape " +
                          Tensor::shape_string(shape) + ", expected " +
                          Tensor::shape_string(t.value.shape()));
        }
        for (double& v : t.value.flat()) v = r.f64();
    }
    r.expect_done();
    return expected;
}

void save_weights(const ModelSpec& spec, const ParameterBundle& params, const std::string& path) {
    write_file_bytes(path, serialize_weights(spec, params));
}

ParameterBundle load_weights(const ModelSpec& spec, const std::string& path) {
    return deserialize_weights(spec, read_file_bytes(path));
}

}  // namespace har::nn
