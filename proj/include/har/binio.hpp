#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "har/error.hpp"

namespace har {

// Little-endian binary encode/decode, shared by the weight and cache file
// formats. Doubles are stored as their IEEE-754 bit pattern.

struct ByteWriter {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) {
        std::uint64_t b;
        std::memcpy(&b, &v, sizeof b);
        u64(b);
    }

    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

// Throws IoError naming `what` when a read runs past the end of the buffer.
class ByteReader {
  public:
    ByteReader(const std::vector<std::uint8_t>& bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }

    double f64() {
        std::uint64_t b = u64();
        double v;
        std::memcpy(&v, &b, sizeof v);
        return v;
    }

    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

    void expect_done() const {
        if (!done()) {
            throw IoError(what_ + ": " + std::to_string(bytes_.size() - pos_) +
                          " unexpected trailing bytes");
        }
    }

  private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw IoError(what_ + ": truncated stream");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

// Whole-file helpers for the binary formats.
std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace har
