#pragma once

// Binary block file:
//   bytes 0..3   "CBFP"
//   byte  4      format tag (0 half, 1 single, 2 double)
//   byte  5      mode tag (0 common, 1 box)
//   bytes 6..7   reserved, zero
//   bytes 8..11  N_v, uint32 little-endian
//   bytes 12..15 reserved, zero
// followed by the packed payload: E (B_e bits), then for every component in
// (re, im) order S, L, X (box only), M (B_m bits), each MSB first, zero-padded
// to a byte boundary.

#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cbfp/codec.hpp"

namespace cbfp {

namespace detail {

class BitWriter {
public:
    void put(std::uint64_t value, unsigned width) {
        for (unsigned k = width; k-- > 0;) {
            if (used_ % 8 == 0) bytes_.push_back(0);
            if ((value >> k) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (used_ % 8));
            ++used_;
        }
    }
    std::size_t bits() const noexcept { return used_; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t used_ = 0;
};

class BitReader {
public:
    BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint64_t get(unsigned width) {
        std::uint64_t v = 0;
        for (unsigned k = 0; k < width; ++k) {
            if (pos_ / 8 >= size_) throw Error(errc::parse_error, "truncated block payload");
            v = (v << 1) | ((data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u);
            ++pos_;
        }
        return v;
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline std::uint8_t format_tag(const FloatFormat& f) {
    if (f == kHalf) return 0;
    if (f == kSingle) return 1;
    if (f == kDouble) return 2;
    throw Error(errc::invalid_argument, "invalid format");
}

inline FloatFormat format_from_tag(std::uint8_t tag) {
    switch (tag) {
    case 0: return kHalf;
    case 1: return kSingle;
    case 2: return kDouble;
    default: throw Error(errc::parse_error, "bad format tag");
    }
}

} // namespace detail

inline constexpr std::size_t kBlockHeaderBytes = 16;

/// Packed payload only (no header); exactly wordlength_bits() significant bits.
inline std::vector<std::uint8_t> pack_payload(const CbfpBlock& b, std::size_t* bit_count = nullptr) {
    detail::BitWriter w;
    w.put(b.common_exponent, b.format.exponent_width);
    for (std::size_t i = 0; i < b.n_components(); ++i) {
        w.put(b.signs[i], 1);
        w.put(b.leads[i], 1);
        if (b.mode == Mode::Box) w.put(b.box_shifts[i], 1);
        w.put(b.mantissas[i], b.format.mantissa_width);
    }
    if (bit_count) *bit_count = w.bits();
    return w.bytes();
}

inline std::vector<std::uint8_t> serialize(const CbfpBlock& b) {
    std::vector<std::uint8_t> out(kBlockHeaderBytes, 0);
    out[0] = 'C'; out[1] = 'B'; out[2] = 'F'; out[3] = 'P';
    out[4] = detail::format_tag(b.format);
    out[5] = b.mode == Mode::Box ? 1 : 0;
    const auto nv = static_cast<std::uint32_t>(b.n_samples());
    for (int k = 0; k < 4; ++k) out[8 + k] = static_cast<std::uint8_t>(nv >> (8 * k));
    const auto payload = pack_payload(b);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

inline CbfpBlock deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kBlockHeaderBytes || bytes[0] != 'C' || bytes[1] != 'B' || bytes[2] != 'F' ||
        bytes[3] != 'P')
        throw Error(errc::parse_error, "missing CBFP header");
    CbfpBlock b;
    b.format = detail::format_from_tag(bytes[4]);
    if (bytes[5] > 1) throw Error(errc::parse_error, "bad mode tag");
    b.mode = bytes[5] ? Mode::Box : Mode::Common;
    std::uint32_t nv = 0;
    for (int k = 0; k < 4; ++k) nv |= std::uint32_t{bytes[8 + k]} << (8 * k);

    const std::size_t expected =
        kBlockHeaderBytes + (wordlength_bits(to_encoding(b.mode), nv, b.format) + 7) / 8;
    if (bytes.size() != expected) throw Error(errc::parse_error, "payload size mismatch");

    detail::BitReader r(bytes.data() + kBlockHeaderBytes, bytes.size() - kBlockHeaderBytes);
    b.common_exponent = static_cast<unsigned>(r.get(b.format.exponent_width));
    const std::size_t n = 2 * std::size_t{nv};
    b.signs.resize(n);
    b.leads.resize(n);
    b.box_shifts.assign(n, 0);
    b.mantissas.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.signs[i] = static_cast<std::uint8_t>(r.get(1));
        b.leads[i] = static_cast<std::uint8_t>(r.get(1));
        if (b.mode == Mode::Box) b.box_shifts[i] = static_cast<std::uint8_t>(r.get(1));
        b.mantissas[i] = r.get(b.format.mantissa_width);
    }
    return b;
}

inline void write_block_file(const std::string& path, const CbfpBlock& b) {
    const auto bytes = serialize(b);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(errc::invalid_argument, "cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline CbfpBlock read_block_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(errc::invalid_argument, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace cbfp
