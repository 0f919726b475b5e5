#pragma once

// Common Exponent and Exponent Box encodings of complex blocks.
//
// Component i of a block (interleaved re, im) decodes to
//   (-1)^S_i * (L_i.M_i)_2 * 2^(E - bias - B_m * X_i)
// where E is the block maximum biased exponent. Common blocks have X_i = 0.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "cbfp/error.hpp"
#include "cbfp/ieee_fields.hpp"

namespace cbfp {

using complex = std::complex<double>;

enum class Mode { Common, Box };
enum class Encoding { IEEE754, Common, Box };
enum class Region { Inside, Outside };

inline const char* to_string(Mode m) noexcept { return m == Mode::Common ? "common" : "box"; }
inline const char* to_string(Encoding e) noexcept {
    switch (e) {
    case Encoding::IEEE754: return "ieee754";
    case Encoding::Common: return "common";
    case Encoding::Box: return "box";
    }
    return "?";
}
constexpr Encoding to_encoding(Mode m) noexcept {
    return m == Mode::Common ? Encoding::Common : Encoding::Box;
}

struct CbfpBlock {
    FloatFormat format = kSingle;
    Mode mode = Mode::Common;
    unsigned common_exponent = 0;
    std::vector<std::uint8_t> signs;
    std::vector<std::uint8_t> leads;
    std::vector<std::uint8_t> box_shifts;
    std::vector<std::uint64_t> mantissas;

    std::size_t n_samples() const noexcept { return signs.size() / 2; }
    std::size_t n_components() const noexcept { return signs.size(); }

    /// (L.M) as an integer with B_m fraction bits.
    std::uint64_t stored(std::size_t i) const noexcept {
        return (std::uint64_t{leads[i]} << format.mantissa_width) | mantissas[i];
    }
    /// Power of two weighting the least significant stored bit of component i.
    int lsb_exponent(std::size_t i) const noexcept {
        return static_cast<int>(common_exponent) - static_cast<int>(format.bias) -
               static_cast<int>(format.mantissa_width) * (1 + box_shifts[i]);
    }
    bool operator==(const CbfpBlock&) const = default;
};

namespace detail {

inline std::uint64_t shift_right(std::uint64_t v, int s) noexcept {
    return s >= 64 ? 0 : v >> s;
}

inline std::vector<ScalarFields> split_all(std::span<const complex> samples, const FloatFormat& fmt) {
    std::vector<ScalarFields> out;
    out.reserve(samples.size() * 2);
    for (const auto& z : samples) {
        out.push_back(split(z.real(), fmt));
        out.push_back(split(z.imag(), fmt));
    }
    return out;
}

inline CbfpBlock encode_fields(const std::vector<ScalarFields>& comps, const FloatFormat& fmt, Mode mode) {
    CbfpBlock b;
    b.format = fmt;
    b.mode = mode;
    const std::size_t n = comps.size();
    b.signs.assign(n, 0);
    b.leads.assign(n, 0);
    b.box_shifts.assign(n, 0);
    b.mantissas.assign(n, 0);

    unsigned e_max = 0;
    for (const auto& c : comps)
        if (!c.is_zero()) e_max = std::max(e_max, c.exponent);
    b.common_exponent = e_max;

    const int bm = static_cast<int>(fmt.mantissa_width);
    const int threshold = static_cast<int>(e_max) - bm; // U
    const std::uint64_t mmask = (std::uint64_t{1} << bm) - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = comps[i];
        if (c.is_zero()) continue;
        int e = static_cast<int>(c.exponent);
        if (mode == Mode::Box && e < threshold) {
            e += bm;
            b.box_shifts[i] = 1;
        }
        const std::uint64_t v = shift_right(c.significand(), static_cast<int>(e_max) - e);
        b.signs[i] = static_cast<std::uint8_t>(c.sign);
        b.leads[i] = static_cast<std::uint8_t>(v >> bm);
        b.mantissas[i] = v & mmask;
    }
    return b;
}

} // namespace detail

inline CbfpBlock encode(std::span<const complex> samples, const FloatFormat& fmt, Mode mode) {
    return detail::encode_fields(detail::split_all(samples, fmt), fmt, mode);
}
inline CbfpBlock encode_common(std::span<const complex> samples, const FloatFormat& fmt) {
    return encode(samples, fmt, Mode::Common);
}
inline CbfpBlock encode_box(std::span<const complex> samples, const FloatFormat& fmt) {
    return encode(samples, fmt, Mode::Box);
}

/// Value of component i; results below the format's normal range decode to zero.
inline double decode_component(const CbfpBlock& b, std::size_t i) noexcept {
    const std::uint64_t v = b.stored(i);
    if (v == 0) return 0.0;
    const double mag = std::ldexp(static_cast<double>(v), b.lsb_exponent(i));
    if (biased_exponent(mag, b.format) <= 0) return 0.0;
    return b.signs[i] ? -mag : mag;
}

inline std::vector<complex> decode(const CbfpBlock& b) {
    std::vector<complex> out(b.n_samples());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = complex(decode_component(b, 2 * k), decode_component(b, 2 * k + 1));
    return out;
}

constexpr std::uint64_t wordlength_bits(Encoding enc, std::uint64_t n_samples, const FloatFormat& fmt) noexcept {
    constexpr std::uint64_t bs = 1, bl = 1, bx = 1;
    const std::uint64_t be = fmt.exponent_width, bm = fmt.mantissa_width;
    switch (enc) {
    case Encoding::IEEE754: return 2 * n_samples * (bs + be + bm);
    case Encoding::Common: return 2 * n_samples * (bs + bl + bm) + be;
    case Encoding::Box: return 2 * n_samples * (bs + bl + bx + bm) + be;
    }
    return 0;
}

/// Largest exponent gap for which a component keeps a significand bit under Common encoding.
constexpr unsigned max_exponent_difference(const FloatFormat& fmt) noexcept {
    return fmt.mantissa_width;
}

/// Effective Encoding Region membership of a (re, im) exponent pair below block maximum `e_max`.
inline Region eer_classify(unsigned e_re, unsigned e_im, unsigned e_max, const FloatFormat& fmt, Mode mode) {
    if (e_re > e_max || e_im > e_max)
        throw Error(errc::invalid_argument, "component exponent exceeds block maximum");
    const unsigned reach = max_exponent_difference(fmt) * (mode == Mode::Box ? 2u : 1u);
    return (e_max - e_re <= reach && e_max - e_im <= reach) ? Region::Inside : Region::Outside;
}

} // namespace cbfp
