#pragma once

// Sign / exponent / mantissa decomposition for the three IEEE-754 binary
// interchange widths. Values travel as double; a FloatFormat says which
// narrower grid they are supposed to live on.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "cbfp/error.hpp"

namespace cbfp {

struct FloatFormat {
    unsigned wordlength;     // B_w
    unsigned exponent_width; // B_e
    unsigned mantissa_width; // B_m
    unsigned bias;

    constexpr int max_biased_exponent() const noexcept {
        return (1 << exponent_width) - 2; // largest normal
    }
    constexpr bool operator==(const FloatFormat&) const = default;
};

inline constexpr FloatFormat kHalf{16, 5, 10, 15};
inline constexpr FloatFormat kSingle{32, 8, 23, 127};
inline constexpr FloatFormat kDouble{64, 11, 52, 1023};

constexpr bool is_valid(const FloatFormat& f) noexcept {
    return f == kHalf || f == kSingle || f == kDouble;
}

inline std::string_view format_name(const FloatFormat& f) {
    if (f == kHalf) return "half";
    if (f == kSingle) return "single";
    if (f == kDouble) return "double";
    return "invalid";
}

inline FloatFormat format_from_name(std::string_view name) {
    if (name == "half") return kHalf;
    if (name == "single") return kSingle;
    if (name == "double") return kDouble;
    throw Error(errc::invalid_argument, "unknown format '" + std::string(name) + "'");
}

struct ScalarFields {
    unsigned sign = 0;
    unsigned exponent = 0; // biased
    std::uint64_t mantissa = 0;
    FloatFormat format = kSingle;

    bool is_zero() const noexcept { return exponent == 0 && mantissa == 0; }
    // (1.M) as an integer with B_m fraction bits.
    std::uint64_t significand() const noexcept {
        return is_zero() ? 0 : (std::uint64_t{1} << format.mantissa_width) | mantissa;
    }
    bool operator==(const ScalarFields&) const = default;
};

enum class FloatClass { Zero, Normal, Subnormal, Infinite, NaN };

/// Classifies a raw bit pattern of `fmt.wordlength` bits.
inline FloatClass classify_bits(std::uint64_t pattern, const FloatFormat& fmt) noexcept {
    const std::uint64_t mmask = (std::uint64_t{1} << fmt.mantissa_width) - 1;
    const std::uint64_t emask = (std::uint64_t{1} << fmt.exponent_width) - 1;
    const std::uint64_t m = pattern & mmask;
    const std::uint64_t e = (pattern >> fmt.mantissa_width) & emask;
    if (e == emask) return m == 0 ? FloatClass::Infinite : FloatClass::NaN;
    if (e == 0) return m == 0 ? FloatClass::Zero : FloatClass::Subnormal;
    return FloatClass::Normal;
}

/// Splits a raw bit pattern. Zero (either sign) maps to the all-zero record.
inline ScalarFields split_bits(std::uint64_t pattern, const FloatFormat& fmt) {
    switch (classify_bits(pattern, fmt)) {
    case FloatClass::Zero: return ScalarFields{0, 0, 0, fmt};
    case FloatClass::Normal: break;
    case FloatClass::Subnormal: throw Error(errc::unsupported_value, "denormal input");
    case FloatClass::Infinite: throw Error(errc::unsupported_value, "infinite input");
    case FloatClass::NaN: throw Error(errc::unsupported_value, "NaN input");
    }
    const std::uint64_t mmask = (std::uint64_t{1} << fmt.mantissa_width) - 1;
    const std::uint64_t emask = (std::uint64_t{1} << fmt.exponent_width) - 1;
    ScalarFields f;
    f.format = fmt;
    f.mantissa = pattern & mmask;
    f.exponent = static_cast<unsigned>((pattern >> fmt.mantissa_width) & emask);
    f.sign = static_cast<unsigned>((pattern >> (fmt.wordlength - 1)) & 1u);
    return f;
}

inline std::uint64_t to_bits(const ScalarFields& f) noexcept {
    const auto& fmt = f.format;
    return (std::uint64_t{f.sign} << (fmt.wordlength - 1)) |
           (std::uint64_t{f.exponent} << fmt.mantissa_width) | f.mantissa;
}

/// Splits `x`, which must be exactly representable as a zero or normal number of `fmt`.
inline ScalarFields split(double x, const FloatFormat& fmt) {
    if (std::isnan(x)) throw Error(errc::unsupported_value, "NaN input");
    if (std::isinf(x)) throw Error(errc::unsupported_value, "infinite input");
    if (x == 0.0) return ScalarFields{0, 0, 0, fmt};

    const auto bits = std::bit_cast<std::uint64_t>(x);
    const int e64 = static_cast<int>((bits >> 52) & 0x7ff);
    if (e64 == 0) throw Error(errc::unsupported_value, "denormal input");
    const std::uint64_t m52 = bits & ((std::uint64_t{1} << 52) - 1);

    const int biased = e64 - 1023 + static_cast<int>(fmt.bias);
    if (biased <= 0) throw Error(errc::unsupported_value, "denormal in target format");
    if (biased > fmt.max_biased_exponent())
        throw Error(errc::unsupported_value, "overflows target format");
    const unsigned drop = 52 - fmt.mantissa_width;
    if (drop && (m52 & ((std::uint64_t{1} << drop) - 1)))
        throw Error(errc::unsupported_value, "not representable in target format");

    return ScalarFields{static_cast<unsigned>(bits >> 63), static_cast<unsigned>(biased),
                        m52 >> drop, fmt};
}

inline double assemble(const ScalarFields& f) noexcept {
    if (f.is_zero()) return 0.0;
    const int scale = static_cast<int>(f.exponent) - static_cast<int>(f.format.bias) -
                      static_cast<int>(f.format.mantissa_width);
    const double mag = std::ldexp(static_cast<double>(f.significand()), scale);
    return f.sign ? -mag : mag;
}

/// Round-toward-zero onto the `fmt` grid. Results below the smallest normal
/// flush to zero; results above the largest normal throw ExponentOverflow.
inline double truncate_to(double x, const FloatFormat& fmt) {
    if (std::isnan(x) || std::isinf(x)) throw Error(errc::unsupported_value, "non-finite value");
    if (x == 0.0) return 0.0;
    const int e = std::ilogb(x); // unbiased
    if (e + static_cast<int>(fmt.bias) <= 0) return 0.0;
    if (e + static_cast<int>(fmt.bias) > fmt.max_biased_exponent())
        throw Error(errc::exponent_overflow, "value exceeds format range");
    if (fmt == kDouble) return x;
    const double ulp = std::ldexp(1.0, e - static_cast<int>(fmt.mantissa_width));
    return std::trunc(x / ulp) * ulp;
}

/// Biased exponent of a non-zero value in `fmt` terms (not range checked).
inline int biased_exponent(double x, const FloatFormat& fmt) noexcept {
    return std::ilogb(x) + static_cast<int>(fmt.bias);
}

} // namespace cbfp
