#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "cbfp/codec.hpp"

namespace cbfp {

struct EvmResult {
    double evm_percent = 0.0;
    std::size_t n_samples = 0;
};

/// RMS error vector magnitude, ||X - Xbar|| / ||X|| * 100.
inline EvmResult evm_percent(std::span<const complex> reference, std::span<const complex> test) {
    if (reference.size() != test.size() || reference.empty())
        throw Error(errc::length_mismatch, "reference and test lengths differ or are empty");
    double err = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        err += std::norm(reference[k] - test[k]);
        ref += std::norm(reference[k]);
    }
    if (ref == 0.0) throw Error(errc::zero_reference, "reference has zero norm");
    return EvmResult{std::sqrt(err) / std::sqrt(ref) * 100.0, reference.size()};
}

/// 20 log10(max |x| / min non-zero |x|).
template <typename T>
double dynamic_range_db(std::span<const T> x) {
    double hi = 0.0, lo = INFINITY;
    for (const auto& v : x) {
        const double m = std::abs(v);
        if (m == 0.0) continue;
        hi = std::max(hi, m);
        lo = std::min(lo, m);
    }
    if (hi == 0.0) throw Error(errc::all_zero, "sequence has no non-zero element");
    return 20.0 * std::log10(hi / lo);
}

inline double dynamic_range_db(const std::vector<double>& x) { return dynamic_range_db(std::span<const double>(x)); }
inline double dynamic_range_db(const std::vector<complex>& x) {
    std::vector<double> parts;
    parts.reserve(2 * x.size());
    for (const auto& z : x) {
        parts.push_back(z.real());
        parts.push_back(z.imag());
    }
    return dynamic_range_db(std::span<const double>(parts));
}

/// Largest exponent anchor for the ratio generator: 130, or the format's top normal if lower.
constexpr int ratio_top_exponent(const FloatFormat& fmt) noexcept {
    return std::min(130, fmt.max_biased_exponent());
}

/// Exponent spread corresponding to a within-block dynamic range in dB.
inline int ratio_exponent_spread(double ratio_db) {
    return static_cast<int>(std::lround(ratio_db / (20.0 * std::log10(2.0))));
}

namespace detail {

inline std::vector<complex> ratio_block(std::mt19937_64& rng, int spread, std::size_t n, const FloatFormat& fmt) {
    const int top = ratio_top_exponent(fmt);
    const std::uint64_t mmask = (std::uint64_t{1} << fmt.mantissa_width) - 1;
    // Both endpoints share one significand, and interior components at an
    // endpoint exponent stay on the inner side of it, so the realized range is
    // exactly spread * 6.02 dB.
    const std::uint64_t m_end = rng() & mmask;
    auto uniform = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };
    std::vector<double> comps(2 * n);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto sign = static_cast<unsigned>(rng() >> 63);
        int e = top - static_cast<int>(rng() % static_cast<std::uint64_t>(spread + 1));
        std::uint64_t m = rng() & mmask;
        if (i == 0) {
            e = top;
            m = m_end;
        } else if (i == 1) {
            e = top - spread;
            m = m_end;
        } else if (spread > 0 && e == top) {
            m = uniform(0, m_end);
        } else if (spread > 0 && e == top - spread) {
            m = uniform(m_end, mmask);
        }
        comps[i] = assemble(ScalarFields{sign, static_cast<unsigned>(e), m, fmt});
    }
    // Endpoints land on random positions.
    for (std::size_t i = comps.size() - 1; i > 0; --i) std::swap(comps[i], comps[rng() % (i + 1)]);
    std::vector<complex> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = complex(comps[2 * k], comps[2 * k + 1]);
    return out;
}

} // namespace detail

/// Two operand blocks whose components span `ratio_db` of within-block dynamic
/// range, rounded to a whole exponent step; significands lie in [1, 2).
inline std::pair<std::vector<complex>, std::vector<complex>>
generate_ratio_blocks(double ratio_db, std::size_t n_samples, const FloatFormat& fmt, std::uint64_t seed) {
    if (ratio_db < 0.0 || !std::isfinite(ratio_db)) throw Error(errc::invalid_argument, "ratio_db must be >= 0");
    if (n_samples < 2) throw Error(errc::invalid_argument, "need at least two samples");
    const int spread = ratio_exponent_spread(ratio_db);
    if (ratio_top_exponent(fmt) - spread < 1)
        throw Error(errc::ratio_out_of_range, "exponent spread leaves the normal range");
    std::mt19937_64 rng(seed);
    auto a = detail::ratio_block(rng, spread, n_samples, fmt);
    auto b = detail::ratio_block(rng, spread, n_samples, fmt);
    return {std::move(a), std::move(b)};
}

/// Reference results: computed in double, then truncated onto `fmt`.
inline std::vector<complex> truncate_all(std::span<const complex> x, const FloatFormat& fmt) {
    std::vector<complex> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        out[k] = complex(truncate_to(x[k].real(), fmt), truncate_to(x[k].imag(), fmt));
    return out;
}

} // namespace cbfp
