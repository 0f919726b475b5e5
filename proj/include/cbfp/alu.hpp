#pragma once

// Complex block ALU: addition, element-wise multiplication and direct-form
// convolution on CbfpBlock operands, plus the scalar IEEE-754 counterparts,
// all instrumented with pre/post-processing counters.
//
// Counter model. One mantissa scaling is one barrel shift of one real
// significand; one exponent op is one add/subtract/compare on an exponent
// field. Block operands run on a SIMD datapath, so a scaling stage that is
// needed by any lane fires on every lane of its vector. Scalar IEEE-754
// operations are counted per real operation.
//
// Arithmetic is carried in WideAccumulators and truncated exactly once, when
// the result is re-encoded against a fresh common exponent.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cbfp/codec.hpp"

namespace cbfp {

__extension__ using uint128 = unsigned __int128;

inline constexpr unsigned kGuardBits = 8;

enum class Op { Add, Mul, Conv };

inline const char* to_string(Op op) noexcept {
    switch (op) {
    case Op::Add: return "add";
    case Op::Mul: return "mul";
    case Op::Conv: return "conv";
    }
    return "?";
}

struct OpCostCounters {
    std::uint64_t mantissa_scalings = 0;
    std::uint64_t exponent_ops = 0;
    std::uint64_t complex_mults = 0;
    std::uint64_t complex_adds = 0;

    void reset() noexcept { *this = OpCostCounters{}; }
    bool operator==(const OpCostCounters&) const = default;
};

inline std::string counters_csv_header() {
    return "op,mode,n1,n2,mantissa_scalings,exponent_ops,complex_mults,complex_adds";
}

inline std::string counters_csv_row(Op op, Encoding mode, std::uint64_t n1, std::uint64_t n2,
                                    const OpCostCounters& c) {
    std::ostringstream os;
    os << to_string(op) << ',' << to_string(mode) << ',' << n1 << ',' << n2 << ',' << c.mantissa_scalings << ','
       << c.exponent_ops << ',' << c.complex_mults << ',' << c.complex_adds;
    return os.str();
}

/// Worst-case pre/post processing counts of the complex block ALU.
inline OpCostCounters predicted_costs(Op op, Encoding mode, std::uint64_t n1, std::uint64_t n2 = 0) {
    if (n1 == 0 || (op == Op::Conv && n2 == 0))
        throw Error(errc::invalid_argument, "operand sizes must be >= 1");
    OpCostCounters c;
    const std::uint64_t n = n1;
    switch (op) {
    case Op::Add:
        c.complex_adds = n;
        switch (mode) {
        case Encoding::IEEE754: c.mantissa_scalings = 4 * n; c.exponent_ops = 2 * n; break;
        case Encoding::Common: c.mantissa_scalings = 4 * n; c.exponent_ops = 2; break;
        case Encoding::Box: c.mantissa_scalings = 8 * n; c.exponent_ops = 4; break;
        }
        break;
    case Op::Mul:
        c.complex_mults = n;
        switch (mode) {
        case Encoding::IEEE754: c.mantissa_scalings = 8 * n; c.exponent_ops = 6 * n; break;
        case Encoding::Common: c.mantissa_scalings = 8 * n; c.exponent_ops = 2; break;
        case Encoding::Box: c.mantissa_scalings = 16 * n; c.exponent_ops = 5; break;
        }
        break;
    case Op::Conv: {
        const std::uint64_t mults = n1 * n2;
        const std::uint64_t adds = (n1 - 1) * (n2 - 1);
        c.complex_mults = mults;
        c.complex_adds = adds;
        switch (mode) {
        case Encoding::IEEE754:
            c.mantissa_scalings = 6 * mults + 4 * adds;
            c.exponent_ops = 6 * mults + 2 * adds;
            break;
        case Encoding::Common:
            c.mantissa_scalings = 6 * mults + 4 * adds;
            c.exponent_ops = 3 * (n1 + n2 - 1) + 1;
            break;
        case Encoding::Box:
            c.mantissa_scalings = 10 * mults + 8 * adds;
            c.exponent_ops = 3 * (n1 + n2 - 1) + 1;
            break;
        }
        break;
    }
    }
    return c;
}

/// Signed magnitude * 2^exponent, magnitude limited to 2*B_m + kGuardBits bits.
struct WideAccumulator {
    bool negative = false;
    uint128 magnitude = 0;
    int exponent = 0;

    bool is_zero() const noexcept { return magnitude == 0; }
};

namespace detail {

inline int msb(uint128 v) noexcept {
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    if (hi) return 127 - std::countl_zero(hi);
    const auto lo = static_cast<std::uint64_t>(v);
    return lo ? 63 - std::countl_zero(lo) : -1;
}

inline uint128 shift(uint128 v, int s) noexcept {
    if (s >= 0) return s >= 128 ? 0 : v >> s;
    return v << (-s);
}

/// floor(log2 |value|); only meaningful for non-zero values.
inline int value_exponent(const WideAccumulator& a) noexcept { return msb(a.magnitude) + a.exponent; }

inline unsigned accumulator_width(const FloatFormat& fmt) noexcept {
    return 2 * fmt.mantissa_width + kGuardBits;
}

inline WideAccumulator component(const CbfpBlock& b, std::size_t i) noexcept {
    // Box decoding folds X into the exponent: 2^(E - bias - B_m - B_m*X).
    return WideAccumulator{b.signs[i] != 0, b.stored(i), b.lsb_exponent(i)};
}

inline WideAccumulator scalar(double x, const FloatFormat& fmt) {
    const ScalarFields f = split(x, fmt);
    return WideAccumulator{f.sign != 0, f.significand(),
                           static_cast<int>(f.exponent) - static_cast<int>(fmt.bias) -
                               static_cast<int>(fmt.mantissa_width)};
}

inline WideAccumulator multiply(const WideAccumulator& a, const WideAccumulator& b) noexcept {
    if (a.is_zero() || b.is_zero()) return {};
    return WideAccumulator{a.negative != b.negative, a.magnitude * b.magnitude, a.exponent + b.exponent};
}

inline WideAccumulator negate(WideAccumulator a) noexcept {
    if (!a.is_zero()) a.negative = !a.negative;
    return a;
}

/// Aligned addition. Both operands are placed on a common grid that keeps the
/// larger one's top bit one below the accumulator width; bits of the smaller
/// operand that fall below that grid are truncated.
inline WideAccumulator add(const WideAccumulator& a, const WideAccumulator& b, unsigned width) noexcept {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const int top = std::max(value_exponent(a), value_exponent(b));
    const int grid = std::max(std::min(a.exponent, b.exponent), top - static_cast<int>(width) + 2);
    const uint128 ma = shift(a.magnitude, grid - a.exponent);
    const uint128 mb = shift(b.magnitude, grid - b.exponent);
    WideAccumulator r;
    r.exponent = grid;
    if (a.negative == b.negative) {
        r.magnitude = ma + mb;
        r.negative = a.negative;
    } else if (ma >= mb) {
        r.magnitude = ma - mb;
        r.negative = a.negative;
    } else {
        r.magnitude = mb - ma;
        r.negative = b.negative;
    }
    if (r.magnitude == 0) r = {};
    return r;
}

inline void check_exponent(int biased, const FloatFormat& fmt) {
    if (biased > fmt.max_biased_exponent()) throw Error(errc::exponent_overflow, "result exceeds format range");
}

/// Truncates a wide value onto the scalar `fmt` grid.
inline double to_scalar(const WideAccumulator& a, const FloatFormat& fmt) {
    if (a.is_zero()) return 0.0;
    const int e = value_exponent(a);
    const int biased = e + static_cast<int>(fmt.bias);
    if (biased <= 0) return 0.0;
    check_exponent(biased, fmt);
    const int lsb = e - static_cast<int>(fmt.mantissa_width);
    const auto sig = static_cast<std::uint64_t>(shift(a.magnitude, lsb - a.exponent));
    const double mag = std::ldexp(static_cast<double>(sig), lsb);
    return a.negative ? -mag : mag;
}

/// Renormalizes to the largest component's exponent and re-boxes (Algorithm 1).
inline CbfpBlock encode_wide(std::span<const WideAccumulator> comps, const FloatFormat& fmt, Mode mode) {
    CbfpBlock b;
    b.format = fmt;
    b.mode = mode;
    const std::size_t n = comps.size();
    b.signs.assign(n, 0);
    b.leads.assign(n, 0);
    b.box_shifts.assign(n, 0);
    b.mantissas.assign(n, 0);

    const int bias = static_cast<int>(fmt.bias);
    const int bm = static_cast<int>(fmt.mantissa_width);
    int e_max = 0;
    for (const auto& c : comps)
        if (!c.is_zero()) e_max = std::max(e_max, value_exponent(c) + bias);
    if (e_max <= 0) return b; // everything underflows
    check_exponent(e_max, fmt);
    b.common_exponent = static_cast<unsigned>(e_max);

    const std::uint64_t mmask = (std::uint64_t{1} << bm) - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = comps[i];
        if (c.is_zero()) continue;
        const int e = value_exponent(c) + bias;
        if (e <= 0) continue; // below the format's normal range
        const int x = (mode == Mode::Box && e < e_max - bm) ? 1 : 0;
        const int lsb = e_max - bias - bm * (1 + x);
        const auto v = static_cast<std::uint64_t>(shift(c.magnitude, lsb - c.exponent));
        b.box_shifts[i] = static_cast<std::uint8_t>(x);
        if (v == 0) continue;
        b.signs[i] = c.negative ? 1 : 0;
        b.leads[i] = static_cast<std::uint8_t>(v >> bm);
        b.mantissas[i] = v & mmask;
    }
    return b;
}

inline bool any_box(const CbfpBlock& b) noexcept {
    return std::any_of(b.box_shifts.begin(), b.box_shifts.end(), [](auto x) { return x != 0; });
}

inline bool has_nonzero(const CbfpBlock& b) noexcept {
    for (std::size_t i = 0; i < b.n_components(); ++i)
        if (b.stored(i)) return true;
    return false;
}

inline Mode result_mode(const CbfpBlock& a, const CbfpBlock& b) noexcept {
    return (a.mode == Mode::Box || b.mode == Mode::Box) ? Mode::Box : Mode::Common;
}

inline void check_operands(const CbfpBlock& a, const CbfpBlock& b, bool same_size) {
    if (!(a.format == b.format)) throw Error(errc::format_mismatch, "operands use different formats");
    if (same_size && a.n_samples() != b.n_samples())
        throw Error(errc::block_size_mismatch, "operands have different block sizes");
    if (a.n_samples() == 0 || b.n_samples() == 0) throw Error(errc::block_size_mismatch, "empty block");
}

/// Post-scale stage fires when any non-zero output lane sits on a grid other than `reference_exponent`.
inline bool needs_post_scale(const CbfpBlock& out, unsigned reference_exponent) noexcept {
    if (!has_nonzero(out)) return false;
    return out.common_exponent != reference_exponent || any_box(out);
}

inline bool carries(const WideAccumulator& p, const FloatFormat& fmt) noexcept {
    // Product of two (L.M) significands, 2*B_m fraction bits: carry when >= 2.
    return !p.is_zero() && msb(p.magnitude) >= static_cast<int>(2 * fmt.mantissa_width + 1);
}

inline bool misaligned(const WideAccumulator& a, const WideAccumulator& b) noexcept {
    return !a.is_zero() && !b.is_zero() && value_exponent(a) != value_exponent(b);
}

inline bool renormalized(const WideAccumulator& a, const WideAccumulator& b, const WideAccumulator& sum) noexcept {
    if (a.is_zero() || b.is_zero() || sum.is_zero()) return false;
    return value_exponent(sum) != std::max(value_exponent(a), value_exponent(b));
}

struct ComplexWide {
    WideAccumulator re, im;
};

struct ProductFlags {
    bool carry = false;
    bool pair_misaligned = false;
    bool box_single = false; // a product with one boxed factor
    bool box_double = false; // a product with two boxed factors
};

inline ComplexWide complex_product(const CbfpBlock& a, std::size_t ka, const CbfpBlock& b, std::size_t kb,
                                   unsigned width, ProductFlags& flags) {
    const auto ar = component(a, 2 * ka), ai = component(a, 2 * ka + 1);
    const auto br = component(b, 2 * kb), bi = component(b, 2 * kb + 1);
    const WideAccumulator rr = multiply(ar, br), ii = multiply(ai, bi);
    const WideAccumulator ri = multiply(ar, bi), ir = multiply(ai, br);
    const auto& fmt = a.format;
    flags.carry = flags.carry || carries(rr, fmt) || carries(ii, fmt) || carries(ri, fmt) || carries(ir, fmt);
    flags.pair_misaligned = flags.pair_misaligned || misaligned(rr, ii) || misaligned(ri, ir);
    const unsigned xs[4] = {
        unsigned{a.box_shifts[2 * ka]} + b.box_shifts[2 * kb],
        unsigned{a.box_shifts[2 * ka + 1]} + b.box_shifts[2 * kb + 1],
        unsigned{a.box_shifts[2 * ka]} + b.box_shifts[2 * kb + 1],
        unsigned{a.box_shifts[2 * ka + 1]} + b.box_shifts[2 * kb],
    };
    for (unsigned x : xs) {
        flags.box_single = flags.box_single || x == 1;
        flags.box_double = flags.box_double || x == 2;
    }
    return ComplexWide{add(rr, negate(ii), width), add(ri, ir, width)};
}

} // namespace detail

/// Component-wise complex sum. Modes may differ; the result is boxed if either operand is.
inline CbfpBlock block_add(const CbfpBlock& a, const CbfpBlock& b, OpCostCounters& counters) {
    detail::check_operands(a, b, true);
    counters.reset();
    const auto& fmt = a.format;
    const std::size_t n = a.n_samples();
    const std::size_t lanes = 2 * n;
    const unsigned width = detail::accumulator_width(fmt);
    counters.complex_adds = n;

    // E_A - E_B; A is the unshifted side on a tie.
    ++counters.exponent_ops;
    const unsigned e_big = std::max(a.common_exponent, b.common_exponent);
    const bool decode_a = a.mode == Mode::Box && detail::any_box(a);
    const bool decode_b = b.mode == Mode::Box && detail::any_box(b);
    if (decode_a || decode_b) ++counters.exponent_ops; // boxed-lane grid E - B_m
    if (decode_a) counters.mantissa_scalings += lanes;
    if (decode_b) counters.mantissa_scalings += lanes;
    if (a.common_exponent != b.common_exponent) counters.mantissa_scalings += lanes;

    std::vector<WideAccumulator> sum(lanes);
    for (std::size_t i = 0; i < lanes; ++i)
        sum[i] = detail::add(detail::component(a, i), detail::component(b, i), width);

    const Mode mode = detail::result_mode(a, b);
    CbfpBlock out = detail::encode_wide(sum, fmt, mode);
    ++counters.exponent_ops; // output normalization
    if (mode == Mode::Box) ++counters.exponent_ops; // U = E - B_m
    if (detail::needs_post_scale(out, e_big)) counters.mantissa_scalings += lanes;
    return out;
}

/// Element-wise complex product.
inline CbfpBlock block_mul(const CbfpBlock& a, const CbfpBlock& b, OpCostCounters& counters) {
    detail::check_operands(a, b, true);
    counters.reset();
    const auto& fmt = a.format;
    const std::size_t n = a.n_samples();
    const unsigned width = detail::accumulator_width(fmt);
    counters.complex_mults = n;

    ++counters.exponent_ops; // E_A + E_B - bias
    const int product_exponent =
        static_cast<int>(a.common_exponent) + static_cast<int>(b.common_exponent) - static_cast<int>(fmt.bias);

    detail::ProductFlags flags;
    std::vector<WideAccumulator> prod(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto p = detail::complex_product(a, k, b, k, width, flags);
        prod[2 * k] = p.re;
        prod[2 * k + 1] = p.im;
    }
    // Intermediate exponents E_AB - B_m and E_AB - 2 B_m.
    if (flags.box_single) ++counters.exponent_ops;
    if (flags.box_double) ++counters.exponent_ops;
    if (a.mode == Mode::Box && detail::any_box(a)) counters.mantissa_scalings += 4 * n;
    if (b.mode == Mode::Box && detail::any_box(b)) counters.mantissa_scalings += 4 * n;
    if (flags.carry) counters.mantissa_scalings += 4 * n;
    if (flags.pair_misaligned) counters.mantissa_scalings += 2 * n;

    const Mode mode = detail::result_mode(a, b);
    CbfpBlock out = detail::encode_wide(prod, fmt, mode);
    ++counters.exponent_ops;
    if (mode == Mode::Box) ++counters.exponent_ops;
    if (!detail::has_nonzero(out)) return out;
    if (static_cast<int>(out.common_exponent) != product_exponent || detail::any_box(out))
        counters.mantissa_scalings += 2 * n;
    return out;
}

/// Full linear convolution, length N1 + N2 - 1. Every output term is a
/// complex inner product accumulated with a single running exponent.
inline CbfpBlock block_conv(const CbfpBlock& x1, const CbfpBlock& x2, OpCostCounters& counters) {
    detail::check_operands(x1, x2, false);
    counters.reset();
    const bool swap = x1.n_samples() > x2.n_samples();
    const CbfpBlock& a = swap ? x2 : x1; // shorter
    const CbfpBlock& b = swap ? x1 : x2;
    const auto& fmt = a.format;
    const std::size_t n1 = a.n_samples(), n2 = b.n_samples(), n_out = n1 + n2 - 1;
    const unsigned width = detail::accumulator_width(fmt);

    counters.complex_mults = n1 * n2;
    counters.complex_adds = (n1 - 1) * (n2 - 1);
    // Shared E_A + E_B - bias, then per output term: running exponent
    // initialization, alignment reference and normalization.
    counters.exponent_ops = 1 + 3 * n_out;

    detail::ProductFlags flags;
    bool align = false, renorm = false;
    std::vector<WideAccumulator> out(2 * n_out);
    for (std::size_t t = 0; t < n_out; ++t) {
        const std::size_t j_lo = t + 1 > n2 ? t + 1 - n2 : 0;
        const std::size_t j_hi = std::min(t, n1 - 1);
        detail::ComplexWide acc;
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const auto p = detail::complex_product(a, j, b, t - j, width, flags);
            if (j == j_lo) {
                acc = p;
                continue;
            }
            const auto re = detail::add(acc.re, p.re, width);
            const auto im = detail::add(acc.im, p.im, width);
            align = align || detail::misaligned(acc.re, p.re) || detail::misaligned(acc.im, p.im);
            renorm = renorm || detail::renormalized(acc.re, p.re, re) || detail::renormalized(acc.im, p.im, im);
            acc = {re, im};
        }
        out[2 * t] = acc.re;
        out[2 * t + 1] = acc.im;
    }

    const std::uint64_t mults = n1 * n2, adds = (n1 - 1) * (n2 - 1);
    const bool boxed = flags.box_single || flags.box_double;
    if (flags.carry) counters.mantissa_scalings += 4 * mults;
    if (flags.pair_misaligned) counters.mantissa_scalings += 2 * mults;
    if (boxed) counters.mantissa_scalings += 4 * mults;
    if (align) counters.mantissa_scalings += 2 * adds;
    if (renorm) counters.mantissa_scalings += 2 * adds;
    if (boxed) counters.mantissa_scalings += 4 * adds;

    return detail::encode_wide(out, fmt, detail::result_mode(a, b));
}

// ---------------------------------------------------------------------------
// Scalar IEEE-754 reference ALU (round toward zero after every operation).

namespace detail {

inline double scalar_mul(double x, double y, const FloatFormat& fmt, OpCostCounters& c) {
    ++c.exponent_ops;
    const auto p = multiply(scalar(x, fmt), scalar(y, fmt));
    if (carries(p, fmt)) ++c.mantissa_scalings;
    return to_scalar(p, fmt);
}

inline double scalar_add(double x, double y, const FloatFormat& fmt, OpCostCounters& c, bool count_post = true) {
    ++c.exponent_ops;
    const auto a = scalar(x, fmt), b = scalar(y, fmt);
    const auto s = add(a, b, accumulator_width(fmt));
    if (misaligned(a, b)) ++c.mantissa_scalings;
    if (count_post && renormalized(a, b, s)) ++c.mantissa_scalings;
    return to_scalar(s, fmt);
}

inline complex scalar_cmul(const complex& x, const complex& y, const FloatFormat& fmt, OpCostCounters& c,
                           bool count_post) {
    const double rr = scalar_mul(x.real(), y.real(), fmt, c);
    const double ii = scalar_mul(x.imag(), y.imag(), fmt, c);
    const double ri = scalar_mul(x.real(), y.imag(), fmt, c);
    const double ir = scalar_mul(x.imag(), y.real(), fmt, c);
    return complex(scalar_add(rr, -ii, fmt, c, count_post), scalar_add(ri, ir, fmt, c, count_post));
}

} // namespace detail

inline std::vector<complex> ieee_add(std::span<const complex> a, std::span<const complex> b,
                                     const FloatFormat& fmt, OpCostCounters& counters) {
    if (a.size() != b.size()) throw Error(errc::block_size_mismatch, "operands have different lengths");
    counters.reset();
    std::vector<complex> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] = complex(detail::scalar_add(a[k].real(), b[k].real(), fmt, counters),
                         detail::scalar_add(a[k].imag(), b[k].imag(), fmt, counters));
    counters.complex_adds = a.size();
    return out;
}

inline std::vector<complex> ieee_mul(std::span<const complex> a, std::span<const complex> b,
                                     const FloatFormat& fmt, OpCostCounters& counters) {
    if (a.size() != b.size()) throw Error(errc::block_size_mismatch, "operands have different lengths");
    counters.reset();
    std::vector<complex> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = detail::scalar_cmul(a[k], b[k], fmt, counters, true);
    counters.complex_mults = a.size();
    return out;
}

/// Direct-form convolution; the product's internal add normalizes as part of
/// the accumulation that follows, so only its pre-scale is counted.
inline std::vector<complex> ieee_conv(std::span<const complex> x1, std::span<const complex> x2,
                                      const FloatFormat& fmt, OpCostCounters& counters) {
    if (x1.empty() || x2.empty()) throw Error(errc::block_size_mismatch, "empty operand");
    counters.reset();
    const bool swap = x1.size() > x2.size();
    const auto a = swap ? x2 : x1;
    const auto b = swap ? x1 : x2;
    const std::size_t n1 = a.size(), n2 = b.size(), n_out = n1 + n2 - 1;
    std::vector<complex> out(n_out);
    for (std::size_t t = 0; t < n_out; ++t) {
        const std::size_t j_lo = t + 1 > n2 ? t + 1 - n2 : 0;
        const std::size_t j_hi = std::min(t, n1 - 1);
        complex acc;
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const complex p = detail::scalar_cmul(a[j], b[t - j], fmt, counters, false);
            ++counters.complex_mults;
            if (j == j_lo) {
                acc = p;
                continue;
            }
            acc = complex(detail::scalar_add(acc.real(), p.real(), fmt, counters),
                          detail::scalar_add(acc.imag(), p.imag(), fmt, counters));
            ++counters.complex_adds;
        }
        out[t] = acc;
    }
    return out;
}

} // namespace cbfp
