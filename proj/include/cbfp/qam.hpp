#pragma once

// Discrete-time complex baseband QAM transmitter / receiver over AWGN:
// mapper -> upsample -> RRC pulse shape -> AWGN -> matched filter ->
// downsample -> demapper, either in scalar IEEE-754 or on CBFP blocks.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "cbfp/alu.hpp"
#include "cbfp/codec.hpp"
#include "cbfp/metrics.hpp"

namespace cbfp {

struct TransceiverConfig {
    unsigned constellation_order = 1024;
    unsigned upsample = 4;
    unsigned symbol_rate = 2400;
    unsigned filter_order = 32;
    double rolloff = 0.2;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0xCBF0;
    std::size_t block_size = 0; // 0: upsample * symbol_rate
    FloatFormat format = kSingle;
    Encoding mode = Encoding::Box;
    std::size_t n_symbols = 10000;

    std::size_t effective_block_size() const noexcept {
        return block_size ? block_size : std::size_t{upsample} * symbol_rate;
    }
    unsigned bits_per_symbol() const noexcept {
        return static_cast<unsigned>(std::bit_width(constellation_order) - 1);
    }
};

inline void validate(const TransceiverConfig& cfg) {
    const unsigned m = cfg.constellation_order;
    if (m < 4 || !std::has_single_bit(m) || (std::bit_width(m) - 1) % 2 != 0)
        throw Error(errc::invalid_argument, "constellation order must be a square power of two");
    if (cfg.upsample == 0) throw Error(errc::invalid_argument, "upsample must be >= 1");
    if (cfg.filter_order == 0 || cfg.filter_order % 2) throw Error(errc::invalid_argument, "filter order must be even");
    if (!(cfg.rolloff > 0.0 && cfg.rolloff < 1.0)) throw Error(errc::invalid_rolloff, "rolloff must lie in (0,1)");
    if (cfg.n_symbols == 0) throw Error(errc::invalid_argument, "n_symbols must be >= 1");
    if (!is_valid(cfg.format)) throw Error(errc::invalid_argument, "invalid format");
}

namespace detail {

inline unsigned axis_levels(unsigned m) { return 1u << ((std::bit_width(m) - 1) / 2); }

inline double constellation_scale(unsigned m) {
    return 1.0 / std::sqrt(2.0 * (static_cast<double>(m) - 1.0) / 3.0);
}

inline unsigned gray_to_binary(unsigned g) {
    for (unsigned s = g >> 1; s; s >>= 1) g ^= s;
    return g;
}

} // namespace detail

/// Square Gray-coded QAM with unit mean symbol energy. Each symbol consumes
/// J bits, MSB first; the first J/2 select the in-phase level.
inline std::vector<complex> map_symbols(std::span<const std::uint8_t> bits, unsigned m) {
    const unsigned j = static_cast<unsigned>(std::bit_width(m) - 1);
    if (bits.size() % j) throw Error(errc::bit_count_not_multiple, "bit count not a multiple of J");
    const unsigned half = j / 2, side = detail::axis_levels(m);
    const double scale = detail::constellation_scale(m);
    auto level = [&](std::span<const std::uint8_t> b) {
        unsigned g = 0;
        for (auto bit : b) g = (g << 1) | (bit & 1u);
        const unsigned idx = detail::gray_to_binary(g);
        return (2.0 * idx - (side - 1.0)) * scale;
    };
    std::vector<complex> out(bits.size() / j);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto sym = bits.subspan(k * j, j);
        out[k] = complex(level(sym.first(half)), level(sym.last(half)));
    }
    return out;
}

/// Nearest-point hard decision, inverse of map_symbols.
inline std::vector<std::uint8_t> demap_symbols(std::span<const complex> symbols, unsigned m) {
    const unsigned j = static_cast<unsigned>(std::bit_width(m) - 1);
    const unsigned half = j / 2, side = detail::axis_levels(m);
    const double scale = detail::constellation_scale(m);
    std::vector<std::uint8_t> bits;
    bits.reserve(symbols.size() * j);
    auto emit = [&](double v) {
        const double idx = std::round((v / scale + (side - 1.0)) / 2.0);
        const auto i = static_cast<unsigned>(std::clamp(idx, 0.0, side - 1.0));
        const unsigned g = i ^ (i >> 1);
        for (unsigned k = half; k-- > 0;) bits.push_back(static_cast<std::uint8_t>((g >> k) & 1u));
    };
    for (const auto& s : symbols) {
        emit(s.real());
        emit(s.imag());
    }
    return bits;
}

inline std::vector<complex> upsample(std::span<const complex> x, unsigned factor) {
    if (factor == 0) throw Error(errc::invalid_argument, "upsample factor must be >= 1");
    std::vector<complex> out(x.size() * factor);
    for (std::size_t k = 0; k < x.size(); ++k) out[k * factor] = x[k];
    return out;
}

inline std::vector<complex> downsample(std::span<const complex> x, unsigned factor, std::size_t offset) {
    if (factor == 0) throw Error(errc::invalid_argument, "downsample factor must be >= 1");
    if (offset >= x.size()) throw Error(errc::offset_out_of_range, "offset beyond sequence");
    std::vector<complex> out;
    out.reserve((x.size() - offset + factor - 1) / factor);
    for (std::size_t k = offset; k < x.size(); k += factor) out.push_back(x[k]);
    return out;
}

/// Root-raised-cosine taps, N + 1 of them at `l` samples per symbol, unit energy.
inline std::vector<double> rrc_taps(double alpha, unsigned order, unsigned l) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(errc::invalid_rolloff, "rolloff must lie in (0,1)");
    if (order == 0 || order % 2) throw Error(errc::invalid_argument, "filter order must be even");
    if (l == 0) throw Error(errc::invalid_argument, "samples per symbol must be >= 1");
    using std::numbers::pi;
    std::vector<double> h(order + 1);
    const double quarter = 1.0 / (4.0 * alpha);
    for (unsigned k = 0; k <= order; ++k) {
        const double t = (static_cast<double>(k) - order / 2.0) / l;
        if (t == 0.0) {
            h[k] = 1.0 - alpha + 4.0 * alpha / pi;
        } else if (std::abs(std::abs(t) - quarter) < 1e-12) {
            h[k] = alpha / std::numbers::sqrt2 *
                   ((1.0 + 2.0 / pi) * std::sin(pi * quarter) + (1.0 - 2.0 / pi) * std::cos(pi * quarter));
        } else {
            const double x = 4.0 * alpha * t;
            h[k] = (std::sin(pi * t * (1.0 - alpha)) + x * std::cos(pi * t * (1.0 + alpha))) /
                   (pi * t * (1.0 - x * x));
        }
    }
    double peak = 0.0, energy = 0.0;
    for (double v : h) peak = std::max(peak, std::abs(v));
    // Analytic zeros evaluate to rounding noise; snap them.
    for (double& v : h)
        if (std::abs(v) < 1e-12 * peak) v = 0.0;
    for (double v : h) energy += v * v;
    const double norm = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= norm;
    return h;
}

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Circularly-symmetric Gaussian noise at `snr_db` relative to the measured mean power of `x`.
inline std::vector<complex> awgn(std::span<const complex> x, double snr_db, std::uint64_t seed) {
    if (x.empty()) throw Error(errc::invalid_argument, "empty signal");
    std::vector<complex> out(x.begin(), x.end());
    if (std::isinf(snr_db) && snr_db > 0) return out;
    double power = 0.0;
    for (const auto& v : x) power += std::norm(v);
    power /= static_cast<double>(x.size());
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0) / 2.0);

    std::mt19937_64 rng(seed);
    auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    for (auto& v : out) {
        // Box-Muller: one pair per complex sample.
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double th = 2.0 * std::numbers::pi * uniform();
        v += complex(sigma * r * std::cos(th), sigma * r * std::sin(th));
    }
    return out;
}

struct FilterStats {
    OpCostCounters measured;  // summed over blocks
    OpCostCounters predicted; // summed over blocks
    bool within_bounds = true;
    std::size_t blocks = 0;
};

/// Full linear convolution of `x` with real taps, length |x| + |h| - 1.
/// IEEE754: double arithmetic truncated onto the format. CBFP modes: the signal
/// is cut into blocks of `block_size` processed with block_conv (overlap-save,
/// history kept in scalar form), taps encoded as one block.
inline std::vector<complex> fir_filter(std::span<const complex> x, std::span<const double> h,
                                       const FloatFormat& fmt, Encoding mode, std::size_t block_size,
                                       FilterStats* stats = nullptr) {
    const std::size_t nh = h.size(), n_out = x.size() + nh - 1;
    std::vector<complex> y(n_out);
    if (mode == Encoding::IEEE754) {
        for (std::size_t n = 0; n < n_out; ++n) {
            complex acc;
            const std::size_t k_lo = n + 1 > x.size() ? n + 1 - x.size() : 0;
            for (std::size_t k = k_lo; k <= std::min(n, nh - 1); ++k) acc += h[k] * x[n - k];
            y[n] = complex(truncate_to(acc.real(), fmt), truncate_to(acc.imag(), fmt));
        }
        return y;
    }

    const Mode block_mode = mode == Encoding::Box ? Mode::Box : Mode::Common;
    std::vector<complex> taps(nh);
    for (std::size_t k = 0; k < nh; ++k) taps[k] = complex(truncate_to(h[k], fmt), 0.0);
    const CbfpBlock taps_block = encode(taps, fmt, block_mode);
    const std::size_t history = nh - 1;
    auto sample = [&](std::ptrdiff_t i) {
        return (i < 0 || static_cast<std::size_t>(i) >= x.size()) ? complex{} : x[static_cast<std::size_t>(i)];
    };
    for (std::size_t start = 0; start < n_out; start += block_size) {
        const std::size_t len = std::min(block_size, n_out - start);
        std::vector<complex> seg(history + len);
        for (std::size_t i = 0; i < seg.size(); ++i)
            seg[i] = sample(static_cast<std::ptrdiff_t>(start + i) - static_cast<std::ptrdiff_t>(history));
        OpCostCounters c;
        const auto out = decode(block_conv(taps_block, encode(seg, fmt, block_mode), c));
        for (std::size_t i = 0; i < len; ++i) y[start + i] = out[history + i];
        if (stats) {
            const auto p = predicted_costs(Op::Conv, mode, nh, seg.size());
            stats->within_bounds = stats->within_bounds && c.mantissa_scalings <= p.mantissa_scalings &&
                                   c.exponent_ops <= p.exponent_ops;
            stats->measured.mantissa_scalings += c.mantissa_scalings;
            stats->measured.exponent_ops += c.exponent_ops;
            stats->measured.complex_mults += c.complex_mults;
            stats->measured.complex_adds += c.complex_adds;
            stats->predicted.mantissa_scalings += p.mantissa_scalings;
            stats->predicted.exponent_ops += p.exponent_ops;
            stats->predicted.complex_mults += p.complex_mults;
            stats->predicted.complex_adds += p.complex_adds;
            ++stats->blocks;
        }
    }
    return y;
}

/// Symbols excluded at each end of the EVM window (filter transients).
inline constexpr std::size_t kEvmGuardSymbols = 8;

struct ChainRun {
    std::vector<std::uint8_t> tx_bits;
    std::vector<complex> tx_symbols;
    std::vector<complex> rx_symbols;
    std::vector<std::uint8_t> rx_bits;
    FilterStats pulse_shape;
    FilterStats matched_filter;
};

inline std::vector<std::uint8_t> chain_bits(const TransceiverConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::uint8_t> bits(cfg.n_symbols * cfg.bits_per_symbol());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    return bits;
}

inline std::uint64_t noise_seed(const TransceiverConfig& cfg) noexcept { return cfg.seed ^ 0x9E3779B97F4A7C15ull; }

/// One pass of the chain in `mode`; bits and noise depend only on cfg.seed.
inline ChainRun run_single(const TransceiverConfig& cfg, Encoding mode) {
    validate(cfg);
    const auto& fmt = cfg.format;
    ChainRun r;
    r.tx_bits = chain_bits(cfg);
    r.tx_symbols = truncate_all(map_symbols(r.tx_bits, cfg.constellation_order), fmt);
    const auto taps = rrc_taps(cfg.rolloff, cfg.filter_order, cfg.upsample);
    const std::size_t nv = cfg.effective_block_size();

    const auto up = upsample(r.tx_symbols, cfg.upsample);
    const auto tx = fir_filter(up, taps, fmt, mode, nv, &r.pulse_shape);
    const auto noisy = truncate_all(awgn(tx, cfg.snr_db, noise_seed(cfg)), fmt);
    const auto mf = fir_filter(noisy, taps, fmt, mode, nv, &r.matched_filter);
    auto rx = downsample(mf, cfg.upsample, cfg.filter_order);
    rx.resize(cfg.n_symbols);
    r.rx_symbols = std::move(rx);
    r.rx_bits = demap_symbols(r.rx_symbols, cfg.constellation_order);
    return r;
}

inline std::span<const complex> evm_window(const std::vector<complex>& v) {
    if (v.size() <= 2 * kEvmGuardSymbols) return v;
    return std::span<const complex>(v).subspan(kEvmGuardSymbols, v.size() - 2 * kEvmGuardSymbols);
}

struct ChainResult {
    ChainRun run;
    EvmResult evm_vs_ieee; // rx symbols against the scalar IEEE-754 chain
    EvmResult evm_vs_tx;   // rx symbols against the transmitted constellation points
    std::size_t bit_errors = 0;
};

/// Runs cfg.mode and the scalar IEEE-754 reference with identical bits and noise.
inline ChainResult run_chain(const TransceiverConfig& cfg) {
    ChainResult res;
    res.run = run_single(cfg, cfg.mode);
    const ChainRun ref = cfg.mode == Encoding::IEEE754 ? res.run : run_single(cfg, Encoding::IEEE754);
    res.evm_vs_ieee = evm_percent(evm_window(ref.rx_symbols), evm_window(res.run.rx_symbols));
    res.evm_vs_tx = evm_percent(evm_window(res.run.tx_symbols), evm_window(res.run.rx_symbols));
    for (std::size_t i = 0; i < res.run.tx_bits.size(); ++i)
        res.bit_errors += res.run.tx_bits[i] != res.run.rx_bits[i];
    return res;
}

} // namespace cbfp
