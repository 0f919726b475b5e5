#pragma once

// Sweep drivers behind the command-line tool. Each returns CSV text so runs
// are reproducible byte for byte given the same arguments.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cbfp/alu.hpp"
#include "cbfp/codec.hpp"
#include "cbfp/config.hpp"
#include "cbfp/metrics.hpp"
#include "cbfp/qam.hpp"
#include "cbfp/rates.hpp"

namespace cbfp {

struct SweepSpec {
    double start = 0, stop = 0, step = 1;

    std::vector<double> points() const {
        if (!(step > 0) || start > stop) throw Error(errc::invalid_argument, "sweep needs step > 0 and start <= stop");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = start + static_cast<double>(i) * step;
        return out;
    }
};

/// "start:stop:step" or a single value.
inline SweepSpec parse_sweep(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(detail::parse_real(detail::trim(item)));
    SweepSpec s;
    if (parts.size() == 1) s = {parts[0], parts[0], 1.0};
    else if (parts.size() == 3) s = {parts[0], parts[1], parts[2]};
    else throw Error(errc::invalid_argument, "sweep must be start:stop:step");
    (void)s.points();
    return s;
}

inline Op op_from_name(const std::string& name) {
    if (name == "add") return Op::Add;
    if (name == "mul") return Op::Mul;
    if (name == "conv") return Op::Conv;
    throw Error(errc::invalid_argument, "unknown op '" + name + "'");
}

/// Distinct deterministic seed for sweep point `index`.
constexpr std::uint64_t point_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Reference arithmetic in double precision.

inline std::vector<complex> reference_op(Op op, std::span<const complex> a, std::span<const complex> b) {
    if (op == Op::Conv) {
        std::vector<complex> y(a.size() + b.size() - 1);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) {
                const double re = a[i].real() * b[j].real() - a[i].imag() * b[j].imag();
                const double im = a[i].real() * b[j].imag() + a[i].imag() * b[j].real();
                y[i + j] += complex(re, im);
            }
        return y;
    }
    std::vector<complex> y(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (op == Op::Add) {
            y[k] = a[k] + b[k];
        } else {
            y[k] = complex(a[k].real() * b[k].real() - a[k].imag() * b[k].imag(),
                           a[k].real() * b[k].imag() + a[k].imag() * b[k].real());
        }
    }
    return y;
}

inline CbfpBlock block_op(Op op, const CbfpBlock& a, const CbfpBlock& b, OpCostCounters& c) {
    switch (op) {
    case Op::Add: return block_add(a, b, c);
    case Op::Mul: return block_mul(a, b, c);
    case Op::Conv: return block_conv(a, b, c);
    }
    throw Error(errc::invalid_argument, "bad op");
}

inline std::vector<complex> ieee_op(Op op, std::span<const complex> a, std::span<const complex> b,
                                    const FloatFormat& fmt, OpCostCounters& c) {
    switch (op) {
    case Op::Add: return ieee_add(a, b, fmt, c);
    case Op::Mul: return ieee_mul(a, b, fmt, c);
    case Op::Conv: return ieee_conv(a, b, fmt, c);
    }
    throw Error(errc::invalid_argument, "bad op");
}

/// EVM of the block result against the double reference truncated onto `fmt`.
inline double block_op_evm(Op op, Mode mode, std::span<const complex> a, std::span<const complex> b,
                           const FloatFormat& fmt) {
    const auto reference = truncate_all(reference_op(op, a, b), fmt);
    OpCostCounters c;
    const auto result = decode(block_op(op, encode(a, fmt, mode), encode(b, fmt, mode), c));
    return evm_percent(reference, result).evm_percent;
}

struct AluEvmRow {
    double ratio_db;
    Op op;
    double evm_common_pct;
    double evm_box_pct;
};

inline AluEvmRow alu_evm_point(Op op, const FloatFormat& fmt, double ratio_db, std::size_t n, std::uint64_t seed) {
    const auto [a, b] = generate_ratio_blocks(ratio_db, n, fmt, seed);
    return AluEvmRow{ratio_db, op, block_op_evm(op, Mode::Common, a, b, fmt), block_op_evm(op, Mode::Box, a, b, fmt)};
}

inline std::vector<AluEvmRow> alu_evm_sweep(Op op, const FloatFormat& fmt, const SweepSpec& sweep, std::size_t n,
                                            std::uint64_t seed) {
    const auto pts = sweep.points();
    std::vector<AluEvmRow> rows;
    rows.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) rows.push_back(alu_evm_point(op, fmt, pts[i], n, point_seed(seed, i)));
    return rows;
}

namespace detail {
inline std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}
} // namespace detail

inline std::string alu_evm_csv(const std::vector<AluEvmRow>& rows) {
    std::ostringstream os;
    os << "ratio_db,op,evm_common_pct,evm_box_pct\n";
    for (const auto& r : rows)
        os << detail::fmt_double(r.ratio_db) << ',' << to_string(r.op) << ',' << detail::fmt_double(r.evm_common_pct)
           << ',' << detail::fmt_double(r.evm_box_pct) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------

struct QamRow {
    double snr_db;
    Encoding mode;
    double evm_pct;
};

/// EVM of received symbols against the transmitted constellation, per mode and SNR.
inline std::vector<QamRow> qam_sweep(const TransceiverConfig& base, const SweepSpec& snr) {
    std::vector<QamRow> rows;
    for (double s : snr.points()) {
        TransceiverConfig cfg = base;
        cfg.snr_db = s;
        for (Encoding m : {Encoding::IEEE754, Encoding::Common, Encoding::Box}) {
            const auto run = run_single(cfg, m);
            rows.push_back({s, m, evm_percent(evm_window(run.tx_symbols), evm_window(run.rx_symbols)).evm_percent});
        }
    }
    return rows;
}

inline std::string qam_csv(const std::vector<QamRow>& rows) {
    std::ostringstream os;
    os << "snr_db,mode,evm_pct\n";
    for (const auto& r : rows)
        os << detail::fmt_double(r.snr_db) << ',' << to_string(r.mode) << ',' << detail::fmt_double(r.evm_pct) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------

/// Random operand with independent sign, significand and exponent per
/// component; exponents spread up to `spread` below an anchor near 1.0.
inline std::vector<complex> random_operand(std::mt19937_64& rng, std::size_t n, const FloatFormat& fmt, int spread) {
    const int top = static_cast<int>(fmt.bias) + 2;
    spread = std::min(spread, top - 1);
    const std::uint64_t mmask = (std::uint64_t{1} << fmt.mantissa_width) - 1;
    std::vector<complex> out(n);
    auto draw = [&] {
        const std::uint64_t w = rng();
        const int e = top - static_cast<int>(rng() % static_cast<std::uint64_t>(spread + 1));
        return assemble(ScalarFields{static_cast<unsigned>(w >> 63), static_cast<unsigned>(e), w & mmask, fmt});
    };
    for (auto& z : out) {
        const double re = draw();
        z = complex(re, draw());
    }
    return out;
}

struct ComplexityRow {
    Op op;
    Encoding mode;
    std::size_t n1, n2;
    OpCostCounters predicted;
    OpCostCounters measured; // component-wise maximum over trials
};

inline OpCostCounters run_counted(Op op, Encoding mode, std::span<const complex> a, std::span<const complex> b,
                                  const FloatFormat& fmt) {
    OpCostCounters c;
    if (mode == Encoding::IEEE754) {
        (void)ieee_op(op, a, b, fmt, c);
    } else {
        const Mode m = mode == Encoding::Box ? Mode::Box : Mode::Common;
        (void)block_op(op, encode(a, fmt, m), encode(b, fmt, m), c);
    }
    return c;
}

inline ComplexityRow complexity_point(Op op, Encoding mode, std::size_t n1, std::size_t n2, const FloatFormat& fmt,
                                      std::size_t trials, std::uint64_t seed) {
    if (op != Op::Conv) n2 = n1;
    ComplexityRow row{op, mode, n1, n2, predicted_costs(op, mode, n1, op == Op::Conv ? n2 : 0), {}};
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const int spread = static_cast<int>(rng() % 61);
        const auto a = random_operand(rng, n1, fmt, spread);
        const auto b = random_operand(rng, n2, fmt, spread);
        const auto c = run_counted(op, mode, a, b, fmt);
        row.measured.mantissa_scalings = std::max(row.measured.mantissa_scalings, c.mantissa_scalings);
        row.measured.exponent_ops = std::max(row.measured.exponent_ops, c.exponent_ops);
        row.measured.complex_mults = std::max(row.measured.complex_mults, c.complex_mults);
        row.measured.complex_adds = std::max(row.measured.complex_adds, c.complex_adds);
    }
    return row;
}

inline std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
    std::ostringstream os;
    os << "op,mode,n1,n2,pred_mant,meas_mant,pred_exp,meas_exp\n";
    for (const auto& r : rows)
        os << to_string(r.op) << ',' << to_string(r.mode) << ',' << r.n1 << ',' << r.n2 << ','
           << r.predicted.mantissa_scalings << ',' << r.measured.mantissa_scalings << ',' << r.predicted.exponent_ops
           << ',' << r.measured.exponent_ops << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------

/// Dynamic range of the RRC taps after truncation to `fmt`.
inline std::string rrc_range_csv(const SweepSpec& alphas, unsigned order, unsigned l, const FloatFormat& fmt) {
    std::ostringstream os;
    os << "alpha,dynamic_range_db\n";
    for (double a : alphas.points()) {
        auto taps = rrc_taps(a, order, l);
        for (auto& t : taps) t = truncate_to(t, fmt);
        os << detail::fmt_double(a) << ',' << detail::fmt_double(dynamic_range_db(taps)) << '\n';
    }
    return os.str();
}

inline std::string wordlength_csv(std::size_t n_samples, const FloatFormat& fmt) {
    std::ostringstream os;
    os << "n_v,format,ieee754_bits,common_bits,box_bits\n"
       << n_samples << ',' << format_name(fmt) << ',' << wordlength_bits(Encoding::IEEE754, n_samples, fmt) << ','
       << wordlength_bits(Encoding::Common, n_samples, fmt) << ',' << wordlength_bits(Encoding::Box, n_samples, fmt)
       << '\n';
    return os.str();
}

} // namespace cbfp
