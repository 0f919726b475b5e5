#pragma once

// Memory read/write (bits/s) and multiply-accumulate rates of the QAM chain
// stages, evaluated from the closed-form stage model.

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cbfp/qam.hpp"

namespace cbfp {

struct StageRate {
    std::string stage;
    double read_bps = 0;
    double write_bps = 0;
    double macs_per_s = 0;
};

struct RateReport {
    std::vector<StageRate> stages;

    const StageRate& at(const std::string& name) const {
        for (const auto& s : stages)
            if (s.stage == name) return s;
        throw Error(errc::invalid_argument, "no stage " + name);
    }
};

/// Per-word field widths stored by each encoding: (N_w, N_l, N_b, N_e).
/// IEEE-754 stores full words with no shared exponent, lead or box bits.
struct StorageWidths {
    std::int64_t word, lead, box, exponent;
};

inline StorageWidths storage_widths(const FloatFormat& fmt, Encoding mode) {
    const std::int64_t w = fmt.wordlength, e = fmt.exponent_width;
    switch (mode) {
    case Encoding::IEEE754: return {w, 0, 0, 0};
    case Encoding::Common: return {w, 1, 0, e};
    case Encoding::Box: return {w, 1, 1, e};
    }
    return {w, 0, 0, 0};
}

inline RateReport rate_model(const TransceiverConfig& cfg, Encoding mode) {
    validate(cfg);
    const auto [nw, nl, nb, ne] = storage_widths(cfg.format, mode);
    const std::int64_t f = cfg.symbol_rate, l = cfg.upsample, ng = cfg.filter_order;
    const std::int64_t j = cfg.bits_per_symbol();

    const std::int64_t word = nw + nl + nb - ne;      // per-component payload with box bit
    const std::int64_t word_unboxed = nw + nl - ne;   // as printed for downsampler / demapper reads
    const std::int64_t symbol_block = 2 * f * word + ne;
    const std::int64_t sample_block = 2 * l * f * word + ne;
    const std::int64_t filter_read = (3 * l * ng + 1) * (l * f) * word + 2 * ne;
    const std::int64_t filter_macs = l * l * ng * f;

    RateReport r;
    r.stages = {
        {"symbol_mapper", double(j * f), double(symbol_block), 0},
        {"upsampler", double(symbol_block), double(sample_block), 0},
        {"pulse_shape_filter", double(filter_read), double(sample_block), double(filter_macs)},
        {"matched_filter", double(filter_read), double(sample_block), double(filter_macs)},
        {"downsampler", double(2 * l * f * word_unboxed + ne + (nw + nl + nb)), double(symbol_block), 0},
        {"symbol_demapper", double(2 * f * word_unboxed + ne) + double(j * (nw + nl)) / 2.0, double(j * f), 0},
    };
    return r;
}

inline std::string rates_csv(const RateReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "stage,read_bps,write_bps,macs_per_s\n";
    for (const auto& s : r.stages) os << s.stage << ',' << s.read_bps << ',' << s.write_bps << ',' << s.macs_per_s << '\n';
    return os.str();
}

} // namespace cbfp
