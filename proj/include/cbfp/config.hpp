#pragma once

// key=value transceiver configuration; '#' starts a comment.

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "cbfp/qam.hpp"

namespace cbfp {

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline Encoding encoding_from_name(const std::string& v) {
    if (v == "ieee754" || v == "ieee") return Encoding::IEEE754;
    if (v == "common") return Encoding::Common;
    if (v == "box") return Encoding::Box;
    throw Error(errc::invalid_argument, "unknown mode '" + v + "'");
}

inline std::uint64_t parse_u64(const std::string& v) {
    const bool hex = v.rfind("0x", 0) == 0;
    const char* first = v.data() + (hex ? 2 : 0);
    const char* last = v.data() + v.size();
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(first, last, out, hex ? 16 : 10);
    if (ec != std::errc{} || p != last || first == last) throw Error(errc::invalid_argument, "bad integer '" + v + "'");
    return out;
}

inline double parse_real(const std::string& v) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw Error(errc::invalid_argument, "bad number '" + v + "'");
    return d;
}

} // namespace detail

inline Encoding encoding_from_name(const std::string& v) { return detail::encoding_from_name(v); }

inline void set_config_value(TransceiverConfig& cfg, const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "constellation_order") cfg.constellation_order = static_cast<unsigned>(parse_u64(value));
    else if (key == "upsample") cfg.upsample = static_cast<unsigned>(parse_u64(value));
    else if (key == "symbol_rate") cfg.symbol_rate = static_cast<unsigned>(parse_u64(value));
    else if (key == "filter_order") cfg.filter_order = static_cast<unsigned>(parse_u64(value));
    else if (key == "rolloff") cfg.rolloff = parse_real(value);
    else if (key == "snr_db") cfg.snr_db = parse_real(value);
    else if (key == "seed") cfg.seed = parse_u64(value);
    else if (key == "block_size") cfg.block_size = parse_u64(value);
    else if (key == "format" || key == "fmt") cfg.format = format_from_name(value);
    else if (key == "mode") cfg.mode = detail::encoding_from_name(value);
    else if (key == "n_symbols") cfg.n_symbols = parse_u64(value);
    else throw Error(errc::invalid_argument, "unknown key '" + key + "'");
}

/// Errors are reported as ParseError with the 1-based line number.
inline TransceiverConfig parse_config(std::istream& in, TransceiverConfig cfg = {}) {
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(errc::parse_error, "line " + std::to_string(lineno) + ": expected key=value");
        try {
            set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw Error(errc::parse_error, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

inline TransceiverConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline TransceiverConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(errc::parse_error, "cannot open config " + path);
    return parse_config(f);
}

} // namespace cbfp
