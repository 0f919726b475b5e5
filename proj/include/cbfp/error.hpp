#pragma once

#include <stdexcept>
#include <string>

namespace cbfp {

enum class errc {
    unsupported_value,
    format_mismatch,
    block_size_mismatch,
    exponent_overflow,
    zero_reference,
    length_mismatch,
    all_zero,
    ratio_out_of_range,
    bit_count_not_multiple,
    offset_out_of_range,
    invalid_rolloff,
    invalid_argument,
    parse_error,
};

inline const char* to_string(errc code) noexcept {
    switch (code) {
    case errc::unsupported_value: return "UnsupportedValue";
    case errc::format_mismatch: return "FormatMismatch";
    case errc::block_size_mismatch: return "BlockSizeMismatch";
    case errc::exponent_overflow: return "ExponentOverflow";
    case errc::zero_reference: return "ZeroReference";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::all_zero: return "AllZero";
    case errc::ratio_out_of_range: return "RatioOutOfRange";
    case errc::bit_count_not_multiple: return "BitCountNotMultipleOfJ";
    case errc::offset_out_of_range: return "OffsetOutOfRange";
    case errc::invalid_rolloff: return "InvalidRolloff";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace cbfp
