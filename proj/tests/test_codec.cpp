#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "cbfp/block_file.hpp"
#include "cbfp/codec.hpp"
#include "oracles.hpp"

using namespace cbfp;

namespace {

std::vector<complex> one(complex z) { return {z}; }

// Random block with exponents spread up to `spread` below `top`.
std::vector<complex> random_block(std::mt19937_64& rng, std::size_t n, const FloatFormat& fmt, int top, int spread) {
    spread = std::min(spread, top - 1);
    const std::uint64_t mmask = (std::uint64_t{1} << fmt.mantissa_width) - 1;
    auto draw = [&] {
        if (rng() % 16 == 0) return 0.0;
        const int e = top - static_cast<int>(rng() % static_cast<std::uint64_t>(spread + 1));
        const double sig = 1.0 + std::ldexp(static_cast<double>(rng() & mmask), -static_cast<int>(fmt.mantissa_width));
        const double v = std::ldexp(sig, e - static_cast<int>(fmt.bias));
        return (rng() & 1) ? -v : v;
    };
    std::vector<complex> out(n);
    for (auto& z : out) {
        const double re = draw();
        z = complex(re, draw());
    }
    return out;
}

double component(const std::vector<complex>& v, std::size_t i) { return i % 2 ? v[i / 2].imag() : v[i / 2].real(); }

} // namespace

TEST(EncodeCommon, EqualExponents) {
    const auto b = encode_common(one({1.0, 1.0}), kSingle);
    EXPECT_EQ(b.common_exponent, 127u);
    for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(b.signs[i], 0);
        EXPECT_EQ(b.leads[i], 1);
        EXPECT_EQ(b.mantissas[i], 0u);
    }
}

TEST(EncodeCommon, SmallComponentShiftedOut) {
    const auto b = encode_common(one({8.0, std::ldexp(1.0, -27)}), kSingle);
    EXPECT_EQ(b.common_exponent, 130u);
    EXPECT_EQ(b.leads[0], 1);
    EXPECT_EQ(b.mantissas[0], 0u);
    EXPECT_EQ(b.leads[1], 0);
    EXPECT_EQ(b.mantissas[1], 0u);
    EXPECT_FALSE(oracle::survives_shift(1u << 23, 130 - 100));
    EXPECT_EQ(decode(b)[0], complex(8.0, 0.0));
}

TEST(EncodeCommon, OnePlaceShift) {
    const auto b = encode_common(one({1.5, 0.75}), kSingle);
    EXPECT_EQ(b.common_exponent, 127u);
    EXPECT_EQ(b.leads[0], 1);
    EXPECT_EQ(b.mantissas[0], 1u << 22);
    // (1.1)_2 shifted right one place is (0.11)_2.
    EXPECT_EQ(b.leads[1], 0);
    EXPECT_EQ(b.mantissas[1], (1u << 22) + (1u << 21));
    EXPECT_EQ(decode(b)[0], complex(1.5, 0.75));
}

TEST(EncodeCommon, AllZeroBlock) {
    const std::vector<complex> z(4);
    const auto b = encode_common(z, kSingle);
    EXPECT_EQ(b.common_exponent, 0u);
    EXPECT_EQ(decode(b), z);
}

TEST(EncodeCommon, RejectsUnsupported) {
    EXPECT_THROW(encode_common(one({NAN, 0.0}), kSingle), Error);
    EXPECT_THROW(encode_box(one({0.0, INFINITY}), kSingle), Error);
}

TEST(EncodeBox, BoxesSmallComponent) {
    const double tiny = std::ldexp(1.0, -27);
    const auto b = encode_box(one({8.0, tiny}), kSingle);
    EXPECT_EQ(b.common_exponent, 130u);
    EXPECT_EQ(b.box_shifts[0], 0);
    EXPECT_EQ(b.box_shifts[1], 1);
    // e' = 100 + 23 = 123, shift 7: the leading one lands at bit 23 - 7.
    EXPECT_EQ(b.leads[1], 0);
    EXPECT_EQ(b.mantissas[1], 1u << 16);
    EXPECT_EQ(decode(b)[0], complex(8.0, tiny));
    EXPECT_EQ(decode(encode_common(one({8.0, tiny}), kSingle))[0], complex(8.0, 0.0));
}

TEST(EncodeBox, SameExponentMatchesCommon) {
    std::mt19937_64 rng(1);
    const auto x = random_block(rng, 16, kSingle, 127, 0);
    auto c = encode_common(x, kSingle);
    const auto b = encode_box(x, kSingle);
    for (auto s : b.box_shifts) EXPECT_EQ(s, 0);
    c.mode = Mode::Box;
    EXPECT_EQ(b, c);
}

TEST(EncodeBox, FiftyBelowMaxZeroesOut) {
    const auto b = encode_box(one({std::ldexp(1.0, 10), std::ldexp(1.5, -40)}), kSingle);
    EXPECT_EQ(b.box_shifts[1], 1);
    EXPECT_EQ(b.leads[1], 0);
    EXPECT_EQ(b.mantissas[1], 0u);
    EXPECT_FALSE(oracle::survives_shift(3u << 22, 50 - 23));
}

TEST(Decode, BoxRoundTripUnit) {
    EXPECT_EQ(decode(encode_box(one({1.0, 1.0}), kSingle))[0], complex(1.0, 1.0));
}

TEST(Wordlength, TableValues) {
    EXPECT_EQ(wordlength_bits(Encoding::IEEE754, 25, kSingle), 2u * 25 * 32);
    EXPECT_EQ(wordlength_bits(Encoding::Common, 25, kSingle), 2u * 25 * 25 + 8);
    EXPECT_EQ(wordlength_bits(Encoding::Box, 25, kSingle), 2u * 25 * 26 + 8);
    EXPECT_EQ(wordlength_bits(Encoding::IEEE754, 25, kSingle), 1600u);
    EXPECT_EQ(wordlength_bits(Encoding::Common, 25, kSingle), 1258u);
    EXPECT_EQ(wordlength_bits(Encoding::Box, 25, kSingle), 1308u);
}

TEST(Wordlength, Ordering) {
    for (const FloatFormat fmt : {kHalf, kSingle, kDouble})
        for (std::uint64_t n = 1; n <= 4096; ++n) {
            ASSERT_LT(wordlength_bits(Encoding::Common, n, fmt), wordlength_bits(Encoding::Box, n, fmt));
            ASSERT_LT(wordlength_bits(Encoding::Box, n, fmt), wordlength_bits(Encoding::IEEE754, n, fmt));
        }
}

TEST(MaxExponentDifference, Widths) {
    EXPECT_EQ(max_exponent_difference(kSingle), 23u);
    EXPECT_EQ(max_exponent_difference(kHalf), 10u);
    EXPECT_EQ(max_exponent_difference(kDouble), 52u);
}

// Brute-force boundary: a component delta below the block maximum survives
// iff some bit of (1.M) survives delta single-place shifts (Common) or
// delta - Bm shifts once boxed.
TEST(ExponentGap, BoundaryAgreesWithShiftOracle) {
    for (const FloatFormat fmt : {kHalf, kSingle}) {
        const int bm = static_cast<int>(fmt.mantissa_width);
        const std::uint64_t full = (std::uint64_t{2} << bm) - 1; // 1.11...1
        for (int delta = 0; delta <= 60; ++delta) {
            const int top = fmt.max_biased_exponent();
            if (top - delta < 1) break;
            const double big = std::ldexp(1.0, top - static_cast<int>(fmt.bias));
            const double small = std::ldexp(static_cast<double>(full), top - delta - static_cast<int>(fmt.bias) - bm);
            const auto c = encode_common(one({big, small}), fmt);
            const auto b = encode_box(one({big, small}), fmt);
            EXPECT_EQ(c.stored(1) != 0, oracle::survives_shift(full, delta)) << delta;
            const int boxed = delta > bm ? delta - bm : delta;
            EXPECT_EQ(b.stored(1) != 0, oracle::survives_shift(full, boxed)) << delta;
            EXPECT_EQ(c.stored(1) != 0, delta <= bm);
            EXPECT_EQ(b.stored(1) != 0, delta <= 2 * bm);
        }
    }
}

TEST(Eer, Examples) {
    EXPECT_EQ(eer_classify(130, 130, 130, kSingle, Mode::Common), Region::Inside);
    EXPECT_EQ(eer_classify(130, 106, 130, kSingle, Mode::Common), Region::Outside);
    EXPECT_EQ(eer_classify(130, 106, 130, kSingle, Mode::Box), Region::Inside);
    EXPECT_EQ(eer_classify(130, 83, 130, kSingle, Mode::Box), Region::Outside);
    EXPECT_THROW(eer_classify(131, 1, 130, kSingle, Mode::Box), Error);
}

TEST(Eer, AgreesWithConstructedSample) {
    for (unsigned e_im : {130u, 107u, 106u, 84u, 83u}) {
        const double re = std::ldexp(1.0, 3), im = std::ldexp(1.0, static_cast<int>(e_im) - 127);
        for (Mode m : {Mode::Common, Mode::Box}) {
            const auto z = decode(encode(one({re, im}), kSingle, m))[0];
            EXPECT_EQ(eer_classify(130, e_im, 130, kSingle, m) == Region::Inside, z.imag() != 0.0) << e_im;
        }
    }
}

TEST(Eer, LatticeArea) {
    for (const FloatFormat fmt : {kHalf, kSingle}) {
        const unsigned bm = fmt.mantissa_width, e_max = 5 * bm;
        const unsigned side = 4 * bm;
        std::size_t common = 0, box = 0;
        for (unsigned a = e_max - side; a <= e_max; ++a)
            for (unsigned c = e_max - side; c <= e_max; ++c) {
                common += eer_classify(a, c, e_max, fmt, Mode::Common) == Region::Inside;
                box += eer_classify(a, c, e_max, fmt, Mode::Box) == Region::Inside;
            }
        EXPECT_EQ(common, (bm + 1) * (bm + 1));
        EXPECT_EQ(box, (2 * bm + 1) * (2 * bm + 1));
    }
}

class CodecProperty : public ::testing::TestWithParam<FloatFormat> {};

TEST_P(CodecProperty, TruncationWithinOneLsb) {
    const FloatFormat fmt = GetParam();
    std::mt19937_64 rng(11);
    const int bm = static_cast<int>(fmt.mantissa_width);
    for (int t = 0; t < 2000; ++t) {
        const int top = static_cast<int>(fmt.bias) + static_cast<int>(rng() % 5);
        const auto x = random_block(rng, 8, fmt, top, static_cast<int>(rng() % (3 * bm)));
        for (Mode m : {Mode::Common, Mode::Box}) {
            const auto b = encode(x, fmt, m);
            const auto y = decode(b);
            for (std::size_t i = 0; i < b.n_components(); ++i) {
                const double v = component(x, i), w = component(y, i);
                if (v == 0.0) {
                    ASSERT_EQ(w, 0.0);
                    continue;
                }
                const unsigned e = split(v, fmt).exponent;
                const Region r = eer_classify(e, e, b.common_exponent, fmt, m);
                const double bound = std::ldexp(1.0, static_cast<int>(b.common_exponent) -
                                                         static_cast<int>(fmt.bias) - bm - bm * b.box_shifts[i]);
                if (r == Region::Inside) {
                    ASSERT_LT(std::fabs(v - w), bound);
                }
                ASSERT_LE(std::fabs(w), std::fabs(v));
                ASSERT_TRUE(w == 0.0 || std::signbit(w) == std::signbit(v));
            }
        }
    }
}

TEST_P(CodecProperty, BoxNeverWorseThanCommon) {
    const FloatFormat fmt = GetParam();
    std::mt19937_64 rng(12);
    for (int t = 0; t < 2000; ++t) {
        const auto x = random_block(rng, 8, fmt, static_cast<int>(fmt.bias), static_cast<int>(rng() % 60));
        const auto c = decode(encode_common(x, fmt));
        const auto b = decode(encode_box(x, fmt));
        for (std::size_t i = 0; i < 2 * x.size(); ++i)
            ASSERT_LE(std::fabs(component(x, i) - component(b, i)), std::fabs(component(x, i) - component(c, i)));
    }
}

TEST_P(CodecProperty, ExactIffNoTruncatedOnes) {
    const FloatFormat fmt = GetParam();
    std::mt19937_64 rng(13);
    const int bm = static_cast<int>(fmt.mantissa_width);
    for (int t = 0; t < 2000; ++t) {
        const int top = static_cast<int>(fmt.bias);
        auto x = random_block(rng, 4, fmt, top, bm);
        const bool zero_tails = t % 2 == 0;
        if (zero_tails) {
            // Keep only the bits that survive alignment to the block maximum.
            int e_max = 0;
            for (std::size_t i = 0; i < 2 * x.size(); ++i)
                if (component(x, i) != 0) e_max = std::max(e_max, static_cast<int>(split(component(x, i), fmt).exponent));
            for (auto& z : x) {
                const double lsb = std::ldexp(1.0, e_max - static_cast<int>(fmt.bias) - bm);
                z = complex(std::trunc(z.real() / lsb) * lsb, std::trunc(z.imag() / lsb) * lsb);
            }
        }
        const auto y = decode(encode_common(x, fmt));
        bool lost = false;
        const auto b = encode_common(x, fmt);
        for (std::size_t i = 0; i < 2 * x.size(); ++i) {
            const double v = component(x, i);
            if (v == 0.0) continue;
            const auto f = split(v, fmt);
            const int shift = static_cast<int>(b.common_exponent - f.exponent);
            const std::uint64_t sig = f.significand();
            if (shift >= 64 || (sig & ((std::uint64_t{1} << shift) - 1)) != 0) lost = true;
        }
        ASSERT_EQ(y == x, !lost);
        if (zero_tails) {
            ASSERT_EQ(y, x);
        }
    }
}

TEST_P(CodecProperty, SameExponentRoundTrip) {
    const FloatFormat fmt = GetParam();
    std::mt19937_64 rng(14);
    for (int t = 0; t < 2000; ++t) {
        const auto x = random_block(rng, 1 + rng() % 64, fmt, static_cast<int>(fmt.bias) - 3, 0);
        ASSERT_EQ(decode(encode_common(x, fmt)), x);
        ASSERT_EQ(decode(encode_box(x, fmt)), x);
    }
}

INSTANTIATE_TEST_SUITE_P(Formats, CodecProperty, ::testing::Values(kHalf, kSingle, kDouble),
                         [](const auto& info) { return std::string(format_name(info.param)); });

TEST(BlockFile, PayloadBitsEqualWordlength) {
    std::mt19937_64 rng(21);
    for (const FloatFormat fmt : {kHalf, kSingle, kDouble})
        for (Mode m : {Mode::Common, Mode::Box})
            for (std::size_t n : {1u, 2u, 25u, 63u}) {
                const auto b = encode(random_block(rng, n, fmt, static_cast<int>(fmt.bias), 30), fmt, m);
                std::size_t bits = 0;
                const auto payload = pack_payload(b, &bits);
                EXPECT_EQ(bits, wordlength_bits(to_encoding(m), n, fmt));
                EXPECT_EQ(payload.size(), (bits + 7) / 8);
                EXPECT_EQ(deserialize(serialize(b)), b);
            }
}

TEST(BlockFile, FileRoundTripAndCorruption) {
    std::mt19937_64 rng(22);
    const auto b = encode_box(random_block(rng, 9, kSingle, 127, 40), kSingle);
    const auto path = (std::filesystem::temp_directory_path() / "cbfp_test_block.bin").string();
    write_block_file(path, b);
    EXPECT_EQ(read_block_file(path), b);
    std::filesystem::remove(path);

    auto bytes = serialize(b);
    bytes.pop_back();
    EXPECT_THROW(deserialize(bytes), Error);
    bytes = serialize(b);
    bytes[0] = 'X';
    EXPECT_THROW(deserialize(bytes), Error);
}
