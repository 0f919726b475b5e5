#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cbfp/ieee_fields.hpp"
#include "oracles.hpp"

using namespace cbfp;

TEST(Split, One) {
    const auto f = split(1.0, kSingle);
    EXPECT_EQ(f.sign, 0u);
    EXPECT_EQ(f.exponent, 127u);
    EXPECT_EQ(f.mantissa, 0u);
}

TEST(Split, MinusOnePointFiveMatchesHostPattern) {
    const auto f = split(-1.5, kSingle);
    const std::uint32_t u = oracle::float_bits(-1.5f);
    EXPECT_EQ(f.sign, u >> 31);
    EXPECT_EQ(f.exponent, (u >> 23) & 0xffu);
    EXPECT_EQ(f.mantissa, u & 0x7fffffu);
    EXPECT_EQ(f.mantissa, 1u << 22);
}

TEST(Split, TinyPowerOfTwoMatchesHostPattern) {
    const double x = std::ldexp(1.0, -27);
    const auto f = split(x, kSingle);
    const std::uint32_t u = oracle::float_bits(static_cast<float>(x));
    EXPECT_EQ(f.exponent, (u >> 23) & 0xffu);
    EXPECT_EQ(f.exponent, 100u);
    EXPECT_EQ(f.mantissa, 0u);
    EXPECT_EQ(f.sign, 0u);
}

TEST(Split, RejectsNonFiniteAndDenormal) {
    EXPECT_THROW(split(NAN, kSingle), Error);
    EXPECT_THROW(split(INFINITY, kSingle), Error);
    EXPECT_THROW(split(std::ldexp(1.0, -130), kSingle), Error);
    EXPECT_THROW(split(1.0 + std::ldexp(1.0, -30), kSingle), Error);
    try {
        split(NAN, kHalf);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), errc::unsupported_value);
    }
}

TEST(Split, NegativeZeroIsAllZeroRecord) {
    const auto f = split(-0.0, kSingle);
    EXPECT_TRUE(f.is_zero());
    EXPECT_EQ(f.sign, 0u);
}

TEST(Assemble, Examples) {
    EXPECT_EQ(assemble({0, 127, 0, kSingle}), 1.0);
    EXPECT_EQ(assemble({1, 130, 0, kSingle}), -std::pow(2.0, 130 - 127));
    EXPECT_EQ(assemble({0, 0, 0, kSingle}), 0.0);
}

TEST(SplitBits, FuzzClassificationAgreesWithHost) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1'000'000; ++i) {
        const auto u = static_cast<std::uint32_t>(rng());
        const auto want = oracle::classify_host(u);
        const auto got = classify_bits(u, kSingle);
        ASSERT_EQ(static_cast<int>(got), static_cast<int>(want)) << std::hex << u;
        if (want == oracle::Kind::Normal || want == oracle::Kind::Zero) {
            const auto f = split_bits(u, kSingle);
            ASSERT_EQ(assemble(f), static_cast<double>(oracle::float_from_bits(u)));
        } else {
            ASSERT_THROW(split_bits(u, kSingle), Error);
        }
    }
}

TEST(SplitBits, HalfValuesMatchExponentiation) {
    for (std::uint32_t u = 0; u < 0x10000; ++u) {
        if (classify_bits(u, kHalf) != FloatClass::Normal) continue;
        const auto f = split_bits(u, kHalf);
        ASSERT_EQ(assemble(f), oracle::half_value(static_cast<std::uint16_t>(u)));
        ASSERT_EQ(to_bits(f), u);
    }
}

class RoundTrip : public ::testing::TestWithParam<FloatFormat> {};

TEST_P(RoundTrip, RandomNormalPatterns) {
    const FloatFormat fmt = GetParam();
    std::mt19937_64 rng(7);
    const std::uint64_t mmask = (std::uint64_t{1} << fmt.mantissa_width) - 1;
    for (int i = 0; i < 200'000; ++i) {
        const unsigned e = 1 + static_cast<unsigned>(rng() % static_cast<std::uint64_t>(fmt.max_biased_exponent()));
        const ScalarFields f{static_cast<unsigned>(rng() & 1), e, rng() & mmask, fmt};
        const double x = assemble(f);
        ASSERT_EQ(split(x, fmt), f);
        ASSERT_EQ(assemble(split(x, fmt)), x);
        ASSERT_EQ(split_bits(to_bits(f), fmt), f);
    }
}

INSTANTIATE_TEST_SUITE_P(Formats, RoundTrip, ::testing::Values(kHalf, kSingle, kDouble),
                         [](const auto& info) { return std::string(format_name(info.param)); });

TEST(TruncateTo, AgreesWithOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const FloatFormat fmt : {kHalf, kSingle}) {
        for (int i = 0; i < 100'000; ++i) {
            const double x = std::ldexp(u(rng), static_cast<int>(rng() % 20) - 10);
            ASSERT_EQ(truncate_to(x, fmt), oracle::truncate(x, static_cast<int>(fmt.mantissa_width),
                                                            static_cast<int>(fmt.bias)));
        }
    }
    EXPECT_THROW(truncate_to(1e6, kHalf), Error);
    EXPECT_EQ(truncate_to(1e-6, kHalf), 0.0);
    EXPECT_EQ(truncate_to(static_cast<double>(1.0f / 3.0f) + 1e-12, kSingle), static_cast<double>(1.0f / 3.0f));
}

TEST(FloatFormat, Names) {
    EXPECT_EQ(format_from_name("half"), kHalf);
    EXPECT_EQ(format_from_name("double"), kDouble);
    EXPECT_THROW(format_from_name("quad"), Error);
    EXPECT_EQ(kSingle.max_biased_exponent(), 254);
}
