#include <random>

#include <gtest/gtest.h>

#include "qber/core.hpp"

using namespace qber;

TEST(RatingToWeight, DefaultMapping) {
    EXPECT_DOUBLE_EQ(rating_to_weight(Rating::High).value(), 8.0);
    EXPECT_DOUBLE_EQ(rating_to_weight(Rating::Medium).value(), 5.0);
    EXPECT_DOUBLE_EQ(rating_to_weight(Rating::Low).value(), 2.5);
}

TEST(RatingToWeight, CustomMappingAtScaleBoundary) {
    const RatingMapping m{0.0, 5.0, 10.0};
    EXPECT_NO_THROW(m.validate());
    EXPECT_EQ(rating_to_weight(Rating::Low, m).value(), 0.0);
    EXPECT_EQ(rating_to_weight(Rating::High, m).value(), 10.0);
}

TEST(RatingToWeight, NonIncreasingMappingRejected) {
    EXPECT_THROW((RatingMapping{5.0, 5.0, 8.0}.validate()), Error);
    EXPECT_THROW((RatingMapping{2.0, 5.0, 11.0}.validate()), Error);
}

TEST(Normalize, Examples) {
    EXPECT_EQ(normalize(Weight(10.0)).value(), 1.0);
    EXPECT_EQ(normalize(Weight(0.0)).value(), 0.0);
    EXPECT_DOUBLE_EQ(normalize(Weight(8.0)).value(), 0.8);
}

TEST(Normalize, OutOfRangeRejectedAtConstruction) {
    EXPECT_THROW(Weight(10.5), Error);
    EXPECT_THROW(Weight(-0.1), Error);
    EXPECT_THROW(Weight(std::nan("")), Error);
    EXPECT_THROW(UnitFraction(1.01), Error);
    try {
        Weight(11.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OutOfRange);
    }
}

TEST(Normalize, MonotoneAndOrderPreservingForRandomMappings) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        EXPECT_LE(normalize(Weight(a)).value(), normalize(Weight(b)).value());
        EXPECT_DOUBLE_EQ(normalize(Weight(a)).value() * 10.0, a);

        double xs[3] = {u(rng), u(rng), u(rng)};
        std::sort(std::begin(xs), std::end(xs));
        if (!(xs[0] < xs[1] && xs[1] < xs[2])) continue;
        const RatingMapping m{xs[0], xs[1], xs[2]};
        ASSERT_NO_THROW(m.validate());
        EXPECT_LT(normalize(rating_to_weight(Rating::Low, m)).value(),
                  normalize(rating_to_weight(Rating::Medium, m)).value());
        EXPECT_LT(normalize(rating_to_weight(Rating::Medium, m)).value(),
                  normalize(rating_to_weight(Rating::High, m)).value());
    }
}

TEST(Money, CurrencyMismatchIsHardError) {
    const Money usd(10.0, "USD"), inr(10.0, "INR");
    EXPECT_DOUBLE_EQ((usd + usd).amount(), 20.0);
    try {
        (void)(usd + inr);
        FAIL() << "expected CurrencyMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::CurrencyMismatch);
    }
}

TEST(Money, RejectsNegativeAndBadCurrency) {
    EXPECT_THROW(Money(-1.0, "USD"), Error);
    EXPECT_THROW(Money(1.0, "US"), Error);
    EXPECT_THROW(Money(std::numeric_limits<double>::infinity(), "USD"), Error);
}

TEST(Enums, StringRoundTrip) {
    for (auto m : kAllMaturityLevels) EXPECT_EQ(parse_maturity(to_string(m)), m);
    for (auto r : kAllRatings) EXPECT_EQ(parse_rating(to_string(r)), r);
    EXPECT_THROW(parse_maturity("expert"), Error);
    EXPECT_THROW(parse_rating("HIGH"), Error);
}

TEST(SizeBand, TenMillionIsMedium) {
    EXPECT_EQ(size_band(Money(10'000'000.0, "USD")), "medium");
    EXPECT_EQ(size_band(Money(4'999'999.0, "USD")), "small");
    EXPECT_EQ(size_band(Money(100'000'000.0, "USD")), "large");
}
