#include <set>

#include <gtest/gtest.h>

#include "prsclt/rng.hpp"

using namespace prsclt;

TEST(Rng, CounterRngIsDeterministic) {
    CounterRng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
    EXPECT_EQ(a.counter(), 100u);
}

TEST(Rng, DistinctKeysDiverge) {
    CounterRng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a() == b();
    EXPECT_EQ(same, 0);
}

TEST(Rng, DerivedSeedsAreDistinctAcrossIndexAndTag) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 200; ++r)
        for (std::uint64_t tag = 0; tag < 9; ++tag) seen.insert(derive_seed(7, r, tag));
    EXPECT_EQ(seen.size(), 200u * 9u);
    EXPECT_NE(derive_seed(7, 0, Stream::train_design), derive_seed(8, 0, Stream::train_design));
}

TEST(Rng, UniformIsInOpenUnitIntervalWithMeanHalf) {
    CounterRng rng(3);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // sd of the mean is 1/sqrt(12 n) ≈ 6.5e-4
    EXPECT_NEAR(sum / n, 0.5, 4e-3);
}
