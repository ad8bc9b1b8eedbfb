#include <cmath>

#include <gtest/gtest.h>

#include "prsclt/errors.hpp"
#include "prsclt/normal.hpp"

using namespace prsclt;

TEST(Normal, CdfKnownValues) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
    EXPECT_NEAR(normal_cdf(-1.0), 0.15865525393145705, 1e-15);
    EXPECT_NEAR(normal_cdf(-8.0), 6.220960574271785e-16, 1e-28);
}

TEST(Normal, QuantileKnownValues) {
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.75), 0.6744897501960817, 1e-12);
    EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
    EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
}

TEST(Normal, QuantileInvertsCdf) {
    for (double p = 0.001; p < 1.0; p += 0.0137) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13);
}

TEST(Normal, QuantileEdges) {
    EXPECT_TRUE(std::isinf(normal_quantile(0.0)));
    EXPECT_LT(normal_quantile(0.0), 0.0);
    EXPECT_TRUE(std::isinf(normal_quantile(1.0)));
    EXPECT_THROW(normal_quantile(1.5), ArgumentError);
    EXPECT_THROW(normal_quantile(-0.1), ArgumentError);
}
