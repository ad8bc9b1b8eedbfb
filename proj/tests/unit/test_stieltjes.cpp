#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "prsclt/errors.hpp"
#include "prsclt/spectral.hpp"
#include "prsclt/stieltjes.hpp"

using namespace prsclt;
using namespace testing_helpers;

namespace {

const std::vector<double> kLambdas{0.01, 0.1, 1, 10, 100};
const std::vector<double> kPhis{0.1, 0.5, 1, 2, 5};

std::vector<std::vector<double>> spectra() {
    std::vector<double> ones(200, 1.0);
    auto eig = [](double rho) {
        const auto cov = build_covariance(Ar1Cov{rho}, 200, FirstM{0});
        return std::vector<double>(cov.eigenvalues().data(), cov.eigenvalues().data() + 200);
    };
    std::vector<double> two_point(200, 0.5);
    for (int i = 0; i < 100; ++i) two_point[i] = 2.0;
    return {ones, eig(0.5), eig(0.9), two_point};
}

}  // namespace

TEST(Stieltjes, NoSamplingLimit) {
    const std::vector<double> s{3.0, 1.0, 0.2};
    const auto pt = solve_fixed_point(s, 0.0, 2.0);
    EXPECT_DOUBLE_EQ(pt.m_value, 0.5);
    EXPECT_DOUBLE_EQ(pt.m_prime, 0.25);
    EXPECT_DOUBLE_EQ(pt.tilting, 1.0);
}

TEST(Stieltjes, ClosedFormExamples) {
    const std::vector<double> ones(10, 1.0);
    EXPECT_NEAR(solve_fixed_point(ones, 1.0, 1.0).m_value, (std::sqrt(5.0) - 1) / 2, 1e-12);
    EXPECT_NEAR(solve_fixed_point(ones, 0.5, 0.5).m_value, std::sqrt(2.0), 1e-12);

    const auto c = closed_form_identity(1.0, 1.0);
    EXPECT_NEAR(c.m_value, 0.6180339887498949, 1e-14);
    EXPECT_NEAR(c.tilting, 1 - 4 / std::pow(std::sqrt(5.0) + 3, 2), 1e-14);
    EXPECT_NEAR(c.tilting, 0.8541019662496845, 1e-14);
    // 𝔪′ = 𝔪²/𝔯
    EXPECT_NEAR(c.m_prime, 0.4472135954999579, 1e-14);
    EXPECT_NEAR(closed_form_identity(2.0, 1.0).m_value, std::sqrt(2.0) - 1, 1e-14);
    for (double lambda : {0.1, 1.0, 7.0}) {
        const auto z = closed_form_identity(0.0, lambda);
        EXPECT_NEAR(z.m_value, 1 / lambda, 1e-14);
        EXPECT_DOUBLE_EQ(z.tilting, 1.0);
    }
}

TEST(Stieltjes, Errors) {
    const std::vector<double> s{1.0};
    EXPECT_THROW(solve_fixed_point(s, 1.0, 0.0), ArgumentError);
    EXPECT_THROW(solve_fixed_point(s, 1.0, -1.0), ArgumentError);
    EXPECT_THROW(solve_fixed_point(s, -1.0, 1.0), ArgumentError);
    try {
        solve_fixed_point(s, 1.0, 1.0, 1e-12, 1);
        FAIL();
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.residual(), 0.0);
        EXPECT_EQ(e.iterations(), 1);
    }
}

TEST(Stieltjes, FixedPointConsistencyOnGrid) {
    for (const auto& s : spectra())
        for (double lambda : kLambdas)
            for (double phi : kPhis) {
                const auto pt = solve_fixed_point(s, phi, lambda);
                double sum = 0;
                for (double v : s) sum += v / (1 + pt.m_value * v);
                const double res = std::abs(1 / pt.m_value - lambda - phi * sum / s.size());
                EXPECT_LE(res, 1e-12 * std::max(1.0, lambda)) << "phi " << phi << " lambda " << lambda;
                EXPECT_GT(pt.m_value, 0.0);
                EXPECT_GT(pt.m_prime, 0.0);
                EXPECT_GT(pt.tilting, 0.0);
                EXPECT_LE(pt.tilting, 1.0);
            }
}

TEST(Stieltjes, AgreesWithClosedFormOnGrid) {
    const std::vector<double> ones(50, 1.0);
    for (double lambda : kLambdas)
        for (double phi : kPhis) {
            const auto a = solve_fixed_point(ones, phi, lambda);
            const auto b = closed_form_identity(phi, lambda);
            EXPECT_NEAR(a.m_value, b.m_value, 1e-10);
            EXPECT_NEAR(a.tilting, b.tilting, 1e-10);
        }
}

TEST(Stieltjes, TiltingMonotoneInLambda) {
    for (const auto& s : spectra())
        for (double phi : kPhis) {
            double prev = 0.0;
            for (double lambda : kLambdas) {
                const double r = solve_fixed_point(s, phi, lambda).tilting;
                EXPECT_GE(r, prev);
                prev = r;
            }
        }
    EXPECT_GT(closed_form_identity(1.0, 1e6).tilting, 1 - 1e-5);
    EXPECT_GT(solve_fixed_point(std::vector<double>(20, 1.0), 1.0, 1e6).tilting, 1 - 1e-5);
}

TEST(Stieltjes, DerivativeMatchesFiniteDifference) {
    for (const auto& s : spectra())
        for (double lambda : kLambdas)
            for (double phi : kPhis) {
                const double h = 1e-6 * lambda;
                const double up = solve_fixed_point(s, phi, lambda + h).m_value;
                const double dn = solve_fixed_point(s, phi, lambda - h).m_value;
                const double fd = -(up - dn) / (2 * h);  // d𝔪/d(−λ)
                EXPECT_LE(rel_err(solve_fixed_point(s, phi, lambda).m_prime, fd), 1e-5);
            }
}

TEST(Stieltjes, PerturbationFactor) {
    const auto empty = build_covariance(Ar1Cov{0.5}, 30, FirstM{0});
    EXPECT_EQ(perturbation_factor(empty, solve_fixed_point(empty, 1.0, 1.0)), 0.0);

    const auto id = build_covariance(IdentityCov{}, 10, FirstM{5});
    const auto pt = solve_fixed_point(id, 1.0, 1.0);
    const double expected = 0.5 * 0.4472135954999579 / std::pow(1.6180339887498949, 2);
    EXPECT_NEAR(perturbation_factor(id, pt), expected, 1e-12);
    EXPECT_NEAR(expected, 0.0854101966, 1e-9);
    EXPECT_NEAR(perturbation_factor_identity(0.5, pt), expected, 1e-12);
    for (double mp : {0.0, 0.1, 0.5, 1.0}) {
        const int m = static_cast<int>(mp * 10);
        const auto c = build_covariance(IdentityCov{}, 10, FirstM{m});
        const auto q = solve_fixed_point(c, 0.8, 0.3);
        EXPECT_NEAR(perturbation_factor(c, q), perturbation_factor_identity(mp, q), 1e-10);
    }
}

TEST(Stieltjes, PerturbationFactorMatchesBruteForce) {
    const auto cov = build_covariance(Ar1Cov{0.7}, 80, RandomMask{25, 5});
    const auto pt = solve_fixed_point(cov, 1.3, 0.4);
    // Brute force: explicit eigen-loop with ⟨u_i, I_m u_i⟩ from the columns.
    double sum = 0.0;
    for (int i = 0; i < 80; ++i) {
        double overlap = 0.0;
        for (int k : cov.mask_index()) overlap += cov.eigenvectors()(k, i) * cov.eigenvectors()(k, i);
        const double s = cov.eigenvalues()[i];
        sum += 1.3 * pt.m_prime * s * s * s / ((1 + s * pt.m_value) * (1 + s * pt.m_value)) * overlap;
    }
    EXPECT_NEAR(perturbation_factor(cov, pt), sum / 80, 1e-12);
}
