#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "prsclt/errors.hpp"
#include "prsclt/rng.hpp"
#include "prsclt/simulate.hpp"
#include "prsclt/stats.hpp"

using namespace prsclt;
using namespace testing_helpers;

namespace {

SimConfig individual_config(long n, long p, long reps) {
    SimConfig c;
    c.params.n = n;
    c.params.p = p;
    c.params.m = p;
    c.params.n_z = 1;
    c.mask_spec = FirstM{static_cast<int>(p)};
    c.replications = reps;
    c.master_seed = 42;
    c.target = Target::individual;
    c.workers = 1;
    return c;
}

double column_mean(const Eigen::MatrixXd& x, int j) { return x.col(j).mean(); }

}  // namespace

TEST(Simulate, EffectsMaskAndTwoPoint) {
    PopulationParams pp;
    pp.p = 4;
    pp.m = 0;
    const auto none = gen_effects(CovarianceModel::identity(4, first_mask(4, 0)), pp, EffectDist::gaussian, 1);
    EXPECT_EQ(none.beta, Eigen::VectorXd::Zero(4));

    pp.m = 4;
    pp.sigma_beta2 = 4.0;
    const auto two = gen_effects(CovarianceModel::identity(4, first_mask(4, 4)), pp, EffectDist::two_point, 2);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(std::abs(two.beta[i]), 1.0);

    pp.p = 10;
    pp.m = 6;
    const auto part = gen_effects(CovarianceModel::identity(10, first_mask(10, 6)), pp, EffectDist::gaussian, 3);
    EXPECT_NO_THROW(part.validate());
    for (int i = 6; i < 10; ++i) EXPECT_EQ(part.beta[i], 0.0);
}

TEST(Simulate, EffectMoments) {
    const int p = 1000, draws = 100;
    PopulationParams pp;
    pp.p = p;
    pp.m = p;
    pp.sigma_beta2 = 2.0;
    const auto cov = CovarianceModel::identity(p, first_mask(p, p));
    double second = 0, fourth = 0;
    for (int k = 0; k < draws; ++k) {
        const auto b = gen_effects(cov, pp, EffectDist::gaussian, 100 + k);
        second += b.beta.squaredNorm();
        fourth += b.beta.array().pow(4).sum();
    }
    const double total = double(p) * draws;
    EXPECT_LE(rel_err(second / total, 2.0 / p), 0.02);
    EXPECT_LE(rel_err(fourth / total, 3 * 4.0 / (double(p) * p)), 0.05);
}

TEST(Simulate, RawEntries) {
    const auto rad = gen_raw_entries(50, 40, EntryDist{EntryKind::rademacher}, 5);
    for (Eigen::Index i = 0; i < rad.size(); ++i) EXPECT_EQ(std::abs(rad.data()[i]), 1.0);

    const auto a = gen_raw_entries(20, 10, EntryDist{}, 6);
    EXPECT_EQ(a, gen_raw_entries(20, 10, EntryDist{}, 6));
    EXPECT_NE(a, gen_raw_entries(20, 10, EntryDist{}, 7));
}

TEST(Simulate, GenotypeStandardization) {
    const int n = 10000;
    const double maf = 0.2;
    const auto g = gen_raw_entries(n, 5, EntryDist{EntryKind::genotype, maf}, 8);
    const double sd = std::sqrt(2 * maf * (1 - maf));
    std::set<double> levels;
    for (Eigen::Index i = 0; i < g.size(); ++i) levels.insert(std::round(g.data()[i] * sd + 2 * maf));
    EXPECT_LE(levels.size(), 3u);
    for (int j = 0; j < 5; ++j) {
        const double mean = column_mean(g, j);
        const double var = (g.col(j).array() - mean).square().sum() / (n - 1);
        EXPECT_LE(std::abs(mean), 4 / std::sqrt(double(n)));
        EXPECT_LE(std::abs(var - 1), 4 / std::sqrt(double(n)));
    }
}

TEST(Simulate, DatasetColoring) {
    const auto id = CovarianceModel::identity(6, first_mask(6, 6));
    EXPECT_EQ(gen_dataset(id, 30, EntryDist{}, 9).design, gen_raw_entries(30, 6, EntryDist{}, 9));

    const auto cov = CovarianceModel::from_matrix(ar1_matrix(2, 0.5), first_mask(2, 2));
    const auto d = gen_dataset(cov, 10000, EntryDist{}, 10);
    const Eigen::MatrixXd s = d.design.transpose() * d.design / 10000.0;
    EXPECT_NEAR(s(0, 0), 1.0, 0.05);
    EXPECT_NEAR(s(1, 1), 1.0, 0.05);
    EXPECT_NEAR(s(0, 1), 0.5, 0.05);
}

TEST(Simulate, Response) {
    Dataset one;
    one.design = Eigen::MatrixXd(1, 2);
    one.design << 1, 0;
    const EffectVector b{Eigen::Vector2d(3, 0), {true, true}};
    const auto exact = gen_response(one, b, 0.0, 11);
    EXPECT_EQ(exact[0], 3.0);
    const auto noisy = gen_response(one, b, 1.0, 11);
    const double eps = noisy[0] - 3.0;
    EXPECT_NE(eps, 0.0);
    EXPECT_EQ(gen_response(one, b, 4.0, 11)[0], 3.0 + 2 * eps);

    Dataset big;
    big.design = Eigen::MatrixXd::Zero(100000, 1);
    const EffectVector zero{Eigen::VectorXd::Zero(1), {true}};
    const auto y = gen_response(big, zero, 2.5, 12);
    const double var = (y.array() - y.mean()).square().sum() / (y.size() - 1);
    EXPECT_LE(rel_err(var, 2.5), 0.02);
}

TEST(Simulate, SingleReplicationIsExact) {
    auto c = individual_config(30, 10, 1);
    c.params.sigma_eps2 = 0.0;
    const auto batch = run_batch(c);
    ASSERT_EQ(batch.raw.size(), 1u);
    const Eigen::MatrixXd x = gen_raw_entries(30, 10, EntryDist{}, derive_seed(42, 0, Stream::train_design));
    const double expected = batch.test_point.dot(x.transpose() * (x * batch.beta)) / 30.0;
    EXPECT_NEAR(batch.raw[0], expected, 1e-12 * std::max(1.0, std::abs(expected)));
    EXPECT_EQ(batch.raw, run_batch(c).raw);
    EXPECT_EQ(batch.seeds[0], replication_seed(42, 0));
}

// Batches fit on raw entries through Σ^{-1/2}; the reference route colors explicitly.
TEST(Simulate, WhitenedRidgeFitsMatchColoredFits) {
    for (auto est : {EstimatorKind::reference_ridge, EstimatorKind::ridge})
        for (bool frozen : {false, true}) {
            if (frozen && est == EstimatorKind::ridge) continue;
            auto c = individual_config(40, 12, 2);
            c.cov_spec = Ar1Cov{0.5};
            c.params.n_w = 30;
            c.params.lambda = 0.3;
            c.estimator = est;
            c.freeze_panel = frozen;
            const auto cov = build_covariance(c);
            const auto batch = run_batch(c, cov);
            for (std::uint64_t r = 0; r < 2; ++r) {
                Dataset train;
                train.design = gen_raw_entries(40, 12, EntryDist{}, derive_seed(42, r, Stream::train_design)) *
                               cov.sqrt_matrix();
                EffectVector b{batch.beta, cov.causal_mask()};
                train.response = gen_response(train, b, c.params.noise_variance(cov.masked_power_diagonal(1).mean()),
                                              derive_seed(42, r, Stream::train_noise));
                Estimate fit;
                if (est == EstimatorKind::ridge) {
                    fit = fit_ridge(train, 0.3);
                } else {
                    Dataset panel;
                    const std::uint64_t idx = frozen ? kBatchIndex : r;
                    panel.design = gen_raw_entries(30, 12, EntryDist{}, derive_seed(42, idx, Stream::panel_design)) *
                                   cov.sqrt_matrix();
                    fit = fit_reference_ridge(summarize(train), panel, 0.3);
                }
                const double expected = predict(fit, batch.test_point);
                EXPECT_NEAR(batch.raw[r], expected, 1e-10 * std::max(1.0, std::abs(expected)))
                    << to_string(est) << (frozen ? " frozen" : "") << " r=" << r;
            }
        }
}

TEST(Simulate, DeterministicAcrossWorkers) {
    for (auto est : {EstimatorKind::marginal, EstimatorKind::reference_ridge, EstimatorKind::ridge}) {
        SimConfig c;
        c.cov_spec = Ar1Cov{0.4};
        c.params.n = 60;
        c.params.n_z = 30;
        c.params.n_w = 50;
        c.params.p = 20;
        c.params.m = 10;
        c.mask_spec = FirstM{10};
        c.estimator = est;
        c.replications = 12;
        c.master_seed = 7;
        c.workers = 1;
        const auto serial = run_batch(c);
        c.workers = 4;
        const auto parallel = run_batch(c);
        EXPECT_EQ(serial.raw, parallel.raw);
        EXPECT_EQ(serial.standardized, parallel.standardized);
        EXPECT_EQ(serial.naive_center, parallel.naive_center);
        c.master_seed = 8;
        EXPECT_NE(serial.raw, run_batch(c).raw);
    }
}

TEST(Simulate, StandardizedMeanNearZero) {
    const auto c = individual_config(2000, 500, 500);
    const auto batch = run_batch(c);
    ASSERT_EQ(batch.standardized.size(), 500u);
    EXPECT_LE(std::abs(sample_mean(batch.standardized)), 3 / std::sqrt(500.0));
    for (std::size_t r = 0; r < 500; ++r)
        EXPECT_NEAR(batch.standardized[r], (batch.raw[r] - batch.limit.center) / batch.limit.sd, 1e-12);
}

TEST(Simulate, DegenerateLimitLeavesStandardizedEmpty) {
    SimConfig c;
    c.params.n = 40;
    c.params.n_z = 20;
    c.params.p = 10;
    c.params.m = 0;
    c.mask_spec = FirstM{0};
    c.params.h2_beta = 0.0;
    c.params.h2_beta_z = 0.0;
    c.params.sigma_eps2 = 1.0;
    c.params.sigma_eps_z2 = 1.0;
    c.replications = 3;
    const auto batch = run_batch(c);
    EXPECT_TRUE(batch.limit.degenerate);
    EXPECT_TRUE(batch.standardized.empty());
    EXPECT_EQ(batch.raw.size(), 3u);
}

TEST(Simulate, ConfigValidation) {
    auto c = individual_config(20, 10, 1);
    c.replications = 0;
    EXPECT_THROW(c.validate(), ArgumentError);
    c = individual_config(20, 10, 1);
    c.estimator = EstimatorKind::ridge;
    c.entry_dist = EntryDist{EntryKind::rademacher};
    EXPECT_THROW(c.validate(), ArgumentError);
    c = individual_config(20, 10, 1);
    c.estimator = EstimatorKind::reference_ridge;
    c.params.n_w = 0;
    EXPECT_THROW(c.validate(), ArgumentError);
    c = individual_config(20, 10, 1);
    c.test_point = TestPoint::basis;
    c.test_point_index = 10;
    EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Simulate, BatchCsv) {
    auto c = individual_config(30, 10, 3);
    const auto batch = run_batch(c);
    std::ostringstream a, b;
    write_batch_csv(a, batch);
    write_batch_csv(b, run_batch(c));
    EXPECT_EQ(a.str(), b.str());
    std::istringstream lines(a.str());
    std::string line;
    int count = 0;
    std::getline(lines, line);
    EXPECT_EQ(line, "index,seed,raw,standardized,flags");
    while (std::getline(lines, line)) ++count;
    EXPECT_EQ(count, 3);
}
