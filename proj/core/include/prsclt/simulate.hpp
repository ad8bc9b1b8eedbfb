#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "prsclt/asymptotics.hpp"
#include "prsclt/estimators.hpp"
#include "prsclt/spectral.hpp"

namespace prsclt {

enum class EffectDist { gaussian, two_point };

enum class Target {
    individual,      // zᵀβ̂ with (z, β) held fixed
    accuracy,        // A(β̂) on a fresh testing cohort
    quadratic_form,  // βᵀΣβ with β redrawn
};

enum class TestPoint {
    random,  // one row drawn from the testing design law
    basis,   // unit vector e_k
};

struct SimConfig {
    CovSpec cov_spec = IdentityCov{};
    MaskSpec mask_spec = FirstM{0};
    PopulationParams params;
    EntryDist entry_dist;
    EffectDist effect_dist = EffectDist::gaussian;
    long replications = 1;
    std::uint64_t master_seed = 0;
    EstimatorKind estimator = EstimatorKind::marginal;
    bool use_optimal_lambda = false;  // ridge only: fit and evaluate at λ*
    Target target = Target::accuracy;
    TestPoint test_point = TestPoint::random;
    long test_point_index = 0;
    // Unset: β fixed for individual targets, redrawn otherwise.
    std::optional<bool> redraw_beta;
    bool freeze_panel = false;  // hold the reference panel fixed across replications
    int workers = 0;            // 0 picks the hardware concurrency

    bool beta_redrawn() const { return redraw_beta.value_or(target != Target::individual); }
    void validate() const;
};

struct ReplicationBatch {
    std::vector<double> raw;
    std::vector<double> standardized;  // empty when the limit is degenerate
    std::vector<std::uint64_t> seeds;
    std::vector<bool> flags;  // degenerate replication (ŷ = 0)
    GaussianLimit limit;
    // Accuracy target only: per-replication naive law treating β̂ as fixed.
    std::vector<double> naive_center;
    std::vector<double> naive_sd;
    // Batch-level fixed draws (individual target).
    Eigen::VectorXd test_point;
    Eigen::VectorXd beta;
};

// Seed reported for replication r.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);
// Index used for draws shared by the whole batch.
inline constexpr std::uint64_t kBatchIndex = ~std::uint64_t{0};

EffectVector gen_effects(const CovarianceModel& cov, const PopulationParams& params, EffectDist dist,
                         std::uint64_t seed);
// Standardized i.i.d. entries, before coloring.
Eigen::MatrixXd gen_raw_entries(Eigen::Index n, Eigen::Index p, const EntryDist& dist, std::uint64_t seed);
// X = X₀Σ^{1/2} with the symmetric square root.
Dataset gen_dataset(const CovarianceModel& cov, Eigen::Index n, const EntryDist& dist, std::uint64_t seed);
Eigen::VectorXd gen_response(const Dataset& design, const EffectVector& beta, double sigma_eps2, std::uint64_t seed);

CovarianceModel build_covariance(const SimConfig& config);

// Params with the kurtoses implied by the entry and effect laws.
PopulationParams effective_params(const SimConfig& config);

// Draws shared by every replication of a batch.
struct FixedDraws {
    Eigen::VectorXd z;  // test point on the colored scale
    EffectVector beta;
};
FixedDraws fixed_draws(const SimConfig& config, const CovarianceModel& cov);

// Analytic law for the configured estimator and target, conditional on the
// fixed draws for individual targets.
GaussianLimit analytic_limit(const SimConfig& config, const CovarianceModel& cov, const FixedDraws& draws);

// Replications run concurrently; results are stored by index, so the batch
// depends only on the config. A failing replication aborts the batch with a
// ReplicationError carrying its index and seed.
ReplicationBatch run_batch(const SimConfig& config);
ReplicationBatch run_batch(const SimConfig& config, const CovarianceModel& cov);

// Columns: index, seed, raw, standardized, flags. 17 significant digits.
void write_batch_csv(std::ostream& out, const ReplicationBatch& batch);

}  // namespace prsclt
