#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "prsclt/estimators.hpp"
#include "prsclt/spectral.hpp"
#include "prsclt/stieltjes.hpp"

namespace prsclt {

struct PopulationParams {
    long n = 0;
    long n_z = 0;
    long n_w = 0;  // 0 when no reference panel is involved
    long p = 0;
    long m = 0;
    double h2_beta = 0.5;
    double h2_beta_z = 0.5;
    double sigma_beta2 = 1.0;
    double entry_kurtosis = 3.0;   // E(x₀⁴) of the standardized entry law
    double effect_kurtosis = 3.0;  // κ_β = p² E(β⁴)/σ_β⁴
    double lambda = 1.0;
    // Explicit noise variances; when unset they follow σ_β² γ₁ (1 − h²)/h².
    std::optional<double> sigma_eps2;
    std::optional<double> sigma_eps_z2;

    double phi_n() const { return static_cast<double>(p) / static_cast<double>(n); }
    double phi_w() const { return static_cast<double>(p) / static_cast<double>(n_w); }
    double phi_d() const { return static_cast<double>(n) / static_cast<double>(n_w); }
    // λ* = φ_n (1 − h_β²)/h_β².
    double optimal_lambda() const;
    double noise_variance(double gamma1) const;
    double test_noise_variance(double gamma1) const;
    // E(β⁴) for a nonzero entry.
    double effect_fourth_moment() const;

    // Throws ArgumentError on out-of-range fields.
    void validate() const;
    // Also checks dimension and mask size against the covariance model.
    void validate(const CovarianceModel& cov) const;
};

struct GaussianLimit {
    double center = 0.0;
    double sd = 0.0;  // standard deviation of the raw statistic
    std::string scaling;
    std::optional<double> eta;
    std::string rate_tag;
    bool degenerate = false;
    std::map<std::string, double> diagnostics;
};

// Individual level, conditional on (z, β).
GaussianLimit marginal_individual(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta,
                                  const PopulationParams& params);
GaussianLimit marginal_individual_identity(const Eigen::VectorXd& z, const EffectVector& beta,
                                           const PopulationParams& params);

GaussianLimit quadratic_form(const CovarianceModel& cov, const PopulationParams& params);

// Cohort level. homogeneous_ld substitutes γ_i = (m/p) ω_i.
GaussianLimit marginal_accuracy(const CovarianceModel& cov, const PopulationParams& params,
                                bool homogeneous_ld = false);
GaussianLimit marginal_accuracy_identity(const PopulationParams& params);

// point solved at φ_w = p/n_w and params.lambda.
GaussianLimit reference_individual(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta,
                                   const PopulationParams& params, const StieltjesPoint& point);
GaussianLimit reference_individual_identity(const Eigen::VectorXd& z, const EffectVector& beta,
                                            const PopulationParams& params, const StieltjesPoint& point);
GaussianLimit reference_accuracy(const CovarianceModel& cov, const PopulationParams& params,
                                 const StieltjesPoint& point);
GaussianLimit reference_accuracy_identity(const PopulationParams& params, const StieltjesPoint& point);

// Gaussian-data ridge. point_n solved at φ_n; with use_optimal_lambda the
// penalty is replaced by λ* and the point re-solved when its λ differs.
GaussianLimit ridge_individual(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta,
                               const PopulationParams& params, const StieltjesPoint& point_n,
                               bool use_optimal_lambda = false);
GaussianLimit ridge_individual_identity(const Eigen::VectorXd& z, const EffectVector& beta,
                                        const PopulationParams& params, const StieltjesPoint& point_n,
                                        bool use_optimal_lambda = false);
GaussianLimit ridge_accuracy(const CovarianceModel& cov, const PopulationParams& params,
                             const StieltjesPoint& point_n, bool use_optimal_lambda = false);
GaussianLimit ridge_accuracy_identity(const PopulationParams& params, const StieltjesPoint& point_n,
                                      bool use_optimal_lambda = false);

// Realized quantities of one replication, β̂ treated as fixed.
struct NaiveInputs {
    Eigen::VectorXd z_beta;  // Zβ
    Eigen::VectorXd y_hat;   // Zβ̂
    Eigen::VectorXd beta;
};

GaussianLimit naive_accuracy(const NaiveInputs& realized, const CovarianceModel& cov,
                             const PopulationParams& params);

// center ± Φ^{-1}(1 − (1 − level)/2) · sd.
std::pair<double, double> confidence_interval(const GaussianLimit& limit, double level);

}  // namespace prsclt
