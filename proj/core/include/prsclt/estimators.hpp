#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "prsclt/spectral.hpp"

namespace prsclt {

enum class EntryKind { gaussian, rademacher, genotype };

// Law of the standardized pre-coloring design entries.
struct EntryDist {
    EntryKind kind = EntryKind::gaussian;
    double maf = 0.0;  // genotype only

    // E(x⁴) of the standardized entry.
    double kurtosis() const;
};

std::string to_string(EntryKind kind);

struct Dataset {
    Eigen::MatrixXd design;
    std::optional<Eigen::VectorXd> response;
    EntryDist entry_dist;

    Eigen::Index n() const { return design.rows(); }
    Eigen::Index p() const { return design.cols(); }
};

struct EffectVector {
    Eigen::VectorXd beta;
    Mask causal_mask;

    // Throws ArgumentError when beta has support outside the mask.
    void validate() const;
};

enum class EstimatorKind { marginal, reference_ridge, ridge };

std::string to_string(EstimatorKind kind);

struct Estimate {
    Eigen::VectorXd beta_hat;
    EstimatorKind kind = EstimatorKind::marginal;
    double lambda = 0.0;  // unused for marginal
};

// Training summary statistic (Xᵀy, n).
struct SummaryStats {
    Eigen::VectorXd xty;
    Eigen::Index n = 0;
};

SummaryStats summarize(const Dataset& train);

// β̂ = Xᵀy/n.
Estimate fit_marginal(const Dataset& train);
// β̂ = (WᵀW + n_w λ I)^{-1} Xᵀy, by Cholesky.
Estimate fit_reference_ridge(const SummaryStats& train, const Dataset& panel, double lambda);
// β̂ = (XᵀX + n λ I)^{-1} Xᵀy, by Cholesky.
Estimate fit_ridge(const Dataset& train, double lambda);

double predict(const Estimate& est, const Eigen::VectorXd& z);

struct Accuracy {
    double value = 0.0;
    bool degenerate = false;  // ŷ = 0; value is reported as 0
};

// A = y_zᵀŷ / (‖y_z‖‖ŷ‖) with ŷ = Zβ̂.
Accuracy accuracy(const Estimate& est, const Dataset& test);
Accuracy accuracy(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted);

}  // namespace prsclt
