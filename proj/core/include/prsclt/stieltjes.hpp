#pragma once

#include <span>

namespace prsclt {

class CovarianceModel;

// Companion Stieltjes transform of the sample covariance spectrum at −λ.
struct StieltjesPoint {
    double lambda = 0.0;
    double aspect_ratio = 0.0;
    double m_value = 0.0;
    double m_prime = 0.0;
    double tilting = 1.0;  // 𝔪²/𝔪′
    double residual = 0.0;
    int iterations = 0;
};

// |1/𝔪 − λ − (φ/p) Σ σ_k/(1 + 𝔪σ_k)|.
double fixed_point_residual(std::span<const double> eigenvalues, double aspect_ratio, double lambda,
                            double m_value);

// Damped fixed-point iteration followed by Newton polishing. Convergence is
// declared when the residual is at most tol·max(1, λ), since 1/𝔪 ≥ λ limits
// the attainable absolute resolution. 𝔪′ comes from the derivative identity.
StieltjesPoint solve_fixed_point(std::span<const double> eigenvalues, double aspect_ratio, double lambda,
                                 double tol = 1e-12, int max_iter = 10000);
StieltjesPoint solve_fixed_point(const CovarianceModel& cov, double aspect_ratio, double lambda,
                                 double tol = 1e-12, int max_iter = 10000);

// Σ = I closed forms.
StieltjesPoint closed_form_identity(double aspect_ratio, double lambda);

// 𝔫(Σ, m) = (1/p) Σ_i φ 𝔪′ σ_i³/(1 + σ_i𝔪)² ⟨u_i, I_m u_i⟩ with φ the
// point's aspect ratio.
double perturbation_factor(const CovarianceModel& cov, const StieltjesPoint& point);
// Σ = I closed form (m/p) φ 𝔪′/(1 + 𝔪)².
double perturbation_factor_identity(double m_over_p, const StieltjesPoint& point);

}  // namespace prsclt
