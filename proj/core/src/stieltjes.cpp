#include "prsclt/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prsclt/errors.hpp"
#include "prsclt/spectral.hpp"

namespace prsclt {

namespace {

struct Sums {
    double first;   // (φ/p) Σ σ/(1 + 𝔪σ)
    double second;  // (φ/p) Σ σ²/(1 + 𝔪σ)²
};

Sums spectral_sums(std::span<const double> ev, double phi, double m) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (double s : ev) {
        const double t = s / (1.0 + m * s);
        s1 += t;
        s2 += t * t;
    }
    const double scale = phi / static_cast<double>(ev.size());
    return {scale * s1, scale * s2};
}

void check_inputs(std::span<const double> ev, double phi, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ArgumentError("Stieltjes solve requires lambda > 0 (ridgeless limit unsupported)");
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw ArgumentError("aspect ratio must be nonnegative");
    if (ev.empty()) throw ArgumentError("empty spectrum");
    for (double s : ev)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("eigenvalues must be nonnegative");
}

StieltjesPoint finish_point(std::span<const double> ev, double phi, double lambda, double m, int iters) {
    StieltjesPoint pt;
    pt.lambda = lambda;
    pt.aspect_ratio = phi;
    pt.m_value = m;
    pt.iterations = iters;
    const Sums s = spectral_sums(ev, phi, m);
    pt.residual = std::abs(1.0 / m - lambda - s.first);
    // 𝔪′{1/𝔪² − (φ/p)Σσ²/(1+𝔪σ)²} = 1, so 𝔯 = 𝔪²/𝔪′ = 1 − 𝔪²·(φ/p)Σσ²/(1+𝔪σ)².
    pt.tilting = 1.0 - m * m * s.second;
    pt.m_prime = m * m / pt.tilting;
    return pt;
}

}  // namespace

double fixed_point_residual(std::span<const double> eigenvalues, double aspect_ratio, double lambda,
                            double m_value) {
    return std::abs(1.0 / m_value - lambda - spectral_sums(eigenvalues, aspect_ratio, m_value).first);
}

StieltjesPoint solve_fixed_point(std::span<const double> eigenvalues, double aspect_ratio, double lambda,
                                 double tol, int max_iter) {
    check_inputs(eigenvalues, aspect_ratio, lambda);
    if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
    if (max_iter < 1) throw ArgumentError("max_iter must be at least 1");

    if (aspect_ratio == 0.0) return finish_point(eigenvalues, 0.0, lambda, 1.0 / lambda, 0);

    const double target = tol * std::max(1.0, lambda);
    double mean = 0.0;
    for (double s : eigenvalues) mean += s;
    mean /= static_cast<double>(eigenvalues.size());

    constexpr double theta = 0.5;
    double m = 1.0 / (lambda + aspect_ratio * mean);
    double residual = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        const Sums s = spectral_sums(eigenvalues, aspect_ratio, m);
        residual = std::abs(1.0 / m - lambda - s.first);
        if (residual <= target) break;
        m = (1.0 - theta) * m + theta / (lambda + s.first);
    }
    if (residual > target)
        throw ConvergenceError("Stieltjes fixed point did not converge (residual " + std::to_string(residual) +
                                   ")",
                               residual, it);

    // Newton polish: g(𝔪) = 1/𝔪 − λ − S₁(𝔪) has g′ = −1/𝔪′. Keep a step only
    // when it lowers the residual.
    for (int k = 0; k < 3; ++k) {
        const Sums s = spectral_sums(eigenvalues, aspect_ratio, m);
        const double g = 1.0 / m - lambda - s.first;
        const double m_prime = 1.0 / (1.0 / (m * m) - s.second);
        const double next = m + g * m_prime;
        if (!(next > 0.0)) break;
        const double r_next = fixed_point_residual(eigenvalues, aspect_ratio, lambda, next);
        if (!(r_next < std::abs(g))) break;
        m = next;
    }
    return finish_point(eigenvalues, aspect_ratio, lambda, m, it);
}

StieltjesPoint solve_fixed_point(const CovarianceModel& cov, double aspect_ratio, double lambda, double tol,
                                 int max_iter) {
    const Eigen::VectorXd& ev = cov.eigenvalues();
    return solve_fixed_point(std::span<const double>(ev.data(), ev.size()), aspect_ratio, lambda, tol, max_iter);
}

StieltjesPoint closed_form_identity(double aspect_ratio, double lambda) {
    if (!(lambda > 0.0)) throw ArgumentError("closed form requires lambda > 0");
    if (!(aspect_ratio >= 0.0)) throw ArgumentError("aspect ratio must be nonnegative");
    const double b = lambda + aspect_ratio - 1.0;
    const double root = std::sqrt(b * b + 4.0 * lambda);
    StieltjesPoint pt;
    pt.lambda = lambda;
    pt.aspect_ratio = aspect_ratio;
    // Rationalized branch avoids cancellation when b > 0.
    pt.m_value = b > 0.0 ? 2.0 / (root + b) : (root - b) / (2.0 * lambda);
    const double denom = root + lambda + aspect_ratio + 1.0;
    pt.tilting = 1.0 - 4.0 * aspect_ratio / (denom * denom);
    pt.m_prime = pt.m_value * pt.m_value / pt.tilting;
    const double m = pt.m_value;
    pt.residual = std::abs(1.0 / m - lambda - aspect_ratio / (1.0 + m));
    return pt;
}

double perturbation_factor(const CovarianceModel& cov, const StieltjesPoint& point) {
    const Eigen::ArrayXd s = cov.eigenvalues().array();
    const Eigen::ArrayXd o = cov.overlaps().array();
    const Eigen::ArrayXd d = 1.0 + s * point.m_value;
    const double sum = (s.cube() / d.square() * o).sum();
    return point.aspect_ratio * point.m_prime * sum / cov.dim();
}

double perturbation_factor_identity(double m_over_p, const StieltjesPoint& point) {
    const double d = 1.0 + point.m_value;
    return m_over_p * point.aspect_ratio * point.m_prime / (d * d);
}

}  // namespace prsclt
