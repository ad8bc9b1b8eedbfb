#include "prsclt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prsclt/errors.hpp"
#include "prsclt/normal.hpp"

namespace prsclt {

namespace {

constexpr const char* kSqrtN = "sqrt(n)";
constexpr const char* kSqrtP = "sqrt(p)";
constexpr const char* kSqrtEtaNz = "sqrt(eta*n_z)";

GaussianLimit degenerate_limit(const char* scaling, const char* rate, double center = 0.0) {
    GaussianLimit g;
    g.center = center;
    g.sd = 0.0;
    g.scaling = scaling;
    g.rate_tag = rate;
    g.degenerate = true;
    return g;
}

GaussianLimit individual_limit(double center, double var, long n, const char* rate) {
    if (!(var > 0.0) || !std::isfinite(var)) return degenerate_limit(kSqrtN, rate, center);
    GaussianLimit g;
    g.center = center;
    g.sd = std::sqrt(var / static_cast<double>(n));
    g.scaling = kSqrtN;
    g.rate_tag = rate;
    return g;
}

GaussianLimit accuracy_limit(double center, double eta, long n_z, const char* rate) {
    if (!(eta > 0.0) || !std::isfinite(eta) || !std::isfinite(center))
        return degenerate_limit(kSqrtEtaNz, rate, std::isfinite(center) ? center : 0.0);
    GaussianLimit g;
    g.center = center;
    g.eta = eta;
    g.sd = 1.0 / std::sqrt(eta * static_cast<double>(n_z));
    g.scaling = kSqrtEtaNz;
    g.rate_tag = rate;
    return g;
}

void check_vectors(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta) {
    if (z.size() != cov.dim() || beta.beta.size() != cov.dim())
        throw ArgumentError("test point or effect vector dimension differs from p");
}

void check_vectors(long p, const Eigen::VectorXd& z, const EffectVector& beta) {
    if (z.size() != p || beta.beta.size() != p)
        throw ArgumentError("test point or effect vector dimension differs from p");
}

double gamma1(const CovarianceModel& cov) { return cov.masked_power_diagonal(1).sum() / cov.dim(); }

double mask_ratio(const PopulationParams& params) {
    return static_cast<double>(params.m) / static_cast<double>(params.p);
}

// Sum of squared entries of Σ restricted to the mask block.
double masked_frobenius(const CovarianceModel& cov) {
    if (cov.is_identity()) return static_cast<double>(cov.mask_size());
    double total = 0.0;
    const auto& idx = cov.mask_index();
    for (int j : idx)
        for (int i : idx) total += cov.matrix()(i, j) * cov.matrix()(i, j);
    return total;
}

// Stieltjes point for the ridge formulas, re-solved at λ* when requested.
StieltjesPoint ridge_point(const CovarianceModel* cov, const PopulationParams& params, const StieltjesPoint& given,
                           bool use_optimal_lambda) {
    const double lambda = use_optimal_lambda ? params.optimal_lambda() : params.lambda;
    if (!(lambda > 0.0)) throw ArgumentError("ridge penalty must be positive");
    if (std::abs(given.aspect_ratio - params.phi_n()) > 1e-12 * std::max(1.0, params.phi_n()))
        throw ArgumentError("ridge formulas need the Stieltjes point at aspect ratio p/n");
    if (std::abs(given.lambda - lambda) <= 1e-14 * lambda) return given;
    if (cov == nullptr) return closed_form_identity(params.phi_n(), lambda);
    return solve_fixed_point(*cov, params.phi_n(), lambda);
}

void check_reference_point(const PopulationParams& params, const StieltjesPoint& point) {
    if (params.n_w < 1) throw ArgumentError("reference-panel formulas need n_w >= 1");
    if (std::abs(point.aspect_ratio - params.phi_w()) > 1e-12 * std::max(1.0, params.phi_w()))
        throw ArgumentError("reference-panel formulas need the Stieltjes point at aspect ratio p/n_w");
}

}  // namespace

double PopulationParams::optimal_lambda() const { return phi_n() * (1.0 - h2_beta) / h2_beta; }

double PopulationParams::noise_variance(double gamma1) const {
    if (sigma_eps2) return *sigma_eps2;
    if (h2_beta == 0.0) return std::numeric_limits<double>::infinity();
    return sigma_beta2 * gamma1 * (1.0 - h2_beta) / h2_beta;
}

double PopulationParams::test_noise_variance(double gamma1) const {
    if (sigma_eps_z2) return *sigma_eps_z2;
    if (h2_beta_z == 0.0) return std::numeric_limits<double>::infinity();
    return sigma_beta2 * gamma1 * (1.0 - h2_beta_z) / h2_beta_z;
}

double PopulationParams::effect_fourth_moment() const {
    const double pp = static_cast<double>(p);
    return effect_kurtosis * sigma_beta2 * sigma_beta2 / (pp * pp);
}

void PopulationParams::validate() const {
    if (n < 1) throw ArgumentError("population.n must be at least 1");
    if (p < 1) throw ArgumentError("population.p must be at least 1");
    if (n_z < 0) throw ArgumentError("population.n_z must be nonnegative");
    if (n_w < 0) throw ArgumentError("population.n_w must be nonnegative");
    if (m < 0 || m > p) throw ArgumentError("population.m must lie in [0, p]");
    if (!(h2_beta >= 0.0 && h2_beta < 1.0)) throw ArgumentError("population.h2_beta must lie in [0, 1)");
    if (!(h2_beta_z >= 0.0 && h2_beta_z < 1.0)) throw ArgumentError("population.h2_beta_z must lie in [0, 1)");
    if (!(sigma_beta2 > 0.0) || !std::isfinite(sigma_beta2))
        throw ArgumentError("population.sigma_beta2 must be positive");
    if (!(entry_kurtosis >= 1.0)) throw ArgumentError("population.entry_kurtosis must be at least 1");
    if (!(effect_kurtosis >= 1.0)) throw ArgumentError("population.effect_kurtosis must be at least 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("population.lambda must be positive");
    if (sigma_eps2 && !(*sigma_eps2 >= 0.0)) throw ArgumentError("population.sigma_eps2 must be nonnegative");
    if (sigma_eps_z2 && !(*sigma_eps_z2 >= 0.0))
        throw ArgumentError("population.sigma_eps_z2 must be nonnegative");
}

void PopulationParams::validate(const CovarianceModel& cov) const {
    validate();
    if (cov.dim() != p) throw ArgumentError("population.p differs from the covariance dimension");
    if (cov.mask_size() != m) throw ArgumentError("population.m differs from the causal mask size");
}

GaussianLimit marginal_individual(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta,
                                  const PopulationParams& params) {
    params.validate(cov);
    check_vectors(cov, z, beta);
    const Eigen::VectorXd sz = cov.sqrt_matrix() * z;
    const Eigen::VectorXd sb = cov.sqrt_matrix() * beta.beta;
    const double c = sz.dot(sb);
    const double excess = params.entry_kurtosis - 3.0;
    const double noise = params.noise_variance(gamma1(cov));
    const double var = excess * (sz.array().square() * sb.array().square()).sum() +
                       sz.squaredNorm() * (sb.squaredNorm() + noise) + 2.0 * c * c;
    return individual_limit(c, var, params.n, "n^-1/2");
}

GaussianLimit marginal_individual_identity(const Eigen::VectorXd& z, const EffectVector& beta,
                                           const PopulationParams& params) {
    params.validate();
    check_vectors(params.p, z, beta);
    const Eigen::VectorXd& b = beta.beta;
    const double c = z.dot(b);
    const double noise = params.noise_variance(mask_ratio(params));
    const double var = (params.entry_kurtosis - 3.0) * (z.array().square() * b.array().square()).sum() +
                       z.squaredNorm() * (b.squaredNorm() + noise) + 2.0 * c * c;
    return individual_limit(c, var, params.n, "n^-1/2");
}

GaussianLimit quadratic_form(const CovarianceModel& cov, const PopulationParams& params) {
    params.validate(cov);
    const char* rate = cov.is_identity() ? "m^-1/2" : "m^-1/5";
    if (params.m == 0) return degenerate_limit(kSqrtP, rate);
    const double p = static_cast<double>(params.p);
    const double s2 = params.sigma_beta2;
    const double diag_sq = cov.masked_power_diagonal(1).squaredNorm();
    const double var = p * (params.effect_fourth_moment() - 3.0 * s2 * s2 / (p * p)) * diag_sq +
                       2.0 * s2 * s2 * masked_frobenius(cov) / p;
    GaussianLimit g;
    g.center = s2 * gamma1(cov);
    if (!(var > 0.0)) return degenerate_limit(kSqrtP, rate, g.center);
    g.sd = std::sqrt(var / p);
    g.scaling = kSqrtP;
    g.rate_tag = rate;
    return g;
}

GaussianLimit marginal_accuracy(const CovarianceModel& cov, const PopulationParams& params, bool homogeneous_ld) {
    params.validate(cov);
    const char* rate = cov.is_identity() ? "max(n_z^-1/2, n^-1/2, m^-1/2)" : "max(n_z^-1/2, n^-1/2, m^-1/5)";
    const double p = static_cast<double>(params.p);
    const double n = static_cast<double>(params.n);
    const double nz = static_cast<double>(params.n_z);
    const double mp = mask_ratio(params);

    std::map<std::string, double> diag;
    diag["kappa1"] = std::max(mp, p / n);
    diag["kappa2"] = std::max(diag["kappa1"], nz * params.m / (n * p));
    diag["kappa3"] = std::max(diag["kappa2"], nz * params.m / (p * p));

    if (params.h2_beta == 0.0 || params.h2_beta_z == 0.0 || params.m == 0 || params.n_z < 1) {
        auto g = degenerate_limit(kSqrtEtaNz, rate);
        g.diagnostics = diag;
        return g;
    }

    const SpectrumSummary s = spectrum_summary(cov);
    double g1 = s.gamma[0], g2 = s.gamma[1], g3 = s.gamma[2];
    if (homogeneous_ld) {
        g1 = mp * s.omega[0];
        g2 = mp * s.omega[1];
        g3 = mp * s.omega[2];
    }
    const double h2 = params.h2_beta;
    const double h2z = params.h2_beta_z;
    const double inner = g1 / h2 * (p / n) * s.omega[1] + g3;
    const double center = std::sqrt(h2z) * g2 / std::sqrt(inner * g1);

    const double q1 = g1 / h2z * inner;
    const double q2 = g1 / h2 * (nz / n) * g3 + 2.0 * g2 * g2 * (nz / n + 1.0);
    const Eigen::VectorXd& d2 = cov.masked_power_diagonal(2);
    const double q3 = nz * ((params.effect_kurtosis - 3.0) / (p * p) * d2.squaredNorm() +
                            2.0 / (p * p) * cov.masked_square_norm2());
    auto g = accuracy_limit(center, q1 / (q1 + q2 + q3), params.n_z, rate);
    diag["q1"] = q1;
    diag["q2"] = q2;
    diag["q3"] = q3;
    g.diagnostics = diag;
    return g;
}

GaussianLimit marginal_accuracy_identity(const PopulationParams& params) {
    params.validate();
    const char* rate = "max(n_z^-1/2, n^-1/2, m^-1/2)";
    if (params.h2_beta == 0.0 || params.h2_beta_z == 0.0 || params.m == 0 || params.n_z < 1)
        return degenerate_limit(kSqrtEtaNz, rate);
    const double p = static_cast<double>(params.p);
    const double n = static_cast<double>(params.n);
    const double nz = static_cast<double>(params.n_z);
    const double h2 = params.h2_beta;
    const double h2z = params.h2_beta_z;
    const double center = std::sqrt(h2z) / std::sqrt(p / (n * h2) + 1.0);
    const double num = n * h2 + p;
    const double den = nz * h2z + n * h2 + p + 2.0 * (nz + n) * h2 * h2z +
                       n * nz * (params.effect_kurtosis - 1.0) * h2 * h2z / static_cast<double>(params.m);
    return accuracy_limit(center, num / den, params.n_z, rate);
}

GaussianLimit reference_individual(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta,
                                   const PopulationParams& params, const StieltjesPoint& point) {
    params.validate(cov);
    check_vectors(cov, z, beta);
    check_reference_point(params, point);
    const Eigen::ArrayXd s = cov.eigenvalues().array();
    const Eigen::ArrayXd r = 1.0 / (1.0 + point.m_value * s);
    const Eigen::ArrayXd zt = (cov.eigenvectors().transpose() * z).array();
    const Eigen::ArrayXd bt = (cov.eigenvectors().transpose() * beta.beta).array();
    const double c = (zt * bt * s * r).sum();
    const double quad = (zt.square() * s * r.square()).sum();
    const double signal = (bt.square() * s).sum();
    const double noise = params.noise_variance(gamma1(cov));
    const double scale = params.phi_d() / point.lambda;
    const double var = scale * scale * (2.0 * c * c + quad * (signal + noise) / point.tilting);
    return individual_limit(scale * c, var, params.n, "n^-1/2");
}

GaussianLimit reference_individual_identity(const Eigen::VectorXd& z, const EffectVector& beta,
                                            const PopulationParams& params, const StieltjesPoint& point) {
    params.validate();
    check_vectors(params.p, z, beta);
    check_reference_point(params, point);
    const double zb = z.dot(beta.beta);
    const double noise = params.noise_variance(mask_ratio(params));
    const double scale = params.phi_d() / (point.lambda * (1.0 + point.m_value));
    const double var =
        scale * scale * (2.0 * zb * zb + z.squaredNorm() * (beta.beta.squaredNorm() + noise) / point.tilting);
    return individual_limit(scale * zb, var, params.n, "n^-1/2");
}

GaussianLimit reference_accuracy(const CovarianceModel& cov, const PopulationParams& params,
                                 const StieltjesPoint& point) {
    params.validate(cov);
    check_reference_point(params, point);
    const char* rate = "n^-1/5";
    if (params.h2_beta == 0.0 || params.h2_beta_z == 0.0 || params.m == 0 || params.n_z < 1)
        return degenerate_limit(kSqrtEtaNz, rate);

    const double p = static_cast<double>(params.p);
    const double n = static_cast<double>(params.n);
    const double nz = static_cast<double>(params.n_z);
    const double h2 = params.h2_beta;
    const double h2z = params.h2_beta_z;
    const double tilt = point.tilting;
    const ResolventSummary rs =
        resolvent_summary(cov, point.m_value, point.m_prime, point.aspect_ratio, point.lambda);
    const double g1 = gamma1(cov);
    const double rho0 = rs.rho[0], rho1 = rs.rho[1], rho2 = rs.rho[2];

    const double center = std::sqrt(tilt) * rho0 * std::sqrt(h2z) / std::sqrt(p / (n * h2) * g1 * g1 * rho1 + g1 * rho2);
    const double q1 = (p * rho1 * g1 / h2 + n * rho2) * g1 / (tilt * h2z);
    const double q2 = nz * g1 / h2 * rho2 / tilt + 2.0 * (n + nz) * rho0 * rho0;

    const Eigen::ArrayXd s = cov.eigenvalues().array();
    const Eigen::ArrayXd r = 1.0 / (1.0 + point.m_value * s);
    const Eigen::MatrixXd block = cov.masked_spectral_block((s.square() * r).matrix());
    // The second-order resolvent correction acts along Σ and is traced over
    // the mask: 𝔫 Tr(I_m Σ³(I + 𝔪Σ)^{-2}).
    const double tr_corr = (s.cube() * r.square() * cov.overlaps().array()).sum();
    const double pert = perturbation_factor(cov, point);
    const double q3 = n * nz *
                      ((params.effect_kurtosis - 3.0) / (p * p) * block.diagonal().squaredNorm() +
                       2.0 / (p * p) * (block.squaredNorm() + pert * tr_corr));

    auto g = accuracy_limit(center, q1 / (q1 + q2 + q3), params.n_z, rate);
    g.diagnostics = {{"tilting", tilt}, {"perturbation", pert}, {"rho0", rho0}, {"rho1", rho1},
                     {"rho2", rho2},    {"q1", q1},             {"q2", q2},     {"q3", q3}};
    return g;
}

GaussianLimit reference_accuracy_identity(const PopulationParams& params, const StieltjesPoint& point) {
    params.validate();
    check_reference_point(params, point);
    const char* rate = "n^-1/5";
    if (params.h2_beta == 0.0 || params.h2_beta_z == 0.0 || params.m == 0 || params.n_z < 1)
        return degenerate_limit(kSqrtEtaNz, rate);
    const double p = static_cast<double>(params.p);
    const double n = static_cast<double>(params.n);
    const double nz = static_cast<double>(params.n_z);
    const double h2 = params.h2_beta;
    const double h2z = params.h2_beta_z;
    const double tilt = point.tilting;
    const double center = std::sqrt(tilt) * std::sqrt(h2z) / std::sqrt(p / (n * h2) + 1.0);
    const double num = n * h2 + p;
    const double mp = static_cast<double>(params.m) / p;
    const double den = nz * h2z + n * h2 + p + 2.0 * (n + nz) * h2 * h2z * tilt +
                       n * nz * ((params.effect_kurtosis - 3.0) * tilt + 2.0 * (tilt + mp * (1.0 - tilt))) * h2 *
                           h2z / static_cast<double>(params.m);
    return accuracy_limit(center, num / den, params.n_z, rate);
}

GaussianLimit ridge_individual(const CovarianceModel& cov, const Eigen::VectorXd& z, const EffectVector& beta,
                               const PopulationParams& params, const StieltjesPoint& point_n,
                               bool use_optimal_lambda) {
    params.validate(cov);
    check_vectors(cov, z, beta);
    const Eigen::ArrayXd s = cov.eigenvalues().array();
    if (!(s.minCoeff() > 1e-12 * s.maxCoeff()))
        throw ArgumentError("ridge individual law needs a nonsingular covariance (Σ^{-1} appears in the mean)");
    const StieltjesPoint pt = ridge_point(&cov, params, point_n, use_optimal_lambda);
    const double lambda = pt.lambda;
    const double m = pt.m_value;
    const double phi = pt.aspect_ratio;
    const ResolventSummary rs = resolvent_summary(cov, m, pt.m_prime, phi, lambda);
    const double gf = rs.g_factor;
    const double hf = rs.h_factor;

    const Eigen::ArrayXd r = 1.0 / (1.0 + m * s);
    const Eigen::ArrayXd zt = (cov.eigenvectors().transpose() * z).array();
    const Eigen::ArrayXd bt = (cov.eigenvectors().transpose() * beta.beta).array();
    const double s1 = (zt * bt * r).sum();
    const double s2 = (bt.square() * s * r.square()).sum();
    const double z_inv = (zt.square() / s).sum();
    const double noise = params.noise_variance(gamma1(cov));

    // Σ^{-1}(I − (I + 𝔪Σ)^{-1}) = 𝔪(I + 𝔪Σ)^{-1}.
    const double center = z.dot(beta.beta) - lambda / gf * m * s1;
    const double ratio = lambda * pt.m_prime / m;
    const double var =
        hf * s1 * s1 / (gf * gf) + (gf * noise + ratio * (lambda * m * s2 - phi * rs.ell_gap * noise)) * z_inv / (gf * gf);
    auto g = individual_limit(center, var, params.n, "o(1)");
    g.diagnostics = {{"lambda", lambda}, {"g_factor", gf}, {"h_factor", hf}, {"tilting", pt.tilting}};
    return g;
}

GaussianLimit ridge_individual_identity(const Eigen::VectorXd& z, const EffectVector& beta,
                                        const PopulationParams& params, const StieltjesPoint& point_n,
                                        bool use_optimal_lambda) {
    params.validate();
    check_vectors(params.p, z, beta);
    const StieltjesPoint pt = ridge_point(nullptr, params, point_n, use_optimal_lambda);
    const double lambda = pt.lambda;
    const double m = pt.m_value;
    const double phi = pt.aspect_ratio;
    const double tilt = pt.tilting;
    const double zb = z.dot(beta.beta);
    const double z2 = z.squaredNorm();
    const double b2 = beta.beta.squaredNorm();
    const double noise = params.noise_variance(mask_ratio(params));
    const double a = 1.0 / (1.0 + m);
    const double var =
        phi * a * a / (lambda * tilt) * (lambda / phi * z2 * b2 - z2 * noise - a * a * zb * zb) +
        1.0 / (lambda * m) * (z2 * noise + phi * a * a * a * zb * zb / (lambda * m));
    auto g = individual_limit(m * a * zb, var, params.n, "o(1)");
    g.diagnostics = {{"lambda", lambda}, {"tilting", tilt}};
    return g;
}

GaussianLimit ridge_accuracy(const CovarianceModel& cov, const PopulationParams& params,
                             const StieltjesPoint& point_n, bool use_optimal_lambda) {
    params.validate(cov);
    const char* rate = "o(1)";
    if (params.h2_beta == 0.0 || params.h2_beta_z == 0.0 || params.m == 0 || params.n_z < 1)
        return degenerate_limit(kSqrtEtaNz, rate);
    const StieltjesPoint pt = ridge_point(&cov, params, point_n, use_optimal_lambda);
    const double lambda = pt.lambda;
    const double m = pt.m_value;
    const double phi = pt.aspect_ratio;
    const double tilt = pt.tilting;
    const ResolventSummary rs = resolvent_summary(cov, m, pt.m_prime, phi, lambda);
    const double gf = rs.g_factor;
    const double hf = rs.h_factor;

    const double p = static_cast<double>(params.p);
    const double n = static_cast<double>(params.n);
    const double nz = static_cast<double>(params.n_z);
    const double s2 = params.sigma_beta2;
    const double t = (1.0 - params.h2_beta) / params.h2_beta;
    const double g1 = gamma1(cov);
    const double d1 = rs.mask_minus_eth1;  // m/p − ð₁
    const double d2 = rs.eth_gap;          // ð₁ − ð₂
    const double l1 = rs.one_minus_ell1;   // 1 − ℓ₁
    const double l2 = rs.ell_gap;          // ℓ₁ − ℓ₂
    const double ratio = lambda * pt.m_prime / m;

    const double tau0 = s2 * (g1 - lambda / gf * d1);
    const double zeta1 = s2 * (g1 - (2.0 * d1 - d2 / tilt) / m) + t * s2 * g1 * phi / (lambda * m) * (l1 - l2 / tilt);
    const double zeta2 = s2 * g1 / params.h2_beta_z;
    const double tau1 = zeta1 * zeta2;
    const double tau2 = s2 * (g1 - d1 / m);
    const double tau3 = nz * s2 * s2 / (n * gf * gf) *
                        (hf * (d1 / m) * (d1 / m) + g1 * (t * g1 * gf + ratio * (lambda * d2 - t * g1 * phi * l2)));

    const Eigen::ArrayXd s = cov.eigenvalues().array();
    const Eigen::ArrayXd r = 1.0 / (1.0 + m * s);
    // (𝔤/λ)σ − 1 + 1/(1 + 𝔪σ) written without the leading cancellation.
    const Eigen::MatrixXd block = cov.masked_spectral_block((s * (gf / lambda - m * r)).matrix());
    const double tau4_sq = nz * lambda * lambda / (gf * gf) *
                           ((params.effect_fourth_moment() - 3.0 * s2 * s2 / (p * p)) * block.diagonal().squaredNorm() +
                            2.0 * s2 * s2 / (p * p) * block.squaredNorm());

    const double center = tau0 / std::sqrt(tau1);
    auto g = accuracy_limit(center, tau1 / (tau1 + 2.0 * tau2 * tau2 + tau3 + tau4_sq), params.n_z, rate);
    g.diagnostics = {{"lambda", lambda}, {"tau0", tau0}, {"tau1", tau1},       {"tau2", tau2},
                     {"tau3", tau3},     {"tau4_sq", tau4_sq}, {"g_factor", gf}, {"h_factor", hf}};
    return g;
}

GaussianLimit ridge_accuracy_identity(const PopulationParams& params, const StieltjesPoint& point_n,
                                      bool use_optimal_lambda) {
    params.validate();
    const char* rate = "o(1)";
    if (params.h2_beta == 0.0 || params.h2_beta_z == 0.0 || params.m == 0 || params.n_z < 1)
        return degenerate_limit(kSqrtEtaNz, rate);
    const StieltjesPoint pt = ridge_point(nullptr, params, point_n, use_optimal_lambda);
    const double lambda = pt.lambda;
    const double m = pt.m_value;
    const double phi = pt.aspect_ratio;
    const double tilt = pt.tilting;
    const double t = (1.0 - params.h2_beta) / params.h2_beta;
    const double nzn = static_cast<double>(params.n_z) / static_cast<double>(params.n);
    const double k = m * m + (1.0 - tilt) / tilt + (m + (tilt - 1.0) / tilt) * t * phi / lambda;
    const double v1 = k / params.h2_beta_z;
    const double v2 = 2.0 * m * m;
    const double v3 = nzn * (phi / (lambda * lambda * (1.0 + m) * m * m) -
                             phi / (lambda * (1.0 + m) * (1.0 + m) * tilt) + t * (1.0 + m) * (1.0 + m) / (lambda * m) +
                             1.0 / tilt - t * phi / (lambda * tilt));
    const double v4 = static_cast<double>(params.n_z) * m * m * (params.effect_kurtosis - 1.0) /
                      static_cast<double>(params.m);
    const double center = m * std::sqrt(params.h2_beta_z) / std::sqrt(k);
    auto g = accuracy_limit(center, v1 / (v1 + v2 + v3 + v4), params.n_z, rate);
    g.diagnostics = {{"lambda", lambda}, {"tilting", tilt}};
    return g;
}

GaussianLimit naive_accuracy(const NaiveInputs& realized, const CovarianceModel& cov,
                             const PopulationParams& params) {
    const char* rate = "n_z^-1/2";
    const Eigen::Index nz = realized.z_beta.size();
    if (realized.y_hat.size() != nz || nz < 1) throw ArgumentError("naive_accuracy: length mismatch");
    if (realized.beta.size() != cov.dim()) throw ArgumentError("naive_accuracy: effect dimension differs from p");
    const double h2z = params.h2_beta_z;
    if (!(h2z > 0.0 && h2z < 1.0)) return degenerate_limit(kSqrtEtaNz, rate);
    const double signal = realized.beta.dot(cov.matrix() * realized.beta);
    const double zb2 = realized.z_beta.squaredNorm();
    const double yhat_norm = realized.y_hat.norm();
    if (!(signal > 0.0) || !(yhat_norm > 0.0)) return degenerate_limit(kSqrtEtaNz, rate);
    const double n_z = static_cast<double>(nz);
    const double center = realized.z_beta.dot(realized.y_hat) /
                          (std::sqrt(zb2 + n_z * (1.0 / h2z - 1.0) * signal) * yhat_norm);
    const double eta = (zb2 / n_z) / signal * h2z / (1.0 - h2z) + 1.0;
    return accuracy_limit(center, eta, static_cast<long>(nz), rate);
}

std::pair<double, double> confidence_interval(const GaussianLimit& limit, double level) {
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");
    if (limit.degenerate || !(limit.sd > 0.0))
        throw DegenerateError("confidence interval requested for a degenerate limit");
    const double q = normal_quantile(1.0 - (1.0 - level) / 2.0);
    return {limit.center - q * limit.sd, limit.center + q * limit.sd};
}

}  // namespace prsclt
