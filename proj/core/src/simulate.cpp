#include "prsclt/simulate.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "prsclt/errors.hpp"
#include "prsclt/rng.hpp"
#include "prsclt/stieltjes.hpp"

namespace prsclt {

namespace {

Eigen::VectorXd gaussian_vector(Eigen::Index n, double sd, std::uint64_t key) {
    CounterRng rng(key);
    boost::random::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = sd * nd(rng);
    return v;
}

// Applies Σ^{1/2} on the right of a row-sample matrix, skipping Σ = I.
Eigen::MatrixXd color(const CovarianceModel& cov, Eigen::MatrixXd raw) {
    if (cov.is_identity()) return raw;
    return raw * cov.sqrt_matrix();
}

Eigen::VectorXd apply_sqrt(const CovarianceModel& cov, const Eigen::VectorXd& v) {
    if (cov.is_identity()) return v;
    return cov.sqrt_matrix() * v;
}

// Above this condition number the colored path is used instead of whitening.
constexpr double kWhitenMaxCondition = 1e6;

// U diag(σ^a) Uᵀ from the eigenpairs; needs σ > 0 when a < 0.
Eigen::MatrixXd spectral_power(const CovarianceModel& cov, double a) {
    const Eigen::MatrixXd f =
        cov.eigenvectors() * cov.eigenvalues().array().pow(0.5 * a).matrix().asDiagonal();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cov.dim(), cov.dim());
    out.selfadjointView<Eigen::Lower>().rankUpdate(f);
    return out.selfadjointView<Eigen::Lower>();
}

// (DᵀD + shift·P) factorized by Cholesky; P = I when `penalty` is null.
Eigen::LLT<Eigen::MatrixXd> ridge_factor(const Eigen::MatrixXd& design, double shift,
                                         const Eigen::MatrixXd* penalty = nullptr) {
    const Eigen::Index p = design.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    if (penalty)
        gram += shift * *penalty;
    else
        gram.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw DataError("ridge system is not positive definite");
    return llt;
}

double fit_lambda(const SimConfig& config, const PopulationParams& pp) {
    return (config.estimator == EstimatorKind::ridge && config.use_optimal_lambda) ? pp.optimal_lambda() : pp.lambda;
}

struct BatchContext {
    BatchContext(const SimConfig& cfg, const CovarianceModel& cv, PopulationParams pp)
        : config(cfg), cov(cv), params(std::move(pp)) {}

    const SimConfig& config;
    const CovarianceModel& cov;
    PopulationParams params;
    double lambda_fit = 0.0;
    double noise_sd = 0.0;
    double test_noise_sd = 0.0;
    EffectVector fixed_beta;
    Eigen::VectorXd z;
    Eigen::VectorXd z_white;    // Σ^{1/2} z, pairs with raw entries
    std::optional<Eigen::LLT<Eigen::MatrixXd>> frozen_panel;
    // With S = Σ^{1/2}: DᵀD + cI = S(D₀ᵀD₀ + cΣ⁻¹)S for D = D₀S, so ridge
    // fits run on raw entries and finish with Σ^{-1/2}.
    std::optional<Eigen::MatrixXd> precision;
    std::optional<Eigen::MatrixXd> inv_sqrt;

    std::uint64_t key(std::uint64_t r, Stream s) const { return derive_seed(config.master_seed, r, s); }
};

struct ReplicationResult {
    double raw = 0.0;
    bool flag = false;
    double naive_center = std::numeric_limits<double>::quiet_NaN();
    double naive_sd = std::numeric_limits<double>::quiet_NaN();
};

ReplicationResult replicate(const BatchContext& ctx, std::uint64_t r) {
    const SimConfig& cfg = ctx.config;
    const CovarianceModel& cov = ctx.cov;
    const PopulationParams& pp = ctx.params;
    ReplicationResult out;

    const EffectVector beta =
        cfg.beta_redrawn() ? gen_effects(cov, pp, cfg.effect_dist, ctx.key(r, Stream::effects)) : ctx.fixed_beta;
    if (cfg.target == Target::quadratic_form) {
        out.raw = cov.is_identity() ? beta.beta.squaredNorm() : beta.beta.dot(cov.matrix() * beta.beta);
        return out;
    }

    // X = X₀Σ^{1/2}, so Xβ = X₀(Σ^{1/2}β) and Xᵀy = Σ^{1/2}X₀ᵀy.
    const Eigen::MatrixXd x0 = gen_raw_entries(pp.n, pp.p, cfg.entry_dist, ctx.key(r, Stream::train_design));
    const Eigen::VectorXd sb = apply_sqrt(cov, beta.beta);
    const Eigen::VectorXd y = x0 * sb + gaussian_vector(pp.n, ctx.noise_sd, ctx.key(r, Stream::train_noise));
    const double n = static_cast<double>(pp.n);

    Eigen::VectorXd beta_hat;
    switch (cfg.estimator) {
        case EstimatorKind::marginal:
            if (cfg.target == Target::individual) {
                out.raw = (x0 * ctx.z_white).dot(y) / n;
                return out;
            }
            beta_hat = apply_sqrt(cov, x0.transpose() * y) / n;
            break;
        case EstimatorKind::reference_ridge: {
            const Eigen::VectorXd x0ty = x0.transpose() * y;
            const double shift = static_cast<double>(pp.n_w) * ctx.lambda_fit;
            if (ctx.precision) {
                const Eigen::VectorXd u =
                    ctx.frozen_panel
                        ? ctx.frozen_panel->solve(x0ty)
                        : ridge_factor(gen_raw_entries(pp.n_w, pp.p, cfg.entry_dist, ctx.key(r, Stream::panel_design)),
                                       shift, &*ctx.precision)
                              .solve(x0ty);
                beta_hat = *ctx.inv_sqrt * u;
            } else if (ctx.frozen_panel) {
                beta_hat = ctx.frozen_panel->solve(apply_sqrt(cov, x0ty));
            } else {
                const Eigen::MatrixXd w =
                    color(cov, gen_raw_entries(pp.n_w, pp.p, cfg.entry_dist, ctx.key(r, Stream::panel_design)));
                beta_hat = ridge_factor(w, shift).solve(apply_sqrt(cov, x0ty));
            }
            break;
        }
        case EstimatorKind::ridge: {
            if (ctx.precision) {
                beta_hat = *ctx.inv_sqrt * ridge_factor(x0, n * ctx.lambda_fit, &*ctx.precision).solve(x0.transpose() * y);
            } else {
                const Eigen::MatrixXd x = color(cov, x0);
                beta_hat = ridge_factor(x, n * ctx.lambda_fit).solve(x.transpose() * y);
            }
            break;
        }
    }

    if (cfg.target == Target::individual) {
        out.raw = ctx.z.dot(beta_hat);
        return out;
    }

    const Eigen::MatrixXd z0 = gen_raw_entries(pp.n_z, pp.p, cfg.entry_dist, ctx.key(r, Stream::test_design));
    const Eigen::VectorXd z_beta = z0 * sb;
    const Eigen::VectorXd y_hat = z0 * apply_sqrt(cov, beta_hat);
    const Eigen::VectorXd y_z = z_beta + gaussian_vector(pp.n_z, ctx.test_noise_sd, ctx.key(r, Stream::test_noise));
    const Accuracy acc = accuracy(y_z, y_hat);
    out.raw = acc.value;
    out.flag = acc.degenerate;
    if (!acc.degenerate) {
        const GaussianLimit naive = naive_accuracy({z_beta, y_hat, beta.beta}, cov, pp);
        if (!naive.degenerate) {
            out.naive_center = naive.center;
            out.naive_sd = naive.sd;
        }
    }
    return out;
}

}  // namespace

void SimConfig::validate() const {
    params.validate();
    if (replications < 1) throw ArgumentError("simulation.replications must be at least 1");
    if (entry_dist.kind == EntryKind::genotype && !(entry_dist.maf > 0.0 && entry_dist.maf < 1.0))
        throw ArgumentError("simulation.entry_dist maf must lie in (0, 1)");
    if (estimator == EstimatorKind::reference_ridge && params.n_w < 1)
        throw ArgumentError("reference_ridge needs population.n_w >= 1");
    if (estimator == EstimatorKind::ridge && entry_dist.kind != EntryKind::gaussian)
        throw ArgumentError("ridge laws assume Gaussian design entries");
    if (target == Target::accuracy && params.n_z < 1) throw ArgumentError("accuracy target needs population.n_z >= 1");
    if (target == Target::individual && test_point == TestPoint::basis &&
        (test_point_index < 0 || test_point_index >= params.p))
        throw ArgumentError("simulation.test_point index outside [0, p)");
    if (workers < 0) throw ArgumentError("workers must be nonnegative");
}

PopulationParams effective_params(const SimConfig& config) {
    PopulationParams pp = config.params;
    pp.entry_kurtosis = config.entry_dist.kurtosis();
    pp.effect_kurtosis = config.effect_dist == EffectDist::gaussian ? 3.0 : 1.0;
    return pp;
}

FixedDraws fixed_draws(const SimConfig& config, const CovarianceModel& cov) {
    const PopulationParams pp = effective_params(config);
    FixedDraws d;
    d.beta = gen_effects(cov, pp, config.effect_dist, derive_seed(config.master_seed, kBatchIndex, Stream::effects));
    if (config.test_point == TestPoint::basis) {
        d.z = Eigen::VectorXd::Unit(pp.p, config.test_point_index);
    } else {
        const Eigen::MatrixXd z0 = gen_raw_entries(1, pp.p, config.entry_dist,
                                                   derive_seed(config.master_seed, kBatchIndex, Stream::test_point));
        d.z = apply_sqrt(cov, z0.row(0).transpose());
    }
    return d;
}

GaussianLimit analytic_limit(const SimConfig& config, const CovarianceModel& cov, const FixedDraws& draws) {
    const PopulationParams pp = effective_params(config);
    if (config.target == Target::quadratic_form) return quadratic_form(cov, pp);
    const bool indiv = config.target == Target::individual;
    const double lambda = fit_lambda(config, pp);
    switch (config.estimator) {
        case EstimatorKind::marginal:
            return indiv ? marginal_individual(cov, draws.z, draws.beta, pp) : marginal_accuracy(cov, pp);
        case EstimatorKind::reference_ridge: {
            const StieltjesPoint pt = solve_fixed_point(cov, pp.phi_w(), lambda);
            return indiv ? reference_individual(cov, draws.z, draws.beta, pp, pt) : reference_accuracy(cov, pp, pt);
        }
        case EstimatorKind::ridge: {
            const StieltjesPoint pt = solve_fixed_point(cov, pp.phi_n(), lambda);
            return indiv ? ridge_individual(cov, draws.z, draws.beta, pp, pt, config.use_optimal_lambda)
                         : ridge_accuracy(cov, pp, pt, config.use_optimal_lambda);
        }
    }
    throw ArgumentError("unknown estimator");
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, index, 0); }

EffectVector gen_effects(const CovarianceModel& cov, const PopulationParams& params, EffectDist dist,
                         std::uint64_t seed) {
    EffectVector eff;
    eff.beta = Eigen::VectorXd::Zero(cov.dim());
    eff.causal_mask = cov.causal_mask();
    const double sd = std::sqrt(params.sigma_beta2 / static_cast<double>(cov.dim()));
    CounterRng rng(seed);
    boost::random::normal_distribution<double> nd(0.0, 1.0);
    for (int i : cov.mask_index()) {
        if (dist == EffectDist::gaussian)
            eff.beta[i] = sd * nd(rng);
        else
            eff.beta[i] = (rng() >> 63) ? sd : -sd;
    }
    return eff;
}

Eigen::MatrixXd gen_raw_entries(Eigen::Index n, Eigen::Index p, const EntryDist& dist, std::uint64_t seed) {
    Eigen::MatrixXd out(n, p);
    CounterRng rng(seed);
    double* data = out.data();
    const Eigen::Index total = n * p;
    switch (dist.kind) {
        case EntryKind::gaussian: {
            boost::random::normal_distribution<double> nd(0.0, 1.0);
            for (Eigen::Index k = 0; k < total; ++k) data[k] = nd(rng);
            break;
        }
        case EntryKind::rademacher: {
            for (Eigen::Index k = 0; k < total; k += 64) {
                std::uint64_t bits = rng();
                const Eigen::Index stop = std::min<Eigen::Index>(total, k + 64);
                for (Eigen::Index j = k; j < stop; ++j, bits >>= 1)
                    data[j] = static_cast<double>(static_cast<int>(bits & 1U) * 2 - 1);
            }
            break;
        }
        case EntryKind::genotype: {
            const double q = dist.maf;
            const double center = 2.0 * q;
            const double scale = 1.0 / std::sqrt(2.0 * q * (1.0 - q));
            for (Eigen::Index k = 0; k < total; ++k) {
                const int g = (rng.uniform() < q) + (rng.uniform() < q);
                data[k] = (g - center) * scale;
            }
            break;
        }
    }
    return out;
}

Dataset gen_dataset(const CovarianceModel& cov, Eigen::Index n, const EntryDist& dist, std::uint64_t seed) {
    if (n < 1) throw ArgumentError("gen_dataset: n must be at least 1");
    Dataset d;
    d.design = color(cov, gen_raw_entries(n, cov.dim(), dist, seed));
    d.entry_dist = dist;
    return d;
}

Eigen::VectorXd gen_response(const Dataset& design, const EffectVector& beta, double sigma_eps2, std::uint64_t seed) {
    if (beta.beta.size() != design.p()) throw ArgumentError("gen_response: dimension mismatch");
    if (!(sigma_eps2 >= 0.0)) throw ArgumentError("gen_response: noise variance must be nonnegative");
    Eigen::VectorXd y = design.design * beta.beta;
    if (sigma_eps2 > 0.0) y += gaussian_vector(design.n(), std::sqrt(sigma_eps2), seed);
    return y;
}

CovarianceModel build_covariance(const SimConfig& config) {
    return build_covariance(config.cov_spec, static_cast<int>(config.params.p), config.mask_spec);
}

ReplicationBatch run_batch(const SimConfig& config) { return run_batch(config, build_covariance(config)); }

ReplicationBatch run_batch(const SimConfig& config, const CovarianceModel& cov) {
    config.validate();
    BatchContext ctx(config, cov, effective_params(config));
    ctx.params.validate(cov);
    const PopulationParams& pp = ctx.params;
    const double g1 = cov.masked_power_diagonal(1).sum() / cov.dim();
    ctx.noise_sd = std::sqrt(pp.noise_variance(g1));
    ctx.test_noise_sd = std::sqrt(pp.test_noise_variance(g1));
    if (!std::isfinite(ctx.noise_sd) || !std::isfinite(ctx.test_noise_sd))
        throw ArgumentError("simulation needs positive heritabilities");
    ctx.lambda_fit = fit_lambda(config, pp);
    FixedDraws draws = fixed_draws(config, cov);
    ctx.fixed_beta = draws.beta;
    ctx.z = draws.z;
    ctx.z_white = apply_sqrt(cov, ctx.z);
    const bool fits_ridge = config.target != Target::quadratic_form && config.estimator != EstimatorKind::marginal;
    if (fits_ridge && !cov.is_identity() && cov.eigenvalues().minCoeff() > 0.0 &&
        cov.eigenvalues().maxCoeff() <= kWhitenMaxCondition * cov.eigenvalues().minCoeff()) {
        ctx.precision = spectral_power(cov, -1.0);
        ctx.inv_sqrt = spectral_power(cov, -0.5);
    }
    if (config.freeze_panel && config.estimator == EstimatorKind::reference_ridge) {
        const Eigen::MatrixXd w0 =
            gen_raw_entries(pp.n_w, pp.p, config.entry_dist, ctx.key(kBatchIndex, Stream::panel_design));
        const double shift = static_cast<double>(pp.n_w) * ctx.lambda_fit;
        ctx.frozen_panel = ctx.precision ? ridge_factor(w0, shift, &*ctx.precision)
                                         : ridge_factor(color(cov, w0), shift);
    }

    ReplicationBatch batch;
    batch.limit = analytic_limit(config, cov, draws);
    if (config.target == Target::individual) {
        batch.test_point = ctx.z;
        batch.beta = ctx.fixed_beta.beta;
    }

    const auto reps = static_cast<std::size_t>(config.replications);
    std::vector<ReplicationResult> results(reps);
    batch.seeds.resize(reps);
    for (std::size_t r = 0; r < reps; ++r) batch.seeds[r] = replication_seed(config.master_seed, r);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex err_mutex;
    std::size_t err_index = reps;
    std::string err_what;
    auto worker = [&] {
        while (!abort.load(std::memory_order_relaxed)) {
            const std::size_t r = next.fetch_add(1);
            if (r >= reps) return;
            try {
                results[r] = replicate(ctx, r);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mutex);
                if (r < err_index) {
                    err_index = r;
                    err_what = e.what();
                }
                abort.store(true);
            }
        }
    };

    unsigned threads = config.workers > 0 ? static_cast<unsigned>(config.workers) : std::thread::hardware_concurrency();
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err_index < reps)
        throw ReplicationError("replication " + std::to_string(err_index) + " failed: " + err_what, err_index,
                               batch.seeds[err_index]);

    batch.raw.resize(reps);
    batch.flags.resize(reps);
    const bool accuracy_target = config.target == Target::accuracy;
    if (accuracy_target) {
        batch.naive_center.resize(reps);
        batch.naive_sd.resize(reps);
    }
    for (std::size_t r = 0; r < reps; ++r) {
        batch.raw[r] = results[r].raw;
        batch.flags[r] = results[r].flag;
        if (accuracy_target) {
            batch.naive_center[r] = results[r].naive_center;
            batch.naive_sd[r] = results[r].naive_sd;
        }
    }
    if (!batch.limit.degenerate && batch.limit.sd > 0.0) {
        batch.standardized.resize(reps);
        for (std::size_t r = 0; r < reps; ++r)
            batch.standardized[r] = (batch.raw[r] - batch.limit.center) / batch.limit.sd;
    }
    return batch;
}

namespace {

void put_double(std::ostream& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.write(buf, res.ptr - buf);
}

}  // namespace

void write_batch_csv(std::ostream& out, const ReplicationBatch& batch) {
    out << "index,seed,raw,standardized,flags\n";
    for (std::size_t r = 0; r < batch.raw.size(); ++r) {
        out << r << ',' << batch.seeds[r] << ',';
        put_double(out, batch.raw[r]);
        out << ',';
        if (!batch.standardized.empty()) put_double(out, batch.standardized[r]);
        out << ',' << (batch.flags[r] ? "true" : "false") << '\n';
    }
}

}  // namespace prsclt
