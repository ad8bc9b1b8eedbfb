#include "cli/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include "prsclt/errors.hpp"
#include "prsclt/normal.hpp"
#include "prsclt/stats.hpp"
#include "prsclt/stieltjes.hpp"

#ifndef PRSCLT_VERSION
#define PRSCLT_VERSION "0.0.0"
#endif

namespace prsclt::cli {

using nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return s.str();
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename T>
std::optional<T> env_number(const char* name) {
    const char* raw = std::getenv(name);
    if (!raw || !*raw) return std::nullopt;
    T value{};
    const char* end = raw + std::char_traits<char>::length(raw);
    auto [ptr, ec] = std::from_chars(raw, end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError(name, "environment override is not a valid number");
    return value;
}

// Writes through `body` to the --out file, or to `fallback` when unset.
void emit(const Options& opts, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (!opts.out) {
        body(fallback);
        return;
    }
    std::ofstream file(*opts.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file '" + *opts.out + "'");
    body(file);
    if (!file) throw std::runtime_error("failed writing '" + *opts.out + "'");
}

int guarded(std::ostream& err, const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ArgumentError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ValidationError& e) {
        err << "config error: covariance " << e.check() << " check failed: " << e.what() << '\n';
        return kConfigError;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ReplicationError& e) {
        err << "replication error: " << e.what() << " (index " << e.index() << ", seed " << e.seed() << ")\n";
        return kRuntimeError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

SimConfig law_config(const SimConfig& base, const LawRequest& law) {
    SimConfig c = base;
    c.estimator = law.estimator;
    c.target = law.level;
    c.use_optimal_lambda = law.use_optimal_lambda;
    return c;
}

double law_lambda(const SimConfig& c) {
    return c.estimator == EstimatorKind::ridge && c.use_optimal_lambda ? c.params.optimal_lambda() : c.params.lambda;
}

// Stieltjes point the law is evaluated at, if any.
std::optional<StieltjesPoint> law_point(const SimConfig& c, const CovarianceModel& cov) {
    if (c.target == Target::quadratic_form) return std::nullopt;
    if (c.estimator == EstimatorKind::reference_ridge)
        return c.params.n_w >= 1 ? std::optional(solve_fixed_point(cov, c.params.phi_w(), law_lambda(c)))
                                 : std::nullopt;
    if (c.estimator == EstimatorKind::ridge) return solve_fixed_point(cov, c.params.phi_n(), law_lambda(c));
    return std::nullopt;
}

json inputs_echo(const SimConfig& c) {
    const PopulationParams& pp = c.params;
    return {{"n", pp.n},          {"n_z", pp.n_z},   {"n_w", pp.n_w},  {"p", pp.p},
            {"m", pp.m},          {"h2", pp.h2_beta}, {"h2_z", pp.h2_beta_z},
            {"sigma_beta2", pp.sigma_beta2}, {"lambda", law_lambda(c)}};
}

json limit_json(const SimConfig& c, const GaussianLimit& g) {
    json j = {{"estimator", to_string(c.estimator)},
              {"level", to_string(c.target)},
              {"center", number_or_null(g.center)},
              {"sd", number_or_null(g.sd)},
              {"eta", g.eta ? number_or_null(*g.eta) : json(nullptr)},
              {"scaling", g.scaling},
              {"rate_tag", g.rate_tag},
              {"degenerate", g.degenerate}};
    if (!g.diagnostics.empty()) {
        json d = json::object();
        for (const auto& [k, v] : g.diagnostics) d[k] = number_or_null(v);
        j["diagnostics"] = d;
    }
    return j;
}

json check_json(const std::string& name, double value, const json& threshold, bool pass) {
    return {{"name", name}, {"value", number_or_null(value)}, {"threshold", threshold}, {"pass", pass}};
}

}  // namespace

const char* tool_version() { return PRSCLT_VERSION; }

RunConfig resolve_config(const Options& opts) {
    RunConfig rc = load_config(opts.config_path);
    if (auto s = env_number<std::uint64_t>("PRSCLT_SEED")) rc.sim.master_seed = *s;
    if (auto w = env_number<int>("PRSCLT_WORKERS")) rc.sim.workers = *w;
    if (opts.seed) rc.sim.master_seed = *opts.seed;
    if (opts.workers) rc.sim.workers = *opts.workers;
    if (rc.sim.workers < 0) throw ConfigError("workers", "must be nonnegative");
    return rc;
}

std::string config_digest(const RunConfig& config) {
    json doc = to_json(config);
    // Worker count does not affect results, so it stays out of the digest.
    doc["simulation"].erase("workers");
    return sha256_hex(doc.dump());
}

json to_json(const RunManifest& m) {
    return {{"config_digest", m.config_digest}, {"tool_version", m.tool_version}, {"started_at", m.started_at},
            {"finished_at", m.finished_at},     {"config_path", m.config_path},   {"output_path", m.output_path}};
}

int cmd_analytic(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig rc = resolve_config(opts);
        const CovarianceModel cov = build_covariance(rc.sim);
        std::vector<std::pair<SimConfig, GaussianLimit>> laws;
        for (const LawRequest& law : rc.laws) {
            SimConfig c = law_config(rc.sim, law);
            const FixedDraws draws = fixed_draws(c, cov);
            laws.emplace_back(c, analytic_limit(c, cov, draws));
        }
        emit(opts, out, [&](std::ostream& os) {
            if (opts.format.value_or(Format::json) == Format::csv) {
                os << "estimator,level,center,sd,eta,rate_tag,degenerate\n";
                for (const auto& [c, g] : laws)
                    os << to_string(c.estimator) << ',' << to_string(c.target) << ',' << fmt_double(g.center) << ','
                       << fmt_double(g.sd) << ',' << (g.eta ? fmt_double(*g.eta) : "") << ',' << g.rate_tag << ','
                       << (g.degenerate ? "true" : "false") << '\n';
                return;
            }
            json entries = json::array();
            for (const auto& [c, g] : laws) {
                json e = limit_json(c, g);
                e["inputs"] = inputs_echo(c);
                entries.push_back(e);
            }
            os << json{{"laws", entries}, {"config_digest", config_digest(rc)}}.dump(2) << '\n';
        });
        return kSuccess;
    });
}

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!opts.out) throw ConfigError("--out", "simulate needs an output CSV path");
        const RunConfig rc = resolve_config(opts);
        RunManifest manifest{config_digest(rc), tool_version(), utc_now(), "", opts.config_path, *opts.out};
        const ReplicationBatch batch = run_batch(rc.sim);
        emit(opts, out, [&](std::ostream& os) { write_batch_csv(os, batch); });
        manifest.finished_at = utc_now();
        json mj = to_json(manifest);
        mj["limit"] = limit_json(rc.sim, batch.limit);
        mj["replications"] = rc.sim.replications;
        mj["master_seed"] = rc.sim.master_seed;
        const std::string sidecar = *opts.out + ".manifest.json";
        std::ofstream ms(sidecar, std::ios::binary);
        if (!ms) throw std::runtime_error("cannot open manifest '" + sidecar + "'");
        ms << mj.dump(2) << '\n';
        return kSuccess;
    });
}

int cmd_verify(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig rc = resolve_config(opts);
        if (!rc.verify || rc.verify->empty()) throw ConfigError("verify", "no thresholds configured");
        const VerifySpec& v = *rc.verify;
        const ReplicationBatch batch = run_batch(rc.sim);
        const GaussianLimit& g = batch.limit;
        const double r = static_cast<double>(batch.raw.size());
        const double zq = normal_quantile(0.5 + v.ci_level / 2.0);
        const bool usable = !g.degenerate && g.sd > 0.0;
        const double nan = std::numeric_limits<double>::quiet_NaN();

        json checks = json::array();
        bool all = true;
        auto add = [&](const std::string& name, double value, const json& threshold, bool pass) {
            checks.push_back(check_json(name, value, threshold, pass));
            all = all && pass;
        };
        if (v.ks_max) {
            const double d = usable && batch.raw.size() >= 20 ? ks_to_standard_normal(batch.standardized).statistic : nan;
            add("ks_standard_normal", d, *v.ks_max, d <= *v.ks_max);
        }
        if (v.ks_fitted_max) {
            double d = nan;
            if (batch.raw.size() >= 20 && sample_variance(batch.raw) > 0.0) d = ks_to_fitted_normal(batch.raw).statistic;
            add("ks_fitted_normal", d, *v.ks_fitted_max, d <= *v.ks_fitted_max);
        }
        if (v.variance_ratio) {
            const double vr = usable && r >= 2 ? variance_ratio(batch.raw, g.sd) : nan;
            add("variance_ratio", vr, {v.variance_ratio->first, v.variance_ratio->second},
                vr >= v.variance_ratio->first && vr <= v.variance_ratio->second);
        }
        if (v.mean_sd_multiple) {
            double k = nan;
            if (r >= 2) {
                const double se = std::sqrt(sample_variance(batch.raw) / r);
                k = se > 0.0 ? std::abs(sample_mean(batch.raw) - g.center) / se : nan;
            }
            add("mean_within_sd_multiple", k, *v.mean_sd_multiple, k <= *v.mean_sd_multiple);
        }
        if (v.coverage) {
            double cov = nan;
            if (usable) {
                std::vector<std::pair<double, double>> ci;
                for (double x : batch.raw) ci.emplace_back(x - zq * g.sd, x + zq * g.sd);
                cov = coverage(std::vector<double>(batch.raw.size(), g.center), ci);
            }
            add("coverage", cov, {v.coverage->first, v.coverage->second},
                cov >= v.coverage->first && cov <= v.coverage->second);
        }
        if (v.naive_coverage_max) {
            double cov = nan;
            if (rc.sim.target == Target::accuracy && !g.degenerate) {
                std::vector<std::pair<double, double>> ci;
                for (std::size_t i = 0; i < batch.raw.size(); ++i)
                    ci.emplace_back(batch.raw[i] - zq * batch.naive_sd[i], batch.raw[i] + zq * batch.naive_sd[i]);
                cov = coverage(std::vector<double>(batch.raw.size(), g.center), ci);
            }
            add("naive_coverage", cov, *v.naive_coverage_max, cov <= *v.naive_coverage_max);
        }
        emit(opts, out, [&](std::ostream& os) {
            os << json{{"checks", checks},
                       {"pass", all},
                       {"limit", limit_json(rc.sim, g)},
                       {"replications", rc.sim.replications},
                       {"config_digest", config_digest(rc)}}
                      .dump(2)
               << '\n';
        });
        return all ? kSuccess : kVerifyFailed;
    });
}

int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig rc = resolve_config(opts);
        if (!rc.sweep) throw ConfigError("sweep", "required section missing");
        if (rc.sweep->values.empty()) throw ConfigError("sweep.values", "grid is empty");
        struct Row {
            double value;
            SimConfig config;
            GaussianLimit limit;
            std::optional<StieltjesPoint> point;
        };
        std::vector<Row> rows;
        for (double value : rc.sweep->values) {
            const SimConfig point_cfg = with_parameter(rc.sim, rc.sweep->parameter, value);
            const CovarianceModel cov = build_covariance(point_cfg);
            for (const LawRequest& law : rc.laws) {
                SimConfig c = law_config(point_cfg, law);
                const FixedDraws draws = fixed_draws(c, cov);
                rows.push_back({value, c, analytic_limit(c, cov, draws), law_point(c, cov)});
            }
        }
        emit(opts, out, [&](std::ostream& os) {
            if (opts.format.value_or(Format::csv) == Format::json) {
                json arr = json::array();
                for (const Row& row : rows) {
                    json j = limit_json(row.config, row.limit);
                    j["parameter"] = rc.sweep->parameter;
                    j["value"] = row.value;
                    j["m_value"] = row.point ? json(row.point->m_value) : json(nullptr);
                    j["tilting"] = row.point ? json(row.point->tilting) : json(nullptr);
                    arr.push_back(j);
                }
                os << arr.dump(2) << '\n';
                return;
            }
            os << "parameter,value,estimator,level,center,sd,eta,m_value,tilting,degenerate\n";
            for (const Row& row : rows) {
                const GaussianLimit& g = row.limit;
                os << rc.sweep->parameter << ',' << fmt_double(row.value) << ',' << to_string(row.config.estimator)
                   << ',' << to_string(row.config.target) << ',' << fmt_double(g.center) << ',' << fmt_double(g.sd)
                   << ',' << (g.eta ? fmt_double(*g.eta) : "") << ','
                   << (row.point ? fmt_double(row.point->m_value) : "") << ','
                   << (row.point ? fmt_double(row.point->tilting) : "") << ',' << (g.degenerate ? "true" : "false")
                   << '\n';
            }
        });
        return kSuccess;
    });
}

}  // namespace prsclt::cli
