#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "prsclt/simulate.hpp"

namespace prsclt {

// Invalid or malformed configuration. field() is a dotted path such as
// "population.n", or empty for syntax errors.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct LawRequest {
    EstimatorKind estimator = EstimatorKind::marginal;
    Target level = Target::accuracy;
    bool use_optimal_lambda = false;
};

using Range = std::pair<double, double>;

// Checks applied by the verify command. Unset entries are skipped.
struct VerifySpec {
    std::optional<double> ks_max;         // KS of standardized stats against Φ
    std::optional<double> ks_fitted_max;  // KS against the fitted normal
    std::optional<Range> variance_ratio;
    std::optional<double> mean_sd_multiple;  // |mean − center| ≤ k·sd/√R
    std::optional<Range> coverage;           // raw ± z·sd covers the center
    std::optional<double> naive_coverage_max;  // accuracy target: raw ± z·naive sd
    double ci_level = 0.95;

    bool empty() const {
        return !ks_max && !ks_fitted_max && !variance_ratio && !mean_sd_multiple && !coverage && !naive_coverage_max;
    }
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

struct RunConfig {
    SimConfig sim;
    std::vector<LawRequest> laws;  // defaults to the simulation's estimator and target
    std::optional<VerifySpec> verify;
    std::optional<SweepSpec> sweep;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical form used for manifests and digests; parse_config round-trips it.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& doc);

// Applies a sweep value to a copy of the config. Throws ConfigError for
// unknown parameters or non-integral counts.
SimConfig with_parameter(const SimConfig& base, const std::string& parameter, double value);

std::string to_string(Target t);
std::string to_string(EffectDist d);

}  // namespace prsclt
