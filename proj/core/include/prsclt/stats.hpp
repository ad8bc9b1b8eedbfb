#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace prsclt {

enum class Comparator { standard_normal, fitted_normal };

std::string to_string(Comparator c);

struct KsReport {
    double statistic = 0.0;  // sup-distance D ∈ [0, 1]
    long sample_size = 0;
    Comparator comparator = Comparator::standard_normal;
    double pass_threshold = 1.0;

    bool passed() const { return statistic <= pass_threshold; }
};

void to_json(nlohmann::json& j, const KsReport& r);

// Requires R ≥ 20 finite values.
KsReport ks_to_standard_normal(std::span<const double> standardized, double pass_threshold = 1.0);
// Compares against N(mean, var) estimated from the sample itself.
KsReport ks_to_fitted_normal(std::span<const double> sample, double pass_threshold = 1.0);

// Fraction of raw[i] inside [lo_i, hi_i].
double coverage(std::span<const double> raw, std::span<const std::pair<double, double>> intervals);
double coverage(std::span<const double> raw, std::pair<double, double> interval);

// Unbiased sample variance over analytic_sd².
double variance_ratio(std::span<const double> raw, double analytic_sd);

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

}  // namespace prsclt
