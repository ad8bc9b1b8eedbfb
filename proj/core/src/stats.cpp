#include "prsclt/stats.hpp"

#include <algorithm>
#include <cmath>

#include "prsclt/errors.hpp"
#include "prsclt/normal.hpp"

namespace prsclt {

std::string to_string(Comparator c) {
    return c == Comparator::standard_normal ? "standard_normal" : "fitted_normal";
}

void to_json(nlohmann::json& j, const KsReport& r) {
    j = {{"statistic", r.statistic},
         {"sample_size", r.sample_size},
         {"comparator", to_string(r.comparator)},
         {"pass_threshold", r.pass_threshold},
         {"pass", r.passed()}};
}

namespace {

std::vector<double> checked_sorted(std::span<const double> x) {
    if (x.size() < 20) throw DataError("KS needs at least 20 values");
    std::vector<double> s(x.begin(), x.end());
    for (double v : s)
        if (std::isnan(v)) throw DataError("KS input contains NaN");
    std::sort(s.begin(), s.end());
    return s;
}

double ks_distance(const std::vector<double>& sorted, double mean, double sd) {
    const double r = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf((sorted[i] - mean) / sd);
        d = std::max({d, (i + 1) / r - f, f - i / r});
    }
    return std::clamp(d, 0.0, 1.0);
}

}  // namespace

KsReport ks_to_standard_normal(std::span<const double> standardized, double pass_threshold) {
    const auto s = checked_sorted(standardized);
    return {ks_distance(s, 0.0, 1.0), static_cast<long>(s.size()), Comparator::standard_normal, pass_threshold};
}

KsReport ks_to_fitted_normal(std::span<const double> sample, double pass_threshold) {
    const auto s = checked_sorted(sample);
    const double sd = std::sqrt(sample_variance(s));
    if (!(sd > 0.0)) throw DataError("fitted normal needs a nonconstant sample");
    return {ks_distance(s, sample_mean(s), sd), static_cast<long>(s.size()), Comparator::fitted_normal,
            pass_threshold};
}

double coverage(std::span<const double> raw, std::span<const std::pair<double, double>> intervals) {
    if (raw.size() != intervals.size()) throw ArgumentError("coverage: raw and intervals differ in length");
    if (raw.empty()) throw ArgumentError("coverage: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < raw.size(); ++i)
        hits += raw[i] >= intervals[i].first && raw[i] <= intervals[i].second;
    return static_cast<double>(hits) / static_cast<double>(raw.size());
}

double coverage(std::span<const double> raw, std::pair<double, double> interval) {
    if (raw.empty()) throw ArgumentError("coverage: empty input");
    std::size_t hits = 0;
    for (double v : raw) hits += v >= interval.first && v <= interval.second;
    return static_cast<double>(hits) / static_cast<double>(raw.size());
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) throw ArgumentError("sample_mean: empty input");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw ArgumentError("sample_variance needs at least 2 values");
    const double mu = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    return ss / static_cast<double>(x.size() - 1);
}

double variance_ratio(std::span<const double> raw, double analytic_sd) {
    if (!(analytic_sd > 0.0) || !std::isfinite(analytic_sd))
        throw ArgumentError("variance_ratio: analytic sd must be positive");
    return sample_variance(raw) / (analytic_sd * analytic_sd);
}

}  // namespace prsclt
