#include "prsclt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "prsclt/errors.hpp"

namespace prsclt {

using nlohmann::json;

namespace {

// Object view that records its dotted path and rejects unknown keys.
class Section {
public:
    Section(const json& obj, std::string path, std::set<std::string> allowed) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
        for (const auto& [key, _] : obj_.items())
            if (!allowed.count(key)) throw ConfigError(field(key), "unknown key");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
    const json& at(const std::string& key) const { return obj_.at(key); }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key) const {
        if (!has(key)) throw ConfigError(field(key), "required field missing");
        const json& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(field(key), "expected a finite number");
        return d;
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
    std::optional<double> opt_number(const std::string& key) const {
        return has(key) ? std::optional<double>(number(key)) : std::nullopt;
    }

    long integer(const std::string& key) const {
        if (!has(key)) throw ConfigError(field(key), "required field missing");
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
        return v.get<long>();
    }
    long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) const {
        if (!has(key)) throw ConfigError(field(key), "required field missing");
        const json& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }

    std::optional<Range> range(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        const json& v = obj_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(field(key), "expected [lo, hi]");
        Range r{v[0].get<double>(), v[1].get<double>()};
        if (!(r.first <= r.second)) throw ConfigError(field(key), "lo exceeds hi");
        return r;
    }

private:
    const json& obj_;
    std::string path_;
};

template <typename E>
E pick(const std::string& field, const std::string& value, std::initializer_list<std::pair<const char*, E>> options) {
    std::string names;
    for (const auto& [name, e] : options) {
        if (value == name) return e;
        names += names.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(field, "unknown value '" + value + "' (expected one of: " + names + ")");
}

EstimatorKind parse_estimator(const std::string& field, const std::string& v) {
    return pick<EstimatorKind>(field, v,
                               {{"marginal", EstimatorKind::marginal},
                                {"reference_ridge", EstimatorKind::reference_ridge},
                                {"ridge", EstimatorKind::ridge}});
}

Target parse_target(const std::string& field, const std::string& v) {
    return pick<Target>(field, v,
                        {{"individual", Target::individual},
                         {"accuracy", Target::accuracy},
                         {"quadratic_form", Target::quadratic_form}});
}

void parse_covariance(const json& doc, SimConfig& sim) {
    if (!doc.contains("covariance")) return;
    Section s(doc.at("covariance"), "covariance", {"kind", "rho", "block_size", "path", "mask"});
    const std::string kind = s.string("kind", "identity");
    if (kind == "identity") {
        sim.cov_spec = IdentityCov{};
    } else if (kind == "ar1") {
        sim.cov_spec = Ar1Cov{s.number("rho")};
    } else if (kind == "block_ar1") {
        sim.cov_spec = BlockAr1Cov{static_cast<int>(s.integer("block_size")), s.number("rho")};
    } else if (kind == "file") {
        sim.cov_spec = FileCov{s.string("path")};
    } else {
        throw ConfigError(s.field("kind"), "unknown value '" + kind + "' (expected identity, ar1, block_ar1 or file)");
    }
    if (s.has("mask")) {
        Section m(s.at("mask"), "covariance.mask", {"kind", "seed", "path"});
        const std::string mk = m.string("kind", "first");
        if (mk == "first") {
            sim.mask_spec = FirstM{0};
        } else if (mk == "random") {
            sim.mask_spec = RandomMask{0, m.unsigned64("seed", 0)};
        } else if (mk == "file") {
            sim.mask_spec = FileMask{m.string("path")};
        } else {
            throw ConfigError(m.field("kind"), "unknown value '" + mk + "' (expected first, random or file)");
        }
    }
}

void parse_population(const json& doc, SimConfig& sim) {
    if (!doc.contains("population")) throw ConfigError("population", "required section missing");
    Section s(doc.at("population"), "population",
              {"n", "n_z", "n_w", "p", "m", "h2", "h2_z", "sigma_beta2", "lambda", "sigma_eps2", "sigma_eps_z2"});
    PopulationParams& pp = sim.params;
    pp.n = s.integer("n");
    pp.p = s.integer("p");
    pp.m = s.integer("m", pp.p);
    pp.n_z = s.integer("n_z", 0);
    pp.n_w = s.integer("n_w", 0);
    pp.h2_beta = s.number("h2", 0.5);
    pp.h2_beta_z = s.number("h2_z", pp.h2_beta);
    pp.sigma_beta2 = s.number("sigma_beta2", 1.0);
    pp.lambda = s.number("lambda", 1.0);
    pp.sigma_eps2 = s.opt_number("sigma_eps2");
    pp.sigma_eps_z2 = s.opt_number("sigma_eps_z2");
    try {
        pp.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError("", e.what());
    }
    if (auto* f = std::get_if<FirstM>(&sim.mask_spec)) f->m = static_cast<int>(pp.m);
    if (auto* r = std::get_if<RandomMask>(&sim.mask_spec)) r->m = static_cast<int>(pp.m);
}

void parse_simulation(const json& doc, SimConfig& sim) {
    if (!doc.contains("simulation")) return;
    Section s(doc.at("simulation"), "simulation",
              {"replications", "master_seed", "entry_dist", "maf", "effect_dist", "estimator", "optimal_lambda",
               "target", "test_point", "test_point_index", "redraw_beta", "freeze_panel", "workers"});
    sim.replications = s.integer("replications", 1);
    if (sim.replications < 1) throw ConfigError(s.field("replications"), "must be at least 1");
    sim.master_seed = s.unsigned64("master_seed", 0);
    sim.entry_dist.kind = pick<EntryKind>(s.field("entry_dist"), s.string("entry_dist", "gaussian"),
                                          {{"gaussian", EntryKind::gaussian},
                                           {"rademacher", EntryKind::rademacher},
                                           {"genotype", EntryKind::genotype}});
    if (sim.entry_dist.kind == EntryKind::genotype) {
        sim.entry_dist.maf = s.number("maf");
        if (!(sim.entry_dist.maf > 0.0 && sim.entry_dist.maf < 1.0))
            throw ConfigError(s.field("maf"), "must lie in (0, 1)");
    } else if (s.has("maf")) {
        throw ConfigError(s.field("maf"), "only valid with entry_dist genotype");
    }
    sim.effect_dist = pick<EffectDist>(s.field("effect_dist"), s.string("effect_dist", "gaussian"),
                                       {{"gaussian", EffectDist::gaussian}, {"two_point", EffectDist::two_point}});
    sim.estimator = parse_estimator(s.field("estimator"), s.string("estimator", "marginal"));
    sim.use_optimal_lambda = s.boolean("optimal_lambda", false);
    sim.target = parse_target(s.field("target"), s.string("target", "accuracy"));
    sim.test_point = pick<TestPoint>(s.field("test_point"), s.string("test_point", "random"),
                                     {{"random", TestPoint::random}, {"basis", TestPoint::basis}});
    sim.test_point_index = s.integer("test_point_index", 0);
    if (s.has("redraw_beta")) sim.redraw_beta = s.boolean("redraw_beta", false);
    sim.freeze_panel = s.boolean("freeze_panel", false);
    sim.workers = static_cast<int>(s.integer("workers", 0));
    if (sim.workers < 0) throw ConfigError(s.field("workers"), "must be nonnegative");
}

std::vector<LawRequest> parse_laws(const json& doc, const SimConfig& sim) {
    if (!doc.contains("laws")) return {{sim.estimator, sim.target, sim.use_optimal_lambda}};
    const json& arr = doc.at("laws");
    if (!arr.is_array() || arr.empty()) throw ConfigError("laws", "expected a nonempty array");
    std::vector<LawRequest> laws;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Section s(arr[i], "laws[" + std::to_string(i) + "]", {"estimator", "level", "optimal_lambda"});
        LawRequest law;
        law.estimator = parse_estimator(s.field("estimator"), s.string("estimator"));
        law.level = parse_target(s.field("level"), s.string("level"));
        law.use_optimal_lambda = s.boolean("optimal_lambda", false);
        laws.push_back(law);
    }
    return laws;
}

std::optional<VerifySpec> parse_verify(const json& doc) {
    if (!doc.contains("verify")) return std::nullopt;
    Section s(doc.at("verify"), "verify",
              {"ks_max", "ks_fitted_max", "variance_ratio", "mean_sd_multiple", "coverage", "naive_coverage_max",
               "ci_level"});
    VerifySpec v;
    v.ks_max = s.opt_number("ks_max");
    v.ks_fitted_max = s.opt_number("ks_fitted_max");
    v.variance_ratio = s.range("variance_ratio");
    v.mean_sd_multiple = s.opt_number("mean_sd_multiple");
    v.coverage = s.range("coverage");
    v.naive_coverage_max = s.opt_number("naive_coverage_max");
    v.ci_level = s.number("ci_level", 0.95);
    if (!(v.ci_level > 0.0 && v.ci_level < 1.0)) throw ConfigError(s.field("ci_level"), "must lie in (0, 1)");
    return v;
}

std::optional<SweepSpec> parse_sweep(const json& doc) {
    if (!doc.contains("sweep")) return std::nullopt;
    Section s(doc.at("sweep"), "sweep", {"parameter", "values"});
    SweepSpec sw;
    sw.parameter = s.string("parameter");
    if (!s.has("values") || !s.at("values").is_array()) throw ConfigError(s.field("values"), "expected an array");
    for (const auto& v : s.at("values")) {
        if (!v.is_number()) throw ConfigError(s.field("values"), "expected numbers");
        sw.values.push_back(v.get<double>());
    }
    return sw;
}

}  // namespace

std::string to_string(Target t) {
    switch (t) {
        case Target::individual: return "individual";
        case Target::accuracy: return "accuracy";
        case Target::quadratic_form: return "quadratic_form";
    }
    return "";
}

std::string to_string(EffectDist d) { return d == EffectDist::gaussian ? "gaussian" : "two_point"; }

SimConfig sim_config_from_json(const json& doc) {
    Section(doc, "", {"covariance", "population", "simulation", "laws", "verify", "sweep"});
    SimConfig sim;
    parse_covariance(doc, sim);
    parse_population(doc, sim);
    parse_simulation(doc, sim);
    return sim;
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    RunConfig rc;
    rc.sim = sim_config_from_json(doc);
    rc.laws = parse_laws(doc, rc.sim);
    rc.verify = parse_verify(doc);
    rc.sweep = parse_sweep(doc);
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

json to_json(const SimConfig& sim) {
    json cov;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, IdentityCov>) {
                cov["kind"] = "identity";
            } else if constexpr (std::is_same_v<T, Ar1Cov>) {
                cov = {{"kind", "ar1"}, {"rho", c.rho}};
            } else if constexpr (std::is_same_v<T, BlockAr1Cov>) {
                cov = {{"kind", "block_ar1"}, {"block_size", c.block_size}, {"rho", c.rho}};
            } else {
                cov = {{"kind", "file"}, {"path", c.path}};
            }
        },
        sim.cov_spec);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FirstM>) {
                cov["mask"] = {{"kind", "first"}};
            } else if constexpr (std::is_same_v<T, RandomMask>) {
                cov["mask"] = {{"kind", "random"}, {"seed", m.seed}};
            } else {
                cov["mask"] = {{"kind", "file"}, {"path", m.path}};
            }
        },
        sim.mask_spec);

    const PopulationParams& pp = sim.params;
    json pop = {{"n", pp.n},         {"n_z", pp.n_z},       {"n_w", pp.n_w},
                {"p", pp.p},         {"m", pp.m},           {"h2", pp.h2_beta},
                {"h2_z", pp.h2_beta_z}, {"sigma_beta2", pp.sigma_beta2}, {"lambda", pp.lambda}};
    if (pp.sigma_eps2) pop["sigma_eps2"] = *pp.sigma_eps2;
    if (pp.sigma_eps_z2) pop["sigma_eps_z2"] = *pp.sigma_eps_z2;

    json simj = {{"replications", sim.replications},
                 {"master_seed", sim.master_seed},
                 {"entry_dist", to_string(sim.entry_dist.kind)},
                 {"effect_dist", to_string(sim.effect_dist)},
                 {"estimator", to_string(sim.estimator)},
                 {"optimal_lambda", sim.use_optimal_lambda},
                 {"target", to_string(sim.target)},
                 {"test_point", sim.test_point == TestPoint::random ? "random" : "basis"},
                 {"test_point_index", sim.test_point_index},
                 {"freeze_panel", sim.freeze_panel},
                 {"workers", sim.workers}};
    if (sim.entry_dist.kind == EntryKind::genotype) simj["maf"] = sim.entry_dist.maf;
    if (sim.redraw_beta) simj["redraw_beta"] = *sim.redraw_beta;
    return {{"covariance", cov}, {"population", pop}, {"simulation", simj}};
}

json to_json(const RunConfig& rc) {
    json doc = to_json(rc.sim);
    json laws = json::array();
    for (const auto& l : rc.laws)
        laws.push_back({{"estimator", to_string(l.estimator)},
                        {"level", to_string(l.level)},
                        {"optimal_lambda", l.use_optimal_lambda}});
    doc["laws"] = laws;
    if (rc.verify) {
        const VerifySpec& v = *rc.verify;
        json vj = {{"ci_level", v.ci_level}};
        if (v.ks_max) vj["ks_max"] = *v.ks_max;
        if (v.ks_fitted_max) vj["ks_fitted_max"] = *v.ks_fitted_max;
        if (v.variance_ratio) vj["variance_ratio"] = {v.variance_ratio->first, v.variance_ratio->second};
        if (v.mean_sd_multiple) vj["mean_sd_multiple"] = *v.mean_sd_multiple;
        if (v.coverage) vj["coverage"] = {v.coverage->first, v.coverage->second};
        if (v.naive_coverage_max) vj["naive_coverage_max"] = *v.naive_coverage_max;
        doc["verify"] = vj;
    }
    if (rc.sweep) doc["sweep"] = {{"parameter", rc.sweep->parameter}, {"values", rc.sweep->values}};
    return doc;
}

SimConfig with_parameter(const SimConfig& base, const std::string& parameter, double value) {
    SimConfig c = base;
    PopulationParams& pp = c.params;
    auto count = [&](long& slot) {
        if (value != std::floor(value) || value < 0) throw ConfigError("sweep.values", parameter + " needs integers");
        slot = static_cast<long>(value);
    };
    if (parameter == "lambda") {
        pp.lambda = value;
    } else if (parameter == "h2") {
        pp.h2_beta = value;
        pp.h2_beta_z = value;
    } else if (parameter == "h2_z") {
        pp.h2_beta_z = value;
    } else if (parameter == "sigma_beta2") {
        pp.sigma_beta2 = value;
    } else if (parameter == "n") {
        count(pp.n);
    } else if (parameter == "n_z") {
        count(pp.n_z);
    } else if (parameter == "n_w") {
        count(pp.n_w);
    } else if (parameter == "m") {
        count(pp.m);
        if (auto* f = std::get_if<FirstM>(&c.mask_spec)) f->m = static_cast<int>(pp.m);
        if (auto* r = std::get_if<RandomMask>(&c.mask_spec)) r->m = static_cast<int>(pp.m);
    } else {
        throw ConfigError("sweep.parameter",
                          "unknown parameter '" + parameter + "' (expected lambda, h2, h2_z, sigma_beta2, n, n_z, n_w or m)");
    }
    return c;
}

}  // namespace prsclt
