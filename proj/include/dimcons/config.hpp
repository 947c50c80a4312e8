#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "measure.hpp"

namespace dimcons {

/// Free-group step law: SRW on F_rank, lazy when hold > 0.
struct FactorConfig {
    int rank = 2;
    double hold = 0.0;

    FactorMeasure build() const { return hold > 0.0 ? FactorMeasure::lazy_srw(rank, hold) : FactorMeasure::srw(rank); }
    friend bool operator==(const FactorConfig&, const FactorConfig&) = default;
};

/// variant: "factor", "product", "noise-mixture" or "diagonal-push".
struct MeasureConfig {
    std::string variant = "factor";
    FactorConfig factor{};
    FactorConfig second{};  // product only
    double rho = 0.5;       // noise-mixture only

    bool is_factor() const { return variant == "factor"; }
    FactorMeasure build_factor() const;
    MeasureSpec build_product() const;
    friend bool operator==(const MeasureConfig&, const MeasureConfig&) = default;
};

struct ExperimentConfig {
    std::string experiment = "drift";
    MeasureConfig measure{};
    std::uint64_t seed = 1;
    std::size_t n = 1000;
    std::size_t trials = 200;
    std::string method = "exact-radial";  // entropy: exact-radial, mc-plugin, extrapolated, conditional
    std::vector<std::size_t> times{6, 7, 8, 9, 10, 11, 12};  // extrapolated entropy
    std::size_t samples = 100'000;
    std::size_t depth = 24;
    std::size_t j_min = 2;
    std::size_t j_max = 0;  // 0: chosen from the depth
    std::size_t etas = 3;
    std::size_t eta_depth = 128;
    std::size_t conditional_samples = 50'000;
    std::size_t conditional_depth = 24;
    double alpha = 0.5;                                   // pivotal: weight of the Schottky product component
    std::size_t schottky_size = 200;
    std::vector<std::size_t> pivotal_times{200, 400, 800};
    double kappa_quantile = 0.1;
    std::string level = "fast";  // self-test
    std::string out = "results";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::set<std::string>& experiment_names() {
    static const std::set<std::string> names{"drift",        "entropy", "dimension", "conditional-dimension",
                                             "conservation", "pivotal", "self-test"};
    return names;
}

inline FactorMeasure MeasureConfig::build_factor() const {
    if (!is_factor()) throw ConfigError("measure.variant: '" + variant + "' is not a single-factor measure");
    return factor.build();
}

inline MeasureSpec MeasureConfig::build_product() const {
    if (variant == "product") return MeasureSpec::product(factor.build(), second.build());
    if (variant == "noise-mixture") return MeasureSpec::noise_mixture(rho, factor.build());
    if (variant == "diagonal-push") return MeasureSpec::diagonal_push(factor.build());
    throw ConfigError("measure.variant: '" + variant + "' is not a measure on a product");
}

namespace detail {

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
    throw ConfigError("config." + field + ": " + what);
}

inline void check_keys(const nlohmann::json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) field_error(where.empty() ? "(root)" : where, "must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown field");
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const std::string& where, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        field_error(where.empty() ? key : where + "." + key, "has the wrong type");
    }
}

} // namespace detail

inline nlohmann::json to_json(const FactorConfig& f) { return {{"rank", f.rank}, {"hold", f.hold}}; }

inline nlohmann::json to_json(const MeasureConfig& m) {
    return {{"variant", m.variant}, {"factor", to_json(m.factor)}, {"second", to_json(m.second)}, {"rho", m.rho}};
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"experiment", c.experiment},
            {"measure", to_json(c.measure)},
            {"seed", c.seed},
            {"n", c.n},
            {"trials", c.trials},
            {"method", c.method},
            {"times", c.times},
            {"samples", c.samples},
            {"depth", c.depth},
            {"j_min", c.j_min},
            {"j_max", c.j_max},
            {"etas", c.etas},
            {"eta_depth", c.eta_depth},
            {"conditional_samples", c.conditional_samples},
            {"conditional_depth", c.conditional_depth},
            {"alpha", c.alpha},
            {"schottky_size", c.schottky_size},
            {"pivotal_times", c.pivotal_times},
            {"kappa_quantile", c.kappa_quantile},
            {"level", c.level},
            {"out", c.out}};
}

inline FactorConfig factor_from_json(const nlohmann::json& j, const std::string& where) {
    detail::check_keys(j, where, {"rank", "hold"});
    FactorConfig f;
    detail::read_field(j, where, "rank", f.rank);
    detail::read_field(j, where, "hold", f.hold);
    if (f.rank < 1 || f.rank > kMaxRank) detail::field_error(where + ".rank", "must be in 1.." + std::to_string(kMaxRank));
    if (!(f.hold >= 0.0 && f.hold < 1.0)) detail::field_error(where + ".hold", "must be in [0, 1)");
    return f;
}

inline MeasureConfig measure_from_json(const nlohmann::json& j) {
    detail::check_keys(j, "measure", {"variant", "factor", "second", "rho"});
    MeasureConfig m;
    detail::read_field(j, "measure", "variant", m.variant);
    detail::read_field(j, "measure", "rho", m.rho);
    if (j.contains("factor")) m.factor = factor_from_json(j.at("factor"), "measure.factor");
    if (j.contains("second")) m.second = factor_from_json(j.at("second"), "measure.second");
    static const std::set<std::string> variants{"factor", "product", "noise-mixture", "diagonal-push"};
    if (!variants.count(m.variant))
        detail::field_error("measure.variant", "must be one of factor, product, noise-mixture, diagonal-push");
    if (!(m.rho >= 0.0 && m.rho <= 1.0)) detail::field_error("measure.rho", "must be in [0, 1]");
    if (m.variant == "diagonal-push" && m.factor.rank < 2) detail::field_error("measure.factor.rank", "diagonal-push needs rank >= 2");
    return m;
}

void validate(const ExperimentConfig& c);

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    detail::check_keys(j, "", {"experiment", "measure", "seed", "n", "trials", "method", "times", "samples", "depth",
                               "j_min", "j_max", "etas", "eta_depth", "conditional_samples", "conditional_depth",
                               "alpha", "schottky_size", "pivotal_times", "kappa_quantile", "level", "out"});
    ExperimentConfig c;
    detail::read_field(j, "", "experiment", c.experiment);
    if (j.contains("measure")) c.measure = measure_from_json(j.at("measure"));
    detail::read_field(j, "", "seed", c.seed);
    detail::read_field(j, "", "n", c.n);
    detail::read_field(j, "", "trials", c.trials);
    detail::read_field(j, "", "method", c.method);
    detail::read_field(j, "", "times", c.times);
    detail::read_field(j, "", "samples", c.samples);
    detail::read_field(j, "", "depth", c.depth);
    detail::read_field(j, "", "j_min", c.j_min);
    detail::read_field(j, "", "j_max", c.j_max);
    detail::read_field(j, "", "etas", c.etas);
    detail::read_field(j, "", "eta_depth", c.eta_depth);
    detail::read_field(j, "", "conditional_samples", c.conditional_samples);
    detail::read_field(j, "", "conditional_depth", c.conditional_depth);
    detail::read_field(j, "", "alpha", c.alpha);
    detail::read_field(j, "", "schottky_size", c.schottky_size);
    detail::read_field(j, "", "pivotal_times", c.pivotal_times);
    detail::read_field(j, "", "kappa_quantile", c.kappa_quantile);
    detail::read_field(j, "", "level", c.level);
    detail::read_field(j, "", "out", c.out);
    validate(c);
    return c;
}

inline void validate(const ExperimentConfig& c) {
    using detail::field_error;
    if (!experiment_names().count(c.experiment))
        field_error("experiment", "unknown experiment '" + c.experiment + "'");
    if (c.n == 0) field_error("n", "must be >= 1");
    if (c.trials == 0) field_error("trials", "must be >= 1");
    static const std::set<std::string> methods{"exact-radial", "mc-plugin", "extrapolated", "conditional"};
    if (!methods.count(c.method)) field_error("method", "must be one of exact-radial, mc-plugin, extrapolated, conditional");
    if (c.samples < 2) field_error("samples", "must be >= 2");
    if (c.depth < 4) field_error("depth", "must be >= 4");
    if (c.j_max != 0 && c.j_max <= c.j_min) field_error("j_max", "must exceed j_min (or be 0)");
    if (c.etas == 0) field_error("etas", "must be >= 1");
    if (c.eta_depth < 8) field_error("eta_depth", "must be >= 8");
    if (c.conditional_samples < 2) field_error("conditional_samples", "must be >= 2");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) field_error("alpha", "must be in (0, 1]");
    if (c.schottky_size < 2) field_error("schottky_size", "must be >= 2");
    if (c.pivotal_times.empty()) field_error("pivotal_times", "must be nonempty");
    if (!(c.kappa_quantile >= 0.0 && c.kappa_quantile < 1.0)) field_error("kappa_quantile", "must be in [0, 1)");
    if (c.level != "fast" && c.level != "full") field_error("level", "must be fast or full");
    if (c.out.empty()) field_error("out", "must be a directory path");
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2); }

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace dimcons
