#pragma once

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acceptance.hpp"
#include "config.hpp"
#include "conservation.hpp"
#include "entropy.hpp"
#include "pivotal.hpp"
#include "theory.hpp"
#include "verification.hpp"
#include "walk.hpp"

namespace dimcons {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kEmpiricalOnly = "empirical-only";

/// One line of a result table. Reference values always travel with their provenance.
struct ResultRow {
    std::string section;  // "summary", "scale", "time", "eta", "check", ...
    std::string name;
    std::optional<long long> index;
    double value = 0.0;
    std::optional<double> std_error;
    std::optional<double> reference;
    std::string provenance;
    std::string note;
};

/// Two-column log-radius / log-mass data of one fit.
struct PlotData {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ResultTable {
    std::string experiment;
    std::vector<ResultRow> rows;
    std::vector<PlotData> plots;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> warnings;
    bool passed = true;  // self-test outcome; true for estimators

    void add(ResultRow row) { rows.push_back(std::move(row)); }
    void summarize(const std::string& key, double v) { summary[key] = v; }
};

/// 12 significant digits with a '.' separator, whatever the locale.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string to_csv(const ResultTable& t) {
    std::string out = "section,name,index,value,std_error,reference,provenance,note\r\n";
    for (const auto& r : t.rows) {
        out += csv_field(r.section) + ',' + csv_field(r.name) + ',' + (r.index ? std::to_string(*r.index) : "") + ',' +
               format_number(r.value) + ',' + (r.std_error ? format_number(*r.std_error) : "") + ',' +
               (r.reference ? format_number(*r.reference) : "") + ',' + csv_field(r.provenance) + ',' +
               csv_field(r.note) + "\r\n";
    }
    return out;
}

inline std::string to_dat(const PlotData& p) {
    std::string out = "# " + p.label + "\n# log_radius log_mass\n";
    for (std::size_t i = 0; i < p.x.size(); ++i) out += format_number(p.x[i]) + ' ' + format_number(p.y[i]) + '\n';
    return out;
}

namespace detail {

inline std::optional<double> ref_value(const std::optional<Reference>& r) {
    return r ? std::optional<double>(r->value) : std::nullopt;
}
inline std::string ref_source(const std::optional<Reference>& r) { return r ? r->provenance : kEmpiricalOnly; }

inline DimensionFitParams fit_params(const ExperimentConfig& c) {
    DimensionFitParams p;
    p.j_min = c.j_min;
    p.j_max = c.j_max;
    return p;
}

inline void add_fit(ResultTable& t, const std::string& label, const DimensionFit& f, std::optional<double> reference,
                    const std::string& provenance) {
    for (std::size_t i = 0; i < f.scales.size(); ++i) {
        t.add({"scale", label + ".log_mass", static_cast<long long>(f.scales[i]), f.log_mass[i], std::nullopt,
               std::nullopt, "", "mean count " + format_number(f.mean_count[i])});
    }
    t.add({"summary", label + ".dimension", std::nullopt, f.slope, std::nullopt, reference,
           reference ? provenance : kEmpiricalOnly, "rms residual " + format_number(f.residual)});
    t.summarize(label + ".dimension", f.slope);
    t.plots.push_back({label, f.log_radius, f.log_mass});
    if (!f.warning.empty()) t.warnings.push_back(label + ": " + f.warning);
}

inline std::optional<Reference> factor_dimension_reference(const FactorMeasure& mu) {
    const auto h = closed_form_entropy(mu);
    const auto l = closed_form_drift(mu);
    if (!h || !l || l->value <= 0.0) return std::nullopt;
    return Reference{h->value / l->value, "closed form: h/l"};
}

inline std::optional<Reference> joint_entropy_override(const ExperimentConfig& c, const MeasureSpec& pi) {
    const auto theory = closed_form_theory(pi);
    if (!theory || theory->entropy_joint) return std::nullopt;
    if (!pi.first_marginal().is_radial() || !pi.second_marginal().is_radial()) return std::nullopt;
    const auto h = extrapolated_entropy_rate(pi, c.times, c.trials, c.seed ^ 0xE27ull);
    return Reference{h.rate, "empirical: extrapolated entropy increments"};
}

inline void run_drift(const ExperimentConfig& c, ResultTable& t) {
    if (c.measure.is_factor()) {
        const auto mu = c.measure.build_factor();
        const auto d = drift_estimate(mu, c.n, c.trials, c.seed);
        const auto ref = closed_form_drift(mu);
        t.add({"summary", "drift", std::nullopt, d.estimate, d.std_error, ref_value(ref), ref_source(ref), ""});
        t.summarize("drift", d.estimate);
        return;
    }
    const auto pi = c.measure.build_product();
    const auto d = drift_estimate(pi, c.n, c.trials, c.seed);
    const auto r1 = closed_form_drift(pi.first_marginal());
    const auto r2 = closed_form_drift(pi.second_marginal());
    t.add({"summary", "drift_first", std::nullopt, d.first.estimate, d.first.std_error, ref_value(r1), ref_source(r1), ""});
    t.add({"summary", "drift_second", std::nullopt, d.second.estimate, d.second.std_error, ref_value(r2), ref_source(r2), ""});
    t.summarize("drift_first", d.first.estimate);
    t.summarize("drift_second", d.second.estimate);
}

inline void run_entropy(const ExperimentConfig& c, ResultTable& t) {
    if (c.measure.is_factor()) {
        const auto mu = c.measure.build_factor();
        const auto ref = closed_form_entropy(mu);
        if (c.method == "exact-radial" || c.method == "mc-plugin") {
            const auto m = c.method == "exact-radial" ? EntropyMethod::ExactRadial : EntropyMethod::McPlugin;
            const auto r = entropy_rate(mu, {m, c.n, c.trials, c.seed});
            t.add({"summary", "entropy", std::nullopt, r.estimate, r.std_error, ref_value(ref), ref_source(ref),
                   to_string(m)});
            if (m == EntropyMethod::ExactRadial)
                t.add({"summary", "entropy_average", std::nullopt, r.average, std::nullopt, ref_value(ref),
                       ref_source(ref), "H(mu_n)/n"});
            t.summarize("entropy", r.estimate);
            return;
        }
        throw ConfigError("config.method: '" + c.method + "' needs a product measure");
    }
    const auto pi = c.measure.build_product();
    const auto theory = closed_form_theory(pi);
    const std::optional<double> ref = theory ? theory->entropy_joint : std::nullopt;
    const std::string source = ref ? theory->provenance : kEmpiricalOnly;
    if (c.method == "extrapolated") {
        const auto e = extrapolated_entropy_rate(pi, c.times, c.trials, c.seed);
        for (std::size_t i = 0; i < e.times.size(); ++i)
            t.add({"time", "increment", static_cast<long long>(e.times[i]), e.increment[i], e.increment_std_error[i],
                   std::nullopt, "", "H(pi_n) - H(pi_{n-1})"});
        t.add({"summary", "entropy", std::nullopt, e.rate, e.rate_std_error, ref, source, "extrapolated"});
        t.summarize("entropy", e.rate);
    } else if (c.method == "conditional") {
        const auto e = conditional_entropy_estimate(pi, c.n, c.trials, c.seed);
        std::optional<double> cref;
        if (ref) cref = *ref - theory->entropy_second;
        t.add({"summary", "conditional_entropy", std::nullopt, e.estimate, e.std_error, std::nullopt, kEmpiricalOnly,
               to_string(e.method) + " lower bound on H(w_n | w*_n)/n at finite n"});
        t.add({"summary", "entropy_gap_limit", std::nullopt, cref.value_or(0.0), std::nullopt, cref,
               cref ? source : kEmpiricalOnly, "h(pi) - h(mu*)"});
        t.summarize("conditional_entropy", e.estimate);
    } else {
        const auto m = c.method == "exact-radial" ? EntropyMethod::ExactRadial : EntropyMethod::McPlugin;
        const auto r = entropy_rate(pi, {m, c.n, c.trials, c.seed});
        t.add({"summary", "entropy", std::nullopt, r.estimate, r.std_error, ref, source, to_string(m)});
        t.summarize("entropy", r.estimate);
    }
}

inline void run_dimension(const ExperimentConfig& c, ResultTable& t) {
    const auto fp = fit_params(c);
    if (c.measure.is_factor()) {
        const auto mu = c.measure.build_factor();
        const auto fit = dimension_fit(boundary_samples(mu, c.depth, c.samples, c.seed), fp);
        const auto ref = factor_dimension_reference(mu);
        add_fit(t, "nu", fit, ref_value(ref), ref_source(ref));
        return;
    }
    const auto pi = c.measure.build_product();
    const auto fit = dimension_fit(boundary_samples(pi, c.depth, c.samples, c.seed), fp);
    auto theory = closed_form_theory(pi);
    std::optional<double> ref = theory ? theory->joint_dimension() : std::nullopt;
    add_fit(t, "nu_pi", fit, ref, theory ? theory->provenance : kEmpiricalOnly);
}

inline void run_conditional_dimension(const ExperimentConfig& c, ResultTable& t) {
    const auto pi = c.measure.build_product();
    ConditionalDimensionParams p;
    p.samples = c.conditional_samples;
    p.depth = c.conditional_depth;
    p.eta_depth = c.eta_depth;
    p.fit = fit_params(c);
    MeanAccumulator acc;
    std::optional<double> ref;
    std::string source = kEmpiricalOnly;
    for (std::size_t e = 0; e < c.etas; ++e) {
        p.seed = c.seed ^ mix64(0xC0DEull + e);
        const auto eta = sample_eta(pi, p.eta_depth, c.seed ^ mix64(0xE7A0ull + e));
        const auto r = conditional_dimension_estimate(pi, eta, p);
        if (r.theory) {
            ref = r.theory->value;
            source = r.theory->provenance;
        }
        add_fit(t, "nu_eta" + std::to_string(e), r.fit, ref, source);
        t.rows.back().note += "; eta prefix " + eta.prefix().prefix(12).str();
        acc.add(r.fit.slope);
    }
    t.add({"summary", "conditional_dimension", std::nullopt, acc.mean(), acc.count() > 1 ? std::optional(acc.stderr_of_mean()) : std::nullopt,
           ref, source, "mean over eta"});
    t.summarize("conditional_dimension", acc.mean());
}

inline void run_conservation(const ExperimentConfig& c, ResultTable& t) {
    const auto pi = c.measure.build_product();
    ConservationParams p;
    p.samples = c.samples;
    p.depth = c.depth;
    p.etas = c.etas;
    p.fit = fit_params(c);
    p.seed = c.seed;
    p.conditional.samples = c.conditional_samples;
    p.conditional.depth = c.conditional_depth;
    p.conditional.eta_depth = c.eta_depth;
    p.conditional.fit = p.fit;
    p.joint_entropy = joint_entropy_override(c, pi);
    const auto r = dimension_conservation_report(pi, p);
    const auto& th = r.theory;
    const std::string source = th ? th->provenance : kEmpiricalOnly;
    t.add({"summary", "swapped", std::nullopt, r.swapped ? 1.0 : 0.0, std::nullopt, std::nullopt, "",
           "coordinates reordered so that l >= l*"});
    t.add({"summary", "drift_first", std::nullopt, r.drift_first, std::nullopt, std::nullopt, "", ""});
    t.add({"summary", "drift_second", std::nullopt, r.drift_second, std::nullopt, std::nullopt, "", ""});
    add_fit(t, "nu_pi", r.joint, th ? th->joint_dimension() : std::nullopt, source);
    add_fit(t, "nu_star", r.marginal, th ? th->marginal_dimension() : std::nullopt, source);
    for (std::size_t e = 0; e < r.conditional.size(); ++e)
        add_fit(t, "nu_eta" + std::to_string(e), r.conditional[e].fit, th ? th->conditional_dimension() : std::nullopt, source);
    t.add({"summary", "mean_conditional_dimension", std::nullopt, r.mean_conditional, r.conditional_std_error,
           th ? th->conditional_dimension() : std::nullopt, th && th->conditional_dimension() ? source : kEmpiricalOnly, ""});
    t.add({"summary", "residual", std::nullopt, r.residual, std::nullopt, 0.0, "dimension conservation",
           "dim nu_pi - (dim nu_eta + dim nu_star)"});
    t.summarize("mean_conditional_dimension", r.mean_conditional);
    t.summarize("residual", r.residual);
}

inline void run_pivotal(const ExperimentConfig& c, ResultTable& t) {
    const PivotalConstants k;
    auto decompose = [&]() -> SchottkyDecomposition {
        if (c.measure.variant == "noise-mixture")
            return SchottkyDecomposition::noise_mixture(c.measure.rho, c.measure.factor.build());
        const auto star = c.measure.factor.build();
        const auto S = construct_schottky_set(star.rank(), c.schottky_size, static_cast<std::size_t>(k.D), k.C0, c.seed);
        return {c.alpha, FactorMeasure::uniform(star.rank(), S), star, MeasureSpec::product(star, star)};
    };
    const SchottkyDecomposition d = decompose();
    PivotalStatsParams p;
    p.times = c.pivotal_times;
    p.trials = c.trials;
    p.seed = c.seed;
    p.kappa_quantile = c.kappa_quantile;
    const auto r = pivotal_stats_and_entropy_gap(d, k, p);
    for (const auto& st : r.per_time) {
        const auto n = static_cast<long long>(st.n);
        t.add({"time", "pivots_per_step", n, st.mean_ratio, st.sd_ratio / std::sqrt(static_cast<double>(st.counts.size())),
               std::nullopt, kEmpiricalOnly, "#P_tau(n) / n"});
        t.add({"time", "tail_frequency", n, st.tail_frequency, std::nullopt, std::nullopt, kEmpiricalOnly,
               "share of trials with #P <= kappa_hat n"});
        t.add({"time", "mean_tau", n, st.mean_tau, std::nullopt, std::nullopt, kEmpiricalOnly, ""});
    }
    const auto& cert = r.plan.schottky.certificate;
    t.add({"summary", "schottky_size", std::nullopt, static_cast<double>(cert.S.size()), std::nullopt, std::nullopt, "", ""});
    t.add({"summary", "M", std::nullopt, static_cast<double>(r.plan.schottky.M), std::nullopt, std::nullopt, "", ""});
    t.add({"summary", "beta", std::nullopt, r.plan.beta, std::nullopt, std::nullopt, "", ""});
    t.add({"summary", "flag_probability", std::nullopt, r.plan.flag_probability(), std::nullopt, std::nullopt, "", "alpha^N beta"});
    t.add({"summary", "kappa_hat", std::nullopt, r.kappa_hat, std::nullopt, std::nullopt, kEmpiricalOnly,
           "quantile " + format_number(c.kappa_quantile) + " of #P/n at the first time"});
    t.add({"summary", "tail_decreasing", std::nullopt, r.tail_decreasing ? 1.0 : 0.0, std::nullopt, std::nullopt, "", ""});
    t.add({"summary", "gap_bound", std::nullopt, r.gap_bound, std::nullopt, std::nullopt, kEmpiricalOnly,
           "kappa_hat log((1 - 2 eps) #S)"});
    t.summarize("kappa_hat", r.kappa_hat);
    t.summarize("gap_bound", r.gap_bound);
}

inline void run_self_test(const ExperimentConfig& c, ResultTable& t) {
    const auto report = c.level == "full" ? full_self_test(c.seed) : fast_self_test();
    long long i = 0;
    for (const auto& check : report.checks)
        t.add({"check", check.name, i++, check.passed ? 1.0 : 0.0, std::nullopt, std::nullopt, "", check.detail});
    t.passed = report.passed();
    t.summary["passed"] = t.passed;
}

} // namespace detail

/// Dispatches to the module operation named by the config.
inline ResultTable run_experiment(const ExperimentConfig& c) {
    validate(c);
    ResultTable t;
    t.experiment = c.experiment;
    try {
        if (c.experiment == "drift") detail::run_drift(c, t);
        else if (c.experiment == "entropy") detail::run_entropy(c, t);
        else if (c.experiment == "dimension") detail::run_dimension(c, t);
        else if (c.experiment == "conditional-dimension") detail::run_conditional_dimension(c, t);
        else if (c.experiment == "conservation") detail::run_conservation(c, t);
        else if (c.experiment == "pivotal") detail::run_pivotal(c, t);
        else detail::run_self_test(c, t);
    } catch (const ConfigError&) {
        throw;
    } catch (const NoCertificate& e) {
        throw NoCertificate("experiment " + c.experiment + " on " + c.measure.variant + ": " + e.what());
    } catch (const Error& e) {
        throw Error("experiment " + c.experiment + " on " + c.measure.variant + ": " + e.what());
    }
    return t;
}

struct WrittenFiles {
    std::filesystem::path csv;
    std::filesystem::path metadata;
    std::vector<std::filesystem::path> plots;
};

/// CSV (data), JSON (config echo, summary, versions, wall time) and one .dat per fit.
inline WrittenFiles write_results(const ResultTable& t, const ExperimentConfig& c, double wall_seconds) {
    namespace fs = std::filesystem;
    const fs::path dir(c.out);
    fs::create_directories(dir);
    WrittenFiles w;
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error("cannot write " + p.string());
        out << text;
    };
    w.csv = dir / (t.experiment + ".csv");
    write(w.csv, to_csv(t));
    for (const auto& p : t.plots) {
        w.plots.push_back(dir / (t.experiment + "_" + p.label + ".dat"));
        write(w.plots.back(), to_dat(p));
    }
    nlohmann::json meta{{"tool", "dimcons"},
                        {"version", kToolVersion},
                        {"compiler", __VERSION__},
                        {"threads", thread_count()},
                        {"wall_seconds", wall_seconds},
                        {"config", to_json(c)},
                        {"summary", t.summary},
                        {"warnings", t.warnings},
                        {"csv", w.csv.filename().string()}};
    w.metadata = dir / (t.experiment + ".json");
    write(w.metadata, meta.dump(2) + "\n");
    return w;
}

/// run_experiment followed by write_results.
inline std::pair<ResultTable, WrittenFiles> run_and_write(const ExperimentConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    auto t = run_experiment(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto files = write_results(t, c, secs);
    return {std::move(t), std::move(files)};
}

} // namespace dimcons
