#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conservation.hpp"
#include "entropy.hpp"
#include "pivotal.hpp"
#include "verification.hpp"
#include "walk.hpp"

namespace dimcons {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceParams {
    std::uint64_t seed = 1;
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
};

namespace detail {

inline std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << std::fixed << v;
    auto s = os.str();
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }
inline bool within_rel(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

/// The Schottky-supported decomposition used for the pivotal criteria: lambda uniform on 200
/// certified words of length 81, lambda* = SRW on F_2, pi_0 = SRW x SRW, alpha = 1/2.
inline SchottkyDecomposition pivotal_reference_decomposition(std::uint64_t seed) {
    const PivotalConstants k;
    const auto S = construct_schottky_set(2, 200, static_cast<std::size_t>(k.D), k.C0, seed);
    const auto srw = FactorMeasure::srw(2);
    return {0.5, FactorMeasure::uniform(2, S), srw, MeasureSpec::product(srw, srw)};
}

class AcceptanceContext {
public:
    explicit AcceptanceContext(std::uint64_t seed) : seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

    const PivotalReport& pivotal() {
        if (!pivotal_) pivotal_ = pivotal_stats_and_entropy_gap(pivotal_reference_decomposition(seed_), {}, {{200, 400, 800}, 1000, seed_});
        return *pivotal_;
    }

private:
    std::uint64_t seed_;
    std::optional<PivotalReport> pivotal_;
};

inline void criterion_drift(AcceptanceContext& ctx, CriterionResult& r) {
    const auto start = std::chrono::steady_clock::now();
    const auto a = drift_estimate(FactorMeasure::srw(3), 20'000, 200, ctx.seed());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto b = drift_estimate(FactorMeasure::lazy_srw(2, 1.0 / 3.0), 20'000, 200, ctx.seed() ^ 0x1A2Bull);
    r.passed = within(a.estimate, 2.0 / 3.0, 0.01) && secs < 10.0 && within(b.estimate, 1.0 / 3.0, 0.01);
    r.detail = "SRW F_3 " + fmt(a.estimate) + " vs 0.6667 (" + fmt(secs, 2) + " s); LazySRW F_2 " + fmt(b.estimate) +
               " vs 0.3333";
}

inline void criterion_entropy(AcceptanceContext& ctx, CriterionResult& r) {
    const auto srw = FactorMeasure::srw(3);
    const auto lazy = FactorMeasure::lazy_srw(2, 1.0 / 3.0);
    const auto es = entropy_rate(srw, {EntropyMethod::ExactRadial, 2500});
    const auto el = entropy_rate(lazy, {EntropyMethod::ExactRadial, 2500});
    const bool exact = within(es.estimate, 2.0 / 3.0 * std::log(5.0), 5e-3) && within(el.estimate, std::log(3.0) / 3.0, 5e-3);
    bool agree = true;
    std::string mc;
    for (const auto* mu : {&srw, &lazy}) {
        const std::size_t n = 400;
        const auto plug = entropy_rate(*mu, {EntropyMethod::McPlugin, n, 2000, ctx.seed()});
        const auto ref = entropy_rate(*mu, {EntropyMethod::ExactRadial, n});
        const double z = std::abs(plug.estimate - ref.average) / plug.std_error;
        agree = agree && z <= 3.0;
        mc += " " + fmt(plug.estimate) + "+-" + fmt(plug.std_error) + " vs H_n/n " + fmt(ref.average) + ";";
    }
    r.passed = exact && agree;
    r.detail = "exact-radial " + fmt(es.estimate, 5) + " vs " + fmt(2.0 / 3.0 * std::log(5.0), 5) + ", " +
               fmt(el.estimate, 5) + " vs " + fmt(std::log(3.0) / 3.0, 5) + "; mc-plugin (n=400):" + mc;
}

inline void criterion_single_dimension(AcceptanceContext& ctx, CriterionResult& r) {
    const auto samples = boundary_samples(FactorMeasure::srw(2), 24, 100'000, ctx.seed());
    const auto fit = dimension_fit(samples);
    const auto exact = exact_dimension_fit(2, samples.front(), 2, 22);
    const double target = std::log(3.0);
    r.passed = within_rel(fit.slope, target, 0.05) && within(exact.slope, target, 1e-6);
    r.detail = "sampled slope " + fmt(fit.slope) + " vs " + fmt(target) + " (window j=" +
               std::to_string(fit.scales.front()) + ".." + std::to_string(fit.scales.back()) + "); exact slope error " +
               fmt(std::abs(exact.slope - target), 10);
}

inline void criterion_conditional_dimension(AcceptanceContext& ctx, CriterionResult& r) {
    const auto start = std::chrono::steady_clock::now();
    const MeasureSpec diag = MeasureSpec::diagonal_push(FactorMeasure::srw(3));
    const MeasureSpec noise = MeasureSpec::noise_mixture(0.0, FactorMeasure::srw(2));
    const double target = std::log(5.0) - 0.5 * std::log(3.0);
    ConditionalDimensionParams p;
    bool ok = true;
    std::string d = "DiagonalPush(SRW F_3):";
    for (std::uint64_t e = 0; e < 3; ++e) {
        p.seed = ctx.seed() ^ mix64(0xC0DEull + e);
        const auto eta = sample_eta(diag, p.eta_depth, ctx.seed() ^ mix64(0xE7A0ull + e));
        const auto rep = conditional_dimension_estimate(diag, eta, p);
        ok = ok && within_rel(rep.fit.slope, target, 0.10);
        d += " " + fmt(rep.fit.slope);
    }
    d += " vs " + fmt(target) + "; NoiseMixture(0):";
    for (std::uint64_t e = 0; e < 2; ++e) {
        p.seed = ctx.seed() ^ mix64(0xC1DEull + e);
        const auto eta = sample_eta(noise, p.eta_depth, ctx.seed() ^ mix64(0xE8A0ull + e));
        const auto rep = conditional_dimension_estimate(noise, eta, p);
        ok = ok && within(rep.fit.slope, 0.0, 0.05);
        d += " " + fmt(rep.fit.slope);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = ok && secs < 600.0;
    r.detail = d + " vs 0 (" + fmt(secs, 1) + " s)";
}

inline void criterion_conservation(AcceptanceContext& ctx, CriterionResult& r) {
    ConservationParams p;
    p.depth = 16;
    p.seed = ctx.seed();
    bool ok = true;
    std::string d;
    const auto srw2 = FactorMeasure::srw(2);
    {
        const auto rep = dimension_conservation_report(MeasureSpec::diagonal_push(FactorMeasure::srw(3)), p);
        const double target = std::log(5.0) + 0.5 * std::log(3.0);
        ok = ok && within_rel(rep.joint.slope, target, 0.10);
        d += "Diag: dim " + fmt(rep.joint.slope) + " vs " + fmt(target) + ", residual " + fmt(rep.residual) + "; ";
    }
    for (double rho : {0.0, 0.5, 1.0}) {
        const MeasureSpec pi = MeasureSpec::noise_mixture(rho, srw2);
        auto q = p;
        if (rho == 0.5) {
            const auto h = extrapolated_entropy_rate(pi, {6, 7, 8, 9, 10, 11, 12}, 400, ctx.seed() ^ 0xE27ull);
            q.joint_entropy = Reference{h.rate, "empirical: extrapolated entropy increments"};
        }
        const auto rep = dimension_conservation_report(pi, q);
        const auto target = rep.theory ? rep.theory->joint_dimension() : std::nullopt;
        ok = ok && target && within_rel(rep.joint.slope, *target, 0.10) && std::abs(rep.residual) <= 0.1;
        d += "rho=" + fmt(rho, 1) + ": dim " + fmt(rep.joint.slope) + " vs " + (target ? fmt(*target) : "n/a") +
             ", residual " + fmt(rep.residual) + "; ";
    }
    r.passed = ok;
    r.detail = d;
}

inline void criterion_entropy_gap(AcceptanceContext& ctx, CriterionResult& r) {
    const MeasureSpec pi = MeasureSpec::noise_mixture(0.5, FactorMeasure::srw(2));
    const auto c = conditional_entropy_estimate(pi, 20, 2000, ctx.seed() ^ 0x6A9ull);
    const double lower = c.estimate - 2.3263478740408408 * c.std_error;
    const auto& piv = ctx.pivotal();
    r.passed = lower >= 0.05 && piv.gap_bound > 0.0;
    r.detail = "H(w_20|w*_20)/20 >= " + fmt(c.estimate) + " (99% lower " + fmt(lower) + "); gap bound " +
               fmt(piv.gap_bound) + " = " + fmt(piv.kappa_hat) + " log(0.98 * " +
               std::to_string(piv.plan.schottky.certificate.S.size()) + ")";
}

inline void criterion_pivotal(AcceptanceContext& ctx, CriterionResult& r) {
    const auto d = pivotal_reference_decomposition(ctx.seed());
    const PivotalConstants k;
    const auto plan = plan_coupling(d, k);
    const auto& S = plan.schottky.certificate.S;
    std::size_t states = 0, violations = 0;
    Rng rng(ctx.seed() ^ 0xA0D1ull);
    for (int t = 0; t < 1000; ++t) {
        const auto cs = sample_coupling(d, plan, 200, rng);
        const auto tr = pivotal_times(materialize(S, cs.s, cs.u), k, true);
        states += tr.audit.states;
        violations += tr.audit.violations;
    }
    const auto inj = check_endpoint_injectivity(4);
    const auto& piv = ctx.pivotal();
    std::string tails;
    for (const auto& st : piv.per_time) tails += " n=" + std::to_string(st.n) + ":" + fmt(st.tail_frequency);
    r.passed = violations == 0 && states > 0 && inj.passed && piv.kappa_hat > 0.0 && piv.tail_decreasing;
    r.detail = "audit " + std::to_string(violations) + " violations in " + std::to_string(states) +
               " states of 1000 traces; " + inj.detail + "; kappa_hat " + fmt(piv.kappa_hat) + ", P(#P <= kappa n):" + tails;
}

inline void criterion_geometry(AcceptanceContext&, CriterionResult& r) {
    const std::vector<CheckResult> checks{check_shadow_ball_sandwich(12), check_chain_shadow_oracle(12),
                                          check_rn_cocycle(), check_doob_cylinder_identity()};
    r.passed = true;
    for (const auto& c : checks) {
        r.passed = r.passed && c.passed;
        r.detail += c.name + ": " + c.detail + "; ";
    }
}

} // namespace detail

inline const std::vector<std::pair<int, std::string>>& acceptance_titles() {
    static const std::vector<std::pair<int, std::string>> titles{
        {1, "drift closed forms"},
        {2, "entropy closed forms"},
        {3, "single-factor dimension"},
        {4, "conditional dimension"},
        {5, "product dimension and conservation"},
        {6, "entropy gap"},
        {7, "pivotal machinery"},
        {8, "geometry oracle suite"},
    };
    return titles;
}

/// Runs the selected criteria; `on_result` sees each result as soon as it is known.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceParams& p = {},
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
    using Fn = void (*)(detail::AcceptanceContext&, CriterionResult&);
    static const Fn fns[] = {detail::criterion_drift,          detail::criterion_entropy,
                             detail::criterion_single_dimension, detail::criterion_conditional_dimension,
                             detail::criterion_conservation,   detail::criterion_entropy_gap,
                             detail::criterion_pivotal,        detail::criterion_geometry};
    detail::AcceptanceContext ctx(p.seed);
    std::vector<CriterionResult> out;
    for (int id : p.criteria) {
        if (id < 1 || id > 8) throw ConfigError("acceptance criteria are numbered 1..8");
        CriterionResult r;
        r.id = id;
        r.title = acceptance_titles()[static_cast<std::size_t>(id - 1)].second;
        const auto start = std::chrono::steady_clock::now();
        try {
            fns[id - 1](ctx, r);
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

/// The fast suite plus every acceptance criterion as a check.
inline SelfTestReport full_self_test(std::uint64_t seed = 1) {
    SelfTestReport r = fast_self_test();
    r.level = "full";
    for (const auto& c : run_acceptance({seed, {1, 2, 3, 4, 5, 6, 7, 8}}))
        r.checks.push_back({"criterion " + std::to_string(c.id) + ": " + c.title, c.passed, c.detail, c.seconds});
    return r;
}

} // namespace dimcons
