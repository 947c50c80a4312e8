#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "convolution.hpp"
#include "radial.hpp"
#include "walk.hpp"

namespace dimcons {

/// log mu_n(w) for a single factor: radial closed form when available, pruned DP otherwise.
class FactorLogMass {
public:
    FactorLogMass(const FactorMeasure& mu, const std::vector<std::size_t>& times) : mu_(mu) {
        if (!mu_.is_radial()) return;
        RadialChain chain(mu_);
        RadialProfile p = chain.initial();
        std::size_t top = 0;
        for (auto t : times) top = std::max(top, t);
        for (std::size_t k = 0; k <= top; ++k) {
            if (std::find(times.begin(), times.end(), k) != times.end()) profiles_.emplace(k, p);
            if (k < top) p = chain.step(p);
        }
    }

    double operator()(std::size_t n, const Word& w) const {
        if (mu_.is_radial()) {
            const auto it = profiles_.find(n);
            if (it == profiles_.end()) throw Unsupported("time " + std::to_string(n) + " was not precomputed");
            return it->second.log_prob(w);
        }
        return log_convolution_mass(mu_, n, w);
    }

private:
    FactorMeasure mu_;
    std::map<std::size_t, RadialProfile> profiles_;
};

/// log pi_n(w) for a measure on the product, routed through the cheapest exact evaluation.
class JointLogMass {
public:
    enum class Route { Factorized, FirstCoordinate, Diagonal, PairDp };

    JointLogMass(const MeasureSpec& pi, const std::vector<std::size_t>& times)
        : pi_(pi), route_(route_for(pi)), first_(pi.first_marginal(), times), second_(pi.second_marginal(), times) {}

    Route route() const noexcept { return route_; }

    std::string route_name() const {
        switch (route_) {
        case Route::Factorized: return "factorized";
        case Route::FirstCoordinate: return "first-coordinate";
        case Route::Diagonal: return "diagonal";
        case Route::PairDp: return "pair-dp";
        }
        return "?";
    }

    double operator()(std::size_t n, const ProductElement& w) const {
        switch (route_) {
        case Route::Factorized: return first_(n, w.first) + second_(n, w.second);
        case Route::FirstCoordinate:
            return KillLastGenerator(pi_.rank2())(w.first) == w.second ? first_(n, w.first) : -INFINITY;
        case Route::Diagonal: return w.first == w.second ? first_(n, w.first) : -INFINITY;
        case Route::PairDp: return log_convolution_mass(pi_, n, w);
        }
        return -INFINITY;
    }

    /// log pi_n at several targets; the pair DP evaluates them in one pass.
    std::vector<double> many(std::size_t n, const std::vector<ProductElement>& targets) const {
        if (route_ == Route::PairDp) return log_convolution_masses(pi_, n, targets);
        std::vector<double> out;
        for (const auto& t : targets) out.push_back((*this)(n, t));
        return out;
    }

    const FactorLogMass& second() const noexcept { return second_; }

private:
    static Route route_for(const MeasureSpec& pi) {
        switch (pi.kind()) {
        case MeasureSpec::Kind::Product: return Route::Factorized;
        case MeasureSpec::Kind::DiagonalPush: return Route::FirstCoordinate;
        case MeasureSpec::Kind::NoiseMixture:
            if (pi.rho() == 0.0) return Route::Diagonal;
            if (pi.rho() == 1.0) return Route::Factorized;
            return Route::PairDp;
        case MeasureSpec::Kind::Table: return Route::PairDp;
        }
        return Route::PairDp;
    }

    MeasureSpec pi_;
    Route route_;
    FactorLogMass first_;
    FactorLogMass second_;
};

enum class EntropyMethod { ExactRadial, McPlugin };

inline std::string to_string(EntropyMethod m) { return m == EntropyMethod::ExactRadial ? "exact-radial" : "mc-plugin"; }

struct EntropyReport {
    EntropyMethod method = EntropyMethod::ExactRadial;
    std::size_t n = 0;
    double estimate = 0.0;   // exact-radial: H(mu_{n+1}) - H(mu_n); mc-plugin: mean of -log pi_n(w_n)/n
    double std_error = 0.0;  // zero for exact methods
    double average = 0.0;    // exact-radial only: H(mu_n)/n
    std::size_t trials = 0;
};

struct EntropyParams {
    EntropyMethod method = EntropyMethod::ExactRadial;
    std::size_t n = 1000;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
};

namespace detail {

inline EntropyReport exact_radial_report(const FactorMeasure& mu, std::size_t n) {
    if (n == 0) throw ConfigError("entropy needs n >= 1");
    const auto h = radial_entropies(mu, n + 1);
    EntropyReport r;
    r.method = EntropyMethod::ExactRadial;
    r.n = n;
    r.estimate = std::max(0.0, h[n + 1] - h[n]);
    r.average = h[n] / static_cast<double>(n);
    return r;
}

template <typename Measure, typename Eval>
EntropyReport plugin_report(const Measure& spec, const Eval& log_mass, std::size_t n, std::size_t trials,
                            std::uint64_t seed) {
    if (n == 0 || trials == 0) throw ConfigError("mc-plugin needs n >= 1 and trials >= 1");
    const auto values = parallel_map<double>(trials, [&](std::size_t t) {
        Rng rng = Rng::for_trial(seed, t);
        const double lp = log_mass(n, sample_endpoint(spec, n, rng));
        if (!std::isfinite(lp)) throw Error("sampled endpoint has zero evaluated mass");
        return -lp / static_cast<double>(n);
    });
    MeanAccumulator acc;
    for (double v : values) acc.add(v);
    return {EntropyMethod::McPlugin, n, std::max(0.0, acc.mean()), acc.stderr_of_mean(), 0.0, trials};
}

} // namespace detail

inline EntropyReport entropy_rate(const FactorMeasure& mu, const EntropyParams& p) {
    if (p.method == EntropyMethod::ExactRadial) return detail::exact_radial_report(mu, p.n);
    const FactorLogMass eval(mu, {p.n});
    return detail::plugin_report(mu, eval, p.n, p.trials, p.seed);
}

/// Exact-radial on a product is available when pi_n factorizes into radial pieces.
inline EntropyReport entropy_rate(const MeasureSpec& pi, const EntropyParams& p) {
    if (p.method == EntropyMethod::McPlugin) {
        const JointLogMass eval(pi, {p.n});
        return detail::plugin_report(pi, eval, p.n, p.trials, p.seed);
    }
    const JointLogMass probe(pi, {});
    switch (probe.route()) {
    case JointLogMass::Route::Factorized: {
        auto a = detail::exact_radial_report(pi.first_marginal(), p.n);
        const auto b = detail::exact_radial_report(pi.second_marginal(), p.n);
        a.estimate += b.estimate;
        a.average += b.average;
        return a;
    }
    case JointLogMass::Route::FirstCoordinate:
    case JointLogMass::Route::Diagonal: return detail::exact_radial_report(pi.first_marginal(), p.n);
    case JointLogMass::Route::PairDp: break;
    }
    throw Unsupported("exact-radial entropy is not available for " + pi.describe());
}

/// Limit of the radial entropy increments, from a fit of h + a/n + b/n^2 over large n.
inline double radial_entropy_limit(const FactorMeasure& mu, std::size_t n_max = 4000) {
    const auto h = radial_entropies(mu, n_max);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t n = n_max / 4; n <= n_max; n += n_max / 64) {
        const double x = 1.0 / static_cast<double>(n);
        rows.push_back({1.0, x, x * x});
        y.push_back(h[n] - h[n - 1]);
    }
    return std::max(0.0, least_squares(rows, y)[0]);
}

/// Entropy rate from small-n increments H(pi_n) - H(pi_{n-1}) = I(x_n; w_n).
///
/// Each trial contributes the posterior average of log pi_{n-1}(w_n x^{-1}) - log pi_n(w_n)
/// over the last step x given w_n. When both marginals are radial, the same quantity for
/// the product of marginals is subtracted (its mean is known exactly), and only the
/// deficit D_n = inc(mu x mu*) - inc(pi) is extrapolated with D_n = D + a/n.
struct ExtrapolatedEntropy {
    std::vector<std::size_t> times;
    std::vector<double> increment;  // estimates of H(pi_n) - H(pi_{n-1})
    std::vector<double> increment_std_error;
    bool referenced = false;
    double reference_rate = 0.0;  // h(mu) + h(mu*) when referenced, else 0
    double rate = 0.0;
    double rate_std_error = 0.0;
    std::size_t trials = 0;
};

namespace detail {

/// Posterior mean of log P_{n-1}(w x^{-1}) - log P_n(w) over one step x, given log P_{n-1} at w x^{-1}.
template <typename Atoms>
double posterior_increment(const Atoms& atoms, const std::vector<double>& log_prev) {
    double log_now = -INFINITY;
    for (std::size_t k = 0; k < atoms.size(); ++k) log_now = log_sum_exp(log_now, std::log(atoms[k].weight) + log_prev[k]);
    if (!std::isfinite(log_now)) throw Error("sampled endpoint has zero evaluated mass");
    double v = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (log_prev[k] == -INFINITY) continue;
        const double d = log_prev[k] - log_now;
        v += std::exp(std::log(atoms[k].weight) + d) * d;
    }
    return v;
}

inline double factor_increment(const FactorMeasure& mu, const FactorLogMass& f, std::size_t n, const Word& w) {
    std::vector<double> prev;
    for (const auto& a : mu.atoms()) prev.push_back(f(n - 1, w * a.value.inverse()));
    return posterior_increment(mu.atoms(), prev);
}

} // namespace detail

inline ExtrapolatedEntropy extrapolated_entropy_rate(const MeasureSpec& pi, std::vector<std::size_t> times,
                                                     std::size_t trials, std::uint64_t seed) {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.size() < 2) throw ConfigError("extrapolation needs at least 2 distinct times");
    if (times.front() < 2) throw ConfigError("extrapolation times must be >= 2");
    if (trials < 2) throw ConfigError("extrapolation needs at least 2 trials");

    ExtrapolatedEntropy out;
    out.times = times;
    out.trials = trials;
    out.referenced = pi.first_marginal().is_radial() && pi.second_marginal().is_radial();
    if (out.referenced)
        out.reference_rate = radial_entropy_limit(pi.first_marginal()) + radial_entropy_limit(pi.second_marginal());

    std::vector<std::size_t> eval_times;
    for (auto t : times) {
        eval_times.push_back(t - 1);
        eval_times.push_back(t);
    }
    const JointLogMass joint(pi, eval_times);
    const FactorLogMass f1(pi.first_marginal(), eval_times), f2(pi.second_marginal(), eval_times);

    std::vector<std::vector<double>> design;
    for (auto t : times) design.push_back({1.0, 1.0 / static_cast<double>(t)});

    // Per trial: the joint increment at every time, and the deficit being extrapolated.
    const auto per_trial = parallel_map<std::pair<std::vector<double>, std::vector<double>>>(trials, [&](std::size_t t) {
        const auto traj = sample_trajectory(pi, times.back(), seed ^ mix64(t + 1));
        std::vector<double> inc, target;
        for (auto n : times) {
            const auto& w = traj.positions[n];
            std::vector<ProductElement> nbrs;
            for (const auto& a : pi.atoms()) nbrs.push_back(w * a.value.inverse());
            const double j = detail::posterior_increment(pi.atoms(), joint.many(n - 1, nbrs));
            inc.push_back(j);
            if (out.referenced) {
                const double r = detail::factor_increment(pi.first_marginal(), f1, n, w.first) +
                                 detail::factor_increment(pi.second_marginal(), f2, n, w.second);
                target.push_back(r - j);
            } else {
                target.push_back(-j);
            }
        }
        return std::pair{inc, target};
    });

    std::vector<MeanAccumulator> inc(times.size());
    MeanAccumulator rate;
    for (const auto& [v, target] : per_trial) {
        for (std::size_t i = 0; i < v.size(); ++i) inc[i].add(v[i]);
        rate.add(out.reference_rate - least_squares(design, target)[0]);
    }
    for (const auto& a : inc) {
        out.increment.push_back(a.mean());
        out.increment_std_error.push_back(a.stderr_of_mean());
    }
    out.rate = std::max(0.0, rate.mean());
    out.rate_std_error = rate.stderr_of_mean();
    return out;
}

enum class ConditionalMethod { Exact, Refined };

inline std::string to_string(ConditionalMethod m) { return m == ConditionalMethod::Exact ? "exact" : "refined"; }

struct ConditionalEntropyReport {
    ConditionalMethod method = ConditionalMethod::Refined;
    std::size_t n = 0;
    std::size_t trials = 0;
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Estimates H(w_n | w*_n)/n.
///
/// Exact: mean of -log pi_n(w_n, w*_n) + log mu*_n(w*_n); needs the joint mass, so small n only.
/// Refined: mean of -log P(w_n | all second-coordinate steps). Given those steps the first
/// coordinates are independent, so a one-coordinate DP suffices. The result is a lower bound
/// on H(w_n | w*_n)/n, and equals it when the coordinates are independent.
inline ConditionalEntropyReport conditional_entropy_estimate(const MeasureSpec& pi, std::size_t n, std::size_t trials,
                                                             std::uint64_t seed,
                                                             ConditionalMethod method = ConditionalMethod::Refined) {
    if (n == 0 || trials == 0) throw ConfigError("conditional entropy needs n >= 1 and trials >= 1");
    std::vector<double> values;
    if (method == ConditionalMethod::Exact) {
        const JointLogMass joint(pi, {n});
        values = parallel_map<double>(trials, [&](std::size_t t) {
            Rng rng = Rng::for_trial(seed, t);
            const auto w = sample_endpoint(pi, n, rng);
            return (joint.second()(n, w.second) - joint(n, w)) / static_cast<double>(n);
        });
    } else {
        const PackedAlphabet alpha(pi.rank1());
        std::map<Word, PackedStepLaw<1>> given;
        for (const auto& a : pi.atoms()) {
            const double py = pi.second_marginal().mass(a.value.second);
            given[a.value.second].add({&a.value.first}, a.weight / py, {&alpha});
        }
        values = parallel_map<double>(trials, [&](std::size_t t) {
            const auto traj = sample_trajectory(pi, n, seed ^ mix64(t + 1));
            std::vector<const PackedStepLaw<1>*> laws;
            for (const auto& s : traj.steps) laws.push_back(&given.at(s.second));
            const double lp = pruned_log_mass<1>(
                {&alpha}, n, [&](std::size_t k) -> const PackedStepLaw<1>& { return *laws[k]; },
                {traj.positions[n].first});
            return -lp / static_cast<double>(n);
        });
    }
    MeanAccumulator acc;
    for (double v : values) acc.add(v);
    return {method, n, trials, std::max(0.0, acc.mean()), acc.stderr_of_mean()};
}

} // namespace dimcons
