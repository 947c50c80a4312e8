#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "boundary.hpp"
#include "measure.hpp"
#include "stats.hpp"
#include "walk.hpp"

namespace dimcons {

/// nu(cyl(w)) = (1/2m)(2m-1)^{-(|w|-1)} for the hitting measure of SRW (and lazy SRW) on F_m.
inline double exact_cylinder_mass(int rank, const Word& w) {
    if (w.rank() != rank) throw SpecMismatch("cylinder word is over F_" + std::to_string(w.rank()));
    if (w.empty()) return 1.0;
    return std::exp(-std::log(2.0 * rank) - static_cast<double>(w.length() - 1) * std::log(2.0 * rank - 1.0));
}

using CylinderMassFn = std::function<double(int, const Word&)>;

/// Radon-Nikodym derivative d(x nu)/d nu at eta, equal to (2m-1)^{-beta_eta(x)}.
inline double rn_derivative(int rank, const Word& x, const BoundaryPoint& eta) {
    if (x.rank() != rank || eta.rank() != rank) throw SpecMismatch("rn_derivative: rank mismatch");
    return std::pow(2.0 * rank - 1.0, -static_cast<double>(busemann(x, eta)));
}

/// x^{-1} eta. Exact whenever x^{-1} does not cancel the whole known prefix of eta.
inline BoundaryPoint translate(const Word& x, const BoundaryPoint& eta) {
    require_same_group(x, eta.prefix());
    Word y = x.inverse() * eta.prefix();
    const std::size_t cancelled = (x.length() + eta.depth() - y.length()) / 2;
    if (cancelled >= eta.depth()) throw InsufficientDepth("translate: boundary approximation too shallow");
    return BoundaryPoint(std::move(y));
}

struct BoundarySampleParams {
    std::size_t slack = 24;          // extra length beyond the requested depth before stopping
    std::size_t window = 8;          // consecutive steps the length test must hold
    std::size_t step_budget = 1'000'000;
    std::size_t retries = 3;         // each retry doubles the slack
};

namespace detail {

template <typename Measure, typename Done>
auto run_until_settled(const Measure& spec, std::size_t depth, Rng& rng, const BoundarySampleParams& p, Done&& done) {
    auto w = detail::identity_of(spec);
    std::size_t stable = 0;
    for (std::size_t step = 0; step < p.step_budget; ++step) {
        w *= spec.sample(rng);
        stable = done(w) ? stable + 1 : 0;
        if (stable >= p.window) return w;
    }
    throw SamplingError("boundary sampling exhausted its step budget at depth " + std::to_string(depth));
}

inline std::size_t min_length(const Word& w) { return w.length(); }
inline std::size_t min_length(const ProductElement& w) { return std::min(w.first.length(), w.second.length()); }

} // namespace detail

/// Depth-T prefix of the boundary limit of a walk. Stops once every coordinate has been
/// at least T + slack long for `window` consecutive steps. Budget failures are retried with doubled slack, then rethrown.
inline BoundaryPoint boundary_sample(const FactorMeasure& mu, std::size_t depth, Rng& rng,
                                     BoundarySampleParams p = {}) {
    if (depth == 0) throw ConfigError("boundary depth must be >= 1");
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            const std::size_t need = depth + p.slack;
            const auto w = detail::run_until_settled(mu, depth, rng, p, [&](const Word& x) { return x.length() >= need; });
            return BoundaryPoint(w.prefix(depth));
        } catch (const SamplingError&) {
            if (attempt >= p.retries) throw;
            p.slack *= 2;
        }
    }
}

inline BoundaryPair boundary_sample(const MeasureSpec& pi, std::size_t depth, Rng& rng, BoundarySampleParams p = {}) {
    if (depth == 0) throw ConfigError("boundary depth must be >= 1");
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            const std::size_t need = depth + p.slack;
            const auto w = detail::run_until_settled(pi, depth, rng, p, [&](const ProductElement& x) {
                return detail::min_length(x) >= need;
            });
            return {BoundaryPoint(w.first.prefix(depth)), BoundaryPoint(w.second.prefix(depth))};
        } catch (const SamplingError&) {
            if (attempt >= p.retries) throw;
            p.slack *= 2;
        }
    }
}

/// N independent boundary samples; sample i uses Rng::for_trial(seed, i).
template <typename Measure>
auto boundary_samples(const Measure& spec, std::size_t depth, std::size_t count, std::uint64_t seed,
                      const BoundarySampleParams& p = {}) {
    using Point = decltype(boundary_sample(spec, depth, std::declval<Rng&>(), p));
    return parallel_map<Point>(count, [&](std::size_t i) {
        Rng rng = Rng::for_trial(seed, i);
        return boundary_sample(spec, depth, rng, p);
    });
}

/// Empirical check of nu = sum_x mu(x) x nu on the cylinder E = cyl(w):
/// lhs = nu^(E), rhs = sum_x mu(x) nu^(x^{-1} E), both from the same samples.
struct StationarityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double std_error = 0.0;  // of lhs - rhs
};

inline StationarityCheck stationarity_check(const FactorMeasure& mu, const std::vector<BoundaryPoint>& samples,
                                            const Word& w) {
    if (samples.empty()) throw ConfigError("stationarity check needs samples");
    const std::size_t need = w.length() + mu.max_step_length();
    MeanAccumulator diff, lhs, rhs;
    for (const auto& s : samples) {
        if (s.depth() < need) throw InsufficientDepth("stationarity check needs depth >= |w| + max step");
        const double in_e = common_prefix_length(s.prefix(), w) >= w.length() ? 1.0 : 0.0;
        double pulled = 0.0;
        for (const auto& a : mu.atoms()) {
            const Word moved = a.value * s.prefix();
            if (common_prefix_length(moved, w) >= w.length()) pulled += a.weight;
        }
        lhs.add(in_e);
        rhs.add(pulled);
        diff.add(in_e - pulled);
    }
    return {lhs.mean(), rhs.mean(), diff.stderr_of_mean()};
}

} // namespace dimcons
