#pragma once

#include <cstdint>
#include <vector>

#include "measure.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace dimcons {

/// Increments x_1..x_n and positions w_0 = e, w_k = w_{k-1} x_k.
template <typename Element>
struct Trajectory {
    std::vector<Element> steps;
    std::vector<Element> positions;
    std::uint64_t seed = 0;
};

namespace detail {
inline Word identity_of(const FactorMeasure& m) { return Word(m.rank()); }
inline ProductElement identity_of(const MeasureSpec& m) { return ProductElement::identity(m.rank1(), m.rank2()); }
} // namespace detail

template <typename Measure>
using element_t = std::decay_t<decltype(std::declval<const Measure&>().sample(std::declval<Rng&>()))>;

template <typename Measure>
Trajectory<element_t<Measure>> sample_trajectory(const Measure& spec, std::size_t n, std::uint64_t seed) {
    Trajectory<element_t<Measure>> t;
    t.seed = seed;
    Rng rng(seed);
    auto w = detail::identity_of(spec);
    t.positions.reserve(n + 1);
    t.steps.reserve(n);
    t.positions.push_back(w);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = spec.sample(rng);
        w *= x;
        t.steps.push_back(x);
        t.positions.push_back(w);
    }
    return t;
}

/// Endpoint w_n only, without storing the path.
template <typename Measure>
element_t<Measure> sample_endpoint(const Measure& spec, std::size_t n, Rng& rng) {
    auto w = detail::identity_of(spec);
    for (std::size_t i = 0; i < n; ++i) w *= spec.sample(rng);
    return w;
}

struct DriftReport {
    std::size_t n = 0;
    std::size_t trials = 0;
    double estimate = 0.0;
    double std_error = 0.0;
};

/// d(o, z_n)/n averaged over independent trials (one report per coordinate).
inline DriftReport drift_estimate(const FactorMeasure& spec, std::size_t n, std::size_t trials, std::uint64_t seed) {
    const auto per_trial = parallel_map<double>(trials, [&](std::size_t t) {
        Rng rng = Rng::for_trial(seed, t);
        return static_cast<double>(sample_endpoint(spec, n, rng).length()) / static_cast<double>(n);
    });
    MeanAccumulator acc;
    for (double v : per_trial) acc.add(v);
    return {n, trials, acc.mean(), acc.stderr_of_mean()};
}

struct ProductDriftReport {
    DriftReport first;
    DriftReport second;
};

inline ProductDriftReport drift_estimate(const MeasureSpec& spec, std::size_t n, std::size_t trials, std::uint64_t seed) {
    const auto per_trial = parallel_map<std::pair<double, double>>(trials, [&](std::size_t t) {
        Rng rng = Rng::for_trial(seed, t);
        const auto w = sample_endpoint(spec, n, rng);
        return std::pair{static_cast<double>(w.first.length()) / static_cast<double>(n),
                         static_cast<double>(w.second.length()) / static_cast<double>(n)};
    });
    MeanAccumulator a, b;
    for (const auto& [x, y] : per_trial) {
        a.add(x);
        b.add(y);
    }
    return {{n, trials, a.mean(), a.stderr_of_mean()}, {n, trials, b.mean(), b.stderr_of_mean()}};
}

/// Closed-form drift of SRW / lazy SRW: (1 - hold)(m - 1)/m.
inline double radial_drift(const FactorMeasure& m) {
    if (!m.is_radial()) throw Unsupported("closed-form drift needs a radial measure");
    return (1.0 - m.hold()) * (m.rank() - 1.0) / m.rank();
}

} // namespace dimcons
