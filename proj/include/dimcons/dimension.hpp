#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "harmonic.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace dimcons {

// Radii are r_j = e^{-j}. The open ball B(xi, r_j) = { eta : q(xi, eta) < r_j } is the
// cylinder of depth j + 1 around xi; on products it is the product of the factor cylinders.

struct DimensionFitParams {
    std::size_t j_min = 2;
    std::size_t j_max = 0;          // 0 means depth - 2
    double min_mean_count = 10.0;   // expected hits required at the smallest radius
    double max_empty_fraction = 0.05;  // share of centers whose ball holds no other sample
    std::size_t centers = 0;        // 0 means every sample serves as a center
    std::uint64_t seed = 1;         // center selection
};

struct DimensionFit {
    std::vector<std::size_t> scales;  // j, radius e^{-j}
    std::vector<double> log_radius;
    std::vector<double> log_mass;     // mean over centers of log((K + 1/2)/(N - 1)), K = hits
    std::vector<double> mean_count;   // mean hits per center, self excluded
    std::vector<double> empty_fraction;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;            // weighted rms residual of the fit
    std::size_t samples = 0;
    std::size_t centers = 0;
    bool window_shrunk = false;
    std::string warning;
    std::vector<double> center_slopes;  // per-center local dimension fits
    double center_slope_sd = 0.0;
};

namespace detail {

inline const Word& coordinate(const BoundaryPoint& p, std::size_t) { return p.prefix(); }
inline const Word& coordinate(const BoundaryPair& p, std::size_t c) { return c == 0 ? p.first.prefix() : p.second.prefix(); }
inline constexpr std::size_t coordinates(const BoundaryPoint*) { return 1; }
inline constexpr std::size_t coordinates(const BoundaryPair*) { return 2; }

/// Samples sorted by prefix, with lcp[i] the common prefix of sorted entries i-1 and i.
struct PrefixOrder {
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> lcp;
};

template <typename Point>
PrefixOrder prefix_order(const std::vector<Point>& pts, std::size_t c, std::size_t depth) {
    PrefixOrder o;
    o.order.resize(pts.size());
    std::iota(o.order.begin(), o.order.end(), 0u);
    auto letters = [&](std::uint32_t i) { return coordinate(pts[i], c).letters().first(depth); };
    std::sort(o.order.begin(), o.order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto x = letters(a), y = letters(b);
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    });
    o.lcp.assign(pts.size(), 0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        o.lcp[i] = static_cast<std::uint32_t>(common_prefix_length(letters(o.order[i - 1]), letters(o.order[i])));
    return o;
}

inline std::vector<std::uint32_t> class_ids(const PrefixOrder& o, std::size_t d) {
    std::vector<std::uint32_t> ids(o.order.size());
    std::uint32_t id = 0;
    for (std::size_t i = 0; i < o.order.size(); ++i) {
        if (i > 0 && o.lcp[i] < d) ++id;
        ids[o.order[i]] = id;
    }
    return ids;
}

/// Size of the depth-d ball class containing each sample (itself included).
inline std::vector<std::uint32_t> class_sizes(const std::vector<PrefixOrder>& orders, std::size_t d) {
    const std::size_t n = orders.front().order.size();
    std::vector<std::uint64_t> keys(n, 0);
    for (const auto& o : orders) {
        const auto ids = class_ids(o, d);
        for (std::size_t i = 0; i < n; ++i) keys[i] = keys[i] * n + ids[i];
    }
    auto sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::uint32_t> sizes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = std::equal_range(sorted.begin(), sorted.end(), keys[i]);
        sizes[i] = static_cast<std::uint32_t>(r.second - r.first);
    }
    return sizes;
}

inline void finish_fit(DimensionFit& f) {
    const auto line = fit_line(f.log_radius, f.log_mass, f.mean_count);
    f.slope = line.slope;
    f.intercept = line.intercept;
    f.residual = line.rms_residual;
}

} // namespace detail

/// Empirical ball masses around the given centers (sample indices, excluded from their
/// own counts) and the fitted local dimension over the usable window.
template <typename Point>
DimensionFit ball_mass_dimension_fit(const std::vector<Point>& samples, const std::vector<std::size_t>& centers,
                                     const DimensionFitParams& p = {}) {
    constexpr std::size_t dims = detail::coordinates(static_cast<const Point*>(nullptr));
    if (samples.size() < 2) throw ConfigError("dimension fit needs at least 2 samples");
    if (samples.size() > 0xFFFF'FFFFu) throw ConfigError("too many samples");
    if (centers.empty()) throw ConfigError("dimension fit needs at least one center");
    std::size_t depth = SIZE_MAX;
    for (const auto& s : samples)
        for (std::size_t c = 0; c < dims; ++c) depth = std::min(depth, detail::coordinate(s, c).length());
    const std::size_t j_max = p.j_max == 0 ? (depth >= 2 ? depth - 2 : 0) : std::min(p.j_max, depth - 1);
    if (j_max < p.j_min + 1) throw Error("dimension fit: empty radius window for sample depth " + std::to_string(depth));

    std::vector<detail::PrefixOrder> orders;
    for (std::size_t c = 0; c < dims; ++c) orders.push_back(detail::prefix_order(samples, c, depth));

    const double others = static_cast<double>(samples.size() - 1);
    DimensionFit f;
    f.samples = samples.size();
    f.centers = centers.size();
    std::vector<std::vector<double>> per_center(centers.size());
    std::vector<std::uint32_t> previous;
    for (std::size_t j = p.j_min; j <= j_max; ++j) {
        const auto sizes = detail::class_sizes(orders, j + 1);
        std::vector<std::uint32_t> counts;
        for (auto c : centers) counts.push_back(sizes.at(c) - 1);
        if (!previous.empty()) {
            for (std::size_t i = 0; i < counts.size(); ++i)
                if (counts[i] > previous[i]) throw std::logic_error("ball masses must be nondecreasing in r");
        }
        previous = counts;
        const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
        const auto empty = static_cast<double>(std::count(counts.begin(), counts.end(), 0u));
        const double empty_share = empty / static_cast<double>(counts.size());
        if (mean < p.min_mean_count || empty_share > p.max_empty_fraction) {
            f.window_shrunk = true;
            f.warning = "window shrunk to j <= " + std::to_string(j - 1) + " (mean count " + std::to_string(mean) +
                        ", empty share " + std::to_string(empty_share) + ")";
            break;
        }
        // The half count removes the leading 1/(2K) bias of log K and keeps empty balls finite.
        CompensatedSum log_sum;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double lm = std::log((counts[i] + 0.5) / others);
            per_center[i].push_back(lm);
            log_sum.add(lm);
        }
        f.scales.push_back(j);
        f.log_radius.push_back(-static_cast<double>(j));
        f.log_mass.push_back(log_sum.value() / static_cast<double>(counts.size()));
        f.mean_count.push_back(mean);
        f.empty_fraction.push_back(empty_share);
    }
    if (f.scales.size() < 2) throw Error("dimension fit: fewer than 2 usable radii; " + f.warning);
    detail::finish_fit(f);

    MeanAccumulator sd;
    for (const auto& lm : per_center) {
        std::vector<double> w;
        for (double v : lm) w.push_back(std::exp(v) * others);
        const double s = fit_line(f.log_radius, lm, w).slope;
        f.center_slopes.push_back(s);
        sd.add(s);
    }
    f.center_slope_sd = sd.count() > 1 ? std::sqrt(sd.variance()) : 0.0;
    return f;
}

/// Single-center fit.
template <typename Point>
DimensionFit ball_mass_and_dimension_fit(const std::vector<Point>& samples, std::size_t center,
                                         const DimensionFitParams& p = {}) {
    return ball_mass_dimension_fit(samples, std::vector<std::size_t>{center}, p);
}

/// Fit averaged over centers drawn from the pool (all of them when params.centers == 0).
template <typename Point>
DimensionFit dimension_fit(const std::vector<Point>& samples, const DimensionFitParams& p = {}) {
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (p.centers != 0 && p.centers < samples.size()) {
        Rng rng(p.seed);
        for (std::size_t i = 0; i < p.centers; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
        idx.resize(p.centers);
        std::sort(idx.begin(), idx.end());
    }
    return ball_mass_dimension_fit(samples, idx, p);
}

/// Fit on given masses at radii e^{-j} (no sampling).
inline DimensionFit dimension_fit_from_masses(const std::vector<std::size_t>& scales, const std::vector<double>& masses) {
    if (scales.size() != masses.size() || scales.size() < 2) throw ConfigError("need >= 2 (scale, mass) pairs");
    DimensionFit f;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(masses[i] > 0.0)) throw ConfigError("ball masses must be positive");
        if (i > 0 && scales[i] > scales[i - 1] && masses[i] > masses[i - 1])
            throw std::logic_error("ball masses must be nondecreasing in r");
        f.scales.push_back(scales[i]);
        f.log_radius.push_back(-static_cast<double>(scales[i]));
        f.log_mass.push_back(std::log(masses[i]));
        f.mean_count.push_back(1.0);
    }
    detail::finish_fit(f);
    return f;
}

/// Fit on exact cylinder masses around `center` for j in [j_min, j_max].
inline DimensionFit exact_dimension_fit(int rank, const BoundaryPoint& center, std::size_t j_min, std::size_t j_max,
                                        const CylinderMassFn& mass = exact_cylinder_mass) {
    if (j_max + 1 > center.depth()) throw InsufficientDepth("exact fit needs center depth >= j_max + 1");
    std::vector<std::size_t> scales;
    std::vector<double> masses;
    for (std::size_t j = j_min; j <= j_max; ++j) {
        scales.push_back(j);
        masses.push_back(mass(rank, center.prefix().prefix(j + 1)));
    }
    return dimension_fit_from_masses(scales, masses);
}

} // namespace dimcons
