#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dimension.hpp"
#include "doob.hpp"
#include "theory.hpp"
#include "walk.hpp"

namespace dimcons {

struct ConditionalDimensionParams {
    std::size_t samples = 50'000;   // conditioned samples K
    std::size_t depth = 24;         // depth of each first-coordinate limit
    std::size_t eta_depth = 128;
    DimensionFitParams fit{};
    BoundarySampleParams sampling{};
    std::uint64_t seed = 1;
};

struct ConditionalDimensionReport {
    DimensionFit fit;
    BoundaryPoint eta;
    std::optional<Reference> theory;
};

/// eta drawn from the hitting measure of the second marginal.
inline BoundaryPoint sample_eta(const MeasureSpec& pi, std::size_t depth, std::uint64_t seed,
                                const BoundarySampleParams& p = {}) {
    Rng rng(seed);
    return boundary_sample(pi.second_marginal(), depth, rng, p);
}

/// Conditioned samples: first-coordinate limits of the walk conditioned on eta.
inline std::vector<BoundaryPoint> conditional_samples(const MeasureSpec& pi, const BoundaryPoint& eta,
                                                      const ConditionalDimensionParams& p) {
    const DoobWalk walk(pi, eta);
    return parallel_map<BoundaryPoint>(p.samples, [&](std::size_t i) {
        Rng rng = Rng::for_trial(p.seed, i);
        return walk.first_limit(p.depth, rng, p.sampling);
    });
}

inline ConditionalDimensionReport conditional_dimension_estimate(const MeasureSpec& pi, const BoundaryPoint& eta,
                                                                 const ConditionalDimensionParams& p = {}) {
    ConditionalDimensionReport r;
    r.eta = eta;
    r.fit = dimension_fit(conditional_samples(pi, eta, p), p.fit);
    if (const auto t = closed_form_theory(pi)) {
        if (const auto v = t->conditional_dimension()) r.theory = Reference{*v, t->provenance};
    }
    return r;
}

struct ConservationParams {
    std::size_t samples = 300'000;  // joint boundary samples
    std::size_t depth = 24;
    std::size_t etas = 3;           // independent eta for the conditional fits
    ConditionalDimensionParams conditional{};
    DimensionFitParams fit{};
    BoundarySampleParams sampling{};
    std::uint64_t seed = 1;
    std::optional<Reference> joint_entropy;  // used when no closed form exists
};

struct ConservationReport {
    std::string measure;
    bool swapped = false;
    double drift_first = 0.0;
    double drift_second = 0.0;
    DimensionFit joint;
    DimensionFit marginal;
    std::vector<ConditionalDimensionReport> conditional;
    double mean_conditional = 0.0;
    double conditional_std_error = 0.0;
    double residual = 0.0;  // dim nu_pi - (mean conditional + dim nu*)
    std::optional<DimensionTheory> theory;
};

/// Orders coordinates so the first has the larger drift, then fits dim nu_pi on q-bar balls,
/// dim nu* on the second coordinates, and the conditional dimension at several eta.
inline ConservationReport dimension_conservation_report(const MeasureSpec& input, const ConservationParams& p = {}) {
    ConservationReport r;
    r.measure = input.describe();

    const auto l1 = closed_form_drift(input.first_marginal());
    const auto l2 = closed_form_drift(input.second_marginal());
    double d1, d2;
    if (l1 && l2) {
        d1 = l1->value;
        d2 = l2->value;
    } else {
        const auto d = drift_estimate(input, 2000, 200, p.seed ^ 0xD1F7ull);
        d1 = d.first.estimate;
        d2 = d.second.estimate;
    }
    r.swapped = d1 < d2;
    const MeasureSpec pi = r.swapped ? input.swapped() : input;
    r.drift_first = r.swapped ? d2 : d1;
    r.drift_second = r.swapped ? d1 : d2;

    auto theory = closed_form_theory(input);
    if (theory) {
        if (!theory->entropy_joint && p.joint_entropy) {
            theory->entropy_joint = p.joint_entropy->value;
            theory->provenance += "; joint entropy " + p.joint_entropy->provenance;
        }
        r.theory = r.swapped ? theory->swapped() : *theory;
    }

    const auto joint_samples = boundary_samples(pi, p.depth, p.samples, p.seed, p.sampling);
    r.joint = dimension_fit(joint_samples, p.fit);
    std::vector<BoundaryPoint> second;
    second.reserve(joint_samples.size());
    for (const auto& s : joint_samples) second.push_back(s.second);
    r.marginal = dimension_fit(second, p.fit);

    MeanAccumulator cond;
    for (std::size_t e = 0; e < p.etas; ++e) {
        const auto eta = sample_eta(pi, p.conditional.eta_depth, p.seed ^ mix64(0xE7A0ull + e), p.sampling);
        auto cp = p.conditional;
        cp.seed = p.conditional.seed ^ mix64(0xC0DEull + e);
        auto report = conditional_dimension_estimate(pi, eta, cp);
        if (r.theory) {
            if (const auto v = r.theory->conditional_dimension()) report.theory = Reference{*v, r.theory->provenance};
        }
        cond.add(report.fit.slope);
        r.conditional.push_back(std::move(report));
    }
    r.mean_conditional = cond.mean();
    r.conditional_std_error = cond.stderr_of_mean();
    r.residual = r.joint.slope - (r.mean_conditional + r.marginal.slope);
    return r;
}

} // namespace dimcons
