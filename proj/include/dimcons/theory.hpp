#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "measure.hpp"

namespace dimcons {

/// A reference value together with where it comes from.
struct Reference {
    double value = 0.0;
    std::string provenance;
};

/// Closed forms for SRW and lazy SRW on F_m.
inline std::optional<Reference> closed_form_drift(const FactorMeasure& mu) {
    if (mu.kind() == FactorMeasure::Kind::PointMass)
        return Reference{static_cast<double>(mu.atoms().front().value.length()), "closed form: point mass"};
    if (!mu.is_radial()) return std::nullopt;
    const double m = mu.rank();
    return Reference{(1.0 - mu.hold()) * (m - 1.0) / m, "closed form: (1-hold)(m-1)/m"};
}

inline std::optional<Reference> closed_form_entropy(const FactorMeasure& mu) {
    if (mu.kind() == FactorMeasure::Kind::PointMass) return Reference{0.0, "closed form: point mass"};
    if (!mu.is_radial()) return std::nullopt;
    const double m = mu.rank();
    return Reference{(1.0 - mu.hold()) * (m - 1.0) / m * std::log(2.0 * m - 1.0),
                     "closed form: (1-hold)(m-1)/m log(2m-1)"};
}

/// Inputs of the dimension formulas: drifts, marginal entropies and the joint entropy.
/// With l >= l*: dim nu_pi = (h - h*)/l + h*/l*, dim nu^eta = (h - h*)/l, dim nu* = h*/l*.
struct DimensionTheory {
    double drift_first = 0.0;
    double drift_second = 0.0;
    double entropy_first = 0.0;
    double entropy_second = 0.0;
    std::optional<double> entropy_joint;
    std::string provenance;

    DimensionTheory swapped() const {
        DimensionTheory t = *this;
        std::swap(t.drift_first, t.drift_second);
        std::swap(t.entropy_first, t.entropy_second);
        return t;
    }

    std::optional<double> conditional_dimension() const {
        if (!entropy_joint || drift_first <= 0.0) return std::nullopt;
        return (*entropy_joint - entropy_second) / drift_first;
    }
    std::optional<double> marginal_dimension() const {
        if (drift_second <= 0.0) return std::nullopt;
        return entropy_second / drift_second;
    }
    std::optional<double> joint_dimension() const {
        const auto c = conditional_dimension();
        const auto m = marginal_dimension();
        if (!c || !m) return std::nullopt;
        return *c + *m;
    }
};

/// Closed-form inputs when both marginals are radial; the joint entropy is filled in
/// only for the variants where it reduces to marginal entropies.
inline std::optional<DimensionTheory> closed_form_theory(const MeasureSpec& pi) {
    const auto l1 = closed_form_drift(pi.first_marginal());
    const auto l2 = closed_form_drift(pi.second_marginal());
    const auto h1 = closed_form_entropy(pi.first_marginal());
    const auto h2 = closed_form_entropy(pi.second_marginal());
    if (!l1 || !l2 || !h1 || !h2) return std::nullopt;
    DimensionTheory t{l1->value, l2->value, h1->value, h2->value, std::nullopt, "closed form"};
    switch (pi.kind()) {
    case MeasureSpec::Kind::Product: t.entropy_joint = h1->value + h2->value; break;
    case MeasureSpec::Kind::DiagonalPush: t.entropy_joint = h1->value; break;
    case MeasureSpec::Kind::NoiseMixture:
        if (pi.rho() == 0.0) t.entropy_joint = h1->value;
        if (pi.rho() == 1.0) t.entropy_joint = h1->value + h2->value;
        break;
    case MeasureSpec::Kind::Table: break;
    }
    return t;
}

} // namespace dimcons
