#pragma once

#include <cmath>
#include <vector>

#include "measure.hpp"
#include "stats.hpp"

namespace dimcons {

/// Law of the word length |w_n| for a radial walk, kept in log space:
/// p(n, k) underflows long before k reaches n.
struct RadialProfile {
    int rank = 1;
    std::size_t n = 0;
    std::vector<double> log_mass;  // log p(n, k), k = 0..n; -inf where p = 0

    double mass(std::size_t k) const { return k < log_mass.size() ? std::exp(log_mass[k]) : 0.0; }

    /// log mu_n(x) = log p(n, |x|) - log #sphere(|x|).
    double log_prob(const Word& x) const {
        const std::size_t k = x.length();
        if (k >= log_mass.size()) return -INFINITY;
        return log_mass[k] - log_sphere(k);
    }

    double log_sphere(std::size_t k) const {
        if (k == 0) return 0.0;
        return std::log(2.0 * rank) + static_cast<double>(k - 1) * std::log(2.0 * rank - 1.0);
    }

    /// H(mu_n) = -sum_k p(n,k) log(p(n,k)/N(k)).
    double entropy() const {
        CompensatedSum s;
        for (std::size_t k = 0; k < log_mass.size(); ++k) {
            if (log_mass[k] == -INFINITY) continue;
            s.add(-std::exp(log_mass[k]) * (log_mass[k] - log_sphere(k)));
        }
        return s.value();
    }
};

/// Birth-death transition of |w| under SRW / lazy SRW.
class RadialChain {
public:
    explicit RadialChain(const FactorMeasure& spec) : rank_(spec.rank()) {
        if (!spec.is_radial()) throw Unsupported("radial profile needs SRW or lazy SRW, got " + spec.describe());
        const double h = spec.hold();
        const double m2 = 2.0 * rank_;
        log_hold_ = h > 0.0 ? std::log(h) : -INFINITY;
        log_out0_ = std::log1p(-h);
        log_out_ = std::log((1.0 - h) * (m2 - 1.0) / m2);
        log_in_ = std::log((1.0 - h) / m2);
    }

    RadialProfile initial() const { return {rank_, 0, {0.0}}; }

    RadialProfile step(const RadialProfile& p) const {
        RadialProfile q{rank_, p.n + 1, std::vector<double>(p.log_mass.size() + 1, -INFINITY)};
        for (std::size_t k = 0; k < p.log_mass.size(); ++k) {
            const double lp = p.log_mass[k];
            if (lp == -INFINITY) continue;
            q.log_mass[k] = log_sum_exp(q.log_mass[k], lp + log_hold_);
            if (k == 0) {
                q.log_mass[1] = log_sum_exp(q.log_mass[1], lp + log_out0_);
            } else {
                q.log_mass[k + 1] = log_sum_exp(q.log_mass[k + 1], lp + log_out_);
                q.log_mass[k - 1] = log_sum_exp(q.log_mass[k - 1], lp + log_in_);
            }
        }
        return q;
    }

private:
    int rank_;
    double log_hold_, log_out0_, log_out_, log_in_;
};

inline RadialProfile radial_profile(const FactorMeasure& spec, std::size_t n) {
    RadialChain chain(spec);
    RadialProfile p = chain.initial();
    for (std::size_t i = 0; i < n; ++i) p = chain.step(p);
    return p;
}

/// H(mu_k) for k = 0..n in one sweep.
inline std::vector<double> radial_entropies(const FactorMeasure& spec, std::size_t n) {
    RadialChain chain(spec);
    RadialProfile p = chain.initial();
    std::vector<double> out{p.entropy()};
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        p = chain.step(p);
        out.push_back(p.entropy());
    }
    return out;
}

} // namespace dimcons
