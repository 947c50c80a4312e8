#pragma once

#include <cmath>
#include <vector>

#include "harmonic.hpp"

namespace dimcons {

/// The walk pi conditioned on its second coordinate converging to eta:
/// p^eta(w, w s) = pi(s) (2m*-1)^{beta_eta(y) - beta_eta(y s*)}, with y the second coordinate of w.
/// Needs the exact hitting measure of the second marginal, so that marginal must be radial.
class DoobWalk {
public:
    struct State {
        ProductElement position;
        std::size_t agreement = 0;  // common prefix of position.second with eta
    };

    DoobWalk(MeasureSpec pi, BoundaryPoint eta) : pi_(std::move(pi)), eta_(std::move(eta)) {
        if (!pi_.second_marginal().is_radial())
            throw Unsupported("conditioning needs an SRW or lazy SRW second marginal, got " +
                              pi_.second_marginal().describe());
        if (eta_.rank() != pi_.rank2()) throw SpecMismatch("eta is not a boundary point of the second factor");
        log_base_ = std::log(2.0 * pi_.rank2() - 1.0);
    }

    const MeasureSpec& measure() const noexcept { return pi_; }
    const BoundaryPoint& eta() const noexcept { return eta_; }

    State initial() const { return {ProductElement::identity(pi_.rank1(), pi_.rank2()), 0}; }

    /// Transition probabilities from `s`, one per atom of pi.
    std::vector<double> kernel(const State& s) const {
        const long beta_now = beta(s.position.second.length(), s.agreement);
        std::vector<double> row(pi_.atoms().size());
        for (std::size_t k = 0; k < row.size(); ++k) {
            const auto [len, cp] = moved(s, pi_.atoms()[k].value.second);
            row[k] = pi_.atoms()[k].weight * std::exp(static_cast<double>(beta_now - beta(len, cp)) * log_base_);
        }
        return row;
    }

    void advance(State& s, std::size_t atom) const {
        const auto& step = pi_.atoms()[atom].value;
        s.agreement = moved(s, step.second).second;
        s.position *= step;
    }

    /// One step; rows must sum to one up to rounding or the conditioning is inconsistent.
    std::size_t sample_step(const State& s, Rng& rng) const {
        const auto row = kernel(s);
        double total = 0.0;
        for (double v : row) total += v;
        if (std::abs(total - 1.0) > kKernelTolerance)
            throw Error("conditioned kernel row sums to " + std::to_string(total));
        double u = rng.uniform() * total;
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (u < row[k]) return k;
            u -= row[k];
        }
        return row.size() - 1;
    }

    Trajectory<ProductElement> trajectory(std::size_t n, std::uint64_t seed) const {
        Trajectory<ProductElement> t;
        t.seed = seed;
        Rng rng(seed);
        State s = initial();
        t.positions.push_back(s.position);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = sample_step(s, rng);
            advance(s, k);
            t.steps.push_back(pi_.atoms()[k].value);
            t.positions.push_back(s.position);
        }
        return t;
    }

    /// P^eta of the path given by atom indices, from the identity.
    double path_probability(const std::vector<std::size_t>& atoms) const {
        State s = initial();
        double p = 1.0;
        for (auto k : atoms) {
            p *= kernel(s)[k];
            advance(s, k);
        }
        return p;
    }

    /// Depth-T prefix of the first-coordinate limit, i.e. a sample of the conditional measure at eta.
    BoundaryPoint first_limit(std::size_t depth, Rng& rng, BoundarySampleParams p = {}) const {
        if (depth == 0) throw ConfigError("boundary depth must be >= 1");
        for (std::size_t attempt = 0;; ++attempt) {
            State s = initial();
            const std::size_t need = depth + p.slack;
            std::size_t stable = 0;
            for (std::size_t step = 0; step < p.step_budget; ++step) {
                advance(s, sample_step(s, rng));
                stable = s.position.first.length() >= need ? stable + 1 : 0;
                if (stable >= p.window) return BoundaryPoint(s.position.first.prefix(depth));
            }
            if (attempt >= p.retries) throw SamplingError("conditioned sampling exhausted its step budget");
            p.slack *= 2;
        }
    }

    static constexpr double kKernelTolerance = 1e-9;

private:
    long beta(std::size_t len, std::size_t cp) const {
        return static_cast<long>(len) - 2 * static_cast<long>(cp);
    }

    /// Length and eta-agreement of y s, from those of y, without building the word.
    std::pair<std::size_t, std::size_t> moved(const State& s, const Word& step) const {
        const auto& y = s.position.second.letters();
        const auto& e = eta_.prefix().letters();
        const auto& st = step.letters();
        std::size_t k = 0;
        while (k < st.size() && k < y.size() && y[y.size() - 1 - k] == -st[k]) ++k;
        const std::size_t kept = y.size() - k;
        const std::size_t len = kept + st.size() - k;
        std::size_t cp = std::min(s.agreement, kept);
        if (cp == kept) {
            for (std::size_t i = k; i < st.size() && cp < e.size() && st[i] == e[cp]; ++i) ++cp;
        }
        if (cp >= e.size() && cp < len)
            throw InsufficientDepth("conditioned walk outran eta; use a deeper boundary approximation");
        return {len, cp};
    }

    MeasureSpec pi_;
    BoundaryPoint eta_;
    double log_base_ = 0.0;
};

inline Trajectory<ProductElement> doob_trajectory(const DoobWalk& walk, std::size_t n, std::uint64_t seed) {
    return walk.trajectory(n, seed);
}

} // namespace dimcons
