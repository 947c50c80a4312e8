#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "boundary.hpp"
#include "rng.hpp"

namespace dimcons {

inline constexpr double kWeightTolerance = 1e-12;

namespace detail {

template <typename T>
struct Weighted {
    T value;
    double weight;
};

/// Merges duplicate atoms, drops zero weights, validates normalization and
/// builds the cumulative table used for sampling.
template <typename T>
void normalize_support(std::vector<Weighted<T>>& atoms, std::vector<double>& cumulative) {
    std::map<T, double> merged;
    for (auto& a : atoms) {
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw ConfigError("measure weights must be finite and nonnegative");
        merged[a.value] += a.weight;
    }
    atoms.clear();
    double total = 0.0;
    for (auto& [v, w] : merged) {
        if (w > 0.0) {
            atoms.push_back({v, w});
            total += w;
        }
    }
    if (atoms.empty()) throw ConfigError("measure has empty support");
    if (std::abs(total - 1.0) > kWeightTolerance) {
        throw ConfigError("measure weights sum to " + std::to_string(total) + ", expected 1");
    }
    cumulative.resize(atoms.size());
    double c = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        c += atoms[i].weight;
        cumulative[i] = c;
    }
    cumulative.back() = 1.0;
}

template <typename T>
std::size_t sample_index(const std::vector<double>& cumulative, Rng& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

} // namespace detail

/// Finitely supported step distribution on one free group.
class FactorMeasure {
public:
    enum class Kind { Srw, LazySrw, PointMass, Table };
    using Atom = detail::Weighted<Word>;

    static FactorMeasure srw(int rank) {
        FactorMeasure m(Kind::Srw, rank);
        for (int i = -rank; i <= rank; ++i)
            if (i != 0) m.atoms_.push_back({Word::generator(rank, i), 1.0 / (2.0 * rank)});
        m.finish();
        return m;
    }

    static FactorMeasure lazy_srw(int rank, double hold) {
        if (!(hold >= 0.0 && hold < 1.0)) throw ConfigError("holding probability must be in [0, 1)");
        FactorMeasure m(Kind::LazySrw, rank);
        m.hold_ = hold;
        if (hold > 0.0) m.atoms_.push_back({Word(rank), hold});
        for (int i = -rank; i <= rank; ++i)
            if (i != 0) m.atoms_.push_back({Word::generator(rank, i), (1.0 - hold) / (2.0 * rank)});
        m.finish();
        return m;
    }

    static FactorMeasure point_mass(Word w) {
        FactorMeasure m(Kind::PointMass, w.rank());
        m.atoms_.push_back({std::move(w), 1.0});
        m.finish();
        return m;
    }

    static FactorMeasure table(int rank, std::vector<Atom> atoms) {
        FactorMeasure m(Kind::Table, rank);
        for (auto& a : atoms) require_same_group(a.value, Word(rank));
        m.atoms_ = std::move(atoms);
        m.finish();
        return m;
    }

    /// Uniform distribution on a finite set of words.
    static FactorMeasure uniform(int rank, const std::vector<Word>& support) {
        std::vector<Atom> atoms;
        for (const auto& w : support) atoms.push_back({w, 1.0 / static_cast<double>(support.size())});
        return table(rank, std::move(atoms));
    }

    Kind kind() const noexcept { return kind_; }
    int rank() const noexcept { return rank_; }
    double hold() const noexcept { return hold_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    /// SRW and lazy SRW laws depend on |x| only.
    bool is_radial() const noexcept { return kind_ == Kind::Srw || kind_ == Kind::LazySrw; }

    std::size_t max_step_length() const {
        std::size_t l = 0;
        for (const auto& a : atoms_) l = std::max(l, a.value.length());
        return l;
    }

    double mass(const Word& w) const {
        for (const auto& a : atoms_)
            if (a.value == w) return a.weight;
        return 0.0;
    }

    const Word& sample(Rng& rng) const { return atoms_[detail::sample_index<Word>(cumulative_, rng)].value; }

    std::string describe() const {
        switch (kind_) {
        case Kind::Srw: return "SRW(F_" + std::to_string(rank_) + ")";
        case Kind::LazySrw: return "LazySRW(F_" + std::to_string(rank_) + ", hold=" + std::to_string(hold_) + ")";
        case Kind::PointMass: return "PointMass(" + atoms_.front().value.str() + ")";
        case Kind::Table: return "Table(F_" + std::to_string(rank_) + ", " + std::to_string(atoms_.size()) + " atoms)";
        }
        return "?";
    }

private:
    FactorMeasure(Kind k, int rank) : kind_(k), rank_(rank) { (void)Word(rank); }
    void finish() { detail::normalize_support(atoms_, cumulative_); }

    Kind kind_ = Kind::Table;
    int rank_ = 1;
    double hold_ = 0.0;
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

/// Step distribution pi on F_m x F_m*.
class MeasureSpec {
public:
    enum class Kind { Product, NoiseMixture, DiagonalPush, Table };
    using Atom = detail::Weighted<ProductElement>;

    /// mu x mu*.
    static MeasureSpec product(const FactorMeasure& mu, const FactorMeasure& mu_star) {
        MeasureSpec s(Kind::Product, mu.rank(), mu_star.rank());
        for (const auto& a : mu.atoms())
            for (const auto& b : mu_star.atoms()) s.atoms_.push_back({{a.value, b.value}, a.weight * b.weight});
        s.first_ = std::make_shared<const FactorMeasure>(mu);
        s.second_ = std::make_shared<const FactorMeasure>(mu_star);
        s.finish();
        return s;
    }

    /// pi^rho = rho mu x mu + (1 - rho) mu_diag.
    static MeasureSpec noise_mixture(double rho, const FactorMeasure& mu) {
        if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must be in [0, 1]");
        MeasureSpec s(Kind::NoiseMixture, mu.rank(), mu.rank());
        s.rho_ = rho;
        for (const auto& a : mu.atoms()) {
            for (const auto& b : mu.atoms()) {
                double w = rho * a.weight * b.weight;
                if (a.value == b.value) w += (1.0 - rho) * a.weight;
                if (w > 0.0) s.atoms_.push_back({{a.value, b.value}, w});
            }
        }
        s.first_ = std::make_shared<const FactorMeasure>(mu);
        s.second_ = std::make_shared<const FactorMeasure>(mu);
        s.finish();
        return s;
    }

    /// Delta_* mu with Delta(x) = (x, Pi(x)), Pi killing the last generator.
    static MeasureSpec diagonal_push(const FactorMeasure& mu) {
        if (mu.rank() < 2) throw ConfigError("diagonal push needs rank >= 2");
        const KillLastGenerator pi(mu.rank() - 1);
        MeasureSpec s(Kind::DiagonalPush, mu.rank(), mu.rank() - 1);
        std::vector<FactorMeasure::Atom> pushed;
        for (const auto& a : mu.atoms()) {
            s.atoms_.push_back({{a.value, pi(a.value)}, a.weight});
            pushed.push_back({pi(a.value), a.weight});
        }
        s.first_ = std::make_shared<const FactorMeasure>(mu);
        if (mu.kind() == FactorMeasure::Kind::Srw) {
            // The induced walk on F_m is simple with holding probability 1/(m+1).
            s.second_ = std::make_shared<const FactorMeasure>(FactorMeasure::lazy_srw(mu.rank() - 1, 1.0 / mu.rank()));
        } else {
            s.second_ = std::make_shared<const FactorMeasure>(FactorMeasure::table(mu.rank() - 1, std::move(pushed)));
        }
        s.finish();
        return s;
    }

    static MeasureSpec table(int rank1, int rank2, std::vector<Atom> atoms) {
        MeasureSpec s(Kind::Table, rank1, rank2);
        for (auto& a : atoms) {
            require_same_group(a.value.first, Word(rank1));
            require_same_group(a.value.second, Word(rank2));
        }
        s.atoms_ = std::move(atoms);
        s.finish();
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    int rank1() const noexcept { return rank1_; }
    int rank2() const noexcept { return rank2_; }
    double rho() const noexcept { return rho_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    const FactorMeasure& first_marginal() const { return *first_; }
    const FactorMeasure& second_marginal() const { return *second_; }

    /// Coordinate-swapped measure (y, x).
    MeasureSpec swapped() const {
        std::vector<Atom> atoms;
        for (const auto& a : atoms_) atoms.push_back({{a.value.second, a.value.first}, a.weight});
        MeasureSpec s = table(rank2_, rank1_, std::move(atoms));
        s.first_ = second_;
        s.second_ = first_;
        return s;
    }

    double mass(const ProductElement& x) const {
        for (const auto& a : atoms_)
            if (a.value == x) return a.weight;
        return 0.0;
    }

    const ProductElement& sample(Rng& rng) const {
        return atoms_[detail::sample_index<ProductElement>(cumulative_, rng)].value;
    }

    std::pair<std::size_t, std::size_t> max_step_lengths() const {
        std::size_t a = 0, b = 0;
        for (const auto& x : atoms_) {
            a = std::max(a, x.value.first.length());
            b = std::max(b, x.value.second.length());
        }
        return {a, b};
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::Product: return "Product(" + first_->describe() + ", " + second_->describe() + ")";
        case Kind::NoiseMixture: return "NoiseMixture(rho=" + std::to_string(rho_) + ", " + first_->describe() + ")";
        case Kind::DiagonalPush: return "DiagonalPush(" + first_->describe() + ")";
        case Kind::Table: return "Table(" + std::to_string(atoms_.size()) + " atoms)";
        }
        return "?";
    }

private:
    MeasureSpec(Kind k, int r1, int r2) : kind_(k), rank1_(r1), rank2_(r2) {}

    void finish() {
        detail::normalize_support(atoms_, cumulative_);
        if (!first_ || !second_) {
            std::map<Word, double> m1, m2;
            for (const auto& a : atoms_) {
                m1[a.value.first] += a.weight;
                m2[a.value.second] += a.weight;
            }
            auto to_atoms = [](const std::map<Word, double>& m) {
                std::vector<FactorMeasure::Atom> v;
                for (const auto& [w, p] : m) v.push_back({w, p});
                return v;
            };
            first_ = std::make_shared<const FactorMeasure>(FactorMeasure::table(rank1_, to_atoms(m1)));
            second_ = std::make_shared<const FactorMeasure>(FactorMeasure::table(rank2_, to_atoms(m2)));
        }
    }

    Kind kind_ = Kind::Table;
    int rank1_;
    int rank2_;
    double rho_ = 0.0;
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    std::shared_ptr<const FactorMeasure> first_;
    std::shared_ptr<const FactorMeasure> second_;
};

} // namespace dimcons
