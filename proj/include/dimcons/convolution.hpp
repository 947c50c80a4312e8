#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "measure.hpp"

namespace dimcons {

/// Reduced word packed into a 64-bit integer, letter i in bits [i*b, (i+1)*b).
/// Used as a compact, hashable and sortable state for exact convolution DPs.
class PackedAlphabet {
public:
    explicit PackedAlphabet(int rank)
        : rank_(rank), bits_(std::bit_width(static_cast<unsigned>(2 * rank - 1))), max_len_(64 / bits_),
          mask_((std::uint64_t{1} << bits_) - 1) {}

    int rank() const noexcept { return rank_; }
    std::uint32_t max_length() const noexcept { return max_len_; }

    std::uint8_t code(Letter l) const noexcept {
        return static_cast<std::uint8_t>(l > 0 ? l - 1 : rank_ - l - 1);
    }
    std::uint8_t inverse_code(std::uint8_t c) const noexcept {
        return static_cast<std::uint8_t>(c < rank_ ? c + rank_ : c - rank_);
    }

    struct Packed {
        std::uint64_t bits = 0;
        std::uint32_t len = 0;
        friend bool operator==(const Packed&, const Packed&) = default;
        friend auto operator<=>(const Packed&, const Packed&) = default;
    };

    /// Right-multiplies by a letter code. Returns false on length overflow.
    bool push(Packed& p, std::uint8_t c) const noexcept {
        if (p.len > 0) {
            const auto last = static_cast<std::uint8_t>((p.bits >> (bits_ * (p.len - 1))) & mask_);
            if (last == inverse_code(c)) {
                --p.len;
                p.bits &= ~(mask_ << (bits_ * p.len));
                return true;
            }
        }
        if (p.len >= max_len_) return false;
        p.bits |= static_cast<std::uint64_t>(c) << (bits_ * p.len);
        ++p.len;
        return true;
    }

    Packed pack(const Word& w) const {
        if (w.length() > max_len_) throw Unsupported("word too long for packed representation");
        Packed p;
        for (Letter l : w.letters()) push(p, code(l));
        return p;
    }

    std::uint32_t distance(const Packed& a, const Packed& b) const noexcept {
        const std::uint64_t x = a.bits ^ b.bits;
        std::uint32_t cp = x == 0 ? 64u : static_cast<std::uint32_t>(std::countr_zero(x)) / bits_;
        cp = std::min({cp, a.len, b.len});
        return a.len + b.len - 2 * cp;
    }

private:
    int rank_;
    std::uint32_t bits_;
    std::uint32_t max_len_;
    std::uint64_t mask_;
};

/// One step law for a D-coordinate walk: each atom lists its letters per coordinate.
template <std::size_t D>
struct PackedStepLaw {
    struct Atom {
        std::array<std::vector<std::uint8_t>, D> letters;
        double weight;
    };
    std::vector<Atom> atoms;
    std::array<std::uint32_t, D> max_length{};

    void add(std::array<const Word*, D> words, double weight, const std::array<const PackedAlphabet*, D>& alpha) {
        Atom a;
        a.weight = weight;
        for (std::size_t c = 0; c < D; ++c) {
            for (Letter l : words[c]->letters()) a.letters[c].push_back(alpha[c]->code(l));
            max_length[c] = std::max<std::uint32_t>(max_length[c], static_cast<std::uint32_t>(words[c]->length()));
        }
        atoms.push_back(std::move(a));
    }
};

inline constexpr std::size_t kDefaultStateBudget = 40'000'000;

/// Exact log P(w_n = t) for every t in `targets`, for a walk whose k-th step has law laws(k).
/// States that cannot reach any target in the remaining steps are pruned, so cost
/// tracks the "lens" between the identity and the targets.
template <std::size_t D, typename LawAt>
std::vector<double> pruned_log_masses(const std::array<const PackedAlphabet*, D>& alpha, std::size_t n, LawAt&& laws,
                                      const std::vector<std::array<Word, D>>& targets,
                                      std::size_t state_budget = kDefaultStateBudget) {
    using Packed = PackedAlphabet::Packed;
    using Key = std::array<Packed, D>;
    struct State {
        Key key;
        double p;
    };
    if (targets.empty()) return {};
    std::vector<Key> goals(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t c = 0; c < D; ++c) goals[i][c] = alpha[c]->pack(targets[i][c]);
    const Key& center = goals.front();
    std::array<std::uint64_t, D> slack{};
    for (const auto& g : goals)
        for (std::size_t c = 0; c < D; ++c) slack[c] = std::max<std::uint64_t>(slack[c], alpha[c]->distance(g[c], center[c]));

    // Reach bound per coordinate: max total displacement available from step k on.
    std::vector<std::array<std::uint64_t, D>> reach(n + 1);
    reach[n].fill(0);
    for (std::size_t k = n; k-- > 0;) {
        const auto& law = laws(k);
        for (std::size_t c = 0; c < D; ++c) reach[k][c] = reach[k + 1][c] + law.max_length[c];
    }

    std::vector<State> layer{{Key{}, 1.0}};
    std::vector<State> next;
    double log_scale = 0.0;
    for (std::size_t k = 0; k < n && !layer.empty(); ++k) {
        const auto& law = laws(k);
        next.clear();
        for (const auto& s : layer) {
            for (const auto& atom : law.atoms) {
                State t{s.key, s.p * atom.weight};
                bool ok = true;
                for (std::size_t c = 0; c < D && ok; ++c) {
                    for (auto code : atom.letters[c]) {
                        if (!alpha[c]->push(t.key[c], code)) {
                            ok = false;
                            break;
                        }
                    }
                    ok = ok && alpha[c]->distance(t.key[c], center[c]) <= reach[k + 1][c] + slack[c];
                }
                if (ok) next.push_back(t);
            }
        }
        if (next.size() > state_budget) throw Unsupported("exact convolution exceeded its state budget");
        std::sort(next.begin(), next.end(), [](const State& a, const State& b) { return a.key < b.key; });
        layer.clear();
        for (const auto& s : next) {
            if (!layer.empty() && layer.back().key == s.key) {
                layer.back().p += s.p;
            } else {
                layer.push_back(s);
            }
        }
        double peak = 0.0;
        for (const auto& s : layer) peak = std::max(peak, s.p);
        if (peak > 0.0) {
            for (auto& s : layer) s.p /= peak;
            log_scale += std::log(peak);
        }
    }
    std::vector<double> out;
    out.reserve(goals.size());
    for (const auto& g : goals) {
        const auto it = std::lower_bound(layer.begin(), layer.end(), g,
                                         [](const State& s, const Key& key) { return s.key < key; });
        out.push_back(it != layer.end() && it->key == g && it->p > 0.0 ? log_scale + std::log(it->p) : -INFINITY);
    }
    return out;
}

template <std::size_t D, typename LawAt>
double pruned_log_mass(const std::array<const PackedAlphabet*, D>& alpha, std::size_t n, LawAt&& laws,
                       const std::array<Word, D>& target, std::size_t state_budget = kDefaultStateBudget) {
    return pruned_log_masses<D>(alpha, n, std::forward<LawAt>(laws), {target}, state_budget).front();
}

/// log mu_n(target) for a finitely supported measure on one free group.
inline double log_convolution_mass(const FactorMeasure& mu, std::size_t n, const Word& target,
                                   std::size_t state_budget = kDefaultStateBudget) {
    require_same_group(target, Word(mu.rank()));
    const PackedAlphabet alpha(mu.rank());
    PackedStepLaw<1> law;
    for (const auto& a : mu.atoms()) law.add({&a.value}, a.weight, {&alpha});
    return pruned_log_mass<1>({&alpha}, n, [&](std::size_t) -> const PackedStepLaw<1>& { return law; }, {target},
                              state_budget);
}

/// log pi_n(target) for a finitely supported measure on F_m x F_m*.
inline double log_convolution_mass(const MeasureSpec& pi, std::size_t n, const ProductElement& target,
                                   std::size_t state_budget = kDefaultStateBudget) {
    require_same_group(target.first, Word(pi.rank1()));
    require_same_group(target.second, Word(pi.rank2()));
    const PackedAlphabet a1(pi.rank1()), a2(pi.rank2());
    PackedStepLaw<2> law;
    for (const auto& a : pi.atoms()) law.add({&a.value.first, &a.value.second}, a.weight, {&a1, &a2});
    return pruned_log_mass<2>({&a1, &a2}, n, [&](std::size_t) -> const PackedStepLaw<2>& { return law; },
                              {target.first, target.second}, state_budget);
}

/// log pi_n(t) for several targets in one pass.
inline std::vector<double> log_convolution_masses(const MeasureSpec& pi, std::size_t n,
                                                  const std::vector<ProductElement>& targets,
                                                  std::size_t state_budget = kDefaultStateBudget) {
    const PackedAlphabet a1(pi.rank1()), a2(pi.rank2());
    PackedStepLaw<2> law;
    for (const auto& a : pi.atoms()) law.add({&a.value.first, &a.value.second}, a.weight, {&a1, &a2});
    std::vector<std::array<Word, 2>> goals;
    for (const auto& t : targets) {
        require_same_group(t.first, Word(pi.rank1()));
        require_same_group(t.second, Word(pi.rank2()));
        goals.push_back({t.first, t.second});
    }
    return pruned_log_masses<2>({&a1, &a2}, n, [&](std::size_t) -> const PackedStepLaw<2>& { return law; }, goals,
                                state_budget);
}

} // namespace dimcons
