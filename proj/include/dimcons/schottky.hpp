#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chain.hpp"
#include "measure.hpp"
#include "rng.hpp"

namespace dimcons {

/// No Schottky set could be certified where one was required.
class NoCertificate : public Error {
public:
    using Error::Error;
};

struct SchottkyCounterexample {
    int condition = 0;  // 1, 2 or 3 of the definition
    Word x;
    Word y;
    std::size_t bad = 0;  // elements violating the bound at (x, y)
};

struct SchottkyEvidence {
    std::size_t shortest = 0;             // min |s|
    std::size_t prefix_class = 0;         // most elements of S sharing a depth-(C+1) prefix
    std::size_t inverse_prefix_class = 0; // same for S^{-1}
    long max_pairwise_product = 0;        // over distinct elements of S and S^{-1}
    bool combinatorial = false;           // prefix_class + inverse_prefix_class <= eps #S
    std::size_t adversarial_trials = 0;
    std::size_t worst_bad = 0;            // largest violation count met by the search
};

struct SchottkyCertificate {
    std::vector<Word> S;
    double eps = 0.01;
    double C = 4.0;
    double D = 81.0;
    bool certified = false;
    SchottkyEvidence evidence;
    std::optional<SchottkyCounterexample> counterexample;
};

namespace detail {

inline std::size_t largest_prefix_class(const std::vector<Word>& words, std::size_t depth) {
    std::map<std::vector<Letter>, std::size_t> classes;
    std::size_t best = 0;
    for (const auto& w : words) {
        const auto l = w.letters().first(std::min(depth, w.length()));
        best = std::max(best, ++classes[std::vector<Letter>(l.begin(), l.end())]);
    }
    return best;
}

/// #{s : (x|s y)_o > C} for condition 1, or with s^{-1} for condition 2.
inline std::size_t violations(const std::vector<Word>& S, const Word& x, const Word& y, double C, bool inverse) {
    std::size_t bad = 0;
    for (const auto& s : S) {
        const Word moved = (inverse ? s.inverse() : s) * y;
        if (static_cast<double>(common_prefix_length(x, moved)) > C) ++bad;
    }
    return bad;
}

inline Word random_reduced_word(int rank, std::size_t length, Rng& rng) {
    Word w(rank);
    while (w.length() < length) {
        const auto g = static_cast<int>(rng.index(static_cast<std::uint64_t>(rank))) + 1;
        const Letter l = static_cast<Letter>(rng.bernoulli(0.5) ? g : -g);
        if (!w.empty() && w.letters().back() == -l) continue;
        w.push(l);
    }
    return w;
}

} // namespace detail

/// Certifies (eps, C, D)-Schottky. Condition (3) is exact. Conditions (1) and (2) hold whenever
/// the largest depth-(C+1) prefix classes of S and S^{-1} sum to at most eps #S and every
/// |s| >= 2C + 1: s y keeps the prefix of s unless y cancels all but C letters of s, and then
/// y starts with the prefix of s^{-1}. A randomized search over (x, y), seeded with the extremal
/// choices x = s_i, y = s_j^{-1} s_i, looks for explicit violations.
inline SchottkyCertificate schottky_certify(const std::vector<Word>& S, double eps, double C, double D,
                                            std::size_t trials = 2000, std::uint64_t seed = 1) {
    if (S.empty()) throw ConfigError("Schottky set must be nonempty");
    for (const auto& s : S) require_same_group(s, S.front());
    SchottkyCertificate cert{S, eps, C, D, false, {}, std::nullopt};
    auto& ev = cert.evidence;
    const int rank = S.front().rank();
    const auto depth = static_cast<std::size_t>(floor_bound(C) + 1);
    const double allowed = eps * static_cast<double>(S.size());

    ev.shortest = S.front().length();
    for (const auto& s : S) ev.shortest = std::min(ev.shortest, s.length());
    for (const auto& s : S) {
        if (static_cast<double>(s.length()) < D) {
            cert.counterexample = SchottkyCounterexample{3, Word(rank), s, 1};
            return cert;
        }
    }

    std::vector<Word> inverses;
    for (const auto& s : S) inverses.push_back(s.inverse());
    ev.prefix_class = detail::largest_prefix_class(S, depth);
    ev.inverse_prefix_class = detail::largest_prefix_class(inverses, depth);
    std::vector<Word> both = S;
    both.insert(both.end(), inverses.begin(), inverses.end());
    std::sort(both.begin(), both.end());
    both.erase(std::unique(both.begin(), both.end()), both.end());
    for (std::size_t i = 0; i < both.size(); ++i)
        for (std::size_t j = i + 1; j < both.size(); ++j)
            ev.max_pairwise_product = std::max(ev.max_pairwise_product, gromov_product(both[i], both[j]));
    ev.combinatorial = static_cast<double>(ev.prefix_class + ev.inverse_prefix_class) <= allowed &&
                       static_cast<double>(ev.shortest) >= 2.0 * C + 1.0;

    Rng rng(seed);
    auto probe = [&](const Word& x, const Word& y) {
        ++ev.adversarial_trials;
        for (int condition : {1, 2}) {
            const std::size_t bad = detail::violations(S, x, y, C, condition == 2);
            ev.worst_bad = std::max(ev.worst_bad, bad);
            if (static_cast<double>(bad) > allowed && !cert.counterexample)
                cert.counterexample = SchottkyCounterexample{condition, x, y, bad};
        }
        return !cert.counterexample;
    };
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& si = S[rng.index(S.size())];
        const auto& sj = S[rng.index(S.size())];
        bool clean = true;
        switch (t % 4) {
        case 0: clean = probe(si, sj.inverse() * si); break;
        case 1: clean = probe(si.inverse(), sj * si.inverse()); break;
        case 2: clean = probe(si.prefix(std::min(si.length(), depth)), detail::random_reduced_word(rank, 1 + rng.index(8), rng)); break;
        default:
            clean = probe(detail::random_reduced_word(rank, 1 + rng.index(2 * depth), rng),
                          detail::random_reduced_word(rank, rng.index(si.length() + 8), rng));
        }
        if (!clean) break;
    }
    cert.certified = ev.combinatorial && !cert.counterexample;
    return cert;
}

/// Words of the given length with pairwise distinct depth-(C+1) prefixes and pairwise
/// distinct depth-(C+1) prefixes of their inverses.
inline std::vector<Word> construct_schottky_set(int rank, std::size_t count, std::size_t length, double C,
                                                std::uint64_t seed = 1) {
    const auto depth = static_cast<std::size_t>(floor_bound(C) + 1);
    if (length < 2 * depth + 1) throw ConfigError("Schottky words must be longer than twice the prefix depth");
    const auto heads = words_of_length(rank, depth);
    if (count > heads.size())
        throw ConfigError("only " + std::to_string(heads.size()) + " distinct prefixes of depth " + std::to_string(depth));
    Rng rng(seed);
    std::vector<std::size_t> tails(heads.size());
    for (std::size_t i = 0; i < tails.size(); ++i) tails[i] = i;
    std::vector<Word> out;
    std::set<std::size_t> used_tails;
    for (std::size_t i = 0; i < count; ++i) {
        const Word& head = heads[i];
        for (std::size_t attempt = 0;; ++attempt) {
            if (attempt > 64 * heads.size()) throw ConfigError("could not complete the Schottky construction");
            const std::size_t tail_index = tails[rng.index(tails.size())];
            if (used_tails.count(tail_index)) continue;
            const Word tail = heads[tail_index].inverse();
            Word w = head;
            while (w.length() + tail.length() < length) {
                const auto g = static_cast<int>(rng.index(static_cast<std::uint64_t>(rank))) + 1;
                const Letter l = static_cast<Letter>(rng.bernoulli(0.5) ? g : -g);
                if (w.letters().back() == -l) continue;
                if (w.length() + tail.length() + 1 == length && l == -tail.letters().front()) continue;
                w.push(l);
            }
            if (w.letters().back() == -tail.letters().front()) continue;
            w *= tail;
            if (w.length() != length) continue;
            used_tails.insert(tail_index);
            out.push_back(std::move(w));
            break;
        }
    }
    return out;
}

struct SchottkySearch {
    std::size_t M = 0;  // S lies in the support of lambda^{*M}
    SchottkyCertificate certificate;
};

/// Looks for a certifiable set in supp(lambda^{*M}), M = 1..max_m: greedily keeps support words
/// of length >= D with new prefix and inverse-prefix classes.
inline SchottkySearch schottky_search(const FactorMeasure& lambda, double eps, double C, double D,
                                      std::size_t max_m = 8, std::size_t support_budget = 2'000'000) {
    const auto depth = static_cast<std::size_t>(floor_bound(C) + 1);
    std::set<Word> support{Word(lambda.rank())};
    for (std::size_t M = 1; M <= max_m; ++M) {
        std::set<Word> next;
        for (const auto& w : support)
            for (const auto& a : lambda.atoms()) {
                next.insert(w * a.value);
                if (next.size() > support_budget) throw NoCertificate("support of lambda^{*M} exceeds the search budget");
            }
        support = std::move(next);
        std::set<std::vector<Letter>> heads, tails;
        std::vector<Word> chosen;
        for (const auto& w : support) {
            if (static_cast<double>(w.length()) < D || w.length() < 2 * depth + 1) continue;
            const auto h = w.letters().first(depth);
            const Word inv = w.inverse();
            const auto t = inv.letters().first(depth);
            std::vector<Letter> hv(h.begin(), h.end()), tv(t.begin(), t.end());
            if (heads.count(hv) || tails.count(tv)) continue;
            heads.insert(hv);
            tails.insert(tv);
            chosen.push_back(w);
        }
        if (static_cast<double>(chosen.size()) * eps < 2.0) continue;
        auto cert = schottky_certify(chosen, eps, C, D);
        if (cert.certified) return {M, std::move(cert)};
    }
    throw NoCertificate("no (" + std::to_string(eps) + ", " + std::to_string(C) + ", " + std::to_string(D) +
                        ")-Schottky set in supp(lambda^{*M}) for M <= " + std::to_string(max_m));
}

} // namespace dimcons
