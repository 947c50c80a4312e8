#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chain.hpp"
#include "dimension.hpp"
#include "doob.hpp"
#include "harmonic.hpp"
#include "pivotal.hpp"
#include "schottky.hpp"

namespace dimcons {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct SelfTestReport {
    std::string level;
    std::vector<CheckResult> checks;

    bool passed() const {
        if (checks.empty()) return false;
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

namespace oracle {

/// nu(cyl(w)) for SRW on F_m by first-step analysis. q = P(ever hit a fixed neighbour) is the
/// smallest root of q = 1/2m + (2m-1)/2m q^2, found by iterating from 0; x = P(limit below w | at w)
/// solves the linear equation x = (2m-1)/2m ((1 - q) + q x) + q x / 2m. Then nu(cyl(w)) = q^|w| x.
inline double first_step_cylinder_mass(int rank, std::size_t length) {
    if (length == 0) return 1.0;
    const double m2 = 2.0 * rank;
    double q = 0.0;
    for (int it = 0; it < 1'000'000; ++it) {
        const double next = 1.0 / m2 + (m2 - 1.0) / m2 * q * q;
        if (next == q) break;
        q = next;
    }
    const double x = ((m2 - 1.0) / m2 * (1.0 - q)) / (1.0 - (m2 - 1.0) / m2 * q - q / m2);
    return std::pow(q, static_cast<double>(length)) * x;
}

/// Points within c of the geodesic [a, b].
inline std::vector<Word> near_geodesic(const Word& a, const Word& b, long c) {
    std::set<Word> out;
    Word g = a;
    std::vector<Word> geodesic{a};
    const Word step = a.inverse() * b;
    for (Letter l : step.letters()) {
        g.push(l);
        geodesic.push_back(g);
    }
    for (const auto& v : geodesic) {
        std::vector<Word> frontier{v};
        out.insert(v);
        for (long r = 0; r < c; ++r) {
            std::vector<Word> next;
            for (const auto& f : frontier)
                for (int i = 1; i <= a.rank(); ++i)
                    for (int s : {i, -i}) {
                        Word w = f;
                        w.push(static_cast<Letter>(s));
                        if (out.insert(w).second) next.push_back(w);
                    }
            frontier = std::move(next);
        }
    }
    return {out.begin(), out.end()};
}

/// Depth-first search for a (C, 2C+1)-chain o = x_0, x_1, ..., x_n = z with (o|x_1)_y <= C.
/// Every later point of such a chain lies within C of the geodesic from the current point to z.
inline bool chain_shadow_by_search(const Word& y, double C, const Word& z) {
    const long c = floor_bound(C);
    const double D = 2.0 * C + 1.0;
    const Word o(z.rank());
    std::set<std::pair<Word, Word>> seen;
    std::function<bool(const Word&, const Word&)> dfs = [&](const Word& prev, const Word& cur) {
        if (cur == z) return true;
        if (!seen.insert({prev, cur}).second) return false;
        for (const auto& v : near_geodesic(cur, z, c)) {
            if (static_cast<double>(distance(cur, v)) < D) continue;
            if (static_cast<double>(gromov_product(prev, v, cur)) > C) continue;
            if (dfs(cur, v)) return true;
        }
        return false;
    };
    for (const auto& x1 : near_geodesic(o, z, c)) {
        if (static_cast<double>(x1.length()) < D) continue;
        if (static_cast<double>(gromov_product(o, x1, y)) > C) continue;
        if (dfs(o, x1)) return true;
    }
    return false;
}

} // namespace oracle

namespace detail {

template <typename Fn>
CheckResult timed_check(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r{name, false, "", 0.0};
    try {
        fn(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline std::vector<Word> words_up_to(int rank, std::size_t length) {
    std::vector<Word> out;
    for (std::size_t k = 0; k <= length; ++k) {
        auto w = words_of_length(rank, k);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

inline std::vector<BoundaryPoint> probe_boundary_points(int rank, std::size_t depth) {
    std::vector<BoundaryPoint> out;
    for (int g = 1; g <= rank; ++g) {
        out.push_back(BoundaryPoint::ray(rank, g, depth));
        out.push_back(BoundaryPoint::ray(rank, -g, depth));
    }
    Rng rng(0xB0DAull);
    for (int i = 0; i < 4; ++i) out.emplace_back(detail::random_reduced_word(rank, depth, rng));
    return out;
}

} // namespace detail

/// Exact-measure checks, parameterized by the cylinder mass rule under test.
inline CheckResult check_first_step_oracle(const CylinderMassFn& mass) {
    return detail::timed_check("cylinder masses match first-step analysis", [&](CheckResult& r) {
        std::size_t bad = 0, total = 0;
        for (int rank : {2, 3}) {
            for (std::size_t k = 1; k <= 6; ++k) {
                const double want = oracle::first_step_cylinder_mass(rank, k);
                for (const auto& w : words_of_length(rank, k)) {
                    ++total;
                    if (std::abs(mass(rank, w) - want) > 1e-12 * want) ++bad;
                }
            }
        }
        r.passed = bad == 0;
        r.detail = std::to_string(bad) + " of " + std::to_string(total) + " cylinders off";
    });
}

inline CheckResult check_cylinder_normalization(const CylinderMassFn& mass) {
    return detail::timed_check("cylinder masses sum to 1 at each depth", [&](CheckResult& r) {
        double worst = 0.0;
        for (std::size_t k = 1; k <= 10; ++k) {
            CompensatedSum s;
            for (const auto& w : words_of_length(2, k)) s.add(mass(2, w));
            worst = std::max(worst, std::abs(s.value() - 1.0));
        }
        r.passed = worst <= 1e-9;
        r.detail = "max |sum - 1| = " + std::to_string(worst);
    });
}

inline CheckResult check_exact_dimension_fit(const CylinderMassFn& mass) {
    return detail::timed_check("exact-mass fit gives log 3", [&](CheckResult& r) {
        const BoundaryPoint center = BoundaryPoint::ray(2, 1, 24);
        const auto f = exact_dimension_fit(2, center, 2, 22, mass);
        const double err = std::abs(f.slope - std::log(3.0));
        r.passed = err <= 1e-6;
        r.detail = "slope " + std::to_string(f.slope) + ", |err| = " + std::to_string(err);
    });
}

inline CheckResult check_rn_cocycle() {
    return detail::timed_check("RN cocycle, exhaustive |x|, |y| <= 3", [](CheckResult& r) {
        std::size_t bad = 0, total = 0;
        for (int rank : {2, 3}) {
            const auto words = detail::words_up_to(rank, 3);
            for (const auto& eta : detail::probe_boundary_points(rank, 32)) {
                for (const auto& x : words) {
                    const BoundaryPoint moved = translate(x, eta);
                    for (const auto& y : words) {
                        ++total;
                        if (busemann(x * y, eta) != busemann(x, eta) + busemann(y, moved)) ++bad;
                    }
                }
            }
        }
        const auto a = Word::parse(2, "a"), b = Word::parse(2, "b");
        const auto ray = BoundaryPoint::ray(2, 1, 32);
        const bool examples = rn_derivative(2, a, ray) == 3.0 && rn_derivative(2, Word(2), ray) == 1.0 &&
                              busemann(b, ray) == 1;
        r.passed = bad == 0 && examples;
        r.detail = std::to_string(bad) + " of " + std::to_string(total) + " cocycle triples fail; examples " +
                   (examples ? "ok" : "wrong");
    });
}

inline CheckResult check_doob_cylinder_identity() {
    return detail::timed_check("Doob cylinder identity, exhaustive n <= 3", [](CheckResult& r) {
        const auto mu = FactorMeasure::srw(2);
        const MeasureSpec pi = MeasureSpec::noise_mixture(0.5, mu);
        const DoobWalk walk(pi, BoundaryPoint::ray(2, 1, 32));
        std::size_t bad = 0, paths = 0;
        double worst_row = 0.0;
        const std::size_t k = pi.atoms().size();
        for (std::size_t n = 1; n <= 3; ++n) {
            std::vector<std::size_t> idx(n, 0);
            for (;;) {
                ++paths;
                double base = 1.0;
                ProductElement end = ProductElement::identity(2, 2);
                auto state = walk.initial();
                for (auto a : idx) {
                    const auto row = walk.kernel(state);
                    double total = 0.0;
                    for (double v : row) total += v;
                    worst_row = std::max(worst_row, std::abs(total - 1.0));
                    walk.advance(state, a);
                    base *= pi.atoms()[a].weight;
                    end *= pi.atoms()[a].value;
                }
                const double want = base * rn_derivative(2, end.second, walk.eta());
                const double got = walk.path_probability(idx);
                if (std::abs(got - want) > 1e-12 * want) ++bad;
                std::size_t q = 0;
                while (q < n && ++idx[q] == k) idx[q++] = 0;
                if (q == n) break;
            }
        }
        r.passed = bad == 0 && worst_row <= 1e-9;
        r.detail = std::to_string(bad) + " of " + std::to_string(paths) + " paths off; worst row error " +
                   std::to_string(worst_row);
    });
}

/// O(x, R) against the ball of radius e^{-|x|+R} around a point of the shadow, for every x
/// with |x| <= max_length.
inline CheckResult check_shadow_ball_sandwich(std::size_t max_length = 12) {
    return detail::timed_check("shadow-ball sandwich, exhaustive |x| <= " + std::to_string(max_length),
                               [&](CheckResult& r) {
        const int rank = 2;
        const std::size_t depth = max_length + 4;
        const auto etas = detail::probe_boundary_points(rank, depth);
        const std::vector<double> thickness{0.5, 1.0, 2.5, 4.0};
        std::size_t bad = 0, total = 0;
        for (std::size_t k = 0; k <= max_length; ++k) {
            for (const auto& x : words_of_length(rank, k)) {
                Word xi = x;
                while (xi.length() < depth + 8) xi.push(xi.empty() || xi.back() != -1 ? 1 : 2);
                const BoundaryPoint center(xi);
                for (const auto& eta : etas) {
                    const auto g = gromov_product(center, eta);
                    for (double R : thickness) {
                        ++total;
                        const bool in_shadow = shadow_contains(x, R, eta);
                        const double radius = std::exp(-static_cast<double>(k) + R);
                        const bool in_ball = g.truncated || std::exp(-static_cast<double>(g.value)) < radius;
                        if (in_shadow != in_ball) ++bad;
                    }
                }
            }
        }
        r.passed = bad == 0;
        r.detail = std::to_string(bad) + " of " + std::to_string(total) + " (x, R, eta) disagree";
    });
}

/// chain_shadow_contains against exhaustive chain search for all z with |z| <= max_length.
/// In rank >= 2 the answer depends only on (|y|, |z|, (y|z)_o), so the search runs once per
/// class while the decision runs on every z and on a translated copy.
inline CheckResult check_chain_shadow_oracle(std::size_t max_length = 12) {
    return detail::timed_check("chain shadow vs chain search, exhaustive |z| <= " + std::to_string(max_length),
                               [&](CheckResult& r) {
        std::size_t bad = 0, total = 0, searches = 0;
        const std::vector<double> Cs{0.0, 1.0, 1.5, 2.0};
        for (double C : Cs) {
            for (const char* ys : {"", "a", "aB", "abab"}) {
                const Word y = Word::parse(2, ys);
                const Word x = Word::parse(2, "bAb");
                std::map<std::pair<std::size_t, std::size_t>, bool> classes;
                for (std::size_t k = 0; k <= max_length; ++k) {
                    for (const auto& z : words_of_length(2, k)) {
                        const auto key = std::pair{k, common_prefix_length(y, z)};
                        auto it = classes.find(key);
                        if (it == classes.end()) {
                            ++searches;
                            it = classes.emplace(key, oracle::chain_shadow_by_search(y, C, z)).first;
                        }
                        ++total;
                        if (chain_shadow_contains(Word(2), y, C, z) != it->second) ++bad;
                        if (chain_shadow_contains(x, x * y, C, x * z) != it->second) ++bad;
                    }
                }
            }
            for (const char* ys : {"", "a", "aaa", "A"}) {
                const Word y = Word::parse(1, ys);
                for (std::size_t k = 0; k <= max_length; ++k) {
                    for (const auto& z : words_of_length(1, k)) {
                        ++total;
                        ++searches;
                        if (chain_shadow_contains(Word(1), y, C, z) != oracle::chain_shadow_by_search(y, C, z)) ++bad;
                    }
                }
            }
        }
        r.passed = bad == 0;
        r.detail = std::to_string(bad) + " mismatches over " + std::to_string(total) + " instances (" +
                   std::to_string(searches) + " chain searches)";
    });
}

inline CheckResult check_chain_examples() {
    return detail::timed_check("chain examples", [](CheckResult& r) {
        const std::size_t D = 6;
        Word aD(2), aDbD(2), back(2);
        for (std::size_t i = 0; i < D; ++i) aD.push(1);
        aDbD = aD;
        for (std::size_t i = 0; i < D; ++i) aDbD.push(2);
        for (std::size_t i = 0; i < D / 2; ++i) back.push(1);
        back.push(2);
        const auto good = is_chain({Word(2), aD, aDbD}, {0.0, static_cast<double>(D)});
        const auto bad = is_chain({Word(2), aD, back}, {0.0, static_cast<double>(D) / 2.0});
        r.passed = good.ok && !bad.ok && bad.violation == std::size_t{1};
        r.detail = std::string("corner chain ") + (good.ok ? "accepted" : "rejected") + ", backtrack " +
                   (bad.ok ? "accepted" : "rejected at " + std::to_string(*bad.violation));
    });
}

inline CheckResult check_schottky_examples() {
    return detail::timed_check("Schottky certification examples", [](CheckResult& r) {
        const PivotalConstants k;
        const auto S = construct_schottky_set(2, 200, 81, k.C0, 7);
        const auto good = schottky_certify(S, k.eps, k.C0, k.D);
        auto short_set = S;
        short_set.back() = short_set.back().prefix(40);
        const auto shortc = schottky_certify(short_set, k.eps, k.C0, k.D);
        r.passed = good.certified && !shortc.certified && shortc.counterexample &&
                   shortc.counterexample->condition == 3;
        r.detail = std::string("200 words ") + (good.certified ? "certified" : "rejected") +
                   ", short word gives condition " +
                   (shortc.counterexample ? std::to_string(shortc.counterexample->condition) : "none");
    });
}

inline CheckResult check_pivotal_examples() {
    return detail::timed_check("pivotal times examples", [](CheckResult& r) {
        const PivotalConstants k;
        const auto n = static_cast<std::size_t>(k.D);
        Word aD(2);
        for (std::size_t i = 0; i < n; ++i) aD.push(1);
        PivotalInput aligned;
        for (int i = 0; i < 6; ++i) {
            aligned.a.push_back(aD);
            aligned.b.push_back(aD);
        }
        aligned.u.assign(7, Word(2));
        const auto full = pivotal_times(aligned, k, true);
        bool all = full.P.front().empty() && full.final_pivots().size() == 6;

        PivotalInput cancel = aligned;
        cancel.u.back() = (aD * aD * aD).inverse();
        const auto cut = pivotal_times(cancel, k, true);
        const bool truncated = cut.final_pivots().size() < 6;
        r.passed = all && truncated && full.audit.violations == 0 && cut.audit.violations == 0;
        r.detail = "aligned: #P = " + std::to_string(full.final_pivots().size()) + ", cancelled: #P = " +
                   std::to_string(cut.final_pivots().size());
    });
}

/// Full enumeration of pivoted classes for the 8-letter test set at n <= max_n.
inline CheckResult check_endpoint_injectivity(std::size_t max_n = 4, std::size_t sequences = 12) {
    return detail::timed_check("endpoint injectivity on enumerated classes, n <= " + std::to_string(max_n),
                               [&](CheckResult& r) {
        const PivotalConstants k{0.25, 1.0, 21.0};
        const auto S = construct_schottky_set(2, 8, 21, k.C0, 5);
        Rng rng(0x1D5Eull);
        std::size_t members = 0, collisions = 0, classes = 0;
        bool structure = true;
        for (std::size_t n = 1; n <= max_n; ++n) {
            for (std::size_t t = 0; t < sequences; ++t) {
                IndexedSequence s;
                std::vector<Word> u{detail::random_reduced_word(2, rng.index(12), rng)};
                for (std::size_t i = 0; i < n; ++i) {
                    s.a.push_back(rng.index(S.size()));
                    s.b.push_back(rng.index(S.size()));
                    u.push_back(detail::random_reduced_word(2, rng.index(t % 3 == 0 ? 40 : 12), rng));
                }
                const auto pc = pivoted_class(S, s, u, k, true);
                ++classes;
                members += pc.enumeration->members;
                collisions += pc.enumeration->collisions;
                structure = structure && pc.size_bound && pc.enumeration->product_structure && pc.enumeration->symmetric;
            }
        }
        r.passed = collisions == 0 && structure;
        r.detail = std::to_string(collisions) + " collisions over " + std::to_string(members) + " members of " +
                   std::to_string(classes) + " classes; structure " + (structure ? "ok" : "broken");
    });
}

/// The oracle-equivalence and exhaustive suites. The cylinder mass rule is injectable so a
/// corrupted rule can be shown to fail.
inline SelfTestReport fast_self_test(const CylinderMassFn& mass = exact_cylinder_mass) {
    SelfTestReport r;
    r.level = "fast";
    r.checks.push_back(check_first_step_oracle(mass));
    r.checks.push_back(check_cylinder_normalization(mass));
    r.checks.push_back(check_exact_dimension_fit(mass));
    r.checks.push_back(check_rn_cocycle());
    r.checks.push_back(check_doob_cylinder_identity());
    r.checks.push_back(check_shadow_ball_sandwich());
    r.checks.push_back(check_chain_examples());
    r.checks.push_back(check_chain_shadow_oracle());
    r.checks.push_back(check_schottky_examples());
    r.checks.push_back(check_pivotal_examples());
    r.checks.push_back(check_endpoint_injectivity());
    return r;
}

} // namespace dimcons
