#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "dimcons/pivotal.hpp"
#include "dimcons/verification.hpp"

using namespace dimcons;

namespace {

const PivotalConstants kDefault;

Word power(int g, std::size_t k) {
    Word w(2);
    for (std::size_t i = 0; i < k; ++i) w.push(static_cast<Letter>(g));
    return w;
}

// The inductive rule on plain words.
std::vector<std::vector<std::size_t>> reference_pivots(const PivotalInput& in, const PivotalConstants& k) {
    const std::size_t n = in.size();
    std::vector<Word> ym{Word(2), in.u[0]}, y{Word(2)}, yp{Word(2)};
    std::vector<std::vector<std::size_t>> P{{}};
    for (std::size_t i = 1; i <= n; ++i) {
        y.push_back(ym[i] * in.a[i - 1]);
        yp.push_back(y[i] * in.b[i - 1]);
        ym.push_back(yp[i] * in.u[i]);
        const auto& prev = P.back();
        const Word yk = prev.empty() ? Word(2) : y[prev.back()];
        const bool lgc = gromov_product(yk, y[i], ym[i]) <= k.C0 && gromov_product(ym[i], yp[i], y[i]) <= k.C0 &&
                         gromov_product(y[i], ym[i + 1], yp[i]) <= k.C0;
        std::vector<std::size_t> next;
        if (lgc) {
            next = prev;
            next.push_back(i);
        } else {
            for (std::size_t j = prev.size(); j-- > 0;) {
                if (chain_shadow_contains(y[prev[j]], yp[prev[j]], k.C0, ym[i + 1])) {
                    next.assign(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(j + 1));
                    break;
                }
            }
        }
        P.push_back(next);
    }
    return P;
}

Word endpoint(const PivotalInput& in) {
    Word w = in.u[0];
    for (std::size_t i = 0; i < in.size(); ++i) w = w * in.a[i] * in.b[i] * in.u[i + 1];
    return w;
}

SchottkyDecomposition reference_decomposition(double alpha) {
    const auto S = construct_schottky_set(2, 200, static_cast<std::size_t>(kDefault.D), kDefault.C0, 1);
    const auto srw = FactorMeasure::srw(2);
    return {alpha, FactorMeasure::uniform(2, S), srw, MeasureSpec::product(srw, srw)};
}

PivotalInput random_input(const std::vector<Word>& S, std::size_t n, Rng& rng, std::size_t noise) {
    PivotalInput in;
    in.u.push_back(detail::random_reduced_word(2, rng.index(noise + 1), rng));
    for (std::size_t i = 0; i < n; ++i) {
        in.a.push_back(S[rng.index(S.size())]);
        in.b.push_back(S[rng.index(S.size())]);
        in.u.push_back(detail::random_reduced_word(2, rng.index(noise + 1), rng));
    }
    return in;
}

} // namespace

TEST(PivotalConstants, RejectsShortD) {
    EXPECT_NO_THROW(kDefault.validate());
    EXPECT_THROW((PivotalConstants{0.01, 4.0, 80.0}.validate()), ConfigError);
    EXPECT_THROW((PivotalConstants{0.6, 1.0, 30.0}.validate()), ConfigError);
}

TEST(PivotalTimes, AlignedPowersArePivotalEveryTime) {
    const auto aD = power(1, 81);
    PivotalInput in;
    for (int i = 0; i < 6; ++i) {
        in.a.push_back(aD);
        in.b.push_back(aD);
    }
    in.u.assign(7, Word(2));
    const auto tr = pivotal_times(in, kDefault, true);
    ASSERT_EQ(tr.P.size(), 7u);
    for (std::size_t t = 0; t <= 6; ++t) {
        std::vector<std::size_t> want(t);
        std::iota(want.begin(), want.end(), std::size_t{1});
        EXPECT_EQ(tr.P[t], want);
    }
    EXPECT_EQ(tr.audit.violations, 0u);
    EXPECT_EQ(tr.endpoint(), power(1, 81 * 12));
}

TEST(PivotalTimes, CancellationTruncates) {
    const auto aD = power(1, 81);
    PivotalInput in;
    for (int i = 0; i < 6; ++i) {
        in.a.push_back(aD);
        in.b.push_back(aD);
    }
    in.u.assign(7, Word(2));
    in.u.back() = (aD * aD * aD).inverse();
    const auto tr = pivotal_times(in, kDefault, true);
    EXPECT_EQ(tr.P[5].size(), 5u);
    EXPECT_LT(tr.final_pivots().size(), 6u);
    EXPECT_TRUE(std::equal(tr.final_pivots().begin(), tr.final_pivots().end(), tr.P[5].begin()));
    EXPECT_EQ(reference_pivots(in, kDefault), tr.P);
}

TEST(PivotalTimes, MatchesWordLevelRule) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 9);
    Rng rng(77);
    for (int t = 0; t < 60; ++t) {
        const auto in = random_input(S, 12, rng, t % 2 == 0 ? 20 : 120);
        const auto tr = pivotal_times(in, kDefault, true);
        EXPECT_EQ(tr.P, reference_pivots(in, kDefault)) << t;
        EXPECT_EQ(tr.endpoint(), endpoint(in));
        EXPECT_EQ(tr.audit.violations, 0u);
    }
}

TEST(PivotalTimes, MonotoneTruncation) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 9);
    Rng rng(78);
    for (int t = 0; t < 40; ++t) {
        const auto tr = pivotal_times(random_input(S, 20, rng, 150), kDefault);
        for (std::size_t i = 1; i < tr.P.size(); ++i) {
            const auto& prev = tr.P[i - 1];
            const auto& cur = tr.P[i];
            const bool extended = cur.size() == prev.size() + 1 && cur.back() == i &&
                                  std::equal(prev.begin(), prev.end(), cur.begin());
            const bool segment = cur.size() <= prev.size() && std::equal(cur.begin(), cur.end(), prev.begin());
            EXPECT_TRUE(extended || segment);
        }
    }
}

TEST(PivotalTimes, RejectsMalformedInput) {
    PivotalInput in;
    in.a = {power(1, 81)};
    in.b = {power(1, 81)};
    in.u = {Word(2)};
    EXPECT_THROW(pivotal_times(in, kDefault), ConfigError);
}

TEST(PivotedClass, NonPivotalIndicesAreFrozen) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 9);
    Rng rng(79);
    IndexedSequence s;
    std::vector<Word> u{Word(2)};
    for (int i = 0; i < 6; ++i) {
        s.a.push_back(rng.index(S.size()));
        s.b.push_back(rng.index(S.size()));
        u.push_back(i == 3 ? S[s.b.back()].inverse() * S[s.a.back()].inverse() : Word(2));
    }
    const auto pc = pivoted_class(S, s, u, kDefault);
    const std::set<std::size_t> piv(pc.pivots.begin(), pc.pivots.end());
    EXPECT_LT(piv.size(), 6u);
    for (std::size_t i = 1; i <= 6; ++i) {
        if (piv.count(i)) {
            EXPECT_GE(pc.A[i - 1].size(), 196u) << i;
        } else {
            EXPECT_EQ(pc.A[i - 1], std::vector<std::size_t>{s.a[i - 1]}) << i;
        }
    }
    EXPECT_TRUE(pc.size_bound);
}

// Endpoints over the product of the A_i, recomputed on words, are pairwise distinct.
TEST(PivotedClass, EndpointInjectivityByDirectEnumeration) {
    const PivotalConstants k{0.25, 1.0, 21.0};
    const auto S = construct_schottky_set(2, 8, 21, k.C0, 5);
    Rng rng(80);
    std::size_t members = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        for (int t = 0; t < 8; ++t) {
            IndexedSequence s;
            std::vector<Word> u{detail::random_reduced_word(2, rng.index(10), rng)};
            for (std::size_t i = 0; i < n; ++i) {
                s.a.push_back(rng.index(S.size()));
                s.b.push_back(rng.index(S.size()));
                u.push_back(detail::random_reduced_word(2, rng.index(t % 2 ? 30 : 8), rng));
            }
            const auto pc = pivoted_class(S, s, u, k, true);
            std::set<Word> ends;
            std::size_t count = 0;
            std::vector<std::size_t> digit(n, 0);
            for (;;) {
                IndexedSequence m = s;
                for (std::size_t i = 0; i < n; ++i) m.a[i] = pc.A[i][digit[i]];
                const auto in = materialize(S, m, u);
                EXPECT_EQ(pivotal_times(in, k).final_pivots(), pc.pivots);
                ends.insert(endpoint(in));
                ++count;
                std::size_t i = 0;
                while (i < n && ++digit[i] == pc.A[i].size()) digit[i++] = 0;
                if (i == n) break;
            }
            EXPECT_EQ(ends.size(), count);
            EXPECT_EQ(pc.enumeration->members, count);
            EXPECT_EQ(pc.enumeration->collisions, 0u);
            EXPECT_TRUE(pc.enumeration->symmetric);
            members += count;
        }
    }
    EXPECT_GT(members, 100u);
    EXPECT_TRUE(check_endpoint_injectivity(4, 12).passed);
}

TEST(PivotedClass, EnumerationLimits) {
    const auto S = construct_schottky_set(2, 8, 21, 1.0, 5);
    IndexedSequence s{std::vector<std::size_t>(9, 0), std::vector<std::size_t>(9, 1)};
    std::vector<Word> u(10, Word(2));
    EXPECT_THROW(pivoted_class(S, s, u, {0.25, 1.0, 21.0}, true), ConfigError);
    IndexedSequence t{std::vector<std::size_t>(6, 0), std::vector<std::size_t>(6, 1)};
    EXPECT_THROW(pivoted_class(S, t, std::vector<Word>(7, Word(2)), {0.25, 1.0, 21.0}, true, 1000), Error);
}

TEST(Coupling, FlagProbabilityAndBlockRate) {
    const auto d = reference_decomposition(0.5);
    const auto plan = plan_coupling(d, kDefault);
    EXPECT_EQ(plan.schottky.M, 1u);
    EXPECT_EQ(plan.N, 2u);
    EXPECT_NEAR(plan.beta, 1.0, 1e-12);
    EXPECT_NEAR(plan.flag_probability(), 0.25, 1e-12);
    Rng rng(81);
    double flags = 0.0, blocks = 0.0;
    for (int t = 0; t < 200; ++t) {
        const auto cs = sample_coupling(d, plan, 400, rng);
        flags += static_cast<double>(cs.tau);
        blocks += 200;
        EXPECT_EQ(cs.u.size(), cs.s.a.size() + 1);
    }
    const double sd = std::sqrt(0.25 * 0.75 / blocks);
    EXPECT_NEAR(flags / blocks, 0.25, 5 * sd);
}

TEST(Coupling, PureProductPivotsAtLeastHalfTheCandidates) {
    const auto d = reference_decomposition(1.0);
    const auto plan = plan_coupling(d, kDefault);
    Rng rng(82);
    for (int t = 0; t < 20; ++t) {
        const auto cs = sample_coupling(d, plan, 400, rng);
        ASSERT_GT(cs.tau, 0u);
        const auto tr = pivotal_times(materialize(plan.schottky.certificate.S, cs.s, cs.u), kDefault, true);
        EXPECT_GE(static_cast<double>(tr.final_pivots().size()), 0.5 * static_cast<double>(cs.tau));
        EXPECT_EQ(tr.audit.violations, 0u);
    }
}

TEST(Coupling, NoiseMixtureHasNoCertificate) {
    const auto d = SchottkyDecomposition::noise_mixture(0.5, FactorMeasure::srw(2));
    EXPECT_THROW(plan_coupling(d, kDefault), NoCertificate);
    EXPECT_THROW(pivotal_stats_and_entropy_gap(d, kDefault, {{50}, 10, 1}), NoCertificate);
}

TEST(Coupling, DecompositionMeasureIsNormalized) {
    const auto pi = reference_decomposition(0.5).measure();
    double total = 0.0;
    for (const auto& a : pi.atoms()) total += a.weight;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(pi.second_marginal().mass(Word::parse(2, "a")), 0.25, 1e-12);
}

TEST(PivotalStats, PositiveGapAndDecreasingTails) {
    const auto r = pivotal_stats_and_entropy_gap(reference_decomposition(0.5), kDefault, {{200, 400, 800}, 200, 3});
    ASSERT_EQ(r.per_time.size(), 3u);
    EXPECT_GT(r.kappa_hat, 0.0);
    EXPECT_GT(r.gap_bound, 0.0);
    EXPECT_NEAR(r.gap_bound, r.kappa_hat * std::log(0.98 * 200), 1e-12);
    EXPECT_TRUE(r.tail_decreasing);
    for (const auto& st : r.per_time) EXPECT_GT(st.mean_ratio, r.kappa_hat);
}
