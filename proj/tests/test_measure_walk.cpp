#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>

#include "dimcons/convolution.hpp"
#include "dimcons/radial.hpp"
#include "dimcons/theory.hpp"
#include "dimcons/walk.hpp"

using namespace dimcons;

namespace {

// mu^{*n} by expanding every step sequence.
std::map<Word, double> brute_convolution(const FactorMeasure& mu, std::size_t n) {
    std::map<Word, double> cur{{Word(mu.rank()), 1.0}};
    for (std::size_t i = 0; i < n; ++i) {
        std::map<Word, double> next;
        for (const auto& [w, p] : cur)
            for (const auto& a : mu.atoms()) next[w * a.value] += p * a.weight;
        cur = std::move(next);
    }
    return cur;
}

std::map<ProductElement, double> brute_convolution(const MeasureSpec& pi, std::size_t n) {
    std::map<ProductElement, double> cur{{ProductElement::identity(pi.rank1(), pi.rank2()), 1.0}};
    for (std::size_t i = 0; i < n; ++i) {
        std::map<ProductElement, double> next;
        for (const auto& [w, p] : cur)
            for (const auto& a : pi.atoms()) next[w * a.value] += p * a.weight;
        cur = std::move(next);
    }
    return cur;
}

double total_weight(const auto& atoms) {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

struct ThreadsEnv {
    explicit ThreadsEnv(const char* v) { setenv("DIMCONS_THREADS", v, 1); }
    ~ThreadsEnv() { unsetenv("DIMCONS_THREADS"); }
};

} // namespace

TEST(Measure, FactorLaws) {
    const auto srw = FactorMeasure::srw(3);
    EXPECT_EQ(srw.atoms().size(), 6u);
    EXPECT_NEAR(total_weight(srw.atoms()), 1.0, 1e-15);
    const auto lazy = FactorMeasure::lazy_srw(2, 0.5);
    EXPECT_DOUBLE_EQ(lazy.mass(Word(2)), 0.5);
    EXPECT_DOUBLE_EQ(lazy.mass(Word::parse(2, "B")), 0.125);
    EXPECT_THROW(FactorMeasure::lazy_srw(2, 1.0), ConfigError);
}

TEST(Measure, NoiseMixtureAtoms) {
    const auto mu = FactorMeasure::srw(2);
    for (double rho : {0.0, 0.3, 1.0}) {
        const auto pi = MeasureSpec::noise_mixture(rho, mu);
        EXPECT_NEAR(total_weight(pi.atoms()), 1.0, 1e-12);
        for (const auto& a : mu.atoms())
            for (const auto& b : mu.atoms()) {
                const double want = rho * a.weight * b.weight + (a.value == b.value ? (1.0 - rho) * a.weight : 0.0);
                EXPECT_NEAR(pi.mass({a.value, b.value}), want, 1e-15);
            }
        for (const auto& a : mu.atoms()) {
            EXPECT_NEAR(pi.first_marginal().mass(a.value), a.weight, 1e-12);
            EXPECT_NEAR(pi.second_marginal().mass(a.value), a.weight, 1e-12);
        }
    }
    EXPECT_THROW(MeasureSpec::noise_mixture(1.5, mu), ConfigError);
}

TEST(Measure, DiagonalPushMarginal) {
    const auto mu = FactorMeasure::srw(3);
    const auto pi = MeasureSpec::diagonal_push(mu);
    const KillLastGenerator kill(2);
    std::map<Word, double> pushed;
    for (const auto& a : mu.atoms()) pushed[kill(a.value)] += a.weight;
    for (const auto& [w, p] : pushed) EXPECT_NEAR(pi.second_marginal().mass(w), p, 1e-12);
    EXPECT_NEAR(pi.second_marginal().hold(), 1.0 / 3.0, 1e-12);
    EXPECT_THROW(MeasureSpec::diagonal_push(FactorMeasure::srw(1)), ConfigError);
}

TEST(Measure, SamplingFrequencies) {
    const auto mu = FactorMeasure::lazy_srw(2, 0.2);
    Rng rng(99);
    std::map<Word, int> hits;
    const int N = 200000;
    for (int i = 0; i < N; ++i) ++hits[mu.sample(rng)];
    for (const auto& a : mu.atoms()) {
        const double sd = std::sqrt(a.weight * (1 - a.weight) / N);
        EXPECT_NEAR(hits[a.value] / double(N), a.weight, 5 * sd) << a.value.str();
    }
}

TEST(Convolution, FactorMassMatchesEnumeration) {
    const auto mu = FactorMeasure::lazy_srw(2, 0.25);
    const auto exact = brute_convolution(mu, 5);
    const auto profile = radial_profile(mu, 5);
    double total = 0.0;
    for (const auto& [w, p] : exact) {
        total += p;
        EXPECT_NEAR(std::exp(log_convolution_mass(mu, 5, w)), p, 1e-12 * std::max(1.0, p)) << w.str();
        EXPECT_NEAR(std::exp(profile.log_prob(w)), p, 1e-12) << w.str();
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(log_convolution_mass(mu, 5, Word::parse(2, "aaaaaa")), -INFINITY);

    const auto table = FactorMeasure::table(2, {{Word::parse(2, "ab"), 0.5}, {Word::parse(2, "B"), 0.3}, {Word(2), 0.2}});
    for (const auto& [w, p] : brute_convolution(table, 4))
        EXPECT_NEAR(std::exp(log_convolution_mass(table, 4, w)), p, 1e-12) << w.str();
}

TEST(Convolution, ProductMassMatchesEnumeration) {
    const auto pi = MeasureSpec::noise_mixture(0.5, FactorMeasure::srw(2));
    const auto exact = brute_convolution(pi, 3);
    std::vector<ProductElement> targets;
    for (const auto& [w, p] : exact) targets.push_back(w);
    const auto logs = log_convolution_masses(pi, 3, targets);
    std::size_t i = 0;
    for (const auto& [w, p] : exact) {
        EXPECT_NEAR(std::exp(log_convolution_mass(pi, 3, w)), p, 1e-12);
        EXPECT_NEAR(std::exp(logs[i++]), p, 1e-12);
    }
}

TEST(Radial, EntropyMatchesEnumeration) {
    const auto mu = FactorMeasure::srw(3);
    for (std::size_t n : {1u, 3u, 6u}) {
        double h = 0.0;
        for (const auto& [w, p] : brute_convolution(mu, n)) h -= p * std::log(p);
        EXPECT_NEAR(radial_profile(mu, n).entropy(), h, 1e-10) << n;
    }
    const auto hs = radial_entropies(mu, 6);
    EXPECT_NEAR(hs.back(), radial_profile(mu, 6).entropy(), 1e-12);
}

TEST(Walk, TrajectoryIsCumulativeProduct) {
    const auto t = sample_trajectory(FactorMeasure::srw(2), 50, 5);
    ASSERT_EQ(t.positions.size(), 51u);
    Word w(2);
    for (std::size_t i = 0; i < 50; ++i) {
        w *= t.steps[i];
        EXPECT_EQ(t.positions[i + 1], w);
        EXPECT_EQ(distance(t.positions[i], t.positions[i + 1]), 1);
    }
    EXPECT_EQ(sample_trajectory(FactorMeasure::srw(2), 50, 5).positions, t.positions);
}

TEST(Walk, DriftNearClosedForm) {
    for (const auto& mu : {FactorMeasure::srw(3), FactorMeasure::lazy_srw(2, 1.0 / 3.0)}) {
        const auto r = drift_estimate(mu, 4000, 100, 3);
        EXPECT_NEAR(r.estimate, closed_form_drift(mu)->value, 5 * r.std_error + 1e-3) << mu.describe();
    }
    const auto pi = MeasureSpec::diagonal_push(FactorMeasure::srw(3));
    const auto r = drift_estimate(pi, 4000, 100, 3);
    EXPECT_NEAR(r.first.estimate, 2.0 / 3.0, 5 * r.first.std_error + 1e-3);
    EXPECT_NEAR(r.second.estimate, (1 - 1.0 / 3.0) * 0.5, 5 * r.second.std_error + 1e-3);
}

TEST(Walk, ResultsIndependentOfThreadCount) {
    const auto mu = FactorMeasure::srw(2);
    DriftReport one, many;
    {
        ThreadsEnv env("1");
        one = drift_estimate(mu, 500, 37, 8);
    }
    {
        ThreadsEnv env("4");
        many = drift_estimate(mu, 500, 37, 8);
    }
    EXPECT_EQ(one.estimate, many.estimate);
    EXPECT_EQ(one.std_error, many.std_error);
}
