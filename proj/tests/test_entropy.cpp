#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "dimcons/entropy.hpp"
#include "dimcons/theory.hpp"

using namespace dimcons;

namespace {

template <typename Measure, typename Element>
std::map<Element, double> expand(const Measure& m, std::size_t n, Element start) {
    std::map<Element, double> cur{{start, 1.0}};
    for (std::size_t i = 0; i < n; ++i) {
        std::map<Element, double> next;
        for (const auto& [w, p] : cur)
            for (const auto& a : m.atoms()) next[w * a.value] += p * a.weight;
        cur = std::move(next);
    }
    return cur;
}

template <typename Map>
double shannon(const Map& m) {
    double h = 0.0;
    for (const auto& [w, p] : m) h -= p * std::log(p);
    return h;
}

// H(w_n | w*_n) from the enumerated joint law.
double conditional_entropy(const std::map<ProductElement, double>& joint) {
    std::map<Word, double> second;
    for (const auto& [w, p] : joint) second[w.second] += p;
    return shannon(joint) - shannon(second);
}

} // namespace

TEST(Entropy, ExactRadialNearClosedForm) {
    for (const auto& mu : {FactorMeasure::srw(2), FactorMeasure::srw(3), FactorMeasure::lazy_srw(2, 0.5)}) {
        const auto r = entropy_rate(mu, {EntropyMethod::ExactRadial, 2000, 0, 1});
        const double h = closed_form_entropy(mu)->value;
        EXPECT_NEAR(r.estimate, h, 2e-3) << mu.describe();
        EXPECT_EQ(r.std_error, 0.0);
        EXPECT_NEAR(radial_entropy_limit(mu), h, 1e-4) << mu.describe();
    }
}

TEST(Entropy, FactorPluginMatchesExactAverage) {
    const auto mu = FactorMeasure::srw(2);
    const std::size_t n = 60;
    const auto plug = entropy_rate(mu, {EntropyMethod::McPlugin, n, 4000, 2});
    const double exact = radial_profile(mu, n).entropy() / n;
    EXPECT_NEAR(plug.estimate, exact, 4 * plug.std_error);
}

TEST(Entropy, ProductPluginMatchesEnumeration) {
    const auto pi = MeasureSpec::noise_mixture(0.5, FactorMeasure::srw(2));
    const std::size_t n = 4;
    const double exact = shannon(expand(pi, n, ProductElement::identity(2, 2))) / n;
    const auto plug = entropy_rate(pi, {EntropyMethod::McPlugin, n, 20000, 3});
    EXPECT_NEAR(plug.estimate, exact, 4 * plug.std_error);
}

TEST(Entropy, FactorizedRoutesAddUp) {
    const auto mu = FactorMeasure::srw(2);
    const auto prod = entropy_rate(MeasureSpec::product(mu, mu), {EntropyMethod::ExactRadial, 500, 0, 1});
    const auto one = entropy_rate(mu, {EntropyMethod::ExactRadial, 500, 0, 1});
    EXPECT_NEAR(prod.estimate, 2 * one.estimate, 1e-12);
    const auto diag = entropy_rate(MeasureSpec::noise_mixture(0.0, mu), {EntropyMethod::ExactRadial, 500, 0, 1});
    EXPECT_NEAR(diag.estimate, one.estimate, 1e-12);
    EXPECT_THROW(entropy_rate(MeasureSpec::noise_mixture(0.5, mu), {EntropyMethod::ExactRadial, 50, 0, 1}), Unsupported);
}

TEST(ConditionalEntropy, ExactMatchesEnumeration) {
    const auto pi = MeasureSpec::noise_mixture(0.5, FactorMeasure::srw(2));
    const std::size_t n = 3;
    const double exact = conditional_entropy(expand(pi, n, ProductElement::identity(2, 2))) / n;
    const auto r = conditional_entropy_estimate(pi, n, 20000, 4, ConditionalMethod::Exact);
    EXPECT_NEAR(r.estimate, exact, 4 * r.std_error);
}

TEST(ConditionalEntropy, RefinedIsLowerBound) {
    const auto pi = MeasureSpec::noise_mixture(0.5, FactorMeasure::srw(2));
    const std::size_t n = 3;
    const double exact = conditional_entropy(expand(pi, n, ProductElement::identity(2, 2))) / n;
    const auto r = conditional_entropy_estimate(pi, n, 20000, 5, ConditionalMethod::Refined);
    EXPECT_LE(r.estimate, exact + 4 * r.std_error);
    EXPECT_GT(r.estimate, 0.0);
}

TEST(ConditionalEntropy, RefinedIsExactForIndependentCoordinates) {
    const auto mu = FactorMeasure::srw(2);
    const auto pi = MeasureSpec::product(mu, FactorMeasure::srw(3));
    const std::size_t n = 8;
    const auto r = conditional_entropy_estimate(pi, n, 3000, 6, ConditionalMethod::Refined);
    EXPECT_NEAR(r.estimate, radial_profile(mu, n).entropy() / n, 4 * r.std_error);
    const auto diag = conditional_entropy_estimate(MeasureSpec::noise_mixture(0.0, mu), n, 200, 6);
    EXPECT_NEAR(diag.estimate, 0.0, 1e-9);
}

TEST(ExtrapolatedEntropy, RecoversKnownJointRates) {
    const auto mu = FactorMeasure::srw(2);
    const double h = closed_form_entropy(mu)->value;
    const auto indep = extrapolated_entropy_rate(MeasureSpec::noise_mixture(1.0, mu), {6, 8, 10}, 300, 7);
    EXPECT_NEAR(indep.rate, 2 * h, 4 * indep.rate_std_error + 0.02);
    const auto diag = extrapolated_entropy_rate(MeasureSpec::noise_mixture(0.0, mu), {6, 8, 10}, 300, 7);
    EXPECT_NEAR(diag.rate, h, 4 * diag.rate_std_error + 0.02);
    EXPECT_THROW(extrapolated_entropy_rate(MeasureSpec::noise_mixture(0.5, mu), {6}, 10, 1), ConfigError);
}
