#include <gtest/gtest.h>

#include <set>

#include "dimcons/pivotal.hpp"
#include "dimcons/schottky.hpp"

using namespace dimcons;

namespace {

const PivotalConstants kDefault;

Word power(int g, std::size_t k) {
    Word w(2);
    for (std::size_t i = 0; i < k; ++i) w.push(static_cast<Letter>(g));
    return w;
}

// Brute-force count of s in S with (x|s y)_o > C over S.
std::size_t count_bad(const std::vector<Word>& S, const Word& x, const Word& y, double C) {
    std::size_t bad = 0;
    for (const auto& s : S) bad += static_cast<double>(gromov_product(x, s * y)) > C;
    return bad;
}

} // namespace

TEST(Schottky, ConstructedSetHasDistinctPrefixes) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 3);
    ASSERT_EQ(S.size(), 200u);
    std::set<Word> heads, tails;
    for (const auto& s : S) {
        EXPECT_EQ(s.length(), 81u);
        heads.insert(s.prefix(5));
        tails.insert(s.inverse().prefix(5));
    }
    EXPECT_EQ(heads.size(), 200u);
    EXPECT_EQ(tails.size(), 200u);
    EXPECT_THROW(construct_schottky_set(2, 400, 81, kDefault.C0), ConfigError);
}

TEST(Schottky, CertifiesTwoHundredLongWords) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 11);
    const auto cert = schottky_certify(S, kDefault.eps, kDefault.C0, kDefault.D);
    EXPECT_TRUE(cert.certified);
    EXPECT_TRUE(cert.evidence.combinatorial);
    EXPECT_EQ(cert.evidence.prefix_class, 1u);
    EXPECT_FALSE(cert.counterexample);
}

// Conditions (1) and (2) checked directly at sampled (x, y) against the certified set.
TEST(Schottky, CertifiedSetMeetsCountingBound) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 11);
    Rng rng(5);
    const double allowed = kDefault.eps * S.size();
    for (int t = 0; t < 300; ++t) {
        Word x = detail::random_reduced_word(2, 1 + rng.index(20), rng);
        Word y = detail::random_reduced_word(2, rng.index(20), rng);
        if (t % 3 == 0) y = S[rng.index(S.size())].inverse() * x;
        EXPECT_LE(count_bad(S, x, y, kDefault.C0), allowed);
        std::vector<Word> inv;
        for (const auto& s : S) inv.push_back(s.inverse());
        EXPECT_LE(count_bad(inv, x, y, kDefault.C0), allowed);
    }
}

TEST(Schottky, ShortWordViolatesConditionThree) {
    auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 2);
    S[17] = S[17].prefix(30);
    const auto cert = schottky_certify(S, kDefault.eps, kDefault.C0, kDefault.D);
    EXPECT_FALSE(cert.certified);
    ASSERT_TRUE(cert.counterexample);
    EXPECT_EQ(cert.counterexample->condition, 3);
}

TEST(Schottky, HundredWordsOfLengthFiftyAreRejected) {
    const auto S = construct_schottky_set(2, 100, 50, kDefault.C0, 4);
    const auto at_default = schottky_certify(S, kDefault.eps, kDefault.C0, kDefault.D);
    EXPECT_FALSE(at_default.certified);
    ASSERT_TRUE(at_default.counterexample);
    EXPECT_EQ(at_default.counterexample->condition, 3);

    // Even with D lowered to 50, eps #S = 1 while two elements can be bad at once.
    const auto relaxed = schottky_certify(S, kDefault.eps, kDefault.C0, 50.0);
    EXPECT_FALSE(relaxed.certified);
    ASSERT_TRUE(relaxed.counterexample);
    const auto& ce = *relaxed.counterexample;
    std::vector<Word> tested = S;
    if (ce.condition == 2)
        for (auto& s : tested) s = s.inverse();
    EXPECT_GT(count_bad(tested, ce.x, ce.y, kDefault.C0), kDefault.eps * S.size());
}

TEST(Schottky, RepeatedDirectionGivesCounterexample) {
    std::vector<Word> S(100, power(1, 90));
    for (std::size_t i = 0; i < S.size(); ++i) S[i] *= power(2, 1 + i % 7) * power(1, 1);
    const auto cert = schottky_certify(S, kDefault.eps, kDefault.C0, kDefault.D);
    EXPECT_FALSE(cert.certified);
    ASSERT_TRUE(cert.counterexample);
    EXPECT_TRUE(cert.counterexample->condition == 1 || cert.counterexample->condition == 2);
    const auto& ce = *cert.counterexample;
    std::vector<Word> tested = S;
    if (ce.condition == 2)
        for (auto& s : tested) s = s.inverse();
    EXPECT_GT(count_bad(tested, ce.x, ce.y, kDefault.C0), kDefault.eps * S.size());
}

TEST(Schottky, SearchFindsSetForSchottkySupportedLaw) {
    const auto S = construct_schottky_set(2, 200, 81, kDefault.C0, 1);
    const auto found = schottky_search(FactorMeasure::uniform(2, S), kDefault.eps, kDefault.C0, kDefault.D);
    EXPECT_EQ(found.M, 1u);
    EXPECT_TRUE(found.certificate.certified);
}

TEST(Schottky, SearchFailsForSimpleRandomWalk) {
    EXPECT_THROW(schottky_search(FactorMeasure::srw(2), kDefault.eps, kDefault.C0, kDefault.D, 8), NoCertificate);
}
