#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "dimcons/doob.hpp"
#include "dimcons/harmonic.hpp"
#include "dimcons/verification.hpp"

using namespace dimcons;

namespace {

double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& expected, double dof) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

} // namespace

TEST(Harmonic, CylinderMassAgreesWithFirstStepOracle) {
    for (int rank = 2; rank <= 4; ++rank)
        for (std::size_t len = 1; sphere_size(rank, len) <= 2e5; ++len) {
            const auto ws = words_of_length(rank, len);
            EXPECT_NEAR(exact_cylinder_mass(rank, ws.front()), oracle::first_step_cylinder_mass(rank, len),
                        1e-12 * oracle::first_step_cylinder_mass(rank, len));
            double total = 0.0;
            for (const auto& w : ws) total += exact_cylinder_mass(rank, w);
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
}

TEST(Harmonic, FirstLetterFrequency) {
    const auto pts = boundary_samples(FactorMeasure::srw(2), 4, 100000, 17);
    std::size_t a = 0;
    for (const auto& p : pts) a += p.prefix()[0] == 1;
    EXPECT_NEAR(a / 1e5, 0.25, 0.005);
}

TEST(Harmonic, DepthTwoCylindersFitUniformLaw) {
    const std::size_t N = 60000;
    const auto pts = boundary_samples(FactorMeasure::lazy_srw(2, 0.3), 6, N, 23);
    const auto cells = words_of_length(2, 2);
    std::map<Word, double> hits;
    for (const auto& p : pts) hits[p.prefix().prefix(2)] += 1;
    std::vector<double> obs, exp;
    for (const auto& w : cells) {
        obs.push_back(hits[w]);
        exp.push_back(N * exact_cylinder_mass(2, w));
    }
    EXPECT_GT(chi_square_p_value(obs, exp, cells.size() - 1.0), 1e-4);
}

TEST(Harmonic, ProductCoordinatesIndependent) {
    const auto srw = FactorMeasure::srw(2);
    const std::size_t N = 40000;
    const auto pts = boundary_samples(MeasureSpec::product(srw, srw), 4, N, 29);
    std::vector<double> table(16, 0.0), row(4, 0.0), col(4, 0.0);
    auto idx = [](Letter l) { return static_cast<std::size_t>(l > 0 ? l - 1 : 1 - l); };
    for (const auto& p : pts) {
        const auto i = idx(p.first.prefix()[0]), j = idx(p.second.prefix()[0]);
        table[4 * i + j] += 1;
        row[i] += 1;
        col[j] += 1;
    }
    std::vector<double> exp(16);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) exp[4 * i + j] = row[i] * col[j] / N;
    EXPECT_GT(chi_square_p_value(table, exp, 9.0), 1e-4);
}

TEST(Harmonic, StationarityOnCylinders) {
    const auto mu = FactorMeasure::srw(2);
    const auto pts = boundary_samples(mu, 8, 40000, 31);
    for (const auto& s : {"a", "bA", "abb"}) {
        const auto c = stationarity_check(mu, pts, Word::parse(2, s));
        EXPECT_NEAR(c.lhs, c.rhs, 5 * c.std_error + 1e-12) << s;
        EXPECT_NEAR(c.lhs, exact_cylinder_mass(2, Word::parse(2, s)), 0.01) << s;
    }
}

TEST(Harmonic, RadonNikodymCocycle) {
    const auto eta = BoundaryPoint(Word::parse(2, "abbaBaabABBaabab"));
    for (const auto& sx : {"a", "B", "ab", "Aba"})
        for (const auto& sy : {"b", "ba", "AA"}) {
            const Word x = Word::parse(2, sx), y = Word::parse(2, sy);
            const double lhs = rn_derivative(2, x * y, eta);
            const double rhs = rn_derivative(2, x, eta) * rn_derivative(2, y, translate(x, eta));
            EXPECT_NEAR(lhs, rhs, 1e-12 * lhs) << sx << " " << sy;
        }
    EXPECT_DOUBLE_EQ(rn_derivative(2, Word::parse(2, "a"), eta), 3.0);
    EXPECT_DOUBLE_EQ(rn_derivative(2, Word::parse(2, "b"), eta), 1.0 / 3.0);
    EXPECT_THROW(translate(Word::parse(2, "ab"), BoundaryPoint(Word::parse(2, "ab"))), InsufficientDepth);
}

TEST(Doob, KernelRowsAreStochastic) {
    const auto pi = MeasureSpec::noise_mixture(0.5, FactorMeasure::srw(2));
    const DoobWalk walk(pi, BoundaryPoint::ray(2, 2, 200));
    auto s = walk.initial();
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        double total = 0.0;
        for (double v : walk.kernel(s)) total += v;
        EXPECT_NEAR(total, 1.0, 1e-9);
        walk.advance(s, walk.sample_step(s, rng));
    }
}

// On F_m the conditioned SRW steps toward eta with probability (2m-1)/2m.
TEST(Doob, ConditionedSecondCoordinateStepsTowardEta) {
    const auto srw = FactorMeasure::srw(2);
    const auto eta = BoundaryPoint(words_of_length(2, 1).front() * Word::parse(2, std::string(299, 'b')));
    const DoobWalk walk(MeasureSpec::product(srw, srw), eta);
    const auto t = walk.trajectory(250, 37);
    std::size_t toward = 0;
    for (std::size_t i = 0; i < 250; ++i)
        toward += busemann(t.positions[i + 1].second, eta) < busemann(t.positions[i].second, eta);
    const double sd = std::sqrt(0.75 * 0.25 / 250);
    EXPECT_NEAR(toward / 250.0, 0.75, 5 * sd);
    EXPECT_GE(common_prefix_length(t.positions.back().second, eta.prefix()), 60u);
}

TEST(Doob, DiagonalConditioningPinsFirstCoordinate) {
    const auto pi = MeasureSpec::noise_mixture(0.0, FactorMeasure::srw(2));
    const auto eta = BoundaryPoint(Word::parse(2, "abABabbbaaBBabab").prefix(16) * Word::parse(2, std::string(200, 'a')));
    const DoobWalk walk(pi, eta);
    Rng rng(41);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(walk.first_limit(20, rng).prefix(), eta.prefix().prefix(20));
}

TEST(Doob, PathProbabilityMatchesCylinderIdentity) {
    EXPECT_TRUE(check_doob_cylinder_identity().passed);
}

TEST(Doob, RejectsNonRadialSecondMarginal) {
    const auto table = FactorMeasure::table(2, {{Word::parse(2, "a"), 0.5}, {Word::parse(2, "b"), 0.5}});
    EXPECT_THROW(DoobWalk(MeasureSpec::product(FactorMeasure::srw(2), table), BoundaryPoint::ray(2, 1, 10)), Unsupported);
}
