#include <gtest/gtest.h>

#include <random>

#include "nplap/params.hpp"

using namespace nplap;

namespace {

ProblemParams make_params(int n, double p, double gamma)
{
    ProblemParams prm;
    prm.n = n;
    prm.p = p;
    prm.gamma = gamma;
    return prm;
}

} // namespace

TEST(GammaThreshold, PlanarIsMinusOne)
{
    for (double p : {1.1, 2.0, 3.7, 10.0}) EXPECT_DOUBLE_EQ(gamma_threshold(2, p), -1.0);
}

TEST(GammaThreshold, DirectValues)
{
    EXPECT_DOUBLE_EQ(gamma_threshold(3, 2.0), -0.75);
    EXPECT_DOUBLE_EQ(gamma_threshold(5, 4.0), 0.125);
}

TEST(GammaThreshold, RejectsBadInput)
{
    EXPECT_THROW(gamma_threshold(1, 2.0), InvalidArgument);
    EXPECT_THROW(gamma_threshold(3, 1.0), InvalidArgument);
}

TEST(GammaThreshold, IncreasingInPAndTendsToMinusOne)
{
    for (int n : {3, 4, 7}) {
        double prev = -2.0;
        for (int k = 0; k <= 200; ++k) {
            const double p = 1.0 + 1e-6 + 0.05 * k;
            const double t = gamma_threshold(n, p);
            EXPECT_GT(t, prev);
            prev = t;
        }
        EXPECT_NEAR(gamma_threshold(n, 1.0 + 1e-9), -1.0, 1e-9);
    }
}

TEST(TwoStar, Values)
{
    EXPECT_DOUBLE_EQ(two_star(3, 12.0), 6.0);
    EXPECT_DOUBLE_EQ(two_star(4, 12.0), 4.0);
    EXPECT_DOUBLE_EQ(two_star(2, 12.0), 12.0);
    EXPECT_THROW(two_star(1, 12.0), InvalidArgument);
    EXPECT_THROW(two_star(2, 2.0), InvalidArgument);
}

TEST(DefaultFallback, CoversLqRequirement)
{
    for (double p : {1.1, 2.0, 5.0, 40.0})
        for (double g : {-0.9, -0.3, 0.0, 2.0}) {
            const double f = default_two_star_fallback(p, g);
            EXPECT_GE(f, 12.0);
            EXPECT_LE(2.0 * (p - 2.0 - g), (g + 1.0) * f + 1e-12);
            EXPECT_GT((g + 1.0) * f, 2.0);
        }
}

TEST(Violations, ListsEveryProblem)
{
    ProblemParams prm;
    prm.n = 1;
    prm.p = 1.0;
    prm.gamma = -1.5;
    prm.eps = 0.0;
    prm.lambda = 1.0;
    prm.two_star_fallback = 2.0;
    const auto v = violations(prm);
    EXPECT_EQ(v.size(), 6u);
    EXPECT_NE(std::find(v.begin(), v.end(), "gamma must exceed -1"), v.end());
    EXPECT_THROW(validate(prm), InvalidArgument);
    EXPECT_NO_THROW(validate(ProblemParams{}));
}

TEST(Classify, Examples)
{
    ProblemParams a = make_params(3, 2.0, 0.0);
    EXPECT_TRUE(classify(a).admissible);

    ProblemParams b = make_params(4, 6.0, 0.0);
    EXPECT_FALSE(classify(b).admissible);
    ProblemParams b2 = make_params(4, 3.99, 0.0);
    EXPECT_TRUE(classify(b2).admissible);

    ProblemParams c = make_params(2, 10.0, -0.5);
    c.two_star_fallback = 12.0;
    const auto t = classify(c);
    EXPECT_TRUE(t.admissible);
    EXPECT_DOUBLE_EQ(t.q0, 6.0);
    EXPECT_TRUE(t.supercritical);
    ASSERT_TRUE(t.holder_alpha.has_value());
    EXPECT_NEAR(*t.holder_alpha, 1.0 - 2.0 / 6.0, 1e-15);
}

TEST(Classify, MoserScheduleAndSubcriticalAlpha)
{
    // n = 5, gamma = -0.5: q0 = 0.5 * 10/3 < 5, so the Moser index must grow.
    ProblemParams prm = make_params(5, 1.5, -0.5);
    const auto t = classify(prm);
    EXPECT_FALSE(t.supercritical);
    const double ts = 10.0 / 3.0;
    EXPECT_GT(std::pow(ts, t.k0 + 1) * 0.5, 5.0);
    if (t.k0 > 0) {
        EXPECT_LE(std::pow(ts, t.k0) * 0.5, 5.0);
    }
    ASSERT_EQ(t.moser_q.size(), static_cast<std::size_t>(t.k0) + 2);
    for (std::size_t k = 0; k < t.moser_q.size(); ++k) {
        EXPECT_NEAR(t.moser_q[k], 0.5 * std::pow(ts, static_cast<double>(k)), 1e-12);
        if (k > 0) {
            EXPECT_GT(t.moser_q[k], t.moser_q[k - 1]);
        }
    }
    ASSERT_TRUE(t.holder_alpha.has_value());
    EXPECT_NEAR(*t.holder_alpha, 1.0 - 5.0 / (std::pow(ts, t.k0 + 1) * 0.5), 1e-12);
    EXPECT_GT(*t.holder_alpha, 0.0);
    EXPECT_LT(*t.holder_alpha, 1.0);
}

TEST(Classify, FlagsMatchDefinitions)
{
    ProblemParams prm = make_params(3, 2.5, 0.25);
    const auto t = classify(prm);
    EXPECT_EQ(t.admissible, 0.25 > -1.0 + 1.5 * 1.0 / 4.0);
    EXPECT_TRUE(t.gamma_gt_minus4over);
    EXPECT_TRUE(t.gamma_le_pminus2);
    EXPECT_DOUBLE_EQ(t.two_star, 6.0);
    EXPECT_DOUBLE_EQ(t.q0, 1.25 * 6.0);
}

TEST(Classify, DeterministicAndPure)
{
    ProblemParams prm = make_params(4, 2.2, -0.1);
    EXPECT_EQ(classify(prm), classify(prm));
    EXPECT_EQ(classify(prm, 0), classify(prm, 0));
}

TEST(Classify, ChainInequalityOverRandomTriplets)
{
    // gamma > -4/(n+2) must force q0 > gamma + 2 for n >= 3.
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dn(3, 8);
    std::uniform_real_distribution<double> dp(1.01, 10.0), du(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const int n = dn(rng);
        const double p = dp(rng);
        const double lo = std::max(-1.0, gamma_threshold(n, p));
        const double gamma = lo + (4.0 - lo) * du(rng);
        if (gamma <= lo) continue;
        const auto t = classify(make_params(n, p, gamma));
        EXPECT_TRUE(t.admissible);
        EXPECT_EQ(t.gamma_gt_minus4over, gamma > -4.0 / (n + 2));
        if (t.gamma_gt_minus4over) {
            EXPECT_GT(t.q0, gamma + 2.0) << n << ' ' << p << ' ' << gamma;
            ++checked;
        }
    }
    EXPECT_GT(checked, 1000);
}

TEST(Classify, RejectsInvalidParams)
{
    EXPECT_THROW(classify(make_params(2, 2.0, -1.0)), InvalidArgument);
    EXPECT_THROW(classify(make_params(2, 2.0, 0.0), -1), InvalidArgument);
}
