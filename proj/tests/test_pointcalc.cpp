#include <gtest/gtest.h>

#include <Eigen/QR>
#include <random>

#include "nplap/point_suite.hpp"
#include "nplap/pointcalc.hpp"

using namespace nplap;

namespace {

Vec vec(std::initializer_list<double> v)
{
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Mat diag(std::initializer_list<double> v) { return vec(v).asDiagonal(); }

Vec unit(int n, int k)
{
    Vec e = Vec::Zero(n);
    e[k] = 1.0;
    return e;
}

Mat random_symmetric(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> nd;
    Mat h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) h(i, j) = h(j, i) = nd(rng);
    return h;
}

Vec random_vec(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> nd;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

Mat random_orthogonal(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> nd;
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
    return Eigen::HouseholderQR<Mat>(a).householderQ();
}

} // namespace

TEST(PointState, SymmetrizesAndValidates)
{
    Mat h(2, 2);
    h << 1.0, 2.0, 0.0, 3.0;
    const PointState s(vec({1.0, 0.0}), h, 0.5);
    EXPECT_DOUBLE_EQ(s.H()(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(s.H()(1, 0), 1.0);
    EXPECT_THROW(PointState(vec({1.0}), h, 0.5), InvalidArgument);
    EXPECT_THROW(PointState(vec({1.0, 0.0}), h, 0.0), InvalidArgument);
}

TEST(OperatorValues, RadialQuadratic)
{
    const double c = std::sqrt(0.5);
    const PointState s(vec({c, c}), Mat::Identity(2, 2), 1.0);
    EXPECT_NEAR(operator_values(s, 3.0, 0.0).normalized_p_eps, 2.5, 1e-15);
}

TEST(OperatorValues, ZeroGradientGivesTrace)
{
    for (double p : {1.2, 2.0, 7.0}) {
        const PointState s(Vec::Zero(3), Mat::Identity(3, 3), 0.3);
        EXPECT_DOUBLE_EQ(operator_values(s, p, 0.7).normalized_p_eps, 3.0);
    }
}

TEST(OperatorValues, DiagonalExample)
{
    const PointState s(unit(3, 0), diag({1.0, 2.0, 0.0}), 0.5);
    const auto ov = operator_values(s, 2.0, 0.0);
    EXPECT_DOUBLE_EQ(ov.laplacian, 3.0);
    EXPECT_DOUBLE_EQ(ov.inf_laplacian, 1.0);
    EXPECT_DOUBLE_EQ(ov.normalized_inf_eps, 1.0 / 1.5);
    EXPECT_DOUBLE_EQ(ov.weighted_operator, 3.0);
}

TEST(CoefficientMatrix, Examples)
{
    std::mt19937_64 rng(3);
    const PointState s0(random_vec(rng, 3), random_symmetric(rng, 3), 0.2);
    EXPECT_LT((coefficient_matrix(s0, 2.0, 0.0) - Mat::Identity(3, 3)).norm(), 1e-15);

    const PointState s1(Vec::Zero(2), Mat::Identity(2, 2), 0.25);
    EXPECT_LT((coefficient_matrix(s1, 4.0, 0.6) - std::pow(0.25, 0.3) * Mat::Identity(2, 2)).norm(), 1e-15);

    const PointState s2(unit(2, 0), Mat::Identity(2, 2), 1.0);
    Mat expect = Mat::Identity(2, 2);
    expect(0, 0) = 1.5;
    EXPECT_LT((coefficient_matrix(s2, 3.0, 0.0) - expect).norm(), 1e-15);
}

TEST(CoefficientMatrix, TraceMatchesWeightedOperator)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> up(1.1, 10.0), ug(-0.9, 3.0), ue(-6.0, 0.0);
    for (int i = 0; i < 100000; ++i) {
        const int n = 2 + i % 4;
        const PointState s(random_vec(rng, n) * 5.0, random_symmetric(rng, n), std::pow(10.0, ue(rng)));
        const double p = up(rng), g = ug(rng);
        const double w = operator_values(s, p, g).weighted_operator;
        const double t = (coefficient_matrix(s, p, g) * s.H()).trace();
        const double scale = std::pow(s.grad_sq() + s.eps(), 0.5 * g) * (1.0 + std::abs(p - 2.0)) * s.H().norm();
        ASSERT_NEAR(t, w, 1e-10 * scale);
    }
}

TEST(FundamentalGap, Examples)
{
    EXPECT_NEAR(fundamental_gap(PointState(unit(3, 0), Mat::Identity(3, 3), 1.0)), 0.0, 1e-14);
    EXPECT_NEAR(fundamental_gap(PointState(unit(3, 2), diag({1.0, 2.0, 0.0}), 1.0)), 0.5, 1e-14);
    EXPECT_THROW(fundamental_gap(PointState(Vec::Zero(3), Mat::Identity(3, 3), 1.0)), DegenerateGradient);
}

TEST(FundamentalGap, VanishesInPlane)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100000; ++i) {
        const PointState s(random_vec(rng, 2), random_symmetric(rng, 2), 0.1);
        ASSERT_LE(std::abs(fundamental_gap(s)), 1e-10 * s.H().squaredNorm());
    }
}

TEST(TGap, Examples)
{
    EXPECT_NEAR(t_gap(PointState(unit(2, 0), Mat::Identity(2, 2), 1.0), 2.0, 0.0), 1.5, 1e-14);
    // with g an eigenvector of H every bracket vanishes as eps -> 0
    const PointState s(1.7 * unit(3, 1), diag({0.4, -2.0, 3.1}), 1e-9);
    EXPECT_LT(std::abs(t_gap(s, 2.5, 0.2)), 1e-6);
    EXPECT_GT(std::abs(t_gap(PointState(1.7 * unit(3, 1), diag({0.4, -2.0, 3.1}), 1e-1), 2.5, 0.2)), 1e-3);
    EXPECT_THROW(t_gap(PointState(unit(3, 0), Mat::Identity(3, 3), 1.0), 2.0, -0.8), InvalidArgument);
}

TEST(HessianBoundGap, Examples)
{
    std::mt19937_64 rng(9);
    const PointState s(random_vec(rng, 4), random_symmetric(rng, 4), 0.3);
    EXPECT_NEAR(hessian_bound_gap(s, 0.0), 0.0, 1e-13);
    for (int n : {2, 3, 5})
        EXPECT_NEAR(hessian_bound_gap(PointState(unit(n, 0), Mat::Identity(n, n), 1.0), 1.0), 1.25, 1e-14);
}

TEST(Monotonicity, Examples)
{
    const Vec a = unit(2, 0);
    const Vec b = Vec::Zero(2);
    const auto sides = monotonicity_sides(a, b, 2.0, 0.5, MonotonicityVariant::RegPos);
    EXPECT_NEAR(sides.lhs, 1.5, 1e-15);
    EXPECT_NEAR(sides.rhs, 1.5 / 16.0, 1e-15);
    EXPECT_NEAR(monotonicity_gap(a, b, 2.0, 0.5, MonotonicityVariant::RegPos), 1.40625, 1e-14);

    const Vec c = vec({0.3, -2.0, 1.0});
    EXPECT_EQ(monotonicity_gap(c, c, -0.5, 0.2, MonotonicityVariant::RegNeg), 0.0);
    EXPECT_EQ(monotonicity_gap(c, c, -0.5, 0.2, MonotonicityVariant::UnregNeg), 0.0);
    EXPECT_EQ(monotonicity_gap(c, c, 1.5, 0.2, MonotonicityVariant::RegPos), 0.0);
    EXPECT_EQ(monotonicity_gap(c, c, 1.5, 0.2, MonotonicityVariant::UnregPos), 0.0);
}

TEST(Monotonicity, VariantGammaMismatchRejected)
{
    const Vec a = unit(2, 0), b = unit(2, 1);
    EXPECT_THROW(monotonicity_gap(a, b, 0.5, 0.1, MonotonicityVariant::RegNeg), InvalidArgument);
    EXPECT_THROW(monotonicity_gap(a, b, -0.5, 0.1, MonotonicityVariant::UnregPos), InvalidArgument);
    EXPECT_THROW(monotonicity_gap(a, b, 0.5, 0.0, MonotonicityVariant::RegPos), InvalidArgument);
    EXPECT_NO_THROW(monotonicity_gap(a, b, 0.5, 0.0, MonotonicityVariant::UnregPos));
}

TEST(Monotonicity, VariantNamesRoundTrip)
{
    for (auto v : {MonotonicityVariant::RegNeg, MonotonicityVariant::UnregNeg, MonotonicityVariant::RegPos,
                   MonotonicityVariant::UnregPos})
        EXPECT_EQ(parse_variant(to_string(v)), v);
    EXPECT_FALSE(parse_variant("sideways").has_value());
}

TEST(Monotonicity, RegNegOnBox)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 20000; ++i) {
        const int n = 2 + i % 3;
        Vec a(n), b(n);
        for (int k = 0; k < n; ++k) {
            a[k] = u(rng);
            b[k] = u(rng);
        }
        const auto s = monotonicity_sides(a, b, -0.5, 0.3, MonotonicityVariant::RegNeg);
        ASSERT_GE(s.lhs - s.rhs, -1e-9 * (std::abs(s.lhs) + std::abs(s.rhs)));
    }
}

TEST(StructuralGap, CriticalShiftIsNonnegative)
{
    for (double p : {1.5, 2.5, 4.0})
        for (int n : {2, 3, 5}) {
            const double gamma = p - 2.0;
            if (gamma <= gamma_threshold(n, p)) continue;
            EXPECT_GE(structural_gap(PointState(unit(n, 0), Mat::Identity(n, n), 0.5), p, gamma, 1.0), 0.0);
        }
}

TEST(StructuralGap, IncreasingInEtaOnKernel)
{
    // H with vanishing normalized operator: tr H + (p-2) <Hg,g>/(|g|^2+eps) = 0.
    const double p = 3.0, eps = 1.0;
    const PointState s(unit(2, 0), diag({2.0, -3.0}), eps);
    ASSERT_NEAR(operator_values(s, p, 0.0).normalized_p_eps, 0.0, 1e-15);
    double prev = -std::numeric_limits<double>::infinity();
    for (double eta : {1.0, 10.0, 100.0}) {
        const double g = structural_gap(s, p, 0.3, eta);
        EXPECT_GT(g, prev);
        prev = g;
    }
}

TEST(StructuralGap, RejectsBadArguments)
{
    const PointState s(unit(2, 0), Mat::Identity(2, 2), 0.5);
    EXPECT_THROW(structural_gap(s, 2.0, 0.0, 0.0), InvalidArgument);
    EXPECT_THROW(structural_gap(s, 2.0, 0.0, 1.0, -1.0), InvalidArgument);
    EXPECT_THROW(structural_gap(PointState(Vec::Zero(2), Mat::Identity(2, 2), 0.5), 2.0, 0.0, 1.0), DegenerateGradient);
}

TEST(Invariance, Rotations)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> up(1.1, 6.0), ue(0.01, 1.0);
    auto rel = [](double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b)); };
    for (int i = 0; i < 10000; ++i) {
        const int n = 2 + i % 4;
        const Vec g = random_vec(rng, n);
        const Mat h = random_symmetric(rng, n);
        const Mat q = random_orthogonal(rng, n);
        const double p = up(rng), eps = ue(rng);
        const double gamma = std::max(-1.0, gamma_threshold(n, p)) + 0.5;
        const PointState s(g, h, eps), r(q * g, q * h * q.transpose(), eps);
        ASSERT_LT(rel(operator_values(s, p, gamma).weighted_operator, operator_values(r, p, gamma).weighted_operator), 1e-9);
        ASSERT_LT(rel(fundamental_gap(s), fundamental_gap(r)), 1e-9);
        ASSERT_LT(rel(t_gap(s, p, gamma), t_gap(r, p, gamma)), 1e-9);
        ASSERT_LT(rel(hessian_bound_gap(s, gamma), hessian_bound_gap(r, gamma)), 1e-9);
        ASSERT_LT(rel(structural_gap(s, p, gamma, 1.0), structural_gap(r, p, gamma, 1.0)), 1e-9);
        const Vec b = random_vec(rng, n);
        ASSERT_LT(rel(monotonicity_gap(g, b, 0.7, eps, MonotonicityVariant::RegPos),
                      monotonicity_gap(q * g, q * b, 0.7, eps, MonotonicityVariant::RegPos)),
                  1e-9);
    }
}

TEST(Scaling, WeightedOperatorHomogeneity)
{
    std::mt19937_64 rng(19);
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + i % 3;
        const Vec g = random_vec(rng, n);
        const Mat h = random_symmetric(rng, n);
        const double gamma = -0.6 + 0.02 * i, p = 1.3 + 0.03 * i, eps = 0.2;
        const double base = operator_values(PointState(g, h, eps), p, gamma).weighted_operator;
        for (double t : {0.5, 2.0, 10.0}) {
            const double scaled = operator_values(PointState(t * g, t * h, t * t * eps), p, gamma).weighted_operator;
            EXPECT_NEAR(scaled, std::pow(t, gamma + 1.0) * base, 1e-10 * std::abs(scaled) + 1e-14);
        }
    }
}

TEST(PropertySuites, NoViolationsAndThreadIndependent)
{
    SuiteOptions opt;
    opt.samples = 20000;
    opt.seed = 42;
    const auto one = run_point_suites(opt);
    opt.threads = 3;
    const auto three = run_point_suites(opt);
    ASSERT_EQ(one.size(), 8u);
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].violations, 0) << one[i].name;
        EXPECT_EQ(one[i].samples + 0, 20000) << one[i].name;
        EXPECT_EQ(one[i].worst_ratio, three[i].worst_ratio) << one[i].name;
        EXPECT_EQ(one[i].violations, three[i].violations);
    }
}

TEST(PropertySuites, SmallStructuralConstantIsReported)
{
    SuiteOptions opt;
    opt.samples = 5000;
    opt.c_p = 1e-6;
    const auto r = run_point_suites(opt);
    EXPECT_GT(r.back().violations, 0);
}
