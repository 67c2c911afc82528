#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nplap/functions.hpp"
#include "nplap/grid.hpp"
#include "nplap/nonlinear_norms.hpp"

using namespace nplap;

namespace {

/// Composite Simpson rule on [a,b] with m (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int m = 2000)
{
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

template <class F>
double simpson2(F&& f, double a, double b, int m = 400)
{
    return simpson([&](double x) { return simpson([&](double y) { return f(x, y); }, 0.0, b, m); }, 0.0, a, m);
}

} // namespace

TEST(BuildGrid, QuarterSpacingCounts)
{
    const auto g = build_grid(DomainSpec::unit_square(), 0.25);
    EXPECT_EQ(g->nx(), 5);
    EXPECT_EQ(g->ny(), 5);
    EXPECT_EQ(g->count(NodeKind::Interior), 9u);
    EXPECT_EQ(g->count(NodeKind::Boundary), 16u);
}

TEST(BuildGrid, WeightsSumToArea)
{
    for (double h : {0.1, 1.0 / 16, 1.0 / 64}) {
        const auto g = build_grid(DomainSpec::unit_square(), h);
        EXPECT_NEAR(g->total_weight(), 1.0, 2.0 * g->h() * 4.0);
    }
    const auto r = build_grid(DomainSpec::rectangle(2.0, 1.0), 0.1);
    EXPECT_NEAR(r->total_weight(), 2.0, 1e-12);
    const auto d = build_grid(DomainSpec::disk(1.0), 1.0 / 32);
    EXPECT_NEAR(d->total_weight(), M_PI, 0.15);
}

TEST(BuildGrid, AdjustsSpacingDownward)
{
    const auto g = build_grid(DomainSpec::unit_square(), 0.07);
    EXPECT_LE(g->h(), 0.07);
    EXPECT_NEAR((g->nx() - 1) * g->h(), 1.0, 1e-12);
}

TEST(BuildGrid, InteriorNodesHaveEightNeighbours)
{
    const auto g = build_grid(DomainSpec::disk(1.0), 0.05);
    for (std::size_t k : g->active()) {
        if (!g->interior(k)) continue;
        const int i = g->col(k), j = g->row(k);
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) ASSERT_TRUE(g->in_domain(i + di, j + dj));
    }
    for (std::size_t k : g->active()) {
        const double r = std::hypot(g->x(g->col(k)), g->y(g->row(k)));
        EXPECT_LE(r, 1.0 + 1e-12);
        if (g->boundary(k)) {
            EXPECT_GE(r, 1.0 - 2.0 * g->h());
        }
    }
}

TEST(BuildGrid, RejectsBadInput)
{
    EXPECT_THROW(build_grid(DomainSpec::rectangle(0.0, 1.0), 0.1), InvalidArgument);
    EXPECT_THROW(build_grid(DomainSpec::disk(-1.0), 0.1), InvalidArgument);
    EXPECT_THROW(build_grid(DomainSpec::unit_square(), 0.3), InvalidArgument);
    EXPECT_THROW(build_grid(DomainSpec::unit_square(), 0.0), InvalidArgument);
}

TEST(DomainSpec, Diameter)
{
    EXPECT_DOUBLE_EQ(DomainSpec::rectangle(3.0, 4.0).diameter(), 5.0);
    EXPECT_DOUBLE_EQ(DomainSpec::disk(0.5).diameter(), 1.0);
}

TEST(Differentiate, QuadraticExact)
{
    const auto g = build_grid(DomainSpec::unit_square(), 1.0 / 16);
    const auto u = sample(g, [](double x, double) { return x * x; });
    const auto d = differentiate(u);
    for (std::size_t k : g->active()) {
        const double x = g->x(g->col(k));
        EXPECT_NEAR(d.grad[k][0], 2.0 * x, 1e-11);
        EXPECT_NEAR(d.grad[k][1], 0.0, 1e-11);
        EXPECT_NEAR(d.hess[k].xx, 2.0, 1e-9);
        EXPECT_NEAR(d.hess[k].xy, 0.0, 1e-9);
        EXPECT_NEAR(d.hess[k].yy, 0.0, 1e-9);
    }
}

TEST(Differentiate, ConstantGivesZero)
{
    const auto g = build_grid(DomainSpec::disk(1.0), 1.0 / 16);
    const auto d = differentiate(sample(g, [](double, double) { return 3.5; }));
    EXPECT_LT(norm(d.grad, kInfinity), 1e-10);
    EXPECT_LT(norm(d.hess, kInfinity), 1e-8);
}

TEST(Differentiate, SecondOrderHessian)
{
    auto err = [](double h) {
        const auto g = build_grid(DomainSpec::unit_square(), h);
        const auto d = differentiate(sample(g, [](double x, double) { return std::sin(M_PI * x); }));
        double e = 0.0;
        for (std::size_t k : g->active())
            e = std::max(e, std::abs(d.hess[k].xx + M_PI * M_PI * std::sin(M_PI * g->x(g->col(k)))));
        return e;
    };
    const double order = std::log2(err(1.0 / 64) / err(1.0 / 128));
    EXPECT_GE(order, 1.8);
    EXPECT_LE(order, 2.2);
}

TEST(Differentiate, MixedDerivativeOnDisk)
{
    const auto g = build_grid(DomainSpec::disk(1.0), 1.0 / 32);
    const auto d = differentiate(sample(g, [](double x, double y) { return x * y + 0.5 * y * y; }));
    for (std::size_t k : g->active()) {
        EXPECT_NEAR(d.hess[k].xy, 1.0, 1e-8);
        EXPECT_NEAR(d.hess[k].yy, 1.0, 1e-8);
    }
}

TEST(Norm, Examples)
{
    const double h = 1.0 / 64;
    const auto g = build_grid(DomainSpec::unit_square(), h);
    EXPECT_NEAR(norm(sample(g, [](double, double) { return 1.0; }), 2.0), 1.0, 8.0 * h);
    const auto u = manufactured_field("sinsin", g);
    EXPECT_NEAR(norm(u, 2.0), 0.5, 0.01);
    EXPECT_NEAR(norm(u, kInfinity), 1.0, h * h * M_PI * M_PI);
    EXPECT_THROW(norm(u, 0.5), InvalidArgument);
}

TEST(Norm, HomogeneousAndTriangle)
{
    const auto g = build_grid(DomainSpec::disk(1.0), 1.0 / 16);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int s = 0; s < 1000; ++s) {
        ScalarField a(g), b(g);
        for (std::size_t k : g->active()) {
            a[k] = nd(rng);
            b[k] = nd(rng);
        }
        const double q = 1.0 + (s % 7);
        const double t = -2.5;
        EXPECT_NEAR(norm(t * a, q), 2.5 * norm(a, q), 1e-10 * norm(a, q));
        EXPECT_LE(norm(a + b, q), norm(a, q) + norm(b, q) + 1e-10);
    }
}

TEST(Norm, LargeExponentDoesNotOverflow)
{
    const auto g = build_grid(DomainSpec::unit_square(), 1.0 / 16);
    const auto u = sample(g, [](double, double) { return 1e30; });
    EXPECT_NEAR(norm(u, 40.0), 1e30, 1e18);
}

TEST(Norm, RefinementOrder)
{
    // q = 4 norm of sinsin against an independent Simpson value.
    const double exact =
        std::pow(simpson2([](double x, double y) { return std::pow(std::sin(M_PI * x) * std::sin(M_PI * y), 4); }, 1.0, 1.0),
                 0.25);
    auto err = [&](double h) { return std::abs(norm(manufactured_field("sinsin", build_grid(DomainSpec::unit_square(), h)), 4.0) - exact); };
    const double e1 = err(1.0 / 16), e2 = err(1.0 / 32);
    EXPECT_TRUE(e2 < 1e-13 || std::log2(e1 / e2) >= 1.5);
}

TEST(NonlinearNorms, SobolevAndOperatorTermsEqualPiSquared)
{
    // ∫|D^2 u|^2 = ∫(Δu)^2 = π^4 for sinsin on the unit square.
    const double oracle = std::sqrt(simpson2(
        [](double x, double y) {
            const double sx = std::sin(M_PI * x), cx = std::cos(M_PI * x), sy = std::sin(M_PI * y), cy = std::cos(M_PI * y);
            const double p4 = std::pow(M_PI, 4);
            return p4 * (sx * sx * sy * sy + 2.0 * cx * cx * cy * cy + sx * sx * sy * sy);
        },
        1.0, 1.0));
    const auto u = manufactured_field("sinsin", build_grid(DomainSpec::unit_square(), 1.0 / 128));
    const auto gn = nonlinear_gradient_norms(u, 2.0, 0.0, 1e-2);
    EXPECT_NEAR(gn.sobolev_term, oracle, 0.02 * oracle);
    EXPECT_NEAR(gn.rhs_op_term, oracle, 0.02 * oracle);
    EXPECT_NEAR(gn.eps_term, 0.1, 1e-15);
}

TEST(NonlinearNorms, ZeroField)
{
    const auto g = build_grid(DomainSpec::unit_square(), 1.0 / 16);
    const auto gn = nonlinear_gradient_norms(ScalarField(g), 3.0, 0.5, 0.04);
    EXPECT_EQ(gn.grad_q0_term, 0.0);
    EXPECT_EQ(gn.sobolev_term, 0.0);
    EXPECT_EQ(gn.rhs_op_term, 0.0);
    EXPECT_NEAR(gn.eps_term, std::pow(0.04, 0.75), 1e-15);
}

TEST(Holder, Examples)
{
    const double h = 1.0 / 32;
    const auto g = build_grid(DomainSpec::unit_square(), h);
    EXPECT_DOUBLE_EQ(holder_norm(sample(g, [](double, double) { return -2.0; }), 0.5), 2.0);
    const auto u = sample(g, [](double x, double) { return x; });
    const double hn = holder_norm(u, 0.5);
    EXPECT_NEAR(hn - 1.0, 1.0, h);
    EXPECT_NEAR(holder_norm(3.0 * u, 0.5), 3.0 * hn, 1e-12);
    EXPECT_THROW(holder_norm(u, 1.0), InvalidArgument);
}

TEST(Holder, Deterministic)
{
    const auto u = manufactured_field("skew", build_grid(DomainSpec::disk(1.0), 1.0 / 32));
    EXPECT_EQ(holder_norm(u, 0.3), holder_norm(u, 0.3));
}

TEST(Mollify, MassAndConstants)
{
    const double h = 1.0 / 64;
    EXPECT_NEAR(mollifier_mass(h, 4.0 * h), 1.0, 1e-12);
    const auto g = build_grid(DomainSpec::unit_square(), h);
    const auto c = sample(g, [](double, double) { return 2.0; });
    const double em = 4.0 * h;
    const auto m = mollify(c, em);
    for (std::size_t k : g->active()) {
        EXPECT_LE(m[k], 2.0 + 1e-12);
        const double x = g->x(g->col(k)), y = g->y(g->row(k));
        if (std::min({x, y, 1.0 - x, 1.0 - y}) >= em) {
            EXPECT_NEAR(m[k], 2.0, 1e-12);
        }
    }
    EXPECT_LE(norm(m, 2.0), norm(c, 2.0) + 1e-12);
    const auto same = mollify(c, h);
    EXPECT_EQ(same.values, c.values);
}

TEST(Mollify, ConvergesAwayFromBoundary)
{
    const double h = 1.0 / 64;
    const auto g = build_grid(DomainSpec::unit_square(), h);
    const auto f = source_field("gaussian-bump", g);
    double prev = std::numeric_limits<double>::infinity();
    for (double em : {8.0 * h, 4.0 * h, 2.0 * h}) {
        const auto m = mollify(f, em);
        double s = 0.0;
        for (std::size_t k : g->active()) {
            const double x = g->x(g->col(k)), y = g->y(g->row(k));
            if (std::min({x, y, 1.0 - x, 1.0 - y}) <= 8.0 * h) continue;
            s += g->weight(k) * (m[k] - f[k]) * (m[k] - f[k]);
        }
        EXPECT_LT(std::sqrt(s), prev);
        prev = std::sqrt(s);
    }
}

TEST(Dump, RoundTrip)
{
    for (const auto& spec : {DomainSpec::rectangle(2.0, 1.0), DomainSpec::disk(0.75)}) {
        const auto u = manufactured_field("skew", build_grid(spec, 0.05));
        std::stringstream ss;
        write_dump(ss, u);
        const auto v = read_dump(ss);
        EXPECT_EQ(v.grid->nx(), u.grid->nx());
        EXPECT_EQ(v.grid->kinds(), u.grid->kinds());
        EXPECT_EQ(v.values, u.values);
        EXPECT_EQ(v.grid->spec().name(), u.grid->spec().name());
        EXPECT_NEAR(v.grid->total_weight(), u.grid->total_weight(), 1e-12);
    }
}

TEST(Dump, RejectsGarbage)
{
    std::stringstream bad("3 3 0.5\n0 0 0 0 1 1\n");
    EXPECT_THROW(read_dump(bad), InvalidArgument);
    std::stringstream header("x y z");
    EXPECT_THROW(read_dump(header), InvalidArgument);
}

TEST(Functions, ManufacturedFieldsVanishOnBoundary)
{
    for (const auto& spec : {DomainSpec::unit_square(), DomainSpec::rectangle(1.0, 2.0), DomainSpec::disk(1.0)})
        for (const auto& name : manufactured_names()) {
            for (int s = 0; s < 64; ++s) {
                const double t = 2.0 * M_PI * s / 64;
                double x, y;
                if (spec.shape == DomainSpec::Shape::Disk) {
                    x = spec.R * std::cos(t);
                    y = spec.R * std::sin(t);
                } else {
                    x = (s % 2) ? spec.a * s / 64.0 : 0.0;
                    y = (s % 2) ? 0.0 : spec.b * s / 64.0;
                }
                EXPECT_NEAR(manufactured_jet(name, spec, x, y).value, 0.0, 1e-12) << name;
            }
        }
}

TEST(Functions, JetsMatchFiniteDifferences)
{
    const double d = 1e-5;
    for (const auto& spec : {DomainSpec::rectangle(1.5, 1.0), DomainSpec::disk(1.0)})
        for (const auto& name : manufactured_names()) {
            const double x = 0.31, y = 0.27;
            const auto j = manufactured_jet(name, spec, x, y);
            auto v = [&](double a, double b) { return manufactured_jet(name, spec, a, b).value; };
            EXPECT_NEAR(j.grad[0], (v(x + d, y) - v(x - d, y)) / (2 * d), 1e-7);
            EXPECT_NEAR(j.grad[1], (v(x, y + d) - v(x, y - d)) / (2 * d), 1e-7);
            const double e = 1e-4;
            EXPECT_NEAR(j.hess.xx, (v(x + e, y) - 2 * v(x, y) + v(x - e, y)) / (e * e), 1e-5);
            EXPECT_NEAR(j.hess.yy, (v(x, y + e) - 2 * v(x, y) + v(x, y - e)) / (e * e), 1e-5);
            EXPECT_NEAR(j.hess.xy, (v(x + e, y + e) - v(x + e, y - e) - v(x - e, y + e) + v(x - e, y - e)) / (4 * e * e), 1e-5);
        }
    EXPECT_THROW(manufactured_jet("nope", DomainSpec::unit_square(), 0.1, 0.1), InvalidArgument);
    EXPECT_THROW(source_value("nope", DomainSpec::unit_square(), 0.1, 0.1), InvalidArgument);
}
