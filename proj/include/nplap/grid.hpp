#pragma once

// Masked uniform grids on convex planar domains (rectangles and disks),
// node-indexed fields, finite-difference derivatives, quadrature norms,
// discrete Hölder norms and mollification.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nplap/error.hpp"

namespace nplap {

struct DomainSpec {
    enum class Shape { Rectangle, Disk };

    Shape shape = Shape::Rectangle;
    double a = 1.0; ///< rectangle [0,a] x [0,b]
    double b = 1.0;
    double R = 1.0; ///< disk of radius R centred at the origin

    static DomainSpec rectangle(double a, double b) { return {Shape::Rectangle, a, b, 0.0}; }
    static DomainSpec unit_square() { return rectangle(1.0, 1.0); }
    static DomainSpec disk(double R) { return {Shape::Disk, 0.0, 0.0, R}; }

    [[nodiscard]] bool convex() const noexcept { return true; }

    [[nodiscard]] double diameter() const noexcept
    {
        return shape == Shape::Rectangle ? std::hypot(a, b) : 2.0 * R;
    }

    [[nodiscard]] double area() const noexcept
    {
        return shape == Shape::Rectangle ? a * b : M_PI * R * R;
    }

    [[nodiscard]] double perimeter() const noexcept
    {
        return shape == Shape::Rectangle ? 2.0 * (a + b) : 2.0 * M_PI * R;
    }

    [[nodiscard]] std::string name() const
    {
        char buf[64];
        if (shape == Shape::Rectangle)
            std::snprintf(buf, sizeof buf, "rect%gx%g", a, b);
        else
            std::snprintf(buf, sizeof buf, "disk%g", R);
        return buf;
    }

    void validate() const
    {
        if (shape == Shape::Rectangle) {
            NPLAP_REQUIRE(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                          "DomainSpec: rectangle sides must be positive");
        } else {
            NPLAP_REQUIRE(R > 0.0 && std::isfinite(R), "DomainSpec: disk radius must be positive");
        }
    }
};

enum class NodeKind : std::uint8_t { Exterior = 0, Boundary = 1, Interior = 2 };

class Grid2D {
public:
    Grid2D(DomainSpec spec, double h, int nx, int ny, double x0, double y0, std::vector<NodeKind> kinds)
        : spec_(spec), h_(h), nx_(nx), ny_(ny), x0_(x0), y0_(y0), kinds_(std::move(kinds))
    {
        NPLAP_REQUIRE(h_ > 0.0, "Grid2D: spacing must be positive");
        NPLAP_REQUIRE(nx_ >= 3 && ny_ >= 3, "Grid2D: too few nodes");
        NPLAP_REQUIRE(kinds_.size() == static_cast<std::size_t>(nx_) * ny_, "Grid2D: mask size mismatch");
        weights_.assign(kinds_.size(), 0.0);
        const double h2 = h_ * h_;
        for (int j = 0; j < ny_; ++j) {
            for (int i = 0; i < nx_; ++i) {
                const auto k = index(i, j);
                if (kinds_[k] == NodeKind::Exterior) continue;
                double w = h2;
                if (spec_.shape == DomainSpec::Shape::Rectangle) {
                    if (i == 0 || i == nx_ - 1) w *= 0.5;
                    if (j == 0 || j == ny_ - 1) w *= 0.5;
                }
                weights_[k] = w;
            }
        }
        for (std::size_t k = 0; k < kinds_.size(); ++k)
            if (kinds_[k] != NodeKind::Exterior) active_.push_back(k);
    }

    [[nodiscard]] const DomainSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] int ny() const noexcept { return ny_; }
    [[nodiscard]] std::size_t size() const noexcept { return kinds_.size(); }
    [[nodiscard]] std::size_t index(int i, int j) const noexcept
    {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
    }
    [[nodiscard]] int col(std::size_t k) const noexcept { return static_cast<int>(k % static_cast<std::size_t>(nx_)); }
    [[nodiscard]] int row(std::size_t k) const noexcept { return static_cast<int>(k / static_cast<std::size_t>(nx_)); }
    [[nodiscard]] double x(int i) const noexcept { return x0_ + i * h_; }
    [[nodiscard]] double y(int j) const noexcept { return y0_ + j * h_; }
    [[nodiscard]] double x0() const noexcept { return x0_; }
    [[nodiscard]] double y0() const noexcept { return y0_; }

    [[nodiscard]] NodeKind kind(std::size_t k) const noexcept { return kinds_[k]; }
    [[nodiscard]] const std::vector<NodeKind>& kinds() const noexcept { return kinds_; }
    [[nodiscard]] bool in_domain(int i, int j) const noexcept
    {
        return i >= 0 && j >= 0 && i < nx_ && j < ny_ && kinds_[index(i, j)] != NodeKind::Exterior;
    }
    [[nodiscard]] bool interior(std::size_t k) const noexcept { return kinds_[k] == NodeKind::Interior; }
    [[nodiscard]] bool boundary(std::size_t k) const noexcept { return kinds_[k] == NodeKind::Boundary; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] double weight(std::size_t k) const noexcept { return weights_[k]; }
    /// In-domain node indices in storage order.
    [[nodiscard]] const std::vector<std::size_t>& active() const noexcept { return active_; }

    [[nodiscard]] double total_weight() const
    {
        double s = 0.0;
        for (double w : weights_) s += w;
        return s;
    }

    [[nodiscard]] std::size_t count(NodeKind kind) const
    {
        return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), kind));
    }

private:
    DomainSpec spec_;
    double h_;
    int nx_, ny_;
    double x0_, y0_;
    std::vector<NodeKind> kinds_;
    std::vector<double> weights_;
    std::vector<std::size_t> active_;
};

using GridPtr = std::shared_ptr<const Grid2D>;

namespace detail {

/// Classifies in-domain nodes: interior iff all eight neighbours are in-domain.
inline std::vector<NodeKind> classify_nodes(int nx, int ny, const std::vector<bool>& inside)
{
    std::vector<NodeKind> kinds(inside.size(), NodeKind::Exterior);
    auto in = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < nx && j < ny && inside[static_cast<std::size_t>(j) * nx + i];
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!in(i, j)) continue;
            bool full = true;
            for (int dj = -1; dj <= 1 && full; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (!in(i + di, j + dj)) {
                        full = false;
                        break;
                    }
            kinds[static_cast<std::size_t>(j) * nx + i] = full ? NodeKind::Interior : NodeKind::Boundary;
        }
    }
    return kinds;
}

} // namespace detail

/// Builds the grid, shrinking h so that it divides the rectangle sides (or the
/// disk radius). Requires h <= shortest side / 4 for rectangles and h <= R / 8
/// for disks.
inline GridPtr build_grid(const DomainSpec& spec, double h)
{
    spec.validate();
    NPLAP_REQUIRE(h > 0.0 && std::isfinite(h), "build_grid: spacing must be positive");

    if (spec.shape == DomainSpec::Shape::Rectangle) {
        const double short_side = std::min(spec.a, spec.b);
        const double long_side = std::max(spec.a, spec.b);
        NPLAP_REQUIRE(h <= short_side / 4.0 * (1.0 + 1e-12), "build_grid: h must not exceed min side / 4");
        const int m0 = static_cast<int>(std::ceil(short_side / h - 1e-9));
        for (int m = m0; m <= 4 * m0; ++m) {
            const double hh = short_side / m;
            const double ratio = long_side / hh;
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) continue;
            const int nx = static_cast<int>(std::lround(spec.a / hh)) + 1;
            const int ny = static_cast<int>(std::lround(spec.b / hh)) + 1;
            std::vector<bool> inside(static_cast<std::size_t>(nx) * ny, true);
            return std::make_shared<const Grid2D>(spec, hh, nx, ny, 0.0, 0.0, detail::classify_nodes(nx, ny, inside));
        }
        throw InvalidArgument("build_grid: rectangle sides are not commensurate with any nearby spacing");
    }

    NPLAP_REQUIRE(h <= spec.R / 8.0 * (1.0 + 1e-12), "build_grid: h must not exceed R / 8");
    const int m = static_cast<int>(std::ceil(spec.R / h - 1e-9));
    const double hh = spec.R / m;
    const int nn = 2 * m + 1;
    std::vector<bool> inside(static_cast<std::size_t>(nn) * nn, false);
    const double r2 = spec.R * spec.R * (1.0 + 1e-12);
    for (int j = 0; j < nn; ++j)
        for (int i = 0; i < nn; ++i) {
            const double x = (i - m) * hh;
            const double y = (j - m) * hh;
            inside[static_cast<std::size_t>(j) * nn + i] = x * x + y * y <= r2;
        }
    return std::make_shared<const Grid2D>(spec, hh, nn, nn, -spec.R, -spec.R, detail::classify_nodes(nn, nn, inside));
}

struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;
    [[nodiscard]] double frobenius_sq() const noexcept { return xx * xx + 2.0 * xy * xy + yy * yy; }
    [[nodiscard]] double trace() const noexcept { return xx + yy; }
};

using Vec2 = std::array<double, 2>;

template <class T>
struct Field {
    GridPtr grid;
    std::vector<T> values;

    Field() = default;
    explicit Field(GridPtr g, T fill = T{}) : grid(std::move(g)), values(grid->size(), fill) {}
    Field(GridPtr g, std::vector<T> v) : grid(std::move(g)), values(std::move(v))
    {
        NPLAP_REQUIRE(values.size() == grid->size(), "Field: value count does not match grid");
    }

    T& operator[](std::size_t k) { return values[k]; }
    const T& operator[](std::size_t k) const { return values[k]; }
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

using ScalarField = Field<double>;
using VectorField = Field<Vec2>;
using MatrixField = Field<Sym2>;

/// Samples fn(x, y) at every in-domain node; exterior nodes hold zero.
template <class Fn>
ScalarField sample(const GridPtr& grid, Fn&& fn)
{
    ScalarField u(grid);
    for (std::size_t k : grid->active()) u[k] = fn(grid->x(grid->col(k)), grid->y(grid->row(k)));
    return u;
}

/// Zeroes boundary nodes (Dirichlet flag).
inline void apply_dirichlet(ScalarField& u)
{
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u.grid->kind(k) != NodeKind::Interior) u[k] = 0.0;
}

inline ScalarField operator*(double t, const ScalarField& u)
{
    ScalarField out = u;
    for (auto& v : out.values) v *= t;
    return out;
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b)
{
    NPLAP_REQUIRE(a.grid == b.grid, "field difference: grids differ");
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
    return out;
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b)
{
    NPLAP_REQUIRE(a.grid == b.grid, "field sum: grids differ");
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
    return out;
}

namespace detail {

/// Derivative of a node-indexed quantity along one axis at (i, j): central
/// when both neighbours exist, otherwise the widest one-sided stencil the
/// mask allows (second order with three points).
template <class Get>
double first_derivative(const Grid2D& g, int i, int j, int di, int dj, Get&& get)
{
    const double h = g.h();
    const bool fwd1 = g.in_domain(i + di, j + dj);
    const bool bwd1 = g.in_domain(i - di, j - dj);
    if (fwd1 && bwd1) return (get(i + di, j + dj) - get(i - di, j - dj)) / (2.0 * h);
    if (fwd1) {
        if (g.in_domain(i + 2 * di, j + 2 * dj))
            return (-3.0 * get(i, j) + 4.0 * get(i + di, j + dj) - get(i + 2 * di, j + 2 * dj)) / (2.0 * h);
        return (get(i + di, j + dj) - get(i, j)) / h;
    }
    if (bwd1) {
        if (g.in_domain(i - 2 * di, j - 2 * dj))
            return (3.0 * get(i, j) - 4.0 * get(i - di, j - dj) + get(i - 2 * di, j - 2 * dj)) / (2.0 * h);
        return (get(i, j) - get(i - di, j - dj)) / h;
    }
    return 0.0;
}

template <class Get>
double second_derivative(const Grid2D& g, int i, int j, int di, int dj, Get&& get)
{
    const double h2 = g.h() * g.h();
    const bool fwd1 = g.in_domain(i + di, j + dj);
    const bool bwd1 = g.in_domain(i - di, j - dj);
    if (fwd1 && bwd1) return (get(i + di, j + dj) - 2.0 * get(i, j) + get(i - di, j - dj)) / h2;
    for (int s : {1, -1}) {
        const int ai = s * di, aj = s * dj;
        if (!g.in_domain(i + ai, j + aj) || !g.in_domain(i + 2 * ai, j + 2 * aj)) continue;
        if (g.in_domain(i + 3 * ai, j + 3 * aj))
            return (2.0 * get(i, j) - 5.0 * get(i + ai, j + aj) + 4.0 * get(i + 2 * ai, j + 2 * aj) -
                    get(i + 3 * ai, j + 3 * aj)) /
                   h2;
        return (get(i, j) - 2.0 * get(i + ai, j + aj) + get(i + 2 * ai, j + 2 * aj)) / h2;
    }
    return 0.0;
}

/// Three collinear in-domain points along the axis through (i, j).
inline bool axis_stencil_ok(const Grid2D& g, int i, int j, int di, int dj)
{
    const bool fwd = g.in_domain(i + di, j + dj), bwd = g.in_domain(i - di, j - dj);
    return (fwd && bwd) || (fwd && g.in_domain(i + 2 * di, j + 2 * dj)) ||
           (bwd && g.in_domain(i - 2 * di, j - 2 * dj));
}

/// Least-squares quadratic through the in-domain nodes of the 5x5 window at
/// (i, j). Returns {u_x, u_y, u_xx, u_xy, u_yy}, or nothing if the nodes do
/// not determine a quadratic.
template <class Get>
std::optional<std::array<double, 5>> quadratic_fit(const Grid2D& g, int i, int j, Get&& get)
{
    std::vector<std::array<int, 2>> pts;
    for (int dj = -2; dj <= 2; ++dj)
        for (int di = -2; di <= 2; ++di)
            if (g.in_domain(i + di, j + dj)) pts.push_back({di, dj});
    if (pts.size() < 6) return std::nullopt;
    Eigen::MatrixXd A(pts.size(), 6);
    Eigen::VectorXd b(pts.size());
    const double u0 = get(i, j);
    for (std::size_t r = 0; r < pts.size(); ++r) {
        const double x = pts[r][0], y = pts[r][1];
        A.row(static_cast<Eigen::Index>(r)) << 1.0, x, y, 0.5 * x * x, x * y, 0.5 * y * y;
        b[static_cast<Eigen::Index>(r)] = get(i + pts[r][0], j + pts[r][1]) - u0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 6) return std::nullopt;
    const Eigen::VectorXd c = qr.solve(b);
    const double h = g.h();
    return std::array<double, 5>{c[1] / h, c[2] / h, c[3] / (h * h), c[4] / (h * h), c[5] / (h * h)};
}

} // namespace detail

/// Gradient of a scalar field at every in-domain node.
inline VectorField gradient(const ScalarField& u)
{
    const Grid2D& g = *u.grid;
    auto get = [&](int i, int j) { return u[g.index(i, j)]; };
    VectorField du(u.grid);
    for (std::size_t k : g.active()) {
        const int i = g.col(k), j = g.row(k);
        if (!detail::axis_stencil_ok(g, i, j, 1, 0) || !detail::axis_stencil_ok(g, i, j, 0, 1)) {
            if (auto fit = detail::quadratic_fit(g, i, j, get)) {
                du[k] = {(*fit)[0], (*fit)[1]};
                continue;
            }
        }
        du[k] = {detail::first_derivative(g, i, j, 1, 0, get), detail::first_derivative(g, i, j, 0, 1, get)};
    }
    return du;
}

struct Derivatives {
    VectorField grad;
    MatrixField hess;
};

/// Central differences for the gradient, 3-point second differences and the
/// 4-point cross stencil for the Hessian at interior nodes. Off the interior,
/// one-sided second-order stencils along each axis and a local least-squares
/// quadratic for u_xy; nodes missing an axis stencil (disk tips) take the
/// whole jet from the quadratic.
inline Derivatives differentiate(const ScalarField& u)
{
    const Grid2D& g = *u.grid;
    auto get = [&](int i, int j) { return u[g.index(i, j)]; };
    Derivatives d{gradient(u), MatrixField(u.grid)};
    auto gx = [&](int i, int j) { return d.grad[g.index(i, j)][0]; };
    auto gy = [&](int i, int j) { return d.grad[g.index(i, j)][1]; };
    for (std::size_t k : g.active()) {
        const int i = g.col(k), j = g.row(k);
        Sym2 H;
        if (g.interior(k)) {
            H.xx = detail::second_derivative(g, i, j, 1, 0, get);
            H.yy = detail::second_derivative(g, i, j, 0, 1, get);
            H.xy = (get(i + 1, j + 1) - get(i + 1, j - 1) - get(i - 1, j + 1) + get(i - 1, j - 1)) / (4.0 * g.h() * g.h());
            d.hess[k] = H;
            continue;
        }
        const bool regular = detail::axis_stencil_ok(g, i, j, 1, 0) && detail::axis_stencil_ok(g, i, j, 0, 1);
        const auto fit = detail::quadratic_fit(g, i, j, get);
        if (fit && !regular) {
            d.hess[k] = {(*fit)[2], (*fit)[3], (*fit)[4]};
            continue;
        }
        H.xx = detail::second_derivative(g, i, j, 1, 0, get);
        H.yy = detail::second_derivative(g, i, j, 0, 1, get);
        H.xy = fit ? (*fit)[3]
                   : 0.5 * (detail::first_derivative(g, i, j, 0, 1, gx) + detail::first_derivative(g, i, j, 1, 0, gy));
        d.hess[k] = H;
    }
    return d;
}

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double magnitude(const Sym2& m) { return std::sqrt(m.frobenius_sq()); }

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Weighted discrete L^q norm, q in [1, inf]. Vector and matrix values use the
/// Euclidean / Frobenius magnitude pointwise.
template <class T>
double norm(const Field<T>& f, double q)
{
    NPLAP_REQUIRE(q >= 1.0, "norm: q must be >= 1");
    const Grid2D& g = *f.grid;
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t k : g.active()) m = std::max(m, magnitude(f[k]));
        return m;
    }
    double s = 0.0;
    if (q == 2.0) {
        for (std::size_t k : g.active()) {
            const double v = magnitude(f[k]);
            s += g.weight(k) * v * v;
        }
        return std::sqrt(s);
    }
    if (q == 1.0) {
        for (std::size_t k : g.active()) s += g.weight(k) * magnitude(f[k]);
        return s;
    }
    // factor out the maximum so large q does not overflow
    double m = 0.0;
    for (std::size_t k : g.active()) m = std::max(m, magnitude(f[k]));
    if (m == 0.0) return 0.0;
    for (std::size_t k : g.active()) s += g.weight(k) * std::pow(magnitude(f[k]) / m, q);
    return m * std::pow(s, 1.0 / q);
}

/// Weighted integral of a scalar field.
inline double integrate(const ScalarField& f)
{
    double s = 0.0;
    for (std::size_t k : f.grid->active()) s += f.grid->weight(k) * f[k];
    return s;
}

struct HolderOptions {
    int local_radius = 4;
    int pair_budget = 20000;
    std::uint64_t seed = 7;
};

/// max|u| + max |u(x)-u(y)|/|x-y|^alpha over: all pairs within index
/// distance local_radius, all pairs through the argmax/argmin nodes, and
/// pair_budget random pairs. `subset` (optional) restricts the node set.
inline double holder_norm(const ScalarField& u, double alpha, const HolderOptions& opt = {},
                          const std::vector<bool>* subset = nullptr)
{
    NPLAP_REQUIRE(alpha > 0.0 && alpha < 1.0, "holder_norm: alpha must lie in (0,1)");
    const Grid2D& g = *u.grid;
    std::vector<std::size_t> nodes;
    for (std::size_t k : g.active())
        if (!subset || (*subset)[k]) nodes.push_back(k);
    if (nodes.empty()) return 0.0;

    auto selected = [&](int i, int j) {
        if (!g.in_domain(i, j)) return false;
        return !subset || (*subset)[g.index(i, j)];
    };
    auto quotient = [&](std::size_t a, std::size_t b) {
        const double dx = g.x(g.col(a)) - g.x(g.col(b));
        const double dy = g.y(g.row(a)) - g.y(g.row(b));
        const double d = std::hypot(dx, dy);
        if (d == 0.0) return 0.0;
        return std::abs(u[a] - u[b]) / std::pow(d, alpha);
    };

    double sup = 0.0, semi = 0.0;
    std::size_t kmax = nodes.front(), kmin = nodes.front();
    for (std::size_t k : nodes) {
        sup = std::max(sup, std::abs(u[k]));
        if (u[k] > u[kmax]) kmax = k;
        if (u[k] < u[kmin]) kmin = k;
    }

    const int r = opt.local_radius;
    for (std::size_t k : nodes) {
        const int i = g.col(k), j = g.row(k);
        for (int dj = 0; dj <= r; ++dj)
            for (int di = -r; di <= r; ++di) {
                if (dj == 0 && di <= 0) continue;
                if (!selected(i + di, j + dj)) continue;
                semi = std::max(semi, quotient(k, g.index(i + di, j + dj)));
            }
    }
    for (std::size_t k : nodes) semi = std::max({semi, quotient(k, kmax), quotient(k, kmin)});

    std::mt19937_64 rng(opt.seed);
    for (int t = 0; t < opt.pair_budget; ++t) {
        const auto a = nodes[static_cast<std::size_t>(rng() % nodes.size())];
        const auto b = nodes[static_cast<std::size_t>(rng() % nodes.size())];
        semi = std::max(semi, quotient(a, b));
    }
    return sup + semi;
}

/// Discrete convolution with a normalized radial bump of radius eps_moll; data
/// is extended by zero outside the domain. Returns f unchanged when the radius
/// is below two grid spacings.
inline ScalarField mollify(const ScalarField& f, double eps_moll)
{
    const Grid2D& g = *f.grid;
    if (!(eps_moll >= 2.0 * g.h() * (1.0 - 1e-12))) return f;

    struct Tap {
        int di, dj;
        double w;
    };
    std::vector<Tap> taps;
    const int r = static_cast<int>(std::ceil(eps_moll / g.h()));
    double mass = 0.0;
    for (int dj = -r; dj <= r; ++dj)
        for (int di = -r; di <= r; ++di) {
            const double t = std::hypot(di, dj) * g.h() / eps_moll;
            if (t >= 1.0) continue;
            const double w = std::exp(-1.0 / (1.0 - t * t));
            taps.push_back({di, dj, w});
            mass += w;
        }
    for (auto& tp : taps) tp.w /= mass;

    ScalarField out(f.grid);
    for (std::size_t k : g.active()) {
        const int i = g.col(k), j = g.row(k);
        double s = 0.0;
        for (const auto& tp : taps)
            if (g.in_domain(i + tp.di, j + tp.dj)) s += tp.w * f[g.index(i + tp.di, j + tp.dj)];
        out[k] = s;
    }
    return out;
}

/// Sum of the normalized mollifier taps (1 up to rounding).
inline double mollifier_mass(double h, double eps_moll)
{
    const int r = static_cast<int>(std::ceil(eps_moll / h));
    std::vector<double> w;
    double mass = 0.0;
    for (int dj = -r; dj <= r; ++dj)
        for (int di = -r; di <= r; ++di) {
            const double t = std::hypot(di, dj) * h / eps_moll;
            if (t >= 1.0) continue;
            w.push_back(std::exp(-1.0 / (1.0 - t * t)));
            mass += w.back();
        }
    double s = 0.0;
    for (double v : w) s += v / mass;
    return s;
}

// Grid dump: "nx ny h" then one line per node "i j x y mask value".

inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_dump(std::ostream& os, const ScalarField& u)
{
    const Grid2D& g = *u.grid;
    os << g.nx() << ' ' << g.ny() << ' ' << format_real(g.h()) << '\n';
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const auto k = g.index(i, j);
            os << i << ' ' << j << ' ' << format_real(g.x(i)) << ' ' << format_real(g.y(j)) << ' '
               << static_cast<int>(g.kind(k)) << ' ' << format_real(u[k]) << '\n';
        }
}

/// Reads a dump written by write_dump. The domain is a rectangle when every
/// node is in-domain, otherwise the disk inscribed in the node box.
inline ScalarField read_dump(std::istream& is)
{
    int nx = 0, ny = 0;
    double h = 0.0;
    if (!(is >> nx >> ny >> h) || nx < 3 || ny < 3 || !(h > 0.0)) throw InvalidArgument("read_dump: bad header");
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    std::vector<NodeKind> kinds(n, NodeKind::Exterior);
    std::vector<double> vals(n, 0.0);
    std::vector<bool> seen(n, false);
    double x0 = 0.0, y0 = 0.0;
    for (std::size_t line = 0; line < n; ++line) {
        int i = 0, j = 0, mask = 0;
        double x = 0.0, y = 0.0, v = 0.0;
        if (!(is >> i >> j >> x >> y >> mask >> v)) throw InvalidArgument("read_dump: truncated node list");
        if (i < 0 || j < 0 || i >= nx || j >= ny || mask < 0 || mask > 2)
            throw InvalidArgument("read_dump: node record out of range");
        const std::size_t k = static_cast<std::size_t>(j) * nx + i;
        if (seen[k]) throw InvalidArgument("read_dump: duplicate node");
        seen[k] = true;
        kinds[k] = static_cast<NodeKind>(mask);
        vals[k] = v;
        if (i == 0 && j == 0) {
            x0 = x;
            y0 = y;
        }
    }
    const bool full = std::none_of(kinds.begin(), kinds.end(), [](NodeKind k) { return k == NodeKind::Exterior; });
    DomainSpec spec = full ? DomainSpec::rectangle((nx - 1) * h, (ny - 1) * h) : DomainSpec::disk(0.5 * (nx - 1) * h);
    auto grid = std::make_shared<const Grid2D>(spec, h, nx, ny, x0, y0, std::move(kinds));
    return ScalarField(grid, std::move(vals));
}

} // namespace nplap
