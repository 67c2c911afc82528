#pragma once

// Closed-form functions used as data and as manufactured solutions.
//
// Manufactured fields vanish on the boundary of their domain and come with
// exact first and second derivatives. Sources are right-hand sides for the
// solver and need not vanish anywhere.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nplap/grid.hpp"

namespace nplap {

struct Jet {
    double value = 0.0;
    Vec2 grad{0.0, 0.0};
    Sym2 hess;
};

namespace detail {

inline Jet product(const Jet& a, const Jet& b)
{
    Jet r;
    r.value = a.value * b.value;
    r.grad = {a.grad[0] * b.value + a.value * b.grad[0], a.grad[1] * b.value + a.value * b.grad[1]};
    r.hess.xx = a.hess.xx * b.value + 2.0 * a.grad[0] * b.grad[0] + a.value * b.hess.xx;
    r.hess.yy = a.hess.yy * b.value + 2.0 * a.grad[1] * b.grad[1] + a.value * b.hess.yy;
    r.hess.xy = a.hess.xy * b.value + a.grad[0] * b.grad[1] + a.grad[1] * b.grad[0] + a.value * b.hess.xy;
    return r;
}

/// Radial profile phi(r) with phi' and phi'' supplied; handles r -> 0 for
/// profiles that are smooth functions of r^2 (phi'(0) = 0).
template <class F0, class F1, class F2>
Jet radial(double x, double y, F0&& f0, F1&& f1, F2&& f2)
{
    const double r = std::hypot(x, y);
    Jet j;
    j.value = f0(r);
    const double d1 = f1(r), d2 = f2(r);
    if (r < 1e-12) {
        j.hess = {d2, 0.0, d2};
        return j;
    }
    const double ux = x / r, uy = y / r;
    const double tang = d1 / r;
    j.grad = {d1 * ux, d1 * uy};
    j.hess.xx = d2 * ux * ux + tang * (1.0 - ux * ux);
    j.hess.yy = d2 * uy * uy + tang * (1.0 - uy * uy);
    j.hess.xy = (d2 - tang) * ux * uy;
    return j;
}

} // namespace detail

inline const std::vector<std::string>& manufactured_names()
{
    static const std::vector<std::string> names{"sinsin", "bubble", "skew"};
    return names;
}

/// Exact jet of a registered zero-boundary field on the given domain.
inline Jet manufactured_jet(std::string_view name, const DomainSpec& dom, double x, double y)
{
    using detail::product;
    const bool rect = dom.shape == DomainSpec::Shape::Rectangle;
    if (name == "sinsin") {
        if (rect) {
            const double kx = M_PI / dom.a, ky = M_PI / dom.b;
            const double sx = std::sin(kx * x), cx = std::cos(kx * x);
            const double sy = std::sin(ky * y), cy = std::cos(ky * y);
            return Jet{sx * sy, {kx * cx * sy, ky * sx * cy}, {-kx * kx * sx * sy, kx * ky * cx * cy, -ky * ky * sx * sy}};
        }
        const double k = M_PI / (2.0 * dom.R);
        return detail::radial(
            x, y, [&](double r) { return std::cos(k * r); }, [&](double r) { return -k * std::sin(k * r); },
            [&](double r) { return -k * k * std::cos(k * r); });
    }

    Jet bubble;
    if (rect) {
        const double s = 16.0 / (dom.a * dom.a * dom.b * dom.b);
        const Jet bx{x * (dom.a - x), {dom.a - 2.0 * x, 0.0}, {-2.0, 0.0, 0.0}};
        const Jet by{y * (dom.b - y), {0.0, dom.b - 2.0 * y}, {0.0, 0.0, -2.0}};
        bubble = product(bx, by);
        bubble.value *= s;
        bubble.grad = {bubble.grad[0] * s, bubble.grad[1] * s};
        bubble.hess = {bubble.hess.xx * s, bubble.hess.xy * s, bubble.hess.yy * s};
    } else {
        const double c = 1.0 / (dom.R * dom.R);
        bubble = Jet{1.0 - c * (x * x + y * y), {-2.0 * c * x, -2.0 * c * y}, {-2.0 * c, 0.0, -2.0 * c}};
    }
    if (name == "bubble") return bubble;
    if (name == "skew") {
        const double L = rect ? dom.a : 2.0 * dom.R;
        const Jet tilt{1.0 + x / L + 0.5 * (x / L) * (x / L), {1.0 / L + x / (L * L), 0.0}, {1.0 / (L * L), 0.0, 0.0}};
        return product(bubble, tilt);
    }
    throw InvalidArgument("unknown manufactured function: " + std::string(name));
}

inline ScalarField manufactured_field(std::string_view name, const GridPtr& grid)
{
    const auto dom = grid->spec();
    return sample(grid, [&](double x, double y) { return manufactured_jet(name, dom, x, y).value; });
}

inline const std::vector<std::string>& source_names()
{
    static const std::vector<std::string> names{"constant", "sinsin", "gaussian-bump", "checker-sign"};
    return names;
}

inline bool is_source_name(std::string_view name)
{
    for (const auto& s : source_names())
        if (s == name) return true;
    return false;
}

/// Right-hand side f(x, y) from the source registry.
inline double source_value(std::string_view name, const DomainSpec& dom, double x, double y)
{
    const bool rect = dom.shape == DomainSpec::Shape::Rectangle;
    const double cx = rect ? 0.5 * dom.a : 0.0;
    const double cy = rect ? 0.5 * dom.b : 0.0;
    const double lx = rect ? dom.a : 2.0 * dom.R;
    const double ly = rect ? dom.b : 2.0 * dom.R;
    const double sx = x - cx + 0.5 * lx; // shift to [0, lx]
    const double sy = y - cy + 0.5 * ly;
    if (name == "constant") return 1.0;
    if (name == "sinsin") {
        if (rect) return std::sin(M_PI * sx / lx) * std::sin(M_PI * sy / ly);
        return std::cos(M_PI * std::hypot(x, y) / (2.0 * dom.R));
    }
    if (name == "gaussian-bump") {
        const double sigma = 0.1 * dom.diameter();
        const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        return std::exp(-r2 / (2.0 * sigma * sigma));
    }
    if (name == "checker-sign") return std::sin(2.0 * M_PI * sx / lx) * std::sin(2.0 * M_PI * sy / ly);
    throw InvalidArgument("unknown source function: " + std::string(name));
}

inline ScalarField source_field(std::string_view name, const GridPtr& grid)
{
    const auto dom = grid->spec();
    return sample(grid, [&](double x, double y) { return source_value(name, dom, x, y); });
}

} // namespace nplap
