#pragma once

// Discrete versions of the nonlinear quantities appearing in the a priori
// estimates: the weighted operator field, the flux V = (|Du|^2+eps)^(gamma/2) Du
// and its derivative, and the norm terms built from them.

#include <cmath>
#include <optional>

#include "nplap/grid.hpp"
#include "nplap/params.hpp"
#include "nplap/pointcalc.hpp"

namespace nplap {

inline PointState point_state(const Vec2& g, const Sym2& H, double eps)
{
    Vec gv(2);
    gv << g[0], g[1];
    Mat hm(2, 2);
    hm << H.xx, H.xy, H.xy, H.yy;
    return PointState(std::move(gv), hm, eps);
}

/// Nodewise (|Du|^2+eps)^(gamma/2) Δ^N_{p,eps} u from finite-difference derivatives.
inline ScalarField weighted_operator_field(const Derivatives& d, double p, double gamma, double eps)
{
    ScalarField out(d.grad.grid);
    for (std::size_t k : d.grad.grid->active())
        out[k] = operator_values(point_state(d.grad[k], d.hess[k], eps), p, gamma).weighted_operator;
    return out;
}

/// Nodewise Δ^N_{p,eps} u (unweighted).
inline ScalarField normalized_operator_field(const Derivatives& d, double p, double eps)
{
    ScalarField out(d.grad.grid);
    for (std::size_t k : d.grad.grid->active())
        out[k] = operator_values(point_state(d.grad[k], d.hess[k], eps), p, 0.0).normalized_p_eps;
    return out;
}

/// V = (|Du|^2+eps)^(gamma/2) Du.
inline VectorField flux_field(const VectorField& du, double gamma, double eps)
{
    VectorField v(du.grid);
    for (std::size_t k : du.grid->active()) {
        const double w = std::pow(du[k][0] * du[k][0] + du[k][1] * du[k][1] + eps, 0.5 * gamma);
        v[k] = {w * du[k][0], w * du[k][1]};
    }
    return v;
}

/// L^2 norm of the (non-symmetric) Jacobian of a vector field, by componentwise
/// finite differences.
inline double jacobian_l2(const VectorField& v)
{
    const Grid2D& g = *v.grid;
    double s = 0.0;
    for (std::size_t k : g.active()) {
        const int i = g.col(k), j = g.row(k);
        double fro = 0.0;
        for (int c = 0; c < 2; ++c) {
            auto get = [&](int a, int b) { return v[g.index(a, b)][static_cast<std::size_t>(c)]; };
            const double dx = detail::first_derivative(g, i, j, 1, 0, get);
            const double dy = detail::first_derivative(g, i, j, 0, 1, get);
            fro += dx * dx + dy * dy;
        }
        s += g.weight(k) * fro;
    }
    return std::sqrt(s);
}

struct GradientNorms {
    double grad_q0_term = 0.0; ///< ||Du||_{L^q0}^(gamma+1)
    double sobolev_term = 0.0; ///< ||D[(|Du|^2+eps)^(gamma/2) Du]||_{L^2}
    double rhs_op_term = 0.0;  ///< ||(|Du|^2+eps)^(gamma/2) Δ^N_{p,eps} u||_{L^2}
    double eps_term = 0.0;     ///< eps^((gamma+1)/2)
    double q0 = 0.0;
};

/// q0 = (1+gamma) 2* for the planar problem.
inline double planar_q0(double p, double gamma, std::optional<double> fallback = std::nullopt)
{
    return (1.0 + gamma) * two_star(2, fallback.value_or(default_two_star_fallback(p, gamma)));
}

inline GradientNorms nonlinear_gradient_norms(const ScalarField& u, double p, double gamma, double eps,
                                              std::optional<double> two_star_fallback = std::nullopt)
{
    NPLAP_REQUIRE(gamma > -1.0, "nonlinear_gradient_norms: gamma must exceed -1");
    NPLAP_REQUIRE(eps > 0.0, "nonlinear_gradient_norms: eps must be positive");
    const auto d = differentiate(u);
    GradientNorms out;
    out.q0 = planar_q0(p, gamma, two_star_fallback);
    out.grad_q0_term = std::pow(norm(d.grad, out.q0), gamma + 1.0);
    out.sobolev_term = jacobian_l2(flux_field(d.grad, gamma, eps));
    out.rhs_op_term = norm(weighted_operator_field(d, p, gamma, eps), 2.0);
    out.eps_term = std::pow(eps, 0.5 * (gamma + 1.0));
    return out;
}

} // namespace nplap
