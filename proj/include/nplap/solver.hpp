#pragma once

// Frozen-coefficient (Picard) solver for the damped, regularized Dirichlet
// problem
//
//     -(|Du|^2+eps)^(gamma/2) Δ^N_{p,eps} u + lambda u = lambda g + f  in Ω,
//      u = 0 on ∂Ω,
//
// discretized in nondivergence form, plus the eps-continuation that walks a
// decreasing schedule with warm starts and mollified data.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nplap/error.hpp"
#include "nplap/grid.hpp"
#include "nplap/nonlinear_norms.hpp"
#include "nplap/params.hpp"
#include "nplap/pointcalc.hpp"

namespace nplap {

struct SolveConfig {
    ProblemParams params;
    int max_picard = 200;
    double picard_tol = 1e-9;
    double damping = 1.0;
    double damping_floor = 1.0 / 16.0;
    double linear_tol = 1e-10;
    std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
    /// Mollify f with radius max(2h, sqrt(eps)) at each continuation stage.
    bool mollify_data = true;

    void validate() const
    {
        nplap::validate(params);
        NPLAP_REQUIRE(max_picard >= 1, "SolveConfig: max_picard must be >= 1");
        NPLAP_REQUIRE(picard_tol > 0.0, "SolveConfig: picard_tol must be positive");
        NPLAP_REQUIRE(damping > 0.0 && damping <= 1.0, "SolveConfig: damping must lie in (0,1]");
        NPLAP_REQUIRE(damping_floor > 0.0 && damping_floor <= damping, "SolveConfig: bad damping floor");
        NPLAP_REQUIRE(linear_tol > 0.0, "SolveConfig: linear_tol must be positive");
        for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
            NPLAP_REQUIRE(eps_schedule[i] > 0.0 && eps_schedule[i] <= 1.0, "SolveConfig: schedule values must lie in (0,1]");
            if (i > 0) NPLAP_REQUIRE(eps_schedule[i] < eps_schedule[i - 1], "SolveConfig: schedule must strictly decrease");
        }
    }
};

struct SolveResult {
    ScalarField u;
    int iterations = 0;
    std::vector<double> residual_history; ///< L^2 residual of each iterate, starting with the initial guess
    bool converged = false;
    double eps_used = 0.0;
    double final_update = 0.0;
    ScalarField data; ///< the right-hand side lambda g + f actually solved for
};

/// Gradients below this magnitude use the exact limit coefficient eps^(gamma/2) I.
inline constexpr double kGradientFloor = 1e-14;

struct LinearSystem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
};

namespace detail {

inline Sym2 frozen_coefficient(const Vec2& g, double p, double gamma, double eps)
{
    if (std::hypot(g[0], g[1]) < kGradientFloor) {
        const double s = std::pow(eps, 0.5 * gamma);
        return {s, 0.0, s};
    }
    const Mat A = coefficient_matrix(point_state(g, Sym2{}, eps), p, gamma);
    return {A(0, 0), 0.5 * (A(0, 1) + A(1, 0)), A(1, 1)};
}

} // namespace detail

/// Nondivergence discretization of -tr(A(Dw) D^2 u) + lambda u = rhs with
/// Dirichlet-zero rows on boundary and exterior nodes.
inline LinearSystem assemble_frozen(const ScalarField& w, const SolveConfig& cfg, const ScalarField& rhs, double eps)
{
    NPLAP_REQUIRE(w.grid == rhs.grid, "assemble_frozen: fields live on different grids");
    const Grid2D& g = *w.grid;
    const double p = cfg.params.p, gamma = cfg.params.gamma, lambda = cfg.params.lambda;
    const double ih2 = 1.0 / (g.h() * g.h());
    const auto grad = gradient(w);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 9);
    LinearSystem sys;
    sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));

    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        if (!g.interior(k)) {
            trip.emplace_back(row, row, 1.0);
            continue;
        }
        const Sym2 A = detail::frozen_coefficient(grad[k], p, gamma, eps);
        const int i = g.col(k), j = g.row(k);
        auto add = [&](int di, int dj, double c) {
            const auto nb = g.index(i + di, j + dj);
            if (g.interior(nb)) trip.emplace_back(row, static_cast<Eigen::Index>(nb), c);
        };
        trip.emplace_back(row, row, 2.0 * (A.xx + A.yy) * ih2 + lambda);
        add(1, 0, -A.xx * ih2);
        add(-1, 0, -A.xx * ih2);
        add(0, 1, -A.yy * ih2);
        add(0, -1, -A.yy * ih2);
        if (A.xy != 0.0) {
            const double c = 0.5 * A.xy * ih2;
            add(1, 1, -c);
            add(-1, -1, -c);
            add(1, -1, c);
            add(-1, 1, c);
        }
        sys.rhs[row] = rhs[k];
    }
    sys.matrix.resize(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

/// BiCGSTAB with Jacobi preconditioning, warm-started from `guess`.
inline Eigen::VectorXd solve_linear(const LinearSystem& sys, const Eigen::VectorXd& guess, double tol)
{
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setTolerance(tol);
    solver.setMaxIterations(static_cast<Eigen::Index>(10 * sys.matrix.rows()));
    solver.compute(sys.matrix);
    Eigen::VectorXd x = solver.solveWithGuess(sys.rhs, guess);
    const double bn = sys.rhs.norm();
    const double rel = bn > 0.0 ? (sys.rhs - sys.matrix * x).norm() / bn : (sys.matrix * x).norm();
    if (solver.info() != Eigen::Success && !(rel <= tol)) {
        throw SingularSystem("linear solve stalled: relative residual " + format_real(rel) + " after " +
                             std::to_string(solver.iterations()) + " iterations");
    }
    return x;
}

/// lambda g + f on in-domain nodes.
inline ScalarField combined_rhs(const SolveConfig& cfg, const ScalarField& f, const ScalarField* g_eps)
{
    ScalarField rhs = f;
    if (g_eps && cfg.params.lambda != 0.0) {
        NPLAP_REQUIRE(g_eps->grid == f.grid, "combined_rhs: g_eps lives on a different grid");
        for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += cfg.params.lambda * (*g_eps)[k];
    }
    return rhs;
}

/// Nodewise -(|Du|^2+eps)^(gamma/2) Δ^N_{p,eps} u + lambda u - rhs at interior
/// nodes, zero elsewhere. `rhs` already includes lambda g.
inline ScalarField residual_field(const ScalarField& u, const SolveConfig& cfg, const ScalarField& rhs, double eps)
{
    const Grid2D& g = *u.grid;
    const auto d = differentiate(u);
    ScalarField r(u.grid);
    for (std::size_t k : g.active()) {
        if (!g.interior(k)) continue;
        const double op = operator_values(point_state(d.grad[k], d.hess[k], eps), cfg.params.p, cfg.params.gamma)
                              .weighted_operator;
        r[k] = -op + cfg.params.lambda * u[k] - rhs[k];
    }
    return r;
}

inline ScalarField residual(const ScalarField& u, const SolveConfig& cfg, const ScalarField& f, double eps,
                            const ScalarField* g_eps = nullptr)
{
    return residual_field(u, cfg, combined_rhs(cfg, f, g_eps), eps);
}

namespace detail {

inline Eigen::VectorXd to_eigen(const ScalarField& u)
{
    return Eigen::Map<const Eigen::VectorXd>(u.values.data(), static_cast<Eigen::Index>(u.size()));
}

} // namespace detail

/// Damped fixed-point iteration u <- solve(assemble_frozen(u)). Returns the
/// last iterate with converged = false when the update tolerance is not met.
inline SolveResult picard_solve(const SolveConfig& cfg, const ScalarField& f, double eps,
                                const ScalarField* g_eps = nullptr, const ScalarField* initial = nullptr)
{
    cfg.validate();
    NPLAP_REQUIRE(eps > 0.0 && eps <= 1.0, "picard_solve: eps must lie in (0,1]");
    for (std::size_t k : f.grid->active())
        NPLAP_REQUIRE(std::isfinite(f[k]), "picard_solve: data must be finite");

    SolveResult res;
    res.eps_used = eps;
    res.data = combined_rhs(cfg, f, g_eps);
    res.u = initial ? *initial : ScalarField(f.grid);
    NPLAP_REQUIRE(res.u.grid == f.grid, "picard_solve: initial guess lives on a different grid");
    apply_dirichlet(res.u);

    double prev = norm(residual_field(res.u, cfg, res.data, eps), 2.0);
    res.residual_history.push_back(prev);
    double theta = cfg.damping;

    for (int it = 1; it <= cfg.max_picard; ++it) {
        const auto sys = assemble_frozen(res.u, cfg, res.data, eps);
        const Eigen::VectorXd cur = detail::to_eigen(res.u);
        const Eigen::VectorXd next = solve_linear(sys, cur, cfg.linear_tol);

        ScalarField cand(res.u.grid);
        auto blend = [&](double t) {
            for (std::size_t k = 0; k < cand.size(); ++k)
                cand[k] = cur[static_cast<Eigen::Index>(k)] + t * (next[static_cast<Eigen::Index>(k)] - cur[static_cast<Eigen::Index>(k)]);
        };
        blend(theta);
        double rn = norm(residual_field(cand, cfg, res.data, eps), 2.0);
        while (rn > prev && theta > cfg.damping_floor) {
            theta = std::max(0.5 * theta, cfg.damping_floor);
            blend(theta);
            rn = norm(residual_field(cand, cfg, res.data, eps), 2.0);
        }

        double diff = 0.0, base = 0.0;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            diff = std::max(diff, std::abs(cand[k] - res.u[k]));
            base = std::max(base, std::abs(res.u[k]));
        }
        res.u = std::move(cand);
        res.iterations = it;
        res.residual_history.push_back(rn);
        res.final_update = diff / (1.0 + base);
        prev = rn;
        if (res.final_update <= cfg.picard_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// d_j between consecutive continuation stages.
struct ConvergenceDiagnostics {
    std::vector<double> eps;
    std::vector<double> flux_diff; ///< ||V_{eps_j} - V_{eps_{j+1}}||_{L^2}, V = (|Du|^2+eps)^(gamma/2) Du
    std::vector<double> grad_diff; ///< ||Du^{eps_j} - Du^{eps_{j+1}}||_{L^{gamma+2}}
    std::vector<bool> stage_converged;
};

struct ContinuationResult {
    std::vector<SolveResult> stages;
    ConvergenceDiagnostics diagnostics;
};

inline double default_mollifier_radius(double h, double eps) { return std::max(2.0 * h, std::sqrt(eps)); }

/// Solves down cfg.eps_schedule, each stage warm-started from the previous
/// one. With lambda > 0 the previous stage's mollified solution plays g.
inline ContinuationResult continuation_solve(const SolveConfig& cfg, const ScalarField& f)
{
    cfg.validate();
    NPLAP_REQUIRE(!cfg.eps_schedule.empty(), "continuation_solve: empty eps schedule");
    const double h = f.grid->h();
    const double gamma = cfg.params.gamma;

    ContinuationResult out;
    std::optional<ScalarField> warm;
    std::optional<ScalarField> g_prev;
    std::vector<VectorField> fluxes, grads;
    for (double eps : cfg.eps_schedule) {
        const double radius = default_mollifier_radius(h, eps);
        const ScalarField data = cfg.mollify_data ? mollify(f, radius) : f;
        std::optional<ScalarField> g_eps;
        if (cfg.params.lambda > 0.0) g_eps = g_prev ? mollify(*g_prev, radius) : ScalarField(f.grid);
        auto stage = picard_solve(cfg, data, eps, g_eps ? &*g_eps : nullptr, warm ? &*warm : nullptr);
        const auto du = gradient(stage.u);
        fluxes.push_back(flux_field(du, gamma, eps));
        grads.push_back(du);
        warm = stage.u;
        g_prev = stage.u;
        out.diagnostics.eps.push_back(eps);
        out.diagnostics.stage_converged.push_back(stage.converged);
        out.stages.push_back(std::move(stage));
    }
    for (std::size_t j = 0; j + 1 < fluxes.size(); ++j) {
        VectorField dv(fluxes[j].grid), dg(grads[j].grid);
        for (std::size_t k = 0; k < dv.size(); ++k) {
            dv[k] = {fluxes[j][k][0] - fluxes[j + 1][k][0], fluxes[j][k][1] - fluxes[j + 1][k][1]};
            dg[k] = {grads[j][k][0] - grads[j + 1][k][0], grads[j][k][1] - grads[j + 1][k][1]};
        }
        out.diagnostics.flux_diff.push_back(norm(dv, 2.0));
        out.diagnostics.grad_diff.push_back(norm(dg, gamma + 2.0));
    }
    return out;
}

/// K = 1 + (2 d / (n-1) ||f||_inf)^(1/(gamma+1)); solutions obey ||u||_inf <= K d.
inline double barrier_constant(double diameter, int n, double f_sup, double gamma)
{
    return 1.0 + std::pow(2.0 * diameter / (n - 1) * f_sup, 1.0 / (gamma + 1.0));
}

} // namespace nplap
