#pragma once

// Both sides of each a priori estimate, evaluated on manufactured fields and on
// solver output. The estimates assert the existence of constants only, so each
// report carries the empirical ratio lhs/rhs; stability of that ratio across
// eps (and grids) is what gets checked.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nplap/functions.hpp"
#include "nplap/grid.hpp"
#include "nplap/nonlinear_norms.hpp"
#include "nplap/params.hpp"
#include "nplap/solver.hpp"

namespace nplap {

struct Component {
    std::string name;
    double value = 0.0;
};

struct EstimateReport {
    std::string id;
    int n = 2;
    double p = 2.0, gamma = 0.0, eps = 0.0, beta = 0.0, h = 0.0;
    std::string domain, function;
    std::vector<Component> lhs, rhs;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    std::string note;

    [[nodiscard]] double lhs_total() const
    {
        double s = 0.0;
        for (const auto& c : lhs) s += c.value;
        return s;
    }
    [[nodiscard]] double rhs_total() const
    {
        double s = 0.0;
        for (const auto& c : rhs) s += c.value;
        return s;
    }
};

/// Max over median of a set of ratios; "bounded uniformly" means <= 2.
inline double spread(std::vector<double> ratios)
{
    if (ratios.empty()) return 1.0;
    std::sort(ratios.begin(), ratios.end());
    const std::size_t m = ratios.size();
    const double median = m % 2 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
    if (median <= 0.0) return ratios.back() <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return ratios.back() / median;
}

inline constexpr double kStabilityFactor = 2.0;

inline bool stable(const std::vector<double>& ratios, double factor = kStabilityFactor)
{
    for (double r : ratios)
        if (!std::isfinite(r)) return false;
    return spread(ratios) <= factor;
}

namespace detail {

inline EstimateReport make_report(std::string id, const ScalarField& u, double p, double gamma, double eps, double beta)
{
    EstimateReport r;
    r.id = std::move(id);
    r.p = p;
    r.gamma = gamma;
    r.eps = eps;
    r.beta = beta;
    r.h = u.grid->h();
    r.domain = u.grid->spec().name();
    return r;
}

inline void finish(EstimateReport& r)
{
    const double den = r.rhs_total();
    r.ratio = den > 0.0 ? r.lhs_total() / den : (r.lhs_total() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.pass = std::isfinite(r.ratio) && r.ratio >= 0.0;
}

inline void require_admissible(double p, double gamma)
{
    NPLAP_REQUIRE(p > 1.0, "estimate: p must exceed 1");
    if (!is_admissible(2, p, gamma)) throw InvalidArgument("estimate: triplet (2,p,gamma) is not admissible");
}

} // namespace detail

/// ||D^2 u||_2 <= ||Δu||_2 on convex domains for zero-boundary u.
inline EstimateReport check_miranda_talenti(const ScalarField& u)
{
    auto r = detail::make_report("miranda_talenti", u, 2.0, 0.0, 0.0, 0.0);
    const auto d = differentiate(u);
    ScalarField lap(u.grid);
    for (std::size_t k : u.grid->active()) lap[k] = d.hess[k].trace();
    r.lhs = {{"hessian_l2", norm(d.hess, 2.0)}};
    r.rhs = {{"laplacian_l2", norm(lap, 2.0)}};
    if (r.rhs[0].value == 0.0) {
        r.ratio = std::numeric_limits<double>::quiet_NaN();
        r.pass = false;
        r.note = "undefined ratio: zero laplacian";
        return r;
    }
    r.ratio = r.lhs[0].value / r.rhs[0].value;
    r.pass = r.ratio <= 1.0 + 10.0 * r.h;
    return r;
}

/// Weighted second-order estimate. beta = 0: gradient/Sobolev terms against
/// the weighted operator plus eps term. beta > 0: squared weighted Hessian
/// against (1+beta^2) times the squared weighted operator, weight exponent
/// gamma + beta.
inline EstimateReport check_apriori(const ScalarField& v, double p, double gamma, double eps, double beta,
                                    std::optional<double> two_star_fallback = std::nullopt)
{
    detail::require_admissible(p, gamma);
    NPLAP_REQUIRE(beta >= 0.0, "check_apriori: beta must be >= 0");
    NPLAP_REQUIRE(eps > 0.0, "check_apriori: eps must be positive");
    auto r = detail::make_report("apriori", v, p, gamma, eps, beta);
    if (beta == 0.0) {
        const auto gn = nonlinear_gradient_norms(v, p, gamma, eps, two_star_fallback);
        r.lhs = {{"grad_q0", gn.grad_q0_term}, {"sobolev", gn.sobolev_term}};
        r.rhs = {{"weighted_op_l2", gn.rhs_op_term}, {"eps_term", gn.eps_term}};
    } else {
        const auto d = differentiate(v);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k : v.grid->active()) {
            const auto ov = operator_values(point_state(d.grad[k], d.hess[k], eps), p, 0.0);
            const double g2 = d.grad[k][0] * d.grad[k][0] + d.grad[k][1] * d.grad[k][1];
            const double w = std::pow(g2 + eps, gamma + beta);
            lhs += v.grid->weight(k) * d.hess[k].frobenius_sq() * w;
            rhs += v.grid->weight(k) * ov.normalized_p_eps * ov.normalized_p_eps * w;
        }
        r.lhs = {{"weighted_hessian_sq", lhs}};
        r.rhs = {{"weighted_op_sq_times_1_plus_beta_sq", (1.0 + beta * beta) * rhs}};
    }
    detail::finish(r);
    return r;
}

/// ||Dv||_{L^q0} against ||(|Dv|^2+eps)^(gamma/2) Δ^N_{p,eps} v||_2^(1/(gamma+1)) + sqrt(eps).
inline EstimateReport check_gradient_lq(const ScalarField& v, double p, double gamma, double eps,
                                        std::optional<double> two_star_fallback = std::nullopt)
{
    detail::require_admissible(p, gamma);
    auto r = detail::make_report("gradient_lq", v, p, gamma, eps, 0.0);
    const auto d = differentiate(v);
    const double q0 = planar_q0(p, gamma, two_star_fallback);
    r.lhs = {{"grad_lq0", norm(d.grad, q0)}};
    r.rhs = {{"weighted_op_root", std::pow(norm(weighted_operator_field(d, p, gamma, eps), 2.0), 1.0 / (gamma + 1.0))},
             {"sqrt_eps", std::sqrt(eps)}};
    detail::finish(r);
    return r;
}

/// ∫(|Dv|^2+eps)^((p-2)/2)|Dv| against ∫|div((|Dv|^2+eps)^((p-2)/2) Dv)|, the
/// divergence evaluated as (|Dv|^2+eps)^((p-2)/2) Δ^N_{p,eps} v.
inline EstimateReport check_l1(const ScalarField& v, double p, double eps)
{
    NPLAP_REQUIRE(p > 1.0, "check_l1: p must exceed 1");
    NPLAP_REQUIRE(eps > 0.0, "check_l1: eps must be positive");
    auto r = detail::make_report("l1", v, p, p - 2.0, eps, 0.0);
    const auto d = differentiate(v);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k : v.grid->active()) {
        const auto ov = operator_values(point_state(d.grad[k], d.hess[k], eps), p, p - 2.0);
        const double g = std::hypot(d.grad[k][0], d.grad[k][1]);
        lhs += v.grid->weight(k) * std::pow(g * g + eps, 0.5 * (p - 2.0)) * g;
        rhs += v.grid->weight(k) * std::abs(ov.weighted_operator);
    }
    r.lhs = {{"weighted_grad_l1", lhs}};
    r.rhs = {{"divergence_l1", rhs}};
    detail::finish(r);
    return r;
}

/// Solution estimate evaluated directly on a field u solving with data f at eps.
inline EstimateReport solution_estimate(const ScalarField& u, const ScalarField& f, double p, double gamma, double eps,
                                        std::optional<double> two_star_fallback = std::nullopt)
{
    detail::require_admissible(p, gamma);
    auto r = detail::make_report("solution", u, p, gamma, eps, 0.0);
    const auto du = gradient(u);
    const double q0 = planar_q0(p, gamma, two_star_fallback);
    r.lhs = {{"grad_q0", std::pow(norm(du, q0), gamma + 1.0)}, {"flux_sobolev", jacobian_l2(flux_field(du, gamma, eps))}};
    r.rhs = {{"f_l2", norm(f, 2.0)}};
    detail::finish(r);
    return r;
}

/// Gradient and flux-Sobolev norms of a converged, undamped (lambda = 0)
/// solution against ||f||_2, with f the data the solver actually used.
inline EstimateReport check_solution_estimate(const SolveResult& result, const ScalarField& f, double p, double gamma,
                                              double lambda = 0.0,
                                              std::optional<double> two_star_fallback = std::nullopt)
{
    NPLAP_REQUIRE(result.converged, "check_solution_estimate: unconverged solve result");
    NPLAP_REQUIRE(lambda == 0.0, "check_solution_estimate: requires lambda = 0");
    return solution_estimate(result.u, f, p, gamma, result.eps_used, two_star_fallback);
}

/// ||u||_inf against K d_Ω from the radial barrier.
inline EstimateReport check_barrier(const ScalarField& u, const ScalarField& f, double gamma, int n = 2)
{
    auto r = detail::make_report("barrier", u, 0.0, gamma, 0.0, 0.0);
    const double d = u.grid->spec().diameter();
    const double K = barrier_constant(d, n, norm(f, kInfinity), gamma);
    r.lhs = {{"u_sup", norm(u, kInfinity)}};
    r.rhs = {{"K_times_diameter", K * d}};
    r.ratio = r.lhs[0].value / r.rhs[0].value;
    r.pass = r.ratio <= 1.0;
    return r;
}

struct Ball {
    double cx = 0.5, cy = 0.5, r = 0.25;
};

/// Hölder norm with exponent alpha from the exponent table. Global form needs
/// a supercritical table; with `ball` set, the norm is taken over B_{r/2}
/// and the sup-norm of the weighted operator over B_r joins the right side.
inline EstimateReport check_holder(const ScalarField& v, double p, double gamma, double eps, const ExponentTable& table,
                                   std::optional<Ball> ball = std::nullopt, const HolderOptions& hopt = {})
{
    detail::require_admissible(p, gamma);
    if (!ball && !table.supercritical) throw InvalidArgument("check_holder: global check needs (1+gamma)2* > n");
    NPLAP_REQUIRE(table.holder_alpha.has_value(), "check_holder: exponent table has no Hölder exponent");
    const double alpha = *table.holder_alpha;
    auto r = detail::make_report(ball ? "holder_local" : "holder", v, p, gamma, eps, 0.0);
    const auto d = differentiate(v);
    const auto op = weighted_operator_field(d, p, gamma, eps);
    const double root = 1.0 / (gamma + 1.0);
    if (!ball) {
        r.lhs = {{"holder_norm", holder_norm(v, alpha, hopt)}};
        r.rhs = {{"weighted_op_root", std::pow(norm(op, 2.0), root)}, {"sqrt_eps", std::sqrt(eps)}};
    } else {
        const Grid2D& g = *v.grid;
        NPLAP_REQUIRE(ball->r > 0.0, "check_holder: ball radius must be positive");
        std::vector<bool> inner(g.size(), false);
        double op_sup = 0.0;
        for (std::size_t k : g.active()) {
            const double dist = std::hypot(g.x(g.col(k)) - ball->cx, g.y(g.row(k)) - ball->cy);
            if (dist <= 0.5 * ball->r) inner[k] = true;
            if (dist <= ball->r) op_sup = std::max(op_sup, std::abs(op[k]));
        }
        r.lhs = {{"holder_norm_half_ball", holder_norm(v, alpha, hopt, &inner)}};
        r.rhs = {{"weighted_op_ball_sup_root", std::pow(op_sup, root)},
                 {"weighted_op_root", std::pow(norm(op, 2.0), root)},
                 {"sqrt_eps", std::sqrt(eps)}};
    }
    detail::finish(r);
    return r;
}

struct StudyReport {
    bool pass = true;
    std::string message;
};

/// The continuation differences must shrink: d_{j+1} <= factor d_j for every
/// j, and d_last <= d_first. `floor` absorbs differences at rounding level.
inline StudyReport convergence_study(const std::vector<double>& d, double factor = 1.2, double floor = 1e-12)
{
    StudyReport out;
    if (d.size() < 2) {
        out.message = "vacuous: fewer than two differences";
        return out;
    }
    std::ostringstream msg;
    for (std::size_t j = 0; j + 1 < d.size(); ++j) {
        if (!(d[j + 1] <= factor * d[j] + floor)) {
            out.pass = false;
            msg << "d[" << j + 1 << "]=" << d[j + 1] << " exceeds " << factor << "*d[" << j << "]=" << factor * d[j]
                << "; ";
        }
    }
    if (!(d.back() <= d.front() + floor)) {
        out.pass = false;
        msg << "d_last=" << d.back() << " exceeds d_first=" << d.front() << "; ";
    }
    out.message = out.pass ? "monotone within tolerance" : msg.str();
    return out;
}

inline StudyReport convergence_study(const ConvergenceDiagnostics& diag, double factor = 1.2, double floor = 1e-12)
{
    return convergence_study(diag.flux_diff, factor, floor);
}

// ---------------------------------------------------------------------------
// Sweeps

inline const std::vector<std::string>& estimate_names()
{
    static const std::vector<std::string> names{"miranda_talenti", "apriori", "gradient_lq", "l1",
                                                "holder",          "holder_local", "solution", "barrier"};
    return names;
}

inline bool is_estimate_name(std::string_view s)
{
    const auto& v = estimate_names();
    return std::find(v.begin(), v.end(), s) != v.end();
}

struct ParamPoint {
    double p = 2.0;
    double gamma = 0.0;
};

struct SweepSpec {
    std::vector<DomainSpec> domains;
    std::vector<double> h_values{1.0 / 64};
    std::vector<ParamPoint> params;
    std::vector<std::string> functions;
    std::vector<std::string> estimates;
    std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> betas{0.0};
    std::optional<double> two_star_fallback;
    HolderOptions holder;
    SolveConfig solve; ///< solver settings for solution/barrier rows; params.p/gamma are overwritten
    int threads = 1;
};

inline constexpr int kCsvComponents = 3;

inline std::string csv_header()
{
    std::string h = "estimate_id,n,p,gamma,eps,beta,h,domain,function";
    for (int i = 1; i <= kCsvComponents; ++i) h += ",lhs_" + std::to_string(i);
    for (int i = 1; i <= kCsvComponents; ++i) h += ",rhs_" + std::to_string(i);
    h += ",ratio,pass";
    return h;
}

inline std::string csv_row(const EstimateReport& r)
{
    std::ostringstream os;
    os << r.id << ',' << r.n << ',' << format_real(r.p) << ',' << format_real(r.gamma) << ',' << format_real(r.eps)
       << ',' << format_real(r.beta) << ',' << format_real(r.h) << ',' << r.domain << ',' << r.function;
    for (const auto* side : {&r.lhs, &r.rhs})
        for (int i = 0; i < kCsvComponents; ++i) {
            os << ',';
            if (static_cast<std::size_t>(i) < side->size()) os << format_real((*side)[static_cast<std::size_t>(i)].value);
        }
    os << ',' << format_real(r.ratio) << ',' << (r.pass ? "true" : "false");
    return os.str();
}

inline std::string to_csv(const std::vector<EstimateReport>& rows)
{
    std::string out = csv_header() + "\n";
    for (const auto& r : rows) out += csv_row(r) + "\n";
    return out;
}

namespace detail {

struct SweepJob {
    DomainSpec domain;
    double h;
    ParamPoint param;
    std::string function;
};

inline EstimateReport failure_row(const std::string& id, const SweepJob& job, double eps, double beta,
                                  const std::string& why)
{
    EstimateReport r;
    r.id = id;
    r.p = job.param.p;
    r.gamma = job.param.gamma;
    r.eps = eps;
    r.beta = beta;
    r.h = job.h;
    r.domain = job.domain.name();
    r.function = job.function;
    r.pass = false;
    r.note = why;
    return r;
}

/// Marks every row of a group failed unless its ratios are stable.
inline void apply_stability(std::vector<EstimateReport>& rows, std::size_t begin)
{
    std::vector<double> ratios;
    for (std::size_t i = begin; i < rows.size(); ++i) ratios.push_back(rows[i].ratio);
    if (stable(ratios)) return;
    for (std::size_t i = begin; i < rows.size(); ++i) {
        rows[i].pass = false;
        rows[i].note = "ratio unstable across eps";
    }
}

inline std::vector<EstimateReport> run_job(const SweepJob& job, const SweepSpec& spec)
{
    std::vector<EstimateReport> rows;
    GridPtr grid;
    try {
        grid = build_grid(job.domain, job.h);
    } catch (const std::exception& e) {
        for (const auto& est : spec.estimates) rows.push_back(failure_row(est, job, 0.0, 0.0, e.what()));
        return rows;
    }
    const double p = job.param.p, gamma = job.param.gamma;
    const bool manufactured = std::find(manufactured_names().begin(), manufactured_names().end(), job.function) !=
                              manufactured_names().end();

    std::optional<ScalarField> field;
    if (manufactured) field = manufactured_field(job.function, grid);

    std::optional<ContinuationResult> solved;
    std::string solve_error;
    auto ensure_solved = [&]() {
        if (solved || !solve_error.empty()) return;
        try {
            if (!is_source_name(job.function)) throw InvalidArgument("not a source function: " + job.function);
            SolveConfig cfg = spec.solve;
            cfg.params.p = p;
            cfg.params.gamma = gamma;
            cfg.params.lambda = 0.0;
            cfg.params.two_star_fallback = spec.two_star_fallback;
            cfg.eps_schedule = spec.eps_schedule;
            solved = continuation_solve(cfg, source_field(job.function, grid));
        } catch (const std::exception& e) {
            solve_error = e.what();
        }
    };

    auto tag = [&](EstimateReport r) {
        r.function = job.function;
        r.domain = job.domain.name();
        r.p = p;
        r.gamma = gamma;
        return r;
    };

    for (const auto& est : spec.estimates) {
        const bool needs_field = est != "solution" && est != "barrier";
        if (needs_field && !field) {
            for (double eps : spec.eps_schedule)
                rows.push_back(failure_row(est, job, eps, 0.0, "not a manufactured function: " + job.function));
            continue;
        }
        if (est == "miranda_talenti") {
            auto r = tag(check_miranda_talenti(*field));
            r.eps = 0.0;
            rows.push_back(std::move(r));
            continue;
        }
        const std::vector<double> betas = est == "apriori" ? spec.betas : std::vector<double>{0.0};
        for (double beta : betas) {
            const std::size_t begin = rows.size();
            for (std::size_t s = 0; s < spec.eps_schedule.size(); ++s) {
                const double eps = spec.eps_schedule[s];
                try {
                    if (est == "apriori") {
                        rows.push_back(tag(check_apriori(*field, p, gamma, eps, beta, spec.two_star_fallback)));
                    } else if (est == "gradient_lq") {
                        rows.push_back(tag(check_gradient_lq(*field, p, gamma, eps, spec.two_star_fallback)));
                    } else if (est == "l1") {
                        rows.push_back(tag(check_l1(*field, p, eps)));
                    } else if (est == "holder" || est == "holder_local") {
                        ProblemParams prm;
                        prm.p = p;
                        prm.gamma = gamma;
                        prm.eps = std::min(eps, 1.0);
                        prm.two_star_fallback = spec.two_star_fallback;
                        const auto table = classify(prm);
                        std::optional<Ball> ball;
                        if (est == "holder_local") {
                            const bool rect = job.domain.shape == DomainSpec::Shape::Rectangle;
                            ball = rect ? Ball{0.5 * job.domain.a, 0.5 * job.domain.b,
                                               0.25 * std::min(job.domain.a, job.domain.b)}
                                        : Ball{0.0, 0.0, 0.5 * job.domain.R};
                        }
                        rows.push_back(tag(check_holder(*field, p, gamma, eps, table, ball, spec.holder)));
                    } else {
                        ensure_solved();
                        if (!solve_error.empty()) throw std::runtime_error(solve_error);
                        const auto& stage = solved->stages[s];
                        if (est == "solution") {
                            if (!stage.converged) throw std::runtime_error("stage did not converge");
                            rows.push_back(tag(check_solution_estimate(stage, stage.data, p, gamma, 0.0,
                                                                       spec.two_star_fallback)));
                        } else {
                            auto r = tag(check_barrier(stage.u, stage.data, gamma));
                            r.eps = eps;
                            rows.push_back(std::move(r));
                        }
                    }
                    rows.back().eps = eps;
                } catch (const std::exception& e) {
                    rows.push_back(failure_row(est, job, eps, beta, e.what()));
                }
            }
            if (est != "barrier") apply_stability(rows, begin);
        }
    }
    return rows;
}

} // namespace detail

/// Cartesian product domains x h x params x functions, each job evaluating every
/// requested estimate. Rows come back in job order regardless of threading.
inline std::vector<EstimateReport> sweep(const SweepSpec& spec)
{
    std::vector<detail::SweepJob> jobs;
    for (const auto& dom : spec.domains)
        for (double h : spec.h_values)
            for (const auto& prm : spec.params)
                for (const auto& fn : spec.functions) jobs.push_back({dom, h, prm, fn});

    std::vector<std::vector<EstimateReport>> results(jobs.size());
    const int threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(jobs.size())));
    if (threads <= 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) results[j] = detail::run_job(jobs[j], spec);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs.size(); j = next++) results[j] = detail::run_job(jobs[j], spec);
            });
    }

    std::vector<EstimateReport> rows;
    for (auto& r : results)
        for (auto& row : r) rows.push_back(std::move(row));
    return rows;
}

} // namespace nplap
