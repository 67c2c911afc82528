#pragma once

// Subcommand execution. Each subcommand writes only under <out>/<subcommand>/
// and returns 0 iff every pass flag it produced is true.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "nplap/config.hpp"
#include "nplap/counterexample.hpp"
#include "nplap/harness.hpp"
#include "nplap/point_suite.hpp"
#include "nplap/solver.hpp"

namespace nplap {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<double> h;
};

/// Flags win over config scalars. Re-checks the overridden values.
inline void apply_overrides(RunConfig& cfg, const Overrides& ov)
{
    std::vector<std::string> errs;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.threads) {
        if (*ov.threads < 1) errs.emplace_back("--threads: must be >= 1");
        cfg.threads = *ov.threads;
    }
    if (ov.out) {
        if (ov.out->empty()) errs.emplace_back("--out: must not be empty");
        cfg.out = *ov.out;
    }
    if (ov.h) {
        if (!(*ov.h > 0.0)) errs.emplace_back("--h: must be positive");
        cfg.h = *ov.h;
        cfg.sweep.h_values = {*ov.h};
    }
    if (!errs.empty()) throw ConfigError(errs);
}

namespace detail {

using nlohmann::json;

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline std::filesystem::path prepare_dir(const RunConfig& cfg, const std::string& sub)
{
    std::filesystem::path dir = std::filesystem::path(cfg.out) / sub;
    std::filesystem::create_directories(dir);
    std::filesystem::remove(dir / "failure.json");
    return dir;
}

inline int finish(const std::filesystem::path& dir, const std::string& sub, const json& failures, std::ostream& log)
{
    if (failures.empty()) {
        log << sub << ": pass\n";
        return kExitPass;
    }
    json summary{{"status", "fail"}, {"subcommand", sub}, {"failures", failures}};
    write_text(dir / "failure.json", summary.dump(2) + "\n");
    log << summary.dump() << "\n";
    return kExitFail;
}

inline json report_json(const EstimateReport& r)
{
    json lhs = json::object(), rhs = json::object();
    for (const auto& c : r.lhs) lhs[c.name] = c.value;
    for (const auto& c : r.rhs) rhs[c.name] = c.value;
    return json{{"estimate", r.id}, {"p", r.p},     {"gamma", r.gamma}, {"eps", r.eps},     {"beta", r.beta},
                {"h", r.h},         {"domain", r.domain}, {"function", r.function}, {"lhs", lhs}, {"rhs", rhs},
                {"ratio", std::isfinite(r.ratio) ? json(r.ratio) : json(nullptr)}, {"pass", r.pass},
                {"note", r.note}};
}

inline int run_check_point(const RunConfig& cfg, std::ostream& log)
{
    const auto dir = prepare_dir(cfg, "check-point");
    SuiteOptions opt;
    opt.samples = cfg.check_point.samples;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.tolerance = cfg.check_point.tolerance;
    opt.include_structural = cfg.check_point.include_structural;
    opt.eta = cfg.check_point.eta;
    opt.c_p = cfg.check_point.c_p;
    const auto results = run_point_suites(opt);

    std::ostringstream csv;
    csv << "suite,samples,skipped,violations,worst_ratio,worst_n,worst_p,worst_gamma,worst_eps\n";
    json failures = json::array();
    for (const auto& r : results) {
        csv << r.name << ',' << r.samples << ',' << r.skipped << ',' << r.violations << ','
            << format_real(r.worst_ratio) << ',' << r.worst_n << ',' << format_real(r.worst_p) << ','
            << format_real(r.worst_gamma) << ',' << format_real(r.worst_eps) << '\n';
        if (r.violations > 0)
            failures.push_back({{"suite", r.name}, {"violations", r.violations}, {"worst_ratio", r.worst_ratio}});
    }
    write_text(dir / "worst_gaps.csv", csv.str());
    return finish(dir, "check-point", failures, log);
}

inline int run_solve(const RunConfig& cfg, std::ostream& log)
{
    const auto dir = prepare_dir(cfg, "solve");
    NPLAP_REQUIRE(cfg.params.n == 2, "solve: the grid solver is planar; params.n must be 2");
    ScalarField f;
    if (cfg.solve.source_dump) {
        std::ifstream is(*cfg.solve.source_dump);
        if (!is) throw InvalidArgument("solve: cannot open source dump " + *cfg.solve.source_dump);
        f = read_dump(is);
    } else {
        f = source_field(cfg.solve.source, build_grid(cfg.domain, cfg.h));
    }
    SolveConfig sc = cfg.solver;
    sc.params = cfg.params;
    sc.eps_schedule = cfg.eps_schedule;
    const auto res = continuation_solve(sc, f);
    const auto& last = res.stages.back();

    std::ostringstream dump;
    write_dump(dump, last.u);
    write_text(dir / "solution.dump", dump.str());

    json failures = json::array();
    json stages = json::array();
    for (const auto& st : res.stages) {
        stages.push_back({{"eps", st.eps_used},
                          {"iterations", st.iterations},
                          {"converged", st.converged},
                          {"final_update", st.final_update},
                          {"residual_history", st.residual_history}});
        if (!st.converged) failures.push_back({{"stage_eps", st.eps_used}, {"reason", "Picard did not converge"}});
    }
    json diag{{"iterations", last.iterations},
              {"residual_history", last.residual_history},
              {"converged", last.converged},
              {"eps", last.eps_used},
              {"h", last.u.grid->h()},
              {"domain", last.u.grid->spec().name()},
              {"stages", stages},
              {"flux_diff", res.diagnostics.flux_diff},
              {"grad_diff", res.diagnostics.grad_diff}};
    const auto study = convergence_study(res.diagnostics);
    diag["cauchy_monotone"] = study.pass;
    diag["cauchy_message"] = study.message;
    if (cfg.params.lambda == 0.0) {
        json checks = json::array();
        for (const auto& st : res.stages) {
            auto b = check_barrier(st.u, st.data, cfg.params.gamma);
            b.p = cfg.params.p;
            b.eps = st.eps_used;
            b.function = cfg.solve.source_dump ? "dump" : cfg.solve.source;
            checks.push_back(report_json(b));
            if (!b.pass) failures.push_back({{"stage_eps", st.eps_used}, {"reason", "barrier bound violated"}});
            if (st.converged) {
                auto r = check_solution_estimate(st, st.data, cfg.params.p, cfg.params.gamma, 0.0,
                                                 cfg.params.two_star_fallback);
                r.function = b.function;
                checks.push_back(report_json(r));
            }
        }
        diag["estimates"] = checks;
    }
    write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
    return finish(dir, "solve", failures, log);
}

inline SweepSpec sweep_spec(const RunConfig& cfg)
{
    SweepSpec s;
    s.domains = cfg.sweep.domains;
    s.h_values = cfg.sweep.h_values;
    for (double p : cfg.sweep.p_values)
        for (double g : cfg.sweep.gamma_values) s.params.push_back({p, g});
    s.functions = cfg.sweep.functions;
    s.estimates = cfg.sweep.estimates;
    s.eps_schedule = cfg.eps_schedule;
    s.betas = cfg.sweep.betas;
    s.two_star_fallback = cfg.params.two_star_fallback;
    s.holder = HolderOptions{cfg.holder.local_radius, cfg.holder.pair_budget, cfg.seed};
    s.solve = cfg.solver;
    s.threads = cfg.threads;
    return s;
}

inline json sweep_summary(const std::vector<EstimateReport>& rows, json& failures)
{
    std::map<std::string, json> by;
    for (const auto& r : rows) {
        auto& e = by[r.id];
        if (e.is_null()) e = json{{"rows", 0}, {"failures", 0}, {"max_ratio", nullptr}, {"min_ratio", nullptr}};
        e["rows"] = e["rows"].get<int>() + 1;
        if (!r.pass) {
            e["failures"] = e["failures"].get<int>() + 1;
            failures.push_back(report_json(r));
        }
        if (std::isfinite(r.ratio)) {
            if (e["max_ratio"].is_null() || r.ratio > e["max_ratio"].get<double>()) e["max_ratio"] = r.ratio;
            if (e["min_ratio"].is_null() || r.ratio < e["min_ratio"].get<double>()) e["min_ratio"] = r.ratio;
        }
    }
    json out{{"rows", rows.size()}, {"failures", failures.size()}, {"by_estimate", json::object()}};
    for (auto& [k, v] : by) out["by_estimate"][k] = v;
    return out;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& log)
{
    const auto dir = prepare_dir(cfg, "sweep");
    const auto rows = sweep(sweep_spec(cfg));
    write_text(dir / "sweep.csv", to_csv(rows));
    json failures = json::array();
    const json summary = sweep_summary(rows, failures);
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    return finish(dir, "sweep", failures, log);
}

inline int run_counterexample(const RunConfig& cfg, std::ostream& log)
{
    const auto dir = prepare_dir(cfg, "counterexample");
    const auto& c = cfg.counterexample;
    const auto rep = blowup_report(c.n, c.p, c.gamma, c.eps);
    write_text(dir / "blowup.csv", blowup_csv(rep));
    json summary{{"n", rep.n},
                 {"p", rep.p},
                 {"gamma", rep.gamma},
                 {"critical", rep.critical},
                 {"fit_exponent", rep.fit_exponent},
                 {"expected_exponent", rep.expected_exponent},
                 {"l2_spread", std::isfinite(rep.l2_spread) ? json(rep.l2_spread) : json(nullptr)},
                 {"sup_increasing", rep.sup_increasing},
                 {"fit_ok", rep.fit_ok},
                 {"l2_ok", rep.l2_ok},
                 {"lower_bound_ok", rep.lower_bound_ok}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    json failures = json::array();
    for (const char* k : {"sup_increasing", "fit_ok", "l2_ok", "lower_bound_ok"})
        if (!summary[k].get<bool>()) failures.push_back({{"check", k}});
    return finish(dir, "counterexample", failures, log);
}

inline int run_holder(const RunConfig& cfg, std::ostream& log)
{
    const auto dir = prepare_dir(cfg, "holder");
    NPLAP_REQUIRE(cfg.params.n == 2, "holder: grid checks are planar; params.n must be 2");
    const auto grid = build_grid(cfg.domain, cfg.h);
    const auto u = manufactured_field(cfg.holder.function, grid);
    const auto table = classify(cfg.params);
    const HolderOptions hopt{cfg.holder.local_radius, cfg.holder.pair_budget, cfg.seed};
    Ball ball;
    if (cfg.holder.ball) {
        ball = *cfg.holder.ball;
    } else if (cfg.domain.shape == DomainSpec::Shape::Rectangle) {
        ball = {0.5 * cfg.domain.a, 0.5 * cfg.domain.b, 0.25 * std::min(cfg.domain.a, cfg.domain.b)};
    } else {
        ball = {0.0, 0.0, 0.5 * cfg.domain.R};
    }

    std::vector<EstimateReport> rows;
    for (bool local : {false, true}) {
        if (!local && !table.supercritical) continue;
        const std::size_t begin = rows.size();
        for (double eps : cfg.eps_schedule) {
            auto r = check_holder(u, cfg.params.p, cfg.params.gamma, eps, table,
                                  local ? std::optional<Ball>(ball) : std::nullopt, hopt);
            r.function = cfg.holder.function;
            rows.push_back(std::move(r));
        }
        detail::apply_stability(rows, begin);
    }
    write_text(dir / "holder.csv", to_csv(rows));
    json failures = json::array();
    for (const auto& r : rows)
        if (!r.pass) failures.push_back(report_json(r));
    return finish(dir, "holder", failures, log);
}

} // namespace detail

/// Runs cfg.subcommand. Errors during a run produce a failure summary and exit 1.
inline int dispatch(const RunConfig& cfg, std::ostream& log = std::cerr)
{
    const std::string& sub = cfg.subcommand;
    try {
        if (sub == "check-point") return detail::run_check_point(cfg, log);
        if (sub == "solve") return detail::run_solve(cfg, log);
        if (sub == "sweep") return detail::run_sweep(cfg, log);
        if (sub == "counterexample") return detail::run_counterexample(cfg, log);
        if (sub == "holder") return detail::run_holder(cfg, log);
    } catch (const std::exception& e) {
        nlohmann::json summary{{"status", "error"}, {"subcommand", sub}, {"error", e.what()}};
        log << summary.dump() << "\n";
        return kExitFail;
    }
    nlohmann::json summary{{"status", "config_error"}, {"violations", {"subcommand: unknown \"" + sub + "\""}}};
    log << summary.dump() << "\n";
    return kExitConfig;
}

} // namespace nplap
