#pragma once

// JSON run configuration. Every object is checked against its key set; all
// violations are collected with their key paths before anything runs.

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nplap/counterexample.hpp"
#include "nplap/error.hpp"
#include "nplap/functions.hpp"
#include "nplap/grid.hpp"
#include "nplap/harness.hpp"
#include "nplap/params.hpp"
#include "nplap/point_suite.hpp"
#include "nplap/solver.hpp"

namespace nplap {

inline const std::vector<std::string>& subcommand_names()
{
    static const std::vector<std::string> names{"check-point", "solve", "sweep", "counterexample", "holder"};
    return names;
}

struct CheckPointConfig {
    long long samples = 100000;
    double tolerance = 1e-9;
    bool include_structural = true;
    double eta = 1.0;
    std::optional<double> c_p;
};

struct SolveSection {
    std::string source = "sinsin";
    std::optional<std::string> source_dump; ///< grid dump whose values are f; its grid replaces the domain
};

struct SweepSection {
    std::vector<DomainSpec> domains;
    std::vector<double> h_values;
    std::vector<double> p_values{2.0};
    std::vector<double> gamma_values{0.0};
    std::vector<std::string> functions{"sinsin"};
    std::vector<std::string> estimates{"apriori"};
    std::vector<double> betas{0.0};
};

struct CounterexampleSection {
    int n = 4;
    double p = 2.0;
    double gamma = 0.0;
    std::vector<double> eps = default_blowup_schedule();
};

struct HolderSection {
    std::string function = "sinsin";
    std::optional<Ball> ball;
    int local_radius = 4;
    int pair_budget = 20000;
};

struct RunConfig {
    std::string subcommand;
    std::uint64_t seed = 42;
    int threads = 1;
    std::string out = "out";
    double h = 1.0 / 64;
    DomainSpec domain = DomainSpec::unit_square();
    ProblemParams params;
    std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
    SolveConfig solver; ///< only the iteration controls; params and schedule come from above
    CheckPointConfig check_point;
    SolveSection solve;
    SweepSection sweep;
    CounterexampleSection counterexample;
    HolderSection holder;
};

namespace detail {

using nlohmann::json;

class ConfigReader {
public:
    std::vector<std::string> errors;

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
    {
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!ok.count(it.key())) errors.push_back(join(path, it.key()) + ": unknown key \"" + it.key() + "\"");
    }

    bool object(const json& j, const std::string& path)
    {
        if (j.is_object()) return true;
        errors.push_back(path + ": expected an object");
        return false;
    }

    template <class T>
    void read(const json& obj, const std::string& path, const char* key, T& dst)
    {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        const std::string where = join(path, key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return fail(where, "expected a boolean");
            dst = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) return fail(where, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned() || v.get<long long>() >= 0)
                    dst = v.get<T>();
                else
                    fail(where, "must be nonnegative");
            } else {
                dst = v.get<T>();
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) return fail(where, "expected a number");
            dst = v.get<double>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) return fail(where, "expected a string");
            dst = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
            if (!v.is_number()) return fail(where, "expected a number");
            dst = v.get<double>();
        } else if constexpr (std::is_same_v<T, std::optional<std::string>>) {
            if (!v.is_string()) return fail(where, "expected a string");
            dst = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) return fail(where, "expected an array of numbers");
            std::vector<double> out;
            for (const auto& e : v) {
                if (!e.is_number()) return fail(where, "expected an array of numbers");
                out.push_back(e.get<double>());
            }
            dst = std::move(out);
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            if (!v.is_array()) return fail(where, "expected an array of strings");
            std::vector<std::string> out;
            for (const auto& e : v) {
                if (!e.is_string()) return fail(where, "expected an array of strings");
                out.push_back(e.get<std::string>());
            }
            dst = std::move(out);
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    std::optional<DomainSpec> domain(const json& j, const std::string& path)
    {
        if (!object(j, path)) return std::nullopt;
        check_keys(j, path, {"shape", "a", "b", "R"});
        std::string shape = "rectangle";
        read(j, path, "shape", shape);
        DomainSpec d;
        if (shape == "rectangle" || shape == "unit_square") {
            d = DomainSpec::unit_square();
            read(j, path, "a", d.a);
            read(j, path, "b", d.b);
            if (j.contains("R")) fail(join(path, "R"), "not allowed for a rectangle");
            if (!(d.a > 0.0 && d.b > 0.0)) fail(path, "rectangle sides must be positive");
        } else if (shape == "disk") {
            d = DomainSpec::disk(1.0);
            read(j, path, "R", d.R);
            if (j.contains("a") || j.contains("b")) fail(path, "a and b are not allowed for a disk");
            if (!(d.R > 0.0)) fail(join(path, "R"), "disk radius must be positive");
        } else {
            fail(join(path, "shape"), "must be \"rectangle\", \"unit_square\" or \"disk\"");
            return std::nullopt;
        }
        return d;
    }

    void fail(const std::string& where, const std::string& what) { errors.push_back(where + ": " + what); }

    static std::string join(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }
};

inline void check_schedule(ConfigReader& rd, const std::string& path, const std::vector<double>& s, double hi,
                           bool hi_inclusive)
{
    if (s.empty()) rd.fail(path, "must not be empty");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool in = s[i] > 0.0 && (hi_inclusive ? s[i] <= hi : s[i] < hi);
        if (!in) rd.fail(path + "[" + std::to_string(i) + "]", "eps must lie in (0," + format_real(hi) + (hi_inclusive ? "]" : ")"));
        if (i > 0 && !(s[i] < s[i - 1])) rd.fail(path, "must be strictly decreasing");
    }
}

template <class Names>
void check_names(ConfigReader& rd, const std::string& path, const std::vector<std::string>& names, const Names& allowed,
                 const char* kind)
{
    if (names.empty()) rd.fail(path, "must not be empty");
    for (std::size_t i = 0; i < names.size(); ++i)
        if (!allowed(names[i])) rd.fail(path + "[" + std::to_string(i) + "]", "unknown " + std::string(kind) + " \"" + names[i] + "\"");
}

inline bool is_manufactured_name(std::string_view s)
{
    const auto& v = manufactured_names();
    return std::find(v.begin(), v.end(), s) != v.end();
}

} // namespace detail

/// Parses and validates a JSON configuration. Throws ConfigError listing every violation.
inline RunConfig parse_config(const std::string& text)
{
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }
    detail::ConfigReader rd;
    RunConfig cfg;
    if (!rd.object(root, "<root>")) throw ConfigError(rd.errors);

    rd.check_keys(root, "", {"subcommand", "seed", "threads", "out", "h", "domain", "params", "eps_schedule", "solver",
                             "check_point", "solve", "sweep", "counterexample", "holder"});
    rd.read(root, "", "subcommand", cfg.subcommand);
    rd.read(root, "", "seed", cfg.seed);
    rd.read(root, "", "threads", cfg.threads);
    rd.read(root, "", "out", cfg.out);
    rd.read(root, "", "h", cfg.h);
    rd.read(root, "", "eps_schedule", cfg.eps_schedule);
    if (root.contains("domain"))
        if (auto d = rd.domain(root.at("domain"), "domain")) cfg.domain = *d;

    if (root.contains("params") && rd.object(root.at("params"), "params")) {
        const json& j = root.at("params");
        rd.check_keys(j, "params", {"n", "p", "gamma", "eps", "lambda", "two_star_fallback"});
        rd.read(j, "params", "n", cfg.params.n);
        rd.read(j, "params", "p", cfg.params.p);
        rd.read(j, "params", "gamma", cfg.params.gamma);
        rd.read(j, "params", "eps", cfg.params.eps);
        rd.read(j, "params", "lambda", cfg.params.lambda);
        rd.read(j, "params", "two_star_fallback", cfg.params.two_star_fallback);
    }
    if (root.contains("solver") && rd.object(root.at("solver"), "solver")) {
        const json& j = root.at("solver");
        rd.check_keys(j, "solver", {"max_picard", "picard_tol", "damping", "damping_floor", "linear_tol", "mollify_data"});
        rd.read(j, "solver", "max_picard", cfg.solver.max_picard);
        rd.read(j, "solver", "picard_tol", cfg.solver.picard_tol);
        rd.read(j, "solver", "damping", cfg.solver.damping);
        rd.read(j, "solver", "damping_floor", cfg.solver.damping_floor);
        rd.read(j, "solver", "linear_tol", cfg.solver.linear_tol);
        rd.read(j, "solver", "mollify_data", cfg.solver.mollify_data);
    }
    if (root.contains("check_point") && rd.object(root.at("check_point"), "check_point")) {
        const json& j = root.at("check_point");
        rd.check_keys(j, "check_point", {"samples", "tolerance", "include_structural", "eta", "c_p"});
        rd.read(j, "check_point", "samples", cfg.check_point.samples);
        rd.read(j, "check_point", "tolerance", cfg.check_point.tolerance);
        rd.read(j, "check_point", "include_structural", cfg.check_point.include_structural);
        rd.read(j, "check_point", "eta", cfg.check_point.eta);
        rd.read(j, "check_point", "c_p", cfg.check_point.c_p);
    }
    if (root.contains("solve") && rd.object(root.at("solve"), "solve")) {
        const json& j = root.at("solve");
        rd.check_keys(j, "solve", {"source", "source_dump"});
        rd.read(j, "solve", "source", cfg.solve.source);
        rd.read(j, "solve", "source_dump", cfg.solve.source_dump);
    }
    if (root.contains("sweep") && rd.object(root.at("sweep"), "sweep")) {
        const json& j = root.at("sweep");
        rd.check_keys(j, "sweep", {"domains", "h_values", "p", "gamma", "functions", "estimates", "beta"});
        if (j.contains("domains")) {
            if (!j.at("domains").is_array()) {
                rd.fail("sweep.domains", "expected an array of domain objects");
            } else {
                for (std::size_t i = 0; i < j.at("domains").size(); ++i)
                    if (auto d = rd.domain(j.at("domains")[i], "sweep.domains[" + std::to_string(i) + "]"))
                        cfg.sweep.domains.push_back(*d);
            }
        }
        rd.read(j, "sweep", "h_values", cfg.sweep.h_values);
        rd.read(j, "sweep", "p", cfg.sweep.p_values);
        rd.read(j, "sweep", "gamma", cfg.sweep.gamma_values);
        rd.read(j, "sweep", "functions", cfg.sweep.functions);
        rd.read(j, "sweep", "estimates", cfg.sweep.estimates);
        rd.read(j, "sweep", "beta", cfg.sweep.betas);
    }
    if (root.contains("counterexample") && rd.object(root.at("counterexample"), "counterexample")) {
        const json& j = root.at("counterexample");
        rd.check_keys(j, "counterexample", {"n", "p", "gamma", "eps"});
        rd.read(j, "counterexample", "n", cfg.counterexample.n);
        rd.read(j, "counterexample", "p", cfg.counterexample.p);
        rd.read(j, "counterexample", "gamma", cfg.counterexample.gamma);
        rd.read(j, "counterexample", "eps", cfg.counterexample.eps);
    }
    if (root.contains("holder") && rd.object(root.at("holder"), "holder")) {
        const json& j = root.at("holder");
        rd.check_keys(j, "holder", {"function", "ball", "local_radius", "pair_budget"});
        rd.read(j, "holder", "function", cfg.holder.function);
        rd.read(j, "holder", "local_radius", cfg.holder.local_radius);
        rd.read(j, "holder", "pair_budget", cfg.holder.pair_budget);
        if (j.contains("ball") && rd.object(j.at("ball"), "holder.ball")) {
            const json& b = j.at("ball");
            rd.check_keys(b, "holder.ball", {"cx", "cy", "r"});
            Ball ball;
            rd.read(b, "holder.ball", "cx", ball.cx);
            rd.read(b, "holder.ball", "cy", ball.cy);
            rd.read(b, "holder.ball", "r", ball.r);
            if (!(ball.r > 0.0)) rd.fail("holder.ball.r", "must be positive");
            cfg.holder.ball = ball;
        }
    }
    if (cfg.sweep.domains.empty()) cfg.sweep.domains = {cfg.domain};
    if (cfg.sweep.h_values.empty()) cfg.sweep.h_values = {cfg.h};

    // semantic checks
    if (!cfg.subcommand.empty() &&
        std::find(subcommand_names().begin(), subcommand_names().end(), cfg.subcommand) == subcommand_names().end())
        rd.fail("subcommand", "unknown subcommand \"" + cfg.subcommand + "\"");
    if (cfg.threads < 1) rd.fail("threads", "must be >= 1");
    if (!(cfg.h > 0.0)) rd.fail("h", "must be positive");
    if (cfg.out.empty()) rd.fail("out", "must not be empty");
    for (const auto& v : violations(cfg.params)) rd.fail("params", v);
    detail::check_schedule(rd, "eps_schedule", cfg.eps_schedule, 1.0, true);

    const auto& s = cfg.solver;
    if (s.max_picard < 1) rd.fail("solver.max_picard", "must be >= 1");
    if (!(s.picard_tol > 0.0)) rd.fail("solver.picard_tol", "must be positive");
    if (!(s.damping > 0.0 && s.damping <= 1.0)) rd.fail("solver.damping", "must lie in (0,1]");
    if (!(s.damping_floor > 0.0 && s.damping_floor <= s.damping)) rd.fail("solver.damping_floor", "must lie in (0,damping]");
    if (!(s.linear_tol > 0.0)) rd.fail("solver.linear_tol", "must be positive");

    if (cfg.check_point.samples < 1) rd.fail("check_point.samples", "must be >= 1");
    if (!(cfg.check_point.tolerance >= 0.0)) rd.fail("check_point.tolerance", "must be nonnegative");
    if (!(cfg.check_point.eta > 0.0)) rd.fail("check_point.eta", "must be positive");
    if (cfg.check_point.c_p && !(*cfg.check_point.c_p > 0.0)) rd.fail("check_point.c_p", "must be positive");

    if (!cfg.solve.source_dump && !is_source_name(cfg.solve.source))
        rd.fail("solve.source", "unknown source \"" + cfg.solve.source + "\"");

    for (std::size_t i = 0; i < cfg.sweep.h_values.size(); ++i)
        if (!(cfg.sweep.h_values[i] > 0.0)) rd.fail("sweep.h_values[" + std::to_string(i) + "]", "must be positive");
    if (cfg.sweep.p_values.empty()) rd.fail("sweep.p", "must not be empty");
    for (std::size_t i = 0; i < cfg.sweep.p_values.size(); ++i)
        if (!(cfg.sweep.p_values[i] > 1.0)) rd.fail("sweep.p[" + std::to_string(i) + "]", "p must exceed 1");
    if (cfg.sweep.gamma_values.empty()) rd.fail("sweep.gamma", "must not be empty");
    for (std::size_t i = 0; i < cfg.sweep.gamma_values.size(); ++i)
        if (!(cfg.sweep.gamma_values[i] > -1.0)) rd.fail("sweep.gamma[" + std::to_string(i) + "]", "gamma must exceed -1");
    if (cfg.sweep.betas.empty()) rd.fail("sweep.beta", "must not be empty");
    for (std::size_t i = 0; i < cfg.sweep.betas.size(); ++i)
        if (!(cfg.sweep.betas[i] >= 0.0)) rd.fail("sweep.beta[" + std::to_string(i) + "]", "beta must be >= 0");
    detail::check_names(rd, "sweep.functions", cfg.sweep.functions,
                        [](const std::string& s) { return detail::is_manufactured_name(s) || is_source_name(s); },
                        "function");
    detail::check_names(rd, "sweep.estimates", cfg.sweep.estimates,
                        [](const std::string& s) { return is_estimate_name(s); }, "estimate");

    const auto& ce = cfg.counterexample;
    if (ce.n < 3) rd.fail("counterexample.n", "must be >= 3");
    if (!(ce.p > 1.0)) rd.fail("counterexample.p", "p must exceed 1");
    if (!(ce.gamma > -1.0)) rd.fail("counterexample.gamma", "gamma must exceed -1");
    if (ce.eps.size() < 2) rd.fail("counterexample.eps", "needs at least two values");
    detail::check_schedule(rd, "counterexample.eps", ce.eps, 0.5, false);

    if (!detail::is_manufactured_name(cfg.holder.function))
        rd.fail("holder.function", "unknown manufactured function \"" + cfg.holder.function + "\"");
    if (cfg.holder.local_radius < 1) rd.fail("holder.local_radius", "must be >= 1");
    if (cfg.holder.pair_budget < 0) rd.fail("holder.pair_budget", "must be >= 0");

    if (!rd.errors.empty()) throw ConfigError(rd.errors);
    return cfg;
}

} // namespace nplap
