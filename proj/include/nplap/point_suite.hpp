#pragma once

// Randomized property suites over the pointwise inequalities. Samples are
// split into a fixed number of shards, each with its own seeded generator, so
// the outcome depends only on (samples, seed) and never on the thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "nplap/pointcalc.hpp"

namespace nplap {

struct SuiteResult {
    std::string name;
    long long samples = 0;
    long long skipped = 0;    ///< samples below the degenerate-gradient threshold
    long long violations = 0; ///< gap < -tolerance * scale
    double worst_ratio = std::numeric_limits<double>::infinity(); ///< min gap/scale
    // parameters of the worst sample
    int worst_n = 0;
    double worst_p = 0.0;
    double worst_gamma = 0.0;
    double worst_eps = 0.0;
};

struct SuiteOptions {
    long long samples = 100000;
    std::uint64_t seed = 42;
    int threads = 1;
    double tolerance = 1e-9;
    bool include_structural = true;
    double eta = 1.0;
    std::optional<double> c_p; ///< structural constant; default_c_p when empty
};

inline constexpr std::array<int, 3> kSuiteDims{2, 3, 5};
inline constexpr int kSuiteShards = 16;

namespace detail {

struct Sampler {
    explicit Sampler(std::uint64_t seed) : rng(seed) {}

    std::mt19937_64 rng;
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    std::normal_distribution<double> normal{0.0, 1.0};

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(rng); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int dim() { return kSuiteDims[static_cast<std::size_t>(rng() % kSuiteDims.size())]; }

    Vec gaussian_vec(int n, double scale)
    {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = scale * normal(rng);
        return v;
    }

    Mat symmetric(int n)
    {
        const double scale = log_uniform(1e-2, 1e2);
        Mat h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) h(i, j) = h(j, i) = scale * normal(rng);
        // occasionally rank-deficient, which is where equality cases live
        if (unit(rng) < 0.1) {
            const Vec u = gaussian_vec(n, 1.0);
            h = scale * u * u.transpose();
        }
        return h;
    }

    Vec gradient(int n)
    {
        Vec g = gaussian_vec(n, 1.0);
        const double nrm = g.norm();
        if (nrm == 0.0) g[0] = 1.0;
        return g * (log_uniform(1e-4, 1e3) / std::max(nrm, 1e-300));
    }

    /// gamma uniformly above the admissibility threshold.
    double admissible_gamma(int n, double p)
    {
        const double lo = std::max(-1.0, gamma_threshold(n, p));
        double u = unit(rng);
        if (u == 0.0) u = 0.5;
        return lo + 4.0 * u;
    }
};

struct Accumulator {
    SuiteResult r;
    double tol;

    void add(double gap, double scale, int n, double p, double gamma, double eps)
    {
        ++r.samples;
        const double s = std::max(scale, std::numeric_limits<double>::min());
        const double ratio = gap / s;
        if (gap < -tol * s) ++r.violations;
        if (ratio < r.worst_ratio) {
            r.worst_ratio = ratio;
            r.worst_n = n;
            r.worst_p = p;
            r.worst_gamma = gamma;
            r.worst_eps = eps;
        }
    }

    void merge(const Accumulator& o)
    {
        r.samples += o.r.samples;
        r.skipped += o.r.skipped;
        r.violations += o.r.violations;
        if (o.r.worst_ratio < r.worst_ratio) {
            r.worst_ratio = o.r.worst_ratio;
            r.worst_n = o.r.worst_n;
            r.worst_p = o.r.worst_p;
            r.worst_gamma = o.r.worst_gamma;
            r.worst_eps = o.r.worst_eps;
        }
    }
};

inline std::vector<std::string> suite_names(bool structural)
{
    std::vector<std::string> names{"fundamental", "t_gap", "hessian_bound", "mono_reg_neg",
                                   "mono_unreg_neg", "mono_reg_pos", "mono_unreg_pos"};
    if (structural) names.emplace_back("structural");
    return names;
}

inline std::vector<Accumulator> run_shard(long long count, std::uint64_t seed, const SuiteOptions& opt)
{
    const auto names = suite_names(opt.include_structural);
    std::vector<Accumulator> acc(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) acc[i] = Accumulator{SuiteResult{names[i]}, opt.tolerance};

    Sampler smp(seed);
    constexpr std::array<MonotonicityVariant, 4> variants{MonotonicityVariant::RegNeg, MonotonicityVariant::UnregNeg,
                                                          MonotonicityVariant::RegPos, MonotonicityVariant::UnregPos};

    for (long long k = 0; k < count; ++k) {
        const int n = smp.dim();
        const double p = smp.uniform(1.1, 10.0);
        const double gamma = smp.admissible_gamma(n, p);
        const double eps = smp.log_uniform(1e-6, 1.0);
        const PointState s(smp.gradient(n), smp.symmetric(n), eps);
        const double h2 = s.H().squaredNorm();

        if (std::sqrt(s.grad_sq()) <= kDegenerateGradient) {
            for (int i : {0, 1}) ++acc[static_cast<std::size_t>(i)].r.skipped;
        } else {
            acc[0].add(fundamental_gap(s), h2, n, p, gamma, eps);
            const double tscale = (1.0 + std::abs(gamma) + std::abs(p - 2.0)) * h2;
            acc[1].add(t_gap(s, p, gamma), tscale, n, p, gamma, eps);
        }
        acc[2].add(hessian_bound_gap(s, gamma), (1.0 + std::abs(gamma)) * (1.0 + std::abs(gamma)) * h2, n, p, gamma,
                   eps);

        for (std::size_t v = 0; v < variants.size(); ++v) {
            const bool neg = v < 2;
            const double gm = neg ? smp.uniform(-1.0, 0.0) : smp.uniform(0.0, 4.0);
            const double spread = smp.log_uniform(1e-3, 1.0);
            const Vec a = smp.gaussian_vec(n, 10.0 * spread).cwiseMax(-10.0).cwiseMin(10.0);
            const Vec b = smp.gaussian_vec(n, 10.0 * spread).cwiseMax(-10.0).cwiseMin(10.0);
            const double gm_safe = (neg && gm <= -1.0) ? -0.5 : gm;
            const auto sides = monotonicity_sides(a, b, gm_safe, eps, variants[v]);
            acc[3 + v].add(sides.lhs - sides.rhs, std::abs(sides.lhs) + std::abs(sides.rhs), n, p, gm_safe, eps);
        }

        if (opt.include_structural) {
            if (std::sqrt(s.grad_sq()) <= kDegenerateGradient) {
                ++acc[7].r.skipped;
            } else {
                const double cp = opt.c_p.value_or(default_c_p(p, n));
                const auto ov = operator_values(s, p, gamma);
                const double shift = gamma - p + 2.0;
                const double coef = 2.0 * (p - 1.0) * (gamma + 1.0 - (p - 1.0) * (n - 2) / (2.0 * (n - 1)));
                const double scale =
                    (1.0 + opt.eta + 2.0 * std::abs(gamma) + std::abs(gamma * gamma - shift * shift) + std::abs(coef)) *
                        h2 +
                    (cp / opt.eta) * ov.normalized_p_eps * ov.normalized_p_eps;
                acc[7].add(structural_gap(s, p, gamma, opt.eta, cp), scale, n, p, gamma, eps);
            }
        }
    }
    return acc;
}

} // namespace detail

/// Runs every pointwise property suite on opt.samples random samples each.
inline std::vector<SuiteResult> run_point_suites(const SuiteOptions& opt)
{
    NPLAP_REQUIRE(opt.samples >= 0, "run_point_suites: samples must be >= 0");
    std::vector<std::vector<detail::Accumulator>> shards(kSuiteShards);
    auto shard_count = [&](int s) {
        return opt.samples / kSuiteShards + (s < opt.samples % kSuiteShards ? 1 : 0);
    };
    auto shard_seed = [&](int s) {
        return opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(s) * 0xBF58476D1CE4E5B9ULL + 1;
    };

    const int threads = std::clamp(opt.threads, 1, kSuiteShards);
    if (threads == 1) {
        for (int s = 0; s < kSuiteShards; ++s) shards[s] = detail::run_shard(shard_count(s), shard_seed(s), opt);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (int s = t; s < kSuiteShards; s += threads)
                    shards[s] = detail::run_shard(shard_count(s), shard_seed(s), opt);
            });
        }
    }

    std::vector<detail::Accumulator> total = std::move(shards[0]);
    for (int s = 1; s < kSuiteShards; ++s)
        for (std::size_t i = 0; i < total.size(); ++i) total[i].merge(shards[s][i]);

    std::vector<SuiteResult> out;
    out.reserve(total.size());
    for (auto& a : total) out.push_back(std::move(a.r));
    return out;
}

} // namespace nplap
