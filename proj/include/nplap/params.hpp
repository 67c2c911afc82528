#pragma once

// Exponent arithmetic for the triplet (n, p, gamma): admissibility threshold,
// Sobolev conjugate, integrability exponents and the Moser schedule.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nplap/error.hpp"

namespace nplap {

struct ProblemParams {
    int n = 2;
    double p = 2.0;
    double gamma = 0.0;
    double eps = 1e-2;
    double lambda = 0.0;
    /// Value used for 2* when n = 2. Empty selects default_two_star_fallback().
    std::optional<double> two_star_fallback;
};

/// gamma_{n,p} = -1 + (p-1)(n-2)/(2(n-1)).
inline double gamma_threshold(int n, double p)
{
    NPLAP_REQUIRE(n >= 2, "gamma_threshold: n must be >= 2");
    NPLAP_REQUIRE(p > 1.0, "gamma_threshold: p must exceed 1");
    return -1.0 + (p - 1.0) * (n - 2) / (2.0 * (n - 1));
}

inline double two_star(int n, double fallback)
{
    NPLAP_REQUIRE(n >= 2, "two_star: n must be >= 2");
    if (n >= 3) return 2.0 * n / (n - 2);
    NPLAP_REQUIRE(fallback > 2.0, "two_star: fallback must exceed 2");
    return fallback;
}

/// Large finite stand-in for 2* in the plane. Big enough that
/// 2(p-2-gamma) <= (gamma+1) 2* and (gamma+1) 2* > max(2, gamma+2).
inline double default_two_star_fallback(double p, double gamma)
{
    const double lq = 2.0 * (p - 2.0 - gamma) / (1.0 + gamma) + 1.0;
    const double super = 2.0 * std::max(2.0, gamma + 2.0) / (1.0 + gamma);
    return std::max({12.0, lq, super});
}

inline double effective_fallback(const ProblemParams& prm)
{
    return prm.two_star_fallback.value_or(default_two_star_fallback(prm.p, prm.gamma));
}

/// Every violated invariant of ProblemParams, as human readable messages.
inline std::vector<std::string> violations(const ProblemParams& prm)
{
    std::vector<std::string> out;
    if (prm.n < 2) out.emplace_back("n must be >= 2");
    if (!(prm.p > 1.0)) out.emplace_back("p must exceed 1");
    if (!(prm.gamma > -1.0)) out.emplace_back("gamma must exceed -1");
    if (!(prm.eps > 0.0 && prm.eps <= 1.0)) out.emplace_back("eps must lie in (0,1]");
    if (!(prm.lambda >= 0.0 && prm.lambda < 1.0)) out.emplace_back("lambda must lie in [0,1)");
    if (prm.two_star_fallback && !(*prm.two_star_fallback > 2.0))
        out.emplace_back("two_star_fallback must exceed 2");
    return out;
}

inline void validate(const ProblemParams& prm)
{
    auto v = violations(prm);
    if (!v.empty()) throw InvalidArgument("ProblemParams: " + v.front());
}

inline bool is_admissible(int n, double p, double gamma)
{
    return gamma > gamma_threshold(n, p);
}

struct ExponentTable {
    double gamma_np = 0.0;
    double two_star = 0.0;
    double q0 = 0.0; ///< (1+gamma) 2*
    bool admissible = false;
    bool gamma_gt_minus4over = false; ///< gamma > -4/(n+2)
    bool gamma_le_pminus2 = false;
    bool supercritical = false; ///< q0 > n
    int k0 = 0;
    std::optional<double> holder_alpha;
    std::vector<double> moser_q; ///< q_k = (gamma+1) (2*)^k, k = 0..k0+1

    bool operator==(const ExponentTable&) const = default;
};

inline constexpr int kMaxMoserK0 = 64;

/// Populates every derived exponent. k0 is the starting Moser index; it is
/// raised to the smallest value with (2*)^(k0+1)(gamma+1) > n, capped at 64.
inline ExponentTable classify(const ProblemParams& prm, int k0 = 0)
{
    validate(prm);
    NPLAP_REQUIRE(k0 >= 0, "classify: k0 must be >= 0");

    ExponentTable t;
    t.gamma_np = gamma_threshold(prm.n, prm.p);
    t.two_star = two_star(prm.n, effective_fallback(prm));
    t.q0 = (1.0 + prm.gamma) * t.two_star;
    t.admissible = prm.gamma > t.gamma_np;
    t.gamma_gt_minus4over = prm.gamma > -4.0 / (prm.n + 2);
    t.gamma_le_pminus2 = prm.gamma <= prm.p - 2.0;
    t.supercritical = t.q0 > prm.n;

    auto moser_top = [&](int k) { return std::pow(t.two_star, k + 1) * (1.0 + prm.gamma); };
    while (moser_top(k0) <= prm.n && k0 < kMaxMoserK0) ++k0;
    t.k0 = k0;

    if (t.supercritical) {
        t.holder_alpha = 1.0 - prm.n / t.q0;
    } else if (moser_top(k0) > prm.n) {
        t.holder_alpha = 1.0 - prm.n / moser_top(k0);
    }

    t.moser_q.reserve(static_cast<std::size_t>(k0) + 2);
    for (int k = 0; k <= k0 + 1; ++k)
        t.moser_q.push_back((prm.gamma + 1.0) * std::pow(t.two_star, k));
    return t;
}

} // namespace nplap
