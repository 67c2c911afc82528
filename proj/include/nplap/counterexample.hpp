#pragma once

// Radial family v^eps(r) = ∫_r^1 φ(s/eps)/s ds in the unit ball of R^n, whose
// weighted operator g^eps stays L^2-bounded (or grows like ln(1/eps)) while
// v^eps(0) blows up. Everything reduces to one-dimensional quadrature.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nplap/error.hpp"
#include "nplap/grid.hpp"

namespace nplap {

/// Cutoff: 0 on [0,1], quintic smoothstep on [1,2], 1 beyond.
inline double phi(double s)
{
    NPLAP_REQUIRE(s >= 0.0 && !std::isnan(s), "phi: argument must be nonnegative");
    if (s <= 1.0) return 0.0;
    if (s >= 2.0) return 1.0;
    const double t = s - 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double phi_prime(double s)
{
    NPLAP_REQUIRE(s >= 0.0 && !std::isnan(s), "phi_prime: argument must be nonnegative");
    if (s <= 1.0 || s >= 2.0) return 0.0;
    const double t = s - 1.0;
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

inline constexpr double kPhiSlopeMax = 15.0 / 8.0;

namespace detail {

inline void require_eps(double eps)
{
    NPLAP_REQUIRE(eps > 0.0 && eps < 0.5, "counterexample: eps must lie in (0, 1/2)");
}

inline void require_shape(int n, double p, double gamma)
{
    NPLAP_REQUIRE(n >= 2, "counterexample: n must be at least 2");
    NPLAP_REQUIRE(p > 1.0, "counterexample: p must exceed 1");
    NPLAP_REQUIRE(gamma > -1.0, "counterexample: gamma must exceed -1");
}

/// ∫_a^2 φ(t)/t dt for a in [1,2]; the integrand is a polynomial over t.
inline double inner_log_integral(double a)
{
    if (a >= 2.0) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double t) { return phi(t) / t; }, a, 2.0, 15, 1e-14);
}

/// φ^gamma·φ' and φ^(gamma+1), zero where φ = 0.
inline std::pair<double, double> powered(double t, double gamma)
{
    const double f = phi(t);
    if (f <= 0.0) return {0.0, 0.0};
    const double fg = std::pow(f, gamma);
    return {fg * phi_prime(t), fg * f};
}

} // namespace detail

/// v^eps(r) = ∫_r^1 φ(s/eps)/s ds.
inline double v_eps(double r, double eps)
{
    detail::require_eps(eps);
    NPLAP_REQUIRE(r >= 0.0 && r <= 1.0, "v_eps: r must lie in [0,1]");
    if (r >= 2.0 * eps) return std::log(1.0 / r);
    return detail::inner_log_integral(std::max(r / eps, 1.0)) + std::log(1.0 / (2.0 * eps));
}

/// g^eps(r) = r^(-gamma) φ^gamma(r/eps) [(p-1) φ'(r/eps)/(eps r) + (n-2) φ(r/eps)/r^2].
inline double g_eps(double r, double eps, int n, double p, double gamma)
{
    detail::require_eps(eps);
    detail::require_shape(n, p, gamma);
    NPLAP_REQUIRE(r >= 0.0 && r <= 1.0, "g_eps: r must lie in [0,1]");
    if (r <= eps) return 0.0;
    if (r >= 2.0 * eps) return (n - 2) * std::pow(r, -(gamma + 2.0));
    const auto [fgd, fg1] = detail::powered(r / eps, gamma);
    return std::pow(r, -gamma) * ((p - 1.0) * fgd / (eps * r) + (n - 2) * fg1 / (r * r));
}

/// Area of the unit sphere in R^n.
inline double sphere_area(int n)
{
    NPLAP_REQUIRE(n >= 1, "sphere_area: n must be positive");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Closed form of ∫_{2eps}^1 g^2 r^(n-1) dr, where g = (n-2) r^-(gamma+2).
inline double tail_integral_exact(double eps, int n, double gamma)
{
    const double m = n - 4.0 - 2.0 * gamma;
    const double c = (n - 2.0) * (n - 2.0);
    if (std::abs(m) < 1e-14) return c * std::log(1.0 / (2.0 * eps));
    return c * (1.0 - std::pow(2.0 * eps, m)) / m;
}

struct GSquaredParts {
    double inner = 0.0; ///< ∫_eps^{2eps} g^2 r^(n-1) dr
    double tail = 0.0;  ///< ∫_{2eps}^1 g^2 r^(n-1) dr
};

/// Radial integrals of g^2 r^(n-1) by quadrature. The band integrand behaves
/// like (t-1)^(6 gamma + 4) near its left end, so it diverges once gamma <= -5/6.
inline GSquaredParts g_squared_parts(double eps, int n, double p, double gamma)
{
    detail::require_eps(eps);
    detail::require_shape(n, p, gamma);
    GSquaredParts out;
    const double m = n - 4.0 - 2.0 * gamma;
    const double c = (n - 2.0) * (n - 2.0);
    // r = e^s flattens the power law.
    out.tail = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double s) { return c * std::exp(m * s); }, std::log(2.0 * eps), 0.0, 15, 1e-14);

    if (gamma <= -5.0 / 6.0) {
        out.inner = std::numeric_limits<double>::infinity();
        return out;
    }
    auto integrand = [&](double t) {
        const double r = eps * t;
        const double g = g_eps(r, eps, n, p, gamma);
        return g * g * std::pow(r, n - 1) * eps;
    };
    if (gamma >= 0.0) {
        out.inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 1.0, 2.0, 15, 1e-13);
    } else {
        boost::math::quadrature::tanh_sinh<double> ts;
        out.inner = ts.integrate(integrand, 1.0, 2.0, 1e-12);
    }
    return out;
}

/// (c_n ∫_eps^1 g^2 r^(n-1) dr)^(1/2).
inline double l2_norm_g(double eps, int n, double p, double gamma)
{
    const auto parts = g_squared_parts(eps, n, p, gamma);
    return std::sqrt(sphere_area(n) * (parts.inner + parts.tail));
}

/// One eps-instance of the family, bundling the pointwise profiles.
struct RadialProfile {
    double eps;
    int n;
    double p;
    double gamma;

    RadialProfile(double eps_, int n_, double p_, double gamma_) : eps(eps_), n(n_), p(p_), gamma(gamma_)
    {
        detail::require_eps(eps);
        detail::require_shape(n, p, gamma);
    }

    [[nodiscard]] double v(double r) const { return v_eps(r, eps); }
    [[nodiscard]] double g(double r) const { return g_eps(r, eps, n, p, gamma); }
    [[nodiscard]] double l2_g() const { return l2_norm_g(eps, n, p, gamma); }
    [[nodiscard]] double sup_v() const { return v_eps(0.0, eps); }
    /// (ln 1/eps)^(-1/(2(1+gamma))) v^eps(0).
    [[nodiscard]] double sup_u_scaled() const
    {
        return std::pow(std::log(1.0 / eps), -1.0 / (2.0 * (1.0 + gamma))) * sup_v();
    }
};

inline bool is_critical_gamma(int n, double gamma) { return std::abs(gamma - 0.5 * (n - 4)) < 1e-12; }

inline std::vector<double> default_blowup_schedule() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

struct BlowupRow {
    double eps = 0.0;
    double l2_g = 0.0;
    double sup_v = 0.0;
    double sup_u_scaled = 0.0;
};

struct BlowupReport {
    int n = 4;
    double p = 2.0, gamma = 0.0;
    bool critical = false;
    std::vector<BlowupRow> rows;
    double fit_exponent = 0.0;            ///< slope of ln sup_u_scaled against ln ln(1/eps)
    double expected_exponent = 0.0;       ///< (n-3)/(n-2), compared only when critical
    double l2_spread = 0.0;               ///< max/min of ||g||_2^2/ln(1/eps) (critical) or ||g||_2
    bool sup_increasing = false;
    bool fit_ok = true;
    bool l2_ok = false;
    bool lower_bound_ok = false; ///< v^eps(0) >= -ln(2 eps) at every eps

    [[nodiscard]] bool pass() const { return sup_increasing && fit_ok && l2_ok && lower_bound_ok; }
};

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    NPLAP_REQUIRE(x.size() == y.size() && x.size() >= 2, "fit_slope: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    NPLAP_REQUIRE(sxx > 0.0, "fit_slope: abscissae must not coincide");
    return sxy / sxx;
}

/// Blow-up table over an eps schedule. Accepts -1 < gamma < (n-4)/2 with
/// n >= 3, or gamma = (n-4)/2 with n >= 4.
inline BlowupReport blowup_report(int n, double p, double gamma, std::vector<double> schedule = default_blowup_schedule())
{
    detail::require_shape(n, p, gamma);
    NPLAP_REQUIRE(n >= 3, "blowup_report: needs n >= 3");
    const bool critical = is_critical_gamma(n, gamma);
    if (critical && n < 4) throw InvalidArgument("blowup_report: gamma = (n-4)/2 requires n >= 4");
    if (!critical && !(gamma < 0.5 * (n - 4)))
        throw InvalidArgument("blowup_report: gamma must satisfy -1 < gamma <= (n-4)/2");
    NPLAP_REQUIRE(schedule.size() >= 2, "blowup_report: need at least two eps values");
    std::sort(schedule.begin(), schedule.end(), std::greater<>());
    for (double e : schedule) detail::require_eps(e);

    BlowupReport rep;
    rep.n = n;
    rep.p = p;
    rep.gamma = gamma;
    rep.critical = critical;
    rep.expected_exponent = (n - 3.0) / (n - 2.0);

    std::vector<double> lx, ly, l2_measure;
    rep.lower_bound_ok = true;
    for (double e : schedule) {
        const RadialProfile prof(e, n, p, gamma);
        BlowupRow row{e, prof.l2_g(), prof.sup_v(), prof.sup_u_scaled()};
        rep.lower_bound_ok = rep.lower_bound_ok && row.sup_v >= -std::log(2.0 * e);
        lx.push_back(std::log(std::log(1.0 / e)));
        ly.push_back(std::log(row.sup_u_scaled));
        l2_measure.push_back(critical ? row.l2_g * row.l2_g / std::log(1.0 / e) : row.l2_g);
        rep.rows.push_back(row);
    }
    rep.sup_increasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        rep.sup_increasing = rep.sup_increasing && rep.rows[i].sup_v > rep.rows[i - 1].sup_v;
    rep.fit_exponent = fit_slope(lx, ly);
    if (critical) rep.fit_ok = std::abs(rep.fit_exponent - rep.expected_exponent) <= 0.2 * rep.expected_exponent;

    const auto [lo, hi] = std::minmax_element(l2_measure.begin(), l2_measure.end());
    rep.l2_spread = (std::isfinite(*hi) && *lo > 0.0) ? *hi / *lo : std::numeric_limits<double>::infinity();
    rep.l2_ok = rep.l2_spread <= (critical ? 3.0 : 1.5);
    return rep;
}

inline std::string blowup_csv(const BlowupReport& rep)
{
    std::ostringstream os;
    os << "eps,l2_g,sup_v,sup_u_scaled,fit_exponent\n";
    for (const auto& r : rep.rows)
        os << format_real(r.eps) << ',' << format_real(r.l2_g) << ',' << format_real(r.sup_v) << ','
           << format_real(r.sup_u_scaled) << ',' << format_real(rep.fit_exponent) << '\n';
    return os.str();
}

} // namespace nplap
