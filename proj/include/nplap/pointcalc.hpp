#pragma once

// Pointwise calculus of the regularized operators at a single point, given
// the gradient g = Dv and Hessian H = D^2 v, and the algebraic inequalities
// they satisfy. Everything here is exact arithmetic on small matrices; no
// discretization is involved.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>

#include "nplap/error.hpp"
#include "nplap/params.hpp"

namespace nplap {

inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Below this gradient magnitude the off-critical-set inequalities are not checked.
inline constexpr double kDegenerateGradient = 1e-10;

class PointState {
public:
    PointState(Vec g, const Mat& H, double eps) : g_(std::move(g)), H_(0.5 * (H + H.transpose())), eps_(eps)
    {
        NPLAP_REQUIRE(g_.size() >= 1 && g_.size() <= kMaxDim, "PointState: dimension out of range");
        NPLAP_REQUIRE(H.rows() == g_.size() && H.cols() == g_.size(), "PointState: Hessian shape mismatch");
        NPLAP_REQUIRE(eps_ > 0.0, "PointState: eps must be positive");
    }

    [[nodiscard]] const Vec& g() const noexcept { return g_; }
    [[nodiscard]] const Mat& H() const noexcept { return H_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(g_.size()); }
    [[nodiscard]] double grad_sq() const noexcept { return g_.squaredNorm(); }

private:
    Vec g_;
    Mat H_;
    double eps_;
};

struct OperatorValues {
    double laplacian = 0.0;          ///< tr H
    double inf_laplacian = 0.0;      ///< <Hg, g>
    double normalized_inf_eps = 0.0; ///< <Hg, g> / (|g|^2 + eps)
    double normalized_p_eps = 0.0;   ///< tr H + (p-2) normalized_inf_eps
    double weighted_operator = 0.0;  ///< (|g|^2+eps)^(gamma/2) normalized_p_eps
};

inline OperatorValues operator_values(const PointState& s, double p, double gamma)
{
    OperatorValues out;
    const double w = s.grad_sq() + s.eps();
    out.laplacian = s.H().trace();
    out.inf_laplacian = s.g().dot(s.H() * s.g());
    out.normalized_inf_eps = out.inf_laplacian / w;
    out.normalized_p_eps = out.laplacian + (p - 2.0) * out.normalized_inf_eps;
    out.weighted_operator = std::pow(w, 0.5 * gamma) * out.normalized_p_eps;
    return out;
}

/// A = (|g|^2+eps)^(gamma/2) (I + (p-2) g g^T / (|g|^2+eps)), so tr(A H) is
/// the weighted operator.
inline Mat coefficient_matrix(const PointState& s, double p, double gamma)
{
    const int n = s.dim();
    const double w = s.grad_sq() + s.eps();
    Mat A = Mat::Identity(n, n);
    A.noalias() += ((p - 2.0) / w) * (s.g() * s.g().transpose());
    A *= std::pow(w, 0.5 * gamma);
    return A;
}

namespace detail {

inline void require_nondegenerate(const PointState& s, const char* who)
{
    if (!(std::sqrt(s.grad_sq()) > kDegenerateGradient))
        throw DegenerateGradient(std::string(who) + ": |Dv| below degenerate-gradient threshold");
}

} // namespace detail

/// LHS - RHS of |D^2v|^2 - 2|D|Dv||^2 + (Δ^N_∞ v)^2 >= (Δv - Δ^N_∞ v)^2/(n-1).
/// |D|Dv||^2 is |H ĝ|^2 with ĝ = g/|g|.
inline double fundamental_gap(const PointState& s)
{
    detail::require_nondegenerate(s, "fundamental_gap");
    const int n = s.dim();
    NPLAP_REQUIRE(n >= 2, "fundamental_gap: n must be >= 2");
    const Vec ghat = s.g() / s.g().norm();
    const Vec Hg = s.H() * ghat;
    const double ninf = ghat.dot(Hg);
    const double lhs = s.H().squaredNorm() - 2.0 * Hg.squaredNorm() + ninf * ninf;
    const double d = s.H().trace() - ninf;
    return lhs - d * d / (n - 1);
}

/// The remainder T whose nonnegativity closes the structural inequality.
inline double t_gap(const PointState& s, double p, double gamma)
{
    detail::require_nondegenerate(s, "t_gap");
    const int n = s.dim();
    NPLAP_REQUIRE(n >= 2, "t_gap: n must be >= 2");
    NPLAP_REQUIRE(gamma > gamma_threshold(n, p), "t_gap: triplet (n,p,gamma) is not admissible");

    const double g2 = s.grad_sq();
    const double eps = s.eps();
    const Vec Hg = s.H() * s.g();
    const double inf = s.g().dot(Hg);
    const double ninf = inf / g2;           // Δ^N_∞
    const double ninf_eps = inf / (g2 + eps); // Δ^N_{∞,ε}
    const double hg2 = Hg.squaredNorm();

    const double t1 = (static_cast<double>(n) / (n - 1)) * (ninf * ninf - ninf_eps * ninf_eps);
    const double t2 = 2.0 * gamma * (hg2 / (g2 + eps) - ninf_eps * ninf_eps);
    const double t3 = 2.0 * (hg2 / g2 - ninf * ninf);
    const double t4 = (2.0 * (p - 2.0) / (n - 1)) * ninf_eps * ninf_eps * eps / g2;
    return t1 + t2 + t3 + t4;
}

/// |H|^2 + 2γ|Hg|^2/(|g|^2+ε) + γ^2 (Δ^N_{∞,ε})^2 - min{1,(γ+1)^2}|H|^2.
inline double hessian_bound_gap(const PointState& s, double gamma)
{
    const double w = s.grad_sq() + s.eps();
    const Vec Hg = s.H() * s.g();
    const double ninf_eps = s.g().dot(Hg) / w;
    const double h2 = s.H().squaredNorm();
    const double lhs = h2 + 2.0 * gamma * Hg.squaredNorm() / w + gamma * gamma * ninf_eps * ninf_eps;
    return lhs - std::min(1.0, (gamma + 1.0) * (gamma + 1.0)) * h2;
}

enum class MonotonicityVariant { RegNeg, UnregNeg, RegPos, UnregPos };

inline std::optional<MonotonicityVariant> parse_variant(std::string_view name)
{
    if (name == "reg-neg") return MonotonicityVariant::RegNeg;
    if (name == "unreg-neg") return MonotonicityVariant::UnregNeg;
    if (name == "reg-pos") return MonotonicityVariant::RegPos;
    if (name == "unreg-pos") return MonotonicityVariant::UnregPos;
    return std::nullopt;
}

inline std::string_view to_string(MonotonicityVariant v)
{
    switch (v) {
    case MonotonicityVariant::RegNeg: return "reg-neg";
    case MonotonicityVariant::UnregNeg: return "unreg-neg";
    case MonotonicityVariant::RegPos: return "reg-pos";
    case MonotonicityVariant::UnregPos: return "unreg-pos";
    }
    return "?";
}

struct MonotonicitySides {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Both sides of the vector monotonicity inequality for the chosen variant.
/// The unregularized variants ignore eps (they use eps = 0).
inline MonotonicitySides monotonicity_sides(const Vec& a, const Vec& b, double gamma, double eps,
                                            MonotonicityVariant variant)
{
    NPLAP_REQUIRE(a.size() == b.size(), "monotonicity_gap: vectors differ in length");
    const bool negative = variant == MonotonicityVariant::RegNeg || variant == MonotonicityVariant::UnregNeg;
    const bool regularized = variant == MonotonicityVariant::RegNeg || variant == MonotonicityVariant::RegPos;
    if (negative) {
        NPLAP_REQUIRE(gamma > -1.0 && gamma < 0.0, "monotonicity_gap: negative variants need -1 < gamma < 0");
    } else {
        NPLAP_REQUIRE(gamma >= 0.0, "monotonicity_gap: positive variants need gamma >= 0");
    }
    if (regularized) NPLAP_REQUIRE(eps > 0.0 && eps <= 1.0, "monotonicity_gap: eps must lie in (0,1]");
    const double e = regularized ? eps : 0.0;

    auto flux = [&](const Vec& v) -> Vec {
        const double m = v.squaredNorm() + e;
        if (m == 0.0) return Vec::Zero(v.size());
        return std::pow(m, 0.5 * gamma) * v;
    };

    const Vec diff = a - b;
    MonotonicitySides out;
    out.lhs = (flux(a) - flux(b)).dot(diff);
    const double sum = a.squaredNorm() + b.squaredNorm();
    switch (variant) {
    case MonotonicityVariant::RegNeg:
        out.rhs = (gamma + 1.0) * std::pow(6.0, 0.5 * gamma) * std::pow(sum + e, 0.5 * gamma) * diff.squaredNorm();
        break;
    case MonotonicityVariant::UnregNeg:
        out.rhs = (gamma + 1.0) * std::pow(6.0, 0.5 * gamma) * std::pow(sum + 1.0, 0.5 * gamma) * diff.squaredNorm();
        break;
    case MonotonicityVariant::RegPos:
    case MonotonicityVariant::UnregPos:
        out.rhs = std::pow(2.0, -2.0 - gamma) * (sum + e == 0.0 ? 0.0 : std::pow(sum + e, 0.5 * gamma)) *
                  diff.squaredNorm();
        break;
    }
    return out;
}

inline double monotonicity_gap(const Vec& a, const Vec& b, double gamma, double eps, MonotonicityVariant variant)
{
    const auto s = monotonicity_sides(a, b, gamma, eps, variant);
    return s.lhs - s.rhs;
}

/// C(p) used when the caller does not supply one: the Young-inequality
/// constant (1+|p-2|)^2/(n-1)^2 inflated by (n-1)^3, plus one.
inline double default_c_p(double p, int n)
{
    const double a = 1.0 + std::abs(p - 2.0);
    return a * a * (n - 1) + 1.0;
}

/// LHS - RHS of the structural inequality with a free parameter eta > 0.
inline double structural_gap(const PointState& s, double p, double gamma, double eta,
                             std::optional<double> c_p = std::nullopt)
{
    detail::require_nondegenerate(s, "structural_gap");
    const int n = s.dim();
    NPLAP_REQUIRE(n >= 2, "structural_gap: n must be >= 2");
    NPLAP_REQUIRE(eta > 0.0, "structural_gap: eta must be positive");
    const double cp = c_p.value_or(default_c_p(p, n));
    NPLAP_REQUIRE(cp > 0.0, "structural_gap: c_p must be positive");

    const auto ov = operator_values(s, p, gamma);
    const double w = s.grad_sq() + s.eps();
    const double h2 = s.H().squaredNorm();
    const double a = ov.normalized_inf_eps;
    const double hg2 = (s.H() * s.g()).squaredNorm();
    const double shift = gamma - p + 2.0;

    const double lhs = h2 + 2.0 * gamma * hg2 / w + (gamma * gamma - shift * shift) * a * a;
    const double coef = 2.0 * (p - 1.0) * (gamma + 1.0 - (p - 1.0) * (n - 2) / (2.0 * (n - 1)));
    const double rhs = coef * a * a - (cp / eta) * ov.normalized_p_eps * ov.normalized_p_eps - eta * h2;
    return lhs - rhs;
}

} // namespace nplap
