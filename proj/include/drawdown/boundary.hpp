// Boundary values z*(c̄), x*(c̄) of the free-boundary problem, the c̄ → ∞
// expansions, and the a = 0 reference threshold.
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "drawdown/closed_forms.hpp"
#include "drawdown/model.hpp"
#include "drawdown/numerics.hpp"

namespace drawdown {

struct BoundaryValues {
    double bstar = 0;
    double zstar = 0;
    std::optional<double> xstar;
    double cbar = 0;
};

struct ZStarOptions {
    int scan_points = 10000;
    double abs_tol = 1e-9;
};

/// Unique zero of C0(b*, ·, c̄) on (b*, b* + 10μ/q].
///
/// The scan runs on the reduced form of C0, which differs from C0 by a
/// positive factor once the leading-order term (zero at y = b*) is dropped.
inline double solve_zstar(const ModelParams& p, double bstar, ZStarOptions opt = {}) {
    validate(p);
    if (!p.interesting()) fail(ErrorKind::RegimeError, "z* needs cbar > q sigma^2 / (2 mu)");
    auto f = [&](double z) { return C0_reduced(bstar, z, p.cbar, p); };
    const double lo = bstar, hi = bstar + 10.0 * p.mu / p.q;
    const double first = lo + (hi - lo) / opt.scan_points;
    SignScan s = scan_signs(f, first, hi, opt.scan_points - 1);
    if (s.changes.empty())
        throw ScanError(ErrorKind::NoSignChange, "C0(b*, ., cbar) keeps one sign", s.trace);
    if (s.changes.size() > 1)
        throw ScanError(ErrorKind::MultipleSignChanges,
                        std::to_string(s.changes.size()) + " sign changes of C0(b*, ., cbar)",
                        s.trace);
    const std::size_t i = s.changes.front();
    return refine_root(f, s.trace[i - 1].first, s.trace[i].first, opt.abs_tol);
}

inline double solve_zstar(const ModelParams& p, ZStarOptions opt = {}) {
    return solve_zstar(p, optimal_refraction_threshold(p), opt);
}

/// ∂_{c̄} v^{c̄}(x) by a symmetric difference with b* re-optimized on each side.
class CapSensitivity {
public:
    explicit CapSensitivity(const ModelParams& p, double rel_step = 1e-4)
        : h_(rel_step * p.cbar), up_(p.with_cbar(p.cbar + h_)), dn_(p.with_cbar(p.cbar - h_)) {
        b_up_ = optimal_refraction_threshold(up_);
        b_dn_ = optimal_refraction_threshold(dn_);
    }

    double operator()(double x) const {
        return (refraction_value(x, b_up_, up_) - refraction_value(x, b_dn_, dn_)) / (2 * h_);
    }

private:
    double h_;
    ModelParams up_, dn_;
    double b_up_ = 0, b_dn_ = 0;
};

struct XStarResult {
    std::optional<double> xstar;
    SignScan scan;
};

inline XStarResult solve_xstar(const ModelParams& p, double zstar, int scan_points = 2000) {
    validate(p);
    if (!p.interesting()) fail(ErrorKind::RegimeError, "x* needs cbar > q sigma^2 / (2 mu)");
    const CapSensitivity g(p);
    const double hi = 1.5 * zstar;
    XStarResult r;
    r.scan = scan_signs(g, hi / scan_points, hi, scan_points - 1);
    if (r.scan.changes.size() != 1) return r;
    const std::size_t i = r.scan.changes.front();
    if (!(r.scan.trace[i - 1].second < 0)) return r;  // must go from − to +
    r.xstar = refine_root(g, r.scan.trace[i - 1].first, r.scan.trace[i].first, 1e-7);
    return r;
}

inline XStarResult solve_xstar(const ModelParams& p) { return solve_xstar(p, solve_zstar(p)); }

inline BoundaryValues solve_boundary(const ModelParams& p) {
    BoundaryValues bv;
    bv.cbar = p.cbar;
    bv.bstar = optimal_refraction_threshold(p);
    if (!p.interesting()) return bv;
    bv.zstar = solve_zstar(p, bv.bstar);
    bv.xstar = solve_xstar(p, bv.zstar).xstar;
    return bv;
}

// ---- expansions at c̄ = ∞ -------------------------------------------------

struct AsymptoticPredictions {
    double limit;       // (μ/q)(1 + 1/√a), shared by z* and x*
    double bstar_coef;  // b* ≈ μ/q + bstar_coef/c̄
    double zstar_coef;
    double xstar_coef;
    double bstar_pred, zstar_pred, xstar_pred;
};

inline AsymptoticPredictions asymptotic_predictions(const ModelParams& p) {
    const double a = p.a, mu = p.mu, q = p.q, s2 = p.sigma * p.sigma;
    const double ra = std::sqrt(a), a32 = a * ra;
    AsymptoticPredictions r{};
    r.limit = mu / q * (1 + 1 / ra);
    r.bstar_coef = -(mu * mu + a * q * s2) / (2 * a * q);
    r.zstar_coef = ((1 - 2 * ra - 3 * a) * mu * mu - 3 * (1 + a32 / 2) * q * s2) / (3 * q * a32);
    r.xstar_coef = ((1 - 2 * ra - 3 * a) * mu * mu - 3 * (1 + a32) * q * s2) / (3 * a32 * q);
    r.bstar_pred = mu / q + r.bstar_coef / p.cbar;
    r.zstar_pred = r.limit + r.zstar_coef / p.cbar;
    r.xstar_pred = r.limit + r.xstar_coef / p.cbar;
    return r;
}

/// Optimal barrier of the unconstrained (a = 0) problem with rate cap c̄.
inline double unconstrained_threshold(const ModelParams& p) {
    validate(p);
    if (!p.interesting())
        fail(ErrorKind::RegimeError, "unconstrained threshold needs cbar > q sigma^2 / (2 mu)");
    const RootPair r0 = characteristic_roots(0.0, p);
    const double s2 = characteristic_roots(p.cbar, p).theta2;
    const double arg = r0.theta2 * (r0.theta2 - s2) / (r0.theta1 * (r0.theta1 - s2));
    return std::log(arg) / (r0.theta1 - r0.theta2);
}

}  // namespace drawdown
