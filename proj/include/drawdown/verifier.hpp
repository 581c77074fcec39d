// Grid checks of the sufficient optimality conditions for an assembled surface:
// HJB residuals, ∂_c W ≤ 0, smooth pasting and the marginal-value inequalities.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "drawdown/value_surface.hpp"

namespace drawdown {

struct GridSpec {
    int nx = 400;
    int nc = 200;
    double x_max = 0;  // 0: three times ζ(c̄), or 3μ/q on a degenerate surface
};

struct Tolerances {
    double residual = 0;  // 0: 1e-5·c̄
    double pasting = 1e-5;
    double wxx_jump = 1e-5;
    double wc_zeta = 1e-4;
    double marginal = 1e-5;
};

struct Located {
    double value = -INFINITY;
    double x = 0, c = 0;

    void offer(double v, double xx, double cc) {
        if (v > value) {
            value = v;
            x = xx;
            c = cc;
        }
    }
};

struct VerificationReport {
    Located max_residual_Lc, max_residual_Lac, max_Wc;
    Located smooth_pasting_gap, wxx_jump, wc_at_zeta;
    int monotonicity_violations = 0;
    int marginal_violations = 0;
    GridSpec grid;
    Tolerances tol;
    double c_low = 0, c_high = 0;
    bool truncated = false;
    std::string truncation_reason;
    bool pass = false;
};

inline double hjb_operator(const SurfacePoint& s, double d, const ModelParams& p) {
    return 0.5 * p.sigma * p.sigma * s.Wxx + (p.mu - d) * s.Wx - p.q * s.W + d;
}

namespace detail {

inline void resolve(const ValueSurface& s, GridSpec& g, Tolerances& t) {
    const ModelParams& p = s.params();
    if (t.residual <= 0) t.residual = 1e-5 * p.cbar;
    if (g.x_max <= 0)
        g.x_max = s.is_degenerate() ? 3 * p.mu / p.q : 3 * s.curves().zeta.front();
    if (g.nx < 2 || g.nc < 1) fail(ErrorKind::DomainError, "grid needs nx >= 2 and nc >= 1");
}

inline double grid_c(const ValueSurface& s, const GridSpec& g, int j) {
    const double lo = s.c_low(), hi = s.params().cbar;
    return lo + (hi - lo) * j / g.nc;  // j < nc keeps c < c̄
}

inline void pasting(const ValueSurface& s, VerificationReport& r) {
    if (s.is_degenerate()) {
        r.smooth_pasting_gap.value = r.wxx_jump.value = r.wc_at_zeta.value = 0;
        return;
    }
    const CurvePair& cp = s.curves();
    for (std::size_t i = 0; i < cp.size(); ++i) {
        const double c = cp.c[i], g = cp.gamma[i];
        const SurfacePoint lo = s.evaluate(g, c, Side::Below);
        const SurfacePoint hi = s.evaluate(g, c, Side::Above);
        r.smooth_pasting_gap.offer(std::max(std::fabs(lo.Wx - 1), std::fabs(hi.Wx - 1)), g, c);
        const double scale = std::max(std::fabs(lo.Wxx), std::fabs(hi.Wxx));
        r.wxx_jump.offer(scale > 0 ? std::fabs(lo.Wxx - hi.Wxx) / scale : 0.0, g, c);
        if (c < s.params().cbar) {
            const SurfacePoint z = s.evaluate(cp.zeta[i], c, Side::Below);
            r.wc_at_zeta.offer(std::fabs(z.Wc), cp.zeta[i], c);
        }
    }
}

}  // namespace detail

/// HJB residuals and ∂_c W on the product grid, plus smooth pasting at the nodes.
inline VerificationReport check_supersolution(const ValueSurface& s, GridSpec grid = {},
                                              Tolerances tol = {}) {
    detail::resolve(s, grid, tol);
    const ModelParams& p = s.params();
    VerificationReport r;
    r.grid = grid;
    r.tol = tol;
    r.c_low = s.c_low();
    r.c_high = p.cbar;
    r.truncated = s.truncated();
    r.truncation_reason = s.curves().truncation_reason;

    std::vector<double> prev_row;  // W at the previous c
    for (int j = 0; j < grid.nc; ++j) {
        const double c = detail::grid_c(s, grid, j);
        std::vector<double> row(grid.nx);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x_max * i / (grid.nx - 1);
            const SurfacePoint pt = s.evaluate(x, c);
            row[i] = pt.W;
            if (x > 0) {
                r.max_residual_Lc.offer(hjb_operator(pt, c, p), x, c);
                r.max_residual_Lac.offer(hjb_operator(pt, p.a * c, p), x, c);
            }
            r.max_Wc.offer(pt.Wc, x, c);
            if (i > 0 && row[i] < row[i - 1] - 1e-12 * p.cbar / p.q) ++r.monotonicity_violations;
            if (!prev_row.empty() && row[i] > prev_row[i] + 1e-9 * p.cbar / p.q)
                ++r.monotonicity_violations;
        }
        prev_row = std::move(row);
    }
    detail::pasting(s, r);

    r.pass = r.max_residual_Lc.value <= tol.residual && r.max_residual_Lac.value <= tol.residual &&
             r.max_Wc.value <= tol.residual && r.smooth_pasting_gap.value <= tol.pasting &&
             r.wxx_jump.value <= tol.wxx_jump && r.wc_at_zeta.value <= tol.wc_zeta &&
             r.monotonicity_violations == 0;
    return r;
}

/// ∂_x W ≥ 1 below γ(c) and ≤ 1 on [γ(c), ζ(c)], on nx points per grid rate.
inline VerificationReport check_marginal_conditions(const ValueSurface& s, GridSpec grid = {},
                                                    Tolerances tol = {}) {
    detail::resolve(s, grid, tol);
    VerificationReport r;
    r.grid = grid;
    r.tol = tol;
    r.c_low = s.c_low();
    r.c_high = s.params().cbar;
    r.truncated = s.truncated();
    r.truncation_reason = s.curves().truncation_reason;
    if (!s.is_degenerate()) {
        for (int j = 0; j <= grid.nc; ++j) {
            const double c = detail::grid_c(s, grid, j);
            const CurveNode n = s.node(c);
            for (int i = 0; i < grid.nx; ++i) {
                const double x = n.zeta * i / (grid.nx - 1);
                const SurfacePoint pt = s.evaluate(x, c, Side::Below);
                const bool lower = x < n.gamma;
                if (lower ? pt.Wx < 1 - tol.marginal : pt.Wx > 1 + tol.marginal)
                    ++r.marginal_violations;
            }
        }
    }
    detail::pasting(s, r);
    r.pass = r.marginal_violations == 0 && r.smooth_pasting_gap.value <= tol.pasting;
    return r;
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const Located& l) {
    return {{"value", std::isfinite(l.value) ? l.value : 0.0}, {"x", l.x}, {"c", l.c}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json j;
    j["pass"] = r.pass;
    j["max_residual_Lc"] = to_json(r.max_residual_Lc);
    j["max_residual_Lac"] = to_json(r.max_residual_Lac);
    j["max_Wc"] = to_json(r.max_Wc);
    j["smooth_pasting_gap"] = to_json(r.smooth_pasting_gap);
    j["wxx_jump"] = to_json(r.wxx_jump);
    j["wc_at_zeta"] = to_json(r.wc_at_zeta);
    j["monotonicity_violations"] = r.monotonicity_violations;
    j["marginal_violations"] = r.marginal_violations;
    j["grid"] = {{"nx", r.grid.nx}, {"nc", r.grid.nc}, {"x_max", r.grid.x_max},
                 {"c_low", r.c_low}, {"c_high", r.c_high}};
    j["tolerances"] = {{"residual", r.tol.residual}, {"pasting", r.tol.pasting},
                       {"wxx_jump", r.tol.wxx_jump}, {"wc_zeta", r.tol.wc_zeta},
                       {"marginal", r.tol.marginal}};
    j["truncated"] = r.truncated;
    if (r.truncated) {
        j["truncation_reason"] = r.truncation_reason;
        j["query_below_truncation"] = {{"c_from", 0.0}, {"c_to", r.c_low}};
    }
    return j;
}

}  // namespace drawdown
