// Candidate value function W(x, c) assembled from the discretized curves,
// its partials, the jump target ℓ(x, c) and the induced policy.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "drawdown/closed_forms.hpp"
#include "drawdown/curve_solver.hpp"
#include "drawdown/model.hpp"

namespace drawdown {

enum class Region { PayReduced = 0, PayCurrent = 1, Change = 2 };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::PayReduced: return "NCac";
        case Region::PayCurrent: return "NCc";
        case Region::Change: return "CH";
    }
    return "?";
}

/// Which branch to use for a point lying exactly on γ(c) or ζ(c).
/// Natural: the branch of the definition at γ, the no-change side at ζ.
enum class Side { Natural, Below, Above };

struct SurfacePoint {
    double W = 0, Wx = 0, Wxx = 0, Wc = 0;
    Region region = Region::PayReduced;
    double ell = 0;  // rate whose H-branch was used
};

struct CurveNode {
    double gamma, zeta, A, A_prime, gamma_prime;
};

class ValueSurface {
public:
    explicit ValueSurface(CurvePair curves) : p_(curves.params), cp_(std::move(curves)) {
        if (cp_.size() < 2) fail(ErrorKind::DomainError, "surface needs at least two curve nodes");
        if (cp_.A.size() != cp_.size() || cp_.A_prime.size() != cp_.size())
            fail(ErrorKind::DomainError, "curves carry no A(c); run solve_A first");
        top_max_.resize(cp_.size());
        double m = -INFINITY;
        for (std::size_t i = 0; i < cp_.size(); ++i) {
            m = std::max(m, cp_.zeta[i]);
            top_max_[i] = m;
        }
        zeta_max_ = m;
    }

    /// c̄ ≤ qσ²/(2μ): pay c̄ from the start, U(x,c) = (c̄/q)(1 − e^{θ2(c̄)x}).
    static ValueSurface degenerate(const ModelParams& p) {
        validate(p);
        if (p.interesting()) fail(ErrorKind::RegimeError, "degenerate surface needs cbar <= q sigma^2/(2 mu)");
        return ValueSurface(p);
    }

    const ModelParams& params() const { return p_; }
    const CurvePair& curves() const { return cp_; }
    bool is_degenerate() const { return degenerate_; }
    double zeta_max() const { return zeta_max_; }
    double c_low() const { return degenerate_ ? 0.0 : cp_.c_bottom(); }
    bool truncated() const { return cp_.truncated; }

    /// Curve data at c, linear between nodes.
    CurveNode node(double c) const {
        check_c(c);
        if (degenerate_) return {0, 0, 0, 0, 0};
        const auto& g = cp_.c;
        // descending grid: first node with g[i] <= c
        const auto it = std::lower_bound(g.begin(), g.end(), c, std::greater<double>());
        std::size_t i = static_cast<std::size_t>(it - g.begin());
        if (i >= g.size()) i = g.size() - 1;
        if (i == 0 || g[i] == c) return at(i);
        const double t = (g[i - 1] - c) / (g[i - 1] - g[i]);
        const CurveNode hi = at(i - 1), lo = at(i);
        auto mix = [t](double u, double v) { return u + t * (v - u); };
        return {mix(hi.gamma, lo.gamma), mix(hi.zeta, lo.zeta), mix(hi.A, lo.A),
                mix(hi.A_prime, lo.A_prime), mix(hi.gamma_prime, lo.gamma_prime)};
    }

    /// max{h ∈ [c, c̄] : ζ(d) ≤ x for d ∈ [c, h)}, ζ piecewise linear.
    double ell(double x, double c) const {
        check_c(c);
        if (degenerate_) return p_.cbar;
        const CurveNode n0 = node(c);
        if (x < n0.zeta) fail(ErrorKind::DomainError, "ell needs x >= zeta(c)");
        const auto& g = cp_.c;
        // nodes strictly above c, walked upward
        std::size_t j = static_cast<std::size_t>(
            std::lower_bound(g.begin(), g.end(), c, std::greater<double>()) - g.begin());
        if (j == 0 || x >= top_max_[j - 1]) return p_.cbar;
        double c_lo = c, z_lo = n0.zeta;
        while (j > 0) {
            --j;
            if (g[j] <= c) continue;
            const double z_hi = cp_.zeta[j];
            if (z_hi > x) {
                return c_lo + (x - z_lo) / (z_hi - z_lo) * (g[j] - c_lo);
            }
            c_lo = g[j];
            z_lo = z_hi;
        }
        return p_.cbar;
    }

    SurfacePoint evaluate(double x, double c, Side side = Side::Natural) const {
        if (!(x >= 0)) fail(ErrorKind::DomainError, "x must be >= 0");
        check_c(c);
        SurfacePoint s;
        if (degenerate_) {
            const RefractionEval r = refraction_eval(x, 0.0, p_);
            s.W = r.v;
            s.Wx = r.vx;
            s.Wxx = r.vxx;
            s.region = (c < p_.cbar) ? Region::Change : Region::PayCurrent;
            s.ell = p_.cbar;
            return s;
        }
        const CurveNode n = node(c);
        const bool below_gamma = x < n.gamma || (x == n.gamma && side == Side::Below);
        const bool change = x > n.zeta || (x == n.zeta && side == Side::Above);
        if (below_gamma) {
            s.region = Region::PayReduced;
            lower_branch(x, c, n, s);
        } else if (!change || c >= p_.cbar) {
            s.region = Region::PayCurrent;
            upper_branch(x, c, n, s, true);
        } else {
            s.region = Region::Change;
            const double l = ell(x, c);
            upper_branch(x, l, node(l), s, false);
            s.Wc = 0;
        }
        return s;
    }

private:
    explicit ValueSurface(const ModelParams& p) : p_(p), degenerate_(true) {
        cp_.params = p;
    }

    CurveNode at(std::size_t i) const {
        return {cp_.gamma[i], cp_.zeta[i], cp_.A[i], cp_.A_prime[i], cp_.gamma_prime[i]};
    }

    void check_c(double c) const {
        if (!(c >= 0 && c <= p_.cbar)) fail(ErrorKind::DomainError, "c must lie in [0, cbar]");
        if (!degenerate_ && c < cp_.c_bottom() * (1 - 1e-14) - 1e-300)
            fail(ErrorKind::QueryBelowTruncation,
                 "c=" + std::to_string(c) + " below the solved range starting at " +
                     std::to_string(cp_.c_bottom()));
    }

    void lower_branch(double x, double c, const CurveNode& n, SurfacePoint& s) const {
        const BasisJet j = basis_jet(n.gamma, x, c, p_);
        const XReal A(n.A);
        s.W = j.f10[0] + to_double(j.f11[0] * A);
        s.Wx = j.f10[1] + to_double(j.f11[1] * A);
        s.Wxx = j.f10[2] + to_double(j.f11[2] * A);
        s.Wc = j.f10c + to_double(j.f11c * A + j.f11[0] * XReal(n.A_prime));
        s.ell = c;
    }

    void upper_branch(double x, double c, const CurveNode& n, SurfacePoint& s, bool with_c) const {
        s.ell = c;
        if (c >= p_.cbar && !with_c) {
            const RefractionEval r = refraction_eval(x, cp_.gamma.front(), p_);
            s.W = r.v;
            s.Wx = r.vx;
            s.Wxx = r.vxx;
            s.Wc = 0;
            return;
        }
        const BasisJet j = basis_jet(n.gamma, x, c, p_);
        const XReal A(n.A);
        s.W = to_double(j.f20[0] + j.f21[0] * A);
        s.Wx = to_double(j.f20[1] + j.f21[1] * A);
        s.Wxx = to_double(j.f20[2] + j.f21[2] * A);
        if (with_c) {
            const BPair b = aux_b(n.gamma, x, n.gamma_prime, c, p_);
            s.Wc = to_double(j.f21[0]) * (n.A_prime - b.b0 - b.b1 * n.A);
        }
    }

    ModelParams p_;
    CurvePair cp_;
    bool degenerate_ = false;
    std::vector<double> top_max_;  // max of ζ over nodes 0..i (rates ≥ c_i)
    double zeta_max_ = 0;
};

// ---- free-function interface ---------------------------------------------

inline double eval_value(const ValueSurface& s, double x, double c) { return s.evaluate(x, c).W; }

struct Partials {
    double Wx, Wxx, Wc;
};

inline Partials eval_partials(const ValueSurface& s, double x, double c, Side side = Side::Natural) {
    const SurfacePoint pt = s.evaluate(x, c, side);
    return {pt.Wx, pt.Wxx, pt.Wc};
}

inline double lookup_ell(const ValueSurface& s, double x, double c) { return s.ell(x, c); }

struct PolicyAction {
    enum Kind { PayReduced, PayCurrent, JumpTo } kind;
    double value;  // the rate paid, or the jump target
};

inline PolicyAction policy_action(const ValueSurface& s, double x, double c) {
    if (!(x >= 0)) fail(ErrorKind::DomainError, "x must be >= 0");
    const ModelParams& p = s.params();
    if (s.is_degenerate()) {
        if (c < p.cbar) return {PolicyAction::JumpTo, p.cbar};
        return {PolicyAction::PayCurrent, c};
    }
    const CurveNode n = s.node(c);
    if (x < n.gamma) return {PolicyAction::PayReduced, p.a * c};
    if (x < n.zeta || c >= p.cbar) return {PolicyAction::PayCurrent, c};
    const double l = s.ell(x, c);
    if (l > c) return {PolicyAction::JumpTo, l};
    return {PolicyAction::PayCurrent, c};
}

inline ValueSurface build_surface(const ModelParams& p, CurveOptions opt = {}) {
    validate(p);
    if (!p.interesting()) return ValueSurface::degenerate(p);
    return ValueSurface(solve_all(p, opt));
}

/// CSV `x,c,W,Wx,Wxx,Wc,region` over the product grid.
inline void write_surface_csv(std::ostream& os, const ValueSurface& s, const std::vector<double>& xs,
                              const std::vector<double>& cs) {
    os << "x,c,W,Wx,Wxx,Wc,region\n" << std::setprecision(17);
    for (double c : cs)
        for (double x : xs) {
            const SurfacePoint pt = s.evaluate(x, c);
            os << x << ',' << c << ',' << pt.W << ',' << pt.Wx << ',' << pt.Wxx << ',' << pt.Wc
               << ',' << region_name(pt.region) << '\n';
        }
}

}  // namespace drawdown
