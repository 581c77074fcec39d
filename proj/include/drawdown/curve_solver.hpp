// Backward integration of the two-curve ODE system and of A(c).
#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "drawdown/boundary.hpp"
#include "drawdown/closed_forms.hpp"
#include "drawdown/model.hpp"

namespace drawdown {

enum class Stepper { Euler, Heun };

struct CurveOptions {
    int n_steps = 2000;
    double c_low = 0.0;
    Stepper stepper = Stepper::Euler;
    bool project = true;
    double drift_tol = 1e-5;  // |C0| ≤ drift_tol·|C22| after projection
    DiffOptions diff{};
};

struct StepDiagnostic {
    double c = 0;
    double C11 = 0, C22 = 0;
    double C0_before = 0;  // constraint residual before projection
    double C0_after = 0;
    bool projected = false;
    bool endpoint = false;  // slopes carried over from the previous node (c = 0)
};

struct CurvePair {
    ModelParams params;
    std::vector<double> c;  // descending from c̄
    std::vector<double> gamma, zeta, A;
    std::vector<double> gamma_prime, zeta_prime, A_prime;  // ODE right-hand sides at the nodes
    std::vector<StepDiagnostic> diagnostics;
    bool truncated = false;
    std::string truncation_reason;

    std::size_t size() const { return c.size(); }
    double c_top() const { return c.front(); }
    double c_bottom() const { return c.back(); }
};

struct CurveSlopes {
    double gamma_prime, zeta_prime;
    VariationalC C;
};

inline CurveSlopes curve_rhs(double y, double z, double c, const ModelParams& p,
                             const DiffOptions& o = {}) {
    const VariationalC C = variational_C(y, z, c, p, o);
    CurveSlopes s;
    s.C = C;
    s.gamma_prime = C.C10 / C.C11;
    s.zeta_prime = (C.C20 * C.C11 - C.C21 * C.C10) / (C.C11 * C.C22);
    return s;
}

/// A(c̄) = B(c̄, b)/√((μ−ac̄)² + 2qσ²).
inline double terminal_A(const ModelParams& p, double b) {
    const double ac = p.a * p.cbar;
    const RootPair lo = characteristic_roots(ac, p);
    const double t1 = lo.theta1, t2 = lo.theta2;
    const double s2 = characteristic_roots(p.cbar, p).theta2;
    const double num = ac * std::exp(t2 * b) * (t2 - s2) - (1 - p.a) * p.cbar * s2;
    const double den = (t1 - s2) - std::exp((t2 - t1) * b) * (t2 - s2);
    return to_double(XReal(num) / (XReal(p.q * den) * XReal::exp(t1 * b)));
}

/// A' = b0 + b1·A at a node.
inline double A_rhs(double y, double z, double w, double c, double A, const ModelParams& p) {
    const BPair b = aux_b(y, z, w, c, p);
    return b.b0 + b.b1 * A;
}

/// γ and ζ from c̄ down to c_low. A is filled by solve_A.
inline CurvePair solve_curves(const ModelParams& p, CurveOptions opt = {}) {
    validate(p);
    if (!p.interesting()) fail(ErrorKind::RegimeError, "curves need cbar > q sigma^2 / (2 mu)");
    if (opt.n_steps < 1) fail(ErrorKind::DomainError, "n_steps must be >= 1");
    if (!(opt.c_low >= 0 && opt.c_low < p.cbar)) fail(ErrorKind::DomainError, "need 0 <= c_low < cbar");

    CurvePair cp;
    cp.params = p;
    const double b = optimal_refraction_threshold(p);
    const double z = solve_zstar(p, b);
    const double dc = (p.cbar - opt.c_low) / opt.n_steps;

    double y = b, zz = z;
    double prev_C11 = 0, prev_C22 = 0;
    CurveSlopes prev_slopes{};
    for (int i = 0; i <= opt.n_steps; ++i) {
        const double c = (i == opt.n_steps) ? opt.c_low : p.cbar - i * dc;
        StepDiagnostic dg;
        dg.c = c;

        if (i > 0 && opt.project) {
            dg.C0_before = C0(y, zz, c, p);
            const double c22 = derivative([&](double t) { return C0(y, t, c, p); }, zz, opt.diff);
            if (std::fabs(c22) >= 1e-8) {
                const double step = dg.C0_before / c22;
                zz -= step;
                dg.projected = true;
            }
        }

        CurveSlopes s;
        try {
            // C11 and C10 both vanish at c = 0; the last node keeps the previous slopes
            if (c <= 0 && i > 0) {
                s = prev_slopes;
                s.C.C0 = C0(y, zz, c, p);
                dg.endpoint = true;
            } else {
                s = curve_rhs(y, zz, c, p, opt.diff);
            }
        } catch (const Error& e) {
            if (i == 0) throw;
            cp.truncated = true;
            cp.truncation_reason = std::string("rhs evaluation failed at c=") + std::to_string(c) +
                                   ": " + e.what();
            break;
        }
        dg.C11 = s.C.C11;
        dg.C22 = s.C.C22;
        dg.C0_after = s.C.C0;
        if (i > 0 && dg.projected && std::fabs(s.C.C0) > opt.drift_tol * std::fabs(s.C.C22)) {
            fail(ErrorKind::ConstraintDrift,
                 "C0 residual " + std::to_string(s.C.C0) + " at c=" + std::to_string(c));
        }
        const bool singular = s.C.C11 == 0 || s.C.C22 == 0 || !std::isfinite(s.gamma_prime) ||
                              !std::isfinite(s.zeta_prime) ||
                              (i > 0 && (sign_bit_differs(s.C.C11, prev_C11) ||
                                         sign_bit_differs(s.C.C22, prev_C22)));
        if (singular) {
            if (i == 0) fail(ErrorKind::SingularCoefficient, "C11*C22 vanishes at cbar");
            cp.truncated = true;
            cp.truncation_reason = "SingularCoefficient: C11 or C22 changed sign at c=" +
                                   std::to_string(c);
            break;
        }
        if (zz < y) {
            cp.truncated = true;
            cp.truncation_reason = "curves crossed (zeta < gamma) at c=" + std::to_string(c);
            break;
        }
        prev_C11 = s.C.C11;
        prev_C22 = s.C.C22;
        prev_slopes = s;

        cp.c.push_back(c);
        cp.gamma.push_back(y);
        cp.zeta.push_back(zz);
        cp.gamma_prime.push_back(s.gamma_prime);
        cp.zeta_prime.push_back(s.zeta_prime);
        cp.diagnostics.push_back(dg);
        if (i == opt.n_steps) break;

        const double c_next = (i + 1 == opt.n_steps) ? opt.c_low : p.cbar - (i + 1) * dc;
        const double h = c_next - c;  // negative
        double y_next = y + h * s.gamma_prime;
        double z_next = zz + h * s.zeta_prime;
        if (opt.stepper == Stepper::Heun) {
            try {
                const CurveSlopes s2 =
                    c_next <= 0 ? s : curve_rhs(y_next, z_next, c_next, p, opt.diff);
                y_next = y + 0.5 * h * (s.gamma_prime + s2.gamma_prime);
                z_next = zz + 0.5 * h * (s.zeta_prime + s2.zeta_prime);
            } catch (const Error&) {
                // corrector unavailable; keep the Euler predictor
            }
        }
        y = y_next;
        zz = z_next;
    }
    return cp;
}

/// Integrates A' = b0(γ,ζ,γ',c) + b1(γ,ζ,γ',c)·A backward from A(c̄).
inline void solve_A(CurvePair& cp, Stepper stepper = Stepper::Euler) {
    const ModelParams& p = cp.params;
    const std::size_t n = cp.size();
    if (n == 0) fail(ErrorKind::DomainError, "empty curve grid");
    cp.A.assign(n, 0.0);
    cp.A_prime.assign(n, 0.0);
    cp.A[0] = terminal_A(p, cp.gamma[0]);
    auto coeffs = [&](std::size_t i) {
        return aux_b(cp.gamma[i], cp.zeta[i], cp.gamma_prime[i], cp.c[i], p);
    };
    BPair bi = coeffs(0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        cp.A_prime[i] = bi.b0 + bi.b1 * cp.A[i];
        const double h = cp.c[i + 1] - cp.c[i];
        const BPair bn = coeffs(i + 1);
        if (stepper == Stepper::Euler) {
            cp.A[i + 1] = cp.A[i] + h * cp.A_prime[i];
        } else {
            const double pred = cp.A[i] + h * cp.A_prime[i];
            cp.A[i + 1] = cp.A[i] + 0.5 * h * (cp.A_prime[i] + bn.b0 + bn.b1 * pred);
        }
        bi = bn;
    }
    cp.A_prime[n - 1] = bi.b0 + bi.b1 * cp.A[n - 1];
}

inline CurvePair solve_all(const ModelParams& p, CurveOptions opt = {}) {
    CurvePair cp = solve_curves(p, opt);
    solve_A(cp, opt.stepper);
    return cp;
}

// ---- CSV ------------------------------------------------------------------

inline void write_curves_csv(std::ostream& os, const CurvePair& cp) {
    os << "c,gamma,zeta,A\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < cp.size(); ++i)
        os << cp.c[i] << ',' << cp.gamma[i] << ',' << cp.zeta[i] << ',' << cp.A[i] << '\n';
}

/// Reads `c,gamma,zeta,A` rows and recomputes the node right-hand sides.
inline CurvePair read_curves_csv(std::istream& in, const ModelParams& p,
                                 const DiffOptions& o = {}) {
    CurvePair cp;
    cp.params = p;
    std::string line;
    if (!std::getline(in, line) || line.rfind("c,gamma,zeta,A", 0) != 0)
        fail(ErrorKind::InvariantViolation, "curves file: bad header");
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        double v[4];
        char comma;
        if (!(ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3]))
            fail(ErrorKind::InvariantViolation, "curves file: bad row " + std::to_string(row));
        if (v[2] < v[1])
            fail(ErrorKind::InvariantViolation,
                 "curves file: zeta < gamma at row " + std::to_string(row));
        if (!cp.c.empty() && !(v[0] < cp.c.back()))
            fail(ErrorKind::InvariantViolation, "curves file: c not descending");
        cp.c.push_back(v[0]);
        cp.gamma.push_back(v[1]);
        cp.zeta.push_back(v[2]);
        cp.A.push_back(v[3]);
    }
    if (cp.c.size() < 2) fail(ErrorKind::InvariantViolation, "curves file: fewer than two rows");
    if (std::fabs(cp.c.front() - p.cbar) > 1e-9 * p.cbar)
        fail(ErrorKind::InvariantViolation, "curves file: first c differs from cbar");
    if (cp.c_bottom() > 0) {
        cp.truncated = true;
        cp.truncation_reason = "curves file ends at c=" + std::to_string(cp.c_bottom());
    }
    CurveSlopes s{};
    for (std::size_t i = 0; i < cp.size(); ++i) {
        if (cp.c[i] > 0 || i == 0) s = curve_rhs(cp.gamma[i], cp.zeta[i], cp.c[i], p, o);
        cp.gamma_prime.push_back(s.gamma_prime);
        cp.zeta_prime.push_back(s.zeta_prime);
        cp.A_prime.push_back(A_rhs(cp.gamma[i], cp.zeta[i], s.gamma_prime, cp.c[i], cp.A[i], p));
    }
    return cp;
}

}  // namespace drawdown
