// Appendix formulas: d, b00, b01, b10, b11, b0/b1, the basis functions
// f10, f11, f20, f21 and the variational coefficients C0, C1j, C2j.
//
// Every formula takes its four exponentials
//   E1 = e^{(z−y)θ1(c)}, E2 = e^{(z−y)θ2(c)}, P1 = e^{yθ1(ac)}, P2 = e^{yθ2(ac)}
// as inputs. Evaluated with the true exponentials it is the formula; evaluated
// with E1, E2 ∈ {0, 1} it yields the coefficients of the expansion in the
// z-dependent exponentials, which is how C0 and its leading-order
// cancellation are handled exactly.
#pragma once

#include <cmath>

#include "drawdown/errors.hpp"
#include "drawdown/model.hpp"
#include "drawdown/numerics.hpp"
#include "drawdown/xreal.hpp"

namespace drawdown {

/// Roots and root slopes at rates c and a·c.
struct RateCoeffs {
    double c, a, q;
    double t1c, t2c, t1a, t2a;      // θ1(c), θ2(c), θ1(ac), θ2(ac)
    double dt1c, dt2c, dt1a, dt2a;  // θ′ evaluated at c and at ac
    double D;                       // θ1(c) − θ2(c)
};

inline RateCoeffs rate_coeffs(double c, const ModelParams& p) {
    RateCoeffs k{};
    k.c = c;
    k.a = p.a;
    k.q = p.q;
    const RootPair hi = characteristic_roots(c, p);
    const RootPair lo = characteristic_roots(p.a * c, p);
    k.t1c = hi.theta1;
    k.t2c = hi.theta2;
    k.t1a = lo.theta1;
    k.t2a = lo.theta2;
    std::tie(k.dt1c, k.dt2c) = root_slopes(c, p);
    std::tie(k.dt1a, k.dt2a) = root_slopes(p.a * c, p);
    k.D = k.t1c - k.t2c;
    return k;
}

template <class T>
struct Expos {
    T E1, E2, P1, P2;
};

template <class T>
Expos<T> make_expos(const RateCoeffs& k, double y, double u) {
    return {exp_as<T>(u * k.t1c), exp_as<T>(u * k.t2c), exp_as<T>(y * k.t1a),
            exp_as<T>(y * k.t2a)};
}

// ---- transcriptions ------------------------------------------------------
// u = z − y throughout; the appendix writes both (z−y) and (−y+z).

template <class T>
T d_terms(const RateCoeffs& k, const Expos<T>& X) {
    const auto& [E1, E2, P1, P2] = X;
    return P2 * E1 * T(k.t2c) - E1 * P1 * T(k.t2c) + E2 * P2 * T(k.t2a) - P2 * E1 * T(k.t2a) +
           E2 * (P1 - P2) * T(k.t1c) + P1 * (E1 - E2) * T(k.t1a);
}

template <class T>
T b00_terms(const RateCoeffs& k, double y, double u, const Expos<T>& X) {
    const auto& [E1, E2, P1, P2] = X;
    const double a = k.a, c = k.c, D = k.D;
    const double t1c = k.t1c, t2c = k.t2c, t2a = k.t2a;
    const double dt1c = k.dt1c, dt2c = k.dt2c, dt2a = k.dt2a;
    const double a2c = a * a * c;
    const T Pm = P2 - T(1.0);                         // −1 + e^{yθ2(ac)}
    const T low = T(c) + T(a * c) * Pm;               // c + ac(−1 + e^{yθ2(ac)})
    T r = T(a * t2a * (t2c - t1c)) * E2 * P2 - T(t2c * D) * E1;
    r -= T(a * t2c * D) * E1 * Pm;
    r += T(a * t2a * D) * P2 * E1 + T(t1c * D) * E2;
    r += T(a * t1c * D) * E2 * Pm;
    r += T(-D * D) - E1 * low * T(D * dt2c);
    r += E2 * T(u * D * dt2c) * (T(-a * c * t2a) * P2 + (T(c) + T(a * c) * Pm) * T(t1c));
    r += T(a2c * (t2c - t1c) * dt2a) * E2 * P2 + T(a2c * y * t2a * (t2c - t1c) * dt2a) * E2 * P2;
    r += T(a2c * D * dt2a) * P2 * E1 - T(a2c * y * t2c * D * dt2a) * P2 * E1;
    r += T(a2c * y * t2a * D * dt2a) * P2 * E1 + T(a2c * y * t1c * D * dt2a) * E2 * P2;
    r += E2 * low * T(D * dt1c);
    r += T(-c * u * D * dt1c) * E1 * (T(t2c) + T(a * t2c) * Pm - T(a * t2a) * P2);
    r += E1 * ((T(c) + T(a * c) * Pm) * T(t2c) - T(a * c * t2a) * P2) * T(dt1c - dt2c);
    r += T(c) * E2 * (T(a * t2a) * P2 + (T(-1 + a) - T(a) * P2) * T(t1c)) * T(dt1c - dt2c);
    return r;
}

template <class T>
T b01_term(const RateCoeffs& k, const T& P2) {
    const double a = k.a, t1c = k.t1c, t2c = k.t2c, t2a = k.t2a;
    const T inner = T(a * t2a * (t2a - t2c)) * P2 +
                    (T(t2c) + T(a * t2c) * (P2 - T(1.0)) - T(a * t2a) * P2) * T(t1c);
    return T(k.c * k.D) * inner;
}

template <class T>
T b10_terms(const RateCoeffs& k, double y, double u, const Expos<T>& X) {
    const auto& [E1, E2, P1, P2] = X;
    const double a = k.a, D = k.D;
    const double t1c = k.t1c, t2c = k.t2c, t1a = k.t1a, t2a = k.t2a;
    const double dt1c = k.dt1c, dt2c = k.dt2c, dt1a = k.dt1a, dt2a = k.dt2a;
    const T dP = P1 - P2;
    T r = E2 * dP * T((t2c - t1c) * dt1c);
    r += E1 * T(u * D * dt1c) * (T(-t1a) * P1 + dP * T(t2c) + T(t2a) * P2);
    r += T(-a * D * dt1a) * E1 * P1 + T(a * D * dt1a) * P1 * E2;
    r -= T(a * y * t1a * D * dt1a) * E1 * P1;
    r += T(a * y * t1a * D * dt1a) * P1 * E2;
    r -= E2 * ((P2 - P1) * T(t1c) + P1 * T(t1a) - P2 * T(t2a)) * T(dt1c - dt2c);
    r += E1 * (P1 * T(t1a) + (P2 - P1) * T(t2c) - P2 * T(t2a)) * T(dt1c - dt2c);
    r += E1 * dP * T(D * dt2c);
    r += E2 * T(u * D * dt2c) * ((P2 - P1) * T(t1c) + P1 * T(t1a) - P2 * T(t2a));
    r += T(a * D * dt2a) * E1 * P2;
    r += T(a * (t2c - t1c) * dt2a) * E2 * P2 + T(a * y * D * t2a * dt2a) * E1 * P2;
    r += T(a * y * (t2c - t1c) * t2a * dt2a) * E2 * P2;
    r -= T(a * y * t1c * D) * E2 * (P1 * T(dt1a) - P2 * T(dt2a));
    r += T(a * y * D * t2c) * E1 * (P1 * T(dt1a) - P2 * T(dt2a));
    return r;
}

template <class T>
T b11_term(const RateCoeffs& k, const T& P1, const T& P2) {
    const double t1c = k.t1c, t2c = k.t2c, t1a = k.t1a, t2a = k.t2a;
    return T(-k.D) * (P1 * T((t1a - t1c) * (t1a - t2c)) + P2 * T((t2c - t2a) * (t2a - t1c)));
}

// ---- public evaluators -----------------------------------------------------

inline void check_T(double y, double z) {
    if (!(y > 0) || !(z >= y)) fail(ErrorKind::DomainError, "need 0 < y <= z");
}

/// d(y,z,c) > 0, in extended range.
template <class T = XReal>
T aux_d(double y, double z, double c, const ModelParams& p) {
    check_T(y, z);
    const RateCoeffs k = rate_coeffs(c, p);
    return d_terms(k, make_expos<T>(k, y, z - y));
}

template <class T = XReal>
T aux_b00(double y, double z, double c, const ModelParams& p) {
    const RateCoeffs k = rate_coeffs(c, p);
    return b00_terms(k, y, z - y, make_expos<T>(k, y, z - y));
}

template <class T = XReal>
T aux_b10(double y, double z, double c, const ModelParams& p) {
    const RateCoeffs k = rate_coeffs(c, p);
    return b10_terms(k, y, z - y, make_expos<T>(k, y, z - y));
}

template <class T = XReal>
T aux_b01(double y, double c, const ModelParams& p) {
    const RateCoeffs k = rate_coeffs(c, p);
    return b01_term(k, exp_as<T>(y * k.t2a));
}

template <class T = XReal>
T aux_b11(double y, double c, const ModelParams& p) {
    const RateCoeffs k = rate_coeffs(c, p);
    return b11_term(k, exp_as<T>(y * k.t1a), exp_as<T>(y * k.t2a));
}

struct BPair {
    double b0, b1;
};

/// b0, b1 of the two-curve construction; affine in w.
inline BPair aux_b(double y, double z, double w, double c, const ModelParams& p) {
    check_T(y, z);
    const RateCoeffs k = rate_coeffs(c, p);
    const Expos<XReal> X = make_expos<XReal>(k, y, z - y);
    const XReal d = d_terms(k, X);
    const XReal dE = X.E1 - X.E2;
    const XReal n0 = b00_terms(k, y, z - y, X) + XReal(w) * dE * b01_term(k, X.P2);
    const XReal n1 = b10_terms(k, y, z - y, X) + XReal(w) * dE * b11_term(k, X.P1, X.P2);
    return {to_double(n0 / (XReal(k.q * k.D) * d)), to_double(n1 / (XReal(k.D) * d))};
}

struct BasisF {
    double f10;
    XReal f11, f20, f21;
};

inline BasisF basis_f(double y, double x, double c, const ModelParams& p) {
    if (x < 0 || !(y > 0)) fail(ErrorKind::DomainError, "need x >= 0 and y > 0");
    const RateCoeffs k = rate_coeffs(c, p);
    const double a = k.a;
    const Expos<XReal> X = make_expos<XReal>(k, y, x - y);
    BasisF f;
    f.f10 = -(c * a / k.q) * std::expm1(k.t2a * x);
    f.f11 = XReal::exp(k.t1a * x) - XReal::exp(k.t2a * x);
    const XReal m1 = XReal((a - 1) * k.t2c) + XReal(a * (k.t2a - k.t2c)) * X.P2;
    const XReal m2 = XReal(-a * k.t2a) * X.P2 + XReal(k.t1c) * (XReal(1 - a) + XReal(a) * X.P2);
    f.f20 = XReal(c / (k.q * (k.t2c - k.t1c))) * (XReal(k.t2c - k.t1c) + X.E1 * m1 + X.E2 * m2);
    f.f21 = d_terms(k, X) / XReal(k.D);
    return f;
}

/// Basis functions with x-derivatives (orders 0..2) and analytic c-derivatives
/// of the lower pair.
struct BasisJet {
    double f10[3];
    XReal f11[3], f20[3], f21[3];
    double f10c;
    XReal f11c;
};

inline BasisJet basis_jet(double y, double x, double c, const ModelParams& p) {
    const RateCoeffs k = rate_coeffs(c, p);
    const double a = k.a, q = k.q;
    BasisJet j;
    const double e2 = std::exp(k.t2a * x);
    const XReal g1 = XReal::exp(k.t1a * x), g2 = XReal::exp(k.t2a * x);
    j.f10[0] = -(c * a / q) * std::expm1(k.t2a * x);
    j.f10[1] = -(c * a / q) * k.t2a * e2;
    j.f10[2] = -(c * a / q) * k.t2a * k.t2a * e2;
    j.f11[0] = g1 - g2;
    j.f11[1] = XReal(k.t1a) * g1 - XReal(k.t2a) * g2;
    j.f11[2] = XReal(k.t1a * k.t1a) * g1 - XReal(k.t2a * k.t2a) * g2;
    j.f10c = -(a / q) * std::expm1(k.t2a * x) - (c * a / q) * x * a * k.dt2a * e2;
    j.f11c = XReal(x * a) * (XReal(k.dt1a) * g1 - XReal(k.dt2a) * g2);

    const double u = x - y;
    const Expos<XReal> X = make_expos<XReal>(k, y, u);
    const XReal m1 = XReal((a - 1) * k.t2c) + XReal(a * (k.t2a - k.t2c)) * X.P2;
    const XReal m2 = XReal(-a * k.t2a) * X.P2 + XReal(k.t1c) * (XReal(1 - a) + XReal(a) * X.P2);
    const XReal K(c / (q * (k.t2c - k.t1c)));
    const XReal al1 = X.P2 * XReal(k.t2c - k.t2a) + X.P1 * XReal(k.t1a - k.t2c);
    const XReal al2 = X.P2 * XReal(k.t2a - k.t1c) + X.P1 * XReal(k.t1c - k.t1a);
    const XReal iD(1.0 / k.D);
    double p1 = 1, p2 = 1;
    for (int n = 0; n < 3; ++n) {
        const XReal A = X.E1 * XReal(p1), B = X.E2 * XReal(p2);
        j.f20[n] = K * ((n == 0 ? XReal(k.t2c - k.t1c) : XReal(0.0)) + A * m1 + B * m2);
        j.f21[n] = iD * (A * al1 + B * al2);
        p1 *= k.t1c;
        p2 *= k.t2c;
    }
    return j;
}

// ---- C0 through its expansion in the z-dependent exponentials -------------

/// Numerator of C0 = Num/d² written as
///   Num = E1²K2 + E1E2 K11 + E2² K22 + E1 K1 + E2 K21
/// with coefficients depending on (y, c) and polynomially on u = z − y.
struct C0Expansion {
    XReal E1, E2, d, alpha1;
    XReal K2, K11, K22, K1, K21;

    XReal numerator() const {
        return E1 * E1 * K2 + E1 * E2 * K11 + E2 * E2 * K22 + E1 * K1 + E2 * K21;
    }
    /// C0 itself.
    XReal value() const { return numerator() / (d * d); }
    /// (Num − E1²K2)/(E1·α1²): E1·C0 with the leading-order term removed,
    /// where d ≈ E1·α1 for large E1.
    XReal reduced() const {
        return (E2 * K11 + E2 * E2 / E1 * K22 + K1 + E2 / E1 * K21) / (alpha1 * alpha1);
    }
};

inline C0Expansion c0_expansion(double y, double z, double c, const ModelParams& p) {
    check_T(y, z);
    const RateCoeffs k = rate_coeffs(c, p);
    const double u = z - y;
    const XReal P1 = XReal::exp(y * k.t1a), P2 = XReal::exp(y * k.t2a);
    auto ex = [&](double e1, double e2) { return Expos<XReal>{XReal(e1), XReal(e2), P1, P2}; };

    const XReal alpha1 = d_terms(k, ex(1, 0)), alpha2 = d_terms(k, ex(0, 1));
    const XReal n0 = b00_terms(k, y, u, ex(0, 0));
    const XReal n1 = b00_terms(k, y, u, ex(1, 0)) - n0;
    const XReal n2 = b00_terms(k, y, u, ex(0, 1)) - n0;
    const XReal n1p = b00_terms(k, y, u + 1, ex(1, 0)) - n0 - n1;
    const XReal n2p = b00_terms(k, y, u + 1, ex(0, 1)) - n0 - n2;
    const XReal g0 = b10_terms(k, y, u, ex(0, 0));
    const XReal g1 = b10_terms(k, y, u, ex(1, 0)) - g0;
    const XReal g2 = b10_terms(k, y, u, ex(0, 1)) - g0;
    const XReal g1p = b10_terms(k, y, u + 1, ex(1, 0)) - g0 - g1;
    const XReal g2p = b10_terms(k, y, u + 1, ex(0, 1)) - g0 - g2;
    const XReal b11 = b11_term(k, P1, P2), b01 = b01_term(k, P2);
    const XReal D(k.D);

    C0Expansion e;
    e.E1 = XReal::exp(u * k.t1c);
    e.E2 = XReal::exp(u * k.t2c);
    e.d = e.E1 * alpha1 + e.E2 * alpha2;
    e.alpha1 = alpha1;
    e.K2 = alpha1 * (b11 * n1p - b01 * g1p);
    e.K11 = b11 * (n1p * alpha2 + n2p * alpha1 + D * (n1 * alpha2 - n2 * alpha1)) -
            b01 * (g1p * alpha2 + g2p * alpha1 + D * (g1 * alpha2 - g2 * alpha1));
    e.K22 = alpha2 * (b11 * n2p - b01 * g2p);
    // b10 carries no z-free term; g0 only absorbs rounding
    e.K1 = -(b11 * n0 - b01 * g0) * XReal(k.t1c) * alpha1;
    e.K21 = -(b11 * n0 - b01 * g0) * XReal(k.t2c) * alpha2;
    return e;
}

/// C0(y,z,c), with ∂z of b00/d and b10/d taken exactly from the expansion.
inline double C0(double y, double z, double c, const ModelParams& p) {
    return to_double(c0_expansion(y, z, c, p).value());
}

/// Leading-order coefficient K2(y,c); vanishes at y = b*(c).
inline XReal C0_leading(double y, double c, const ModelParams& p) {
    return c0_expansion(y, y, c, p).K2;
}

/// C0 with the leading-order term removed, rescaled by d²/(E1 α1²). At y = b*(c)
/// its zeros in z coincide with those of C0.
inline double C0_reduced(double y, double z, double c, const ModelParams& p) {
    return to_double(c0_expansion(y, z, c, p).reduced());
}

/// C0 straight from its definition: central differences in z of b00/d, b10/d.
inline double C0_by_differences(double y, double z, double c, const ModelParams& p,
                                DiffOptions o = {}) {
    const RateCoeffs k = rate_coeffs(c, p);
    auto ratio = [&](bool zero, double zz) {
        const Expos<XReal> X = make_expos<XReal>(k, y, zz - y);
        const XReal num = zero ? b00_terms(k, y, zz - y, X) : b10_terms(k, y, zz - y, X);
        return num / d_terms(k, X);
    };
    const XReal P1 = XReal::exp(y * k.t1a), P2 = XReal::exp(y * k.t2a);
    const XReal r0 = derivative([&](double zz) { return ratio(true, zz); }, z, o);
    const XReal r1 = derivative([&](double zz) { return ratio(false, zz); }, z, o);
    return to_double(b11_term(k, P1, P2) * r0 - b01_term(k, P2) * r1);
}

struct VariationalC {
    double C0, C10, C11, C20, C21, C22;
};

inline double C10(double y, double z, double c, const ModelParams& p, DiffOptions o = {}) {
    const RateCoeffs k = rate_coeffs(c, p);
    auto ratio = [&](bool zero, double yy) {
        const Expos<XReal> X = make_expos<XReal>(k, yy, z - yy);
        const XReal num = zero ? b00_terms(k, yy, z - yy, X) : b10_terms(k, yy, z - yy, X);
        return num / d_terms(k, X);
    };
    const XReal P1 = XReal::exp(y * k.t1a), P2 = XReal::exp(y * k.t2a);
    const XReal r0 = derivative([&](double yy) { return ratio(true, yy); }, y, o);
    const XReal r1 = derivative([&](double yy) { return ratio(false, yy); }, y, o);
    return to_double(b01_term(k, P2) * r1 - b11_term(k, P1, P2) * r0);
}

inline double C11(double y, double z, double c, const ModelParams& p, DiffOptions o = {}) {
    const RateCoeffs k = rate_coeffs(c, p);
    auto ratio = [&](bool first, double yy) {
        const Expos<XReal> X = make_expos<XReal>(k, yy, z - yy);
        const XReal m = first ? b01_term(k, X.P2) : b11_term(k, X.P1, X.P2);
        return (X.E1 - X.E2) * m / d_terms(k, X);
    };
    const XReal P1 = XReal::exp(y * k.t1a), P2 = XReal::exp(y * k.t2a);
    const XReal r01 = derivative([&](double yy) { return ratio(true, yy); }, y, o);
    const XReal r11 = derivative([&](double yy) { return ratio(false, yy); }, y, o);
    return to_double(b11_term(k, P1, P2) * r01 - b01_term(k, P2) * r11);
}

inline VariationalC variational_C(double y, double z, double c, const ModelParams& p,
                                  DiffOptions o = {}) {
    check_T(y, z);
    VariationalC v{};
    v.C0 = C0(y, z, c, p);
    v.C10 = C10(y, z, c, p, o);
    v.C11 = C11(y, z, c, p, o);
    v.C21 = derivative([&](double yy) { return C0(yy, z, c, p); }, y, o);
    v.C22 = derivative([&](double zz) { return C0(y, zz, c, p); }, z, o);
    v.C20 = -derivative([&](double cc) { return C0(y, z, cc, p); }, c, o);
    return v;
}

}  // namespace drawdown
