// Model parameters, characteristic roots, constant-rate and refraction values,
// and the optimal refraction threshold b*(c̄).
#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "drawdown/errors.hpp"
#include "drawdown/numerics.hpp"

namespace drawdown {

struct ModelParams {
    double mu = 4.0;
    double sigma = 2.0;
    double q = 0.1;
    double a = 0.5;
    double cbar = 3.0;

    /// c̄ above qσ²/(2μ): paying the maximal rate everywhere is not optimal.
    bool interesting() const { return cbar > q * sigma * sigma / (2.0 * mu); }
    double regime_threshold() const { return q * sigma * sigma / (2.0 * mu); }

    ModelParams with_cbar(double c) const {
        ModelParams p = *this;
        p.cbar = c;
        return p;
    }
    ModelParams with_a(double v) const {
        ModelParams p = *this;
        p.a = v;
        return p;
    }
};

inline void validate(const ModelParams& p, bool need_diffusion = true) {
    auto bad = [](const std::string& m) { fail(ErrorKind::DomainError, m); };
    if (!(p.mu > 0) || !std::isfinite(p.mu)) bad("mu must be > 0");
    if (!(p.q > 0) || !std::isfinite(p.q)) bad("q must be > 0");
    if (!(p.cbar > 0) || !std::isfinite(p.cbar)) bad("cbar must be > 0");
    if (!(p.a > 0 && p.a < 1)) bad("a must lie in (0,1)");
    if (!(p.sigma >= 0) || !std::isfinite(p.sigma)) bad("sigma must be >= 0");
    if (need_diffusion && p.sigma == 0)
        fail(ErrorKind::DegenerateDiffusion, "sigma = 0; use the deterministic module");
}

// ---- canonical text form: key=value lines -------------------------------

inline ModelParams parse_params(std::istream& in) {
    std::map<std::string, double*> slots;
    ModelParams p;
    slots["mu"] = &p.mu;
    slots["sigma"] = &p.sigma;
    slots["q"] = &p.q;
    slots["a"] = &p.a;
    slots["cbar"] = &p.cbar;
    std::map<std::string, bool> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto trim = [](std::string s) {
            const char* ws = " \t\r\n";
            s.erase(0, s.find_first_not_of(ws));
            s.erase(s.find_last_not_of(ws) + 1);
            return s;
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::DomainError, "line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto it = slots.find(key);
        if (it == slots.end())
            fail(ErrorKind::DomainError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != val.size())
            fail(ErrorKind::DomainError, "line " + std::to_string(lineno) + ": bad number '" + val + "'");
        *it->second = v;
        seen[key] = true;
    }
    for (const auto& [k, _] : slots)
        if (!seen[k]) fail(ErrorKind::DomainError, "missing key '" + k + "'");
    return p;
}

inline std::string format_params(const ModelParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "mu=" << p.mu << "\nsigma=" << p.sigma << "\nq=" << p.q << "\na=" << p.a
       << "\ncbar=" << p.cbar << "\n";
    return os.str();
}

// ---- characteristic roots ------------------------------------------------

struct RootPair {
    double theta1;
    double theta2;
    double d;
};

/// Roots of (σ²/2)θ² + (μ−d)θ − q = 0, larger-magnitude root first.
inline RootPair characteristic_roots(double d, const ModelParams& p) {
    if (p.sigma <= 0) fail(ErrorKind::DegenerateDiffusion, "characteristic roots need sigma > 0");
    const double s2 = p.sigma * p.sigma;
    const double k = d - p.mu;
    const double disc = std::hypot(k, std::sqrt(2.0 * p.q) * p.sigma);
    const double prod = -2.0 * p.q / s2;
    RootPair r{0, 0, d};
    if (k >= 0) {
        r.theta1 = (k + disc) / s2;
        r.theta2 = prod / r.theta1;
    } else {
        r.theta2 = (k - disc) / s2;
        r.theta1 = prod / r.theta2;
    }
    return r;
}

/// √((μ−d)² + 2qσ²)
inline double root_gap(double d, const ModelParams& p) {
    return std::hypot(d - p.mu, std::sqrt(2.0 * p.q) * p.sigma);
}

/// dθ1/dd and dθ2/dd, written without the 1 ± (d−μ)/disc cancellation.
inline std::pair<double, double> root_slopes(double d, const ModelParams& p) {
    const RootPair r = characteristic_roots(d, p);
    const double disc = root_gap(d, p);
    return {r.theta1 / disc, -r.theta2 / disc};
}

// ---- constant rate -------------------------------------------------------

inline double constant_rate_value(double x, double d, const ModelParams& p) {
    if (x < 0) fail(ErrorKind::DomainError, "x must be >= 0");
    if (d < 0) fail(ErrorKind::DomainError, "rate must be >= 0");
    const double t2 = characteristic_roots(d, p).theta2;
    return -(d / p.q) * std::expm1(t2 * x);
}

// ---- refraction ----------------------------------------------------------

/// v(x, c̄, b) and its first two x-derivatives. Every exponential is taken
/// relative to e^{θ1(ac̄) b}, so all arguments stay non-positive.
struct RefractionEval {
    double v, vx, vxx;
};

inline RefractionEval refraction_eval(double x, double b, const ModelParams& p) {
    if (x < 0 || b < 0) fail(ErrorKind::DomainError, "x and b must be >= 0");
    const double ac = p.a * p.cbar;
    const RootPair lo = characteristic_roots(ac, p);
    const double t1 = lo.theta1, t2 = lo.theta2;
    const double s2 = characteristic_roots(p.cbar, p).theta2;
    const double q = p.q;

    const double num = ac * std::exp(t2 * b) * (t2 - s2) - (1 - p.a) * p.cbar * s2;
    const double r = std::exp((t2 - t1) * b);
    const double den = (t1 - s2) - r * (t2 - s2);  // e^{-t1 b}·(W0' − s2 W0)·gap

    if (x < b) {
        const double e1 = std::exp(t1 * (x - b));
        const double e2 = std::exp(t2 * x - t1 * b);
        const double k = num / (q * den);
        const double ex = std::exp(t2 * x);
        return {k * (e1 - e2) - (ac / q) * std::expm1(t2 * x),
                k * (t1 * e1 - t2 * e2) - (ac / q) * t2 * ex,
                k * (t1 * t1 * e1 - t2 * t2 * e2) - (ac / q) * t2 * t2 * ex};
    }
    const double bw0 = num / q * (1 - r) / den;  // B·W0(b)
    const double dd = bw0 - (ac / q) * std::exp(t2 * b) - (1 - p.a) * p.cbar / q;
    const double tail = dd * std::exp(s2 * (x - b));  // D e^{s2 x}
    return {p.cbar / q + tail, s2 * tail, s2 * s2 * tail};
}

inline double refraction_value(double x, double b, const ModelParams& p) {
    return refraction_eval(x, b, p).v;
}

/// E(c̄,b)/e^{θ1(ac̄)b}: the sign-carrying factor of ∂_b B(c̄, b).
inline double threshold_equation(double b, const ModelParams& p) {
    const RootPair lo = characteristic_roots(p.a * p.cbar, p);
    const double t1 = lo.theta1, t2 = lo.theta2;
    const double s2 = characteristic_roots(p.cbar, p).theta2;
    const double a = p.a;
    return (a - 1) * s2 * (s2 - t1) * t1 +
           std::exp((t2 - t1) * b) * (1 - a) * s2 * (s2 - t2) * t2 +
           std::exp(t2 * b) * a * (s2 - t2) * (s2 - t1) * (t2 - t1);
}

struct ThresholdOptions {
    double abs_tol = 1e-10;
    int scan_points = 4000;
    int max_doublings = 4;
};

inline double optimal_refraction_threshold(const ModelParams& p, ThresholdOptions opt = {}) {
    validate(p);
    if (!p.interesting()) return 0.0;
    auto f = [&](double b) { return threshold_equation(b, p); };
    double hi = 10.0 * p.mu / p.q;
    const double f0 = f(0.0);
    int doublings = 0;
    while (sign_bit_differs(f0, f(hi)) == false) {
        if (doublings++ >= opt.max_doublings) {
            std::vector<std::pair<double, double>> trace{{0.0, f0}, {hi, f(hi)}};
            throw ScanError(ErrorKind::BracketError,
                            "b* not bracketed in [0, " + std::to_string(hi) + "]", trace);
        }
        hi *= 2;
    }
    // single sign change on the bracket
    int changes = 0;
    double prev = f0, lo_b = 0, hi_b = hi;
    for (int i = 1; i <= opt.scan_points; ++i) {
        const double b = hi * i / opt.scan_points;
        const double v = f(b);
        if (sign_bit_differs(prev, v)) {
            if (changes == 0) {
                lo_b = hi * (i - 1) / opt.scan_points;
                hi_b = b;
            }
            ++changes;
        }
        prev = v;
    }
    if (changes != 1)
        fail(ErrorKind::BracketError,
             "threshold equation has " + std::to_string(changes) + " sign changes on [0, hi]");
    return refine_root(f, lo_b, hi_b, opt.abs_tol);
}

/// v^{c̄}(x) = v(x, c̄, b*(c̄)).
inline double capped_value(double x, const ModelParams& p) {
    return refraction_value(x, optimal_refraction_threshold(p), p);
}

}  // namespace drawdown
