// Small numeric helpers: sign-change scans, bracketed refinement, and
// Richardson-extrapolated central differences.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "drawdown/errors.hpp"
#include "drawdown/xreal.hpp"

namespace drawdown {

inline bool sign_bit_differs(double a, double b) { return std::signbit(a) != std::signbit(b); }

struct SignScan {
    std::vector<std::pair<double, double>> trace;
    std::vector<std::size_t> changes;  // index i: sign differs between trace[i-1] and trace[i]
};

/// Samples f at n+1 equally spaced points of [lo, hi].
template <class F>
SignScan scan_signs(F&& f, double lo, double hi, int n) {
    SignScan s;
    s.trace.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        s.trace.emplace_back(x, f(x));
        if (i > 0 && sign_bit_differs(s.trace[i - 1].second, s.trace[i].second))
            s.changes.push_back(i);
    }
    return s;
}

/// Refines a sign change of f on [lo, hi] to the given absolute tolerance.
template <class F>
double refine_root(F&& f, double lo, double hi, double abs_tol) {
    auto tol = [abs_tol](double l, double h) { return std::fabs(h - l) <= abs_tol; };
    std::uintmax_t iters = 300;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (r.first + r.second);
}

struct DiffOptions {
    double min_step = 1e-5;
    double rel_step = 1e-7;
    double rtol = 1e-6;  // tolerated Richardson disagreement, relative
    double atol = 0.0;   // absolute floor added to the relative scale
};

inline double fd_step(double x, const DiffOptions& o) {
    return std::max(o.min_step, o.rel_step * std::fabs(x));
}

template <class T>
double magnitude(const T& v) {
    if constexpr (std::is_same_v<T, XReal>)
        return static_cast<double>(abs(v).to_long_double());
    else
        return std::fabs(v);
}

/// d/dx f at x: five-point stencils at h and h/2 combined by Richardson.
/// Tries a few step scalings; throws StepCollapse when none is consistent.
template <class F>
auto derivative(F&& f, double x, const DiffOptions& o = {}) {
    using T = std::decay_t<decltype(f(x))>;
    const double h0 = fd_step(x, o);
    auto d5 = [&](double h) -> T {
        return (f(x - 2 * h) - f(x + 2 * h) + T(8.0) * (f(x + h) - f(x - h))) / T(12.0 * h);
    };
    double best_gap = INFINITY;
    T best{};
    for (double scale : {1.0, 8.0, 0.125, 64.0}) {
        const double h = h0 * scale;
        const T coarse = d5(h);
        const T fine = d5(h / 2);
        const T rich = (T(16.0) * fine - coarse) / T(15.0);
        const double gap = magnitude(T(fine - coarse));
        const double ref = o.rtol * (magnitude(rich) + o.atol);
        if (gap <= ref) return rich;
        const double rel = gap / (magnitude(rich) + o.atol + 1e-300);
        if (rel < best_gap) {
            best_gap = rel;
            best = rich;
        }
    }
    throw Error(ErrorKind::StepCollapse,
                "Richardson disagreement " + std::to_string(best_gap) + " at x=" + std::to_string(x));
}

/// Plain five-point central difference, no extrapolation.
template <class F>
double central5(F&& f, double x, double h) {
    return (f(x - 2 * h) - f(x + 2 * h) + 8.0 * (f(x + h) - f(x - h))) / (12.0 * h);
}

}  // namespace drawdown
