// The σ = 0 model: surplus grows at rate μ − D, so a refracted payout is a
// deterministic two-phase run to ruin.
#pragma once

#include <cmath>

#include "drawdown/errors.hpp"

namespace drawdown {

struct DetParams {
    double mu = 4.0;
    double q = 0.1;
    double a = 0.5;
    double cbar = 100.0;
};

inline void validate(const DetParams& d) {
    if (!(d.mu > 0) || !(d.q > 0)) fail(ErrorKind::DomainError, "mu and q must be > 0");
    if (!(d.a > 0 && d.a < 1)) fail(ErrorKind::DomainError, "a must lie in (0,1)");
    if (!(d.cbar > d.mu) || !std::isfinite(d.cbar))
        fail(ErrorKind::DomainError, "deterministic refraction needs cbar > mu");
}

/// Pay c̄ down to b, then a·c̄ until ruin (or forever when a·c̄ ≤ μ).
inline double det_refraction_value(double x, double b, const DetParams& d) {
    validate(d);
    if (!(b >= 0) || !(x >= b)) fail(ErrorKind::DomainError, "need x >= b >= 0");
    const double q = d.q, ac = d.a * d.cbar;
    const double first_leg = std::exp(-q * (x - b) / (d.cbar - d.mu));
    const double high = -(d.cbar / q) * std::expm1(-q * (x - b) / (d.cbar - d.mu));
    const double low = ac > d.mu ? -(ac / q) * std::expm1(-q * b / (ac - d.mu)) : ac / q;
    return high + first_leg * low;
}

inline double det_optimal_b(const DetParams& d) {
    validate(d);
    const double ac = d.a * d.cbar;
    if (!(ac > d.mu)) fail(ErrorKind::RegimeError, "optimal switch level needs a*cbar > mu");
    return (ac - d.mu) / d.q * std::log1p(d.mu / (ac - d.mu));
}

/// (μ/q)(1 + 1/√a): above it the lump sum x beats the refracted payout for large c̄.
inline double det_indifference_x(const DetParams& d) {
    if (!(d.a > 0 && d.a < 1)) fail(ErrorKind::DomainError, "a must lie in (0,1)");
    return d.mu / d.q * (1 + 1 / std::sqrt(d.a));
}

/// Coefficient of 1/c̄ in the expansion of det_refraction_value(x, b*) − x.
inline double det_expansion_coefficient(double x, const DetParams& d) {
    const double a = d.a, q = d.q, mu = d.mu;
    return (2 * a * x * q * mu - a * x * x * q * q + mu * mu * (1 - a)) / (2 * a * q);
}

}  // namespace drawdown
