// Monte Carlo estimate of the expected discounted dividends of a drawdown
// strategy under dX = (μ − D)dt + σ dB, absorbed at the first passage below 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <type_traits>
#include <variant>

#include <boost/random/normal_distribution.hpp>

#include "json.hpp"

#include "drawdown/model.hpp"
#include "drawdown/value_surface.hpp"

namespace drawdown {

struct ConstantRate {
    double d;
};
/// a·c̄ below b, c̄ from b upward.
struct Refraction {
    double b;
};
struct TwoCurve {
    const ValueSurface* surface;
};
/// Pays the whole surplus at once and is ruined immediately.
struct LumpSumNow {};

using StrategySpec = std::variant<ConstantRate, Refraction, TwoCurve, LumpSumNow>;

inline std::string strategy_name(const StrategySpec& s) {
    return std::visit(
        [](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantRate>) return "constant";
            else if constexpr (std::is_same_v<V, Refraction>) return "refraction";
            else if constexpr (std::is_same_v<V, TwoCurve>) return "two-curve";
            else return "lump-sum";
        },
        s);
}

struct SimOptions {
    double dt = 1e-3;        // step near any barrier of the strategy
    double dt_max = 0.5;     // step far from every barrier
    double safety = 5.0;     // barrier distance in units of σ√dt
    double horizon = 0;      // 0: 3/q·ln(10³)
    long n_paths = 100000;
    std::uint64_t seed = 1;
    bool adaptive = true;
    bool bridge = true;      // Brownian-bridge ruin probability inside a step
    std::ostream* trace = nullptr;  // CSV rows path,t,X,R,D
    long trace_paths = 1;
};

struct SimulationResult {
    double estimate = 0;
    double std_error = 0;
    long n_paths = 0;
    double mean_ruin_time = 0;  // over paths ruined before the horizon
    double fraction_ruined_by_horizon = 0;
    std::uint64_t seed = 0;
    std::string rng = "mt19937_64 seeded per path by splitmix64; boost ziggurat normal";
    double dt = 0, dt_max = 0, horizon = 0;
    bool adaptive = true, bridge = true;
    std::string strategy;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
    return splitmix64(splitmix64(seed) ^ path);
}

/// Raising the running maximum pays nothing by itself.
inline double jump_dividend(double r_old, double r_new) {
    if (!(r_new > r_old)) fail(ErrorKind::DomainError, "jump needs r_new > r_old");
    return 0.0;
}

/// ∫_t^{t+h} e^{−qs} D ds
inline double discounted_flow(double D, double t, double h, double q) {
    return D * std::exp(-q * t) * (-std::expm1(-q * h)) / q;
}

namespace detail {

/// Rate to pay at (x, R) and the nearest barrier where that rate changes.
struct Decision {
    double rate;
    double running_max;
    double barrier_gap;
};

class Policy {
public:
    Policy(const StrategySpec& s, const ModelParams& p) : s_(s), p_(p) {}

    void reset() { cached_ = -1; }

    Decision decide(double x, double R) {
        if (auto* c = std::get_if<ConstantRate>(&s_)) return {c->d, std::max(R, c->d), x};
        if (auto* r = std::get_if<Refraction>(&s_)) {
            const double d = x < r->b ? p_.a * p_.cbar : p_.cbar;
            return {d, std::max(R, d), std::min(x, std::fabs(x - r->b))};
        }
        const ValueSurface& vs = *std::get<TwoCurve>(s_).surface;
        if (vs.is_degenerate()) return {p_.cbar, p_.cbar, x};
        refresh(vs, R);
        if (x >= node_.zeta && R < p_.cbar) {
            const double l = vs.ell(x, R);
            if (l > R) {
                jump_dividend(R, l);
                R = l;
                refresh(vs, R);
            }
        }
        double gap = std::min(x, std::fabs(x - node_.gamma));
        if (R < p_.cbar && x < node_.zeta) gap = std::min(gap, node_.zeta - x);
        if (x < node_.gamma) return {p_.a * R, R, gap};
        return {R, R, gap};
    }

private:
    void refresh(const ValueSurface& vs, double R) {
        if (R != cached_) {
            node_ = vs.node(R);
            cached_ = R;
        }
    }

    const StrategySpec& s_;
    ModelParams p_;
    double cached_ = -1;
    CurveNode node_{};
};

}  // namespace detail

inline SimulationResult simulate(const StrategySpec& strategy, const ModelParams& p, double x0,
                                 double c0, SimOptions opt = {}) {
    validate(p);
    if (!(x0 >= 0)) fail(ErrorKind::DomainError, "x0 must be >= 0");
    if (!(c0 >= 0 && c0 <= p.cbar)) fail(ErrorKind::DomainError, "c0 must lie in [0, cbar]");
    if (!(opt.dt > 0) || opt.n_paths < 2) fail(ErrorKind::DomainError, "need dt > 0 and n_paths >= 2");
    if (opt.horizon <= 0) opt.horizon = 3.0 / p.q * std::log(1e3);
    if (std::exp(-p.q * opt.horizon) >= 1e-3)
        fail(ErrorKind::DomainError, "horizon too short: discount factor at horizon must be < 1e-3");
    opt.dt_max = std::max(opt.dt_max, opt.dt);
    if (auto* tc = std::get_if<TwoCurve>(&strategy); tc && tc->surface == nullptr)
        fail(ErrorKind::DomainError, "two-curve strategy without a surface");

    SimulationResult res;
    res.n_paths = opt.n_paths;
    res.seed = opt.seed;
    res.dt = opt.dt;
    res.dt_max = opt.adaptive ? opt.dt_max : opt.dt;
    res.horizon = opt.horizon;
    res.adaptive = opt.adaptive;
    res.bridge = opt.bridge;
    res.strategy = strategy_name(strategy);

    if (std::holds_alternative<LumpSumNow>(strategy)) {
        res.estimate = x0;
        res.fraction_ruined_by_horizon = 1;
        return res;
    }

    const double s2 = p.sigma * p.sigma;
    detail::Policy policy(strategy, p);
    boost::random::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    double sum = 0, sum_sq = 0, ruin_sum = 0;
    long ruined = 0;

    for (long i = 0; i < opt.n_paths; ++i) {
        std::mt19937_64 rng(path_seed(opt.seed, static_cast<std::uint64_t>(i)));
        normal.reset();
        policy.reset();
        const bool tracing = opt.trace && i < opt.trace_paths;
        double x = x0, R = c0, t = 0, pv = 0;
        bool dead = x <= 0;
        double t_ruin = 0;
        while (!dead && t < opt.horizon) {
            const detail::Decision dec = policy.decide(x, R);
            const double D = dec.rate;
            R = dec.running_max;
            if (D < p.a * R * (1 - 1e-12) || D > p.cbar * (1 + 1e-12) || D < 0)
                fail(ErrorKind::InadmissibleRate, "rate " + std::to_string(D) + " outside [" +
                                                      std::to_string(p.a * R) + ", " +
                                                      std::to_string(p.cbar) + "]");
            const double m = p.mu - D;
            double h = opt.dt;
            if (opt.adaptive) {
                const double g = dec.barrier_gap;
                h = std::min({opt.dt_max, std::pow(g / (opt.safety * p.sigma), 2),
                              m != 0 ? 0.5 * g / std::fabs(m) : opt.dt_max});
                h = std::max(h, opt.dt);
            }
            h = std::min(h, opt.horizon - t);
            if (tracing) *opt.trace << i << ',' << t << ',' << x << ',' << R << ',' << D << '\n';
            const double x1 = x + m * h + p.sigma * std::sqrt(h) * normal(rng);
            if (x1 <= 0) {
                const double frac = x / (x - x1);
                pv += discounted_flow(D, t, frac * h, p.q);
                t_ruin = t + frac * h;
                dead = true;
            } else if (opt.bridge && unif(rng) < std::exp(-2 * x * x1 / (s2 * h))) {
                pv += discounted_flow(D, t, 0.5 * h, p.q);
                t_ruin = t + 0.5 * h;
                dead = true;
            } else {
                pv += discounted_flow(D, t, h, p.q);
                x = x1;
                t += h;
            }
        }
        if (x0 <= 0) t_ruin = 0;
        if (dead) {
            ++ruined;
            ruin_sum += t_ruin;
        }
        sum += pv;
        sum_sq += pv * pv;
    }
    const double n = static_cast<double>(opt.n_paths);
    res.estimate = sum / n;
    const double var = std::max(0.0, (sum_sq - n * res.estimate * res.estimate) / (n - 1));
    res.std_error = std::sqrt(var / n);
    res.fraction_ruined_by_horizon = ruined / n;
    res.mean_ruin_time = ruined ? ruin_sum / ruined : 0.0;
    return res;
}

inline nlohmann::json to_json(const SimulationResult& r) {
    return {{"strategy", r.strategy},
            {"estimate", r.estimate},
            {"std_error", r.std_error},
            {"n_paths", r.n_paths},
            {"mean_ruin_time", r.mean_ruin_time},
            {"fraction_ruined_by_horizon", r.fraction_ruined_by_horizon},
            {"seed", r.seed},
            {"rng", r.rng},
            {"dt", r.dt},
            {"dt_max", r.dt_max},
            {"horizon", r.horizon},
            {"adaptive", r.adaptive},
            {"bridge", r.bridge}};
}

}  // namespace drawdown
