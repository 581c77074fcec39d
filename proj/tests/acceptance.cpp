// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "drawdown/drawdown.hpp"

using namespace drawdown;

namespace {

ModelParams model(double a, double cbar) {
    ModelParams p;
    p.a = a;
    p.cbar = cbar;
    return p;
}

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            note << " [fail: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.note << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %s:%s\n", id, o.pass ? "PASS" : "FAIL", o.note.str().c_str());
    std::fflush(stdout);
}

const std::map<double, ValueSurface>& surfaces() {
    static const std::map<double, ValueSurface> s = [] {
        std::map<double, ValueSurface> m;
        CurveOptions o;
        o.stepper = Stepper::Heun;
        for (double a : {0.2, 0.5, 0.8}) m.emplace(a, ValueSurface(solve_all(model(a, 3), o)));
        return m;
    }();
    return s;
}

// smallest c̄ in [lo, hi] at which x* exists, from a scan refined by bisection
double xstar_onset(double a, double lo, double hi, double step) {
    auto has = [&](double cb) { return solve_xstar(model(a, cb)).xstar.has_value(); };
    double prev = lo;
    for (double cb = lo; cb <= hi; cb += step) {
        if (has(cb)) {
            double l = prev, h = cb;
            while (h - l > 1e-3) {
                const double m = 0.5 * (l + h);
                (has(m) ? h : l) = m;
            }
            return h;
        }
        prev = cb;
    }
    return NAN;
}

}  // namespace

int main() {
    std::printf("parameters: mu=4 sigma=2 q=0.1\n");

    report(1, [](Outcome& o) {
        for (auto [a, target] : {std::pair{0.5, 96.57}, {0.8, 84.72}, {0.07, 191.2}}) {
            const ModelParams p = model(a, 1e4);
            const double z = solve_zstar(p);
            const double lim = p.mu / p.q * (1 + 1 / std::sqrt(a));
            const double pl = asymptotic_predictions(p).limit;
            o.note << " a=" << a << " z*=" << z << " (target " << target << ")";
            o.check(std::fabs(z - target) <= 0.01 * target, "z* a=" + std::to_string(a));
            o.check(std::fabs(pl - lim) <= 4 * DBL_EPSILON * lim, "limit a=" + std::to_string(a));
        }
    });

    report(2, [](Outcome& o) {
        for (double a : {0.07, 0.5, 0.8}) {
            const double lim = asymptotic_predictions(model(a, 1)).limit;
            o.note << " a=" << a << " limit=" << lim << " z*:";
            for (double cb : {50.0, 100.0, 500.0, 1000.0}) {
                const double z = solve_zstar(model(a, cb));
                o.note << ' ' << z;
                const bool side = a < 1.0 / 9 ? z > lim : z < lim;
                o.check(side, "a=" + std::to_string(a) + " cbar=" + std::to_string(cb) +
                                  (a < 1.0 / 9 ? " not above limit" : " not below limit"));
            }
        }
    });

    report(3, [](Outcome& o) {
        const ModelParams p = model(0.5, 1000);
        const double s2 = p.sigma * p.sigma;
        const AsymptoticPredictions ap = asymptotic_predictions(p);
        const double bcoef = (p.mu * p.mu + p.a * p.q * s2) / (2 * p.a * p.q);
        const double bs = std::fabs(optimal_refraction_threshold(p) - p.mu / p.q) * p.cbar;
        o.note << " |b*-mu/q|*cbar=" << bs << " vs " << bcoef;
        o.check(std::fabs(bs - bcoef) <= 0.15 * bcoef, "b* coefficient");
        const double zs = std::fabs(solve_zstar(p) - ap.limit) * p.cbar;
        const double zc = std::fabs(ap.zstar_coef);
        o.note << "; |z*-limit|*cbar=" << zs << " vs " << zc;
        o.check(std::fabs(zs - zc) <= 0.15 * zc, "z* coefficient");
        const BoundaryValues bv = solve_boundary(p.with_cbar(100));
        const double gap = bv.xstar ? bv.zstar - *bv.xstar : NAN;
        const double want = s2 / (2 * 100.0);
        o.note << "; z*-x* at cbar=100: " << gap << " vs " << want;
        o.check(std::fabs(gap - want) <= 0.2 * want, "z*-x*");
    });

    report(4, [](Outcome& o) {
        for (auto [a, target] : {std::pair{0.07, 5.17}, {0.5, 3.45}, {0.8, 2.52}}) {
            const double on = xstar_onset(a, 1.0, 8.0, 0.02);
            o.note << " a=" << a << " onset=" << on << " (target " << target << ")";
            o.check(std::fabs(on - target) <= 0.1, "onset a=" + std::to_string(a));
        }
    });

    report(5, [](Outcome& o) {
        for (const auto& [a, s] : surfaces()) {
            const ModelParams& p = s.params();
            const std::string tag = " a=" + std::to_string(a);
            const double z = solve_zstar(p);  // throws unless exactly one sign change
            const CurvePair& cp = s.curves();
            o.check(!cp.truncated && cp.c_bottom() == 0.0, "full range" + tag);
            bool ordered = true, nonsingular = true;
            for (std::size_t i = 0; i < cp.size(); ++i) {
                ordered = ordered && cp.gamma[i] <= cp.zeta[i];
                const StepDiagnostic& d = cp.diagnostics[i];
                nonsingular = nonsingular && d.C11 * d.C22 != 0 &&
                              !sign_bit_differs(d.C11, cp.diagnostics[0].C11) &&
                              !sign_bit_differs(d.C22, cp.diagnostics[0].C22);
            }
            o.check(ordered, "gamma <= zeta" + tag);
            o.check(nonsingular, "C11*C22 != 0" + tag);
            const VerificationReport r = check_supersolution(s);
            const VerificationReport m = check_marginal_conditions(s);
            o.check(r.pass, "supersolution" + tag);
            o.check(m.pass, "marginal" + tag);
            o.note << tag << ": z*=" << z << " nodes=" << cp.size()
                   << " max L^c=" << r.max_residual_Lc.value
                   << " max L^ac=" << r.max_residual_Lac.value << " max Wc=" << r.max_Wc.value
                   << " marginal violations=" << m.marginal_violations;
        }
    });

    report(6, [](Outcome& o) {
        const auto& S = surfaces();
        const ModelParams p0 = model(0.5, 3);
        const double u = unconstrained_threshold(p0);
        const ModelParams free = p0.with_a(0);
        const double top = p0.cbar / p0.q;
        bool order = true, ceiling = true, bounded = true;
        for (int i = 0; i <= 600; ++i) {
            const double x = 0.1 * i;
            const double w2 = eval_value(S.at(0.2), x, 0), w5 = eval_value(S.at(0.5), x, 0),
                         w8 = eval_value(S.at(0.8), x, 0);
            const double v0 = refraction_eval(x, u, free).v;
            order = order && w2 >= w5 - 1e-12 && w5 >= w8 - 1e-12;
            ceiling = ceiling && std::max({w2, w5, w8}) <= v0 + 1e-12;
            bounded = bounded && v0 <= top;
        }
        o.check(order, "W(a=0.2) >= W(a=0.5) >= W(a=0.8)");
        o.check(ceiling, "below the a=0 value");
        o.check(bounded, "bounded by cbar/q");
        o.note << " W(60,0):";
        for (const auto& [a, s] : S) {
            const double w = eval_value(s, 60, 0);
            o.note << " a=" << a << ' ' << w;
            o.check(std::fabs(w - top) <= 0.01 * top, "limit a=" + std::to_string(a));
        }
        o.note << " a=0 " << refraction_eval(60, u, free).v;
    });

    report(7, [](Outcome& o) {
        const ModelParams p = model(0.5, 3);
        SimOptions so;  // 1e5 paths
        const double exact = constant_rate_value(10, 3, p);
        const SimulationResult cr = simulate(ConstantRate{3}, p, 10, 0, so);
        const double zc = (cr.estimate - exact) / cr.std_error;
        o.note << " constant d=3 x0=10: z=" << zc << ';';
        o.check(std::fabs(zc) <= 3, "constant-rate oracle");

        const ValueSurface& s = surfaces().at(0.5);
        const double b2 = 2 * optimal_refraction_threshold(p);
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> ux(0.5, 8.0), uc(0.0, p.cbar);
        double worst = 0, worst_sub = -INFINITY;
        for (int k = 0; k < 20; ++k) {
            const double x = ux(rng), c = uc(rng);
            const double W = eval_value(s, x, c);
            const SimulationResult tc = simulate(TwoCurve{&s}, p, x, c, so);
            const double z = (tc.estimate - W) / tc.std_error;
            worst = std::max(worst, std::fabs(z));
            o.check(std::fabs(z) <= 3, "two-curve at (" + std::to_string(x) + "," + std::to_string(c) + ")");
            const SimulationResult sub = simulate(Refraction{b2}, p, x, c, so);
            const double zs = (sub.estimate - W) / sub.std_error;
            worst_sub = std::max(worst_sub, zs);
            o.check(zs <= 3, "refraction 2b* beats W at (" + std::to_string(x) + "," + std::to_string(c) + ")");
        }
        o.note << " two-curve max |z|=" << worst << " over 20 points; refraction(2b*) max z=" << worst_sub;
    });

    report(8, [](Outcome& o) {
        for (const auto& [a, s] : surfaces()) {
            VerificationReport r;
            GridSpec g;
            g.nc = 1;
            g.nx = 2;
            r = check_marginal_conditions(s, g);
            o.note << " a=" << a << ": |Wx-1|=" << r.smooth_pasting_gap.value
                   << " Wxx jump=" << r.wxx_jump.value << " |Wc(zeta)|=" << r.wc_at_zeta.value;
            const std::string tag = " a=" + std::to_string(a);
            o.check(r.smooth_pasting_gap.value <= 1e-5, "Wx(gamma)" + tag);
            o.check(r.wxx_jump.value <= 1e-5, "Wxx jump" + tag);
            o.check(r.wc_at_zeta.value <= 1e-4, "Wc(zeta)" + tag);
        }
    });

    report(9, [](Outcome& o) {
        DetParams d;  // mu=4, q=0.1, a=0.5, cbar=100
        const double x = 50, b = det_optimal_b(d);
        int best = 0;
        double fb = -INFINITY;
        for (int i = 0; i <= 1000000; ++i) {
            const double v = det_refraction_value(x, x * i / 1000000, d);
            if (v > fb) {
                fb = v;
                best = i;
            }
        }
        const double brute = x * best / 1000000;
        o.note << " b*=" << b << " brute=" << brute;
        o.check(std::fabs(b - brute) <= 1e-4 * std::max(1.0, b), "argmax");

        DetParams big = d;
        big.cbar = 1e5;
        const double k = det_expansion_coefficient(x, big);
        const double got = (det_refraction_value(x, det_optimal_b(big), big) - x) * big.cbar;
        o.note << "; coefficient " << got << " vs " << k;
        o.check(std::fabs(got - k) <= 0.05 * std::fabs(k), "expansion");

        DetParams huge = d;
        huge.cbar = 1e6;
        const double X = det_indifference_x(huge), bh = det_optimal_b(huge);
        auto f = [&](double xx) { return det_refraction_value(xx, bh, huge) - xx; };
        const bool flips = f(X * (1 - 1e-3)) > 0 && f(X * (1 + 1e-3)) < 0;
        boost::uintmax_t it = 200;
        const auto r = boost::math::tools::toms748_solve(f, X * (1 - 1e-3), X * (1 + 1e-3),
                                                         boost::math::tools::eps_tolerance<double>(50), it);
        o.note << "; sign flip at " << 0.5 * (r.first + r.second) << " vs " << X;
        o.check(flips, "sign flip brackets indifference level");
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
