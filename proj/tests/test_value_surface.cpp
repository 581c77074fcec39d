#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "drawdown/value_surface.hpp"

using namespace drawdown;

namespace {

ModelParams base(double a = 0.5, double cbar = 3) {
    ModelParams p;
    p.a = a;
    p.cbar = cbar;
    return p;
}

const ValueSurface& surface() {
    static const ValueSurface s = [] {
        CurveOptions o;
        o.stepper = Stepper::Heun;
        return build_surface(base(), o);
    }();
    return s;
}

double generator(const SurfacePoint& s, double d, const ModelParams& p) {
    return 0.5 * p.sigma * p.sigma * s.Wxx + (p.mu - d) * s.Wx - p.q * s.W + d;
}

// hand-built curves; only ℓ and the policy look at them
ValueSurface synthetic(std::vector<double> zeta) {
    CurvePair cp;
    cp.params = base();
    cp.c = {3, 2, 1, 0};
    cp.gamma = {1, 1, 1, 1};
    cp.zeta = std::move(zeta);
    cp.A = cp.A_prime = cp.gamma_prime = cp.zeta_prime = {0, 0, 0, 0};
    return ValueSurface(cp);
}

}  // namespace

TEST(Surface, ZeroAtOrigin) {
    const ValueSurface& s = surface();
    for (std::size_t i = 0; i < s.curves().size(); i += 50)
        EXPECT_NEAR(eval_value(s, 0, s.curves().c[i]), 0.0, 1e-12);
    EXPECT_NEAR(eval_value(s, 0, 0), 0.0, 1e-12);
}

TEST(Surface, Bounded) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    for (int j = 0; j <= 30; ++j)
        for (int i = 0; i <= 200; ++i) {
            const double W = eval_value(s, 0.5 * i, p.cbar * j / 30);
            EXPECT_GE(W, 0);
            EXPECT_LE(W, p.cbar / p.q);
        }
}

TEST(Surface, TopRowIsRefraction) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    const double b = optimal_refraction_threshold(p);
    for (int i = 1; i <= 300; ++i) {
        const double x = 0.1 * i, v = refraction_value(x, b, p);
        EXPECT_NEAR(eval_value(s, x, p.cbar), v, 1e-8 * v) << "x=" << x;
    }
}

TEST(Surface, ZeroRateRowIncreasesToCeiling) {
    const ValueSurface& s = surface();
    double prev = -1;
    for (int i = 0; i < 500; ++i) {
        const double W = eval_value(s, 60.0 * i / 499, 0);
        EXPECT_GE(W, prev);
        prev = W;
    }
    EXPECT_NEAR(prev, 30.0, 0.3);
}

TEST(Surface, SmoothPastingAtLowerCurve) {
    const ValueSurface& s = surface();
    const CurvePair& cp = s.curves();
    for (std::size_t i = 0; i < cp.size(); ++i) {
        const Partials lo = eval_partials(s, cp.gamma[i], cp.c[i], Side::Below);
        const Partials hi = eval_partials(s, cp.gamma[i], cp.c[i], Side::Above);
        EXPECT_NEAR(lo.Wx, 1.0, 1e-5) << "c=" << cp.c[i];
        EXPECT_NEAR(hi.Wx, 1.0, 1e-5) << "c=" << cp.c[i];
        EXPECT_LE(std::fabs(lo.Wxx - hi.Wxx), 1e-5 * std::max(std::fabs(lo.Wxx), std::fabs(hi.Wxx)));
    }
}

TEST(Surface, NoRateSensitivityAtUpperCurve) {
    const ValueSurface& s = surface();
    const CurvePair& cp = s.curves();
    for (std::size_t i = 1; i < cp.size(); ++i)
        EXPECT_LE(std::fabs(eval_partials(s, cp.zeta[i], cp.c[i]).Wc), 1e-4) << "c=" << cp.c[i];
}

TEST(Surface, PartialsMatchDifferences) {
    const ValueSurface& s = surface();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.1, 8.0), uc(0.05, 2.95);
    const double h = 1e-2, k = 1e-3;
    int n = 0;
    while (n < 50) {
        const double x = ux(rng), c = uc(rng);
        const CurveNode nd = s.node(c);
        if (std::fabs(x - nd.gamma) < 3 * h || std::fabs(x - nd.zeta) < 3 * h || x >= nd.zeta)
            continue;
        ++n;
        auto W = [&](double xx) { return eval_value(s, xx, c); };
        const double fx = (W(x - 2 * h) - 8 * W(x - h) + 8 * W(x + h) - W(x + 2 * h)) / (12 * h);
        const double fxx = (-W(x - 2 * h) + 16 * W(x - h) - 30 * W(x) + 16 * W(x + h) - W(x + 2 * h)) /
                           (12 * h * h);
        const double fc = (eval_value(s, x, c + k) - eval_value(s, x, c - k)) / (2 * k);
        const Partials d = eval_partials(s, x, c);
        EXPECT_NEAR(d.Wx, fx, 1e-6 * std::max(1.0, std::fabs(fx))) << x << ' ' << c;
        EXPECT_NEAR(d.Wxx, fxx, 1e-6 * std::max(1.0, std::fabs(fxx))) << x << ' ' << c;
        EXPECT_NEAR(d.Wc, fc, 5e-5) << x << ' ' << c;
    }
}

TEST(Surface, HjbEquationsHoldInTheirRegions) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    for (int j = 0; j <= 60; ++j) {
        const double c = p.cbar * j / 60;
        for (int i = 1; i <= 150; ++i) {
            const SurfacePoint pt = s.evaluate(0.06 * i, c);
            if (pt.region == Region::PayReduced)
                EXPECT_LE(std::fabs(generator(pt, p.a * c, p)), 1e-6 * p.cbar);
            else if (pt.region == Region::PayCurrent)
                EXPECT_LE(std::fabs(generator(pt, c, p)), 1e-6 * p.cbar);
        }
    }
}

TEST(Surface, NonIncreasingInRate) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    for (int i = 0; i <= 100; ++i) {
        const double x = 0.15 * i;
        double prev = INFINITY;
        for (int j = 0; j <= 60; ++j) {
            const double W = eval_value(s, x, p.cbar * j / 60);
            EXPECT_LE(W, prev + 1e-9);
            prev = W;
        }
    }
}

TEST(Surface, DominatesFloorRate) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    for (int j = 0; j <= 30; ++j)
        for (int i = 0; i <= 100; ++i) {
            const double x = 0.2 * i, c = p.cbar * j / 30;
            EXPECT_GE(eval_value(s, x, c), constant_rate_value(x, p.a * c, p) - 1e-10);
        }
}

TEST(Surface, EllOnSolvedCurves) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    EXPECT_EQ(lookup_ell(s, s.zeta_max(), 0.0), p.cbar);
    EXPECT_EQ(lookup_ell(s, s.zeta_max() + 5, 1.0), p.cbar);
    try {
        lookup_ell(s, 0.5 * s.node(1.0).zeta, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DomainError);
    }
    // ζ grows with c here, so ℓ inverts it
    for (double c : {0.0, 0.7, 1.9}) {
        const double z0 = s.node(c).zeta;
        for (double t : {0.1, 0.5, 0.9}) {
            const double x = z0 + t * (s.zeta_max() - z0);
            const double l = lookup_ell(s, x, c);
            EXPECT_GE(l, c);
            EXPECT_LE(l, p.cbar);
            EXPECT_NEAR(s.node(l).zeta, x, 1e-9);
        }
    }
}

TEST(Surface, EllOnSyntheticShapes) {
    const ValueSurface dec = synthetic({4, 5, 6, 7});  // ζ decreasing in c
    EXPECT_EQ(lookup_ell(dec, 7.0, 0.0), 3.0);
    EXPECT_EQ(lookup_ell(dec, 5.5, 1.5), 3.0);
    const PolicyAction pa = policy_action(dec, 7.0, 0.0);
    EXPECT_EQ(pa.kind, PolicyAction::JumpTo);
    EXPECT_EQ(pa.value, 3.0);

    const ValueSurface inc = synthetic({7, 6, 5, 4});
    EXPECT_NEAR(lookup_ell(inc, 5.5, 0.0), 1.5, 1e-12);
    EXPECT_NEAR(lookup_ell(inc, 4.0, 0.0), 0.0, 1e-12);
    EXPECT_EQ(lookup_ell(inc, 7.0, 0.0), 3.0);

    const ValueSurface bump = synthetic({5, 7, 4, 4.5});
    EXPECT_NEAR(lookup_ell(bump, 6.0, 0.0), 1.0 + 2.0 / 3.0, 1e-12);
    EXPECT_EQ(lookup_ell(bump, 8.0, 0.0), 3.0);
}

TEST(Surface, PolicyRegions) {
    const ValueSurface& s = surface();
    const ModelParams& p = s.params();
    const double c = 1.2;
    const CurveNode n = s.node(c);
    PolicyAction a = policy_action(s, n.gamma / 2, c);
    EXPECT_EQ(a.kind, PolicyAction::PayReduced);
    EXPECT_DOUBLE_EQ(a.value, p.a * c);
    a = policy_action(s, 0.5 * (n.gamma + n.zeta), c);
    EXPECT_EQ(a.kind, PolicyAction::PayCurrent);
    EXPECT_DOUBLE_EQ(a.value, c);
    a = policy_action(s, s.zeta_max() + 1, c);
    EXPECT_EQ(a.kind, PolicyAction::JumpTo);
    EXPECT_EQ(a.value, p.cbar);
    a = policy_action(s, s.zeta_max() + 1, p.cbar);
    EXPECT_EQ(a.kind, PolicyAction::PayCurrent);
    EXPECT_THROW(policy_action(s, -1, c), Error);
}

TEST(Surface, ChangeRegionUsesTarget) {
    const ValueSurface& s = surface();
    const double c = 0.5, x = 0.5 * (s.node(c).zeta + s.zeta_max());
    const SurfacePoint pt = s.evaluate(x, c);
    EXPECT_EQ(pt.region, Region::Change);
    EXPECT_EQ(pt.Wc, 0.0);
    EXPECT_NEAR(pt.W, eval_value(s, x, lookup_ell(s, x, c)), 1e-9);
}

TEST(Surface, QueriesOutsideTheSolvedRange) {
    CurveOptions o;
    o.n_steps = 100;
    o.c_low = 1.5;
    const ValueSurface s = build_surface(base(), o);
    try {
        eval_value(s, 1.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::QueryBelowTruncation);
    }
    EXPECT_NO_THROW(eval_value(s, 1.0, 1.5));
    EXPECT_THROW(eval_value(s, 1.0, 3.5), Error);
    EXPECT_THROW(eval_value(s, -0.1, 2.0), Error);

    CurvePair bare = s.curves();
    bare.A.clear();
    EXPECT_THROW(ValueSurface{bare}, Error);
}

TEST(Surface, DegenerateRegime) {
    const ModelParams p = base(0.5, 0.04);
    const ValueSurface s = build_surface(p);
    ASSERT_TRUE(s.is_degenerate());
    const double t2 = characteristic_roots(p.cbar, p).theta2;
    for (double x : {0.0, 0.3, 2.0, 15.0}) {
        const double U = p.cbar / p.q * (1 - std::exp(t2 * x));
        for (double c : {0.0, 0.02, 0.04}) EXPECT_NEAR(eval_value(s, x, c), U, 1e-12);
    }
    EXPECT_EQ(s.evaluate(1.0, 0.01).region, Region::Change);
    EXPECT_EQ(policy_action(s, 1.0, 0.01).kind, PolicyAction::JumpTo);
    EXPECT_THROW(ValueSurface::degenerate(base()), Error);
}

TEST(Surface, CsvExport) {
    std::ostringstream os;
    write_surface_csv(os, surface(), {0.0, 1.0, 5.0}, {0.0, 3.0});
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,c,W,Wx,Wxx,Wc,region");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 6);
}
