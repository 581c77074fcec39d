// drawdown: command-line front end.
//
//   drawdown solve       --a 0.5 --cbar 3 [--steps N --stepper euler|heun]
//   drawdown verify      --curves curves.csv
//   drawdown value       --x-grid 0:60:500 --c 0
//   drawdown simulate    --strategy two-curve --x0 10 --c0 0 --paths 100000 --seed 7
//   drawdown det         --a 0.5 --cbar 100 --x 50
//   drawdown asymptotics --a 0.5 --cbar-grid 10,100,1000
//
// Exit codes: 0 ok, 2 verification failed, 3 numerical error, 4 usage error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drawdown/drawdown.hpp"

using namespace drawdown;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kVerifyFail = 2, kNumeric = 3, kUsage = 4;

struct ModelFlags {
    std::optional<double> mu, sigma, q, a, cbar;
    std::string config;

    ModelParams resolve() const {
        ModelParams p;
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) fail(ErrorKind::DomainError, "cannot open config '" + config + "'");
            p = parse_params(in);
        }
        if (mu) p.mu = *mu;
        if (sigma) p.sigma = *sigma;
        if (q) p.q = *q;
        if (a) p.a = *a;
        if (cbar) p.cbar = *cbar;
        return p;
    }
};

struct Grid {
    double lo = 0, hi = 0;
    int n = 1;

    std::vector<double> points() const {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        return v;
    }
};

Grid parse_grid(const std::string& s) {
    Grid g;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.n) || c1 != ':' || c2 != ':' || g.n < 1 || !in.eof())
        fail(ErrorKind::DomainError, "grid '" + s + "' is not lo:hi:n");
    return g;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double x = 0;
        try {
            x = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) fail(ErrorKind::DomainError, "bad number '" + tok + "'");
        v.push_back(x);
    }
    if (v.empty()) fail(ErrorKind::DomainError, "empty list");
    return v;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::DomainError:
        case ErrorKind::DegenerateDiffusion:
        case ErrorKind::RegimeError: return kUsage;
        default: return kNumeric;
    }
}

json error_json(const Error& e) {
    json j = {{"error", kind_name(e.kind())}, {"message", e.what()}};
    if (auto* s = dynamic_cast<const ScanError*>(&e)) {
        json tr = json::array();
        for (const auto& [x, f] : s->trace()) tr.push_back({x, f});
        if (tr.size() > 200) tr = json::array();  // only short traces are useful on stderr
        j["trace"] = tr;
    }
    return j;
}

void emit(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) fail(ErrorKind::DomainError, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

json num_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Stepper parse_stepper(const std::string& s) {
    if (s == "euler") return Stepper::Euler;
    if (s == "heun") return Stepper::Heun;
    fail(ErrorKind::DomainError, "stepper must be euler or heun");
}

CurvePair load_curves(const std::string& path, const ModelParams& p) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DomainError, "cannot open curves file '" + path + "'");
    return read_curves_csv(in, p);
}

ValueSurface surface_for(const ModelParams& p, const std::string& curves_path, int steps,
                         const std::string& stepper) {
    validate(p);
    if (!p.interesting()) return ValueSurface::degenerate(p);
    if (!curves_path.empty()) return ValueSurface(load_curves(curves_path, p));
    CurveOptions o;
    o.n_steps = steps;
    o.stepper = parse_stepper(stepper.empty() ? "heun" : stepper);
    return ValueSurface(solve_all(p, o));
}

json params_json(const ModelParams& p) {
    return {{"mu", p.mu}, {"sigma", p.sigma}, {"q", p.q}, {"a", p.a}, {"cbar", p.cbar}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal dividends under a drawdown constraint"};
    app.require_subcommand(1);
    app.fallthrough();

    ModelFlags mf;
    app.add_option("--mu", mf.mu, "drift");
    app.add_option("--sigma", mf.sigma, "volatility");
    app.add_option("--q", mf.q, "discount rate");
    app.add_option("--a", mf.a, "drawdown fraction in (0,1)");
    app.add_option("--cbar", mf.cbar, "maximal dividend rate");
    app.add_option("--config", mf.config, "key=value parameter file");

    int steps = 2000;
    std::string stepper;  // solve: euler; solving in place elsewhere: heun
    std::string curves_path, out_path;

    auto* solve = app.add_subcommand("solve", "boundary values and the two curves");
    std::string boundary_path = "boundary.json", curves_out = "curves.csv";
    solve->add_option("--steps", steps, "Euler/Heun steps over [0, cbar]");
    solve->add_option("--stepper", stepper, "euler (default) or heun");
    solve->add_option("--out-curves", curves_out, "curves CSV");
    solve->add_option("--out-boundary", boundary_path, "boundary JSON");

    auto* verify = app.add_subcommand("verify", "check the optimality conditions");
    GridSpec grid;
    Tolerances tol;
    verify->add_option("--curves", curves_path, "curves CSV from solve");
    verify->add_option("--steps", steps, "steps if solving in place");
    verify->add_option("--stepper", stepper, "stepper if solving in place (default heun)");
    verify->add_option("--nx", grid.nx, "x points");
    verify->add_option("--nc", grid.nc, "c points");
    verify->add_option("--x-max", grid.x_max, "x range (default 3 zeta(cbar))");
    verify->add_option("--tol", tol.residual, "residual tolerance (default 1e-5 cbar)");
    verify->add_option("--out", out_path, "report JSON (default stdout)");

    auto* value = app.add_subcommand("value", "evaluate W on a grid");
    std::string xgrid = "0:60:500", cgrid;
    double cval = 0;
    value->add_option("--curves", curves_path, "curves CSV from solve");
    value->add_option("--steps", steps, "steps if solving in place");
    value->add_option("--stepper", stepper, "stepper if solving in place (default heun)");
    value->add_option("--x-grid", xgrid, "lo:hi:n");
    auto* copt = value->add_option("--c", cval, "single rate");
    value->add_option("--c-grid", cgrid, "lo:hi:n")->excludes(copt);
    value->add_option("--out", out_path, "CSV (default stdout)");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo value of a strategy");
    std::string strategy = "two-curve", trace_path;
    double x0 = 10, c0 = 0, rate = 0, bthr = -1;
    SimOptions so;
    bool no_adaptive = false, no_bridge = false;
    sim->add_option("--strategy", strategy, "constant, refraction, two-curve or lump-sum");
    sim->add_option("--rate", rate, "rate of the constant strategy");
    sim->add_option("--b", bthr, "refraction threshold (default b*)");
    sim->add_option("--x0", x0, "initial surplus");
    sim->add_option("--c0", c0, "initial running maximum rate");
    sim->add_option("--paths", so.n_paths, "number of paths");
    sim->add_option("--seed", so.seed, "seed");
    sim->add_option("--dt", so.dt, "time step near barriers");
    sim->add_option("--dt-max", so.dt_max, "time step far from barriers");
    sim->add_option("--horizon", so.horizon, "time horizon (default 3/q ln 1000)");
    sim->add_flag("--no-adaptive", no_adaptive, "fixed time step");
    sim->add_flag("--no-bridge", no_bridge, "ruin only at step ends");
    sim->add_option("--curves", curves_path, "curves CSV for two-curve");
    sim->add_option("--steps", steps, "steps if solving in place");
    sim->add_option("--stepper", stepper, "stepper if solving in place (default heun)");
    sim->add_option("--trace", trace_path, "CSV trace of the first path");
    sim->add_option("--out", out_path, "JSON (default stdout)");

    auto* det = app.add_subcommand("det", "deterministic (sigma = 0) formulas");
    std::optional<double> dx, db;
    det->add_option("--x", dx, "surplus");
    det->add_option("--b", db, "switch level (default the optimal one)");
    det->add_option("--out", out_path, "JSON (default stdout)");

    auto* asym = app.add_subcommand("asymptotics", "b*, z*, x* and their large-cbar expansions");
    std::string cbar_grid = "10,100,1000";
    asym->add_option("--cbar-grid", cbar_grid, "comma-separated cbar values");
    asym->add_option("--out", out_path, "CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*det) {
            DetParams d;
            const ModelParams p = mf.resolve();
            d.mu = p.mu;
            d.q = p.q;
            d.a = p.a;
            if (mf.cbar || !mf.config.empty()) d.cbar = p.cbar;
            validate(d);
            json j = {{"mu", d.mu}, {"q", d.q}, {"a", d.a}, {"cbar", d.cbar},
                      {"indifference_x", det_indifference_x(d)}};
            std::optional<double> bopt;
            if (d.a * d.cbar > d.mu) bopt = det_optimal_b(d);
            j["optimal_b"] = num_or_null(bopt);
            if (dx) {
                const double b = db ? *db : (bopt ? *bopt : 0.0);
                j["x"] = *dx;
                j["b"] = b;
                j["value"] = det_refraction_value(*dx, b, d);
                j["expansion_coefficient"] = det_expansion_coefficient(*dx, d);
            }
            emit(j, out_path);
            return kOk;
        }

        const ModelParams p = mf.resolve();
        validate(p);

        if (*solve) {
            const double b = optimal_refraction_threshold(p);
            json j = {{"params", params_json(p)},
                      {"regime", p.interesting() ? "interesting" : "degenerate"},
                      {"regime_threshold", p.regime_threshold()},
                      {"bstar", b}};
            if (!p.interesting()) {
                j["zstar"] = nullptr;
                j["xstar"] = nullptr;
                j["curves"] = nullptr;
                emit(j, boundary_path);
                return kOk;
            }
            if (stepper.empty()) stepper = "euler";
            CurveOptions o;
            o.n_steps = steps;
            o.stepper = parse_stepper(stepper);
            const BoundaryValues bv = solve_boundary(p);
            const AsymptoticPredictions ap = asymptotic_predictions(p);
            const CurvePair cp = solve_all(p, o);
            double min_c11 = INFINITY, min_c22 = INFINITY;
            for (const auto& d : cp.diagnostics) {
                if (d.endpoint) continue;
                min_c11 = std::min(min_c11, std::fabs(d.C11));
                min_c22 = std::min(min_c22, std::fabs(d.C22));
            }
            j["zstar"] = bv.zstar;
            j["xstar"] = num_or_null(bv.xstar);
            j["predictions"] = {{"limit", ap.limit},
                                {"bstar", ap.bstar_pred},
                                {"zstar", ap.zstar_pred},
                                {"xstar", ap.xstar_pred}};
            j["curves"] = {{"file", curves_out},
                           {"nodes", cp.size()},
                           {"stepper", stepper},
                           {"c_low", cp.c_bottom()},
                           {"truncated", cp.truncated},
                           {"truncation_reason", cp.truncation_reason},
                           {"min_abs_C11", min_c11},
                           {"min_abs_C22", min_c22}};
            std::ofstream out(curves_out);
            if (!out) fail(ErrorKind::DomainError, "cannot write '" + curves_out + "'");
            write_curves_csv(out, cp);
            emit(j, boundary_path);
            return kOk;
        }

        if (*verify) {
            const ValueSurface s = surface_for(p, curves_path, steps, stepper);
            const VerificationReport sup = check_supersolution(s, grid, tol);
            const VerificationReport mar = check_marginal_conditions(s, grid, tol);
            json j = {{"params", params_json(p)},
                      {"pass", sup.pass && mar.pass},
                      {"supersolution", to_json(sup)},
                      {"marginal", to_json(mar)}};
            emit(j, out_path);
            return sup.pass && mar.pass ? kOk : kVerifyFail;
        }

        if (*value) {
            const std::vector<double> xs = parse_grid(xgrid).points();
            const std::vector<double> cs = cgrid.empty() ? std::vector<double>{cval}
                                                         : parse_grid(cgrid).points();
            const ValueSurface s = surface_for(p, curves_path, steps, stepper);
            if (out_path.empty() || out_path == "-") {
                write_surface_csv(std::cout, s, xs, cs);
            } else {
                std::ofstream out(out_path);
                if (!out) fail(ErrorKind::DomainError, "cannot write '" + out_path + "'");
                write_surface_csv(out, s, xs, cs);
            }
            return kOk;
        }

        if (*sim) {
            so.adaptive = !no_adaptive;
            so.bridge = !no_bridge;
            std::ofstream trace;
            if (!trace_path.empty()) {
                trace.open(trace_path);
                trace << "path,t,X,R,D\n";
                so.trace = &trace;
            }
            std::unique_ptr<ValueSurface> surf;
            StrategySpec spec = LumpSumNow{};
            if (strategy == "constant") {
                spec = ConstantRate{rate};
            } else if (strategy == "refraction") {
                spec = Refraction{bthr >= 0 ? bthr : optimal_refraction_threshold(p)};
            } else if (strategy == "two-curve") {
                surf = std::make_unique<ValueSurface>(surface_for(p, curves_path, steps, stepper));
                spec = TwoCurve{surf.get()};
            } else if (strategy != "lump-sum") {
                fail(ErrorKind::DomainError, "unknown strategy '" + strategy + "'");
            }
            const SimulationResult r = simulate(spec, p, x0, c0, so);
            json j = to_json(r);
            j["x0"] = x0;
            j["c0"] = c0;
            j["params"] = params_json(p);
            emit(j, out_path);
            return kOk;
        }

        if (*asym) {
            std::ostringstream os;
            os << std::setprecision(17);
            os << "cbar,bstar,zstar,xstar,bstar_pred,zstar_pred,xstar_pred,limit\n";
            for (double cb : parse_list(cbar_grid)) {
                const ModelParams pc = p.with_cbar(cb);
                const BoundaryValues bv = solve_boundary(pc);
                const AsymptoticPredictions ap = asymptotic_predictions(pc);
                os << cb << ',' << bv.bstar << ',' << bv.zstar << ',';
                if (bv.xstar) os << *bv.xstar;
                os << ',' << ap.bstar_pred << ',' << ap.zstar_pred << ',' << ap.xstar_pred << ','
                   << ap.limit << '\n';
            }
            if (out_path.empty() || out_path == "-") {
                std::cout << os.str();
            } else {
                std::ofstream out(out_path);
                if (!out) fail(ErrorKind::DomainError, "cannot write '" + out_path + "'");
                out << os.str();
            }
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << error_json(e).dump() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return kNumeric;
    }
    return kUsage;
}
