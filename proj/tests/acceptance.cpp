// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "kppsh/diagnostics.hpp"
#include "kppsh/evans.hpp"
#include "kppsh/front.hpp"
#include "kppsh/gl.hpp"
#include "kppsh/modefilter.hpp"
#include "kppsh/params.hpp"
#include "kppsh/pde_sim.hpp"
#include "kppsh/spectral.hpp"

using namespace kppsh;

namespace {

struct Line {
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

std::string fmt(const char* f, auto... a) {
    char b[512];
    std::snprintf(b, sizeof b, f, a...);
    return b;
}

template <class F>
Line timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Line l;
    try {
        l = f();
    } catch (const std::exception& e) {
        l = {false, std::string("exception: ") + e.what()};
    }
    l.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return l;
}

// Shipped simulation preset.
SystemParams sim_params(double mu) {
    SystemParams p;
    p.gamma = 20;
    p.mu = mu;
    p.mu0 = 0.12;
    return p;
}

// Gate preset.
SystemParams gate_params() {
    SystemParams p;
    p.gamma = 20;
    p.mu0 = 0.01;
    return p;
}

SimConfig sim_config(double mu) {
    SimConfig c;
    c.params = sim_params(mu);
    c.grid = Grid1D::uniform_dx(-900, 200, 0.15);
    c.dt = 0.01;
    c.t_end = 400;
    c.sponge_width = 40;
    c.sponge_strength = 5;
    c.record_every = 1;
    c.snapshot_every = 100;
    c.seed = 0;
    return c;
}

Line gl_cross_validation() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> pos(0.1, 5.0), sym(-1.0, 1.0), frac(0.01, 0.99);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        SystemParams p;
        p.d = pos(rng);
        p.alpha = pos(rng);
        p.sigma = pos(rng);
        do p.beta = sym(rng);
        while (p.beta == 0.0);
        p.gamma = frac(rng) * gamma_gl(p);
        const double closed = gl_cubic_coefficient(p, p.gamma);
        const double assembled = derive_ansatz_vectors(p).cubic;
        worst = std::max(worst, std::abs(assembled - closed) / std::abs(closed));
    }
    return {worst <= 1e-10, fmt("max relative difference %.2e over 100 draws (tol 1e-10)", worst)};
}

Line hypothesis_gate() {
    const GateReport g = check_hypotheses(gate_params());
    bool ok = g.admissible && g.gamma_rem < g.gamma_gl && g.gamma_interval.has_value();
    double prev = g.gamma_gl * 0;
    std::string seq;
    for (int k = 1; k <= 4; ++k) {
        SystemParams p = gate_params();
        p.beta = std::pow(10.0, -k);
        const double gg = gamma_gl(p);
        if (k > 1 && !(gg > prev)) ok = false;
        prev = gg;
        seq += fmt(" %.4g", gg);
    }
    return {ok, fmt("gamma_rem=%.4g < gamma_GL=%.6g; gamma_GL along beta=1e-k:%s", g.gamma_rem, g.gamma_gl, seq.c_str())};
}

Line spectral_margins() {
    SystemParams p = gate_params();
    p.gamma = gamma_rem(p) + 1;
    const ThetaChoice tc = select_theta(p);
    const WeightedBorders wb = weighted_borders(p, tc, linspace(-10, 10, 4001));
    const double m = std::max({wb.kpp_minus.max_real(), wb.sh_minus.max_real(), wb.sh_plus.max_real()});
    bool ok = m <= -3 * tc.eta;
    // kpp+ touches 0 only at xi = 0.
    double at0 = -INFINITY, off0 = -INFINITY;
    for (const auto& s : wb.kpp_plus.samples) {
        if (std::abs(s.xi) < 1e-12) at0 = s.lambda.real();
        else off0 = std::max(off0, s.lambda.real());
    }
    ok = ok && std::abs(at0) <= 1e-14 && off0 < 0 && wb.kpp_plus.max_real() <= 1e-14;
    return {ok, fmt("gapped max Re=%.4g <= -3 eta=%.4g; kpp+ Re at 0 = %.1e, max off 0 = %.3e", m, -3 * tc.eta, at0,
                    off0)};
}

Line front_correctness() {
    const SystemParams p = gate_params();
    const FrontProfile f = solve_front(p);
    const FrontFit fit = check_front_asymptotics(f, p, 10.0, 30.0);
    const double kerr = std::abs(fit.kappa_measured / fit.kappa_expected - 1);
    const bool ok = f.residual <= 1e-8 && kerr <= 0.01 && fit.r_squared >= 0.999;
    return {ok, fmt("residual=%.2e, kappa=%.6f vs %.6f (%.2e rel), R^2=%.6f on [10,30]", f.residual,
                    fit.kappa_measured, fit.kappa_expected, kerr, fit.r_squared)};
}

Line decay(const TimeSeries& ts) {
    const DecayFit f = decay_fit(ts, "norm_U_rho", 10, 200);
    const ExpFit e = exponential_fit(ts.t, ts.norm_u2, 10, 200);
    const bool ok = !ts.truncated && f.slope >= -1.8 && f.slope <= -1.2 && e.rate >= 0.5 * ts.eta;
    return {ok, fmt("mu=0.1: slope of |U/rho*| on [10,200] = %.4f (in [-1.8,-1.2]); u2 rate %.4f >= 0.5 eta = %.4f",
                    f.slope, e.rate, 0.5 * ts.eta)};
}

Line turing(const std::vector<std::pair<double, const TimeSeries*>>& runs) {
    bool ok = true;
    std::string d;
    std::vector<SaturatedAmplitude> amps;
    const SimConfig c = sim_config(0.1);
    const double sponge_end = c.grid.x_min + c.sponge_width;
    for (const auto& [mu, ts] : runs) {
        const BoundednessCheck b = boundedness(*ts, "norm_V", 50, 400, 0.02);
        const StateField& s = ts->snapshots.back();
        const WavenumberPeak k = pattern_wavenumber(s, pattern_window(s, sponge_end));
        const SaturatedAmplitude a = saturated_amplitude(*ts, mu, sponge_end);
        amps.push_back(a);
        ok = ok && b.bounded && std::abs(k.xi - 1) <= 0.05 && !k.flagged && a.saturated;
        d += fmt("mu=%g: trend %.2f%%/100, xi=%.4f, A=%.4f; ", mu, 100 * b.max_trend, k.xi, a.amplitude);
    }
    const auto [i, j, measured, predicted] = amplitude_scaling(amps).ratios.at(0);
    ok = ok && std::abs(measured / predicted - 1) <= 0.2;
    d += fmt("ratio %.4f vs %.4f (+-20%%)", measured, predicted);
    return {ok, d};
}

Line mode_filters() {
    const FilterSelfTest s = filters_selftest(sim_params(0.1));
    const bool ok = s.partition <= 1e-13 && s.quadratic <= 1e-12 && s.quadratic_control >= 0.1;
    return {ok, fmt("partition %.1e (tol 1e-13), quadratic %.1e (tol 1e-12), corrupted cutoff %.3f (>= 0.1)",
                    s.partition, s.quadratic, s.quadratic_control)};
}

Line gl_order() {
    const SystemParams p = sim_params(0.1);
    const double as = 1 / std::sqrt(-derive_ansatz_vectors(p).cubic);
    auto A0 = [as](double X) { return as * std::polar(0.7 + 0.3 * std::cos(X / 20), 0.2 * std::sin(X / 10)); };
    auto coarse = std::async(std::launch::async, [&] { return gl_approximation_run(p, 0.2, 5.0, A0); });
    const ApproxRun fine = gl_approximation_run(p, 0.1, 5.0, A0);
    const ApproxRun c = coarse.get();
    const double ratio = fine.residual / c.residual, limit = std::pow(0.5, 1.5) * 1.3;
    return {ratio <= limit, fmt("residual %.4e (eps 0.2), %.4e (eps 0.1), ratio %.4f <= %.4f, order %.3f", c.residual,
                                fine.residual, ratio, limit, std::log(ratio) / std::log(0.5))};
}

Line gl_attractor() {
    const double b = -1;
    const AttractorCheck a = gl_attractor_check(b, 10.0, 20.0, 1.05 / std::sqrt(-b));
    const bool ok = a.holds && !a.T.empty() && a.T.front() >= 1 - 1e-9 && a.T.back() >= 20 - 1e-9;
    double margin = INFINITY;
    for (size_t k = 0; k < a.T.size(); ++k) margin = std::min(margin, a.bound[k] - a.sup[k]);
    return {ok, fmt("bound holds on T in [%.2f, %.2f], min slack %.3e, final sup %.4f", a.T.front(), a.T.back(),
                    margin, a.sup.back())};
}

Line evans() {
    const SystemParams p = sim_params(0.1);
    const ThetaChoice tc = select_theta(p);
    const EigenContext ctx = make_eigen_context(p, tc.theta);
    const WindingResult w = evans_winding(ctx, -2 * tc.eta, 10, 20);
    EigenOptions bad;
    bad.bump = 3.0;
    const WindingResult c = evans_winding(ctx, -2 * tc.eta, 10, 20, bad);
    double wr = 0;
    for (const cplx lam : {cplx(1, 0), cplx(-tc.eta, 2), cplx(5, -10)}) {
        wr = std::max(wr, wronskian_identity_check(ctx, EigenOp::kpp, lam, 5.0));
        wr = std::max(wr, wronskian_identity_check(ctx, EigenOp::sh, lam, 5.0));
    }
    const bool ok = w.winding == 0 && c.winding >= 1 && wr <= 1e-6;
    return {ok, fmt("winding %d (n=%d, min|W|=%.2e), control winding %d, Wronskian deviation %.2e (tol 1e-6)",
                    w.winding, w.n_per_edge, w.min_abs, c.winding, wr)};
}

}  // namespace

int main() {
    // The two long simulations run in the background while the cheap criteria are checked.
    auto run01 = std::async(std::launch::async, [] { return run_simulation(sim_config(0.1)); });
    auto run005 = std::async(std::launch::async, [] { return run_simulation(sim_config(0.05)); });

    std::vector<std::pair<std::string, Line>> out;
    out.emplace_back("GL coefficient cross-validation", timed(gl_cross_validation));
    out.emplace_back("hypothesis gate", timed(hypothesis_gate));
    out.emplace_back("spectral margins", timed(spectral_margins));
    out.emplace_back("front correctness", timed(front_correctness));
    const Line l7 = timed(mode_filters);
    const Line l8 = timed(gl_order);
    const Line l9 = timed(gl_attractor);
    const Line l10 = timed(evans);

    TimeSeries a, b;
    const Line sims = timed([&] {
        a = run01.get();
        b = run005.get();
        return Line{true, ""};
    });
    out.emplace_back("main-theorem decay", timed([&] { return decay(a); }));
    out.emplace_back("Turing boundedness and scaling", timed([&] { return turing({{0.1, &a}, {0.05, &b}}); }));
    out.emplace_back("mode-filter algebra", l7);
    out.emplace_back("GL approximation order", l8);
    out.emplace_back("GL attractor", l9);
    out.emplace_back("Evans winding", l10);

    int failed = 0;
    for (size_t k = 0; k < out.size(); ++k) {
        const auto& [name, l] = out[k];
        failed += !l.pass;
        std::printf("%s %2zu %s: %s [%.1fs]\n", l.pass ? "PASS" : "FAIL", k + 1, name.c_str(), l.detail.c_str(),
                    l.seconds);
    }
    std::printf("simulations joined after an extra %.1fs\n", sims.seconds);
    return failed == 0 ? 0 : 1;
}
