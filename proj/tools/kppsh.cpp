// Command line front end: gate, spectrum, front, simulate, filters, gl, evans, scan, report.
#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "kppsh/diagnostics.hpp"
#include "kppsh/evans.hpp"
#include "kppsh/front.hpp"
#include "kppsh/gl.hpp"
#include "kppsh/io.hpp"
#include "kppsh/modefilter.hpp"
#include "kppsh/params.hpp"
#include "kppsh/pde_sim.hpp"
#include "kppsh/spectral.hpp"

namespace fs = std::filesystem;
using namespace kppsh;
using io::json;

namespace {

constexpr int kExitGate = 2;

struct Common {
    std::string config;
    std::string out = "out";
};

json load(const Common& c) { return c.config.empty() ? json::object() : io::load_config(c.config); }

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }
json vjson(const Vec2c& v) { return json::array({cjson(v[0]), cjson(v[1])}); }

int worker_count(int jobs) {
    int w = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* e = std::getenv("KPPSH_WORKERS")) w = std::atoi(e);
    return std::clamp(w, 1, std::max(1, jobs));
}

void emit(const fs::path& path, const json& j) {
    io::write_json(path, j);
    std::cout << j.dump(2) << "\n";
}

// ------------------------------------------------------------------ stages

int cmd_gate(const Common& c) {
    const SystemParams p = io::params_from_json(load(c));
    const GateReport g = check_hypotheses(p);
    emit(fs::path(c.out) / "gate.json", io::to_json(g));
    return g.admissible ? 0 : kExitGate;
}

int cmd_spectrum(const Common& c) {
    const SystemParams p = io::params_from_json(load(c));
    const ThetaChoice tc = select_theta(p);
    const auto xi = default_xi_grid();
    const WeightedBorders wb = weighted_borders(p, tc, xi);
    io::CsvColumn tag{"border", {}, {}}, cx{"xi", {}, {}}, re{"re_lambda", {}, {}}, im{"im_lambda", {}, {}};
    for (const SpectralCurve* s : {&wb.kpp_plus, &wb.kpp_minus, &wb.sh_plus, &wb.sh_minus})
        for (const auto& q : s->samples) {
            tag.text.push_back(s->which_border);
            cx.values.push_back(q.xi);
            re.values.push_back(q.lambda.real());
            im.values.push_back(q.lambda.imag());
        }
    io::write_csv(fs::path(c.out) / "spectrum.csv", {tag, cx, re, im});
    emit(fs::path(c.out) / "theta.json", {{"theta", tc.theta},
                                          {"eta", tc.eta},
                                          {"theta_opt", tc.theta_opt},
                                          {"bound_min", tc.bound_min},
                                          {"max_re",
                                           {{"kpp_plus", wb.kpp_plus.max_real()},
                                            {"kpp_minus", wb.kpp_minus.max_real()},
                                            {"sh_plus", wb.sh_plus.max_real()},
                                            {"sh_minus", wb.sh_minus.max_real()}}}});
    return 0;
}

int cmd_front(const Common& c) {
    const SystemParams p = io::params_from_json(load(c));
    const FrontProfile f = solve_front(p);
    const FrontFit fit = check_front_asymptotics(f, p);
    io::write_csv(fs::path(c.out) / "front.csv", {{"x", f.grid.points(), {}}, {"q", f.q, {}}, {"qprime", f.qprime, {}}});
    emit(fs::path(c.out) / "front_fit.json", {{"c", f.c},
                                              {"residual", f.residual},
                                              {"newton_iterations", f.newton_iterations},
                                              {"a", fit.a},
                                              {"b", fit.b},
                                              {"r_squared", fit.r_squared},
                                              {"kappa_measured", fit.kappa_measured},
                                              {"kappa_expected", fit.kappa_expected}});
    return 0;
}

template <class F>
json guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {{"error", e.what()}};
    }
}

json run_diagnostics(const SimConfig& cfg, const TimeSeries& ts) {
    const double sponge_end = cfg.grid.x_min + cfg.sponge_width;
    json d;
    d["theta"] = ts.theta;
    d["eta"] = ts.eta;
    d["mu"] = cfg.params.mu;
    d["truncated"] = ts.truncated;
    d["decay"] = guarded([&] {
        const DecayFit f = decay_fit(ts, "norm_U_rho", 10.0, 200.0);
        const WindowSensitivity w = window_sensitivity(ts, "norm_U_rho");
        return json{{"window", {f.t_lo, f.t_hi}},
                    {"slope", f.slope},
                    {"intercept", f.intercept},
                    {"r_squared", f.r_squared},
                    {"kind", f.kind},
                    {"slope_10_100", w.a.slope},
                    {"slope_20_200", w.b.slope},
                    {"converged", w.converged}};
    });
    d["u2_decay"] = guarded([&] {
        const ExpFit e = exponential_fit(ts.t, ts.norm_u2, 10.0, 200.0);
        return json{{"rate", e.rate}, {"r_squared", e.r_squared}, {"ok", e.rate >= 0.5 * ts.eta}};
    });
    d["boundedness"] = guarded([&] {
        const BoundednessCheck b = boundedness(ts, "norm_V", 50.0, cfg.t_end);
        return json{{"bounded", b.bounded}, {"max_trend_per_100", b.max_trend}, {"t_saturated", b.t_saturated}, {"sup", b.sup}};
    });
    d["amplitude"] = guarded([&] {
        const SaturatedAmplitude a = saturated_amplitude(ts, cfg.params.mu, sponge_end);
        return json{{"amplitude", a.amplitude},
                    {"growth_rate", a.growth_rate},
                    {"saturated", a.saturated},
                    {"gl_prediction", gl_predicted_amplitude(cfg.params)}};
    });
    d["wavenumber"] = guarded([&] {
        const StateField& s = ts.snapshots.at(ts.snapshots.size() - 1);
        const PatternWindow w = pattern_window(s, sponge_end);
        const WavenumberPeak k = pattern_wavenumber(s, w);
        return json{{"t", s.t},
                    {"window", {w.x_lo, w.x_hi}},
                    {"xi", k.xi},
                    {"peak_over_median", k.peak_over_median},
                    {"flagged", k.flagged}};
    });
    return d;
}

// Runs one simulation into dir; returns the exit code.
int simulate_into(const json& conf, const fs::path& dir) {
    const SimConfig cfg = io::sim_config_from_json(conf);
    const GateReport g = check_hypotheses(cfg.params);
    if (!g.admissible) {
        std::cerr << "simulate refused: gamma=" << cfg.params.gamma << " is outside the admissible interval"
                  << " (gamma_rem=" << g.gamma_rem << ", gamma_GL=" << g.gamma_gl << ")\n";
        return kExitGate;
    }
    io::RunManifest m;
    m.started = io::utc_timestamp();
    m.code_version = io::code_version();
    m.params = io::to_json(cfg.params);
    m.config = io::to_json(cfg);
    m.config_hash = io::sha256_hex(m.config.dump());
    m.seeds = {cfg.seed};

    const TimeSeries ts = run_simulation(cfg);
    fs::create_directories(dir / "snapshots");
    io::write_csv(dir / "timeseries.csv", {{"t", ts.t, {}},
                                           {"norm_U_rho", ts.norm_U_rho, {}},
                                           {"norm_u1_rho", ts.norm_u1_rho, {}},
                                           {"norm_V", ts.norm_V, {}},
                                           {"norm_u2", ts.norm_u2, {}},
                                           {"v_sup", ts.v_sup, {}}});
    m.add_output(dir, "timeseries.csv");
    for (size_t k = 0; k < ts.snapshots.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshots/snapshot_%03zu.bin", k);
        io::write_snapshot(dir / name, ts.snapshots[k]);
        m.add_output(dir, name);
    }
    if (!ts.snapshots.empty()) {
        const StateField& s = ts.snapshots.back();
        io::write_csv(dir / "plot.csv", {{"x", s.grid.points(), {}}, {"u", s.u, {}}, {"v", s.v, {}}});
        m.add_output(dir, "plot.csv");
    }
    io::write_json(dir / "diagnostics.json", run_diagnostics(cfg, ts));
    m.add_output(dir, "diagnostics.json");
    m.finished = io::utc_timestamp();
    io::write_json(dir / "manifest.json", m.to_json());
    return ts.truncated ? 1 : 0;
}

int cmd_simulate(const Common& c) { return simulate_into(load(c), c.out); }

int cmd_scan(const Common& c, std::vector<double> mus) {
    const json base = load(c);
    if (mus.empty() && base.contains("scan")) mus = base.at("scan").at("mu").get<std::vector<double>>();
    if (mus.empty()) throw std::invalid_argument("scan: no mu values (use --mu or [scan] mu = [...])");
    std::atomic<size_t> next{0};
    std::atomic<int> worst{0};
    std::mutex log;
    auto worker = [&] {
        for (size_t k; (k = next++) < mus.size();) {
            json conf = base;
            conf["params"]["mu"] = mus[k];
            char name[64];
            std::snprintf(name, sizeof name, "mu_%.6g", mus[k]);
            int rc;
            try {
                rc = simulate_into(conf, fs::path(c.out) / name);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> l(log);
                std::cerr << name << ": " << e.what() << "\n";
                rc = 1;
            }
            int w = worst.load();
            while (rc > w && !worst.compare_exchange_weak(w, rc)) {}
            std::lock_guard<std::mutex> l(log);
            std::cerr << name << " finished with status " << rc << "\n";
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < worker_count(static_cast<int>(mus.size())); ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return worst;
}

int cmd_report(const std::string& dir) {
    std::vector<std::pair<std::string, json>> runs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "diagnostics.json"))
            runs.emplace_back(e.path().filename().string(), json::parse(io::read_text(e.path() / "diagnostics.json")));
    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.second.at("mu") > b.second.at("mu"); });
    if (runs.empty()) throw std::invalid_argument("report: no run directories with diagnostics.json under " + dir);

    auto num = [](const json& j, const char* a, const char* b) -> json {
        return j.contains(a) && j.at(a).contains(b) ? j.at(a).at(b) : json(nullptr);
    };
    json summary = {{"runs", json::array()}, {"amplitude_ratios", json::array()}};
    std::string md = "# Scan report\n\n| run | mu | decay slope | u2 rate | eta | bounded | amplitude | saturated | GL amplitude | xi |\n"
                     "|---|---|---|---|---|---|---|---|---|---|\n";
    auto cell = [](const json& v) {
        if (v.is_null()) return std::string("n/a");
        if (v.is_boolean()) return std::string(v.get<bool>() ? "yes" : "no");
        char b[32];
        std::snprintf(b, sizeof b, "%.4g", v.get<double>());
        return std::string(b);
    };
    std::vector<SaturatedAmplitude> amps;
    for (const auto& [name, d] : runs) {
        json r = {{"run", name},
                  {"mu", d.at("mu")},
                  {"decay_slope", num(d, "decay", "slope")},
                  {"u2_rate", num(d, "u2_decay", "rate")},
                  {"eta", d.at("eta")},
                  {"bounded", num(d, "boundedness", "bounded")},
                  {"amplitude", num(d, "amplitude", "amplitude")},
                  {"saturated", num(d, "amplitude", "saturated")},
                  {"gl_amplitude", num(d, "amplitude", "gl_prediction")},
                  {"xi", num(d, "wavenumber", "xi")}};
        summary["runs"].push_back(r);
        md += "| " + name;
        for (const char* k : {"mu", "decay_slope", "u2_rate", "eta", "bounded", "amplitude", "saturated", "gl_amplitude", "xi"})
            md += " | " + cell(r.at(k));
        md += " |\n";
        // Unsaturated runs would bias the ratios, so they are left out.
        if (r.at("amplitude").is_number() && r.at("saturated") == true) {
            SaturatedAmplitude a;
            a.mu = d.at("mu");
            a.amplitude = r.at("amplitude");
            amps.push_back(a);
        }
    }
    if (amps.size() >= 2) {
        md += "\n| mu_i | mu_j | amplitude ratio | sqrt(mu_i/mu_j) |\n|---|---|---|---|\n";
        for (const auto& [i, j, meas, pred] : amplitude_scaling(amps).ratios) {
            summary["amplitude_ratios"].push_back(
                {{"mu_i", amps[i].mu}, {"mu_j", amps[j].mu}, {"ratio", meas}, {"predicted", pred}});
            md += "| " + cell(amps[i].mu) + " | " + cell(amps[j].mu) + " | " + cell(meas) + " | " + cell(pred) + " |\n";
        }
    }
    io::write_json(fs::path(dir) / "summary.json", summary);
    io::write_text(fs::path(dir) / "summary.md", md);
    std::cout << md;
    return 0;
}

int cmd_filters(const Common& c) {
    const SystemParams p = io::params_from_json(load(c));
    const FilterSelfTest s = filters_selftest(p);
    emit(fs::path(c.out) / "filters_selftest.json", {{"partition", s.partition},
                                                     {"hermitian", s.hermitian},
                                                     {"idempotent_c", s.idempotent_c},
                                                     {"idempotent_s", s.idempotent_s},
                                                     {"passband", s.passband},
                                                     {"stopband", s.stopband},
                                                     {"quadratic", s.quadratic},
                                                     {"quadratic_control", s.quadratic_control}});
    return 0;
}

int cmd_gl_derive(const Common& c) {
    const SystemParams p = io::params_from_json(load(c));
    const GLData g = derive_ansatz_vectors(p);
    emit(fs::path(c.out) / "gl.json", {{"rho_c", vjson(g.rho_c)},
                                       {"rho_c_star", vjson(g.rho_c_star)},
                                       {"rho_0", vjson(g.rho_0)},
                                       {"rho_1", vjson(g.rho_1)},
                                       {"rho_2", vjson(g.rho_2)},
                                       {"diffusion", g.diffusion},
                                       {"linear", g.linear},
                                       {"cubic", g.cubic},
                                       {"cubic_closed_form", gl_cubic_coefficient(p, p.gamma)},
                                       {"solvability", g.solvability},
                                       {"rho1_residual", g.rho1_residual}});
    return 0;
}

int cmd_gl_simulate(const Common& c, double b, double amplitude, double T, double C) {
    if (!(b < 0)) throw std::invalid_argument("gl simulate: need b < 0");
    const AttractorCheck a = gl_attractor_check(b, amplitude, T, C / std::sqrt(-b));
    io::write_csv(fs::path(c.out) / "gl_timeseries.csv", {{"T", a.T, {}}, {"sup_A", a.sup, {}}, {"bound", a.bound, {}}});
    emit(fs::path(c.out) / "gl_attractor.json", {{"b", a.b}, {"C_GL", a.C_GL}, {"holds", a.holds}, {"final_sup", a.sup.back()}});
    return a.holds ? 0 : 1;
}

int cmd_gl_approx(const Common& c, std::vector<double> eps, double T) {
    const SystemParams p = io::params_from_json(load(c));
    const double b = derive_ansatz_vectors(p).cubic;
    const double as = 1.0 / std::sqrt(-b);
    json runs = json::array();
    std::vector<double> res;
    for (double e : eps) {
        const ApproxRun r = gl_approximation_run(
            p, e, T, [&](double X) { return as * std::polar(0.7 + 0.3 * std::cos(X / 20.0), 0.2 * std::sin(X / 10.0)); });
        runs.push_back({{"eps", e}, {"t_final", r.t_final}, {"residual", r.residual}, {"psi_norm", r.psi_norm},
                        {"residual_initial", r.residual_initial}});
        res.push_back(r.residual);
    }
    json out = {{"T", T}, {"runs", runs}};
    if (res.size() >= 2 && eps[0] != eps[1])
        out["order"] = std::log(res[0] / res[1]) / std::log(eps[0] / eps[1]);
    emit(fs::path(c.out) / "gl_approx.json", out);
    return 0;
}

int cmd_evans(const Common& c, double re_hi, double im_hi, double bump) {
    SystemParams p = io::params_from_json(load(c));
    const ThetaChoice tc = select_theta(p);
    const EigenContext ctx = make_eigen_context(p, tc.theta);
    EigenOptions o;
    o.bump = bump;
    const double re_lo = -2.0 * tc.eta;
    const WindingResult w = evans_winding(ctx, re_lo, re_hi, im_hi, o, 0.05, 64, worker_count(1 << 20));
    io::CsvColumn lr{"re_lambda", {}, {}}, li{"im_lambda", {}, {}}, wr{"re_value", {}, {}}, wi{"im_value", {}, {}},
        ls{"log_scale", {}, {}};
    for (const auto& s : w.samples) {
        lr.values.push_back(s.lambda.real());
        li.values.push_back(s.lambda.imag());
        wr.values.push_back(s.value.real());
        wi.values.push_back(s.value.imag());
        ls.values.push_back(s.log_scale);
    }
    io::write_csv(fs::path(c.out) / "evans_samples.csv", {lr, li, wr, wi, ls});
    emit(fs::path(c.out) / "evans.json", {{"contour", {{"re_lo", re_lo}, {"re_hi", re_hi}, {"im_hi", im_hi}, {"slit_margin", 0.05}}},
                                          {"bump", bump},
                                          {"winding", w.winding},
                                          {"n_per_edge", w.n_per_edge},
                                          {"min_abs", w.min_abs},
                                          {"conj_asymmetry", w.conj_asymmetry}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KPP / Swift-Hohenberg front laboratory"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* s) {
        s->add_option("-c,--config", c.config, "TOML or JSON configuration")->check(CLI::ExistingFile);
        s->add_option("-o,--out", c.out, "output directory");
    };
    int rc = 0;

    auto* gate = app.add_subcommand("gate", "check the hypothesis gate; exit 0 iff admissible");
    add_common(gate);
    gate->callback([&] { rc = cmd_gate(c); });

    auto* spec = app.add_subcommand("spectrum", "weighted Fredholm borders and theta choice");
    add_common(spec);
    spec->callback([&] { rc = cmd_spectrum(c); });

    auto* front = app.add_subcommand("front", "critical front profile and tail fit");
    add_common(front);
    front->callback([&] { rc = cmd_front(c); });

    auto* sim = app.add_subcommand("simulate", "time integration of the full system");
    add_common(sim);
    sim->callback([&] { rc = cmd_simulate(c); });

    std::vector<double> scan_mu;
    auto* scan = app.add_subcommand("scan", "simulate a list of mu values concurrently");
    add_common(scan);
    scan->add_option("--mu", scan_mu, "mu values (overrides [scan] mu)");
    scan->callback([&] { rc = cmd_scan(c, scan_mu); });

    std::string report_dir = "out";
    auto* report = app.add_subcommand("report", "Markdown and JSON summary of a scan directory");
    report->add_option("dir", report_dir)->check(CLI::ExistingDirectory);
    report->callback([&] { rc = cmd_report(report_dir); });

    auto* filters = app.add_subcommand("filters", "mode filter checks");
    filters->require_subcommand(1);
    auto* selftest = filters->add_subcommand("selftest", "algebraic residual table");
    add_common(selftest);
    selftest->callback([&] { rc = cmd_filters(c); });

    auto* gl = app.add_subcommand("gl", "amplitude equation");
    gl->require_subcommand(1);
    auto* derive = gl->add_subcommand("derive", "ansatz vectors and coefficients");
    add_common(derive);
    derive->callback([&] { rc = cmd_gl_derive(c); });
    double gl_b = -1.0, gl_amp = 10.0, gl_T = 20.0, gl_C = 1.05;
    auto* glsim = gl->add_subcommand("simulate", "amplitude equation from a large initial condition");
    add_common(glsim);
    glsim->add_option("--b", gl_b, "cubic coefficient");
    glsim->add_option("--amplitude", gl_amp, "sup of the initial amplitude");
    glsim->add_option("--T", gl_T, "final slow time");
    glsim->add_option("--C", gl_C, "attractor constant in units of 1/sqrt(-b)");
    glsim->callback([&] { rc = cmd_gl_simulate(c, gl_b, gl_amp, gl_T, gl_C); });
    std::vector<double> eps{0.2, 0.1};
    double approx_T = 5.0;
    auto* approx = gl->add_subcommand("approx", "residual of the amplitude approximation");
    add_common(approx);
    approx->add_option("--eps", eps, "epsilon values");
    approx->add_option("--T", approx_T, "slow time");
    approx->callback([&] { rc = cmd_gl_approx(c, eps, approx_T); });

    double re_hi = 10.0, im_hi = 20.0, bump = 0.0;
    auto* evans = app.add_subcommand("evans", "winding of the Evans function on a slit-avoiding rectangle");
    add_common(evans);
    evans->add_option("--re-hi", re_hi);
    evans->add_option("--im-hi", im_hi);
    evans->add_option("--bump", bump, "localized potential perturbation (negative control)");
    evans->callback([&] { rc = cmd_evans(c, re_hi, im_hi, bump); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
