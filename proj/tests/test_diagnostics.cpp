#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "kppsh/diagnostics.hpp"

using namespace kppsh;

namespace {

std::vector<double> times(double t0, double t1, double dt) {
    std::vector<double> t;
    for (double s = t0; s <= t1 + 1e-9; s += dt) t.push_back(s);
    return t;
}

// Interface at x = 50, a cos(xi x) pattern on [-250, 0] with soft edges.
StateField synthetic_state(double amp, double xi, double t) {
    StateField s;
    s.grid = Grid1D::uniform_dx(-300, 100, 0.05);
    s.t = t;
    for (int i = 0; i < s.grid.n; ++i) {
        const double x = s.grid.x(i);
        s.u.push_back(0.5 * (1 - std::tanh(x - 50)));
        const double env = 0.25 * (1 + std::tanh((x + 250) / 5)) * (1 - std::tanh(x / 5));
        s.v.push_back(amp * env * std::cos(xi * x));
    }
    return s;
}

}  // namespace

TEST_CASE("algebraic decay slope") {
    // The fit is in log t, so the 1 + t offset biases early windows; use a late one.
    const auto t = times(1, 1000, 0.5);
    std::vector<double> v;
    for (double s : t) v.push_back(3.0 * std::pow(1 + s, -1.5));
    const DecayFit f = decay_fit(t, v, 100, 1000);
    CHECK(f.slope == doctest::Approx(-1.5).epsilon(0.01 / 1.5));
    CHECK(f.r_squared >= 0.999);
    CHECK(f.kind == "algebraic");

    // Rescaling the series moves only the intercept.
    std::vector<double> w;
    for (double x : v) w.push_back(7.5 * x);
    const DecayFit g = decay_fit(t, w, 100, 1000);
    CHECK(std::abs(g.slope - f.slope) <= 1e-12);
    CHECK(g.intercept - f.intercept == doctest::Approx(std::log(7.5)));
}

TEST_CASE("exponential decay is classified as such") {
    const auto t = times(1, 400, 0.5);
    std::vector<double> v;
    for (double s : t) v.push_back(std::exp(-0.05 * s));
    const DecayFit f = decay_fit(t, v, 10, 200);
    CHECK(f.kind == "exponential");
    const ExpFit e = exponential_fit(t, v, 10, 200);
    CHECK(e.rate == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(e.r_squared == doctest::Approx(1.0));
}

TEST_CASE("decay fit input checks") {
    const auto t = times(1, 400, 1);
    std::vector<double> v(t.size(), 1.0);
    CHECK_THROWS_AS(decay_fit(t, v, 20, 100), std::invalid_argument);  // less than a decade
    CHECK_THROWS_AS(decay_fit(t, v, 0, 100), std::invalid_argument);
    v[50] = 0.0;
    CHECK_THROWS_AS(decay_fit(t, v, 10, 200), std::domain_error);
}

TEST_CASE("window sensitivity on an exact power law") {
    TimeSeries ts;
    ts.t = times(0, 400, 1);
    for (double s : ts.t) ts.norm_U_rho.push_back(std::pow(1 + s, -1.5));
    const WindowSensitivity w = window_sensitivity(ts, "norm_U_rho");
    CHECK(w.converged);
    CHECK(std::abs(w.a.slope - w.b.slope) <= 0.1);
    CHECK_THROWS(window_sensitivity(ts, "nope"));
}

TEST_CASE("pure tones give their wavenumber") {
    std::vector<double> x, a, b;
    for (int i = 0; i < 4000; ++i) {
        x.push_back(i * 0.05);
        a.push_back(std::cos(x.back()));
        b.push_back(std::cos(1.1 * x.back() + 0.3));
    }
    const WavenumberPeak pa = pattern_wavenumber(x, a);
    const WavenumberPeak pb = pattern_wavenumber(x, b);
    CHECK(pa.xi == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(pb.xi == doctest::Approx(1.1).epsilon(2e-3));
    CHECK(!pa.flagged);
    CHECK(!pb.flagged);
}

TEST_CASE("white noise is flagged") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N;
    std::vector<double> x, v;
    for (int i = 0; i < 4000; ++i) {
        x.push_back(i * 0.05);
        v.push_back(N(rng));
    }
    CHECK(pattern_wavenumber(x, v).flagged);
}

TEST_CASE("interface location") {
    StateField s;
    s.grid = Grid1D::uniform_dx(-50, 50, 0.1);
    for (int i = 0; i < s.grid.n; ++i) s.u.push_back(0.5 * (1 - std::tanh(s.grid.x(i) - 3.21)));
    s.v.assign(s.u.size(), 0.0);
    CHECK(locate_interface(s) == doctest::Approx(3.21).epsilon(1e-3));
    std::fill(s.u.begin(), s.u.end(), 1.0);
    CHECK_THROWS_AS(locate_interface(s), std::domain_error);
}

TEST_CASE("pattern window and wavenumber of a synthetic state") {
    const StateField s = synthetic_state(0.1, 1.0, 100);
    const PatternWindow w = pattern_window(s, -260);
    REQUIRE(w.ok);
    CHECK(w.x_lo >= -250 - 1e-9);
    CHECK(w.x_hi <= 20);
    CHECK(w.x_hi - w.x_lo >= 200);
    const WavenumberPeak p = pattern_wavenumber(s, w);
    CHECK(std::abs(p.xi - 1.0) <= 0.01);
    CHECK(!p.flagged);
}

TEST_CASE("saturated amplitude and scaling") {
    TimeSeries a, b;
    a.snapshots = {synthetic_state(0.1, 1.0, 100), synthetic_state(0.1, 1.0, 200)};
    b.snapshots = a.snapshots;
    const SaturatedAmplitude ra = saturated_amplitude(a, 0.1, -260);
    const SaturatedAmplitude rb = saturated_amplitude(b, 0.1, -260);
    CHECK(ra.amplitude == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(ra.saturated);
    const AmplitudeScaling s = amplitude_scaling({ra, rb});
    REQUIRE(s.ratios.size() == 1);
    CHECK(std::get<2>(s.ratios[0]) == 1.0);
    CHECK(std::get<3>(s.ratios[0]) == 1.0);

    // Amplitude proportional to sqrt(mu) reproduces the predicted ratio.
    TimeSeries c;
    c.snapshots = {synthetic_state(0.1 / std::sqrt(2.0), 1.0, 100), synthetic_state(0.1 / std::sqrt(2.0), 1.0, 200)};
    const AmplitudeScaling t = amplitude_scaling({ra, saturated_amplitude(c, 0.05, -260)});
    CHECK(std::get<2>(t.ratios[0]) == doctest::Approx(std::get<3>(t.ratios[0])).epsilon(1e-3));

    // Still growing between snapshots.
    TimeSeries g;
    g.snapshots = {synthetic_state(0.05, 1.0, 100), synthetic_state(0.1, 1.0, 110)};
    CHECK(!saturated_amplitude(g, 0.1, -260).saturated);
    TimeSeries one;
    one.snapshots = {a.snapshots[0]};
    CHECK_THROWS_AS(saturated_amplitude(one, 0.1, -260), std::invalid_argument);
}

TEST_CASE("predicted amplitude") {
    SystemParams p;
    p.gamma = 20;
    p.mu = 0.1;
    p.mu0 = 0.12;
    const double P = gl_cubic_coefficient(p, 20);
    CHECK(gl_predicted_amplitude(p) == doctest::Approx(2 * std::sqrt(0.1) * 3 / std::sqrt(-P)));
    SystemParams q = p;
    q.mu = 0.05;
    CHECK(gl_predicted_amplitude(p) / gl_predicted_amplitude(q) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("boundedness on synthetic series") {
    TimeSeries ts;
    ts.t = times(0, 400, 1);
    for (double s : ts.t) ts.norm_V.push_back(1 - std::exp(-s / 10));
    const BoundednessCheck b = boundedness(ts, "norm_V", 0, 400);
    CHECK(b.bounded);
    CHECK(b.t_saturated > 0);
    CHECK(b.t_saturated < 150);
    CHECK(b.sup <= 1.0);

    TimeSeries grow;
    grow.t = ts.t;
    for (double s : grow.t) grow.norm_V.push_back(0.01 * (1 + s));
    CHECK(!boundedness(grow, "norm_V", 0, 400).bounded);

    ts.norm_V[300] = NAN;
    CHECK(!boundedness(ts, "norm_V", 0, 400).bounded);
}
