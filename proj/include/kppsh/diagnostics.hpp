#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kppsh/pde_sim.hpp"

namespace kppsh {

struct DecayFit {
    double t_lo = 0, t_hi = 0;
    double slope = 0, intercept = 0, r_squared = 0;
    double r_squared_semilog = 0;
    std::string kind;  // "algebraic" or "exponential"
};

// Least squares of log(value) against log(t) on [t_lo, t_hi]; the window must span a decade.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi);
DecayFit decay_fit(const TimeSeries& ts, const std::string& key, double t_lo, double t_hi);

struct ExpFit {
    double rate = 0;  // v ~ C exp(-rate t)
    double log_C = 0;
    double r_squared = 0;
};

ExpFit exponential_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi);

struct WindowSensitivity {
    DecayFit a, b;
    bool converged = true;
};

// Compares the slopes on [10,100] and [20,200].
WindowSensitivity window_sensitivity(const TimeSeries& ts, const std::string& key, double tol = 0.1);

// Rightmost crossing u = 1/2, linearly interpolated.
double locate_interface(const StateField& s);

struct PatternWindow {
    double x_lo = 0, x_hi = 0;
    bool ok = false;
};

// Largest window where the |v| envelope stays above half its maximum, clipped to stay clear of
// the sponge and the interface.
PatternWindow pattern_window(const StateField& s, double sponge_end, double min_length = 40.0 * 3.14159265358979323846);

struct WavenumberPeak {
    double xi = 0;
    double peak_over_median = 0;
    bool flagged = false;
};

WavenumberPeak pattern_wavenumber(const std::vector<double>& x, const std::vector<double>& v);
WavenumberPeak pattern_wavenumber(const StateField& s, const PatternWindow& w);

struct SaturatedAmplitude {
    double mu = 0;
    double amplitude = 0;     // median of |v| peaks in the pattern window
    double growth_rate = 0;   // relative growth per time unit between the last two snapshots
    bool saturated = false;
};

SaturatedAmplitude saturated_amplitude(const TimeSeries& ts, double mu, double sponge_end);

struct AmplitudeScaling {
    std::vector<SaturatedAmplitude> runs;
    // (i, j, measured ratio A_i / A_j, predicted sqrt(mu_i / mu_j))
    std::vector<std::tuple<int, int, double, double>> ratios;
};

AmplitudeScaling amplitude_scaling(const std::vector<SaturatedAmplitude>& runs);

// Saturated v amplitude predicted by the amplitude equation: 2 sqrt(mu) (d + 2 alpha) / sqrt(-P(gamma)).
double gl_predicted_amplitude(const SystemParams& p);

struct BoundednessCheck {
    double max_trend = 0;   // largest relative change of sup |V| per 100 time units after saturation
    double t_saturated = 0;
    double sup = 0;
    bool bounded = false;
};

BoundednessCheck boundedness(const TimeSeries& ts, const std::string& key, double t_lo, double t_hi,
                             double tol = 0.02);

}  // namespace kppsh
