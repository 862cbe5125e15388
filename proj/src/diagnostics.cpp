#include "kppsh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kppsh/fft.hpp"

namespace kppsh {

namespace {

struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};

// Centered least squares so that shifting y by a constant leaves the slope untouched.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 3) throw std::invalid_argument("fit: need at least 3 points in the window");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0) throw std::invalid_argument("fit: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

void window_points(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi,
                   std::vector<double>& tw, std::vector<double>& vw) {
    if (t.size() != v.size()) throw std::invalid_argument("fit: size mismatch");
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(v[i] > 0)) throw std::domain_error("fit: nonpositive value in window");
        tw.push_back(t[i]);
        vw.push_back(v[i]);
    }
}

double median(std::vector<double> a) {
    if (a.empty()) return 0;
    const size_t m = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + m, a.end());
    double r = a[m];
    if (a.size() % 2 == 0) r = 0.5 * (r + *std::max_element(a.begin(), a.begin() + m));
    return r;
}

// Running max of |v| over +-half_width points.
std::vector<double> envelope(const std::vector<double>& v, int half_width) {
    const int n = static_cast<int>(v.size());
    std::vector<double> e(v.size());
    for (int i = 0; i < n; ++i) {
        double m = 0;
        for (int j = std::max(0, i - half_width); j <= std::min(n - 1, i + half_width); ++j)
            m = std::max(m, std::abs(v[j]));
        e[i] = m;
    }
    return e;
}

}  // namespace

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi) {
    if (!(t_lo > 0) || t_hi < 10.0 * t_lo * (1 - 1e-12))
        throw std::invalid_argument("decay_fit: window must span at least one decade with t_lo > 0");
    std::vector<double> tw, vw;
    window_points(t, v, t_lo, t_hi, tw, vw);
    std::vector<double> lt(tw.size()), lv(vw.size());
    for (size_t i = 0; i < tw.size(); ++i) {
        lt[i] = std::log(tw[i]);
        lv[i] = std::log(vw[i]);
    }
    const LineFit a = fit_line(lt, lv);
    const LineFit e = fit_line(tw, lv);
    DecayFit f;
    f.t_lo = t_lo;
    f.t_hi = t_hi;
    f.slope = a.slope;
    f.intercept = a.intercept;
    f.r_squared = a.r2;
    f.r_squared_semilog = e.r2;
    f.kind = a.r2 >= e.r2 ? "algebraic" : "exponential";
    return f;
}

DecayFit decay_fit(const TimeSeries& ts, const std::string& key, double t_lo, double t_hi) {
    return decay_fit(ts.t, ts.series(key), t_lo, t_hi);
}

ExpFit exponential_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi) {
    std::vector<double> tw, vw;
    window_points(t, v, t_lo, t_hi, tw, vw);
    for (auto& e : vw) e = std::log(e);
    const LineFit a = fit_line(tw, vw);
    return {-a.slope, a.intercept, a.r2};
}

WindowSensitivity window_sensitivity(const TimeSeries& ts, const std::string& key, double tol) {
    WindowSensitivity w;
    w.a = decay_fit(ts, key, 10.0, 100.0);
    w.b = decay_fit(ts, key, 20.0, 200.0);
    w.converged = std::abs(w.a.slope - w.b.slope) <= tol;
    return w;
}

double locate_interface(const StateField& s) {
    const int n = s.grid.n;
    for (int i = n - 2; i >= 0; --i) {
        const double a = s.u[i] - 0.5, b = s.u[i + 1] - 0.5;
        if (a == 0) return s.grid.x(i);
        if (a * b < 0) return s.grid.x(i) + s.grid.dx() * a / (a - b);
    }
    throw std::domain_error("locate_interface: u never crosses 1/2");
}

PatternWindow pattern_window(const StateField& s, double sponge_end, double min_length) {
    const Grid1D& g = s.grid;
    const double x_int = locate_interface(s);
    const double lo_lim = sponge_end + 10.0, hi_lim = x_int - 30.0;
    const int hw = std::max(1, static_cast<int>(std::lround(3.14159265358979323846 / g.dx())));
    const std::vector<double> env = envelope(s.v, hw);
    int i0 = std::max(0, g.index_of(lo_lim)), i1 = std::min(g.n - 1, g.index_of(hi_lim));
    PatternWindow w;
    if (i1 <= i0) return w;
    const double peak = *std::max_element(env.begin() + i0, env.begin() + i1 + 1);
    if (!(peak > 0)) return w;
    // Longest contiguous run above half the peak envelope.
    int best_lo = -1, best_hi = -1;
    for (int i = i0; i <= i1;) {
        if (env[i] < 0.5 * peak) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= i1 && env[j + 1] >= 0.5 * peak) ++j;
        if (j - i > best_hi - best_lo) best_lo = i, best_hi = j;
        i = j + 1;
    }
    if (best_lo < 0) return w;
    // Trim the invasion edge of the pattern and the envelope ramp.
    w.x_lo = g.x(best_lo) + 10.0;
    w.x_hi = g.x(best_hi) - 10.0;
    w.ok = w.x_hi - w.x_lo >= min_length;
    return w;
}

WavenumberPeak pattern_wavenumber(const std::vector<double>& x, const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    if (n < 16 || x.size() != v.size()) throw std::invalid_argument("pattern_wavenumber: need >= 16 samples");
    const double h = x[1] - x[0];
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    int m = 1;
    while (m < 8 * n) m <<= 1;
    std::vector<double> buf(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < n; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * i / (n - 1));
        buf[i] = (v[i] - mean) * hann;
    }
    const auto F = fft_forward(buf);
    const int half = m / 2;
    std::vector<double> mag(static_cast<size_t>(half));
    for (int k = 0; k < half; ++k) mag[k] = std::abs(F[k]);
    const double dxi = 2.0 * 3.14159265358979323846 / (m * h);
    // Ignore the residual DC leakage.
    const int k_min = std::max(1, static_cast<int>(std::ceil(0.2 / dxi)));
    int kp = k_min;
    for (int k = k_min; k < half - 1; ++k)
        if (mag[k] > mag[kp]) kp = k;
    double shift = 0;
    if (kp > 0 && kp < half - 1 && mag[kp - 1] > 0 && mag[kp + 1] > 0) {
        const double a = std::log(mag[kp - 1]), b = std::log(mag[kp]), c = std::log(mag[kp + 1]);
        const double den = a - 2.0 * b + c;
        if (den < 0) shift = 0.5 * (a - c) / den;
    }
    WavenumberPeak r;
    r.xi = (kp + shift) * dxi;
    const double med = median(std::vector<double>(mag.begin() + 1, mag.end()));
    r.peak_over_median = med > 0 ? mag[kp] / med : INFINITY;
    r.flagged = r.peak_over_median < 10.0;
    return r;
}

WavenumberPeak pattern_wavenumber(const StateField& s, const PatternWindow& w) {
    if (!w.ok) throw std::domain_error("pattern_wavenumber: pattern window too short");
    const int i0 = s.grid.index_of(w.x_lo), i1 = s.grid.index_of(w.x_hi);
    std::vector<double> x, v;
    for (int i = i0; i <= i1; ++i) {
        x.push_back(s.grid.x(i));
        v.push_back(s.v[i]);
    }
    return pattern_wavenumber(x, v);
}

namespace {

double median_peak(const StateField& s, double sponge_end) {
    const PatternWindow w = pattern_window(s, sponge_end, 0.0);
    if (!(w.x_hi > w.x_lo)) return 0.0;
    std::vector<double> peaks;
    const int i0 = std::max(1, s.grid.index_of(w.x_lo)), i1 = std::min(s.grid.n - 2, s.grid.index_of(w.x_hi));
    for (int i = i0; i <= i1; ++i) {
        const double c = std::abs(s.v[i]);
        if (c >= std::abs(s.v[i - 1]) && c > std::abs(s.v[i + 1])) peaks.push_back(c);
    }
    return median(peaks);
}

}  // namespace

SaturatedAmplitude saturated_amplitude(const TimeSeries& ts, double mu, double sponge_end) {
    if (ts.snapshots.size() < 2) throw std::invalid_argument("saturated_amplitude: need at least two snapshots");
    const StateField& s = ts.snapshots.back();
    const StateField& r = ts.snapshots[ts.snapshots.size() - 2];
    SaturatedAmplitude a;
    a.mu = mu;
    a.amplitude = median_peak(s, sponge_end);
    const double prev = median_peak(r, sponge_end);
    if (a.amplitude > 0 && s.t > r.t) a.growth_rate = (a.amplitude - prev) / ((s.t - r.t) * a.amplitude);
    a.saturated = a.amplitude > 0 && std::abs(a.growth_rate) <= 0.01;
    return a;
}

AmplitudeScaling amplitude_scaling(const std::vector<SaturatedAmplitude>& runs) {
    if (runs.size() < 2) throw std::invalid_argument("amplitude_scaling: need at least two runs");
    AmplitudeScaling s;
    s.runs = runs;
    for (size_t i = 0; i < runs.size(); ++i)
        for (size_t j = i + 1; j < runs.size(); ++j) {
            if (!(runs[j].amplitude > 0) || !(runs[j].mu > 0)) continue;
            s.ratios.emplace_back(static_cast<int>(i), static_cast<int>(j), runs[i].amplitude / runs[j].amplitude,
                                  std::sqrt(runs[i].mu / runs[j].mu));
        }
    return s;
}

double gl_predicted_amplitude(const SystemParams& p) {
    const double P = gl_cubic_coefficient(p, p.gamma);
    if (!(P < 0)) throw std::domain_error("gl_predicted_amplitude: cubic coefficient must be negative");
    return 2.0 * std::sqrt(p.mu) * (p.d + 2.0 * p.alpha) / std::sqrt(-P);
}

BoundednessCheck boundedness(const TimeSeries& ts, const std::string& key, double t_lo, double t_hi, double tol) {
    const auto& t = ts.t;
    const auto& y = ts.series(key);
    BoundednessCheck b;
    double peak = 0;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_lo && t[i] <= t_hi) {
            if (!std::isfinite(y[i])) return b;
            peak = std::max(peak, y[i]);
        }
    b.sup = peak;
    if (!(peak > 0)) return b;
    // Saturation: first time after which growth over the next 10 units stays below 0.1% per unit.
    b.t_saturated = t_hi;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi - 10.0) continue;
        size_t j = i;
        while (j + 1 < t.size() && t[j] < t[i] + 10.0) ++j;
        if (std::abs(y[j] - y[i]) <= 1e-3 * (t[j] - t[i]) * y[i] && y[i] >= 0.5 * peak) {
            b.t_saturated = t[i];
            break;
        }
    }
    const double span = std::min(100.0, t_hi - b.t_saturated);
    if (span < 50.0) return b;
    // Linear trend on sliding windows of length span, stepped by 10.
    for (double a = b.t_saturated; a + span <= t_hi + 1e-9; a += 10.0) {
        std::vector<double> tw, yw;
        for (size_t i = 0; i < t.size(); ++i)
            if (t[i] >= a && t[i] <= a + span) {
                tw.push_back(t[i]);
                yw.push_back(y[i]);
            }
        const LineFit f = fit_line(tw, yw);
        const double mean = std::accumulate(yw.begin(), yw.end(), 0.0) / yw.size();
        b.max_trend = std::max(b.max_trend, std::abs(f.slope) * 100.0 / mean);
    }
    b.bounded = b.max_trend <= tol;
    return b;
}

}  // namespace kppsh
