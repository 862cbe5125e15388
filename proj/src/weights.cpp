#include "kppsh/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kppsh {

std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::one: return "one";
        case WeightKind::omega_kpp: return "omega_kpp";
        case WeightKind::omega_sh: return "omega_sh";
        case WeightKind::rho_star: return "rho_star";
        case WeightKind::varpi: return "varpi";
        case WeightKind::omega_star: return "omega_star";
        case WeightKind::rho_ul: return "rho_ul";
    }
    return "?";
}

WeightSpec WeightSpec::make(WeightKind k, const SystemParams& p, double theta, bool reciprocal) {
    WeightSpec w;
    w.kind = k;
    w.c_star = critical_speed(p);
    w.d = p.d;
    w.theta = theta;
    w.reciprocal = reciprocal;
    return w;
}

WeightSpec WeightSpec::inverse() const {
    WeightSpec w = *this;
    w.reciprocal = !reciprocal;
    return w;
}

std::array<double, 5> smoothstep5(double t) {
    if (t <= 0) return {0, 0, 0, 0, 0};
    if (t >= 1) return {1, 0, 0, 0, 0};
    const double t2 = t * t, t3 = t2 * t;
    return {t3 * (10.0 - 15.0 * t + 6.0 * t2), 30.0 * t2 * (1.0 - 2.0 * t + t2), 60.0 * t - 180.0 * t2 + 120.0 * t3,
            60.0 - 360.0 * t + 360.0 * t2, -360.0 + 720.0 * t};
}

namespace {

using D5 = std::array<double, 5>;

// Smooth ramp: 0 for x <= -1, x for x >= 1, G' = smoothstep((x+1)/2).
D5 ramp(double x) {
    if (x <= -1) return {0, 0, 0, 0, 0};
    if (x >= 1) return {x, 1, 0, 0, 0};
    const double t = 0.5 * (x + 1.0);
    const double t4 = t * t * t * t;
    const D5 s = smoothstep5(t);
    return {2.0 * t4 * (2.5 - 3.0 * t + t * t), s[0], s[1] / 2.0, s[2] / 4.0, s[3] / 8.0};
}

// 0.5 log(1 + x^2) and derivatives.
D5 log_bracket(double x) {
    const double q = 1.0 + x * x;
    const double x2 = x * x;
    return {0.5 * std::log(q), x / q, (1.0 - x2) / (q * q), 2.0 * x * (x2 - 3.0) / (q * q * q),
            -6.0 * (x2 * x2 - 6.0 * x2 + 1.0) / (q * q * q * q)};
}

D5 scale(const D5& a, double s) { return {a[0] * s, a[1] * s, a[2] * s, a[3] * s, a[4] * s}; }
D5 add(const D5& a, const D5& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]}; }

D5 log_omega_kpp(const WeightSpec& w, double x) { return scale(ramp(x), -w.c_star / (2.0 * w.d)); }

D5 log_omega_sh(const WeightSpec& w, double x) {
    // theta * H(x), H(x) = -G(-x)
    const D5 g = ramp(-x);
    return {-w.theta * g[0], w.theta * g[1], -w.theta * g[2], w.theta * g[3], -w.theta * g[4]};
}

D5 log_rho_star(double x) {
    if (x <= -1) return {0, 0, 0, 0, 0};
    const D5 l = log_bracket(x);
    if (x >= 1) return l;
    const D5 s = smoothstep5(0.5 * (x + 1.0));
    D5 sx;
    for (int k = 0; k < 5; ++k) sx[k] = s[k] / std::pow(2.0, k);
    // Leibniz rule for S(t(x)) * l(x)
    static const int binom[5][5] = {{1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
    D5 out{};
    for (int k = 0; k < 5; ++k)
        for (int j = 0; j <= k; ++j) out[k] += binom[k][j] * sx[j] * l[k - j];
    return out;
}

}  // namespace

std::array<double, 5> log_weight_derivs(const WeightSpec& w, double x) {
    D5 L{};
    switch (w.kind) {
        case WeightKind::one: break;
        case WeightKind::omega_kpp: L = log_omega_kpp(w, x); break;
        case WeightKind::omega_sh: L = log_omega_sh(w, x); break;
        case WeightKind::rho_star: L = log_rho_star(x); break;
        case WeightKind::varpi: L = add(log_rho_star(x), log_omega_kpp(w, x)); break;
        case WeightKind::omega_star: L = add(log_omega_kpp(w, x), log_omega_sh(w, x)); break;
        case WeightKind::rho_ul: L = scale(log_bracket(x), -2.0); break;
    }
    return w.reciprocal ? scale(L, -1.0) : L;
}

std::array<double, 5> weight_ratios(const WeightSpec& w, double x) {
    const D5 L = log_weight_derivs(w, x);
    const double a = L[1], b = L[2], c = L[3], e = L[4];
    return {1.0, a, b + a * a, c + 3.0 * a * b + a * a * a,
            e + 4.0 * a * c + 3.0 * b * b + 6.0 * a * a * b + a * a * a * a};
}

std::array<double, 5> weight_derivs(const WeightSpec& w, double x) {
    const double v = eval_weight(w, x);
    D5 r = weight_ratios(w, x);
    for (auto& e : r) e *= v;
    return r;
}

double eval_weight(const WeightSpec& w, double x) { return std::exp(log_weight_derivs(w, x)[0]); }

std::vector<double> eval_weight(const WeightSpec& w, const Grid1D& g) {
    std::vector<double> out(static_cast<size_t>(g.n));
    for (int i = 0; i < g.n; ++i) out[i] = eval_weight(w, g.x(i));
    return out;
}

double weighted_sup_norm(const Field1D& f, const WeightSpec& w) {
    if (f.grid.frame != w.frame) throw std::invalid_argument("weighted_sup_norm: frame mismatch");
    double m = 0;
    for (int i = 0; i < f.size(); ++i) {
        const double L = log_weight_derivs(w, f.grid.x(i))[0];
        if (f[i] == 0.0) continue;
        // |f| * exp(L) evaluated in log form to avoid overflow of the weight itself
        m = std::max(m, std::exp(std::log(std::abs(f[i])) + L));
    }
    return m;
}

UlNorm ul_sobolev_norm(const Field1D& f, int s) {
    if (s != 0 && s != 1) throw std::invalid_argument("ul_sobolev_norm: order must be 0 or 1");
    const Grid1D& g = f.grid;
    const int n = g.n;
    const double h = g.dx();
    UlNorm r;
    r.coarse_warning = h > 0.5;
    std::vector<double> fp;
    if (s == 1) {
        fp.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            if (g.periodic) {
                fp[i] = (f[(i + 1) % n] - f[(i - 1 + n) % n]) / (2.0 * h);
            } else if (i == 0) {
                fp[i] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
            } else if (i == n - 1) {
                fp[i] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
            } else {
                fp[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
            }
        }
    }
    const double L = g.length();
    // Tabulate the window and its derivative by index offset.
    const int span = g.periodic ? n : 2 * n - 1;
    std::vector<double> rho(static_cast<size_t>(span)), drho(static_cast<size_t>(span));
    for (int k = 0; k < span; ++k) {
        const int off = g.periodic ? k : k - (n - 1);
        double z = off * h;
        if (g.periodic) {
            z = std::fmod(z, L);
            if (z > 0.5 * L) z -= L;
        }
        const double q = 1.0 + z * z;
        rho[k] = 1.0 / q;
        drho[k] = -2.0 * z / (q * q);
    }
    double best = 0;
    for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            const int k = g.periodic ? ((i - j) % n + n) % n : i - j + n - 1;
            const double wt = (!g.periodic && (i == 0 || i == n - 1)) ? 0.5 : 1.0;
            const double a = rho[k] * f[i];
            double term = a * a;
            if (s == 1) {
                const double b = drho[k] * f[i] + rho[k] * fp[i];
                term += b * b;
            }
            acc += wt * term;
        }
        best = std::max(best, acc * h);
    }
    r.value = std::sqrt(best);
    return r;
}

}  // namespace kppsh
