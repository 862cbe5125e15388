#include "kppsh/params.hpp"

#include <cmath>
#include <stdexcept>

namespace kppsh {

double SystemParams::c_star() const { return critical_speed(*this); }

double SystemParams::epsilon() const {
    if (mu < 0) throw std::domain_error("epsilon requires mu >= 0");
    return std::sqrt(mu);
}

void SystemParams::validate() const {
    if (!(d > 0)) throw std::invalid_argument("d must be positive");
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
    if (beta == 0 || !std::isfinite(beta)) throw std::invalid_argument("beta must be nonzero");
    if (!(mu0 > 0)) throw std::invalid_argument("mu0 must be positive");
    if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
}

double critical_speed(const SystemParams& p) {
    if (!(p.d > 0) || !(p.alpha > 0)) throw std::domain_error("critical_speed: d and alpha must be positive");
    return 2.0 * std::sqrt(p.d * p.alpha);
}

double gamma_rem(const SystemParams& p) {
    if (!(p.d > 0)) throw std::domain_error("gamma_rem: d must be positive");
    const double r = p.alpha / p.d;
    return 8.0 * r * r + 4.0 * r - 2.0 * p.alpha + p.mu0;
}

double gl_a(const SystemParams& p) {
    const double s = p.d + 2.0 * p.alpha;
    const double q = 4.0 * p.d + 2.0 * p.alpha;
    return 19.0 / 9.0 + s * (1.0 / p.alpha + 1.0 / (9.0 * q));
}

double gl_cubic_coefficient(const SystemParams& p, double gamma) {
    const double s = p.d + 2.0 * p.alpha;
    const double q = 4.0 * p.d + 2.0 * p.alpha;
    const double b2 = p.beta * p.beta;
    return gl_a(p) * gamma * gamma * b2 - 3.0 * gamma * b2 * (1.0 + p.alpha / q) - 3.0 * p.sigma * s * s;
}

double gamma_gl(const SystemParams& p) {
    const double a = gl_a(p);
    const double s = p.d + 2.0 * p.alpha;
    const double q = 4.0 * p.d + 2.0 * p.alpha;
    const double h = 3.0 * (4.0 * p.d + 3.0 * p.alpha) / (2.0 * a * q);
    return h + std::sqrt(h * h + 3.0 * p.sigma * s * s / (a * p.beta * p.beta));
}

GateReport check_hypotheses(const SystemParams& p) {
    p.validate();
    GateReport r;
    r.c_star = critical_speed(p);
    r.gamma_rem = gamma_rem(p);
    r.gamma_gl = gamma_gl(p);
    if (r.gamma_rem < r.gamma_gl) r.gamma_interval = std::make_pair(r.gamma_rem, r.gamma_gl);
    r.admissible = r.gamma_rem < r.gamma_gl && p.gamma > r.gamma_rem && p.gamma < r.gamma_gl;
    r.p_of_gamma = gl_cubic_coefficient(p, p.gamma);
    return r;
}

std::pair<double, double> homogeneous_rhs(const SystemParams& p, double u, double v) {
    const double fu = p.alpha * u * (1.0 - u * u) + p.beta * v;
    const double fv = -v + v * (p.mu - p.sigma * v * v) - p.gamma * v * (1.0 - u);
    return {fu, fv};
}

EquilibriumSet equilibria(const SystemParams& p) {
    if (p.mu >= 1.0) throw std::domain_error("equilibria: mu must be < 1");
    EquilibriumSet out;
    out.points = {{0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}};
    const double k = p.gamma * p.beta / (2.0 * p.alpha);
    out.sigma0 = k * k / (4.0 * (1.0 - p.mu));
    if (p.sigma > out.sigma0) return out;

    // Gap between u on the v-equation curve and the u-equation curve, as a function of v > 0.
    // From the v equation: u = 1 - (mu - 1 - sigma v^2)/gamma. Plug into the u equation.
    auto u_of = [&](double v) { return 1.0 - (p.mu - 1.0 - p.sigma * v * v) / p.gamma; };
    auto gap = [&](double v) {
        const double u = u_of(v);
        return p.alpha * u * (1.0 - u * u) + p.beta * v;
    };
    const double vmax = 2.0 * k / p.sigma;
    const int nscan = 20000;
    double v0 = vmax * 1e-9;
    double g0 = gap(v0);
    for (int i = 1; i <= nscan; ++i) {
        const double v1 = vmax * i / nscan;
        const double g1 = gap(v1);
        if (g0 == 0.0) {
            out.points.push_back({u_of(v0), v0});
        } else if ((g0 < 0) != (g1 < 0)) {
            double lo = v0, hi = v1, glo = g0;
            while (hi - lo > 1e-12 * std::max(1.0, hi)) {
                const double mid = 0.5 * (lo + hi);
                const double gm = gap(mid);
                if ((gm < 0) == (glo < 0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double v = 0.5 * (lo + hi);
            out.points.push_back({u_of(v), v});
        }
        v0 = v1;
        g0 = g1;
    }
    return out;
}

}  // namespace kppsh
