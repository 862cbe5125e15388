#include "kppsh/front.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kppsh/ode.hpp"

namespace kppsh {

double left_saddle_rate(const SystemParams& p) { return (std::sqrt(3.0) - 1.0) * std::sqrt(p.alpha / p.d); }

namespace {

double hermite(double x0, double h, double y0, double y1, double d0, double d1, double x, bool deriv) {
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    if (!deriv)
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * d1) / h;
}

}  // namespace

double FrontProfile::q_at(double x) const {
    if (x <= grid.x_min) return q.front();
    if (x >= grid.x_max) return q.back();
    const double h = grid.dx();
    int i = static_cast<int>((x - grid.x_min) / h);
    i = std::min(i, grid.n - 2);
    return hermite(grid.x(i), h, q[i], q[i + 1], qprime[i], qprime[i + 1], x, false);
}

double FrontProfile::qprime_at(double x) const {
    if (x <= grid.x_min) return qprime.front();
    if (x >= grid.x_max) return qprime.back();
    const double h = grid.dx();
    int i = static_cast<int>((x - grid.x_min) / h);
    i = std::min(i, grid.n - 2);
    return hermite(grid.x(i), h, q[i], q[i + 1], qprime[i], qprime[i + 1], x, true);
}

ShootResult shoot_front(const SystemParams& p, double c, double x_end, double rtol) {
    using DP = DoPri<2>;
    const double kappa = left_saddle_rate(p);
    const DP::Rhs f = [&](double, const DP::State& y) -> DP::State {
        return {y[1], -(c * y[1] + p.alpha * y[0] * (1.0 - y[0] * y[0])) / p.d};
    };
    const double p0 = 1e-8;
    DP::State y{1.0 - p0, -kappa * p0};
    std::vector<double> s{0.0}, qs{y[0]}, dqs{y[1]};
    double x = 0.0, h = 1e-2;
    const double atol = 1e-300;
    double s_half = NAN;
    double limit = 1e9;
    ShootResult out;
    for (int guard = 0; guard < 5000000; ++guard) {
        if (!std::isnan(s_half) && x >= limit) break;
        if (!std::isnan(s_half) && x + h > limit) h = limit - x;
        double err = 0;
        const DP::State yn = DP::step(f, x, y, h, rtol, atol, err);
        if (err <= 1.0) {
            if (std::isnan(s_half) && yn[0] <= 0.5) {
                // locate the crossing by a secant on the accepted step
                const double w = (y[0] - 0.5) / (y[0] - yn[0]);
                s_half = x + w * h;
                limit = s_half + x_end;
            }
            x += h;
            y = yn;
            s.push_back(x);
            qs.push_back(y[0]);
            dqs.push_back(y[1]);
            if (y[0] < 0) {
                out.went_negative = true;
                break;
            }
            if (x > 1e4) throw std::runtime_error("shoot_front: no crossing of q = 1/2");
        }
        const double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, fac));
        h = std::min(h, 0.05);
    }
    if (std::isnan(s_half)) throw std::runtime_error("shoot_front: no crossing of q = 1/2");
    for (size_t i = 0; i < s.size(); ++i) {
        out.x.push_back(s[i] - s_half);
        out.q.push_back(qs[i]);
        out.qprime.push_back(dqs[i]);
    }
    if (out.went_negative) {
        // first negative sample
        for (size_t i = 0; i < out.q.size(); ++i)
            if (out.q[i] < 0) {
                out.x_negative = out.x[i];
                break;
            }
    }
    return out;
}

std::vector<double> front_residual(const SystemParams& p, const Grid1D& g, const std::vector<double>& q, double c) {
    const double h = g.dx();
    std::vector<double> r(q.size(), 0.0);
    for (int i = 1; i + 1 < g.n; ++i)
        r[i] = p.d * (q[i + 1] - 2 * q[i] + q[i - 1]) / (h * h) + c * (q[i + 1] - q[i - 1]) / (2 * h) +
               p.alpha * q[i] * (1.0 - q[i] * q[i]);
    return r;
}

FrontProfile solve_front(const SystemParams& p, const Grid1D& grid, double x_phase, bool enforce_resolution) {
    p.validate();
    const double c = critical_speed(p);
    const double kappa = left_saddle_rate(p);
    const double r = c / (2.0 * p.d);
    const int n = grid.n;
    const double h = grid.dx();
    if (grid.x_min > -20 || grid.x_max < 20) throw std::invalid_argument("solve_front: domain must cover [-20, 20]");
    if (enforce_resolution && h > 0.1 / kappa + 1e-12) throw std::invalid_argument("solve_front: grid does not resolve the saddle rate");
    if (x_phase <= grid.x_min || x_phase >= grid.x_max) throw std::invalid_argument("solve_front: phase point outside grid");

    // Initial guess from shooting.
    const ShootResult sh = shoot_front(p, c, grid.x_max - x_phase + 1.0);
    std::vector<double> q(static_cast<size_t>(n));
    const double xs0 = sh.x.front() + x_phase;
    size_t j = 0;
    double last_x = sh.x.back() + x_phase, last_q = sh.q.back();
    if (sh.went_negative) {
        // back off to the last positive sample
        for (size_t k = 0; k < sh.q.size(); ++k)
            if (sh.q[k] > 0) {
                last_x = sh.x[k] + x_phase;
                last_q = sh.q[k];
            } else {
                break;
            }
    }
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        if (x <= xs0) {
            q[i] = 1.0 - (1.0 - sh.q.front()) * std::exp(kappa * (x - xs0));
        } else if (x >= last_x) {
            q[i] = last_q * std::exp(-r * (x - last_x));
        } else {
            while (j + 1 < sh.x.size() && sh.x[j + 1] + x_phase < x) ++j;
            const double xa = sh.x[j] + x_phase, xb = sh.x[j + 1] + x_phase;
            q[i] = hermite(xa, xb - xa, sh.q[j], sh.q[j + 1], sh.qprime[j], sh.qprime[j + 1], x, false);
        }
    }

    // Phase row: linear interpolation between the two grid points around x_phase.
    int ip = static_cast<int>(std::floor((x_phase - grid.x_min) / h));
    ip = std::max(1, std::min(ip, n - 3));
    double wp = (x_phase - grid.x(ip)) / h;
    if (std::abs(wp - 1.0) < 1e-12) {
        ++ip;
        wp = 0.0;
    }
    if (std::abs(wp) < 1e-12) wp = 0.0;

    Eigen::VectorXd F(n), dq(n);
    FrontProfile out;
    out.grid = grid;
    out.c = c;
    auto assemble = [&](Eigen::SparseMatrix<double>* J) {
        std::vector<Eigen::Triplet<double>> t;
        if (J) t.reserve(static_cast<size_t>(3 * n + 4));
        F(0) = (-3 * q[0] + 4 * q[1] - q[2]) / (2 * h) + kappa * (1.0 - q[0]);
        if (J) {
            t.emplace_back(0, 0, -3.0 / (2 * h) - kappa);
            t.emplace_back(0, 1, 4.0 / (2 * h));
            t.emplace_back(0, 2, -1.0 / (2 * h));
        }
        const double a_lo = p.d / (h * h) - c / (2 * h), a_hi = p.d / (h * h) + c / (2 * h);
        for (int i = 1; i + 1 < n; ++i) {
            F(i) = a_lo * q[i - 1] - 2 * p.d / (h * h) * q[i] + a_hi * q[i + 1] + p.alpha * q[i] * (1 - q[i] * q[i]);
            if (J) {
                t.emplace_back(i, i - 1, a_lo);
                t.emplace_back(i, i, -2 * p.d / (h * h) + p.alpha * (1 - 3 * q[i] * q[i]));
                t.emplace_back(i, i + 1, a_hi);
            }
        }
        F(n - 1) = (1 - wp) * q[ip] + wp * q[ip + 1] - 0.5;
        if (J) {
            t.emplace_back(n - 1, ip, 1 - wp);
            if (wp != 0.0) t.emplace_back(n - 1, ip + 1, wp);
            J->setFromTriplets(t.begin(), t.end());
        }
    };
    Eigen::SparseMatrix<double> J(n, n);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double res = 0;
    int it = 0;
    for (; it < 50; ++it) {
        assemble(&J);
        res = F.lpNorm<Eigen::Infinity>();
        if (res < 1e-12) break;
        if (it == 0) lu.analyzePattern(J);
        lu.factorize(J);
        if (lu.info() != Eigen::Success) throw std::runtime_error("solve_front: singular Jacobian");
        dq = lu.solve(F);
        for (int i = 0; i < n; ++i) q[i] -= dq(i);
    }
    assemble(nullptr);
    res = F.lpNorm<Eigen::Infinity>();
    if (res > 1e-9)
        throw std::runtime_error("solve_front: Newton did not converge, residual " + std::to_string(res));
    out.q = q;
    out.newton_iterations = it;
    const auto rr = front_residual(p, grid, q, c);
    for (int i = 1; i + 1 < n; ++i) out.residual = std::max(out.residual, std::abs(rr[i]));
    out.qprime.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n)
            out.qprime[i] = (-q[i + 2] + 8 * q[i + 1] - 8 * q[i - 1] + q[i - 2]) / (12 * h);
        else if (i == 0)
            out.qprime[i] = (-3 * q[0] + 4 * q[1] - q[2]) / (2 * h);
        else if (i == n - 1)
            out.qprime[i] = (3 * q[n - 1] - 4 * q[n - 2] + q[n - 3]) / (2 * h);
        else
            out.qprime[i] = (q[i + 1] - q[i - 1]) / (2 * h);
    }
    return out;
}

FrontProfile solve_front(const SystemParams& p, double x_min, double x_max, int n) {
    return solve_front(p, Grid1D::uniform(x_min, x_max, n), 0.0);
}

FrontFit check_front_asymptotics(const FrontProfile& f, const SystemParams& p, double fit_lo, double fit_hi) {
    if (fit_hi < 0) fit_hi = f.grid.x_max - 5.0;
    const double r = f.c / (2.0 * p.d);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, m = 0;
    for (int i = 0; i < f.grid.n; ++i) {
        const double x = f.grid.x(i);
        if (x < fit_lo || x > fit_hi) continue;
        const double y = f.qprime[i] * std::exp(r * x);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        m += 1;
    }
    FrontFit fit;
    const double cov = sxy - sx * sy / m, vx = sxx - sx * sx / m, vy = syy - sy * sy / m;
    fit.a = cov / vx;
    fit.b = (sy - fit.a * sx) / m;
    fit.r_squared = vy > 0 ? cov * cov / (vx * vy) : 1.0;
    // left tail rate: slope of log(1 - q) on the first five length units
    double tx = 0, ty = 0, txx = 0, txy = 0, tm = 0;
    for (int i = 0; i < f.grid.n; ++i) {
        const double x = f.grid.x(i);
        if (x > f.grid.x_min + 5.0) break;
        const double y = std::log(1.0 - f.q[i]);
        tx += x;
        ty += y;
        txx += x * x;
        txy += x * y;
        tm += 1;
    }
    fit.kappa_measured = (txy - tx * ty / tm) / (txx - tx * tx / tm);
    fit.kappa_expected = left_saddle_rate(p);
    return fit;
}

}  // namespace kppsh
