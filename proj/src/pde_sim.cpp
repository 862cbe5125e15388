#include "kppsh/pde_sim.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "kppsh/banded.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace kppsh {

std::string to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::P: return "P";
        case PerturbationKind::U: return "U";
        case PerturbationKind::V: return "V";
    }
    return "?";
}

namespace {

// Denormals appear in far tails multiplied by huge weights only; flushing them keeps steps fast.
struct FlushDenormals {
#if defined(__SSE__)
    unsigned int saved;
    FlushDenormals() : saved(_mm_getcsr()) { _mm_setcsr(saved | 0x8040); }
    ~FlushDenormals() { _mm_setcsr(saved); }
#endif
};

double sponge_profile(double x, double x_min, double width, double strength) {
    const double z = (x_min + width - x) / width;
    if (z <= 0) return 0.0;
    return strength * std::min(1.0, z) * std::min(1.0, z) * std::min(1.0, z);
}

void check_finite(const std::vector<double>& a, const char* what, const StateField& last) {
    double s = 0;
    for (double x : a) s += x;
    if (!std::isfinite(s)) throw SimulationAborted(std::string("non-finite values in ") + what, last);
}

}  // namespace

std::vector<IcBump> SimConfig::default_ic(const SystemParams& p, double theta) {
    const double delta = 0.01 * std::sqrt(std::max(p.mu, 0.0));
    // The Turing seed sits behind the front where u is close to 1; its amplitude is set in V units.
    const double x_seed = -40.0;
    return {IcBump{0, 0.0, 2.0, delta}, IcBump{1, x_seed, 4.0, delta * std::exp(-theta * x_seed)}};
}

void SimConfig::validate() const {
    params.validate();
    if (!(dt > 0) || !(t_end >= 0)) throw std::invalid_argument("SimConfig: bad time parameters");
    if (grid.periodic) throw std::invalid_argument("SimConfig: grid must be non-periodic");
    if (grid.dx() > 0.2 + 1e-12) throw std::invalid_argument("SimConfig: dx must be <= 0.2");
    if (sponge_width < 20.0) throw std::invalid_argument("SimConfig: sponge width must be >= 20");
    if (grid.x_min > -20 || grid.x_max < 20) throw std::invalid_argument("SimConfig: domain must cover [-20, 20]");
}

namespace {

// Coefficients at offsets -2..2 of d u'' + c u' at interior row i: fourth order away from the
// boundaries, second order on the rows next to them.
std::array<double, 5> kpp_stencil(int i, int n, double h, double d, double c) {
    if (i == 1 || i == n - 2)
        return {0.0, d / (h * h) - c / (2 * h), -2 * d / (h * h), d / (h * h) + c / (2 * h), 0.0};
    const double a = d / (12 * h * h), b = c / (12 * h);
    return {-a + b, 16 * a - 8 * b, -30 * a, 16 * a + 8 * b, -a - b};
}

}  // namespace

FrontProfile background_front(const SystemParams& p, const Grid1D& g) {
    FrontProfile f = solve_front(p, g, 0.0, false);
    const int n = g.n;
    const double h = g.dx();
    const double c = f.c;
    const int i0 = g.index_of(0.0);
    std::vector<double> q = f.q;
    using Trip = Eigen::Triplet<double>;
    auto residual = [&](const std::vector<double>& qq, int i) {
        const auto st = kpp_stencil(i, n, h, p.d, c);
        double r = p.alpha * qq[i] * (1.0 - qq[i] * qq[i]);
        for (int k = -2; k <= 2; ++k)
            if (st[k + 2] != 0.0) r += st[k + 2] * qq[i + k];
        return r;
    };
    // Newton on the interior rows with q(x_min) fixed; the right end value is left free and the
    // last row pins q at the phase point instead.
    for (int it = 0; it < 12; ++it) {
        std::vector<Trip> trips;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        trips.emplace_back(0, 0, 1.0);
        double rmax = 0;
        for (int i = 1; i + 1 < n; ++i) {
            const auto st = kpp_stencil(i, n, h, p.d, c);
            for (int k = -2; k <= 2; ++k)
                if (st[k + 2] != 0.0) trips.emplace_back(i, i + k, st[k + 2]);
            trips.emplace_back(i, i, p.alpha * (1.0 - 3.0 * q[i] * q[i]));
            const double r = residual(q, i);
            rhs[i] = -r;
            rmax = std::max(rmax, std::abs(r));
        }
        trips.emplace_back(n - 1, i0, 1.0);
        rhs[n - 1] = f.q[i0] - q[i0];
        if (rmax < 1e-14) break;
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw std::runtime_error("background_front: factorization failed");
        const Eigen::VectorXd dq = lu.solve(rhs);
        for (int i = 0; i < n; ++i) q[i] += dq[i];
        f.newton_iterations++;
    }
    f.q = q;
    f.residual = 0;
    for (int i = 1; i + 1 < n; ++i) f.residual = std::max(f.residual, std::abs(residual(q, i)));
    for (int i = 2; i + 2 < n; ++i) f.qprime[i] = (-q[i + 2] + 8 * q[i + 1] - 8 * q[i - 1] + q[i - 2]) / (12 * h);
    return f;
}

std::shared_ptr<const SimContext> make_context(const SimConfig& cfg) {
    cfg.validate();
    auto ctx = std::make_shared<SimContext>();
    ctx->cfg = cfg;
    ctx->front = background_front(cfg.params, cfg.grid);
    ctx->theta = select_theta(cfg.params);
    const Grid1D& g = cfg.grid;
    const int n = g.n;
    ctx->sponge.resize(n);
    ctx->inv_omega_star.resize(n);
    ctx->inv_varpi.resize(n);
    ctx->inv_rho_star.resize(n);
    ctx->omega_star.resize(n);
    ctx->omega_sh.resize(n);
    const auto ws = WeightSpec::make(WeightKind::omega_star, cfg.params, ctx->theta.theta);
    const auto wv = WeightSpec::make(WeightKind::varpi, cfg.params, ctx->theta.theta);
    const auto wr = WeightSpec::make(WeightKind::rho_star, cfg.params, ctx->theta.theta);
    const auto wsh = WeightSpec::make(WeightKind::omega_sh, cfg.params, ctx->theta.theta);
    for (int i = 0; i < n; ++i) {
        const double x = g.x(i);
        ctx->sponge[i] = sponge_profile(x, g.x_min, cfg.sponge_width, cfg.sponge_strength);
        const double ls = log_weight_derivs(ws, x)[0];
        ctx->omega_star[i] = std::exp(ls);
        ctx->inv_omega_star[i] = std::exp(-ls);
        ctx->inv_varpi[i] = std::exp(-log_weight_derivs(wv, x)[0]);
        ctx->inv_rho_star[i] = std::exp(-log_weight_derivs(wr, x)[0]);
        ctx->omega_sh[i] = eval_weight(wsh, x);
    }
    return ctx;
}

// ----------------------------------------------------------------- full stepper

struct FullStepper::Impl {
    int n;
    BandedMatrix Lu, Lv, Au, Av;
    std::vector<double> Nu_prev, Nv_prev, Nu, Nv, ru, rv;
    bool have_prev = false;
    Impl(int n_) : n(n_), Lu(n_, 2, 2), Lv(n_, 2, 2), Au(n_, 2, 2), Av(n_, 2, 2) {}
};

FullStepper::FullStepper(std::shared_ptr<const SimContext> ctx) : ctx_(std::move(ctx)) {
    const auto& cfg = ctx_->cfg;
    const auto& p = cfg.params;
    const int n = cfg.grid.n;
    const double h = cfg.grid.dx();
    const double c = critical_speed(p);
    impl_ = std::make_shared<Impl>(n);
    auto& I = *impl_;
    for (int i = 1; i + 1 < n; ++i) {
        const double s = ctx_->sponge[i];
        const auto st = kpp_stencil(i, n, h, p.d, c);
        for (int k = -2; k <= 2; ++k)
            if (st[k + 2] != 0.0) I.Lu.add(i, i + k, st[k + 2]);
        I.Lu.add(i, i, -s);

        const double h2 = h * h, h4 = h2 * h2;
        // -v - 2 v'' - v'''' + c v' - s v, clamped ends via mirrored ghosts
        I.Lv.add(i, i, -1.0 - s + 4.0 / h2 - 6.0 / h4);
        I.Lv.add(i, i - 1, -2.0 / h2 + 4.0 / h4 - c / (2 * h));
        I.Lv.add(i, i + 1, -2.0 / h2 + 4.0 / h4 + c / (2 * h));
        if (i - 2 >= 0) I.Lv.add(i, i - 2, -1.0 / h4); else I.Lv.add(i, i, -1.0 / h4);
        if (i + 2 <= n - 1) I.Lv.add(i, i + 2, -1.0 / h4); else I.Lv.add(i, i, -1.0 / h4);
    }
    const double dt = cfg.dt;
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
            const double id = i == j ? 1.0 : 0.0;
            if (i == 0 || i == n - 1) {
                I.Au.set(i, j, id);
                I.Av.set(i, j, id);
            } else {
                I.Au.set(i, j, id - 0.5 * dt * I.Lu.get(i, j));
                I.Av.set(i, j, id - 0.5 * dt * I.Lv.get(i, j));
            }
        }
    }
    I.Au.factorize();
    I.Av.factorize();
    I.Nu.resize(n);
    I.Nv.resize(n);
    I.Nu_prev.resize(n);
    I.Nv_prev.resize(n);
    I.ru.resize(n);
    I.rv.resize(n);
}

void FullStepper::step(StateField& s) {
    FlushDenormals ftz;
    auto& I = *impl_;
    const auto& cfg = ctx_->cfg;
    const auto& p = cfg.params;
    const auto& q = ctx_->front.q;
    const int n = I.n;
    const double dt = cfg.dt;
    for (int i = 0; i < n; ++i) {
        const double u = s.u[i], v = s.v[i];
        I.Nu[i] = p.alpha * u * (1.0 - u * u) + p.beta * v + ctx_->sponge[i] * q[i];
        I.Nv[i] = p.mu * v - p.sigma * v * v * v - p.gamma * v * (1.0 - u);
    }
    const double w1 = I.have_prev ? 1.5 : 1.0, w0 = I.have_prev ? -0.5 : 0.0;
    I.Lu.multiply(s.u.data(), I.ru.data());
    I.Lv.multiply(s.v.data(), I.rv.data());
    for (int i = 1; i + 1 < n; ++i) {
        I.ru[i] = s.u[i] + 0.5 * dt * I.ru[i] + dt * (w1 * I.Nu[i] + w0 * I.Nu_prev[i]);
        I.rv[i] = s.v[i] + 0.5 * dt * I.rv[i] + dt * (w1 * I.Nv[i] + w0 * I.Nv_prev[i]);
    }
    I.ru[0] = q.front();
    I.ru[n - 1] = q.back();
    I.rv[0] = 0.0;
    I.rv[n - 1] = 0.0;
    I.Au.solve(I.ru.data());
    I.Av.solve(I.rv.data());
    check_finite(I.ru, "u", s);
    check_finite(I.rv, "v", s);
    std::swap(I.Nu, I.Nu_prev);
    std::swap(I.Nv, I.Nv_prev);
    I.have_prev = true;
    s.u.swap(I.ru);
    s.v.swap(I.rv);
    s.t += dt;
}

StateField step_full(const StateField& s, FullStepper& stepper) {
    StateField out = s;
    stepper.step(out);
    return out;
}

// ------------------------------------------------------------ weighted stepper

struct WeightedStepper::Impl {
    int n;
    BandedMatrix L1, L2, A1, A2;
    std::vector<double> N1, N2, N1p, N2p, r1, r2, pot1, pot2;
    bool have_prev = false;
    Impl(int n_) : n(n_), L1(n_, 2, 2), L2(n_, 2, 2), A1(n_, 2, 2), A2(n_, 2, 2) {}
};

WeightedStepper::WeightedStepper(std::shared_ptr<const SimContext> ctx) : ctx_(std::move(ctx)) {
    const auto& cfg = ctx_->cfg;
    const auto& p = cfg.params;
    const int n = cfg.grid.n;
    const double h = cfg.grid.dx();
    const double c = critical_speed(p);
    impl_ = std::make_shared<Impl>(n);
    auto& I = *impl_;
    const auto ws = WeightSpec::make(WeightKind::omega_star, p, ctx_->theta.theta);
    const double h2 = h * h, h3 = h2 * h, h4 = h2 * h2;
    I.pot1.resize(n);
    I.pot2.resize(n);
    for (int i = 1; i + 1 < n; ++i) {
        const auto w = weight_ratios(ws, cfg.grid.x(i));
        const double s = ctx_->sponge[i];
        const double q = ctx_->front.q[i];
        I.pot1[i] = p.alpha * (1.0 - 3.0 * q * q);
        I.pot2[i] = p.mu - p.gamma * (1.0 - q);
        // u1: d u'' + (2 d w1 + c) u' + (d w2 + c w1 - s) u
        const double b1 = 2 * p.d * w[1] + c, b0 = p.d * w[2] + c * w[1] - s;
        I.L1.set(i, i - 1, p.d / h2 - b1 / (2 * h));
        I.L1.set(i, i, -2 * p.d / h2 + b0);
        I.L1.set(i, i + 1, p.d / h2 + b1 / (2 * h));
        // u2: c4 u'''' + c3 u''' + c2 u'' + c1 u' + c0 u
        const double c4 = -1.0, c3 = -4.0 * w[1], c2 = -2.0 - 6.0 * w[2];
        const double c1 = -4.0 * w[1] - 4.0 * w[3] + c, c0 = -1.0 - 2.0 * w[2] - w[4] + c * w[1] - s;
        const double st[5] = {c4 / h4 - c3 / (2 * h3), -4 * c4 / h4 + c3 / h3 + c2 / h2 - c1 / (2 * h),
                              6 * c4 / h4 - 2 * c2 / h2 + c0, -4 * c4 / h4 - c3 / h3 + c2 / h2 + c1 / (2 * h),
                              c4 / h4 + c3 / (2 * h3)};
        for (int k = -2; k <= 2; ++k) {
            int j = i + k;
            if (j < 0) j = -j;                   // mirrored ghost across x_min
            if (j > n - 1) j = 2 * (n - 1) - j;  // mirrored ghost across x_max
            I.L2.add(i, j, st[k + 2]);
        }
    }
    const double dt = cfg.dt;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
            const double id = i == j ? 1.0 : 0.0;
            if (i == 0 || i == n - 1) {
                I.A1.set(i, j, id);
                I.A2.set(i, j, id);
            } else {
                I.A1.set(i, j, id - 0.5 * dt * I.L1.get(i, j));
                I.A2.set(i, j, id - 0.5 * dt * I.L2.get(i, j));
            }
        }
    I.A1.factorize();
    I.A2.factorize();
    for (auto* v : {&I.N1, &I.N2, &I.N1p, &I.N2p, &I.r1, &I.r2}) v->resize(n);
}

void WeightedStepper::step(PerturbationField& U) {
    if (U.kind != PerturbationKind::U) throw std::invalid_argument("WeightedStepper: expects a U field");
    FlushDenormals ftz;
    auto& I = *impl_;
    const auto& p = ctx_->cfg.params;
    const double dt = ctx_->cfg.dt;
    const int n = I.n;
    auto nl = nonlinear_terms_weighted(U, ctx_->front, p, ctx_->omega_star);
    for (int i = 0; i < n; ++i) {
        I.N1[i] = nl.first[i] + I.pot1[i] * U.first[i] + p.beta * U.second[i];
        I.N2[i] = nl.second[i] + I.pot2[i] * U.second[i];
    }
    const double w1 = I.have_prev ? 1.5 : 1.0, w0 = I.have_prev ? -0.5 : 0.0;
    I.L1.multiply(U.first.data(), I.r1.data());
    I.L2.multiply(U.second.data(), I.r2.data());
    for (int i = 1; i + 1 < n; ++i) {
        I.r1[i] = U.first[i] + 0.5 * dt * I.r1[i] + dt * (w1 * I.N1[i] + w0 * I.N1p[i]);
        I.r2[i] = U.second[i] + 0.5 * dt * I.r2[i] + dt * (w1 * I.N2[i] + w0 * I.N2p[i]);
    }
    I.r1[0] = I.r1[n - 1] = I.r2[0] = I.r2[n - 1] = 0.0;
    I.A1.solve(I.r1.data());
    I.A2.solve(I.r2.data());
    std::swap(I.N1, I.N1p);
    std::swap(I.N2, I.N2p);
    I.have_prev = true;
    U.first.swap(I.r1);
    U.second.swap(I.r2);
    U.t += dt;
}

// ------------------------------------------------------------ fields & frames

StateField equilibrium_state(const SimContext& ctx) {
    StateField s;
    s.grid = ctx.cfg.grid;
    s.u = ctx.front.q;
    s.v.assign(ctx.front.q.size(), 0.0);
    return s;
}

StateField initial_state(const SimContext& ctx) {
    StateField s = equilibrium_state(ctx);
    const int n = s.grid.n;
    std::vector<double> u1(n, 0.0), u2(n, 0.0);
    for (const auto& b : ctx.cfg.ic) {
        for (int i = 0; i < n; ++i) {
            const double z = (s.grid.x(i) - b.center) / b.width;
            (b.component == 0 ? u1 : u2)[i] += b.amplitude * std::exp(-0.5 * z * z);
        }
    }
    if (ctx.cfg.noise > 0) {
        std::mt19937_64 rng(ctx.cfg.seed);
        std::uniform_real_distribution<double> dist(-ctx.cfg.noise, ctx.cfg.noise);
        // Bounded by `noise` in the raw perturbation and in U rho*^3.
        for (int i = 1; i + 1 < n; ++i) {
            const double r3 = ctx.inv_rho_star[i] * ctx.inv_rho_star[i] * ctx.inv_rho_star[i];
            const double m = std::min(1.0, ctx.inv_omega_star[i]) * r3;
            u1[i] += m * dist(rng);
            u2[i] += m * dist(rng);
        }
    }
    for (int i = 1; i + 1 < n; ++i) {
        s.u[i] += ctx.omega_star[i] * u1[i];
        s.v[i] += ctx.omega_star[i] * u2[i];
    }
    // clamp v at the ends
    s.v[0] = s.v[n - 1] = 0.0;
    s.v[1] = s.v[n - 2] = 0.0;
    return s;
}

std::pair<std::vector<double>, std::vector<double>> nonlinear_terms(const PerturbationField& P,
                                                                    const FrontProfile& front,
                                                                    const SystemParams& p) {
    if (P.kind != PerturbationKind::P) throw std::invalid_argument("nonlinear_terms: expects a raw perturbation");
    const size_t n = P.first.size();
    std::vector<double> n1(n), n2(n);
    for (size_t i = 0; i < n; ++i) {
        const double p1 = P.first[i], p2 = P.second[i], q = front.q[i];
        n1[i] = -p.alpha * (3.0 * q * p1 * p1 + p1 * p1 * p1);
        n2[i] = p.gamma * p1 * p2 - p.sigma * p2 * p2 * p2;
    }
    return {n1, n2};
}

std::pair<std::vector<double>, std::vector<double>> nonlinear_terms_weighted(const PerturbationField& U,
                                                                             const FrontProfile& front,
                                                                             const SystemParams& p,
                                                                             const std::vector<double>& omega_star) {
    const size_t n = U.first.size();
    std::vector<double> n1(n), n2(n);
    for (size_t i = 0; i < n; ++i) {
        const double u1 = U.first[i], u2 = U.second[i], q = front.q[i], w = omega_star[i];
        n1[i] = -p.alpha * (3.0 * q * w * u1 * u1 + w * w * u1 * u1 * u1);
        n2[i] = p.gamma * w * u1 * u2 - p.sigma * w * w * u2 * u2 * u2;
    }
    return {n1, n2};
}

PerturbationField perturbation_of(const StateField& s, const FrontProfile& front) {
    PerturbationField P;
    P.grid = s.grid;
    P.kind = PerturbationKind::P;
    P.t = s.t;
    P.first.resize(s.u.size());
    for (size_t i = 0; i < s.u.size(); ++i) P.first[i] = s.u[i] - front.q[i];
    P.second = s.v;
    return P;
}

namespace {
// log of the factor f such that (kind) = f * P
double log_factor(PerturbationKind k, const WeightSpec& wstar, const WeightSpec& wvarpi, double x) {
    switch (k) {
        case PerturbationKind::P: return 0.0;
        case PerturbationKind::U: return -log_weight_derivs(wstar, x)[0];
        case PerturbationKind::V: return -log_weight_derivs(wvarpi, x)[0];
    }
    return 0.0;
}
}  // namespace

PerturbationField change_frame(const PerturbationField& f, PerturbationKind target, const SystemParams& p,
                               double theta) {
    const auto ws = WeightSpec::make(WeightKind::omega_star, p, theta);
    const auto wv = WeightSpec::make(WeightKind::varpi, p, theta);
    PerturbationField out = f;
    out.kind = target;
    for (int i = 0; i < f.grid.n; ++i) {
        const double x = f.grid.x(i);
        const double lf = log_factor(target, ws, wv, x) - log_factor(f.kind, ws, wv, x);
        const double m = std::exp(lf);
        out.first[i] = f.first[i] * m;
        out.second[i] = f.second[i] * m;
        if (std::abs(out.first[i]) > 1e12 || std::abs(out.second[i]) > 1e12)
            throw std::overflow_error("change_frame: converted value exceeds 1e12 (weight misuse)");
    }
    return out;
}

namespace {
std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order) {
    const int n = static_cast<int>(f.size());
    std::vector<double> d(n, 0.0);
    auto at = [&](int i) { return (i < 0 || i >= n) ? 0.0 : f[i]; };
    for (int i = 0; i < n; ++i) {
        switch (order) {
            case 1: d[i] = (at(i + 1) - at(i - 1)) / (2 * h); break;
            case 2: d[i] = (at(i + 1) - 2 * at(i) + at(i - 1)) / (h * h); break;
            case 3: d[i] = (at(i + 2) - 2 * at(i + 1) + 2 * at(i - 1) - at(i - 2)) / (2 * h * h * h); break;
            case 4:
                d[i] = (at(i + 2) - 4 * at(i + 1) + 6 * at(i) - 4 * at(i - 1) + at(i - 2)) / (h * h * h * h);
                break;
        }
    }
    return d;
}
}  // namespace

std::pair<std::vector<double>, std::vector<double>> source_term(const PerturbationField& V,
                                                                const FrontProfile& front,
                                                                const SystemParams& p, double theta) {
    if (V.kind != PerturbationKind::V) throw std::invalid_argument("source_term: expects a V field");
    const int n = V.grid.n;
    const double h = V.grid.dx();
    const double c = critical_speed(p);
    const auto wv = WeightSpec::make(WeightKind::varpi, p, theta);
    const auto& v1 = V.first;
    const auto& v2 = V.second;
    const auto d1v1 = fd_derivative(v1, h, 1);
    const auto d1v2 = fd_derivative(v2, h, 1);
    const auto d2v2 = fd_derivative(v2, h, 2);
    const auto d3v2 = fd_derivative(v2, h, 3);
    std::vector<double> s1(n), s2(n);
    for (int i = 0; i < n; ++i) {
        const double x = V.grid.x(i);
        const double q = front.q_at(x);
        const auto w = weight_ratios(wv, x);
        const double vp = std::exp(log_weight_derivs(wv, x)[0]);
        // commutator parts
        const double lin1 = p.d * (2 * w[1] * d1v1[i] + w[2] * v1[i]) + c * w[1] * v1[i] +
                            3.0 * p.alpha * (1.0 - q * q) * v1[i];
        const double comm2 = 2.0 * (2 * w[1] * d1v2[i] + w[2] * v2[i]) + 4 * w[1] * d3v2[i] + 6 * w[2] * d2v2[i] +
                             4 * w[3] * d1v2[i] + w[4] * v2[i];
        const double lin2 = -comm2 + c * w[1] * v2[i] - p.gamma * (1.0 - q) * v2[i];
        // Q(V) - Q^-(V)
        const double a1 = v1[i], a2 = v2[i];
        const double quad1 = -3.0 * p.alpha * (q * vp - 1.0) * a1 * a1 - p.alpha * (vp * vp - 1.0) * a1 * a1 * a1;
        const double quad2 = p.gamma * (vp - 1.0) * a1 * a2 - p.sigma * (vp * vp - 1.0) * a2 * a2 * a2;
        s1[i] = lin1 + quad1;
        s2[i] = lin2 + quad2;
    }
    return {s1, s2};
}

// ----------------------------------------------------------------- run

const std::vector<double>& TimeSeries::series(const std::string& key) const {
    if (key == "t") return t;
    if (key == "norm_U_rho") return norm_U_rho;
    if (key == "norm_u1_rho") return norm_u1_rho;
    if (key == "norm_V") return norm_V;
    if (key == "norm_u2") return norm_u2;
    if (key == "v_sup") return v_sup;
    throw std::invalid_argument("TimeSeries: unknown key " + key);
}

void record_norms(const SimContext& ctx, const StateField& s, TimeSeries& ts) {
    const auto& q = ctx.front.q;
    double nU = 0, nU1 = 0, nV = 0, nU2 = 0, vs = 0;
    for (int i = 0; i < s.grid.n; ++i) {
        const double p1 = std::abs(s.u[i] - q[i]), p2 = std::abs(s.v[i]);
        const double a = ctx.inv_omega_star[i] * ctx.inv_rho_star[i];
        nU1 = std::max(nU1, p1 * a);
        nU = std::max(nU, std::max(p1, p2) * a);
        nV = std::max(nV, std::max(p1, p2) * ctx.inv_varpi[i]);
        nU2 = std::max(nU2, p2 * ctx.inv_omega_star[i]);
        vs = std::max(vs, p2);
    }
    ts.t.push_back(s.t);
    ts.norm_U_rho.push_back(nU);
    ts.norm_u1_rho.push_back(nU1);
    ts.norm_V.push_back(nV);
    ts.norm_u2.push_back(nU2);
    ts.v_sup.push_back(vs);
}

TimeSeries run_simulation(const SimConfig& cfg_in) {
    const GateReport gate = check_hypotheses(cfg_in.params);
    if (!gate.admissible) throw std::domain_error("run_simulation: parameters fail the hypothesis gate");
    if (!(cfg_in.params.mu >= 0 && cfg_in.params.mu < cfg_in.params.mu0))
        throw std::domain_error("run_simulation: need 0 <= mu < mu0");
    SimConfig cfg = cfg_in;
    auto ctx0 = make_context(cfg);
    if (cfg.ic.empty()) {
        cfg.ic = SimConfig::default_ic(cfg.params, ctx0->theta.theta);
        auto c2 = std::make_shared<SimContext>(*ctx0);
        c2->cfg = cfg;
        ctx0 = c2;
    }
    const auto& ctx = *ctx0;
    FullStepper stepper(ctx0);
    StateField s = initial_state(ctx);
    TimeSeries ts;
    ts.theta = ctx.theta.theta;
    ts.eta = ctx.theta.eta;
    const long nsteps = std::lround(cfg.t_end / cfg.dt);
    const long rec = std::max(1L, std::lround(cfg.record_every / cfg.dt));
    const long snap = cfg.snapshot_every > 0 ? std::max(1L, std::lround(cfg.snapshot_every / cfg.dt)) : 0;
    record_norms(ctx, s, ts);
    ts.snapshots.push_back(s);
    const auto t0 = std::chrono::steady_clock::now();
    for (long k = 1; k <= nsteps; ++k) {
        stepper.step(s);
        if (k % rec == 0) record_norms(ctx, s, ts);
        if (snap && k % snap == 0) ts.snapshots.push_back(s);
        if (cfg.wall_budget_seconds > 0 && k % 100 == 0) {
            const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (el > cfg.wall_budget_seconds) {
                ts.truncated = true;
                break;
            }
        }
    }
    return ts;
}

}  // namespace kppsh
