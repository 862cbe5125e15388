#include "kppsh/modefilter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kppsh {

ModeEigen eigendata(const SystemParams& p, double xi) {
    ModeEigen e;
    e.xi = xi;
    const double x2 = xi * xi;
    e.lambda_s = -p.d * x2 - 2.0 * p.alpha;
    e.lambda_c = -(1.0 - x2) * (1.0 - x2) + p.mu;
    const double gap = e.lambda_c - e.lambda_s;
    if (std::abs(gap) < 1e-12 * (1.0 + std::abs(e.lambda_s)))
        throw std::domain_error("eigendata: eigenvalue collision at xi = " + std::to_string(xi));
    e.rho_c = {p.beta, gap};
    e.rho_s = {1.0, 0.0};
    e.rho_c_star = {0.0, 1.0 / gap};
    e.rho_s_star = {1.0, -p.beta / gap};
    return e;
}

double smooth_transition(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double Cutoff::operator()(double xi) const {
    const double x = std::abs(xi);
    if (x >= lo && x <= hi) return 1.0;
    if (x < lo) return smooth_transition((x - (lo - collar)) / collar);
    return smooth_transition(((hi + collar) - x) / collar);
}

std::string to_string(FilterKind k) {
    switch (k) {
        case FilterKind::c: return "c";
        case FilterKind::s: return "s";
        case FilterKind::c_h: return "c_h";
        case FilterKind::s_h: return "s_h";
    }
    return "?";
}

ModeFilterSpec ModeFilterSpec::make(const SystemParams& p) {
    ModeFilterSpec s;
    s.params = p;
    s.validate();
    return s;
}

void ModeFilterSpec::validate() const {
    const double a = chi_c_h.lo - chi_c_h.collar, b = chi_c_h.hi + chi_c_h.collar;
    for (int k = 0; k <= 400; ++k) eigendata(params, a + (b - a) * k / 400.0);
}

Eigen::Matrix2d ModeFilterSpec::matrix(double xi, FilterKind k) const {
    const ModeEigen e = eigendata(params, xi);
    const Eigen::Matrix2d Pc = e.rho_c * e.rho_c_star.transpose();
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    switch (k) {
        case FilterKind::c: return chi_c(xi) * Pc;
        case FilterKind::s: return I - chi_c(xi) * Pc;
        case FilterKind::c_h: return chi_c_h(xi) * Pc;
        case FilterKind::s_h: return (1.0 - chi_s_h(xi)) * Pc + (I - Pc);
    }
    return I;
}

Grid1D filter_grid(double length, double dx) {
    const int n = static_cast<int>(std::lround(length / dx));
    return Grid1D::periodic_grid(0.0, length, n);
}

namespace {

void require_periodic(const FieldPair& f) {
    if (!f.grid.periodic) throw std::invalid_argument("mode filter: periodic grid required");
    if (static_cast<int>(f.first.size()) != f.grid.n || static_cast<int>(f.second.size()) != f.grid.n)
        throw std::invalid_argument("mode filter: field size does not match grid");
}

// Applies the filter and returns the complex inverse transforms.
std::pair<std::vector<cplx>, std::vector<cplx>> apply_complex(const ModeFilterSpec& spec, const FieldPair& f,
                                                              FilterKind k) {
    require_periodic(f);
    const int n = f.grid.n;
    auto A = fft_forward(f.first);
    auto B = fft_forward(f.second);
    const auto xi = fft_wavenumbers(n, f.grid.length());
    for (int j = 0; j < n; ++j) {
        const Eigen::Matrix2d M = spec.matrix(xi[j], k);
        const cplx a = A[j], b = B[j];
        A[j] = M(0, 0) * a + M(0, 1) * b;
        B[j] = M(1, 0) * a + M(1, 1) * b;
    }
    return {fft_backward(A), fft_backward(B)};
}

}  // namespace

FieldPair project(const ModeFilterSpec& spec, const FieldPair& f, FilterKind k) {
    const auto [a, b] = apply_complex(spec, f, k);
    FieldPair out(f.grid);
    for (int i = 0; i < f.grid.n; ++i) {
        out.first[i] = a[i].real();
        out.second[i] = b[i].real();
    }
    return out;
}

ComplexField1D project_pi1h(const ModeFilterSpec& spec, const FieldPair& f) {
    require_periodic(f);
    const int n = f.grid.n;
    const auto A = fft_forward(f.first);
    const auto B = fft_forward(f.second);
    const auto xi = fft_wavenumbers(n, f.grid.length());
    const Eigen::Vector2d rc1 = eigendata(spec.params, 1.0).rho_c;
    std::vector<cplx> S(static_cast<size_t>(n), cplx(0.0));
    for (int j = 0; j < n; ++j) {
        if (xi[j] <= 0.0) continue;
        const double w = spec.chi_c_h(xi[j]);
        if (w == 0.0) continue;
        const ModeEigen e = eigendata(spec.params, xi[j]);
        const double norm = rc1.dot(e.rho_c_star);
        S[j] = w * (A[j] * e.rho_c_star[0] + B[j] * e.rho_c_star[1]) / norm;
    }
    ComplexField1D out;
    out.grid = f.grid;
    out.values = fft_backward(S);
    return out;
}

FieldPair quadratic_form(const SystemParams& p, const FieldPair& a, const FieldPair& b) {
    FieldPair out(a.grid);
    for (int i = 0; i < a.grid.n; ++i) {
        out.first[i] = -3.0 * p.alpha * a.first[i] * b.first[i];
        out.second[i] = 0.5 * p.gamma * (a.first[i] * b.second[i] + a.second[i] * b.first[i]);
    }
    return out;
}

double sup_norm(const FieldPair& f) {
    double m = 0;
    for (double x : f.first) m = std::max(m, std::abs(x));
    for (double x : f.second) m = std::max(m, std::abs(x));
    return m;
}

FieldPair operator-(const FieldPair& a, const FieldPair& b) {
    FieldPair out(a.grid);
    for (int i = 0; i < a.grid.n; ++i) {
        out.first[i] = a.first[i] - b.first[i];
        out.second[i] = a.second[i] - b.second[i];
    }
    return out;
}

FieldPair operator+(const FieldPair& a, const FieldPair& b) {
    FieldPair out(a.grid);
    for (int i = 0; i < a.grid.n; ++i) {
        out.first[i] = a.first[i] + b.first[i];
        out.second[i] = a.second[i] + b.second[i];
    }
    return out;
}

double quadratic_vanishing_check(const ModeFilterSpec& spec, const FieldPair& v1, const FieldPair& v2) {
    const FieldPair a = project(spec, v1, FilterKind::c);
    const FieldPair b = project(spec, v2, FilterKind::c);
    const FieldPair r = project(spec, quadratic_form(spec.params, a, b), FilterKind::c);
    const double den = sup_norm(v1) * sup_norm(v2);
    return den > 0 ? sup_norm(r) / den : 0.0;
}

FieldPair random_band_limited(const Grid1D& g, double xi_max, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int n = g.n;
    const auto xi = fft_wavenumbers(n, g.length());
    FieldPair out(g);
    for (auto* comp : {&out.first, &out.second}) {
        std::vector<cplx> S(static_cast<size_t>(n), cplx(0.0));
        for (int j = 1; j < (n + 1) / 2; ++j) {
            if (xi[j] > xi_max) break;
            const cplx z(nd(rng), nd(rng));
            S[j] = z;
            S[n - j] = std::conj(z);
        }
        S[0] = nd(rng);
        *comp = fft_backward_real(S);
    }
    const double m = sup_norm(out);
    if (m > 0)
        for (int i = 0; i < n; ++i) {
            out.first[i] /= m;
            out.second[i] /= m;
        }
    return out;
}

namespace {

Eigen::Matrix2d semigroup(const SystemParams& p, double xi, double t) {
    const ModeEigen e = eigendata(p, xi);
    const double a = e.lambda_s, b = e.lambda_c;
    Eigen::Matrix2d E;
    E(0, 0) = std::exp(a * t);
    E(1, 1) = std::exp(b * t);
    E(1, 0) = 0.0;
    E(0, 1) = p.beta * std::exp(a * t) * std::expm1((b - a) * t) / (b - a);
    return E;
}

double op_norm(const Eigen::Matrix2d& M) { return Eigen::JacobiSVD<Eigen::Matrix2d>(M).singularValues()(0); }

}  // namespace

SemigroupReport semigroup_check(const ModeFilterSpec& spec, const Grid1D& g, double t_max, int nt) {
    const auto& p = spec.params;
    const auto xi = fft_wavenumbers(g.n, g.length());
    SemigroupReport r;
    r.kappa = std::numeric_limits<double>::infinity();
    for (double k : xi) {
        const ModeEigen e = eigendata(p, k);
        r.kappa = std::min(r.kappa, -e.lambda_s);
        if (spec.chi_s_h(k) < 1.0) r.kappa = std::min(r.kappa, -e.lambda_c);
    }
    std::vector<Eigen::Matrix2d> Ps(xi.size()), Pc(xi.size());
    for (size_t j = 0; j < xi.size(); ++j) {
        Ps[j] = spec.matrix(xi[j], FilterKind::s_h);
        Pc[j] = spec.matrix(xi[j], FilterKind::c_h);
    }
    for (int it = 0; it <= nt; ++it) {
        const double t = t_max * it / nt;
        double ns = 0, nc = 0;
        for (size_t j = 0; j < xi.size(); ++j) {
            const Eigen::Matrix2d E = semigroup(p, xi[j], t);
            ns = std::max(ns, op_norm(E * Ps[j]));
            nc = std::max(nc, op_norm(E * Pc[j]));
        }
        r.t.push_back(t);
        r.stable_norm.push_back(ns);
        r.critical_norm.push_back(nc);
        r.stable_C = std::max(r.stable_C, ns * std::exp(r.kappa * t));
        r.critical_max_ratio = std::max(r.critical_max_ratio, nc * std::exp(-2.0 * p.mu * t));
    }
    // Least-squares rate on the second half of the window.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = r.t.size() / 2; i < r.t.size(); ++i) {
        if (r.stable_norm[i] <= 0) continue;
        const double x = r.t[i], y = std::log(r.stable_norm[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    r.stable_rate = m > 1 ? -(m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return r;
}

FilterSelfTest filters_selftest(const SystemParams& p, std::uint64_t seed, int n_trials) {
    const ModeFilterSpec spec = ModeFilterSpec::make(p);
    ModeFilterSpec bad = spec;
    bad.chi_c = Cutoff{1.0 / 4.0, 7.0 / 4.0, 1.0 / 8.0};
    const Grid1D g = filter_grid();
    FilterSelfTest r;
    for (int k = 0; k < n_trials; ++k) {
        const FieldPair f = random_band_limited(g, 3.0, seed + 2 * k);
        const FieldPair h = random_band_limited(g, 3.0, seed + 2 * k + 1);
        const FieldPair fc = project(spec, f, FilterKind::c);
        const FieldPair fs = project(spec, f, FilterKind::s);
        r.partition = std::max(r.partition, sup_norm(fc + fs - f) / sup_norm(f));
        for (FilterKind kind : {FilterKind::c, FilterKind::s, FilterKind::c_h, FilterKind::s_h}) {
            const auto [a, b] = apply_complex(spec, f, kind);
            for (int i = 0; i < g.n; ++i)
                r.hermitian = std::max({r.hermitian, std::abs(a[i].imag()), std::abs(b[i].imag())});
        }
        r.idempotent_c = std::max(r.idempotent_c, sup_norm(project(spec, fc, FilterKind::c_h) - fc) / sup_norm(f));
        r.idempotent_s = std::max(r.idempotent_s, sup_norm(project(spec, fs, FilterKind::s_h) - fs) / sup_norm(f));
        r.quadratic = std::max(r.quadratic, quadratic_vanishing_check(spec, f, h));
        r.quadratic_control = std::max(r.quadratic_control, quadratic_vanishing_check(bad, f, h));
    }
    const Eigen::Vector2d rc = eigendata(p, 1.0).rho_c;
    FieldPair pb(g), sb(g);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        pb.first[i] = 2.0 * std::cos(x) * rc[0];
        pb.second[i] = 2.0 * std::cos(x) * rc[1];
        sb.first[i] = 2.0 * std::cos(3.0 * x) * 0.7;
        sb.second[i] = 2.0 * std::cos(3.0 * x) * -1.3;
    }
    r.passband = sup_norm(project(spec, pb, FilterKind::c) - pb) / sup_norm(pb);
    r.stopband = sup_norm(project(spec, sb, FilterKind::c)) / sup_norm(sb);
    return r;
}

}  // namespace kppsh
