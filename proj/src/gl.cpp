#include "kppsh/gl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kppsh/spectral.hpp"
#include "kppsh/weights.hpp"

namespace kppsh {

Eigen::Matrix2cd symbol_M_at(const SystemParams& p, cplx X, int derivative) {
    const OperatorSymbol M = symbol_M(p);
    Eigen::Matrix2cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Polynomial q = M.at(i, j);
            for (int k = 0; k < derivative; ++k) q = q.derivative();
            out(i, j) = q(X);
        }
    return out;
}

Vec2c quadratic_B(const SystemParams& p, const Vec2c& v, const Vec2c& w) {
    return Vec2c(-3.0 * p.alpha * v[0] * w[0], 0.5 * p.gamma * (v[0] * w[1] + v[1] * w[0]));
}

Vec2c cubic_N3(const SystemParams& p, const Vec2c& v) {
    return Vec2c(-p.alpha * v[0] * v[0] * v[0], -p.sigma * v[1] * v[1] * v[1]);
}

cplx inner(const Vec2c& a, const Vec2c& b) { return a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]); }

namespace {

// Null vector of a rank-one 2x2 matrix, taken from its dominant row.
Vec2c null_vector(const Eigen::Matrix2cd& M) {
    const int r = M.row(0).norm() >= M.row(1).norm() ? 0 : 1;
    return Vec2c(M(r, 1), -M(r, 0));
}

Vec2c solve2(const Eigen::Matrix2cd& M, const Vec2c& b, const char* what) {
    const cplx det = M.determinant();
    if (std::abs(det) < 1e-14 * (1.0 + M.squaredNorm())) throw std::domain_error(std::string(what) + " is singular");
    return M.partialPivLu().solve(b);
}

}  // namespace

GLData derive_ansatz_vectors(const SystemParams& p) {
    const cplx I(0.0, 1.0);
    const Eigen::Matrix2cd Mi = symbol_M_at(p, I);
    const Eigen::Matrix2cd Mpi = symbol_M_at(p, I, 1);
    GLData g;
    g.rho_c = null_vector(Mi);
    const Vec2c left = null_vector(Mi.adjoint());
    g.rho_c_star = left / std::conj(inner(g.rho_c, left));
    const Vec2c n2 = quadratic_B(p, g.rho_c, g.rho_c);
    g.rho_0 = solve2(symbol_M_at(p, cplx(0.0)), -2.0 * n2, "M(0)");
    g.rho_2 = solve2(symbol_M_at(p, 2.0 * I), -n2, "M(2i)");
    const Vec2c rhs = -Mpi * g.rho_c;
    g.solvability = std::abs(inner(rhs, g.rho_c_star));
    // Minimum-norm solution: the representative orthogonal to ker M(i).
    Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix2cd> cod;
    cod.setThreshold(1e-12);
    cod.compute(Mi);
    g.rho_1 = cod.solve(rhs);
    g.rho_1 -= (inner(g.rho_1, g.rho_c) / inner(g.rho_c, g.rho_c)) * g.rho_c;
    g.rho1_residual = (Mpi * g.rho_c + Mi * g.rho_1).norm();
    g.cubic = assemble_cubic(p, p.gamma, g);
    return g;
}

double assemble_cubic(const SystemParams& p, double gamma, const GLData& gl) {
    SystemParams q = p;
    q.gamma = gamma;
    // rho_0 and rho_2 carry gamma through N2; rebuild them if a different gamma is requested.
    Vec2c r0 = gl.rho_0, r2 = gl.rho_2;
    if (gamma != p.gamma) {
        const Vec2c n2 = quadratic_B(q, gl.rho_c, gl.rho_c);
        r0 = solve2(symbol_M_at(q, cplx(0.0)), -2.0 * n2, "M(0)");
        r2 = solve2(symbol_M_at(q, cplx(0.0, 2.0)), -n2, "M(2i)");
    }
    const Vec2c rc = gl.rho_c;
    const Vec2c total = 2.0 * quadratic_B(q, rc, r0) + 2.0 * quadratic_B(q, rc.conjugate(), r2) + 3.0 * cubic_N3(q, rc);
    return inner(total, gl.rho_c_star).real();
}

Vec2c closed_form_rho0(const SystemParams& p) {
    const double s = p.d + 2.0 * p.alpha;
    const double b2 = p.beta * p.beta;
    return Vec2c(b2 * (p.gamma * s / p.alpha - 3.0), 2.0 * p.gamma * p.beta * s);
}

Vec2c closed_form_rho2(const SystemParams& p) {
    const double s = p.d + 2.0 * p.alpha;
    const double q = 4.0 * p.d + 2.0 * p.alpha;
    const double b = p.beta;
    const double pre = 1.0 / (9.0 * q);
    // -M(2i)^{-1} N2(rho_c) with N2(rho_c) = (-3 alpha b^2, gamma b s)
    return Vec2c(pre * (p.gamma * b * b * s - 27.0 * p.alpha * b * b), pre * p.gamma * b * s * q);
}

cplx diffusion_identity(const SystemParams& p, const GLData& gl) {
    const cplx I(0.0, 1.0);
    const Vec2c v = 0.5 * symbol_M_at(p, I, 2) * gl.rho_c + symbol_M_at(p, I, 1) * gl.rho_1;
    return inner(v, gl.rho_c_star);
}

// ------------------------------------------------------------------- GL field

GLField make_gl_field(const Grid1D& g, const std::function<cplx(double)>& f) {
    if (!g.periodic) throw std::invalid_argument("GLField: periodic grid required");
    GLField A;
    A.grid = g;
    A.A.resize(static_cast<size_t>(g.n));
    for (int i = 0; i < g.n; ++i) A.A[i] = f(g.x(i));
    return A;
}

double gl_sup(const GLField& A) {
    double m = 0;
    for (const auto& z : A.A) m = std::max(m, std::abs(z));
    return m;
}

namespace {

double phi1(double z) { return std::abs(z) < 1e-5 ? 1.0 + z / 2.0 + z * z / 6.0 : std::expm1(z) / z; }
double phi2(double z) {
    return std::abs(z) < 1e-3 ? 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 : (std::expm1(z) - z) / (z * z);
}

std::vector<cplx> gl_nonlinear(const std::vector<cplx>& Ahat, double b) {
    auto A = fft_backward(Ahat);
    for (auto& a : A) a = b * a * std::norm(a);
    return fft_forward(A);
}

}  // namespace

GLStepper::GLStepper(const Grid1D& g, double b, double dt) : grid_(g), b_(b), dt_(dt) {
    if (!(b < 0)) throw std::domain_error("GL: cubic coefficient must be negative (supercritical)");
    if (!g.periodic) throw std::invalid_argument("GL: periodic grid required");
    const auto k = fft_wavenumbers(g.n, g.length());
    E_.resize(k.size());
    phi1_.resize(k.size());
    phi2_.resize(k.size());
    for (size_t j = 0; j < k.size(); ++j) {
        const double z = (-4.0 * k[j] * k[j] + 1.0) * dt;
        E_[j] = std::exp(z);
        phi1_[j] = phi1(z) * dt;
        phi2_[j] = phi2(z) * dt;
    }
}

void GLStepper::step(GLField& A) const {
    // The cubic term is explicit; substep when it is stiff on the current state.
    const double m = gl_sup(A);
    const double stiff = 3.0 * std::abs(b_) * m * m * dt_;
    if (stiff > 0.5) {
        const int sub = static_cast<int>(std::ceil(stiff / 0.5));
        GLStepper s(grid_, b_, dt_ / sub);
        const double T0 = A.T;
        for (int k = 0; k < sub; ++k) s.step(A);
        A.T = T0 + dt_;
        return;
    }
    const auto u = fft_forward(A.A);
    const auto Nu = gl_nonlinear(u, b_);
    std::vector<cplx> a(u.size());
    for (size_t j = 0; j < u.size(); ++j) a[j] = E_[j] * u[j] + phi1_[j] * Nu[j];
    const auto Na = gl_nonlinear(a, b_);
    for (size_t j = 0; j < u.size(); ++j) a[j] += phi2_[j] * (Na[j] - Nu[j]);
    A.A = fft_backward(a);
    A.T += dt_;
}

GLField step_gl(const GLField& A, double b, double dt) {
    GLField out = A;
    GLStepper(A.grid, b, dt).step(out);
    return out;
}

// ------------------------------------------------------------------- psi, A0

namespace {

void check_scaled_grids(double eps, const Grid1D& X, const Grid1D& x) {
    if (!X.periodic || !x.periodic) throw std::invalid_argument("GL: periodic grids required");
    if (std::abs(eps * x.length() - X.length()) > 1e-9 * X.length() ||
        std::abs(eps * x.x_min - X.x_min) > 1e-9 * (1.0 + X.length()))
        throw std::invalid_argument("GL: X-grid is not the eps-contraction of the x-grid");
}

}  // namespace

FieldPair build_psi(double eps, const GLField& A, const GLData& gl, const Grid1D& xgrid) {
    check_scaled_grids(eps, A.grid, xgrid);
    const int n = xgrid.n;
    const auto k = fft_wavenumbers(A.grid.n, A.grid.length());
    auto Ah = fft_forward(A.A);
    for (size_t j = 0; j < Ah.size(); ++j) Ah[j] *= cplx(0.0, k[j]);
    const auto AX = fourier_resample(fft_backward(Ah), n);
    const auto Ax = fourier_resample(A.A, n);
    FieldPair out(xgrid);
    for (int i = 0; i < n; ++i) {
        const double x = xgrid.x(i);
        const cplx e1 = std::polar(1.0, x), e2 = std::polar(1.0, 2.0 * x);
        const cplx a = Ax[i], ax = AX[i];
        const Vec2c crit = e1 * a * gl.rho_c;
        const Vec2c stab = e2 * a * a * gl.rho_2 + e1 * ax * gl.rho_1;
        const Vec2c zero = std::norm(a) * gl.rho_0;
        for (int c = 0; c < 2; ++c) {
            const double v = eps * 2.0 * crit[c].real() + eps * eps * (zero[c].real() + 2.0 * stab[c].real());
            (c == 0 ? out.first : out.second)[i] = v;
        }
    }
    return out;
}

GLField extract_A0(const ModeFilterSpec& spec, const FieldPair& Vc, double eps, const Grid1D& Xgrid) {
    check_scaled_grids(eps, Xgrid, Vc.grid);
    const double band = (spec.chi_c_h.hi + spec.chi_c_h.collar - 1.0) / eps;
    const double nyquist = std::numbers::pi * Xgrid.n / Xgrid.length();
    if (band >= nyquist) throw std::invalid_argument("extract_A0: eps too small for the X-grid");
    const double turns = Vc.grid.length() / (2.0 * std::numbers::pi);
    if (std::abs(turns - std::round(turns)) > 1e-9) throw std::invalid_argument("extract_A0: length must be a multiple of 2 pi");
    const auto pi1 = project_pi1h(spec, Vc);
    std::vector<cplx> a(static_cast<size_t>(Vc.grid.n));
    for (int i = 0; i < Vc.grid.n; ++i) a[i] = pi1.values[i] * std::polar(1.0 / eps, -Vc.grid.x(i));
    GLField out;
    out.grid = Xgrid;
    out.A = fourier_resample(a, Xgrid.n);
    return out;
}

double approximation_residual(const FieldPair& V, const FieldPair& psi) {
    if (!V.grid.same_as(psi.grid)) throw std::invalid_argument("approximation_residual: grid mismatch");
    const FieldPair d = V - psi;
    const double a = ul_sobolev_norm(Field1D(d.grid, d.first), 1).value;
    const double b = ul_sobolev_norm(Field1D(d.grid, d.second), 1).value;
    return std::hypot(a, b);
}

// ---------------------------------------------------------------- T^- solver

namespace {

struct EtdCoef {
    double E, E2, Q, f1, f2, f3;
};

EtdCoef etdrk4_coef(double L, double h) {
    constexpr int M = 32;
    EtdCoef c{std::exp(L * h), std::exp(L * h / 2.0), 0, 0, 0, 0};
    cplx Q = 0, f1 = 0, f2 = 0, f3 = 0;
    for (int m = 1; m <= M; ++m) {
        const cplx r = std::polar(1.0, std::numbers::pi * (m - 0.5) / M);
        const cplx z = L * h + r;
        const cplx ez = std::exp(z);
        Q += (std::exp(z / 2.0) - 1.0) / z;
        f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / (z * z * z);
        f2 += (2.0 + z + ez * (z - 2.0)) / (z * z * z);
        f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / (z * z * z);
    }
    c.Q = h * (Q / double(M)).real();
    c.f1 = h * (f1 / double(M)).real();
    c.f2 = h * (f2 / double(M)).real();
    c.f3 = h * (f3 / double(M)).real();
    return c;
}

}  // namespace

TMinusSolver::TMinusSolver(const SystemParams& p, const Grid1D& g, double dt) : p_(p), grid_(g), dt_(dt) {
    if (!g.periodic) throw std::invalid_argument("TMinusSolver: periodic grid required");
    xi_ = fft_wavenumbers(g.n, g.length());
    c1_.resize(xi_.size());
    c2_.resize(xi_.size());
    for (size_t j = 0; j < xi_.size(); ++j) {
        const double k2 = xi_[j] * xi_[j];
        const auto a = etdrk4_coef(-p.d * k2 - 2.0 * p.alpha, dt);
        const auto b = etdrk4_coef(-(1.0 - k2) * (1.0 - k2) + p.mu, dt);
        c1_[j] = {a.E, a.E2, a.Q, a.f1, a.f2, a.f3};
        c2_[j] = {b.E, b.E2, b.Q, b.f1, b.f2, b.f3};
    }
}

void TMinusSolver::rhs_nonlinear(const std::vector<cplx>& V1, const std::vector<cplx>& V2, std::vector<cplx>& N1,
                                 std::vector<cplx>& N2) const {
    const auto v1 = fft_backward_real(V1);
    const auto v2 = fft_backward_real(V2);
    std::vector<double> q1(v1.size()), q2(v1.size());
    for (size_t i = 0; i < v1.size(); ++i) {
        q1[i] = -3.0 * p_.alpha * v1[i] * v1[i] - p_.alpha * v1[i] * v1[i] * v1[i];
        q2[i] = p_.gamma * v1[i] * v2[i] - p_.sigma * v2[i] * v2[i] * v2[i];
    }
    N1 = fft_forward(q1);
    N2 = fft_forward(q2);
    // The beta coupling is non-stiff and is integrated with the forcing.
    for (size_t j = 0; j < V2.size(); ++j) N1[j] += p_.beta * V2[j];
}

void TMinusSolver::step(FieldPair& V) const {
    const size_t n = xi_.size();
    const auto u1 = fft_forward(V.first);
    const auto u2 = fft_forward(V.second);
    std::vector<cplx> Nu1, Nu2, Na1, Na2, Nb1, Nb2, Nc1, Nc2;
    std::vector<cplx> a1(n), a2(n), b1(n), b2(n), c1(n), c2(n);
    rhs_nonlinear(u1, u2, Nu1, Nu2);
    for (size_t j = 0; j < n; ++j) {
        a1[j] = c1_[j].E2 * u1[j] + c1_[j].Q * Nu1[j];
        a2[j] = c2_[j].E2 * u2[j] + c2_[j].Q * Nu2[j];
    }
    rhs_nonlinear(a1, a2, Na1, Na2);
    for (size_t j = 0; j < n; ++j) {
        b1[j] = c1_[j].E2 * u1[j] + c1_[j].Q * Na1[j];
        b2[j] = c2_[j].E2 * u2[j] + c2_[j].Q * Na2[j];
    }
    rhs_nonlinear(b1, b2, Nb1, Nb2);
    for (size_t j = 0; j < n; ++j) {
        c1[j] = c1_[j].E2 * a1[j] + c1_[j].Q * (2.0 * Nb1[j] - Nu1[j]);
        c2[j] = c2_[j].E2 * a2[j] + c2_[j].Q * (2.0 * Nb2[j] - Nu2[j]);
    }
    rhs_nonlinear(c1, c2, Nc1, Nc2);
    std::vector<cplx> w1(n), w2(n);
    for (size_t j = 0; j < n; ++j) {
        const auto& k1 = c1_[j];
        const auto& k2 = c2_[j];
        w1[j] = k1.E * u1[j] + Nu1[j] * k1.f1 + 2.0 * (Na1[j] + Nb1[j]) * k1.f2 + Nc1[j] * k1.f3;
        w2[j] = k2.E * u2[j] + Nu2[j] * k2.f1 + 2.0 * (Na2[j] + Nb2[j]) * k2.f2 + Nc2[j] * k2.f3;
    }
    V.first = fft_backward_real(w1);
    V.second = fft_backward_real(w2);
}

ApproxRun gl_approximation_run(const SystemParams& p_in, double eps, double T_slow,
                               const std::function<cplx(double)>& A0, double L_X, int n_X) {
    SystemParams p = p_in;
    p.mu = eps * eps;
    const Grid1D Xg = Grid1D::periodic_grid(0.0, L_X, n_X);
    const double Lx = L_X / eps;
    const int nx = static_cast<int>(std::lround(Lx / (std::numbers::pi / 16.0)));
    const Grid1D xg = Grid1D::periodic_grid(0.0, Lx, nx);
    const GLData gl = derive_ansatz_vectors(p);
    GLField A = make_gl_field(Xg, A0);
    FieldPair V = build_psi(eps, A, gl, xg);
    ApproxRun r;
    r.eps = eps;
    r.residual_initial = approximation_residual(V, build_psi(eps, A, gl, xg));
    const double t_final = T_slow / (eps * eps);
    const double dt = 0.05;
    const long nsteps = std::lround(t_final / dt);
    TMinusSolver solver(p, xg, dt);
    for (long k = 0; k < nsteps; ++k) solver.step(V);
    // GL on the same clock, several substeps per T^- step.
    const double dT = dt * eps * eps;
    const int sub = std::max(1, static_cast<int>(std::ceil(dT / 2e-4)));
    GLStepper gs(Xg, gl.cubic, dT / sub);
    for (long k = 0; k < nsteps * sub; ++k) gs.step(A);
    const FieldPair psi = build_psi(eps, A, gl, xg);
    r.t_final = nsteps * dt;
    r.residual = approximation_residual(V, psi);
    r.psi_norm = std::hypot(ul_sobolev_norm(Field1D(xg, psi.first), 1).value,
                            ul_sobolev_norm(Field1D(xg, psi.second), 1).value);
    return r;
}

AttractorCheck gl_attractor_check(double b, double amplitude, double T_max, double C_GL) {
    AttractorCheck r;
    r.b = b;
    r.C_GL = C_GL;
    const Grid1D g = Grid1D::periodic_grid(0.0, 40.0 * std::numbers::pi, 1024);
    GLField A = make_gl_field(g, [&](double X) {
        return amplitude * std::polar(0.5 + 0.5 * std::cos(X / 10.0), X / 20.0);
    });
    const double dT = 0.01;
    GLStepper s(g, b, dT);
    const long n = std::lround(T_max / dT);
    for (long k = 1; k <= n; ++k) {
        s.step(A);
        if (A.T < 1.0 - 1e-12 || k % 10 != 0) continue;
        const double sup = gl_sup(A);
        const double bound = C_GL + std::exp(-A.T / 2.0) * amplitude;
        r.T.push_back(A.T);
        r.sup.push_back(sup);
        r.bound.push_back(bound);
        if (sup > bound) r.holds = false;
    }
    return r;
}

}  // namespace kppsh
