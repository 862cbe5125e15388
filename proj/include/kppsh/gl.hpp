#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "kppsh/fft.hpp"
#include "kppsh/grid.hpp"
#include "kppsh/modefilter.hpp"
#include "kppsh/params.hpp"

namespace kppsh {

using Vec2c = Eigen::Vector2cd;

struct GLData {
    Vec2c rho_c, rho_c_star, rho_0, rho_1, rho_2;
    double diffusion = 4.0;
    double linear = 1.0;
    double cubic = 0.0;           // P(gamma) from the assembly
    double solvability = 0.0;     // <M'(i) rho_c, rho_c*>
    double rho1_residual = 0.0;   // ||M'(i) rho_c + M(i) rho_1||
};

// M(X) evaluated at complex X (X stands for d/dx) and its first two X-derivatives.
Eigen::Matrix2cd symbol_M_at(const SystemParams& p, cplx X, int derivative = 0);

// Quadratic and cubic parts of the nonlinearity behind the front.
Vec2c quadratic_B(const SystemParams& p, const Vec2c& v, const Vec2c& w);
Vec2c cubic_N3(const SystemParams& p, const Vec2c& v);

// <a, b> = sum a_k conj(b_k).
cplx inner(const Vec2c& a, const Vec2c& b);

GLData derive_ansatz_vectors(const SystemParams& p);
double assemble_cubic(const SystemParams& p, double gamma, const GLData& gl);

// Printed closed forms used as cross-checks.
Vec2c closed_form_rho0(const SystemParams& p);
Vec2c closed_form_rho2(const SystemParams& p);

// <(1/2) M''(i) rho_c + M'(i) rho_1, rho_c*>, the coefficient of A_XX.
cplx diffusion_identity(const SystemParams& p, const GLData& gl);

struct GLField {
    Grid1D grid;  // periodic grid in X
    std::vector<cplx> A;
    double T = 0;
};

GLField make_gl_field(const Grid1D& g, const std::function<cplx(double)>& f);
double gl_sup(const GLField& A);

// ETD2RK stepper for dA/dT = 4 A_XX + A + b A |A|^2.
class GLStepper {
public:
    GLStepper(const Grid1D& g, double b, double dt);
    void step(GLField& A) const;
    double dt() const { return dt_; }

private:
    Grid1D grid_;
    double b_, dt_;
    std::vector<double> E_, phi1_, phi2_;
};

GLField step_gl(const GLField& A, double b, double dt);

// psi = eps (e^{ix} A rho_c + c.c.) + eps^2 (|A|^2 rho_0 + e^{ix} A_X rho_1 + e^{2ix} A^2 rho_2 + c.c.)
FieldPair build_psi(double eps, const GLField& A, const GLData& gl, const Grid1D& xgrid);

// A_0(X) = eps^{-1} e^{-iX/eps} (pi_1^h V_c)(X/eps), resampled onto Xgrid.
GLField extract_A0(const ModeFilterSpec& spec, const FieldPair& Vc, double eps, const Grid1D& Xgrid);

double approximation_residual(const FieldPair& V, const FieldPair& psi);

// Periodic system dV/dt = T^- V + Q^-(V) with ETDRK4 (Cox-Matthews, contour-integral coefficients).
class TMinusSolver {
public:
    TMinusSolver(const SystemParams& p, const Grid1D& g, double dt);
    void step(FieldPair& V) const;
    double dt() const { return dt_; }

private:
    SystemParams p_;
    Grid1D grid_;
    double dt_;
    std::vector<double> xi_;
    struct Coef {
        double E, E2, Q, f1, f2, f3;
    };
    std::vector<Coef> c1_, c2_;
    void rhs_nonlinear(const std::vector<cplx>& V1, const std::vector<cplx>& V2, std::vector<cplx>& N1,
                       std::vector<cplx>& N2) const;
};

struct ApproxRun {
    double eps = 0;
    double t_final = 0;
    double residual = 0;   // H^1_ul norm of V - psi(A) at t_final
    double psi_norm = 0;   // H^1_ul norm of psi(A) at t_final
    double residual_initial = 0;
};

// Runs the T^- system from psi(eps, A0) and GL from A0 up to slow time T.
ApproxRun gl_approximation_run(const SystemParams& p, double eps, double T_slow,
                               const std::function<cplx(double)>& A0, double L_X = 40.0 * 3.14159265358979323846,
                               int n_X = 1024);

struct AttractorCheck {
    double b = 0, C_GL = 0;
    std::vector<double> T, sup, bound;
    bool holds = true;
};

AttractorCheck gl_attractor_check(double b, double amplitude, double T_max, double C_GL);

}  // namespace kppsh
