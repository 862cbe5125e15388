#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "kppsh/front.hpp"
#include "kppsh/params.hpp"
#include "kppsh/spectral.hpp"

namespace kppsh {

enum class EigenOp { kpp, sh };
enum class Side { plus, minus };
std::string to_string(EigenOp op);
std::string to_string(Side s);

struct EigenOptions {
    double x_far = 40.0;
    double h = 0.01;
    bool weighted = true;       // kpp: omega_kpp, sh: omega_star
    bool freeze = false;        // use the asymptotic coefficients everywhere
    double bump = 0.0;          // adds bump * sech^2(x) to the zeroth-order coefficient
};

struct EigenContext {
    SystemParams params;
    FrontProfile front;
    double theta = 0;
};

EigenContext make_eigen_context(const SystemParams& p, double theta);
EigenContext make_eigen_context(const SystemParams& p);

// Coefficients b_0..b_n of the (possibly conjugated) operator sum_j b_j(x) d^j/dx^j.
std::vector<double> operator_coefficients(const EigenContext& ctx, EigenOp op, double x, const EigenOptions& o);
std::vector<double> asymptotic_coefficients(const EigenContext& ctx, EigenOp op, Side side, const EigenOptions& o);

// Spatial exponents nu with sum_j b_j nu^j = lambda at the given end, ascending real part.
std::vector<cplx> asymptotic_exponents(const EigenContext& ctx, EigenOp op, Side side, cplx lambda,
                                       const EigenOptions& o);

struct EigenSolution {
    cplx lambda;
    Side side = Side::plus;
    int index = 0;
    cplx nu;
    std::vector<double> x;                  // from the far end towards 0
    std::vector<Eigen::VectorXcd> values;   // renormalized (unit norm) jet (u, u', ...)
    std::vector<double> log_scale;          // true solution = values * exp(log_scale)
};

EigenSolution asymptotic_solution(const EigenContext& ctx, EigenOp op, cplx lambda, Side side, int index,
                                  const EigenOptions& o = {});

// Least-squares exponent of the solution on the outer 20% of its grid.
double tail_exponent(const EigenSolution& s);

// Orthonormal frame of the decaying subspace at x = 0 and the log of its volume factor.
struct DecayingFrame {
    Eigen::MatrixXcd Q;
    double log_scale = 0;
    double phase = 0;  // argument of the far-end normalization
    std::vector<cplx> nus;
};

DecayingFrame decaying_frame(const EigenContext& ctx, EigenOp op, cplx lambda, Side side, const EigenOptions& o);

struct EvansSample {
    cplx lambda;
    cplx value;           // determinant of the unit frames
    double log_scale = 0; // W = value * exp(log_scale)
};

EvansSample evans_function(const EigenContext& ctx, EigenOp op, cplx lambda, const EigenOptions& o = {});

// max_x |det Phi(x) / det Phi(0) - exp(-int_0^x b_{n-1}/b_n)| relative, on [0, x_max].
double wronskian_identity_check(const EigenContext& ctx, EigenOp op, cplx lambda, double x_max = 5.0,
                                const EigenOptions& o = {.weighted = false});

// Rectangle [re_lo, re_hi] x [-im_hi, im_hi] traversed counterclockwise, detouring around
// (-inf, 0] at distance slit_margin.
std::vector<cplx> slit_contour(double re_lo, double re_hi, double im_hi, double slit_margin, int n_per_edge);

struct WindingResult {
    int winding = 0;
    int n_per_edge = 0;
    double min_abs = 0;
    double conj_asymmetry = 0;
    double min_abs_right_edge = 0;
    std::vector<EvansSample> samples;
};

WindingResult evans_winding(const EigenContext& ctx, double re_lo, double re_hi, double im_hi,
                            const EigenOptions& o = {}, double slit_margin = 0.05, int n0 = 64, int workers = 0);

// Determinant of all four unit-frame SH solutions at x = 0, relative to the column norms.
double sh_basis_determinant(const EigenContext& ctx, cplx lambda, const EigenOptions& o = {});

}  // namespace kppsh
