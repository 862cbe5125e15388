#pragma once

#include <complex>
#include <string>
#include <vector>

#include "kppsh/params.hpp"

namespace kppsh {

using cplx = std::complex<double>;

// Real-coefficient polynomial, coeffs[k] multiplies X^k.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    int degree() const;
    const std::vector<double>& coeffs() const { return c_; }
    double coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0.0; }

    double operator()(double x) const;
    cplx operator()(cplx x) const;
    Polynomial derivative() const;
    // P(theta + X) by exact Taylor shift.
    Polynomial shifted(double theta) const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;

private:
    std::vector<double> c_;
};

class OperatorSymbol {
public:
    OperatorSymbol() = default;
    explicit OperatorSymbol(int n);
    OperatorSymbol(std::initializer_list<std::initializer_list<Polynomial>> rows);

    int size() const { return n_; }
    int degree() const;
    Polynomial& at(int i, int j) { return e_[i * n_ + j]; }
    const Polynomial& at(int i, int j) const { return e_[i * n_ + j]; }
    bool is_upper_triangular() const;

private:
    int n_ = 0;
    std::vector<Polynomial> e_;
};

OperatorSymbol shift_symbol(const OperatorSymbol& s, double theta);

enum class Border { kpp_plus, kpp_minus, sh_plus, sh_minus };
std::string to_string(Border b);

// Asymptotic scalar symbols (unshifted). mu is taken from p.
Polynomial symbol_kpp_plus(const SystemParams& p);
Polynomial symbol_kpp_minus(const SystemParams& p);
Polynomial symbol_sh_plus(const SystemParams& p);
Polynomial symbol_sh_minus(const SystemParams& p);
// Full triangular asymptotic symbols [[kpp, beta], [0, sh]].
OperatorSymbol symbol_full_plus(const SystemParams& p);
OperatorSymbol symbol_full_minus(const SystemParams& p);
// Symbol of the linear operator behind the front, without the mu term.
OperatorSymbol symbol_M(const SystemParams& p);

struct SpectralSample {
    double xi;
    cplx lambda;
    int component;  // diagonal index the sample came from
};

struct SpectralCurve {
    std::vector<SpectralSample> samples;
    std::string which_border;
    double max_real() const;
};

std::vector<double> linspace(double a, double b, int n);
std::vector<double> default_xi_grid();

// Evaluates each diagonal entry at i*xi. Throws for non-triangular symbols.
SpectralCurve fredholm_border(const OperatorSymbol& s, const std::vector<double>& xi_grid,
                              const std::string& tag = "");
SpectralCurve fredholm_border(const Polynomial& s, const std::vector<double>& xi_grid,
                              const std::string& tag = "");

struct ThetaChoice {
    double theta = 0;
    double eta = 0;
    double theta_opt = 0;   // minimizer of the sh- bound
    double bound_min = 0;   // minimal value of the sh- bound
};

double sh_minus_bound(const SystemParams& p, double theta);
ThetaChoice select_theta(const SystemParams& p);

// The four gapped/marginal borders at the weights of a ThetaChoice.
struct WeightedBorders {
    SpectralCurve kpp_plus, kpp_minus, sh_plus, sh_minus;
};
WeightedBorders weighted_borders(const SystemParams& p, const ThetaChoice& tc,
                                 const std::vector<double>& xi_grid);

struct DispersionRoots {
    cplx lambda;
    std::vector<cplx> roots;  // ascending real part
    std::string which_operator;
    double max_residual = 0;
};

// Roots nu of lambda - s(nu) = 0.
DispersionRoots dispersion_roots(const Polynomial& s, cplx lambda, const std::string& tag = "");
// Roots of a complex-coefficient polynomial (coeffs[k] * X^k).
std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs);

struct RootLocalizationReport {
    double kappa2 = 0;          // min |Re nu| for SH roots on Re lambda >= -2 eta
    double kpp_gap = 0;         // min |Re nu| for KPP- roots on the same set
    double sh_large_exponent = 0;
    double kpp_large_exponent = 0;
    double sh_large_C = 0;
    double kpp_large_C = 0;
    double R = 0;
    bool split_ok = true;       // roots split by sign as expected
};

RootLocalizationReport verify_root_localization(const SystemParams& p, const ThetaChoice& tc,
                                                const std::vector<cplx>& lambda_samples);

}  // namespace kppsh
