#include "kppsh/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kppsh {

// ---------------------------------------------------------------- Polynomial

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

int Polynomial::degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }

double Polynomial::operator()(double x) const {
    double r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
}

cplx Polynomial::operator()(cplx x) const {
    cplx r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial{};
    std::vector<double> d(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
    return Polynomial(d);
}

Polynomial Polynomial::shifted(double theta) const {
    const size_t n = c_.size();
    std::vector<double> out(n, 0.0);
    // out_k = sum_{j>=k} c_j * binom(j,k) * theta^(j-k)
    for (size_t k = 0; k < n; ++k) {
        double binom = 1.0;
        double tp = 1.0;
        double s = 0.0;
        for (size_t j = k; j < n; ++j) {
            s += c_[j] * binom * tp;
            binom = binom * static_cast<double>(j + 1) / static_cast<double>(j + 1 - k);
            tp *= theta;
        }
        out[k] = s;
    }
    return Polynomial(out);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
    return Polynomial(r);
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (c_.empty() || o.c_.empty()) return Polynomial{};
    std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Polynomial(r);
}

Polynomial Polynomial::operator*(double s) const {
    std::vector<double> r = c_;
    for (auto& v : r) v *= s;
    return Polynomial(r);
}

// ------------------------------------------------------------ OperatorSymbol

OperatorSymbol::OperatorSymbol(int n) : n_(n), e_(static_cast<size_t>(n * n)) {}

OperatorSymbol::OperatorSymbol(std::initializer_list<std::initializer_list<Polynomial>> rows) {
    n_ = static_cast<int>(rows.size());
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != n_) throw std::invalid_argument("OperatorSymbol: not square");
        for (const auto& e : r) e_.push_back(e);
    }
}

int OperatorSymbol::degree() const {
    int d = -1;
    for (const auto& e : e_) d = std::max(d, e.degree());
    return d;
}

bool OperatorSymbol::is_upper_triangular() const {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < i; ++j)
            if (at(i, j).degree() >= 0) return false;
    return true;
}

OperatorSymbol shift_symbol(const OperatorSymbol& s, double theta) {
    OperatorSymbol out(s.size());
    for (int i = 0; i < s.size(); ++i)
        for (int j = 0; j < s.size(); ++j) out.at(i, j) = s.at(i, j).shifted(theta);
    return out;
}

std::string to_string(Border b) {
    switch (b) {
        case Border::kpp_plus: return "kpp+";
        case Border::kpp_minus: return "kpp-";
        case Border::sh_plus: return "sh+";
        case Border::sh_minus: return "sh-";
    }
    return "?";
}

namespace {
// -(1 + X^2)^2 = -1 - 2X^2 - X^4
Polynomial sh_core() { return Polynomial({-1.0, 0.0, -2.0, 0.0, -1.0}); }
}  // namespace

Polynomial symbol_kpp_plus(const SystemParams& p) {
    return Polynomial({p.alpha, critical_speed(p), p.d});
}

Polynomial symbol_kpp_minus(const SystemParams& p) {
    return Polynomial({-2.0 * p.alpha, critical_speed(p), p.d});
}

Polynomial symbol_sh_plus(const SystemParams& p) {
    return sh_core() + Polynomial({p.mu - p.gamma, critical_speed(p)});
}

Polynomial symbol_sh_minus(const SystemParams& p) {
    return sh_core() + Polynomial({p.mu, critical_speed(p)});
}

OperatorSymbol symbol_full_plus(const SystemParams& p) {
    return OperatorSymbol{{symbol_kpp_plus(p), Polynomial({p.beta})}, {Polynomial{}, symbol_sh_plus(p)}};
}

OperatorSymbol symbol_full_minus(const SystemParams& p) {
    return OperatorSymbol{{symbol_kpp_minus(p), Polynomial({p.beta})}, {Polynomial{}, symbol_sh_minus(p)}};
}

OperatorSymbol symbol_M(const SystemParams& p) {
    return OperatorSymbol{{Polynomial({-2.0 * p.alpha, 0.0, p.d}), Polynomial({p.beta})},
                          {Polynomial{}, sh_core()}};
}

// ------------------------------------------------------------------ borders

double SpectralCurve::max_real() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::max(m, s.lambda.real());
    return m;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> x(static_cast<size_t>(n));
    if (n == 1) {
        x[0] = a;
        return x;
    }
    for (int i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    return x;
}

std::vector<double> default_xi_grid() { return linspace(-10.0, 10.0, 4001); }

SpectralCurve fredholm_border(const OperatorSymbol& s, const std::vector<double>& xi_grid,
                              const std::string& tag) {
    if (!s.is_upper_triangular()) throw std::invalid_argument("fredholm_border: symbol is not triangular");
    SpectralCurve c;
    c.which_border = tag;
    for (int k = 0; k < s.size(); ++k)
        for (double xi : xi_grid) c.samples.push_back({xi, s.at(k, k)(cplx(0.0, xi)), k});
    return c;
}

SpectralCurve fredholm_border(const Polynomial& s, const std::vector<double>& xi_grid,
                              const std::string& tag) {
    SpectralCurve c;
    c.which_border = tag;
    for (double xi : xi_grid) c.samples.push_back({xi, s(cplx(0.0, xi)), 0});
    return c;
}

// ------------------------------------------------------------ theta choice

double sh_minus_bound(const SystemParams& p, double theta) {
    const double t2 = theta * theta;
    return p.mu0 + critical_speed(p) * theta + 4.0 * t2 + 8.0 * t2 * t2;
}

ThetaChoice select_theta(const SystemParams& p) {
    p.validate();
    const double grem = gamma_rem(p);
    if (!(p.gamma > grem)) throw std::domain_error("select_theta: gamma <= gamma_rem, no admissible weight");
    const double cs = critical_speed(p);
    const double r = std::sqrt(p.alpha / p.d);
    // d theta^2 + c* theta - alpha < 0 on (-(1+sqrt2) r, (sqrt2-1) r)
    const double lo0 = -(1.0 + std::sqrt(2.0)) * r;
    double a = lo0 * (1.0 - 1e-12), b = 0.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = sh_minus_bound(p, x1), f2 = sh_minus_bound(p, x2);
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sh_minus_bound(p, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sh_minus_bound(p, x2);
        }
    }
    ThetaChoice tc;
    tc.theta_opt = 0.5 * (a + b);
    tc.bound_min = sh_minus_bound(p, tc.theta_opt);
    if (!(tc.bound_min < 0)) throw std::domain_error("select_theta: mu0 too large, sh- border cannot be gapped");

    // Gap: the best achievable value, capped by mu0 so that the weight flattens as mu0 -> 0,
    // and by the sh+ margin gamma - gamma_rem.
    double eta = std::min({-tc.bound_min / 3.0, p.mu0, (p.gamma - grem) / 3.0});
    double theta = tc.theta_opt;
    if (eta < -tc.bound_min / 3.0) {
        // Root of bound(theta) = -3 eta on (theta_opt, 0); the bound is increasing there.
        double lo = tc.theta_opt, hi = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (sh_minus_bound(p, mid) > -3.0 * eta) hi = mid; else lo = mid;
        }
        theta = lo;
    }
    const double kpp_max = -2.0 * p.alpha + p.d * theta * theta + cs * theta;
    eta = std::min(eta, -kpp_max / 3.0);
    tc.theta = theta;
    tc.eta = eta;
    if (!(tc.theta < 0) || !(tc.eta > 0)) throw std::domain_error("select_theta: no admissible weight found");
    return tc;
}

WeightedBorders weighted_borders(const SystemParams& p, const ThetaChoice& tc,
                                 const std::vector<double>& xi_grid) {
    const double shift_plus = -critical_speed(p) / (2.0 * p.d);
    WeightedBorders w;
    w.kpp_plus = fredholm_border(symbol_kpp_plus(p).shifted(shift_plus), xi_grid, "kpp+");
    w.kpp_minus = fredholm_border(symbol_kpp_minus(p).shifted(tc.theta), xi_grid, "kpp-");
    w.sh_plus = fredholm_border(symbol_sh_plus(p).shifted(shift_plus), xi_grid, "sh+");
    w.sh_minus = fredholm_border(symbol_sh_minus(p).shifted(tc.theta), xi_grid, "sh-");
    return w;
}

// --------------------------------------------------------------- dispersion

std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs) {
    int n = static_cast<int>(coeffs.size()) - 1;
    while (n >= 0 && coeffs[n] == cplx(0.0)) --n;
    if (n < 1) throw std::invalid_argument("polynomial_roots: degree < 1");
    const cplx lead = coeffs[n];
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -coeffs[i] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    auto eval = [&](cplx z, cplx& dp) {
        cplx pz = 0;
        dp = 0;
        for (int k = n; k >= 0; --k) {
            dp = dp * z + pz;
            pz = pz * z + coeffs[k];
        }
        return pz;
    };
    for (auto& z : r) {
        cplx dp;
        const cplx pz = eval(z, dp);
        if (std::abs(dp) > 1e-8 * std::abs(lead)) {
            const cplx zn = z - pz / dp;
            cplx dn;
            if (std::abs(eval(zn, dn)) <= std::abs(pz)) z = zn;
        }
    }
    return r;
}

DispersionRoots dispersion_roots(const Polynomial& s, cplx lambda, const std::string& tag) {
    const int n = s.degree();
    if (n < 1) throw std::invalid_argument("dispersion_roots: degenerate symbol");
    std::vector<cplx> c(static_cast<size_t>(n + 1));
    for (int k = 0; k <= n; ++k) c[k] = -s.coeff(k);
    c[0] += lambda;
    DispersionRoots dr;
    dr.lambda = lambda;
    dr.which_operator = tag;
    dr.roots = polynomial_roots(c);
    std::sort(dr.roots.begin(), dr.roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    double scale = std::abs(lambda);
    for (int k = 0; k <= n; ++k) scale = std::max(scale, std::abs(s.coeff(k)));
    for (const auto& z : dr.roots)
        dr.max_residual = std::max(dr.max_residual, std::abs(lambda - s(z)) / (scale * std::max(1.0, std::pow(std::abs(z), n))));
    return dr;
}

namespace {
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

RootLocalizationReport verify_root_localization(const SystemParams& p, const ThetaChoice& tc,
                                                const std::vector<cplx>& lambda_samples) {
    RootLocalizationReport rep;
    const double shift_plus = -critical_speed(p) / (2.0 * p.d);
    const Polynomial kpp_m = symbol_kpp_minus(p).shifted(tc.theta);
    const Polynomial kpp_p = symbol_kpp_plus(p).shifted(shift_plus);
    const Polynomial sh_m = symbol_sh_minus(p).shifted(tc.theta);
    const Polynomial sh_p = symbol_sh_plus(p).shifted(shift_plus);
    rep.kappa2 = std::numeric_limits<double>::infinity();
    rep.kpp_gap = std::numeric_limits<double>::infinity();
    auto count_split = [](const DispersionRoots& d, int want_neg) {
        int neg = 0;
        for (const auto& z : d.roots) neg += z.real() < 0;
        return neg == want_neg;
    };
    for (const cplx& lam : lambda_samples) {
        if (lam.real() < -2.0 * tc.eta) continue;
        for (const Polynomial* s : {&sh_m, &sh_p}) {
            const auto d = dispersion_roots(*s, lam);
            for (const auto& z : d.roots) rep.kappa2 = std::min(rep.kappa2, std::abs(z.real()));
            rep.split_ok = rep.split_ok && count_split(d, 2);
        }
        const auto dk = dispersion_roots(kpp_m, lam);
        for (const auto& z : dk.roots) rep.kpp_gap = std::min(rep.kpp_gap, std::abs(z.real()));
        rep.split_ok = rep.split_ok && count_split(dk, 1);
        if (!(lam.real() <= 0 && std::abs(lam.imag()) < 1e-14))
            rep.split_ok = rep.split_ok && count_split(dispersion_roots(kpp_p, lam), 1);
    }
    // Large-|lambda| scaling on the positive real axis over three decades.
    std::vector<double> lx, lsh, lkpp;
    rep.R = 1e2;
    for (int k = 0; k <= 30; ++k) {
        const double lam = std::pow(10.0, 2.0 + 3.0 * k / 30.0);
        double msh = std::numeric_limits<double>::infinity(), mk = msh;
        for (const auto& z : dispersion_roots(sh_p, lam).roots) msh = std::min(msh, std::abs(z.real()));
        for (const auto& z : dispersion_roots(kpp_p, lam).roots) mk = std::min(mk, std::abs(z.real()));
        lx.push_back(std::log(lam));
        lsh.push_back(std::log(msh));
        lkpp.push_back(std::log(mk));
    }
    rep.sh_large_exponent = fit_slope(lx, lsh);
    rep.kpp_large_exponent = fit_slope(lx, lkpp);
    rep.sh_large_C = std::exp(lsh.back() - 0.25 * lx.back());
    rep.kpp_large_C = std::exp(lkpp.back() - 0.5 * lx.back());
    return rep;
}

}  // namespace kppsh
