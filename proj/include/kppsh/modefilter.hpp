#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "kppsh/fft.hpp"
#include "kppsh/grid.hpp"
#include "kppsh/params.hpp"

namespace kppsh {

// Two-component real field on a grid.
struct FieldPair {
    Grid1D grid;
    std::vector<double> first, second;

    FieldPair() = default;
    explicit FieldPair(Grid1D g) : grid(g), first(g.n, 0.0), second(g.n, 0.0) {}
};

// Eigen-decomposition of the constant-coefficient symbol behind the front at wavenumber xi.
struct ModeEigen {
    double xi = 0;
    double lambda_c = 0, lambda_s = 0;
    Eigen::Vector2d rho_c, rho_s, rho_c_star, rho_s_star;
};

ModeEigen eigendata(const SystemParams& p, double xi);

// Smooth 0 -> 1 transition on [0, 1] built from exp(-1/t).
double smooth_transition(double t);

// Even cutoff equal to 1 for |xi| in [lo, hi] and 0 outside [lo - collar, hi + collar].
struct Cutoff {
    double lo = 0, hi = 0, collar = 0;
    double operator()(double xi) const;
};

enum class FilterKind { c, s, c_h, s_h };
std::string to_string(FilterKind k);

struct ModeFilterSpec {
    SystemParams params;
    Cutoff chi_c{7.0 / 8.0, 9.0 / 8.0, 1.0 / 8.0};
    Cutoff chi_c_h{3.0 / 4.0, 5.0 / 4.0, 1.0 / 4.0};
    Cutoff chi_s_h{15.0 / 16.0, 17.0 / 16.0, 1.0 / 16.0};

    static ModeFilterSpec make(const SystemParams& p);
    // Symbol matrix of the filter at wavenumber xi.
    Eigen::Matrix2d matrix(double xi, FilterKind k) const;
    // Checks that lambda_c != lambda_s on the support of chi_c_h.
    void validate() const;
};

// Periodic grid with the conventions used by the filters.
Grid1D filter_grid(double length = 256.0 * 3.14159265358979323846, double dx = 3.14159265358979323846 / 16.0);

FieldPair project(const ModeFilterSpec& spec, const FieldPair& f, FilterKind k);
// One-sided scalar projection onto the critical modes near xi = +1.
ComplexField1D project_pi1h(const ModeFilterSpec& spec, const FieldPair& f);

// Pointwise symmetric bilinear form B with Q^-(V) = B(V, V) + cubic terms.
FieldPair quadratic_form(const SystemParams& p, const FieldPair& a, const FieldPair& b);

double sup_norm(const FieldPair& f);
FieldPair operator-(const FieldPair& a, const FieldPair& b);
FieldPair operator+(const FieldPair& a, const FieldPair& b);

// ||Pi_c(Pi_c V1 . Pi_c V2)|| / (||V1|| ||V2||) in sup norms.
double quadratic_vanishing_check(const ModeFilterSpec& spec, const FieldPair& v1, const FieldPair& v2);

// Random real field pair with Fourier support in |xi| <= xi_max, unit sup-norm scale.
FieldPair random_band_limited(const Grid1D& g, double xi_max, std::uint64_t seed);

struct SemigroupReport {
    double kappa = 0;            // predicted decay rate for the stable part
    double stable_rate = 0;      // measured rate of sup_xi ||exp(t T) Pi_s^h||
    double stable_C = 0;
    double critical_max_ratio = 0;  // sup_t sup_xi ||exp(t T) Pi_c^h|| / exp(2 mu t)
    std::vector<double> t, stable_norm, critical_norm;
};

SemigroupReport semigroup_check(const ModeFilterSpec& spec, const Grid1D& g, double t_max, int nt);

struct FilterSelfTest {
    double partition = 0;
    double hermitian = 0;
    double idempotent_c = 0;
    double idempotent_s = 0;
    double passband = 0;
    double stopband = 0;
    double quadratic = 0;
    double quadratic_control = 0;
};

FilterSelfTest filters_selftest(const SystemParams& p, std::uint64_t seed = 1, int n_trials = 4);

}  // namespace kppsh
