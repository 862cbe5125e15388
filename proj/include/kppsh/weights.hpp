#pragma once

#include <array>

#include "kppsh/grid.hpp"
#include "kppsh/params.hpp"

namespace kppsh {

enum class WeightKind { one, omega_kpp, omega_sh, rho_star, varpi, omega_star, rho_ul };
std::string to_string(WeightKind k);

struct WeightSpec {
    WeightKind kind = WeightKind::one;
    double c_star = 2.0;
    double d = 1.0;
    double theta = 0.0;
    bool reciprocal = false;  // use 1/w instead of w
    Frame frame = Frame::comoving;

    static WeightSpec make(WeightKind k, const SystemParams& p, double theta, bool reciprocal = false);
    WeightSpec inverse() const;
};

// Quintic smoothstep on [0,1] and its derivatives up to order 4.
std::array<double, 5> smoothstep5(double t);

// log w and its first four derivatives.
std::array<double, 5> log_weight_derivs(const WeightSpec& w, double x);
// w and its first four derivatives.
std::array<double, 5> weight_derivs(const WeightSpec& w, double x);
// w^(k) / w for k = 0..4, computed from the log-derivatives without forming w.
std::array<double, 5> weight_ratios(const WeightSpec& w, double x);
double eval_weight(const WeightSpec& w, double x);
std::vector<double> eval_weight(const WeightSpec& w, const Grid1D& g);

double weighted_sup_norm(const Field1D& f, const WeightSpec& w);

struct UlNorm {
    double value = 0;
    bool coarse_warning = false;
};
// Uniformly local norm of order s in {0, 1}. Periodic grids use minimum-image distances.
UlNorm ul_sobolev_norm(const Field1D& f, int s);

}  // namespace kppsh
