#pragma once

#include <vector>

#include "kppsh/grid.hpp"
#include "kppsh/params.hpp"

namespace kppsh {

struct FrontProfile {
    Grid1D grid;
    std::vector<double> q;
    std::vector<double> qprime;
    double c = 0;
    double residual = 0;  // sup-norm of the discrete ODE residual on the interior
    int newton_iterations = 0;

    // Cubic Hermite interpolation; constant extension outside the grid.
    double q_at(double x) const;
    double qprime_at(double x) const;
};

// Saddle rate at q = 1.
double left_saddle_rate(const SystemParams& p);

struct ShootResult {
    std::vector<double> x, q, qprime;
    bool went_negative = false;
    double x_negative = 0;
};

// Integrates the front ODE at speed c from the unstable manifold of q = 1, with q(0) = 1/2 phase.
ShootResult shoot_front(const SystemParams& p, double c, double x_end, double rtol = 1e-10);

// Discrete residual d q'' + c q' + alpha q (1 - q^2) with second-order centered differences.
std::vector<double> front_residual(const SystemParams& p, const Grid1D& g, const std::vector<double>& q, double c);

FrontProfile solve_front(const SystemParams& p, const Grid1D& grid, double x_phase = 0.0,
                         bool enforce_resolution = true);
FrontProfile solve_front(const SystemParams& p, double x_min = -40.0, double x_max = 60.0, int n = 4001);

struct FrontFit {
    double a = 0, b = 0, r_squared = 0;
    double kappa_measured = 0;
    double kappa_expected = 0;
};

FrontFit check_front_asymptotics(const FrontProfile& f, const SystemParams& p, double fit_lo = 10.0,
                                 double fit_hi = -1.0);

}  // namespace kppsh
