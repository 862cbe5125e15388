#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace kppsh {

struct SystemParams {
    double d = 1.0;
    double alpha = 1.0;
    double beta = 0.1;
    double gamma = 20.0;
    double sigma = 10.0;
    double mu = 0.0;
    double mu0 = 0.01;

    double c_star() const;
    double epsilon() const;  // sqrt(mu), requires mu >= 0
    // Throws std::invalid_argument when a type invariant is violated.
    void validate() const;
};

struct GateReport {
    double c_star = 0;
    double gamma_rem = 0;
    double gamma_gl = 0;
    bool admissible = false;
    std::optional<std::pair<double, double>> gamma_interval;
    double p_of_gamma = 0;
};

struct Equilibrium {
    double u;
    double v;
};

struct EquilibriumSet {
    std::vector<Equilibrium> points;
    double sigma0 = 0;
};

double critical_speed(const SystemParams& p);
double gamma_rem(const SystemParams& p);
// Coefficient of the quadratic-in-gamma leading term, "a".
double gl_a(const SystemParams& p);
double gl_cubic_coefficient(const SystemParams& p, double gamma);
double gamma_gl(const SystemParams& p);
GateReport check_hypotheses(const SystemParams& p);
EquilibriumSet equilibria(const SystemParams& p);

// Right-hand sides of the spatially homogeneous system at (u, v).
std::pair<double, double> homogeneous_rhs(const SystemParams& p, double u, double v);

}  // namespace kppsh
