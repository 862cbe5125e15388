#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kppsh/front.hpp"
#include "kppsh/grid.hpp"
#include "kppsh/params.hpp"
#include "kppsh/spectral.hpp"
#include "kppsh/weights.hpp"

namespace kppsh {

struct StateField {
    Grid1D grid;
    std::vector<double> u, v;
    double t = 0;
};

enum class PerturbationKind { P, U, V };
std::string to_string(PerturbationKind k);

struct PerturbationField {
    Grid1D grid;
    PerturbationKind kind = PerturbationKind::P;
    std::vector<double> first, second;
    double t = 0;
};

// Gaussian bump in one component of U: amplitude * exp(-(x - center)^2 / (2 width^2)).
struct IcBump {
    int component = 0;
    double center = 0;
    double width = 1;
    double amplitude = 0;
};

struct SimConfig {
    SystemParams params;
    Grid1D grid = Grid1D::uniform_dx(-400.0, 200.0, 0.15);
    double dt = 0.01;
    double t_end = 400.0;
    double sponge_width = 40.0;
    double sponge_strength = 5.0;
    std::vector<IcBump> ic;
    double record_every = 1.0;
    double snapshot_every = 50.0;
    std::uint64_t seed = 0;
    double noise = 0.0;  // seeded uniform noise on the interior, bounded in both P and U rho*^3
    double wall_budget_seconds = 0.0;  // 0 disables the budget

    // Default initial condition: a KPP bump at the interface and a Turing seed behind it.
    static std::vector<IcBump> default_ic(const SystemParams& p, double theta);
    void validate() const;
};

// Everything the steppers need that depends only on the configuration.
struct SimContext {
    SimConfig cfg;
    FrontProfile front;
    ThetaChoice theta;
    std::vector<double> sponge;       // sigma_sp(x)
    std::vector<double> inv_omega_star, inv_varpi, inv_rho_star;
    std::vector<double> omega_star, omega_sh;
};

std::shared_ptr<const SimContext> make_context(const SimConfig& cfg);

// Background front on a given grid, consistent with the simulator's finite differences.
FrontProfile background_front(const SystemParams& p, const Grid1D& g);

class SimulationAborted : public std::runtime_error {
public:
    SimulationAborted(const std::string& msg, StateField last_good)
        : std::runtime_error(msg), last_good_(std::move(last_good)) {}
    const StateField& last_good() const { return last_good_; }

private:
    StateField last_good_;
};

// Full-state IMEX stepper (Crank-Nicolson on the linear part, AB2 on the rest).
class FullStepper {
public:
    explicit FullStepper(std::shared_ptr<const SimContext> ctx);
    void step(StateField& s);
    const SimContext& context() const { return *ctx_; }

private:
    std::shared_ptr<const SimContext> ctx_;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// One step of the full system; keeps the AB2 history inside the stepper.
StateField step_full(const StateField& s, FullStepper& stepper);

// Stepper for the weighted perturbation U with conjugated variable-coefficient operators.
class WeightedStepper {
public:
    explicit WeightedStepper(std::shared_ptr<const SimContext> ctx);
    void step(PerturbationField& U);

private:
    std::shared_ptr<const SimContext> ctx_;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

StateField initial_state(const SimContext& ctx);
StateField equilibrium_state(const SimContext& ctx);

// Raw nonlinearities N1, N2 at perturbation P (kind P).
std::pair<std::vector<double>, std::vector<double>> nonlinear_terms(const PerturbationField& P,
                                                                    const FrontProfile& front,
                                                                    const SystemParams& p);
// Weighted nonlinearities for kind U, with the weight cancelled algebraically.
std::pair<std::vector<double>, std::vector<double>> nonlinear_terms_weighted(const PerturbationField& U,
                                                                             const FrontProfile& front,
                                                                             const SystemParams& p,
                                                                             const std::vector<double>& omega_star);

PerturbationField perturbation_of(const StateField& s, const FrontProfile& front);
PerturbationField change_frame(const PerturbationField& f, PerturbationKind target, const SystemParams& p,
                               double theta);

// Source term S(x, V) on the co-moving grid.
std::pair<std::vector<double>, std::vector<double>> source_term(const PerturbationField& V,
                                                                const FrontProfile& front,
                                                                const SystemParams& p, double theta);

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> norm_U_rho;   // sup |U| / rho*
    std::vector<double> norm_u1_rho;  // sup |u1| / rho*
    std::vector<double> norm_V;       // sup |V|
    std::vector<double> norm_u2;      // sup |u2|
    std::vector<double> v_sup;        // sup |v|
    std::vector<StateField> snapshots;
    bool truncated = false;
    double theta = 0, eta = 0;

    const std::vector<double>& series(const std::string& key) const;
};

TimeSeries run_simulation(const SimConfig& cfg);
// Records the diagnostics of one state into ts.
void record_norms(const SimContext& ctx, const StateField& s, TimeSeries& ts);

}  // namespace kppsh
