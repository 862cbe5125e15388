#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "kppsh/modefilter.hpp"

using namespace kppsh;

namespace {

SystemParams preset(double mu = 0.0) {
    SystemParams p;
    p.gamma = 20;
    p.mu = mu;
    return p;
}

FieldPair mode(const Grid1D& g, double xi, const Eigen::Vector2d& v) {
    FieldPair f(g);
    for (int i = 0; i < g.n; ++i) {
        const double c = 2 * std::cos(xi * g.x(i));
        f.first[i] = c * v[0];
        f.second[i] = c * v[1];
    }
    return f;
}

}  // namespace

TEST_CASE("eigendata against a direct eigen solve") {
    const SystemParams p = preset(0.05);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int k = 0; k < 100; ++k) {
        const double xi = U(rng);
        const ModeEigen e = eigendata(p, xi);
        Eigen::Matrix2d M;
        M << -2 * p.alpha - p.d * xi * xi, p.beta, 0, -std::pow(1 - xi * xi, 2) + p.mu;
        const Eigen::Vector2d lam = Eigen::EigenSolver<Eigen::Matrix2d>(M).eigenvalues().real();
        CHECK(std::min(lam[0], lam[1]) == doctest::Approx(std::min(e.lambda_c, e.lambda_s)).epsilon(1e-12));
        CHECK(std::max(lam[0], lam[1]) == doctest::Approx(std::max(e.lambda_c, e.lambda_s)).epsilon(1e-12));
        CHECK((M * e.rho_c - e.lambda_c * e.rho_c).norm() <= 1e-12 * e.rho_c.norm());
        CHECK((M * e.rho_s - e.lambda_s * e.rho_s).norm() <= 1e-12 * e.rho_s.norm());
        CHECK(e.rho_c.dot(e.rho_c_star) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(e.rho_s.dot(e.rho_c_star)) <= 1e-12);
    }
}

TEST_CASE("eigendata at xi = 1 and xi = 0") {
    const SystemParams p = preset();
    const ModeEigen e = eigendata(p, 1.0);
    CHECK(e.lambda_c == doctest::Approx(p.mu));
    CHECK(e.lambda_s == doctest::Approx(-p.d - 2 * p.alpha));
    CHECK(e.rho_c[0] == doctest::Approx(p.beta));
    CHECK(e.rho_c[1] == doctest::Approx(p.d + 2 * p.alpha));
    CHECK(eigendata(preset(0.3), 0.0).lambda_c == doctest::Approx(-0.7));
}

TEST_CASE("cutoffs") {
    const Cutoff c{7.0 / 8, 9.0 / 8, 1.0 / 8};
    CHECK(c(1.0) == 1.0);
    CHECK(c(-1.0) == 1.0);
    CHECK(c(0.75) == 0.0);
    CHECK(c(1.25) == 0.0);
    CHECK(c(0.8) > 0.0);
    CHECK(c(0.8) < 1.0);
    CHECK(smooth_transition(0.5) == doctest::Approx(0.5));
    for (double t = 0.01; t < 1; t += 0.07) CHECK(smooth_transition(t) + smooth_transition(1 - t) == doctest::Approx(1.0));
}

TEST_CASE("critical projection passes the critical mode and rejects far modes") {
    const SystemParams p = preset(0.02);
    const ModeFilterSpec spec = ModeFilterSpec::make(p);
    const Grid1D g = filter_grid();
    const FieldPair f = mode(g, 1.0, eigendata(p, 1.0).rho_c);
    CHECK(sup_norm(project(spec, f, FilterKind::c) - f) <= 1e-12 * sup_norm(f));
    const FieldPair h = mode(g, 3.0, Eigen::Vector2d(0.4, -1.1));
    CHECK(sup_norm(project(spec, h, FilterKind::c)) <= 1e-12);
    // a stable-direction mode at xi = 1 lies in the kernel
    const FieldPair s = mode(g, 1.0, eigendata(p, 1.0).rho_s);
    CHECK(sup_norm(project(spec, s, FilterKind::c)) <= 1e-12 * sup_norm(s));
}

TEST_CASE("projection of a single mode matches the symbol") {
    const SystemParams p = preset(0.02);
    const ModeFilterSpec spec = ModeFilterSpec::make(p);
    const Grid1D g = filter_grid();
    const double dxi = 2 * M_PI / g.length();
    for (int j : {120, 126, 130, 140}) {
        const double xi = j * dxi;
        const Eigen::Vector2d v(0.3, 0.8);
        const ModeEigen e = eigendata(p, xi);
        const Eigen::Vector2d expect = spec.chi_c(xi) * e.rho_c * e.rho_c_star.dot(v);
        const FieldPair out = project(spec, mode(g, xi, v), FilterKind::c);
        const FieldPair ref = mode(g, xi, expect);
        CHECK(sup_norm(out - ref) <= 1e-12);
    }
}

TEST_CASE("partition, realness and idempotence") {
    const FilterSelfTest r = filters_selftest(preset(0.02));
    CHECK(r.partition <= 1e-13);
    CHECK(r.hermitian <= 1e-13);
    CHECK(r.idempotent_c <= 1e-12);
    CHECK(r.idempotent_s <= 1e-12);
    CHECK(r.passband <= 1e-12);
    CHECK(r.stopband <= 1e-12);
    CHECK(r.quadratic <= 1e-12);
    CHECK(r.quadratic_control >= 0.01);
}

TEST_CASE("products of critical modes leave the critical band") {
    const SystemParams p = preset(0.02);
    const ModeFilterSpec spec = ModeFilterSpec::make(p);
    const Grid1D g = filter_grid();
    const FieldPair f = mode(g, 1.0, eigendata(p, 1.0).rho_c);
    CHECK(quadratic_vanishing_check(spec, f, f) <= 1e-12);
}

TEST_CASE("one-sided projection recovers a slowly modulated amplitude") {
    const SystemParams p = preset(0.01);
    const ModeFilterSpec spec = ModeFilterSpec::make(p);
    const Eigen::Vector2d rc = eigendata(p, 1.0).rho_c;
    std::vector<double> errs;
    for (double eps : {0.1, 0.05}) {
        const Grid1D g = filter_grid(2 * M_PI / eps * 8, M_PI / 16);
        FieldPair f(g);
        std::vector<cplx> target(g.n);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            const cplx A = cplx(1.0, 0.5) * std::cos(eps * x / 8) + 0.3;
            const cplx z = eps * std::exp(cplx(0, x)) * A;
            target[i] = z;
            f.first[i] = 2 * (z * rc[0]).real();
            f.second[i] = 2 * (z * rc[1]).real();
        }
        const ComplexField1D a = project_pi1h(spec, f);
        double e = 0, m = 0;
        for (int i = 0; i < g.n; ++i) {
            e = std::max(e, std::abs(a.values[i] - target[i]));
            m = std::max(m, std::abs(target[i]));
        }
        errs.push_back(e / m);
    }
    // normalization by <rho_c(1), rho_c*(xi)> makes the recovery exact inside the plateau
    CHECK(errs[0] <= 1e-12);
    CHECK(errs[1] <= 1e-12);
}

TEST_CASE("semigroup bounds") {
    const SystemParams p = preset(0.005);
    const ModeFilterSpec spec = ModeFilterSpec::make(p);
    const SemigroupReport r = semigroup_check(spec, filter_grid(), 100.0, 200);
    CHECK(r.kappa > 0);
    CHECK(r.stable_rate >= r.kappa * (1 - 1e-9));
    CHECK(r.critical_max_ratio <= 1.1);
}

TEST_CASE("colliding eigenvalues are rejected") {
    SystemParams p = preset();
    // lambda_c = lambda_s at xi = 1 when mu = -d - 2 alpha
    p.mu = -p.d - 2 * p.alpha;
    CHECK_THROWS(eigendata(p, 1.0));
}
