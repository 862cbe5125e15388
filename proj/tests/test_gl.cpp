#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "kppsh/gl.hpp"

using namespace kppsh;

namespace {

SystemParams preset(double mu = 0.0) {
    SystemParams p;
    p.gamma = 20;
    p.mu = mu;
    return p;
}

// Printed cubic coefficient, written out term by term.
double printed_cubic(const SystemParams& p, double g) {
    const double a = p.alpha, b = p.beta, d = p.d, s = p.sigma;
    const double q = 4 * d + 2 * a;
    return g * g * b * b * (19.0 / 9.0 + (d + 2 * a) * (1 / a + 1 / (9 * q))) - 3 * g * b * b * (1 + a / q) -
           3 * s * (d + 2 * a) * (d + 2 * a);
}

double rel(const Vec2c& a, const Vec2c& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("rho_c spans ker M(i) and matches the printed direction") {
    const SystemParams p = preset();
    const GLData gl = derive_ansatz_vectors(p);
    const cplx I(0, 1);
    CHECK((symbol_M_at(p, I) * gl.rho_c).norm() <= 1e-14);
    const Vec2c printed(p.beta, p.d + 2 * p.alpha);
    CHECK(rel(gl.rho_c, printed) <= 1e-14);
    CHECK(std::abs(inner(gl.rho_c, gl.rho_c_star) - 1.0) <= 1e-14);
    CHECK((symbol_M_at(p, I).adjoint() * gl.rho_c_star).norm() <= 1e-14);
}

TEST_CASE("rho_0 and rho_2 against the printed closed forms") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.2, 3.0);
    for (int k = 0; k < 50; ++k) {
        SystemParams p;
        p.d = U(rng);
        p.alpha = U(rng);
        p.beta = 0.3 * U(rng);
        p.gamma = 10 * U(rng);
        p.sigma = 5 * U(rng);
        const GLData gl = derive_ansatz_vectors(p);
        CHECK(rel(gl.rho_0, closed_form_rho0(p)) <= 1e-12);
        CHECK(rel(gl.rho_2, closed_form_rho2(p)) <= 1e-12);
    }
    // Hand-evaluated at the preset.
    const Vec2c r0 = closed_form_rho0(preset());
    CHECK(r0[0].real() == doctest::Approx(0.01 * (20 * 3 - 3)).epsilon(1e-14));
    CHECK(r0[1].real() == doctest::Approx(2 * 20 * 0.1 * 3).epsilon(1e-14));
    const Vec2c r2 = closed_form_rho2(preset());
    CHECK(r2[0].real() == doctest::Approx(0.01 * (60 - 27) / 54.0).epsilon(1e-14));
    CHECK(r2[1].real() == doctest::Approx(20 * 0.1 * 3 * 6 / 54.0).epsilon(1e-14));
}

TEST_CASE("assembled cubic coefficient matches the closed form on random draws") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.2, 3.0);
    for (int k = 0; k < 100; ++k) {
        SystemParams p;
        p.d = U(rng);
        p.alpha = U(rng);
        p.beta = 0.3 * U(rng);
        p.gamma = 20 * U(rng);
        p.sigma = 5 * U(rng);
        const GLData gl = derive_ansatz_vectors(p);
        const double ref = printed_cubic(p, p.gamma);
        CHECK(std::abs(gl.cubic - ref) <= 1e-10 * (1 + std::abs(ref)));
        CHECK(std::abs(gl_cubic_coefficient(p, p.gamma) - ref) <= 1e-10 * (1 + std::abs(ref)));
        // Re-assembly at another gamma rebuilds rho_0, rho_2.
        const double g2 = 0.5 * p.gamma;
        CHECK(std::abs(assemble_cubic(p, g2, gl) - printed_cubic(p, g2)) <= 1e-10 * (1 + std::abs(ref)));
    }
}

TEST_CASE("cubic coefficient at gamma = 0 and under the gate") {
    const SystemParams p = preset();
    const GLData gl = derive_ansatz_vectors(p);
    const double s = p.d + 2 * p.alpha;
    CHECK(assemble_cubic(p, 0.0, gl) == doctest::Approx(-3 * p.sigma * s * s).epsilon(1e-12));
    CHECK(gl.cubic == doctest::Approx(-250.03333333333333).epsilon(1e-12));
    SystemParams g = preset();
    g.mu0 = 0.01;
    const GateReport r = check_hypotheses(g);
    REQUIRE(r.admissible);
    for (double gamma = r.gamma_interval->first + 1e-6; gamma < r.gamma_interval->second; gamma += 2.0)
        CHECK(assemble_cubic(g, gamma, gl) < 0);
}

TEST_CASE("linear and diffusion coefficients") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.2, 3.0);
    for (int k = 0; k < 20; ++k) {
        SystemParams p;
        p.d = U(rng);
        p.alpha = U(rng);
        p.beta = 0.3 * U(rng);
        p.gamma = 10 * U(rng);
        const GLData gl = derive_ansatz_vectors(p);
        CHECK(std::abs(diffusion_identity(p, gl) - 4.0) <= 1e-12);
        const Vec2c lin(0, gl.rho_c[1]);
        CHECK(std::abs(inner(lin, gl.rho_c_star) - 1.0) <= 1e-14);
        CHECK(gl.rho1_residual <= 1e-12);
        CHECK(gl.solvability <= 1e-12);
    }
}

TEST_CASE("homogeneous GL follows the logistic law") {
    const Grid1D g = Grid1D::periodic_grid(0, 40 * std::numbers::pi, 64);
    const double b = -1, a0 = 0.1;
    GLField A = make_gl_field(g, [&](double) { return cplx(a0, 0); });
    GLStepper s(g, b, 0.01);
    for (int k = 0; k < 2000; ++k) s.step(A);
    const double T = A.T;
    CHECK(T == doctest::Approx(20.0));
    const double exact = 1.0 / (-b + (1 / (a0 * a0) + b) * std::exp(-2 * T));
    CHECK(std::norm(A.A[0]) == doctest::Approx(exact).epsilon(1e-4));
    CHECK(std::abs(gl_sup(A) - 1.0) <= 0.01);

    // Check the curve mid-way, where the logistic transition is steep.
    GLField B = make_gl_field(g, [&](double) { return cplx(a0, 0); });
    for (int k = 0; k < 250; ++k) s.step(B);
    const double e2 = 1.0 / (-b + (1 / (a0 * a0) + b) * std::exp(-2 * B.T));
    CHECK(std::norm(B.A[7]) == doctest::Approx(e2).epsilon(1e-4));

    GLField Z = make_gl_field(g, [](double) { return cplx(0, 0); });
    for (int k = 0; k < 100; ++k) s.step(Z);
    CHECK(gl_sup(Z) == 0.0);
}

TEST_CASE("GL gauge symmetry and realness") {
    const Grid1D g = Grid1D::periodic_grid(0, 40 * std::numbers::pi, 256);
    auto f = [](double X) { return cplx(0.5 + 0.3 * std::cos(X / 10), 0.2 * std::sin(X / 20)); };
    const double phase = 0.7;
    GLField A = make_gl_field(g, f);
    GLField B = make_gl_field(g, [&](double X) { return std::polar(1.0, phase) * f(X); });
    GLStepper s(g, -2.0, 0.01);
    for (int k = 0; k < 50; ++k) {
        s.step(A);
        s.step(B);
        double err = 0;
        for (int i = 0; i < g.n; ++i) err = std::max(err, std::abs(B.A[i] - std::polar(1.0, phase) * A.A[i]));
        CHECK(err <= 1e-12);
    }
    GLField R = make_gl_field(g, [](double X) { return cplx(0.4 + 0.2 * std::cos(X / 10), 0); });
    for (int k = 0; k < 100; ++k) s.step(R);
    double im = 0;
    for (const auto& z : R.A) im = std::max(im, std::abs(z.imag()));
    CHECK(im <= 1e-13);
}

TEST_CASE("psi of the zero and constant amplitude") {
    const SystemParams p = preset(0.01);
    const GLData gl = derive_ansatz_vectors(p);
    const double eps = 0.1;
    const Grid1D X = Grid1D::periodic_grid(0, 40 * std::numbers::pi, 256);
    const Grid1D x = Grid1D::periodic_grid(0, 400 * std::numbers::pi, 6400);
    const FieldPair zero = build_psi(eps, make_gl_field(X, [](double) { return cplx(0, 0); }), gl, x);
    CHECK(sup_norm(zero) == 0.0);

    const FieldPair one = build_psi(eps, make_gl_field(X, [](double) { return cplx(1, 0); }), gl, x);
    // Explicit ansatz with A = 1, A_X = 0.
    double err = 0;
    for (int i = 0; i < x.n; i += 37) {
        const double xi = x.x(i);
        for (int c = 0; c < 2; ++c) {
            const double ref = 2 * eps * gl.rho_c[c].real() * std::cos(xi) +
                               eps * eps * (gl.rho_0[c].real() + 2 * gl.rho_2[c].real() * std::cos(2 * xi));
            err = std::max(err, std::abs((c == 0 ? one.first : one.second)[i] - ref));
        }
    }
    CHECK(err <= 1e-12);
    const double bound = 2 * eps * gl.rho_c.norm() + eps * eps * (gl.rho_0.norm() + 2 * gl.rho_2.norm());
    CHECK(sup_norm(one) <= bound);
    CHECK(approximation_residual(one, one) == 0.0);
}

TEST_CASE("psi rejects mismatched grids") {
    const GLData gl = derive_ansatz_vectors(preset(0.01));
    const Grid1D X = Grid1D::periodic_grid(0, 40 * std::numbers::pi, 256);
    const Grid1D x = Grid1D::periodic_grid(0, 300 * std::numbers::pi, 6400);
    CHECK_THROWS_AS(build_psi(0.1, make_gl_field(X, [](double) { return cplx(1, 0); }), gl, x),
                    std::invalid_argument);
}

TEST_CASE("extract_A0 recovers the amplitude of the leading-order term") {
    const SystemParams p = preset(0.01);
    const GLData gl = derive_ansatz_vectors(p);
    const double eps = 0.1;
    const Grid1D X = Grid1D::periodic_grid(0, 40 * std::numbers::pi, 256);
    const Grid1D x = Grid1D::periodic_grid(0, 400 * std::numbers::pi, 6400);
    // Leading-order term only: eps (e^{ix} A rho_c + c.c.).
    GLData lead = gl;
    lead.rho_0.setZero();
    lead.rho_1.setZero();
    lead.rho_2.setZero();
    auto roundtrip = [&](const ModeFilterSpec& spec, const std::function<cplx(double)>& f) {
        const GLField A = make_gl_field(X, f);
        const GLField back = extract_A0(spec, build_psi(eps, A, lead, x), eps, X);
        double err = 0, m = 0;
        for (int i = 0; i < X.n; ++i) {
            err = std::max(err, std::abs(back.A[i] - A.A[i]));
            m = std::max(m, std::abs(A.A[i]));
        }
        return err / m;
    };
    auto modulated = [](double Xv) { return cplx(0.5 + 0.2 * std::cos(Xv / 10), 0.1 * std::sin(Xv / 20)); };
    // With mu = 0 the filter's critical vector at xi = 1 is rho_c itself.
    const ModeFilterSpec exact = ModeFilterSpec::make(preset(0.0));
    CHECK(roundtrip(exact, [](double) { return cplx(0.3, -0.4); }) <= 1e-10);
    CHECK(roundtrip(exact, modulated) <= 1e-10);
    // At mu = eps^2 the filter's vector is (beta, d + 2 alpha + mu): an O(mu) offset.
    const double r = roundtrip(ModeFilterSpec::make(p), modulated);
    CHECK(r <= 2 * p.mu / (p.d + 2 * p.alpha));
    CHECK(r >= 0.5 * p.mu / (p.d + 2 * p.alpha));
}

TEST_CASE("attractor bound for GL") {
    const AttractorCheck r = gl_attractor_check(-1.0, 10.0, 20.0, 1.05);
    REQUIRE(!r.T.empty());
    CHECK(r.holds);
    CHECK(r.T.front() >= 1.0);
    CHECK(r.sup.back() <= 1.05);
    CHECK(r.sup.back() >= 0.9);
}
