#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "kppsh/params.hpp"

using namespace kppsh;

namespace {

SystemParams preset() {
    SystemParams p;
    p.alpha = 1;
    p.beta = 0.1;
    p.d = 1;
    p.sigma = 10;
    p.gamma = 20;
    p.mu0 = 0.01;
    return p;
}

}  // namespace

TEST_CASE("critical speed") {
    SystemParams p;
    CHECK(critical_speed(p) == doctest::Approx(2.0));
    p.d = 4;
    CHECK(critical_speed(p) == doctest::Approx(4.0));
    p.d = 1;
    p.alpha = 0;
    CHECK_THROWS(critical_speed(p));
}

TEST_CASE("gamma_rem values") {
    SystemParams p = preset();
    CHECK(gamma_rem(p) == doctest::Approx(10.01).epsilon(1e-14));
    p.d = 2;
    p.mu0 = 0;
    CHECK(gamma_rem(p) == doctest::Approx(2.0).epsilon(1e-14));
    p.d = 1;
    p.alpha = 1e-9;
    CHECK(gamma_rem(p) < 1e-7);
    CHECK(gamma_rem(p) > 0);
}

TEST_CASE("gamma_rem leading terms depend on alpha/d only") {
    SystemParams p = preset();
    SystemParams q = p;
    for (double k : {0.5, 3.0, 10.0}) {
        q.alpha = k * p.alpha;
        q.d = k * p.d;
        const double a = gamma_rem(p) - (-2 * p.alpha + p.mu0);
        const double b = gamma_rem(q) - (-2 * q.alpha + q.mu0);
        CHECK(b == doctest::Approx(a).epsilon(1e-13));
    }
}

TEST_CASE("cubic coefficient at gamma = 0 keeps only the sigma term") {
    SystemParams p = preset();
    const double s = p.d + 2 * p.alpha;
    CHECK(gl_cubic_coefficient(p, 0.0) == doctest::Approx(-3 * p.sigma * s * s));
    CHECK(gl_cubic_coefficient(p, 20.0) == doctest::Approx(-250.03333333333333).epsilon(1e-13));
}

TEST_CASE("gamma_gl is the positive root of the cubic coefficient") {
    SystemParams p = preset();
    const double g = gamma_gl(p);
    CHECK(g == doctest::Approx(72.62924277725533).epsilon(1e-12));
    const double scale = 3 * p.sigma * std::pow(p.d + 2 * p.alpha, 2);
    CHECK(std::abs(gl_cubic_coefficient(p, g)) / scale < 1e-12);
}

TEST_CASE("cubic coefficient is quadratic in gamma with one positive root") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (int k = 0; k < 50; ++k) {
        SystemParams p = preset();
        p.alpha = U(rng);
        p.d = U(rng);
        p.sigma = U(rng);
        p.beta = U(rng) - 2.55;
        // third finite difference vanishes, second is 2a beta^2 > 0
        const double h = 1.7;
        double P[4];
        for (int i = 0; i < 4; ++i) P[i] = gl_cubic_coefficient(p, 3.0 + i * h);
        const double d2 = P[2] - 2 * P[1] + P[0];
        const double d3 = P[3] - 3 * P[2] + 3 * P[1] - P[0];
        CHECK(d2 > 0);
        CHECK(std::abs(d3) <= 1e-9 * (std::abs(P[0]) + std::abs(P[3])));
        CHECK(gl_cubic_coefficient(p, 0.0) < 0);
        const double g = gamma_gl(p);
        CHECK(g > 0);
        CHECK(gl_cubic_coefficient(p, 0.5 * g) < 0);
        CHECK(gl_cubic_coefficient(p, 1.5 * g) > 0);
    }
}

TEST_CASE("gamma_gl grows as beta shrinks and as sigma grows") {
    SystemParams p = preset();
    double prev = 0;
    for (int k = 1; k <= 4; ++k) {
        p.beta = std::pow(10.0, -k);
        const double g = gamma_gl(p);
        CHECK(g > prev);
        prev = g;
    }
    p = preset();
    const double g1 = gamma_gl(p);
    p.sigma *= 2;
    CHECK(gamma_gl(p) > g1);
}

TEST_CASE("hypothesis gate") {
    SystemParams p = preset();
    GateReport g = check_hypotheses(p);
    CHECK(g.admissible);
    REQUIRE(g.gamma_interval.has_value());
    CHECK(g.gamma_interval->first == doctest::Approx(10.01));
    CHECK(g.p_of_gamma < 0);

    p.gamma = g.gamma_rem;
    CHECK_FALSE(check_hypotheses(p).admissible);

    SystemParams q = preset();
    q.beta = 10;
    q.sigma = 0.01;
    q.gamma = 11;
    const GateReport h = check_hypotheses(q);
    CHECK(h.admissible == (h.gamma_rem < h.gamma_gl && q.gamma > h.gamma_rem && q.gamma < h.gamma_gl));
    CHECK(h.gamma_gl < h.gamma_rem);
    CHECK_FALSE(h.admissible);
    CHECK_FALSE(h.gamma_interval.has_value());
}

TEST_CASE("admissible draws have a negative cubic coefficient") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int hits = 0;
    for (int k = 0; k < 20000 && hits < 1000; ++k) {
        SystemParams p;
        p.alpha = 0.2 + 2 * U(rng);
        p.d = 0.2 + 2 * U(rng);
        p.sigma = 0.5 + 20 * U(rng);
        p.beta = (U(rng) < 0.5 ? -1 : 1) * std::pow(10.0, -2 * U(rng));
        p.mu0 = 0.05 * U(rng) + 1e-3;
        p.gamma = 200 * U(rng) + 0.01;
        const GateReport g = check_hypotheses(p);
        if (!g.admissible) continue;
        ++hits;
        CHECK(g.p_of_gamma < 0);
    }
    CHECK(hits == 1000);
}

TEST_CASE("invalid parameters are rejected") {
    SystemParams p = preset();
    p.beta = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = preset();
    p.sigma = -1;
    CHECK_THROWS_AS(check_hypotheses(p), std::invalid_argument);
    p = preset();
    p.mu = -0.1;
    CHECK_THROWS(p.epsilon());
}

TEST_CASE("equilibria") {
    SystemParams p = preset();
    auto residual = [&](const Equilibrium& e) {
        auto [a, b] = homogeneous_rhs(p, e.u, e.v);
        return std::max(std::abs(a), std::abs(b));
    };
    EquilibriumSet s = equilibria(p);
    CHECK(s.sigma0 == doctest::Approx(0.25));
    CHECK(s.points.size() == 3);
    for (const auto& e : s.points) CHECK(residual(e) <= 1e-14);

    // sigma0 is only a sufficient bound; the oracle is a dense scan of the signed gap between the two curves.
    auto gap_changes_sign = [&](double sigma) {
        const double k = p.gamma * p.beta / (2 * p.alpha);
        double prev = 0;
        for (int i = 1; i <= 200000; ++i) {
            const double v = (2 * k / sigma) * i / 200000.0;
            const double u = 1 - (p.mu - 1 - sigma * v * v) / p.gamma;
            const double g = p.alpha * u * (1 - u * u) + p.beta * v;
            if (i > 1 && (g < 0) != (prev < 0)) return true;
            prev = g;
        }
        return false;
    };
    for (double sigma : {0.24, 0.15, 0.05}) {
        p.sigma = sigma;
        s = equilibria(p);
        bool positive = false;
        for (const auto& e : s.points) {
            CHECK(residual(e) <= 1e-12);
            positive = positive || e.v > 0;
        }
        CHECK(positive == gap_changes_sign(sigma));
    }
    CHECK_FALSE(gap_changes_sign(0.24));
    CHECK(gap_changes_sign(0.15));
}
