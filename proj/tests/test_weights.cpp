#include "doctest.h"

#include <cmath>
#include <random>

#include "kppsh/spectral.hpp"
#include "kppsh/weights.hpp"

using namespace kppsh;

namespace {

const SystemParams P{};
constexpr double kTheta = -0.2;

WeightSpec spec(WeightKind k) { return WeightSpec::make(k, P, kTheta); }

}  // namespace

TEST_CASE("weight point values") {
    CHECK(eval_weight(spec(WeightKind::omega_kpp), -2.0) == 1.0);
    CHECK(eval_weight(spec(WeightKind::omega_kpp), 2.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(eval_weight(spec(WeightKind::rho_star), 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(eval_weight(spec(WeightKind::rho_ul), 0.0) == doctest::Approx(1.0));
    CHECK(eval_weight(spec(WeightKind::rho_ul), 3.0) == doctest::Approx(0.1));
    CHECK(eval_weight(spec(WeightKind::omega_kpp).inverse(), 2.0) == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("varpi is one behind the front") {
    const WeightSpec w = spec(WeightKind::varpi);
    for (double x = -50; x <= -1; x += 0.25) CHECK(eval_weight(w, x) == 1.0);
}

TEST_CASE("omega_star tails") {
    const WeightSpec w = spec(WeightKind::omega_star);
    for (double x = -40; x <= -1; x += 0.5) CHECK(eval_weight(w, x) <= std::exp(kTheta * x) * (1 + 1e-14));
    for (double x = 1; x <= 40; x += 0.5) CHECK(eval_weight(w, x) == doctest::Approx(std::exp(-x)).epsilon(1e-13));
}

TEST_CASE("derivative ratios match finite differences") {
    const double h = 1e-3;
    for (WeightKind k : {WeightKind::omega_kpp, WeightKind::omega_sh, WeightKind::rho_star, WeightKind::varpi,
                         WeightKind::omega_star, WeightKind::rho_ul}) {
        for (bool inv : {false, true}) {
            WeightSpec w = spec(k);
            if (inv) w = w.inverse();
            for (double x : {-3.0, -0.7, 0.0, 0.4, 0.95, 2.5}) {
                auto f = [&](double y) { return eval_weight(w, y); };
                const double w0 = f(x);
                const auto r = weight_ratios(w, x);
                const double d1 = (f(x + h) - f(x - h)) / (2 * h);
                const double d2 = (f(x + h) - 2 * w0 + f(x - h)) / (h * h);
                const double d3 = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
                CHECK(r[1] * w0 == doctest::Approx(d1).epsilon(1e-5));
                CHECK(r[2] * w0 == doctest::Approx(d2).epsilon(1e-4));
                CHECK(r[3] * w0 == doctest::Approx(d3).epsilon(1e-3));
            }
        }
    }
}

TEST_CASE("seams at x = +-1 are smooth") {
    for (WeightKind k : {WeightKind::omega_kpp, WeightKind::omega_sh, WeightKind::rho_star, WeightKind::omega_star}) {
        const WeightSpec w = spec(k);
        for (double s : {-1.0, 1.0}) {
            const auto a = weight_derivs(w, s - 1e-9), b = weight_derivs(w, s + 1e-9);
            for (int j = 0; j < 3; ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-7 * std::max(1.0, std::abs(a[j])));
        }
    }
}

TEST_CASE("weighted sup norm") {
    const Grid1D g = Grid1D::uniform(-20, 20, 801);
    const WeightSpec rho = spec(WeightKind::rho_star);
    CHECK(weighted_sup_norm(Field1D(g, 0.0), rho) == 0.0);
    Field1D f(g);
    for (int i = 0; i < g.n; ++i) f[i] = 1.0 / eval_weight(rho, g.x(i));
    CHECK(weighted_sup_norm(f, rho) == doctest::Approx(1.0).epsilon(1e-14));

    const WeightSpec sh = spec(WeightKind::omega_sh);
    Field1D q(g);
    for (int i = 0; i < g.n; ++i) q[i] = eval_weight(sh, g.x(i)) * std::sin(g.x(i));
    CHECK(weighted_sup_norm(q, sh.inverse()) == doctest::Approx(1.0).epsilon(1e-3));

    Field1D lab(Grid1D::uniform(-1, 1, 11, Frame::lab));
    CHECK_THROWS_AS(weighted_sup_norm(lab, rho), std::invalid_argument);
}

TEST_CASE("uniformly local norms") {
    const Grid1D g = Grid1D::uniform(-200, 200, 8001);
    const UlNorm c = ul_sobolev_norm(Field1D(g, 1.0), 0);
    CHECK(c.value == doctest::Approx(std::sqrt(M_PI / 2)).epsilon(1e-3));
    CHECK_FALSE(c.coarse_warning);
    CHECK_THROWS(ul_sobolev_norm(Field1D(g, 1.0), 2));

    // translation invariance on a periodic grid
    const Grid1D pg = Grid1D::periodic_grid(0, 64 * M_PI, 2048);
    Field1D a(pg), b(pg);
    const int shift = 37;
    for (int i = 0; i < pg.n; ++i) {
        const double x = pg.x(i);
        a[i] = std::cos(x) + 0.5 * std::sin(x / 8);
    }
    for (int i = 0; i < pg.n; ++i) b[i] = a[(i + shift) % pg.n];
    for (int s : {0, 1}) CHECK(ul_sobolev_norm(a, s).value == doctest::Approx(ul_sobolev_norm(b, s).value).epsilon(1e-10));

    // sup bounded by the H^1_ul norm up to a fixed constant
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        Field1D r(pg);
        double c1 = U(rng), c2 = U(rng), c3 = U(rng);
        double sup = 0;
        for (int i = 0; i < pg.n; ++i) {
            const double x = pg.x(i);
            r[i] = c1 * std::cos(x) + c2 * std::sin(0.5 * x) + c3 * std::cos(0.25 * x);
            sup = std::max(sup, std::abs(r[i]));
        }
        const double n1 = ul_sobolev_norm(r, 1).value;
        CHECK(0.5 * sup <= 2.0 * n1);
        CHECK(n1 <= 3.0 * sup);
    }
}
