#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace kppsh {

// Dormand-Prince 5(4) step with error estimate, for small fixed-size systems.
template <size_t N>
struct DoPri {
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;

    static State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
        State r = y;
        for (const auto& [c, k] : terms)
            for (size_t i = 0; i < N; ++i) r[i] += h * c * (*k)[i];
        return r;
    }

    // Advances y from x by h; returns the 5th-order solution and writes the error norm.
    static State step(const Rhs& f, double x, const State& y, double h, double rtol, double atol, double& err) {
        const State k1 = f(x, y);
        const State k2 = f(x + h / 5, axpy(y, h, {{1.0 / 5, &k1}}));
        const State k3 = f(x + 3 * h / 10, axpy(y, h, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
        const State k4 = f(x + 4 * h / 5, axpy(y, h, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
        const State k5 = f(x + 8 * h / 9, axpy(y, h, {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2},
                                                      {64448.0 / 6561, &k3}, {-212.0 / 729, &k4}}));
        const State k6 = f(x + h, axpy(y, h, {{9017.0 / 3168, &k1}, {-355.0 / 33, &k2}, {46732.0 / 5247, &k3},
                                              {49.0 / 176, &k4}, {-5103.0 / 18656, &k5}}));
        const State y5 = axpy(y, h, {{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4},
                                     {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}});
        const State k7 = f(x + h, y5);
        const State y4 = axpy(y, h, {{5179.0 / 57600, &k1}, {7571.0 / 16695, &k3}, {393.0 / 640, &k4},
                                     {-92097.0 / 339200, &k5}, {187.0 / 2100, &k6}, {1.0 / 40, &k7}});
        err = 0;
        for (size_t i = 0; i < N; ++i) {
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
        }
        return y5;
    }

    // Integrates from x0 to x1 adaptively; returns y(x1).
    static State integrate(const Rhs& f, double x0, double x1, State y, double rtol, double atol,
                           double h_init = 1e-2) {
        double x = x0;
        double h = std::copysign(std::min(std::abs(h_init), std::abs(x1 - x0)), x1 - x0);
        int guard = 0;
        while ((x1 - x) * h > 0) {
            if (std::abs(h) > std::abs(x1 - x)) h = x1 - x;
            double err = 0;
            const State yn = step(f, x, y, h, rtol, atol, err);
            if (err <= 1.0) {
                x += h;
                y = yn;
            }
            const double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::min(5.0, std::max(0.2, fac));
            if (++guard > 10000000) throw std::runtime_error("DoPri: too many steps");
        }
        return y;
    }
};

}  // namespace kppsh
