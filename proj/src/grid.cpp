#include "kppsh/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace kppsh {

std::string to_string(Frame f) { return f == Frame::lab ? "lab" : "comoving"; }

Grid1D Grid1D::uniform(double x_min, double x_max, int n, Frame frame) {
    if (n < 2 || !(x_max > x_min)) throw std::invalid_argument("Grid1D: need n >= 2 and x_max > x_min");
    return Grid1D{x_min, x_max, n, frame, false};
}

Grid1D Grid1D::uniform_dx(double x_min, double x_max, double dx, Frame frame) {
    const int n = static_cast<int>(std::lround((x_max - x_min) / dx)) + 1;
    return uniform(x_min, x_min + (n - 1) * dx, n, frame);
}

Grid1D Grid1D::periodic_grid(double x_min, double length, int n, Frame frame) {
    if (n < 2 || !(length > 0)) throw std::invalid_argument("Grid1D: bad periodic grid");
    return Grid1D{x_min, x_min + length, n, frame, true};
}

std::vector<double> Grid1D::points() const {
    std::vector<double> x(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) x[i] = this->x(i);
    return x;
}

int Grid1D::index_of(double xv) const {
    const int i = static_cast<int>(std::lround((xv - x_min) / dx()));
    return std::max(0, std::min(n - 1, i));
}

bool Grid1D::same_as(const Grid1D& o) const {
    return n == o.n && frame == o.frame && periodic == o.periodic && std::abs(x_min - o.x_min) < 1e-12 &&
           std::abs(x_max - o.x_max) < 1e-12;
}

Field1D::Field1D(Grid1D g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n) throw std::invalid_argument("Field1D: size mismatch");
}

Field1D::Field1D(Grid1D g, double fill) : grid(g), values(static_cast<size_t>(g.n), fill) {}

}  // namespace kppsh
