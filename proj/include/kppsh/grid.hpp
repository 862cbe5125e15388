#pragma once

#include <complex>
#include <string>
#include <vector>

namespace kppsh {

enum class Frame { lab, comoving };
std::string to_string(Frame f);

// Uniform grid. Non-periodic grids include both end points; periodic grids omit x_max.
struct Grid1D {
    double x_min = 0;
    double x_max = 1;
    int n = 2;
    Frame frame = Frame::comoving;
    bool periodic = false;

    static Grid1D uniform(double x_min, double x_max, int n, Frame frame = Frame::comoving);
    static Grid1D uniform_dx(double x_min, double x_max, double dx, Frame frame = Frame::comoving);
    static Grid1D periodic_grid(double x_min, double length, int n, Frame frame = Frame::lab);

    double length() const { return x_max - x_min; }
    double dx() const { return periodic ? length() / n : length() / (n - 1); }
    double x(int i) const { return x_min + i * dx(); }
    std::vector<double> points() const;
    // Index of the grid point nearest to x.
    int index_of(double x) const;
    bool same_as(const Grid1D& o) const;
};

struct Field1D {
    Grid1D grid;
    std::vector<double> values;

    Field1D() = default;
    Field1D(Grid1D g, std::vector<double> v);
    explicit Field1D(Grid1D g, double fill = 0.0);
    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }
    int size() const { return static_cast<int>(values.size()); }
};

struct ComplexField1D {
    Grid1D grid;
    std::vector<std::complex<double>> values;
};

}  // namespace kppsh
