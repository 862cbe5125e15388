#pragma once

#include <vector>

namespace kppsh {

// Square banded matrix with kl sub- and ku super-diagonals, LU-factored with partial pivoting (LAPACK gbtrf).
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    void set(int i, int j, double v);
    void add(int i, int j, double v);
    double get(int i, int j) const;
    // y = A x (before factorization)
    void multiply(const double* x, double* y) const;

    void factorize();
    // Solves in place; requires factorize().
    void solve(double* rhs) const;
    bool factored() const { return factored_; }

private:
    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
    bool factored_ = false;
};

}  // namespace kppsh
