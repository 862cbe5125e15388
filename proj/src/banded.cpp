#include "kppsh/banded.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

extern "C" {
void dgbtrf_(const int* m, const int* n, const int* kl, const int* ku, double* ab, const int* ldab, int* ipiv,
             int* info);
void dgbtrs_(const char* trans, const int* n, const int* kl, const int* ku, const int* nrhs, const double* ab,
             const int* ldab, const int* ipiv, double* b, const int* ldb, int* info);
}

namespace kppsh {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<size_t>(ldab_) * n, 0.0) {}

void BandedMatrix::set(int i, int j, double v) {
    if (factored_) throw std::logic_error("BandedMatrix: modified after factorization");
    if (j - i > ku_ || i - j > kl_) throw std::out_of_range("BandedMatrix: entry outside band");
    ab_[static_cast<size_t>(j) * ldab_ + kl_ + ku_ + i - j] = v;
}

void BandedMatrix::add(int i, int j, double v) { set(i, j, get(i, j) + v); }

double BandedMatrix::get(int i, int j) const {
    if (j - i > ku_ || i - j > kl_) return 0.0;
    return ab_[static_cast<size_t>(j) * ldab_ + kl_ + ku_ + i - j];
}

void BandedMatrix::multiply(const double* x, double* y) const {
    for (int i = 0; i < n_; ++i) {
        double s = 0;
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) s += get(i, j) * x[j];
        y[i] = s;
    }
}

void BandedMatrix::factorize() {
    ipiv_.assign(static_cast<size_t>(n_), 0);
    int info = 0;
    dgbtrf_(&n_, &n_, &kl_, &ku_, ab_.data(), &ldab_, ipiv_.data(), &info);
    if (info != 0) throw std::runtime_error("BandedMatrix: factorization failed, info " + std::to_string(info));
    factored_ = true;
}

void BandedMatrix::solve(double* rhs) const {
    if (!factored_) throw std::logic_error("BandedMatrix: solve before factorize");
    const char trans = 'N';
    const int nrhs = 1;
    int info = 0;
    dgbtrs_(&trans, &n_, &kl_, &ku_, &nrhs, ab_.data(), &ldab_, ipiv_.data(), rhs, &n_, &info);
    if (info != 0) throw std::runtime_error("BandedMatrix: solve failed");
}

}  // namespace kppsh
