#pragma once

#include <complex>
#include <vector>

namespace kppsh {

using cplx = std::complex<double>;

// Unnormalized forward DFT (exponent -i).
std::vector<cplx> fft_forward(const std::vector<cplx>& x);
std::vector<cplx> fft_forward(const std::vector<double>& x);
// Inverse DFT including the 1/n factor.
std::vector<cplx> fft_backward(const std::vector<cplx>& X);
std::vector<double> fft_backward_real(const std::vector<cplx>& X);

// Angular wavenumbers 2 pi k / L in FFT ordering.
std::vector<double> fft_wavenumbers(int n, double length);

// Trigonometric interpolation of periodic samples onto m equispaced points of the same period.
std::vector<cplx> fourier_resample(const std::vector<cplx>& x, int m);

}  // namespace kppsh
