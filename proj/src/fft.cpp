#include "kppsh/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace kppsh {

namespace {

// Plans are created once per (size, direction) and executed on private aligned buffers,
// which keeps execution thread-safe.
std::mutex plan_mutex;
std::map<std::pair<int, int>, fftw_plan> plans;

fftw_plan get_plan(int n, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    fftw_complex* a = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_complex* b = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw std::runtime_error("fft: plan creation failed");
    plans.emplace(key, p);
    return p;
}

std::vector<cplx> run(const std::vector<cplx>& x, int sign) {
    const int n = static_cast<int>(x.size());
    if (n == 0) return {};
    fftw_plan p = get_plan(n, sign);
    fftw_complex* in = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(n));
    std::memcpy(in, x.data(), sizeof(fftw_complex) * n);
    fftw_execute_dft(p, in, out);
    std::vector<cplx> y(static_cast<size_t>(n));
    std::memcpy(static_cast<void*>(y.data()), out, sizeof(fftw_complex) * n);
    fftw_free(in);
    fftw_free(out);
    return y;
}

}  // namespace

std::vector<cplx> fft_forward(const std::vector<cplx>& x) { return run(x, FFTW_FORWARD); }

std::vector<cplx> fft_forward(const std::vector<double>& x) {
    return run(std::vector<cplx>(x.begin(), x.end()), FFTW_FORWARD);
}

std::vector<cplx> fft_backward(const std::vector<cplx>& X) {
    auto y = run(X, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(X.size());
    for (auto& v : y) v *= s;
    return y;
}

std::vector<double> fft_backward_real(const std::vector<cplx>& X) {
    const auto y = fft_backward(X);
    std::vector<double> r(y.size());
    for (size_t i = 0; i < y.size(); ++i) r[i] = y[i].real();
    return r;
}

std::vector<double> fft_wavenumbers(int n, double length) {
    std::vector<double> k(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const int m = j <= n / 2 ? j : j - n;
        k[j] = 2.0 * std::numbers::pi * m / length;
    }
    if (n % 2 == 0) k[n / 2] = std::abs(k[n / 2]);
    return k;
}

std::vector<cplx> fourier_resample(const std::vector<cplx>& x, int m) {
    const int n = static_cast<int>(x.size());
    if (m == n) return x;
    const auto X = fft_forward(x);
    std::vector<cplx> Y(static_cast<size_t>(m), cplx(0.0));
    const int half = std::min(n, m) / 2;
    for (int k = 0; k < half; ++k) Y[k] = X[k];
    for (int k = 1; k < half; ++k) Y[m - k] = X[n - k];
    // Nyquist bin of the shorter transform is split evenly between +/- frequencies.
    if (std::min(n, m) % 2 == 0) {
        const cplx ny = n < m ? X[half] : X[half] + X[n - half];
        if (n < m) {
            Y[half] += 0.5 * ny;
            Y[m - half] += 0.5 * ny;
        } else {
            Y[half] = ny;
        }
    } else {
        Y[half] = X[half];
        Y[m - half] = X[n - half];
    }
    const double s = static_cast<double>(m) / n;
    for (auto& v : Y) v *= s;
    return fft_backward(Y);
}

}  // namespace kppsh
