#include "kppsh/evans.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "kppsh/weights.hpp"

namespace kppsh {

std::string to_string(EigenOp op) { return op == EigenOp::kpp ? "kpp" : "sh"; }
std::string to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

EigenContext make_eigen_context(const SystemParams& p, double theta) {
    EigenContext c;
    c.params = p;
    c.theta = theta;
    c.front = solve_front(p, -60.0, 80.0, 7001);
    return c;
}

EigenContext make_eigen_context(const SystemParams& p) { return make_eigen_context(p, select_theta(p).theta); }

namespace {

int order_of(EigenOp op) { return op == EigenOp::kpp ? 2 : 4; }

double binom(int k, int j) {
    double r = 1;
    for (int i = 1; i <= j; ++i) r = r * (k - j + i) / i;
    return r;
}

std::vector<double> unweighted(const SystemParams& p, EigenOp op, double q) {
    const double c = critical_speed(p);
    if (op == EigenOp::kpp) return {p.alpha * (1.0 - 3.0 * q * q), c, p.d};
    return {-1.0 + p.mu - p.gamma * (1.0 - q), c, -2.0, 0.0, -1.0};
}

std::vector<double> conjugate(const std::vector<double>& a, const std::array<double, 5>& r) {
    const int n = static_cast<int>(a.size()) - 1;
    std::vector<double> b(a.size(), 0.0);
    for (int j = 0; j <= n; ++j)
        for (int k = j; k <= n; ++k) b[j] += a[k] * binom(k, j) * r[k - j];
    return b;
}

WeightSpec weight_for(const EigenContext& ctx, EigenOp op) {
    return WeightSpec::make(op == EigenOp::kpp ? WeightKind::omega_kpp : WeightKind::omega_star, ctx.params,
                            ctx.theta);
}

double far_slope(const EigenContext& ctx, EigenOp op, Side side) {
    const double r = critical_speed(ctx.params) / (2.0 * ctx.params.d);
    if (side == Side::plus) return -r;
    return op == EigenOp::kpp ? 0.0 : ctx.theta;
}

// Coefficients tabulated at half steps along the integration path.
struct Path {
    double x0 = 0, hs = 0;
    int steps = 0;
    int n = 2;
    std::vector<std::array<double, 5>> b;  // 2 * steps + 1 entries
};

Path make_path(const EigenContext& ctx, EigenOp op, double x_start, double x_end, double h, const EigenOptions& o,
               Side side) {
    Path P;
    P.steps = std::max(1, static_cast<int>(std::lround(std::abs(x_end - x_start) / h)));
    P.x0 = x_start;
    P.hs = (x_end - x_start) / P.steps;
    P.n = order_of(op);
    P.b.resize(2 * P.steps + 1);
    auto pack = [](const std::vector<double>& v) {
        std::array<double, 5> a{};
        std::copy(v.begin(), v.end(), a.begin());
        return a;
    };
    const auto frozen = pack(asymptotic_coefficients(ctx, op, side, o));
    for (int k = 0; k <= 2 * P.steps; ++k)
        P.b[k] = o.freeze ? frozen : pack(operator_coefficients(ctx, op, P.x0 + 0.5 * k * P.hs, o));
    return P;
}

// Modified Gram-Schmidt; returns sum of log r_ii.
template <class Mat>
double orthonormalize(Mat& Y) {
    double ls = 0;
    for (int j = 0; j < Y.cols(); ++j) {
        for (int i = 0; i < j; ++i) Y.col(j) -= Y.col(i).dot(Y.col(j)) * Y.col(i);
        const double nrm = Y.col(j).norm();
        if (!(nrm > 0) || !std::isfinite(nrm)) throw std::runtime_error("evans: frame degenerated during integration");
        Y.col(j) /= nrm;
        ls += std::log(nrm);
    }
    return ls;
}

struct Trajectory {
    std::vector<double> x;
    std::vector<Eigen::MatrixXcd> Y;
    std::vector<double> log_scale;
};

// Y' = A(x) Y with A the companion matrix of lambda - sum_j b_j d^j.
template <int N, class Mat>
Mat apply_companion(const std::array<double, 5>& b, cplx lambda, const Mat& Y) {
    Mat out;
    for (int i = 0; i + 1 < N; ++i) out.row(i) = Y.row(i + 1);
    out.row(N - 1) = lambda * Y.row(0);
    for (int j = 0; j < N; ++j) out.row(N - 1) -= b[j] * Y.row(j);
    out.row(N - 1) /= b[N];
    return out;
}

template <int N, int M>
Trajectory integrate_fixed(const Path& P, cplx lambda, const Eigen::MatrixXcd& Y0, bool renormalize, bool keep) {
    using Mat = Eigen::Matrix<cplx, N, M>;
    Mat Y = Y0;
    Trajectory T;
    double ls = renormalize ? orthonormalize(Y) : 0.0;
    auto push = [&](int k) {
        if (!keep && k != P.steps) return;
        T.x.push_back(P.x0 + k * P.hs);
        T.Y.emplace_back(Y);
        T.log_scale.push_back(ls);
    };
    push(0);
    const double h = P.hs;
    for (int k = 0; k < P.steps; ++k) {
        const auto& b0 = P.b[2 * k];
        const auto& bm = P.b[2 * k + 1];
        const auto& b1 = P.b[2 * k + 2];
        const Mat k1 = apply_companion<N>(b0, lambda, Y);
        const Mat k2 = apply_companion<N>(bm, lambda, Mat(Y + 0.5 * h * k1));
        const Mat k3 = apply_companion<N>(bm, lambda, Mat(Y + 0.5 * h * k2));
        const Mat k4 = apply_companion<N>(b1, lambda, Mat(Y + h * k3));
        Y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (renormalize) ls += orthonormalize(Y);
        push(k + 1);
    }
    return T;
}

Trajectory integrate(const Path& P, cplx lambda, const Eigen::MatrixXcd& Y, bool renormalize, bool keep) {
    const int n = P.n, m = static_cast<int>(Y.cols());
    if (n == 2 && m == 1) return integrate_fixed<2, 1>(P, lambda, Y, renormalize, keep);
    if (n == 2 && m == 2) return integrate_fixed<2, 2>(P, lambda, Y, renormalize, keep);
    if (n == 4 && m == 1) return integrate_fixed<4, 1>(P, lambda, Y, renormalize, keep);
    if (n == 4 && m == 2) return integrate_fixed<4, 2>(P, lambda, Y, renormalize, keep);
    if (n == 4 && m == 4) return integrate_fixed<4, 4>(P, lambda, Y, renormalize, keep);
    throw std::invalid_argument("evans: unsupported system size");
}

std::vector<int> decaying_indices(const std::vector<cplx>& nus, Side side) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(nus.size()); ++i)
        if ((side == Side::plus && nus[i].real() < 0) || (side == Side::minus && nus[i].real() > 0)) idx.push_back(i);
    return idx;
}

Eigen::VectorXcd jet(cplx nu, int n) {
    Eigen::VectorXcd v(n);
    cplx p = 1.0;
    for (int i = 0; i < n; ++i) {
        v[i] = p;
        p *= nu;
    }
    return v;
}

}  // namespace

std::vector<double> operator_coefficients(const EigenContext& ctx, EigenOp op, double x, const EigenOptions& o) {
    auto a = unweighted(ctx.params, op, ctx.front.q_at(x));
    if (o.bump != 0.0) {
        const double s = 1.0 / std::cosh(x);
        a[0] += o.bump * s * s;
    }
    if (!o.weighted) return a;
    return conjugate(a, weight_ratios(weight_for(ctx, op), x));
}

std::vector<double> asymptotic_coefficients(const EigenContext& ctx, EigenOp op, Side side, const EigenOptions& o) {
    const auto a = unweighted(ctx.params, op, side == Side::plus ? 0.0 : 1.0);
    if (!o.weighted) return a;
    const double s = far_slope(ctx, op, side);
    std::array<double, 5> r{1.0, s, s * s, s * s * s, s * s * s * s};
    return conjugate(a, r);
}

std::vector<cplx> asymptotic_exponents(const EigenContext& ctx, EigenOp op, Side side, cplx lambda,
                                       const EigenOptions& o) {
    const auto b = asymptotic_coefficients(ctx, op, side, o);
    std::vector<cplx> c(b.begin(), b.end());
    c[0] -= lambda;
    auto roots = polynomial_roots(c);
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    for (size_t i = 0; i < roots.size(); ++i)
        for (size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) < 1e-6) throw std::domain_error("asymptotic_exponents: root collision");
    return roots;
}

EigenSolution asymptotic_solution(const EigenContext& ctx, EigenOp op, cplx lambda, Side side, int index,
                                  const EigenOptions& o) {
    const int n = order_of(op);
    const auto nus = asymptotic_exponents(ctx, op, side, lambda, o);
    if (index < 0 || index >= n) throw std::out_of_range("asymptotic_solution: bad root index");
    const double x_start = side == Side::plus ? o.x_far : -o.x_far;
    const Path P = make_path(ctx, op, x_start, 0.0, o.h, o, side);
    Eigen::MatrixXcd Y = jet(nus[index], n);
    const Trajectory T = integrate(P, lambda, Y, true, true);
    EigenSolution s;
    s.lambda = lambda;
    s.side = side;
    s.index = index;
    s.nu = nus[index];
    s.x = T.x;
    s.log_scale = T.log_scale;
    for (const auto& m : T.Y) s.values.push_back(m.col(0));
    return s;
}

double tail_exponent(const EigenSolution& s) {
    const size_t m = s.x.size();
    const size_t k = std::max<size_t>(3, m / 5);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < k; ++i) {
        const double x = s.x[i];
        const double y = std::log(std::abs(s.values[i][0])) + s.log_scale[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

DecayingFrame decaying_frame(const EigenContext& ctx, EigenOp op, cplx lambda, Side side, const EigenOptions& o) {
    const int n = order_of(op);
    const auto nus = asymptotic_exponents(ctx, op, side, lambda, o);
    const auto idx = decaying_indices(nus, side);
    if (static_cast<int>(idx.size()) != n / 2)
        throw std::domain_error("decaying_frame: lambda is not to the right of the asymptotic borders");
    Eigen::MatrixXcd Y(n, n / 2);
    DecayingFrame f;
    for (int j = 0; j < n / 2; ++j) {
        Y.col(j) = jet(nus[idx[j]], n);
        f.nus.push_back(nus[idx[j]]);
    }
    const double x_start = side == Side::plus ? o.x_far : -o.x_far;
    const Path P = make_path(ctx, op, x_start, 0.0, o.h, o, side);
    const Trajectory T = integrate(P, lambda, Y, true, false);
    f.Q = T.Y.back();
    f.log_scale = T.log_scale.back();
    // Normalize each solution as e^{nu x} v at the far end.
    for (const cplx nu : f.nus) {
        f.log_scale += (nu * x_start).real();
        f.phase += (nu * x_start).imag();
    }
    return f;
}

EvansSample evans_function(const EigenContext& ctx, EigenOp op, cplx lambda, const EigenOptions& o) {
    const auto fp = decaying_frame(ctx, op, lambda, Side::plus, o);
    const auto fm = decaying_frame(ctx, op, lambda, Side::minus, o);
    const int n = order_of(op);
    Eigen::MatrixXcd M(n, n);
    M << fp.Q, fm.Q;
    EvansSample s;
    s.lambda = lambda;
    s.value = M.determinant() * std::polar(1.0, fp.phase + fm.phase);
    s.log_scale = fp.log_scale + fm.log_scale;
    return s;
}

double sh_basis_determinant(const EigenContext& ctx, cplx lambda, const EigenOptions& o) {
    return std::abs(evans_function(ctx, EigenOp::sh, lambda, o).value);
}

namespace {

// One RK4 step applied to the identity: the step's propagator.
template <int N>
Eigen::Matrix<cplx, N, N> step_propagator(const Path& P, int k, cplx lambda) {
    using Mat = Eigen::Matrix<cplx, N, N>;
    const Mat Y = Mat::Identity();
    const double h = P.hs;
    const Mat k1 = apply_companion<N>(P.b[2 * k], lambda, Y);
    const Mat k2 = apply_companion<N>(P.b[2 * k + 1], lambda, Mat(Y + 0.5 * h * k1));
    const Mat k3 = apply_companion<N>(P.b[2 * k + 1], lambda, Mat(Y + 0.5 * h * k2));
    const Mat k4 = apply_companion<N>(P.b[2 * k + 2], lambda, Mat(Y + h * k3));
    return Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

double wronskian_identity_check(const EigenContext& ctx, EigenOp op, cplx lambda, double x_max,
                                const EigenOptions& o) {
    const int n = order_of(op);
    const double h = std::min(o.h, 1e-3);
    const Path P = make_path(ctx, op, 0.0, x_max, h, o, Side::plus);
    // The raw fundamental matrix is badly conditioned for large |lambda| (its columns grow at very
    // different rates), so det Phi(x) / det Phi(0) is accumulated as the product of the per-step
    // propagator determinants.
    cplx log_det = 0.0;
    double integral = 0, worst = 0;
    for (int k = 0; k < P.steps; ++k) {
        log_det += std::log(n == 2 ? step_propagator<2>(P, k, lambda).determinant()
                                   : step_propagator<4>(P, k, lambda).determinant());
        // Simpson on the step using the tabulated midpoint.
        auto g = [&](int j) { return P.b[j][n - 1] / P.b[j][n]; };
        integral += P.hs / 6.0 * (g(2 * k) + 4.0 * g(2 * k + 1) + g(2 * k + 2));
        worst = std::max(worst, std::abs(std::exp(log_det + integral) - 1.0));
    }
    return worst;
}

std::vector<cplx> slit_contour(double re_lo, double re_hi, double im_hi, double m, int n) {
    std::vector<cplx> z;
    auto seg = [&](cplx a, cplx b, int k) {
        for (int i = 0; i < k; ++i) z.push_back(a + (b - a) * (double(i) / k));
    };
    const int nk = std::max(8, n / 4);
    seg({re_hi, -im_hi}, {re_hi, im_hi}, n);
    seg({re_hi, im_hi}, {re_lo, im_hi}, n);
    if (re_lo < 0) {
        seg({re_lo, im_hi}, {re_lo, m}, n);
        seg({re_lo, m}, {0.0, m}, nk);
        for (int i = 0; i < nk; ++i) z.push_back(std::polar(m, std::numbers::pi / 2 - std::numbers::pi * i / nk));
        seg({0.0, -m}, {re_lo, -m}, nk);
        seg({re_lo, -m}, {re_lo, -im_hi}, n);
    } else {
        seg({re_lo, im_hi}, {re_lo, -im_hi}, 2 * n);
    }
    seg({re_lo, -im_hi}, {re_hi, -im_hi}, n);
    return z;
}

namespace {

std::vector<EvansSample> sample_contour(const EigenContext& ctx, const std::vector<cplx>& z, const EigenOptions& o,
                                        int workers) {
    std::vector<EvansSample> out(z.size());
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto work = [&] {
        for (size_t i = next++; i < z.size(); i = next++) {
            try {
                out[i] = evans_function(ctx, EigenOp::kpp, z[i], o);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        }
    };
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

// Total argument change divided by 2 pi, plus the largest single increment.
std::pair<double, double> winding_of(const std::vector<EvansSample>& s) {
    double total = 0, worst = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        const cplx a = s[i].value, b = s[(i + 1) % s.size()].value;
        const double d = std::arg(b / a);
        total += d;
        worst = std::max(worst, std::abs(d));
    }
    return {total / (2.0 * std::numbers::pi), worst};
}

}  // namespace

WindingResult evans_winding(const EigenContext& ctx, double re_lo, double re_hi, double im_hi, const EigenOptions& o,
                            double slit_margin, int n0, int workers) {
    WindingResult r;
    int prev = 0;
    bool have_prev = false;
    for (int n = n0; n <= 1024; n *= 2) {
        const auto z = slit_contour(re_lo, re_hi, im_hi, slit_margin, n);
        auto s = sample_contour(ctx, z, o, workers);
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& e : s) mn = std::min(mn, std::abs(e.value));
        if (mn < 1e-10) throw std::runtime_error("evans_winding: |W| nearly vanishes on the contour");
        const auto [w, worst] = winding_of(s);
        const int wi = static_cast<int>(std::lround(w));
        r.winding = wi;
        r.n_per_edge = n;
        r.min_abs = mn;
        r.samples = std::move(s);
        if (worst < std::numbers::pi / 4 && have_prev && wi == prev) break;
        prev = wi;
        have_prev = true;
    }
    // The right edge is sampled symmetrically about the real axis.
    const int n = r.n_per_edge;
    r.min_abs_right_edge = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) r.min_abs_right_edge = std::min(r.min_abs_right_edge, std::abs(r.samples[i].value));
    for (int i = 1; i < n; ++i) {
        const auto& a = r.samples[i];
        const auto& b = r.samples[n - i];
        if (std::abs(a.lambda - std::conj(b.lambda)) > 1e-12) continue;
        r.conj_asymmetry =
            std::max(r.conj_asymmetry, std::abs(a.value - std::conj(b.value)) / std::abs(a.value));
    }
    return r;
}

}  // namespace kppsh
