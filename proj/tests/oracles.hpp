#pragma once

// Independent reference computations used only by the tests. Nothing here calls into the
// library routine it is meant to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// P(N(0, 2) <= -1) by quadrature of the density exp(-x^2/4)/sqrt(4 pi).
inline double gaussian_var2_tail() {
    const auto density = [](double x) { return std::exp(-x * x / 4.0) / std::sqrt(4.0 * std::numbers::pi); };
    return simpson(density, -60.0, -1.0, 200000);
}

/// max over a fine kappa grid of -(1/kappa) log(1 - F (1 - e^{1-kappa})); returns {theta, kappa}.
inline std::pair<double, double> theta_by_scan(double f, double lo = 1.0001, double hi = 12.0, int n = 400000) {
    double best = -1.0, arg = lo;
    for (int i = 0; i <= n; ++i) {
        const double k = lo + (hi - lo) * i / n;
        const double v = -std::log(1.0 - f * (1.0 - std::exp(1.0 - k))) / k;
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    return {best, arg};
}

/// Mittag-Leffler series summed term by term in long double.
inline double mittag_leffler_series(double eta, double x, int terms = 400) {
    long double s = 0.0L;
    for (int k = 0; k < terms; ++k) {
        const long double lt = k * std::log(static_cast<long double>(x)) - std::lgamma(1.0L + eta * k);
        if (x == 0.0 && k > 0) break;
        s += (x == 0.0) ? 1.0L : std::exp(lt);
    }
    return static_cast<double>(s);
}

/// Mean exit time of the symmetric alpha-stable process with E exp(i xi X_t) = exp(-t |xi|^alpha)
/// from the ball B(0, r) in R^d started at distance |x| from the center (Getoor). The process
/// generated by the Laplacian itself (variance 2t per coordinate) is alpha = 2.
inline double getoor_mean_exit_time(int d, double alpha, double r, double x_norm) {
    return std::tgamma(0.5 * d) * std::pow(r * r - x_norm * x_norm, 0.5 * alpha) /
           (std::pow(2.0, alpha) * std::tgamma(1.0 + 0.5 * alpha) * std::tgamma(0.5 * (d + alpha)));
}

/// Second moment of the Brownian exit time from (-1, 1) started at 0, generator d^2/dx^2:
/// u'' = -2 v with v = (1 - x^2)/2 gives u = (5 - 6x^2 + x^4)/12 at x = 0.
inline double linear_interval_second_moment_at_zero() { return 5.0 / 12.0; }

/// Lattice kernel c(k) = (1/2pi) int_{-pi}^{pi} psi((4/h^2) sin^2(t/2)) cos(k t) dt of the
/// multiplier on the infinite lattice h Z, by Simpson quadrature.
inline double lattice_kernel_1d(const std::function<double(double)>& psi, double h, int k, int panels = 400000) {
    const auto f = [&](double t) {
        const double s = std::sin(0.5 * t);
        return psi(4.0 / (h * h) * s * s) * std::cos(k * t);
    };
    return simpson(f, 0.0, std::numbers::pi, panels) / std::numbers::pi;
}

/// Normalizing constant of the 1-D fractional Laplacian singular integral,
/// (-Delta)^{a/2} f(x) = C p.v. int (f(x) - f(y)) / |x - y|^{1 + a} dy.
inline double fractional_laplacian_constant_1d(double alpha) {
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (1.0 + alpha)) /
           (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - 0.5 * alpha));
}

/// Eigenvalues of the second-difference Dirichlet Laplacian on (a, a + L) with spacing h.
inline double fd_dirichlet_eigenvalue(double length, double h, int k) {
    const double s = std::sin(k * std::numbers::pi * h / (2.0 * length));
    return 4.0 / (h * h) * s * s;
}

/// First zero of J_0 by bisection.
inline double bessel_j0_first_zero() {
    double lo = 2.0, hi = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::cyl_bessel_j(0.0, mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Small deterministic generator for hand-rolled property tests (splitmix64).
class Gen {
public:
    explicit Gen(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform(double a, double b) { return a + (b - a) * (static_cast<double>(next() >> 11) * 0x1.0p-53); }
    int integer(int a, int b) { return a + static_cast<int>(next() % static_cast<std::uint64_t>(b - a + 1)); }

private:
    std::uint64_t s_;
};

}  // namespace oracle
