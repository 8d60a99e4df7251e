#include "nlx/bernstein.hpp"

#include "nlx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace nlx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_open(double x, double lo, double hi) { return x > lo && x < hi; }
bool in_half_open(double x, double lo, double hi) { return x > lo && x <= hi; }

[[noreturn]] void bad_param(const BernsteinSpec& spec, std::string_view what) {
    throw ParameterDomainError(fmt::format("{}: {}", to_string(spec.kind), what));
}

// Catalog part of Psi without drift.
double catalog_value(const BernsteinSpec& s, double u) {
    const double half_alpha = 0.5 * s.alpha;
    switch (s.kind) {
    case BernsteinKind::Linear:
        return u;
    case BernsteinKind::Stable:
        return std::pow(u, half_alpha);
    case BernsteinKind::Relativistic: {
        if (s.m == 0.0) return std::pow(u, half_alpha);
        const double shift = std::pow(s.m, 2.0 / s.alpha);
        // (u + shift)^{a/2} - m without cancellation at small u
        return s.m * std::expm1(half_alpha * std::log1p(u / shift));
    }
    case BernsteinKind::SumOfStables:
        return std::pow(u, half_alpha) + std::pow(u, 0.5 * s.beta);
    case BernsteinKind::GeometricStable:
        return std::log1p(std::pow(u, half_alpha));
    case BernsteinKind::LogWeighted:
        return std::pow(u, half_alpha) * std::pow(std::log1p(u), 0.5 * s.beta);
    case BernsteinKind::LogDamped:
        if (s.beta == 0.0) return std::pow(u, half_alpha);
        return std::pow(u, half_alpha) * std::pow(std::log1p(u), -0.5 * s.beta);
    }
    return 0.0;
}

}  // namespace

std::string_view to_string(BernsteinKind kind) {
    switch (kind) {
    case BernsteinKind::Stable: return "stable";
    case BernsteinKind::Relativistic: return "relativistic";
    case BernsteinKind::SumOfStables: return "sum_of_stables";
    case BernsteinKind::GeometricStable: return "geometric_stable";
    case BernsteinKind::LogWeighted: return "log_weighted";
    case BernsteinKind::LogDamped: return "log_damped";
    case BernsteinKind::Linear: return "linear";
    }
    return "unknown";
}

BernsteinKind bernstein_kind_from_string(std::string_view name) {
    for (auto k : {BernsteinKind::Stable, BernsteinKind::Relativistic, BernsteinKind::SumOfStables,
                   BernsteinKind::GeometricStable, BernsteinKind::LogWeighted,
                   BernsteinKind::LogDamped, BernsteinKind::Linear}) {
        if (to_string(k) == name) return k;
    }
    throw ParameterDomainError(fmt::format("unknown Bernstein kind '{}'", name));
}

void validate(const BernsteinSpec& s) {
    if (!std::isfinite(s.drift) || s.drift < 0.0) bad_param(s, "drift must be finite and >= 0");
    switch (s.kind) {
    case BernsteinKind::Linear:
        return;
    case BernsteinKind::Stable:
    case BernsteinKind::GeometricStable:
        if (!in_half_open(s.alpha, 0.0, 2.0)) bad_param(s, "alpha must lie in (0, 2]");
        return;
    case BernsteinKind::Relativistic:
        if (!in_open(s.alpha, 0.0, 2.0)) bad_param(s, "alpha must lie in (0, 2)");
        if (!std::isfinite(s.m) || s.m < 0.0) bad_param(s, "mass m must be finite and >= 0");
        return;
    case BernsteinKind::SumOfStables:
        if (!in_half_open(s.alpha, 0.0, 2.0)) bad_param(s, "alpha must lie in (0, 2]");
        if (!in_half_open(s.beta, 0.0, 2.0)) bad_param(s, "beta must lie in (0, 2]");
        return;
    case BernsteinKind::LogWeighted:
        if (!in_open(s.alpha, 0.0, 2.0)) bad_param(s, "alpha must lie in (0, 2)");
        if (!in_open(s.beta, 0.0, 2.0 - s.alpha)) bad_param(s, "beta must lie in (0, 2 - alpha)");
        return;
    case BernsteinKind::LogDamped:
        if (!in_half_open(s.alpha, 0.0, 2.0)) bad_param(s, "alpha must lie in (0, 2]");
        if (!(s.beta >= 0.0 && s.beta < s.alpha)) bad_param(s, "beta must lie in [0, alpha)");
        return;
    }
}

std::string describe(const BernsteinSpec& s) {
    std::string base;
    switch (s.kind) {
    case BernsteinKind::Linear: base = "linear"; break;
    case BernsteinKind::Stable:
    case BernsteinKind::GeometricStable:
        base = fmt::format("{}(alpha={})", to_string(s.kind), s.alpha);
        break;
    case BernsteinKind::Relativistic:
        base = fmt::format("relativistic(alpha={}, m={})", s.alpha, s.m);
        break;
    case BernsteinKind::SumOfStables:
    case BernsteinKind::LogWeighted:
    case BernsteinKind::LogDamped:
        base = fmt::format("{}(alpha={}, beta={})", to_string(s.kind), s.alpha, s.beta);
        break;
    }
    if (s.drift != 0.0) base += fmt::format("+{}u", s.drift);
    return base;
}

double eval_psi(const BernsteinSpec& spec, double u) {
    validate(spec);
    if (std::isnan(u) || u < 0.0) {
        throw ParameterDomainError(fmt::format("eval_psi: argument must be >= 0, got {}", u));
    }
    if (u == 0.0) return 0.0;
    return catalog_value(spec, u) + spec.drift * u;
}

bool strictly_increasing(const BernsteinSpec& spec) {
    validate(spec);
    return true;
}

double invert_psi(const BernsteinSpec& spec, double v) { return invert_psi(spec, v, {}); }

double invert_psi(const BernsteinSpec& spec, double v, const InversionTolerances& tol) {
    validate(spec);
    if (std::isnan(v) || v < 0.0) {
        throw ParameterDomainError(fmt::format("invert_psi: value must be >= 0, got {}", v));
    }
    if (v == 0.0) return 0.0;
    const double target_tol = tol.rtol * std::max(v, tol.atol);
    auto psi = [&](double u) { return catalog_value(spec, u) + spec.drift * u; };

    const double big = std::numeric_limits<double>::max();
    if (psi(big) < v) {
        throw RangeError(fmt::format("invert_psi: Psi^-1({}) exceeds the double range for {}", v,
                                     describe(spec)));
    }
    double hi = 1.0;
    while (psi(hi) < v) hi = (hi > big / 2.0) ? big : hi * 2.0;
    double lo = hi;
    while (psi(lo) >= v) {
        lo *= 0.5;
        if (lo < std::numeric_limits<double>::min()) return 0.0;
    }
    // invariant: psi(lo) < v <= psi(hi)
    for (int it = 0; it < tol.max_iterations; ++it) {
        const double mid = (hi / lo > 4.0) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        const double f = psi(mid);
        if (std::abs(f - v) <= target_tol) return mid;
        if (f < v) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            const double best = std::abs(psi(lo) - v) < std::abs(psi(hi) - v) ? lo : hi;
            // Psi too steep to hit the value tolerance at double resolution in u.
            return best;
        }
    }
    throw NumericalError(fmt::format("invert_psi: no convergence after {} iterations (v={}, {})",
                                     tol.max_iterations, v, describe(spec)));
}

std::optional<double> wlsc_exponent(const BernsteinSpec& s) {
    validate(s);
    double mu = 0.0;
    switch (s.kind) {
    case BernsteinKind::Linear: mu = 1.0; break;
    case BernsteinKind::Stable:
    case BernsteinKind::Relativistic:
    case BernsteinKind::LogWeighted: mu = 0.5 * s.alpha; break;
    case BernsteinKind::SumOfStables: mu = 0.5 * std::min(s.alpha, s.beta); break;
    case BernsteinKind::LogDamped: mu = 0.5 * (s.alpha - s.beta); break;
    case BernsteinKind::GeometricStable:
        if (s.drift > 0.0) return 1.0;
        return std::nullopt;
    }
    // A drift adds u^1, which dominates at large u but the lower scaling still holds with mu.
    return mu;
}

double small_argument_exponent(const BernsteinSpec& s) {
    validate(s);
    double a0 = 1.0;
    switch (s.kind) {
    case BernsteinKind::Linear: a0 = 1.0; break;
    case BernsteinKind::Stable:
    case BernsteinKind::GeometricStable: a0 = 0.5 * s.alpha; break;
    case BernsteinKind::Relativistic: a0 = (s.m > 0.0) ? 1.0 : 0.5 * s.alpha; break;
    case BernsteinKind::SumOfStables: a0 = 0.5 * std::min(s.alpha, s.beta); break;
    case BernsteinKind::LogWeighted: a0 = 0.5 * (s.alpha + s.beta); break;
    case BernsteinKind::LogDamped: a0 = 0.5 * (s.alpha - s.beta); break;
    }
    if (s.drift > 0.0) a0 = std::min(a0, 1.0);
    return a0;
}

bool is_recurrent(const BernsteinSpec& spec, int dimension) {
    return 2.0 * small_argument_exponent(spec) >= static_cast<double>(dimension);
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) {
        throw ParameterDomainError("log_grid: need 0 < lo <= hi and n >= 1");
    }
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

ScalingDiagnostics scaling_diagnostics(const BernsteinSpec& spec, std::span<const double> u_grid,
                                       std::span<const double> gamma_grid,
                                       std::span<const double> s_grid) {
    validate(spec);
    ScalingDiagnostics out;
    auto positive = [](std::span<const double> g) {
        return !g.empty() && std::all_of(g.begin(), g.end(),
                                         [](double x) { return std::isfinite(x) && x > 0.0; });
    };
    if (!positive(u_grid) || !positive(gamma_grid) || !positive(s_grid)) {
        out.degenerate = true;
        out.note = "grids must be nonempty, finite and strictly positive";
        return out;
    }
    auto psi = [&](double u) { return eval_psi(spec, u); };

    if (auto mu = wlsc_exponent(spec)) {
        out.mu = *mu;
    } else {
        // Empirical local exponent: the largest mu with Psi(gamma u) >= gamma^mu Psi(u) on the grid.
        double best = kInf;
        for (double u : u_grid) {
            for (double g : gamma_grid) {
                if (g <= 1.0) continue;
                best = std::min(best, std::log(psi(g * u) / psi(u)) / std::log(g));
            }
        }
        out.mu = std::isfinite(best) ? std::max(best, 0.0) : 0.0;
        out.mu_stated = false;
        out.note = "no catalog WLSC exponent; mu is the grid-local exponent and tends to 0 as the grid grows";
        if (out.mu <= 0.0) out.degenerate = true;
    }

    double c_lower = 1.0;
    for (double u : u_grid) {
        for (double g : gamma_grid) {
            if (g < 1.0) continue;
            c_lower = std::min(c_lower, psi(g * u) / (std::pow(g, out.mu) * psi(u)));
        }
    }
    out.c_lower = c_lower;

    // Hartman-Wintner: Psi(u^2)/log(u) must keep growing on the tail of the grid.
    std::vector<double> tail;
    for (double u : u_grid) {
        if (u > std::exp(1.0)) tail.push_back(u);
    }
    std::sort(tail.begin(), tail.end());
    tail.erase(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2));
    if (tail.size() >= 3) {
        bool increasing = true;
        double prev = -kInf;
        for (double u : tail) {
            const double r = psi(u * u) / std::log(u);
            if (!(r > prev)) increasing = false;
            prev = r;
        }
        out.hw_passed = increasing;
    } else {
        out.hw_passed = false;
        if (!out.note.empty()) out.note += "; ";
        out.note += "u_grid tail above e too short for the Hartman-Wintner scan";
    }

    for (double s : s_grid) {
        double sup = 0.0;
        for (double g : gamma_grid) sup = std::max(sup, psi(s * g) / psi(g));
        out.ratio_sup_curve.emplace_back(s, sup);
    }
    return out;
}

double gaussian_var2_cdf_at_minus_one() { return 0.5 * std::erfc(0.5); }

double theta_kappa(double kappa) {
    if (!(kappa > 1.0)) throw ParameterDomainError("theta_kappa: kappa must exceed 1");
    const double f = gaussian_var2_cdf_at_minus_one();
    return -std::log1p(-f * (-std::expm1(1.0 - kappa))) / kappa;
}

ThetaResult theta_constant(double scan_lo, double scan_hi) {
    const double lo = std::max(scan_lo, 1.0 + 1e-9);
    if (!(scan_hi > lo)) throw ParameterDomainError("theta_constant: empty scan bracket");
    constexpr int kScan = 400;
    const auto grid = log_grid(lo, scan_hi, kScan);
    int best = 0;
    for (int i = 1; i < kScan; ++i) {
        if (theta_kappa(grid[static_cast<std::size_t>(i)]) >
            theta_kappa(grid[static_cast<std::size_t>(best)]))
            best = i;
    }
    double a = grid[static_cast<std::size_t>(std::max(best - 1, 0))];
    double b = grid[static_cast<std::size_t>(std::min(best + 1, kScan - 1))];

    // golden-section search for the maximum
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = theta_kappa(c);
    double fd = theta_kappa(d);
    while (b - a > 1e-12 * (1.0 + std::abs(a))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = theta_kappa(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = theta_kappa(d);
        }
    }
    ThetaResult r;
    r.kappa_star = 0.5 * (a + b);
    r.theta = theta_kappa(r.kappa_star);
    r.f_minus_one = gaussian_var2_cdf_at_minus_one();
    return r;
}

double mittag_leffler_cap(double eta) {
    if (!in_half_open(eta, 0.0, 1.0)) throw ParameterDomainError("mittag_leffler: eta must lie in (0, 1]");
    // M_eta(x) grows like e^{x^{1/eta}}; keep that below ~e^690.
    return std::min(30.0, std::pow(690.0, eta));
}

double mittag_leffler(double eta, double x) {
    const double cap = mittag_leffler_cap(eta);
    if (std::isnan(x) || x < 0.0) throw ParameterDomainError("mittag_leffler: x must be >= 0");
    if (x > cap) {
        throw RangeError(fmt::format("mittag_leffler: x={} exceeds the admissible cap {} for eta={}",
                                     x, cap, eta));
    }
    if (x == 0.0) return 1.0;
    const double log_x = std::log(x);
    // Terms peak near k ~ x^{1/eta}/eta; sum until past the peak and negligible.
    const double peak = std::pow(x, 1.0 / eta) / eta;
    double sum = 0.0;
    double comp = 0.0;  // Kahan compensation
    for (int k = 0; k < 1'000'000; ++k) {
        const double term = std::exp(k * log_x - std::lgamma(1.0 + eta * k));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (k > peak + 2 && term < 1e-17 * sum) return sum;
    }
    throw NumericalError("mittag_leffler: series did not converge");
}

double mittag_leffler_bound_constant(double eta, std::span<const double> x_grid) {
    double m = 0.0;
    for (double x : x_grid) {
        m = std::max(m, mittag_leffler(eta, x) * std::exp(-std::pow(x, 1.0 / eta)));
    }
    return m;
}

}  // namespace nlx
