#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nlx {

/// Catalog of Bernstein functions Psi supported by the library.
///
///   Stable           u^{a/2}
///   Relativistic     (u + m^{2/a})^{a/2} - m
///   SumOfStables     u^{a/2} + u^{b/2}
///   GeometricStable  log(1 + u^{a/2})
///   LogWeighted      u^{a/2} log(1+u)^{b/2}
///   LogDamped        u^{a/2} log(1+u)^{-b/2}
///   Linear           u
///
/// Every kind additionally carries a drift term `drift * u`.
enum class BernsteinKind {
    Stable,
    Relativistic,
    SumOfStables,
    GeometricStable,
    LogWeighted,
    LogDamped,
    Linear,
};

std::string_view to_string(BernsteinKind kind);
BernsteinKind bernstein_kind_from_string(std::string_view name);

struct BernsteinSpec {
    BernsteinKind kind = BernsteinKind::Linear;
    double alpha = 2.0;
    double beta = 0.0;
    double m = 0.0;
    double drift = 0.0;

    static BernsteinSpec linear() { return {}; }
    static BernsteinSpec stable(double alpha) { return {BernsteinKind::Stable, alpha}; }
    static BernsteinSpec relativistic(double alpha, double m) {
        return {BernsteinKind::Relativistic, alpha, 0.0, m};
    }
    static BernsteinSpec sum_of_stables(double alpha, double beta) {
        return {BernsteinKind::SumOfStables, alpha, beta};
    }
    static BernsteinSpec geometric_stable(double alpha) {
        return {BernsteinKind::GeometricStable, alpha};
    }
    static BernsteinSpec log_weighted(double alpha, double beta) {
        return {BernsteinKind::LogWeighted, alpha, beta};
    }
    static BernsteinSpec log_damped(double alpha, double beta) {
        return {BernsteinKind::LogDamped, alpha, beta};
    }

    bool operator==(const BernsteinSpec&) const = default;
};

/// Throws ParameterDomainError when the parameters leave the catalog ranges.
void validate(const BernsteinSpec& spec);

/// Short human-readable label, e.g. "stable(alpha=1)".
std::string describe(const BernsteinSpec& spec);

/// Psi(u) for u >= 0, including the drift term. Psi(0) = 0.
double eval_psi(const BernsteinSpec& spec, double u);

/// True when Psi is strictly increasing on (0, inf). Holds for every valid catalog entry.
bool strictly_increasing(const BernsteinSpec& spec);

/// Psi^{-1}(v) by bracketed bisection with exponential bracket growth.
///
/// Converges to |Psi(u) - v| <= rtol * max(v, atol) with rtol = 1e-10, atol = 1e-14
/// within 200 iterations. Throws RangeError when the preimage exceeds the double range
/// and NumericalError on non-convergence.
double invert_psi(const BernsteinSpec& spec, double v);

struct InversionTolerances {
    double rtol = 1e-10;
    double atol = 1e-14;
    int max_iterations = 200;
};

double invert_psi(const BernsteinSpec& spec, double v, const InversionTolerances& tol);

/// Exponent mu of the weak local scaling property as stated for the catalog entry,
/// or nullopt when the catalog gives none (GeometricStable grows only logarithmically).
std::optional<double> wlsc_exponent(const BernsteinSpec& spec);

/// Exponent a0 with Psi(u) ~ c u^{a0} as u -> 0.
double small_argument_exponent(const BernsteinSpec& spec);

/// Chung-Fuchs criterion for the subordinate Brownian motion in R^d:
/// recurrent iff the integral of xi^{d-1} / Psi(xi^2) diverges at 0, i.e. iff 2*a0 >= d.
bool is_recurrent(const BernsteinSpec& spec, int dimension);

struct ScalingDiagnostics {
    double mu = 0.0;         ///< catalog exponent, or the empirical local exponent when none is stated
    bool mu_stated = true;   ///< false when mu was estimated from the grid
    double c_lower = 1.0;    ///< grid infimum of Psi(gamma u) / (gamma^mu Psi(u)), gamma >= 1
    bool hw_passed = false;  ///< Psi(u^2)/log(u) increasing on the grid tail (no violation observed)
    std::vector<std::pair<double, double>> ratio_sup_curve;  ///< (s, sup_gamma Psi(s gamma)/Psi(gamma))
    bool degenerate = false;
    std::string note;
};

/// Finite-grid diagnostics of the scaling assumptions. Never throws for a valid spec;
/// degenerate input is flagged in the result.
ScalingDiagnostics scaling_diagnostics(const BernsteinSpec& spec, std::span<const double> u_grid,
                                       std::span<const double> gamma_grid,
                                       std::span<const double> s_grid);

/// n logarithmically spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct ThetaResult {
    double theta = 0.0;
    double kappa_star = 0.0;
    double f_minus_one = 0.0;
};

/// P(N(0,2) <= -1) = erfc(1/2)/2.
double gaussian_var2_cdf_at_minus_one();

/// theta_kappa = -(1/kappa) log(1 - F(-1)(1 - e^{1-kappa})) for kappa > 1.
double theta_kappa(double kappa);

/// The universal constant: maximum of theta_kappa over kappa > 1, located by a coarse
/// scan over [scan_lo, scan_hi] followed by golden-section refinement.
ThetaResult theta_constant(double scan_lo = 1.0, double scan_hi = 40.0);

/// Largest admissible argument for mittag_leffler at a given eta.
double mittag_leffler_cap(double eta);

/// M_eta(x) = sum_k x^k / Gamma(1 + eta k), eta in (0, 1], 0 <= x <= mittag_leffler_cap(eta).
double mittag_leffler(double eta, double x);

/// Empirical constant m_eta = max over the grid of M_eta(x) e^{-x^{1/eta}}.
double mittag_leffler_bound_constant(double eta, std::span<const double> x_grid);

}  // namespace nlx
