#pragma once

#include "nlx/bernstein.hpp"
#include "nlx/domain.hpp"
#include "nlx/spectral.hpp"
#include "nlx/subordination.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nlx {

enum class ReportStatus { Pass, Fail, Skipped, Inconclusive, Diagnostic, Degenerate };

std::string_view to_string(ReportStatus s);

struct Provenance {
    std::string kind = "deterministic";  ///< "deterministic" or "monte-carlo"
    double stderr_ = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    double dt = 0.0;
    std::size_t n_per_axis = 0;
    double h = 0.0;
};

/// One inequality lhs >= rhs evaluated with a tolerance. pass <=> slack >= -tolerance.
struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    ReportStatus status = ReportStatus::Fail;
    Provenance provenance;
    std::map<std::string, double> extras;
    std::vector<std::pair<double, double>> curve;
    std::string note;
    std::string label;  ///< configuration label set by the battery runner

    /// Reports that gate an exit code: pass/fail only.
    bool counts_as_failure() const { return status == ReportStatus::Fail; }
};

/// Fills slack, pass and status (Pass/Fail) from lhs, rhs and tolerance. NaN sides fail.
BoundReport make_report(std::string name, double lhs, double rhs, double tolerance);

/// ||V^-||_inf and inf V^+ over the interior grid points.
struct PotentialStats {
    double v_minus_sup = 0.0;
    double v_plus_inf = 0.0;
    /// ||V^-|| - inf V^+: the potential's contribution to the left side of the extremum bound.
    double shift() const { return v_minus_sup - v_plus_inf; }
};

PotentialStats potential_stats(const DiscreteOperator& op);
PotentialStats potential_stats(std::span<const double> values);

/// Potential well V = -v 1_K, or a general compactly supported V given by callback.
struct WellSpec {
    enum class Shape { Indicator, General };
    ConvexDomain support;
    double depth = 1.0;
    Shape shape = Shape::Indicator;
    Potential general;

    Potential potential() const;
};

void validate(const WellSpec& w);

/// Dirichlet principal eigenvalue of -Laplacian in the unit ball: pi^2/4 for d = 1,
/// computed on the lattice (cached) for d = 2, 3.
double unit_ball_laplacian_eigenvalue(int dimension);

/// Extremum bound: ||V^-|| - inf V^+ + lambda >= theta Psi(r*^-2), where r* is the distance
/// of the |phi| maximizer to the boundary. Tolerance is theta (Psi((r* - h)^-2) - Psi(r*^-2)).
BoundReport check_extremum_bound(const EigenPair& pair, const BernsteinSpec& spec,
                                 const ConvexDomain& domain, const PotentialStats& stats,
                                 double theta, double h);

/// Faber-Krahn form: |D| Psi^{-1}((||V^-|| - inf V^+ + lambda)/theta)^{d/2} >= omega_d.
BoundReport check_faber_krahn(const EigenPair& pair, const BernsteinSpec& spec,
                              const ConvexDomain& domain, const PotentialStats& stats, double theta);

/// e^{lambda t} E^{x*}[exp(-int_0^t V) 1{tau > t}] >= 1 for each t (Monte Carlo), and the
/// integrated form E^{x*}[int_0^tau exp(-int_0^s V) ds] >= 1/lambda when lambda > 0.
/// `v_bound` bounds |V| on the domain (0 when V is empty).
std::vector<BoundReport> check_survival_lower(const EigenPair& pair, const BernsteinSpec& spec,
                                              const ConvexDomain& domain, const Potential& v,
                                              double v_bound, std::span<const double> t_grid,
                                              const PathConfig& cfg);

/// Starting points used to approximate sup_x E^x[.]: the Chebyshev center plus `extra`.
std::vector<Point> sup_candidates(const ConvexDomain& domain, std::span<const Point> extra = {});

struct SupEstimate {
    McEstimate estimate;  ///< at the maximizing candidate
    Point x;
};

/// max over candidates of E^x[tau^p], one path set per candidate with common seeds.
SupEstimate sup_exit_moment(const BernsteinSpec& spec, const ConvexDomain& domain, double p,
                            std::span<const Point> candidates, const PathConfig& cfg);

/// lambda_1 >= (Gamma(p+1) / sup_x E^x[tau^p])^{1/p} for each p, plus a report of the implied
/// constant C_3 = lambda_1 sup E[tau] (p = 1 carries the left inequality of that sandwich).
std::vector<BoundReport> check_moment_bounds(double lambda1, const BernsteinSpec& spec,
                                             const ConvexDomain& domain, std::span<const double> p_list,
                                             std::span<const Point> candidates, const PathConfig& cfg);

/// rho = sup E[tau] Psi(inrad^-2) inside [1e-3, 1e3], encoded as lhs = 3 - |log10 rho| >= 0.
/// The implied constant rho is in extras["rho"].
BoundReport check_exit_sandwich(const BernsteinSpec& spec, const ConvexDomain& domain,
                                std::span<const Point> candidates, const PathConfig& cfg);

/// Spread of rho across a battery at fixed dimension: 2 - log10(max/min) >= 0.
BoundReport check_exit_sandwich_spread(std::span<const BoundReport> sandwiches, int dimension);

/// dist(x*, boundary) >= sqrt(theta / lambda_1^B) inrad D for the classical Laplacian.
BoundReport check_hotspot(const EigenPair& pair_linear, const ConvexDomain& domain, double theta, double h);

/// V(x*) <= lambda for convex V. Convexity is spot-checked along random chords (seeded);
/// a violation throws PreconditionError.
BoundReport check_sublevel_localization(const EigenPair& pair, const Potential& v,
                                        const ConvexDomain& domain, double h, std::uint64_t seed = 1);

/// x* within one cell of the well support K; inconclusive without a bound state.
BoundReport check_well_support(const EigenPair& pair, const WellSpec& well, double h);

struct WellInteriorOptions {
    double ratio_gate = 0.05;  ///< stand-in for the non-explicit constant rho_1
};

/// For an indicator well with a deep bound state ((v - |lambda|)/|lambda| <= gate): x* lies
/// more than one cell inside K. Reports the curve rho -> 1/sqrt(Psi^{-1}(|lambda|/rho)) and
/// the largest rho_2 consistent with the observed distance.
BoundReport check_well_interior(const EigenPair& pair, const WellSpec& well, const BernsteinSpec& spec,
                                double h, const WellInteriorOptions& opts = {});

/// Records whether a bound state exists below the gate v < rho_2 Psi(inrad K^-2). Always
/// diagnostic; vacuous for recurrent processes.
BoundReport check_nogo(const WellSpec& well, const BernsteinSpec& spec, std::span<const double> lambdas,
                       double rho2, double tolerance = 1e-8);

/// sup v / v(x*) <= C, with v the torsion function and x* the eigenfunction maximizer.
/// C defaults to lambda_1 sup v, the implied constant of the mean-exit-time sandwich.
BoundReport check_torsion_comparison(const Eigen::VectorXd& torsion_vec, const EigenPair& pair_free,
                                     std::optional<double> c = std::nullopt);

/// Gate r* <= kappa/2 (else skipped); reports r*, lambda, the curve zeta -> 1/sqrt(Psi^{-1}(lambda/zeta))
/// and the implied zeta = lambda / Psi(r*^-2). Diagnostic when the gate fires.
BoundReport check_kappa_shell_bound(const EigenPair& pair, const BernsteinSpec& spec,
                                    const ConvexDomain& domain, const ConvexDomain& support, double kappa);

}  // namespace nlx
