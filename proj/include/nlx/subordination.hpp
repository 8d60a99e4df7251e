#pragma once

#include "nlx/bernstein.hpp"
#include "nlx/domain.hpp"
#include "nlx/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nlx {

/// Monte Carlo run parameters shared by all path estimators.
struct PathConfig {
    double dt = 1e-3;        ///< subordinator time step
    double horizon = 10.0;   ///< paths still alive at the horizon are censored
    std::size_t n_paths = 10'000;
    std::uint64_t seed = 1;
    unsigned workers = 0;    ///< 0 selects std::thread::hardware_concurrency()
    std::size_t max_steps = 20'000'000;  ///< cap on horizon/dt per path
};

/// Throws ParameterDomainError when dt, horizon, n_paths or the step cap are inconsistent.
void validate(const PathConfig& cfg);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t censored = 0;       ///< paths that reached the horizon
    bool censoring_warning = false; ///< censored fraction >= 1%
    bool error_flag = false;        ///< precondition violated (e.g. start outside the domain)
    double acceptance_rate = 1.0;   ///< rejection-sampler acceptance (relativistic only)
    std::string note;
};

struct SamplerStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
};

/// Draws increments S_{t+dt} - S_t of the subordinator attached to a Bernstein function.
///
/// Supported kinds: Linear (pure drift), Stable (Chambers-Mallows-Stuck / Kanter positive
/// stable law), Relativistic (exponentially tilted stable by rejection), SumOfStables
/// (two independent stable draws) and GeometricStable (stable subordinator evaluated at
/// an independent Gamma(dt, 1) time; the Gamma subordinator itself for alpha = 2).
/// LogWeighted and LogDamped have no sampler.
class SubordinatorSampler {
public:
    explicit SubordinatorSampler(const BernsteinSpec& spec);

    double draw(double dt, Philox4x32& rng, SamplerStats* stats = nullptr) const;
    const BernsteinSpec& spec() const { return spec_; }

private:
    BernsteinSpec spec_;
    double tilt_ = 0.0;  // m^{2/alpha}
};

/// True when sample_increment supports the kind.
bool has_sampler(const BernsteinSpec& spec);

/// A single draw of S_dt. Throws UnsupportedSamplerError for kinds without a sampler.
double sample_increment(const BernsteinSpec& spec, double dt, Philox4x32& rng);

/// Monte Carlo estimate of E[exp(-u S_t)] from n independent draws.
McEstimate estimate_laplace_transform(const BernsteinSpec& spec, double u, double t,
                                      std::size_t n, std::uint64_t seed);

struct SubordinatePath {
    std::vector<double> times;     ///< t_k = k dt
    std::vector<double> s_values;  ///< S_{t_k}, S_0 = 0
    std::vector<Point> x_values;   ///< X_{t_k} = x0 + B_{S_{t_k}}
};

/// One path on [0, horizon] with Brownian increments of per-coordinate variance
/// 2 (S_{t_k} - S_{t_{k-1}}). Deterministic in (cfg.seed, path_index).
SubordinatePath sample_path(const BernsteinSpec& spec, int dimension, std::span<const double> x0,
                            const PathConfig& cfg, std::uint64_t path_index = 0);

/// Per-path first exit times observed on nested time lattices.
///
/// Level j monitors the path at multiples of dt / 2^j (level 0 is cfg.dt); all levels
/// share the path simulated on the finest lattice, so exit_times[j][i] is nonincreasing
/// in j for every path i. Censored paths carry the horizon.
struct ExitTimeSample {
    std::vector<double> dts;
    std::vector<std::vector<double>> exit_times;
    std::vector<std::size_t> censored;
    double acceptance_rate = 1.0;
    bool error_flag = false;
};

ExitTimeSample sample_exit_times(const BernsteinSpec& spec, const ConvexDomain& domain,
                                 std::span<const double> x0, const PathConfig& cfg,
                                 int levels = 1);

/// Mean of tau^p over one level of a sample, with censoring bookkeeping.
McEstimate exit_moment_from_sample(const ExitTimeSample& sample, double p, int level = 0,
                                   std::uint64_t seed = 0);

/// E^{x0}[tau_D^p], tau_D detected at the lattice times k dt.
McEstimate estimate_exit_moment(const BernsteinSpec& spec, const ConvexDomain& domain,
                                std::span<const double> x0, double p, const PathConfig& cfg);

/// P^{x0}(tau_D > t). A start outside the domain yields 0 with error_flag set.
McEstimate estimate_survival(const BernsteinSpec& spec, const ConvexDomain& domain,
                             std::span<const double> x0, double t, const PathConfig& cfg);

/// Survival probabilities at every t of an increasing grid from one set of paths
/// (common random numbers), hence nonincreasing in t.
std::vector<McEstimate> survival_curve(const BernsteinSpec& spec, const ConvexDomain& domain,
                                       std::span<const double> x0, std::span<const double> t_grid,
                                       const PathConfig& cfg);

/// E^{x0}[exp(-int_0^t V(X_s) ds) f(X_t) 1{tau_D > t}] with the potential integral taken as a
/// left-endpoint Riemann sum on the lattice. `v_bound` is the caller's declared bound on |V|;
/// exceeding it along a path throws ContractViolation. Pass ConvexDomain::all_space(d) to
/// disable killing.
McEstimate estimate_feynman_kac(const BernsteinSpec& spec, const ConvexDomain& domain,
                                const Potential& potential, double v_bound,
                                const TestFunction& f, std::span<const double> x0, double t,
                                const PathConfig& cfg);

/// E^{x0}[int_0^{tau_D} exp(-int_0^s V(X_r) dr) ds]: the potential-weighted mean survival time.
McEstimate estimate_fk_survival_time(const BernsteinSpec& spec, const ConvexDomain& domain,
                                     const Potential& potential, double v_bound,
                                     std::span<const double> x0, const PathConfig& cfg);

}  // namespace nlx
