#include "nlx/subordination.hpp"

#include "nlx/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>

namespace nlx {

namespace {

// Positive stable variate with E exp(-u Z) = exp(-u^a), 0 < a < 1 (Kanter's form of the
// Chambers-Mallows-Stuck method for the totally skewed case).
double unit_positive_stable(double a, Philox4x32& rng) {
    const double u = std::numbers::pi * rng.uniform_open();
    const double e = -std::log(rng.uniform_open());
    const double lead = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a);
    return lead * std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
}

// Increment over dt of the stable subordinator with Laplace exponent u^{alpha/2}.
double stable_increment(double alpha, double dt, Philox4x32& rng) {
    const double a = 0.5 * alpha;
    if (a >= 1.0) return dt;
    return std::pow(dt, 1.0 / a) * unit_positive_stable(a, rng);
}

std::size_t lattice_steps(double span, double dt) {
    return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

// Brownian displacement with per-coordinate variance 2 ds.
void brownian_step(std::span<double> x, double ds, std::normal_distribution<double>& normal,
                   Philox4x32& rng) {
    if (ds <= 0.0) return;
    const double scale = std::sqrt(2.0 * ds);
    for (double& c : x) c += scale * normal(rng);
}

void check_start(std::span<const double> x0, const ConvexDomain& domain) {
    if (static_cast<int>(x0.size()) != domain.dimension()) {
        throw ParameterDomainError(fmt::format("start point has dimension {}, domain has {}",
                                               x0.size(), domain.dimension()));
    }
}

McEstimate summarize(std::span<const double> values, std::uint64_t seed) {
    const auto m = detail::sample_moments(values);
    McEstimate est;
    est.mean = m.mean;
    est.stderr_ = m.stderr_;
    est.n = values.size();
    est.seed = seed;
    return est;
}

void apply_censoring(McEstimate& est, std::size_t censored) {
    est.censored = censored;
    if (est.n > 0 && static_cast<double>(censored) >= 0.01 * static_cast<double>(est.n)) {
        est.censoring_warning = true;
        est.note = fmt::format("{} of {} paths censored at the horizon", censored, est.n);
    }
}

double acceptance_from(std::span<const SamplerStats> stats) {
    std::uint64_t p = 0, a = 0;
    for (const auto& s : stats) {
        p += s.proposals;
        a += s.accepted;
    }
    return p == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(p);
}

void check_potential(double v, double bound, std::span<const double> x) {
    if (!(std::abs(v) <= bound * (1.0 + 1e-12))) {
        throw ContractViolation(fmt::format("|V(x)| = {} exceeds the declared bound {} at x[0] = {}",
                                            std::abs(v), bound, x[0]));
    }
}

}  // namespace

void validate(const PathConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ParameterDomainError("PathConfig: dt must be > 0");
    if (!(cfg.horizon >= cfg.dt) || !std::isfinite(cfg.horizon)) {
        throw ParameterDomainError("PathConfig: horizon must be finite and >= dt");
    }
    if (cfg.n_paths == 0) throw ParameterDomainError("PathConfig: n_paths must be >= 1");
    if (static_cast<double>(lattice_steps(cfg.horizon, cfg.dt)) > static_cast<double>(cfg.max_steps)) {
        throw ParameterDomainError(fmt::format("PathConfig: horizon/dt = {} exceeds the step cap {}",
                                               cfg.horizon / cfg.dt, cfg.max_steps));
    }
}

bool has_sampler(const BernsteinSpec& spec) {
    validate(spec);
    return spec.kind != BernsteinKind::LogWeighted && spec.kind != BernsteinKind::LogDamped;
}

SubordinatorSampler::SubordinatorSampler(const BernsteinSpec& spec) : spec_(spec) {
    if (!has_sampler(spec)) {
        throw UnsupportedSamplerError(
            fmt::format("no subordinator sampler for {}; this kind is eigensolver-only", describe(spec)));
    }
    if (spec.kind == BernsteinKind::Relativistic) tilt_ = std::pow(spec.m, 2.0 / spec.alpha);
}

double SubordinatorSampler::draw(double dt, Philox4x32& rng, SamplerStats* stats) const {
    if (!(dt > 0.0)) throw ParameterDomainError("sample_increment: dt must be > 0");
    double s = 0.0;
    switch (spec_.kind) {
    case BernsteinKind::Linear:
        s = dt;
        break;
    case BernsteinKind::Stable:
        s = stable_increment(spec_.alpha, dt, rng);
        break;
    case BernsteinKind::SumOfStables:
        s = stable_increment(spec_.alpha, dt, rng) + stable_increment(spec_.beta, dt, rng);
        break;
    case BernsteinKind::GeometricStable: {
        std::gamma_distribution<double> gamma(dt, 1.0);
        const double g = gamma(rng);
        const double a = 0.5 * spec_.alpha;
        s = a >= 1.0 ? g : std::pow(g, 1.0 / a) * unit_positive_stable(a, rng);
        break;
    }
    case BernsteinKind::Relativistic: {
        // Tilted law: density e^{-tilt s} e^{m dt} times the stable density; accept w.p. e^{-tilt s}.
        constexpr std::uint64_t kMaxProposals = 10'000'000;
        for (std::uint64_t k = 0;; ++k) {
            if (k == kMaxProposals) {
                throw NumericalError("relativistic sampler: acceptance too small (reduce dt)");
            }
            const double prop = stable_increment(spec_.alpha, dt, rng);
            if (stats) ++stats->proposals;
            if (rng.uniform_open() < std::exp(-tilt_ * prop)) {
                if (stats) ++stats->accepted;
                s = prop;
                break;
            }
        }
        break;
    }
    case BernsteinKind::LogWeighted:
    case BernsteinKind::LogDamped:
        throw UnsupportedSamplerError("no sampler");
    }
    return s + spec_.drift * dt;
}

double sample_increment(const BernsteinSpec& spec, double dt, Philox4x32& rng) {
    return SubordinatorSampler(spec).draw(dt, rng);
}

McEstimate estimate_laplace_transform(const BernsteinSpec& spec, double u, double t, std::size_t n,
                                      std::uint64_t seed) {
    const SubordinatorSampler sampler(spec);
    if (n == 0) throw ParameterDomainError("estimate_laplace_transform: n must be >= 1");
    std::vector<double> values(n);
    std::vector<SamplerStats> stats(n);
    detail::parallel_for(n, 0, [&](std::size_t i) {
        Philox4x32 rng(seed, i);
        values[i] = std::exp(-u * sampler.draw(t, rng, &stats[i]));
    });
    auto est = summarize(values, seed);
    est.acceptance_rate = acceptance_from(stats);
    return est;
}

SubordinatePath sample_path(const BernsteinSpec& spec, int dimension, std::span<const double> x0,
                            const PathConfig& cfg, std::uint64_t path_index) {
    validate(cfg);
    if (dimension < 1 || static_cast<int>(x0.size()) != dimension) {
        throw ParameterDomainError("sample_path: start point dimension mismatch");
    }
    const SubordinatorSampler sampler(spec);
    const std::size_t steps = lattice_steps(cfg.horizon, cfg.dt);
    SubordinatePath path;
    path.times.reserve(steps + 1);
    path.s_values.reserve(steps + 1);
    path.x_values.reserve(steps + 1);
    Philox4x32 rng(cfg.seed, path_index);
    std::normal_distribution<double> normal;
    Point x(x0.begin(), x0.end());
    double s = 0.0;
    path.times.push_back(0.0);
    path.s_values.push_back(0.0);
    path.x_values.push_back(x);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double ds = sampler.draw(cfg.dt, rng);
        s += ds;
        brownian_step(x, ds, normal, rng);
        path.times.push_back(static_cast<double>(k) * cfg.dt);
        path.s_values.push_back(s);
        path.x_values.push_back(x);
    }
    return path;
}

ExitTimeSample sample_exit_times(const BernsteinSpec& spec, const ConvexDomain& domain,
                                 std::span<const double> x0, const PathConfig& cfg, int levels) {
    validate(cfg);
    check_start(x0, domain);
    if (levels < 1 || levels > 12) throw ParameterDomainError("sample_exit_times: levels must lie in [1, 12]");
    if (domain.is_all_space()) throw ParameterDomainError("sample_exit_times: the whole space has no exit");
    const SubordinatorSampler sampler(spec);

    const auto L = static_cast<std::size_t>(levels);
    const double fine_dt = cfg.dt / static_cast<double>(std::size_t{1} << (L - 1));
    const std::size_t steps = lattice_steps(cfg.horizon, fine_dt);
    if (steps > cfg.max_steps) {
        throw ParameterDomainError(fmt::format("sample_exit_times: {} fine steps exceed the cap {}",
                                               steps, cfg.max_steps));
    }
    const double t_end = static_cast<double>(steps) * fine_dt;

    ExitTimeSample out;
    for (std::size_t j = 0; j < L; ++j) out.dts.push_back(cfg.dt / static_cast<double>(std::size_t{1} << j));
    out.exit_times.assign(L, std::vector<double>(cfg.n_paths, 0.0));
    out.censored.assign(L, 0);
    if (!domain.contains(x0)) {
        out.error_flag = true;
        return out;
    }

    std::vector<std::uint8_t> censored_flags(L * cfg.n_paths, 0);
    std::vector<SamplerStats> stats(cfg.n_paths);
    detail::parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        Philox4x32 rng(cfg.seed, i);
        std::normal_distribution<double> normal;
        Point x(x0.begin(), x0.end());
        std::vector<bool> alive(L, true);
        std::size_t n_alive = L;
        for (std::size_t k = 1; k <= steps && n_alive > 0; ++k) {
            brownian_step(x, sampler.draw(fine_dt, rng, &stats[i]), normal, rng);
            if (domain.contains(x)) continue;
            const double t = static_cast<double>(k) * fine_dt;
            for (std::size_t j = 0; j < L; ++j) {
                const std::size_t stride = std::size_t{1} << (L - 1 - j);
                if (alive[j] && k % stride == 0) {
                    alive[j] = false;
                    --n_alive;
                    out.exit_times[j][i] = t;
                }
            }
        }
        for (std::size_t j = 0; j < L; ++j) {
            if (alive[j]) {
                out.exit_times[j][i] = t_end;
                censored_flags[j * cfg.n_paths + i] = 1;
            }
        }
    });
    for (std::size_t j = 0; j < L; ++j) {
        for (std::size_t i = 0; i < cfg.n_paths; ++i) out.censored[j] += censored_flags[j * cfg.n_paths + i];
    }
    out.acceptance_rate = acceptance_from(stats);
    return out;
}

McEstimate exit_moment_from_sample(const ExitTimeSample& sample, double p, int level,
                                   std::uint64_t seed) {
    if (!(p > 0.0)) throw ParameterDomainError("exit moment order p must be > 0");
    if (level < 0 || static_cast<std::size_t>(level) >= sample.exit_times.size()) {
        throw ParameterDomainError("exit_moment_from_sample: level out of range");
    }
    const auto& taus = sample.exit_times[static_cast<std::size_t>(level)];
    std::vector<double> values(taus.size());
    std::transform(taus.begin(), taus.end(), values.begin(),
                   [p](double t) { return p == 1.0 ? t : std::pow(t, p); });
    auto est = summarize(values, seed);
    apply_censoring(est, sample.censored[static_cast<std::size_t>(level)]);
    est.acceptance_rate = sample.acceptance_rate;
    if (sample.error_flag) {
        est.error_flag = true;
        est.note = "start point outside the domain: exit at t = 0";
    }
    return est;
}

McEstimate estimate_exit_moment(const BernsteinSpec& spec, const ConvexDomain& domain,
                                std::span<const double> x0, double p, const PathConfig& cfg) {
    const auto sample = sample_exit_times(spec, domain, x0, cfg, 1);
    return exit_moment_from_sample(sample, p, 0, cfg.seed);
}

std::vector<McEstimate> survival_curve(const BernsteinSpec& spec, const ConvexDomain& domain,
                                       std::span<const double> x0, std::span<const double> t_grid,
                                       const PathConfig& cfg) {
    validate(cfg);
    check_start(x0, domain);
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
        (!t_grid.empty() && t_grid.front() < 0.0)) {
        throw ParameterDomainError("survival_curve: t_grid must be nondecreasing and >= 0");
    }
    const SubordinatorSampler sampler(spec);
    const std::size_t nt = t_grid.size();
    std::vector<McEstimate> out(nt);
    if (nt == 0) return out;
    if (!domain.contains(x0)) {
        for (auto& e : out) {
            e.n = cfg.n_paths;
            e.seed = cfg.seed;
            e.error_flag = true;
            e.note = "start point outside the domain";
        }
        return out;
    }
    if (static_cast<double>(lattice_steps(t_grid.back(), cfg.dt)) > static_cast<double>(cfg.max_steps)) {
        throw ParameterDomainError("survival_curve: t/dt exceeds the step cap");
    }

    // survived[j * n + i] = path i alive at t_grid[j]
    std::vector<double> survived(nt * cfg.n_paths, 0.0);
    std::vector<SamplerStats> stats(cfg.n_paths);
    detail::parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        Philox4x32 rng(cfg.seed, i);
        std::normal_distribution<double> normal;
        Point x(x0.begin(), x0.end());
        double t = 0.0;
        std::size_t j = 0;
        while (j < nt && t_grid[j] <= 0.0) survived[(j++) * cfg.n_paths + i] = 1.0;
        while (j < nt) {
            // next lattice point or grid time, whichever comes first
            const double next_lattice = (std::floor(t / cfg.dt + 1e-9) + 1.0) * cfg.dt;
            const double t_next = std::min(next_lattice, t_grid[j]);
            brownian_step(x, sampler.draw(t_next - t, rng, &stats[i]), normal, rng);
            t = t_next;
            if (!domain.contains(x)) return;
            while (j < nt && t_grid[j] <= t * (1.0 + 1e-12)) survived[(j++) * cfg.n_paths + i] = 1.0;
        }
    });
    const double acc = acceptance_from(stats);
    for (std::size_t j = 0; j < nt; ++j) {
        out[j] = summarize(std::span<const double>(survived).subspan(j * cfg.n_paths, cfg.n_paths), cfg.seed);
        out[j].acceptance_rate = acc;
    }
    return out;
}

McEstimate estimate_survival(const BernsteinSpec& spec, const ConvexDomain& domain,
                             std::span<const double> x0, double t, const PathConfig& cfg) {
    if (!(t >= 0.0)) throw ParameterDomainError("estimate_survival: t must be >= 0");
    const double grid[1] = {t};
    return survival_curve(spec, domain, x0, grid, cfg).front();
}

McEstimate estimate_feynman_kac(const BernsteinSpec& spec, const ConvexDomain& domain,
                                const Potential& potential, double v_bound, const TestFunction& f,
                                std::span<const double> x0, double t, const PathConfig& cfg) {
    validate(cfg);
    check_start(x0, domain);
    if (!(t >= 0.0)) throw ParameterDomainError("estimate_feynman_kac: t must be >= 0");
    if (!(v_bound >= 0.0)) throw ParameterDomainError("estimate_feynman_kac: v_bound must be >= 0");
    const SubordinatorSampler sampler(spec);
    const std::size_t steps = lattice_steps(t, cfg.dt);
    if (steps > cfg.max_steps) throw ParameterDomainError("estimate_feynman_kac: t/dt exceeds the step cap");
    McEstimate est;
    if (!domain.contains(x0)) {
        est.n = cfg.n_paths;
        est.seed = cfg.seed;
        est.error_flag = true;
        est.note = "start point outside the domain";
        return est;
    }
    std::vector<double> values(cfg.n_paths, 0.0);
    std::vector<SamplerStats> stats(cfg.n_paths);
    detail::parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        Philox4x32 rng(cfg.seed, i);
        std::normal_distribution<double> normal;
        Point x(x0.begin(), x0.end());
        double integral = 0.0;
        double time = 0.0;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double step = (k == steps) ? t - time : cfg.dt;
            const double v = potential ? potential(x) : 0.0;
            check_potential(v, v_bound, x);
            integral += v * step;
            brownian_step(x, sampler.draw(step, rng, &stats[i]), normal, rng);
            time = (k == steps) ? t : static_cast<double>(k) * cfg.dt;
            if (!domain.contains(x)) return;
        }
        values[i] = std::exp(-integral) * (f ? f(x) : 1.0);
    });
    est = summarize(values, cfg.seed);
    est.acceptance_rate = acceptance_from(stats);
    return est;
}

McEstimate estimate_fk_survival_time(const BernsteinSpec& spec, const ConvexDomain& domain,
                                     const Potential& potential, double v_bound,
                                     std::span<const double> x0, const PathConfig& cfg) {
    validate(cfg);
    check_start(x0, domain);
    if (domain.is_all_space()) throw ParameterDomainError("estimate_fk_survival_time: needs a bounded domain");
    const SubordinatorSampler sampler(spec);
    const std::size_t steps = lattice_steps(cfg.horizon, cfg.dt);
    McEstimate est;
    if (!domain.contains(x0)) {
        est.n = cfg.n_paths;
        est.seed = cfg.seed;
        est.error_flag = true;
        est.note = "start point outside the domain";
        return est;
    }
    std::vector<double> values(cfg.n_paths, 0.0);
    std::vector<std::uint8_t> censored(cfg.n_paths, 1);
    std::vector<SamplerStats> stats(cfg.n_paths);
    detail::parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        Philox4x32 rng(cfg.seed, i);
        std::normal_distribution<double> normal;
        Point x(x0.begin(), x0.end());
        double integral = 0.0;
        detail::CompensatedSum acc;
        for (std::size_t k = 1; k <= steps; ++k) {
            acc.add(std::exp(-integral) * cfg.dt);
            const double v = potential ? potential(x) : 0.0;
            check_potential(v, v_bound, x);
            integral += v * cfg.dt;
            brownian_step(x, sampler.draw(cfg.dt, rng, &stats[i]), normal, rng);
            if (!domain.contains(x)) {
                censored[i] = 0;
                break;
            }
        }
        values[i] = acc.value();
    });
    est = summarize(values, cfg.seed);
    apply_censoring(est, static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1)));
    est.acceptance_rate = acceptance_from(stats);
    return est;
}

}  // namespace nlx
