#include "nlx/errors.hpp"
#include "nlx/subordination.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace nlx;

namespace {

PathConfig cfg_with(double dt, std::size_t n, std::uint64_t seed, double horizon = 20.0) {
    PathConfig c;
    c.dt = dt;
    c.n_paths = n;
    c.seed = seed;
    c.horizon = horizon;
    return c;
}

const ConvexDomain kUnit = ConvexDomain::interval(-1.0, 1.0);
const double kZero[] = {0.0};

}  // namespace

TEST_CASE("drift-only subordinators are deterministic") {
    Philox4x32 rng(1, 0);
    for (int i = 0; i < 10; ++i) {
        CHECK(sample_increment(BernsteinSpec::linear(), 0.3, rng) == 0.3);
        CHECK(sample_increment(BernsteinSpec::stable(2.0), 0.3, rng) == 0.3);
    }
    auto s = BernsteinSpec::stable(1.0);
    s.drift = 2.0;
    for (int i = 0; i < 100; ++i) CHECK(sample_increment(s, 0.5, rng) >= 1.0);
}

TEST_CASE("kinds without a sampler are rejected") {
    Philox4x32 rng(1, 0);
    CHECK_FALSE(has_sampler(BernsteinSpec::log_weighted(1.0, 0.5)));
    CHECK_THROWS_AS(sample_increment(BernsteinSpec::log_weighted(1.0, 0.5), 0.1, rng), UnsupportedSamplerError);
    CHECK_THROWS_AS(sample_increment(BernsteinSpec::log_damped(1.0, 0.5), 0.1, rng), UnsupportedSamplerError);
    CHECK_THROWS_AS(estimate_exit_moment(BernsteinSpec::log_damped(1.0, 0.5), kUnit, kZero, 1.0, cfg_with(1e-2, 10, 1)),
                    UnsupportedSamplerError);
}

TEST_CASE("Laplace transform of every sampler matches exp(-t Psi(u))") {
    const std::vector<BernsteinSpec> specs{BernsteinSpec::stable(1.0),         BernsteinSpec::stable(0.4),
                                           BernsteinSpec::stable(1.8),         BernsteinSpec::relativistic(1.0, 1.0),
                                           BernsteinSpec::relativistic(0.5, 2.0), BernsteinSpec::sum_of_stables(0.6, 1.5),
                                           BernsteinSpec::geometric_stable(2.0),  BernsteinSpec::geometric_stable(1.2)};
    std::uint64_t seed = 100;
    for (const auto& s : specs) {
        for (auto [u, t] : {std::pair{1.0, 1.0}, std::pair{0.3, 2.0}, std::pair{5.0, 0.2}}) {
            const auto est = estimate_laplace_transform(s, u, t, 20000, ++seed);
            const double exact = std::exp(-t * eval_psi(s, u));
            CAPTURE(describe(s));
            CAPTURE(u);
            CAPTURE(t);
            CHECK(est.stderr_ > 0.0);
            CHECK(std::abs(est.mean - exact) <= 4.0 * est.stderr_);
        }
    }
}

TEST_CASE("relativistic rejection reports its acceptance rate") {
    // Acceptance probability of the tilted proposal is e^{-m dt} for alpha = 1, m = 1.
    const auto est = estimate_laplace_transform(BernsteinSpec::relativistic(1.0, 1.0), 1.0, 0.5, 20000, 3);
    CHECK(est.acceptance_rate == doctest::Approx(std::exp(-0.5)).epsilon(0.03));
}

TEST_CASE("paths: nondecreasing subordinator, variance 2 t for the linear case, determinism") {
    auto cfg = cfg_with(0.25, 1, 9, 1.0);
    const auto p = sample_path(BernsteinSpec::stable(1.0), 2, std::vector<double>{0.0, 0.0}, cfg, 4);
    REQUIRE(p.times.size() == 5);
    CHECK(p.s_values.front() == 0.0);
    for (std::size_t k = 1; k < p.s_values.size(); ++k) CHECK(p.s_values[k] >= p.s_values[k - 1]);
    const auto q = sample_path(BernsteinSpec::stable(1.0), 2, std::vector<double>{0.0, 0.0}, cfg, 4);
    CHECK(p.x_values == q.x_values);
    const auto r = sample_path(BernsteinSpec::stable(1.0), 2, std::vector<double>{0.0, 0.0}, cfg, 5);
    CHECK(p.x_values != r.x_values);

    cfg.dt = 0.5;
    const int n = 20000;
    std::vector<double> x1(n);
    for (int i = 0; i < n; ++i) x1[i] = sample_path(BernsteinSpec::linear(), 1, kZero, cfg, i).x_values.back()[0];
    double s2 = 0.0, s4 = 0.0;
    for (double x : x1) {
        s2 += x * x;
        s4 += x * x * x * x;
    }
    const double var = s2 / n;
    const double se = std::sqrt((s4 / n - var * var) / n);
    CHECK(std::abs(var - 2.0) <= 3.0 * se);

    // Stable alpha = 1 at time 1 is standard Cauchy: median 0, quartiles -1 and 1.
    cfg.dt = 1.0;
    for (int i = 0; i < n; ++i) x1[i] = sample_path(BernsteinSpec::stable(1.0), 1, kZero, cfg, i).x_values.back()[0];
    std::sort(x1.begin(), x1.end());
    // Quantile standard error of the Cauchy at p: sqrt(p(1-p)/n) / density.
    const double q_se = std::sqrt(0.25 / n) * std::numbers::pi;
    CHECK(std::abs(x1[n / 2]) <= 4.0 * q_se);
    const double iqr_se = std::sqrt(0.1875 / n) * 2.0 * std::numbers::pi;
    CHECK(std::abs(x1[3 * n / 4] - 1.0) <= 4.0 * iqr_se);
    CHECK(std::abs(x1[n / 4] + 1.0) <= 4.0 * iqr_se);
}

TEST_CASE("exit times: nested levels are pathwise monotone and deterministic") {
    auto cfg = cfg_with(4e-3, 500, 17);
    for (const auto& s : {BernsteinSpec::linear(), BernsteinSpec::stable(1.0), BernsteinSpec::relativistic(1.0, 1.0)}) {
        const auto a = sample_exit_times(s, kUnit, kZero, cfg, 3);
        REQUIRE(a.exit_times.size() == 3);
        CHECK(a.dts[1] == doctest::Approx(2e-3));
        for (std::size_t i = 0; i < cfg.n_paths; ++i) {
            REQUIRE(a.exit_times[1][i] <= a.exit_times[0][i]);
            REQUIRE(a.exit_times[2][i] <= a.exit_times[1][i]);
        }
        const auto b = sample_exit_times(s, kUnit, kZero, cfg, 3);
        CHECK(a.exit_times == b.exit_times);
    }
}

TEST_CASE("estimates are bit-identical across worker counts") {
    auto cfg = cfg_with(1e-3, 3000, 5);
    cfg.workers = 1;
    const auto one = estimate_exit_moment(BernsteinSpec::stable(1.0), kUnit, kZero, 1.0, cfg);
    cfg.workers = 4;
    const auto four = estimate_exit_moment(BernsteinSpec::stable(1.0), kUnit, kZero, 1.0, cfg);
    CHECK(one.mean == four.mean);
    CHECK(one.stderr_ == four.stderr_);
}

TEST_CASE("mean exit times against closed forms") {
    // Discrete monitoring only delays exit, so bias is one-sided and shrinks with dt.
    const auto lin = estimate_exit_moment(BernsteinSpec::linear(), kUnit, kZero, 1.0, cfg_with(2e-4, 4000, 21));
    const double lin_exact = oracle::getoor_mean_exit_time(1, 2.0, 1.0, 0.0);
    CHECK(lin_exact == doctest::Approx(0.5));
    CHECK(lin.mean >= lin_exact - 4.0 * lin.stderr_);
    CHECK(lin.mean <= lin_exact + 4.0 * lin.stderr_ + 0.03);

    const auto st = estimate_exit_moment(BernsteinSpec::stable(1.0), kUnit, kZero, 1.0, cfg_with(1e-3, 4000, 22));
    const double st_exact = oracle::getoor_mean_exit_time(1, 1.0, 1.0, 0.0);
    CHECK(st_exact == doctest::Approx(1.0));
    CHECK(std::abs(st.mean - st_exact) <= 4.0 * st.stderr_ + 0.01);

    const double off[] = {0.5};
    const auto lin_off = estimate_exit_moment(BernsteinSpec::linear(), kUnit, off, 1.0, cfg_with(2e-4, 4000, 23));
    CHECK(std::abs(lin_off.mean - oracle::getoor_mean_exit_time(1, 2.0, 1.0, 0.5)) <= 4.0 * lin_off.stderr_ + 0.03);

    const auto second = estimate_exit_moment(BernsteinSpec::linear(), kUnit, kZero, 2.0, cfg_with(2e-4, 4000, 24));
    CHECK(std::abs(second.mean - oracle::linear_interval_second_moment_at_zero()) <= 4.0 * second.stderr_ + 0.05);

    const double near_edge[] = {1.0 - 1e-9};
    // Detection lag from the boundary is of order sqrt(dt), so the mean vanishes under refinement.
    const auto edge = estimate_exit_moment(BernsteinSpec::linear(), kUnit, near_edge, 1.0, cfg_with(1e-4, 2000, 25));
    const auto edge_fine = estimate_exit_moment(BernsteinSpec::linear(), kUnit, near_edge, 1.0, cfg_with(1e-6, 2000, 25));
    CHECK(edge.mean < 0.02);
    CHECK(edge_fine.mean < 0.2 * edge.mean);
}

TEST_CASE("domain monotonicity with common random numbers") {
    const auto cfg = cfg_with(1e-3, 2000, 31);
    const auto small = estimate_exit_moment(BernsteinSpec::stable(1.0), ConvexDomain::interval(-0.5, 0.8), kZero, 1.0, cfg);
    const auto big = estimate_exit_moment(BernsteinSpec::stable(1.0), kUnit, kZero, 1.0, cfg);
    CHECK(small.mean <= big.mean);
}

TEST_CASE("censoring is flagged") {
    const auto est = estimate_exit_moment(BernsteinSpec::linear(), kUnit, kZero, 1.0, cfg_with(1e-3, 500, 3, 0.05));
    CHECK(est.censored > 5);
    CHECK(est.censoring_warning);
}

TEST_CASE("survival: t = 0, monotone curve, decay rate, start outside") {
    const auto cfg = cfg_with(1e-3, 4000, 41);
    CHECK(estimate_survival(BernsteinSpec::stable(1.0), kUnit, kZero, 0.0, cfg).mean == 1.0);

    const std::vector<double> ts{0.25, 0.5, 1.0, 1.5, 2.0};
    const auto curve = survival_curve(BernsteinSpec::linear(), kUnit, kZero, ts, cfg_with(2.5e-4, 20000, 42, 2.5));
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].mean <= curve[i - 1].mean);
    const double slope = std::log(curve[4].mean / curve[2].mean);
    CHECK(slope == doctest::Approx(-std::numbers::pi * std::numbers::pi / 4.0).epsilon(0.10));

    const double outside[] = {2.0};
    const auto bad = estimate_survival(BernsteinSpec::linear(), kUnit, outside, 0.5, cfg);
    CHECK(bad.mean == 0.0);
    CHECK(bad.error_flag);
}

TEST_CASE("Feynman-Kac reductions") {
    const auto cfg = cfg_with(1e-3, 2000, 51);
    const auto one = [](std::span<const double>) { return 1.0; };
    const auto zero = [](std::span<const double>) { return 0.0; };
    const auto s = BernsteinSpec::stable(1.0);
    const auto surv = estimate_survival(s, kUnit, kZero, 0.5, cfg);
    const auto fk0 = estimate_feynman_kac(s, kUnit, zero, 0.0, one, kZero, 0.5, cfg);
    CHECK(fk0.mean == doctest::Approx(surv.mean).epsilon(1e-14));

    // A constant potential factors out path by path on common random numbers.
    const double c = 1.3;
    const auto fkc = estimate_feynman_kac(s, kUnit, [c](std::span<const double>) { return c; }, c, one, kZero, 0.5, cfg);
    CHECK(fkc.mean == doctest::Approx(std::exp(-c * 0.5) * surv.mean).epsilon(1e-9));

    const auto lin = estimate_feynman_kac(
        BernsteinSpec::linear(), kUnit, zero, 0.0,
        [](std::span<const double> x) { return std::sin(std::numbers::pi * (x[0] + 1.0) / 2.0); }, kZero, 0.5,
        cfg_with(2e-4, 4000, 52));
    CHECK(lin.mean == doctest::Approx(std::exp(-std::numbers::pi * std::numbers::pi * 0.5 / 4.0)).epsilon(0.05));

    CHECK_THROWS_AS(estimate_feynman_kac(s, kUnit, [](std::span<const double>) { return 5.0; }, 1.0, one, kZero, 0.5, cfg),
                    ContractViolation);

    // Without killing the constant potential is all that remains.
    const auto all = estimate_feynman_kac(s, ConvexDomain::all_space(1), [](std::span<const double>) { return 0.5; }, 0.5,
                                          one, kZero, 2.0, cfg_with(1e-2, 50, 1, 2.0));
    CHECK(all.mean == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(all.stderr_ == doctest::Approx(0.0));

    // Potential-weighted survival time with V = 0 is the mean exit time itself.
    const auto w = estimate_fk_survival_time(s, kUnit, zero, 0.0, kZero, cfg);
    const auto m = estimate_exit_moment(s, kUnit, kZero, 1.0, cfg);
    CHECK(w.mean == doctest::Approx(m.mean).epsilon(1e-9));
}

TEST_CASE("path configuration is validated") {
    auto c = cfg_with(0.0, 10, 1);
    CHECK_THROWS_AS(validate(c), ParameterDomainError);
    c = cfg_with(1.0, 10, 1, 0.5);
    CHECK_THROWS_AS(validate(c), ParameterDomainError);
    c = cfg_with(1e-9, 10, 1, 100.0);
    CHECK_THROWS_AS(validate(c), ParameterDomainError);
}
