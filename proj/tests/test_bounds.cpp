#include "nlx/bounds.hpp"
#include "nlx/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nlx;

namespace {

const ConvexDomain kUnit = ConvexDomain::interval(-1.0, 1.0);
const double kTheta = theta_constant().theta;
constexpr double kPi = std::numbers::pi;

struct Solved {
    DiscreteOperator op;
    std::vector<EigenPair> pairs;
    PotentialStats stats;
    double h = 0.0;
};

Solved solve(const BernsteinSpec& spec, const ConvexDomain& d, std::size_t n, int k = 1, const Potential& v = {}) {
    GridSpec g;
    g.n_per_axis = n;
    auto op = assemble_operator(d, g, spec);
    if (v) op = add_potential(op, v);
    auto pairs = eigensolve(op, k);
    const auto stats = potential_stats(op);
    const double h = op.grid->h();
    return {std::move(op), std::move(pairs), stats, h};
}

PathConfig mc(double dt, std::size_t n, std::uint64_t seed) {
    PathConfig c;
    c.dt = dt;
    c.n_paths = n;
    c.seed = seed;
    c.horizon = 20.0;
    return c;
}

}  // namespace

TEST_CASE("report encoding: pass iff slack >= -tolerance") {
    oracle::Gen g(11);
    for (int i = 0; i < 1000; ++i) {
        const double lhs = g.uniform(-5.0, 5.0), rhs = g.uniform(-5.0, 5.0), tol = g.uniform(0.0, 1.0);
        const auto r = make_report("x", lhs, rhs, tol);
        CHECK(r.slack == lhs - rhs);
        CHECK(r.pass == (r.slack >= -tol));
        CHECK(r.counts_as_failure() == !r.pass);
    }
    const auto nan = make_report("nan", std::nan(""), 1.0, 1.0);
    CHECK_FALSE(nan.pass);
    CHECK(nan.status == ReportStatus::Fail);
    CHECK(to_string(ReportStatus::Degenerate) == "degenerate");
}

TEST_CASE("extremum bound on the classical interval") {
    const auto s = solve(BernsteinSpec::linear(), kUnit, 1024);
    const auto r = check_extremum_bound(s.pairs[0], BernsteinSpec::linear(), kUnit, s.stats, kTheta, s.h);
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-4));
    CHECK(r.rhs == doctest::Approx(kTheta));
    CHECK(r.slack == doctest::Approx(2.384).epsilon(1e-3));
    CHECK(r.name == "extremum_bound[k=1]");
}

TEST_CASE("extremum bound for the Cauchy process") {
    const auto spec = BernsteinSpec::stable(1.0);
    const auto s = solve(spec, kUnit, 1024);
    const auto r = check_extremum_bound(s.pairs[0], spec, kUnit, s.stats, kTheta, s.h);
    CHECK(r.pass);
    CHECK(s.pairs[0].r_star == doctest::Approx(1.0));
    // Equivalent form r* >= 1/sqrt(Psi^{-1}(lambda/theta)) with Psi^{-1}(v) = v^2.
    CHECK(r.extras.at("min_distance") == doctest::Approx(kTheta / s.pairs[0].lambda).epsilon(1e-8));
}

TEST_CASE("property: extremum slack is invariant under nonnegative constant potentials") {
    oracle::Gen g(13);
    const auto spec = BernsteinSpec::stable(1.3);
    const auto base = solve(spec, kUnit, 512, 3);
    for (int i = 0; i < 5; ++i) {
        const double c = g.uniform(0.0, 20.0);
        const auto shifted = solve(spec, kUnit, 512, 3, [c](std::span<const double>) { return c; });
        for (std::size_t k = 0; k < 3; ++k) {
            const auto a = check_extremum_bound(base.pairs[k], spec, kUnit, base.stats, kTheta, base.h);
            const auto b = check_extremum_bound(shifted.pairs[k], spec, kUnit, shifted.stats, kTheta, shifted.h);
            CHECK(b.slack == doctest::Approx(a.slack).epsilon(1e-9));
        }
    }
}

TEST_CASE("property: raising lambda never turns a pass into a fail") {
    oracle::Gen g(17);
    const std::vector<BernsteinSpec> specs{BernsteinSpec::linear(), BernsteinSpec::stable(0.7),
                                           BernsteinSpec::relativistic(1.2, 1.0), BernsteinSpec::geometric_stable(1.5)};
    for (int i = 0; i < 400; ++i) {
        const auto& spec = specs[static_cast<std::size_t>(g.integer(0, 3))];
        EigenPair p;
        p.lambda = g.uniform(-2.0, 50.0);
        p.r_star = g.uniform(0.01, 1.0);
        p.x_star = {0.0};
        const PotentialStats st{g.uniform(0.0, 3.0), g.uniform(0.0, 3.0)};
        const auto before = check_extremum_bound(p, spec, kUnit, st, kTheta, 1e-3);
        p.lambda += 10.0;
        const auto after = check_extremum_bound(p, spec, kUnit, st, kTheta, 1e-3);
        if (before.pass) CHECK(after.pass);
        CHECK(after.slack >= before.slack);
    }
}

TEST_CASE("extremum on the boundary cell is degenerate, not a failure") {
    EigenPair p;
    p.lambda = 1.0;
    p.r_star = 0.001;
    p.x_star = {0.999};
    const auto r = check_extremum_bound(p, BernsteinSpec::linear(), kUnit, {}, kTheta, 0.01);
    CHECK(r.status == ReportStatus::Degenerate);
    CHECK_FALSE(r.counts_as_failure());
}

TEST_CASE("scale covariance of the classical problem") {
    const auto spec = BernsteinSpec::linear();
    const auto a = solve(spec, kUnit, 1024);
    for (double s : {0.5, 2.0, 3.0}) {
        const auto d = kUnit.scaled(s);
        const auto b = solve(spec, d, 1024);
        CAPTURE(s);
        CHECK(b.pairs[0].lambda * s * s == doctest::Approx(a.pairs[0].lambda).epsilon(1e-10));
        CHECK(b.pairs[0].r_star == doctest::Approx(s * a.pairs[0].r_star).epsilon(1e-10));
        const auto ra = check_extremum_bound(a.pairs[0], spec, kUnit, a.stats, kTheta, a.h);
        const auto rb = check_extremum_bound(b.pairs[0], spec, d, b.stats, kTheta, b.h);
        CHECK(rb.slack * s * s == doctest::Approx(ra.slack).epsilon(1e-9));
        const auto fa = check_faber_krahn(a.pairs[0], spec, kUnit, a.stats, kTheta);
        const auto fb = check_faber_krahn(b.pairs[0], spec, d, b.stats, kTheta);
        CHECK(fb.lhs == doctest::Approx(fa.lhs).epsilon(1e-9));
        const auto ha = check_hotspot(a.pairs[0], kUnit, kTheta, a.h);
        const auto hb = check_hotspot(b.pairs[0], d, kTheta, b.h);
        CHECK(hb.slack / s == doctest::Approx(ha.slack).epsilon(1e-9));
    }
}

TEST_CASE("Faber-Krahn form") {
    const auto s = solve(BernsteinSpec::linear(), kUnit, 1024);
    const auto r = check_faber_krahn(s.pairs[0], BernsteinSpec::linear(), kUnit, s.stats, kTheta);
    CHECK(r.pass);
    CHECK(r.rhs == doctest::Approx(2.0));
    CHECK(r.lhs == doctest::Approx(2.0 * std::sqrt(kPi * kPi / 4.0 / kTheta)).epsilon(1e-4));

    const auto box = ConvexDomain::box({-2.0, -1.0}, {2.0, 1.0});
    const auto b = solve(BernsteinSpec::stable(1.0), box, 96, 3);
    for (const auto& p : b.pairs) {
        const auto rb = check_faber_krahn(p, BernsteinSpec::stable(1.0), box, b.stats, kTheta);
        CHECK(rb.rhs == doctest::Approx(kPi));
        CHECK(rb.pass);
    }
}

TEST_CASE("unit-ball Laplacian eigenvalues") {
    CHECK(unit_ball_laplacian_eigenvalue(1) == doctest::Approx(kPi * kPi / 4.0));
    const double j0 = oracle::bessel_j0_first_zero();
    CHECK(j0 == doctest::Approx(2.404825557695773).epsilon(1e-12));
    CHECK(unit_ball_laplacian_eigenvalue(2) == doctest::Approx(j0 * j0).epsilon(0.03));
    CHECK(unit_ball_laplacian_eigenvalue(3) == doctest::Approx(kPi * kPi).epsilon(0.15));
}

TEST_CASE("hot spot on the interval and on a long rectangle") {
    const auto s = solve(BernsteinSpec::linear(), kUnit, 1024);
    const auto r = check_hotspot(s.pairs[0], kUnit, kTheta, s.h);
    CHECK(r.rhs == doctest::Approx(std::sqrt(kTheta / (kPi * kPi / 4.0))).epsilon(1e-9));
    CHECK(r.lhs == doctest::Approx(1.0));
    CHECK(r.pass);

    const auto rect = ConvexDomain::box({-4.0, -1.0}, {4.0, 1.0});
    const auto b = solve(BernsteinSpec::linear(), rect, 192);
    CHECK(check_hotspot(b.pairs[0], rect, kTheta, b.h).pass);
}

TEST_CASE("survival lower bound") {
    const auto spec = BernsteinSpec::linear();
    const auto s = solve(spec, kUnit, 1024);
    const std::vector<double> ts{0.0, 0.5};
    const auto reps = check_survival_lower(s.pairs[0], spec, kUnit, {}, 0.0, ts, mc(1e-3, 2000, 3));
    REQUIRE(reps.size() == 3);
    CHECK(reps[0].lhs == 1.0);
    CHECK(reps[0].slack == 0.0);
    CHECK(reps[0].pass);
    CHECK(reps[1].pass);
    CHECK(reps[1].provenance.kind == "monte-carlo");
    CHECK(reps[1].tolerance >= 4.0 * reps[1].provenance.stderr_);
    // Integrated form: E[tau] = 1/2 against 1/lambda_1 = 4/pi^2.
    CHECK(reps[2].name == "survival_integrated");
    CHECK(reps[2].rhs == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-4));
    CHECK(reps[2].pass);

    const auto vs = solve(spec, kUnit, 1024, 1, [](std::span<const double> x) { return 3.0 * x[0] * x[0]; });
    const auto vreps = check_survival_lower(vs.pairs[0], spec, kUnit,
                                            [](std::span<const double> x) { return 3.0 * x[0] * x[0]; }, 3.0, ts,
                                            mc(1e-3, 2000, 4));
    for (const auto& r : vreps) CHECK(r.pass);
}

TEST_CASE("moment bounds and the exit sandwich") {
    const auto spec = BernsteinSpec::linear();
    const auto s = solve(spec, kUnit, 1024);
    const std::vector<double> ps{1.0, 2.0, 3.0};
    const auto cands = sup_candidates(kUnit);
    REQUIRE(cands.size() >= 1);
    const auto reps = check_moment_bounds(s.pairs[0].lambda, spec, kUnit, ps, cands, mc(5e-4, 2000, 5));
    int moment_reports = 0;
    for (const auto& r : reps) {
        CAPTURE(r.name);
        if (r.name.rfind("moment_bound", 0) == 0) {
            ++moment_reports;
            CHECK(r.pass);
        } else {
            CHECK(r.status == ReportStatus::Diagnostic);
        }
    }
    CHECK(moment_reports == 3);

    for (double w : {0.5, 2.0}) {
        const auto d = ConvexDomain::interval(-w, w);
        const auto rep = check_exit_sandwich(spec, d, sup_candidates(d), mc(5e-4 * w * w, 2000, 6));
        CAPTURE(w);
        CHECK(rep.pass);
        CHECK(rep.extras.at("rho") == doctest::Approx(0.5).epsilon(0.06));
    }
    std::vector<BoundReport> rhos(2);
    for (auto& r : rhos) r.extras["dimension"] = 1.0;
    rhos[0].extras["rho"] = 0.5;
    rhos[1].extras["rho"] = 30.0;
    CHECK(check_exit_sandwich_spread(rhos, 1).pass);
    rhos[1].extras["rho"] = 80.0;
    CHECK_FALSE(check_exit_sandwich_spread(rhos, 1).pass);
}

TEST_CASE("sublevel localization") {
    const auto spec = BernsteinSpec::linear();
    for (double a : {1.0, 50.0}) {
        const Potential v = [a](std::span<const double> x) { return a * x[0] * x[0]; };
        const auto s = solve(spec, kUnit, 1024, 1, v);
        const auto r = check_sublevel_localization(s.pairs[0], v, kUnit, s.h);
        CAPTURE(a);
        CHECK(r.pass);
        CHECK(r.rhs <= r.lhs);
    }
    const auto free = solve(spec, kUnit, 512);
    CHECK(check_sublevel_localization(free.pairs[0], [](std::span<const double>) { return 0.0; }, kUnit, free.h).pass);
    const Potential concave = [](std::span<const double> x) { return -x[0] * x[0]; };
    CHECK_THROWS_AS(check_sublevel_localization(free.pairs[0], concave, kUnit, free.h), PreconditionError);
}

TEST_CASE("potential wells") {
    const auto spec = BernsteinSpec::linear();
    const auto box = ConvexDomain::interval(-8.0, 8.0);
    WellSpec well{kUnit, 10.0};
    const auto s = solve(spec, box, 2048, 1, well.potential());
    CHECK(s.pairs[0].lambda < 0.0);
    const auto sup = check_well_support(s.pairs[0], well, s.h);
    CHECK(sup.pass);
    CHECK(sup.status == ReportStatus::Pass);

    WellSpec shifted{ConvexDomain::interval(1.0, 3.0), 10.0};
    const auto t = solve(spec, box, 2048, 1, shifted.potential());
    CHECK(t.pairs[0].x_star[0] > 1.0);
    CHECK(t.pairs[0].x_star[0] < 3.0);

    WellSpec deep{kUnit, 50.0};
    const auto dp = solve(spec, ConvexDomain::interval(-4.0, 4.0), 2048, 1, deep.potential());
    const auto di = check_well_interior(dp.pairs[0], deep, spec, dp.h);
    CHECK(di.status == ReportStatus::Pass);
    CHECK(di.extras.at("distance_to_well_boundary") == doctest::Approx(1.0));
    CHECK(!di.curve.empty());

    WellSpec shallow{kUnit, 1.0};
    const auto sh = solve(spec, box, 1024, 1, shallow.potential());
    CHECK(check_well_interior(sh.pairs[0], shallow, spec, sh.h).status == ReportStatus::Skipped);

    const auto st = BernsteinSpec::stable(1.0);
    const auto sd = solve(st, ConvexDomain::interval(-4.0, 4.0), 2048, 1, deep.potential());
    CHECK(check_well_interior(sd.pairs[0], deep, st, sd.h).pass);

    CHECK_THROWS_AS(validate(WellSpec{kUnit, -1.0}), ParameterDomainError);
}

TEST_CASE("no-go gate is diagnostic only") {
    const auto spec = BernsteinSpec::linear();
    WellSpec tiny{kUnit, 0.05};
    const auto s = solve(spec, ConvexDomain::interval(-8.0, 8.0), 1024, 1, tiny.potential());
    const std::vector<double> lams{s.pairs[0].lambda};
    const auto r = check_nogo(tiny, spec, lams, 1.0);
    CHECK(r.status == ReportStatus::Diagnostic);
    CHECK_FALSE(r.counts_as_failure());
    CHECK(r.note.find("recurrent case, corollary vacuous") != std::string::npos);

    const auto tr = check_nogo(tiny, BernsteinSpec::stable(0.5), lams, 1.0);
    CHECK(tr.status == ReportStatus::Diagnostic);
    CHECK(tr.extras.at("recurrent") == 0.0);
}

TEST_CASE("torsion comparison") {
    const auto spec = BernsteinSpec::linear();
    const auto s = solve(spec, kUnit, 1024);
    const auto r = check_torsion_comparison(torsion(s.op), s.pairs[0]);
    CHECK(r.rhs == doctest::Approx(1.0));
    CHECK(r.pass);

    const auto tri = ConvexDomain::polytope({{{0.0, -1.0}, 0.0}, {{-1.0, 0.0}, 0.0}, {{0.75, 1.0}, 1.5}});
    const auto t = solve(BernsteinSpec::stable(1.0), tri, 96);
    const auto rt = check_torsion_comparison(torsion(t.op), t.pairs[0]);
    CHECK(rt.rhs >= 1.0);
    CHECK(std::isfinite(rt.rhs));
    CHECK(rt.pass);
}

TEST_CASE("kappa shell gate") {
    const auto spec = BernsteinSpec::linear();
    WellSpec well{kUnit, 10.0};
    const auto box = ConvexDomain::interval(-8.0, 8.0);
    const auto s = solve(spec, box, 1024, 1, well.potential());
    const auto r = check_kappa_shell_bound(s.pairs[0], spec, box, kUnit, 7.0);
    CHECK(r.status == ReportStatus::Skipped);
    const auto z = check_kappa_shell_bound(s.pairs[0], spec, box, kUnit, 0.0);
    CHECK(z.status == ReportStatus::Skipped);
    CHECK_THROWS_AS(check_kappa_shell_bound(s.pairs[0], spec, box, ConvexDomain::interval(20.0, 21.0), 1.0),
                    PreconditionError);
}
