#include "nlx/errors.hpp"
#include "nlx/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace nlx;

namespace {

const ConvexDomain kUnit = ConvexDomain::interval(-1.0, 1.0);
constexpr double kPi = std::numbers::pi;

GridSpec grid_n(std::size_t n) {
    GridSpec g;
    g.n_per_axis = n;
    return g;
}

}  // namespace

TEST_CASE("lattice layout") {
    const auto g = GridDomain::build(kUnit, grid_n(1024));
    CHECK(g.h() == doctest::Approx(1.0 / 128.0));
    CHECK(g.size() == 255);
    CHECK(g.point(0)[0] == doctest::Approx(-1.0 + g.h()));
    CHECK(g.embed_hi()[0] - g.embed_lo()[0] >= 4.0 * 2.0 - 1e-12);
    for (const auto& p : g.points()) CHECK(kUnit.boundary_distance(p) > 0.0);

    const auto b = GridDomain::build(ConvexDomain::box({0.0, 0.0}, {2.0, 1.0}), grid_n(64));
    // Axis 0 most significant: consecutive indices move along axis 1 first.
    CHECK(b.multi_index(0)[0] == b.multi_index(1)[0]);
    CHECK(b.multi_index(0)[1] + 1 == b.multi_index(1)[1]);
}

TEST_CASE("linear spec reproduces the second-difference Laplacian") {
    const auto op = assemble_operator(kUnit, grid_n(1024), BernsteinSpec::linear());
    const double h = op.grid->h();
    const double scale = 2.0 / (h * h);
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) {
            const double want = i == j ? 2.0 / (h * h) : (std::abs(i - j) == 1 ? -1.0 / (h * h) : 0.0);
            REQUIRE(std::abs(op.matrix(i, j) - want) <= 1e-10 * scale);
        }
    }
    const auto pairs = eigensolve(op, 5);
    for (int k = 1; k <= 5; ++k) {
        CAPTURE(k);
        CHECK(pairs[static_cast<std::size_t>(k - 1)].lambda ==
              doctest::Approx(oracle::fd_dirichlet_eigenvalue(2.0, h, k)).epsilon(1e-10));
        CHECK(pairs[static_cast<std::size_t>(k - 1)].lambda == doctest::Approx(k * k * kPi * kPi / 4.0).epsilon(1e-3));
    }
}

TEST_CASE("two-dimensional linear spectrum on a rectangle") {
    const auto op = assemble_operator(ConvexDomain::box({-2.0, -1.0}, {2.0, 1.0}), grid_n(128), BernsteinSpec::linear());
    const double h = op.grid->h();
    const auto pairs = eigensolve(op, 2);
    const double l1 = oracle::fd_dirichlet_eigenvalue(4.0, h, 1) + oracle::fd_dirichlet_eigenvalue(2.0, h, 1);
    const double l2 = oracle::fd_dirichlet_eigenvalue(4.0, h, 2) + oracle::fd_dirichlet_eigenvalue(2.0, h, 1);
    CHECK(pairs[0].lambda == doctest::Approx(l1).epsilon(1e-9));
    CHECK(pairs[1].lambda == doctest::Approx(l2).epsilon(1e-9));
    CHECK(pairs[0].x_star[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pairs[0].x_star[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("stable kernel against lattice quadrature and the singular-integral tail") {
    const auto spec = BernsteinSpec::stable(1.0);
    const auto g = GridDomain::build(kUnit, grid_n(1024));
    const auto c = multiplier_kernel(g, spec);
    const double h = g.h();
    const auto psi = [&](double u) { return eval_psi(spec, u); };
    for (int k : {0, 1, 2, 5, 17, 60}) {
        CAPTURE(k);
        CHECK(c[static_cast<std::size_t>(k)] == doctest::Approx(oracle::lattice_kernel_1d(psi, h, k)).epsilon(1e-6));
    }
    // Off-diagonal entries approach -C_{1,alpha} h / |x_i - x_j|^{1 + alpha}.
    const double c1 = oracle::fractional_laplacian_constant_1d(1.0);
    CHECK(c1 == doctest::Approx(1.0 / kPi));
    for (int k : {40, 100, 200}) {
        const double r = k * h;
        CAPTURE(k);
        CHECK(c[static_cast<std::size_t>(k)] == doctest::Approx(-c1 * h / (r * r)).epsilon(2e-3));
    }
    const auto g15 = GridDomain::build(kUnit, grid_n(1024));
    const auto c15 = multiplier_kernel(g15, BernsteinSpec::stable(1.5));
    const double r = 150 * h;
    CHECK(c15[150] == doctest::Approx(-oracle::fractional_laplacian_constant_1d(1.5) * h / std::pow(r, 2.5)).epsilon(5e-3));
}

TEST_CASE("every catalog operator is symmetric with positive diagonal") {
    const std::vector<BernsteinSpec> specs{BernsteinSpec::linear(),          BernsteinSpec::stable(0.3),
                                           BernsteinSpec::stable(1.7),       BernsteinSpec::relativistic(1.0, 2.0),
                                           BernsteinSpec::sum_of_stables(0.5, 1.5), BernsteinSpec::geometric_stable(1.0),
                                           BernsteinSpec::log_weighted(1.0, 0.5),   BernsteinSpec::log_damped(1.5, 0.5)};
    for (const auto& dom : {kUnit, ConvexDomain::ball({0.0, 0.0}, 1.0)}) {
        for (const auto& s : specs) {
            const auto op = assemble_operator(dom, grid_n(dom.dimension() == 1 ? 512 : 48), s);
            CAPTURE(describe(s));
            const double norm = op.matrix.cwiseAbs().maxCoeff();
            CHECK((op.matrix - op.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * norm);
            CHECK(op.matrix.diagonal().minCoeff() > 0.0);
            const auto pairs = eigensolve(op, 1);
            CHECK(pairs[0].lambda > 0.0);
            CHECK(pairs[0].phi.minCoeff() / pairs[0].phi.maxCoeff() > -1e-8);
            CHECK(pairs[0].residual <= 1e-8);
        }
    }
}

TEST_CASE("eigenvectors are normalized and extremum ties break lexicographically") {
    const auto op = assemble_operator(kUnit, grid_n(1024), BernsteinSpec::linear());
    const auto pairs = eigensolve(op, 2);
    const double h = op.grid->h();
    CHECK(h * pairs[0].phi.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pairs[0].x_star[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pairs[0].r_star == doctest::Approx(1.0 - std::abs(pairs[0].x_star[0])));
    CHECK(pairs[1].tie_count == 2);
    CHECK(pairs[1].x_star[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(pairs[1].r_star == doctest::Approx(0.5));
    CHECK(pairs[1].phi[static_cast<Eigen::Index>(pairs[1].x_star_index)] > 0.0);

    Eigen::VectorXd flat = Eigen::VectorXd::Ones(5);
    const auto g = GridDomain::build(kUnit, grid_n(24));
    REQUIRE(g.size() == 5);
    const auto e = locate_extremum(flat, g);
    CHECK(e.index == 0);
    CHECK(e.tie_count == 5);
}

TEST_CASE("dense and Lanczos paths agree") {
    const auto op = assemble_operator(kUnit, grid_n(2048), BernsteinSpec::stable(1.0));
    const auto dense = eigensolve(op, 4);
    EigenOptions opts;
    opts.dense_threshold = 100;
    const auto lanczos = eigensolve(op, 4, opts);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(lanczos[k].lambda == doctest::Approx(dense[k].lambda).epsilon(1e-9));
        CHECK(lanczos[k].x_star_index == dense[k].x_star_index);
        CHECK(lanczos[k].residual <= opts.rtol);
    }
}

TEST_CASE("potentials: constant shift, well monotonicity, singular values") {
    const auto op = assemble_operator(kUnit, grid_n(1024), BernsteinSpec::stable(1.0));
    const auto base = eigensolve(op, 3);

    const auto zero = add_potential(op, [](std::span<const double>) { return 0.0; });
    CHECK((zero.matrix - op.matrix).cwiseAbs().maxCoeff() == 0.0);

    const auto shifted = eigensolve(add_potential(op, [](std::span<const double>) { return 2.5; }), 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(shifted[k].lambda == doctest::Approx(base[k].lambda + 2.5).epsilon(1e-12));
    }
    CHECK((shifted[0].phi - base[0].phi).cwiseAbs().maxCoeff() <= 1e-8);

    const auto well = [](double v) {
        return [v](std::span<const double> x) { return std::abs(x[0]) < 0.5 ? -v : 0.0; };
    };
    const double l1 = eigensolve(add_potential(op, well(1.0)), 1)[0].lambda;
    const double l2 = eigensolve(add_potential(op, well(2.0)), 1)[0].lambda;
    CHECK(l2 < l1);
    CHECK(l1 < base[0].lambda);

    CHECK_THROWS_AS(add_potential(op, [&](std::span<const double> x) { return x[0] == op.grid->point(3)[0] ? INFINITY : 0.0; }),
                    SingularityOnGridError);
    CHECK_THROWS_AS(add_potential(op, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("domain monotonicity and the subordination sandwich") {
    const auto spec = BernsteinSpec::stable(1.0);
    // Same origin and spacing: the smaller domain's lattice is a subset.
    const auto small = assemble_operator(ConvexDomain::interval(-1.0, 0.5), grid_n(768), spec);
    const auto big = assemble_operator(kUnit, grid_n(1024), spec);
    REQUIRE(small.grid->h() == doctest::Approx(big.grid->h()));
    CHECK(eigensolve(small, 1)[0].lambda >= eigensolve(big, 1)[0].lambda);

    const double lin = eigensolve(assemble_operator(kUnit, grid_n(1024), BernsteinSpec::linear()), 1)[0].lambda;
    CHECK(eigensolve(big, 1)[0].lambda <= eval_psi(spec, lin) + 1e-9);
}

TEST_CASE("grid refinement and extrapolation") {
    CHECK(aitken_extrapolate(1.0, 1.5, 1.75) == doctest::Approx(2.0));
    CHECK(aitken_extrapolate(1.0, 1.0, 1.0) == 1.0);

    const auto lin = refine_principal_eigenvalue(kUnit, BernsteinSpec::linear(), grid_n(1024));
    CHECK(lin.extrapolated == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-5));
    CHECK(lin.contraction == doctest::Approx(4.0).epsilon(0.02));

    // External reference value 1.1577738836977 for the Cauchy process on (-1, 1).
    const auto st = refine_principal_eigenvalue(kUnit, BernsteinSpec::stable(1.0), grid_n(1024));
    CHECK(std::abs(st.extrapolated - 1.1577738836977) < 1e-3);
    CHECK(std::abs(st.extrapolated - 1.1577738836977) < std::abs(st.lambdas.back() - 1.1577738836977));
}

TEST_CASE("torsion function") {
    const auto lin = assemble_operator(kUnit, grid_n(1024), BernsteinSpec::linear());
    const auto v = torsion(lin);
    for (std::size_t i = 0; i < lin.size(); ++i) {
        const double x = lin.grid->point(i)[0];
        REQUIRE(v[static_cast<Eigen::Index>(i)] == doctest::Approx((1.0 - x * x) / 2.0).epsilon(1e-9));
    }
    const auto st = assemble_operator(kUnit, grid_n(4096), BernsteinSpec::stable(1.0));
    const auto vs = torsion(st);
    Eigen::Index arg = 0;
    vs.maxCoeff(&arg);
    CHECK(st.grid->point(static_cast<std::size_t>(arg))[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(vs.maxCoeff() == doctest::Approx(oracle::getoor_mean_exit_time(1, 1.0, 1.0, 0.0)).epsilon(5e-3));

    CHECK_THROWS_AS(torsion(add_potential(st, [](std::span<const double>) { return 1.0; })), PreconditionError);
}

TEST_CASE("heat semigroup identities") {
    const auto op = assemble_operator(kUnit, grid_n(1024), BernsteinSpec::stable(1.0));
    const HeatSemigroup heat(op);
    const auto id = heat.at(0.0);
    CHECK((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff() <= 1e-12);
    const auto a = heat.at(0.1), b = heat.at(0.2), ab = heat.at(0.3);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((a * b - ab).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(a.minCoeff() >= -1e-10);
    CHECK(a.rowwise().sum().maxCoeff() <= 1.0 + 1e-10);
    CHECK((heat_kernel(op, 0.1) - a).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("capacity limits") {
    GridSpec g = grid_n(1024);
    g.max_interior = 100;
    CHECK_THROWS_AS(assemble_operator(kUnit, g, BernsteinSpec::linear()), CapacityError);

    ::setenv("NLX_MAX_INTERIOR", "50", 1);
    CHECK(default_max_interior() == 50);
    CHECK_THROWS_AS(assemble_operator(kUnit, grid_n(1024), BernsteinSpec::linear()), CapacityError);
    ::unsetenv("NLX_MAX_INTERIOR");
    CHECK(default_max_interior() == 4096);

    const auto op = assemble_operator(kUnit, grid_n(1024), BernsteinSpec::linear());
    CHECK_THROWS_AS(HeatSemigroup(op, 100), CapacityError);
}
