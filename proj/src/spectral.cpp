#include "nlx/spectral.hpp"

#include "nlx/errors.hpp"
#include "nlx/rng.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <limits>
#include <numeric>

namespace nlx {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_pow2(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 2)); }

std::size_t kernel_points(const std::vector<std::size_t>& n) {
    std::size_t total = 1;
    for (std::size_t v : n) total *= v / 2 + 1;
    return total;
}

double inf_norm(const Eigen::MatrixXd& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

double relative_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& phi, double lambda,
                         double a_norm) {
    const double denom = a_norm * phi.norm();
    return denom > 0.0 ? (a * phi - lambda * phi).norm() / denom : 0.0;
}

}  // namespace

std::size_t default_max_interior() {
    if (const char* env = std::getenv("NLX_MAX_INTERIOR")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 4096;
}

GridDomain GridDomain::build(const ConvexDomain& domain, const GridSpec& spec) {
    if (domain.is_all_space()) throw ParameterDomainError("grid: the whole space cannot be discretized; use a large box");
    if (spec.n_per_axis < 4) throw ParameterDomainError("grid: n_per_axis must be >= 4");
    if (!(spec.embed_factor >= 1.0)) throw ParameterDomainError("grid: embed_factor must be >= 1");
    if (spec.image_padding < 0) throw ParameterDomainError("grid: image_padding must be >= 0");
    const int d = domain.dimension();
    if (d < 1 || d > 3) throw ParameterDomainError("grid: dimension must be 1, 2 or 3");

    GridDomain g(domain);
    g.spec_ = spec;
    const auto [lo, hi] = domain.bounding_box();
    double max_extent = 0.0;
    for (int j = 0; j < d; ++j) max_extent = std::max(max_extent, hi[j] - lo[j]);
    g.h_ = spec.embed_factor * max_extent / static_cast<double>(spec.n_per_axis);
    g.origin_ = lo;

    const std::size_t cap = spec.max_interior != 0 ? spec.max_interior : default_max_interior();
    std::vector<long> top(static_cast<std::size_t>(d));
    double cells = 1.0;
    for (int j = 0; j < d; ++j) {
        top[j] = static_cast<long>(std::ceil((hi[j] - lo[j]) / g.h_));
        cells *= static_cast<double>(top[j]);
    }
    if (cells > 64.0 * static_cast<double>(cap) + 1e6) {
        throw CapacityError(fmt::format("grid: about {:.0f} lattice cells in the bounding box exceed the interior cap {} "
                                        "(raise NLX_MAX_INTERIOR or lower n_per_axis)", cells, cap));
    }

    const double inside_tol = 1e-9 * g.h_;
    std::vector<long> m(static_cast<std::size_t>(d), 1);
    Point x(static_cast<std::size_t>(d));
    std::vector<long> mn(static_cast<std::size_t>(d), std::numeric_limits<long>::max());
    std::vector<long> mx(static_cast<std::size_t>(d), std::numeric_limits<long>::min());
    std::size_t count = 0;
    for (;;) {
        for (int j = 0; j < d; ++j) x[j] = lo[j] + static_cast<double>(m[j]) * g.h_;
        if (domain.signed_distance(x) > inside_tol) {
            if (++count > cap) {
                throw CapacityError(fmt::format("grid: more than {} interior points (raise NLX_MAX_INTERIOR or lower n_per_axis)", cap));
            }
            g.offsets_.insert(g.offsets_.end(), m.begin(), m.end());
            for (int j = 0; j < d; ++j) {
                mn[j] = std::min(mn[j], m[j]);
                mx[j] = std::max(mx[j], m[j]);
            }
        }
        int j = d - 1;
        while (j >= 0 && m[j] == top[j]) {
            m[j] = 1;
            --j;
        }
        if (j < 0) break;
        ++m[j];
    }
    if (count == 0) throw CapacityError("grid: no interior lattice points; increase n_per_axis");

    g.span_.resize(static_cast<std::size_t>(d));
    g.embed_lo_.resize(static_cast<std::size_t>(d));
    g.embed_hi_.resize(static_cast<std::size_t>(d));
    std::vector<std::size_t> embed_pts(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        g.span_[j] = mx[j] - mn[j];
        const double c = 0.5 * (lo[j] + hi[j]);
        const double half = 0.5 * spec.embed_factor * (hi[j] - lo[j]);
        g.embed_lo_[j] = c - half;
        g.embed_hi_[j] = c + half;
        embed_pts[j] = static_cast<std::size_t>(std::ceil(2.0 * half / g.h_ - 1e-9));
    }

    int pad = spec.image_padding != 0 ? spec.image_padding : (d == 1 ? 64 : d == 2 ? 8 : 2);
    for (;;) {
        g.fft_size_.assign(static_cast<std::size_t>(d), 0);
        for (int j = 0; j < d; ++j) {
            const std::size_t need = std::max(static_cast<std::size_t>(pad) * embed_pts[j],
                                              2 * static_cast<std::size_t>(g.span_[j]) + 2);
            g.fft_size_[j] = next_pow2(need);
        }
        if (kernel_points(g.fft_size_) <= spec.max_fft_points) break;
        if (pad == 1) {
            throw CapacityError(fmt::format("grid: FFT box of {} points exceeds the cap {}",
                                            kernel_points(g.fft_size_), spec.max_fft_points));
        }
        pad = std::max(1, pad / 2);
    }
    return g;
}

std::span<const long> GridDomain::multi_index(std::size_t i) const {
    const auto d = static_cast<std::size_t>(dimension());
    return {offsets_.data() + i * d, d};
}

Point GridDomain::point(std::size_t i) const {
    const auto mi = multi_index(i);
    Point x(mi.size());
    for (std::size_t j = 0; j < mi.size(); ++j) x[j] = origin_[j] + static_cast<double>(mi[j]) * h_;
    return x;
}

std::vector<Point> GridDomain::points() const {
    std::vector<Point> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
    return out;
}

std::vector<double> multiplier_kernel(const GridDomain& grid, const BernsteinSpec& spec) {
    validate(spec);
    const int d = grid.dimension();
    const auto& n = grid.fft_size();
    std::vector<int> dims(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) {
        dims[j] = static_cast<int>(n[j] / 2 + 1);
        total *= static_cast<std::size_t>(dims[j]);
    }
    const double h = grid.h();
    const double scale = 4.0 / (h * h);

    // Symbol on the nonnegative frequencies; the sequence is even in every axis, so the
    // inverse DFT reduces to a DCT-I per axis.
    std::vector<std::vector<double>> axis_symbol(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        axis_symbol[j].resize(static_cast<std::size_t>(dims[j]));
        for (int i = 0; i < dims[j]; ++i) {
            const double s = std::sin(std::numbers::pi * i / static_cast<double>(n[j]));
            axis_symbol[j][i] = scale * s * s;
        }
    }
    double* in = fftw_alloc_real(total);
    double* out = fftw_alloc_real(total);
    if (!in || !out) {
        fftw_free(in);
        fftw_free(out);
        throw CapacityError("multiplier kernel: allocation failed");
    }
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t f = 0; f < total; ++f) {
        double u = 0.0;
        for (int j = 0; j < d; ++j) u += axis_symbol[j][idx[j]];
        in[f] = eval_psi(spec, u);
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < dims[j]) break;
            idx[j] = 0;
        }
    }
    std::vector<fftw_r2r_kind> kinds(static_cast<std::size_t>(d), FFTW_REDFT00);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_r2r(d, dims.data(), in, out, kinds.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    double norm = 1.0;
    for (int j = 0; j < d; ++j) norm *= static_cast<double>(n[j]);
    const auto& span = grid.span_per_axis();
    std::size_t kept = 1;
    for (int j = 0; j < d; ++j) kept *= static_cast<std::size_t>(span[j] + 1);
    std::vector<double> kernel(kept);
    std::vector<long> k(static_cast<std::size_t>(d), 0);
    for (std::size_t f = 0; f < kept; ++f) {
        std::size_t src = 0;
        for (int j = 0; j < d; ++j) src = src * static_cast<std::size_t>(dims[j]) + static_cast<std::size_t>(k[j]);
        kernel[f] = out[src] / norm;
        for (int j = d - 1; j >= 0; --j) {
            if (++k[j] <= span[j]) break;
            k[j] = 0;
        }
    }
    fftw_free(in);
    fftw_free(out);
    return kernel;
}

DiscreteOperator assemble_operator(std::shared_ptr<const GridDomain> grid, const BernsteinSpec& spec) {
    if (!grid) throw ParameterDomainError("assemble_operator: null grid");
    const auto kernel = multiplier_kernel(*grid, spec);
    const int d = grid->dimension();
    const auto& span = grid->span_per_axis();
    std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
    for (int j = d - 2; j >= 0; --j) stride[j] = stride[j + 1] * static_cast<std::size_t>(span[j + 1] + 1);

    const std::size_t n = grid->size();
    DiscreteOperator op;
    op.spec = spec;
    op.grid = grid;
    op.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
        const auto ma = grid->multi_index(a);
        for (std::size_t b = a; b < n; ++b) {
            const auto mb = grid->multi_index(b);
            std::size_t f = 0;
            for (int j = 0; j < d; ++j) f += stride[j] * static_cast<std::size_t>(std::labs(ma[j] - mb[j]));
            op.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = kernel[f];
            op.matrix(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = kernel[f];
        }
    }
    return op;
}

DiscreteOperator assemble_operator(const ConvexDomain& domain, const GridSpec& gs, const BernsteinSpec& spec) {
    return assemble_operator(std::make_shared<const GridDomain>(GridDomain::build(domain, gs)), spec);
}

DiscreteOperator add_potential(const DiscreteOperator& op, std::vector<double> values) {
    if (values.size() != op.size()) {
        throw ParameterDomainError(fmt::format("add_potential: {} values for {} grid points", values.size(), op.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            const Point x = op.grid->point(i);
            throw SingularityOnGridError(fmt::format("potential is not finite at grid point {} (x[0] = {})", i, x[0]));
        }
    }
    DiscreteOperator out = op;
    if (out.potential.empty()) out.potential.assign(values.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += values[i];
        out.potential[i] += values[i];
    }
    return out;
}

DiscreteOperator add_potential(const DiscreteOperator& op, const Potential& v) {
    if (!v) return op;
    std::vector<double> values(op.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = v(op.grid->point(i));
    return add_potential(op, std::move(values));
}

Extremum locate_extremum(const Eigen::VectorXd& phi, const GridDomain& grid, double tie_rtol) {
    if (static_cast<std::size_t>(phi.size()) != grid.size() || phi.size() == 0) {
        throw ParameterDomainError("locate_extremum: vector length does not match the grid");
    }
    const double top = phi.cwiseAbs().maxCoeff();
    Extremum e;
    e.tie_count = 0;
    bool found = false;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        if (std::abs(phi[i]) >= top * (1.0 - tie_rtol)) {
            if (!found) {
                e.index = static_cast<std::size_t>(i);
                found = true;
            }
            ++e.tie_count;
        }
    }
    e.x_star = grid.point(e.index);
    e.r_star = grid.domain().boundary_distance(e.x_star);
    return e;
}

namespace {

struct RitzPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

RitzPairs dense_lowest(const Eigen::MatrixXd& a, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolve: dense symmetric solver failed");
    return {es.eigenvalues().head(k), es.eigenvectors().leftCols(k)};
}

// Shift-invert Lanczos with full reorthogonalization; restarted from the current Ritz
// vectors with a doubled basis until the residual contract holds.
RitzPairs lanczos_lowest(const Eigen::MatrixXd& a, int k, double rtol, double a_norm) {
    const Eigen::Index n = a.rows();
    double gersh = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        gersh = std::min(gersh, 2.0 * a(i, i) - a.row(i).cwiseAbs().sum());
    }
    const double sigma = gersh - std::max(1.0, 1e-6 * a_norm);
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() -= sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) throw NumericalError("eigensolve: shifted Cholesky factorization failed");

    Eigen::VectorXd start(n);
    Philox4x32 rng(0x5eed, 0);
    for (Eigen::Index i = 0; i < n; ++i) start[i] = 1.0 + 0.25 * rng.uniform_open();

    Eigen::Index m = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * k + 30, 60));
    for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::MatrixXd q(n, m);
        Eigen::VectorXd alpha(m), beta(m);
        q.col(0) = start.normalized();
        Eigen::Index steps = m;
        for (Eigen::Index j = 0; j < m; ++j) {
            Eigen::VectorXd w = llt.solve(q.col(j));
            alpha[j] = q.col(j).dot(w);
            for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
            beta[j] = w.norm();
            if (j + 1 == m) break;
            if (beta[j] <= 1e-13 * std::abs(alpha[j])) {
                steps = j + 1;
                break;
            }
            q.col(j + 1) = w / beta[j];
        }
        if (steps < k) {
            throw NumericalError(fmt::format("eigensolve: Krylov space of dimension {} is invariant but k = {}", steps, k));
        }
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
        for (Eigen::Index j = 0; j < steps; ++j) {
            t(j, j) = alpha[j];
            if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        RitzPairs out;
        out.values.resize(k);
        out.vectors.resize(n, k);
        bool converged = true;
        for (int i = 0; i < k; ++i) {
            const Eigen::Index col = steps - 1 - i;  // largest of the inverse = smallest of A
            Eigen::VectorXd v = q.leftCols(steps) * es.eigenvectors().col(col);
            v.normalize();
            const double lambda = v.dot(a * v);
            out.values[i] = lambda;
            out.vectors.col(i) = v;
            if (relative_residual(a, v, lambda, a_norm) > rtol) converged = false;
        }
        if (converged) return out;
        if (m == n) {
            throw NumericalError(fmt::format("eigensolve: Lanczos did not meet rtol {} with a full basis", rtol));
        }
        start = out.vectors.rowwise().sum();
        m = std::min<Eigen::Index>(n, 2 * m);
    }
    throw NumericalError("eigensolve: Lanczos restart limit reached");
}

}  // namespace

std::vector<EigenPair> eigensolve(const DiscreteOperator& op, int k, const EigenOptions& opts) {
    const std::size_t n = op.size();
    if (k < 1 || static_cast<std::size_t>(k) > opts.max_k) {
        throw ParameterDomainError(fmt::format("eigensolve: k = {} outside [1, {}]", k, opts.max_k));
    }
    if (static_cast<std::size_t>(k) > n) {
        throw ParameterDomainError(fmt::format("eigensolve: k = {} exceeds the {} grid points", k, n));
    }
    if (!op.grid) throw ParameterDomainError("eigensolve: operator has no grid");
    const double a_norm = inf_norm(op.matrix);
    RitzPairs rp = n <= opts.dense_threshold ? dense_lowest(op.matrix, k)
                                             : lanczos_lowest(op.matrix, k, opts.rtol, a_norm);
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return rp.values[x] < rp.values[y]; });

    const int d = op.grid->dimension();
    const double l2_scale = std::pow(op.grid->h(), 0.5 * d);
    std::vector<EigenPair> pairs;
    pairs.reserve(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        EigenPair p;
        p.index = r + 1;
        p.lambda = rp.values[order[r]];
        p.phi = rp.vectors.col(order[r]);
        p.residual = relative_residual(op.matrix, p.phi, p.lambda, a_norm);
        if (!(p.residual <= opts.rtol)) {
            throw NumericalError(fmt::format("eigensolve: residual {:.3e} of pair {} exceeds rtol {:.1e}",
                                             p.residual, p.index, opts.rtol));
        }
        p.phi /= l2_scale * p.phi.norm();
        auto ext = locate_extremum(p.phi, *op.grid, opts.tie_rtol);
        const bool flip = p.index == 1 ? p.phi.sum() < 0.0 : p.phi[static_cast<Eigen::Index>(ext.index)] < 0.0;
        if (flip) p.phi = -p.phi;
        p.x_star = std::move(ext.x_star);
        p.r_star = ext.r_star;
        p.x_star_index = ext.index;
        p.tie_count = ext.tie_count;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

Eigen::VectorXd torsion(const DiscreteOperator& op_free) {
    if (op_free.has_potential()) throw PreconditionError("torsion: operator must not carry a potential");
    Eigen::LLT<Eigen::MatrixXd> llt(op_free.matrix);
    if (llt.info() != Eigen::Success) throw NumericalError("torsion: matrix is not positive definite");
    Eigen::VectorXd v = llt.solve(Eigen::VectorXd::Ones(op_free.matrix.rows()));
    if (!v.allFinite()) throw NumericalError("torsion: solve produced non-finite values");
    return v;
}

HeatSemigroup::HeatSemigroup(const DiscreteOperator& op, std::size_t max_size) {
    if (op.size() > max_size) {
        throw CapacityError(fmt::format("heat kernel: {} grid points exceed the cap {}", op.size(), max_size));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
    if (es.info() != Eigen::Success) throw NumericalError("heat kernel: eigendecomposition failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

Eigen::MatrixXd HeatSemigroup::at(double t) const {
    if (!(t >= 0.0)) throw ParameterDomainError("heat kernel: t must be >= 0");
    const Eigen::VectorXd decay = (-t * values_).array().exp();
    Eigen::MatrixXd out = vectors_ * decay.asDiagonal() * vectors_.transpose();
    return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd heat_kernel(const DiscreteOperator& op, double t) { return HeatSemigroup(op).at(t); }

double aitken_extrapolate(double l1, double l2, double l3) {
    const double d1 = l2 - l1;
    const double d2 = l3 - l2;
    const double denom = d2 - d1;
    if (denom == 0.0 || d1 == 0.0 || d2 / d1 <= 0.0 || std::abs(d2) >= std::abs(d1)) return l3;
    return l3 - d2 * d2 / denom;
}

RefinementStudy refine_principal_eigenvalue(const ConvexDomain& domain, const BernsteinSpec& spec,
                                            const GridSpec& base, const Potential& v, int levels) {
    if (levels < 1) throw ParameterDomainError("refinement: levels must be >= 1");
    RefinementStudy study;
    GridSpec gs = base;
    for (int l = 0; l < levels; ++l) {
        auto op = assemble_operator(domain, gs, spec);
        if (v) op = add_potential(op, v);
        study.n_per_axis.push_back(gs.n_per_axis);
        study.lambdas.push_back(eigensolve(op, 1).front().lambda);
        gs.n_per_axis *= 2;
    }
    const auto& l = study.lambdas;
    study.extrapolated = l.back();
    if (l.size() >= 3) {
        const std::size_t m = l.size();
        study.extrapolated = aitken_extrapolate(l[m - 3], l[m - 2], l[m - 1]);
        const double d2 = l[m - 1] - l[m - 2];
        study.contraction = d2 != 0.0 ? (l[m - 2] - l[m - 3]) / d2 : 0.0;
    }
    return study;
}

}  // namespace nlx
