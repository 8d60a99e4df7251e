#include "nlx/domain.hpp"

#include "nlx/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <limits>
#include <numbers>
#include <numeric>

namespace nlx {

namespace {

constexpr double kFeasTol = 1e-10;

void check_dim(std::span<const double> x, int d) {
    if (static_cast<int>(x.size()) != d) {
        throw ParameterDomainError(
            fmt::format("point has dimension {}, domain has dimension {}", x.size(), d));
    }
}

// Calls f(indices) for every k-subset of {0..n-1}.
template <typename F>
void for_each_subset(int n, int k, F&& f) {
    if (k > n) return;
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        f(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace

ConvexDomain ConvexDomain::interval(double a, double b) {
    if (!(std::isfinite(a) && std::isfinite(b) && a < b)) {
        throw ParameterDomainError(fmt::format("interval({}, {}) has empty interior", a, b));
    }
    ConvexDomain d;
    d.kind_ = Kind::Interval;
    d.dim_ = 1;
    d.lo_ = {a};
    d.hi_ = {b};
    return d;
}

ConvexDomain ConvexDomain::box(Point lo, Point hi) {
    if (lo.empty() || lo.size() != hi.size()) {
        throw ParameterDomainError("box: lo and hi must be nonempty and of equal dimension");
    }
    for (std::size_t j = 0; j < lo.size(); ++j) {
        if (!(std::isfinite(lo[j]) && std::isfinite(hi[j]) && lo[j] < hi[j])) {
            throw ParameterDomainError(fmt::format("box: axis {} has empty interior", j));
        }
    }
    ConvexDomain d;
    d.kind_ = lo.size() == 1 ? Kind::Interval : Kind::Box;
    d.dim_ = static_cast<int>(lo.size());
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
}

ConvexDomain ConvexDomain::ball(Point center, double radius) {
    if (center.empty() || !(radius > 0.0) || !std::isfinite(radius)) {
        throw ParameterDomainError("ball: need a nonempty center and a finite radius > 0");
    }
    ConvexDomain d;
    d.kind_ = Kind::Ball;
    d.dim_ = static_cast<int>(center.size());
    d.center_ = std::move(center);
    d.radius_ = radius;
    return d;
}

ConvexDomain ConvexDomain::polytope(std::vector<Halfspace> faces) {
    if (faces.empty()) throw ParameterDomainError("polytope: no faces");
    const std::size_t dim = faces.front().normal.size();
    if (dim == 0 || dim > 3) throw ParameterDomainError("polytope: dimension must be 1, 2 or 3");
    for (auto& f : faces) {
        if (f.normal.size() != dim) throw ParameterDomainError("polytope: inconsistent normal dimension");
        double n2 = 0.0;
        for (double c : f.normal) n2 += c * c;
        const double n = std::sqrt(n2);
        if (!(n > 0.0) || !std::isfinite(f.offset)) {
            throw ParameterDomainError("polytope: zero normal or non-finite offset");
        }
        for (double& c : f.normal) c /= n;
        f.offset /= n;
    }
    ConvexDomain d;
    d.kind_ = Kind::Polytope;
    d.dim_ = static_cast<int>(dim);
    d.faces_ = std::move(faces);
    d.compute_polytope_geometry();
    return d;
}

ConvexDomain ConvexDomain::all_space(int dimension) {
    if (dimension < 1) throw ParameterDomainError("all_space: dimension must be >= 1");
    ConvexDomain d;
    d.kind_ = Kind::AllSpace;
    d.dim_ = dimension;
    return d;
}

void ConvexDomain::compute_polytope_geometry() {
    const int d = dim_;
    const int m = static_cast<int>(faces_.size());
    Eigen::MatrixXd N(m, d);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) N(i, j) = faces_[static_cast<std::size_t>(i)].normal[static_cast<std::size_t>(j)];
        b(i) = faces_[static_cast<std::size_t>(i)].offset;
    }

    // Bounded iff the recession cone {y : N y <= 0} is trivial; its extreme rays lie on
    // intersections of d-1 face hyperplanes (or are +-e_1 when d == 1).
    auto is_recession = [&](const Eigen::VectorXd& y) {
        return y.norm() > 0.5 && (N * y).maxCoeff() <= kFeasTol;
    };
    if (d == 1) {
        Eigen::VectorXd y(1);
        for (double s : {1.0, -1.0}) {
            y(0) = s;
            if (is_recession(y)) throw ParameterDomainError("polytope: unbounded");
        }
    } else {
        for_each_subset(m, d - 1, [&](const std::vector<int>& idx) {
            Eigen::MatrixXd A(d - 1, d);
            for (int r = 0; r < d - 1; ++r) A.row(r) = N.row(idx[static_cast<std::size_t>(r)]);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            const Eigen::MatrixXd kernel = lu.kernel();
            if (kernel.cols() != 1) return;
            Eigen::VectorXd y = kernel.col(0).normalized();
            if (is_recession(y) || is_recession(Eigen::VectorXd(-y))) {
                throw ParameterDomainError("polytope: unbounded");
            }
        });
    }

    // vertices
    std::vector<Eigen::VectorXd> verts;
    for_each_subset(m, d, [&](const std::vector<int>& idx) {
        Eigen::MatrixXd A(d, d);
        Eigen::VectorXd rhs(d);
        for (int r = 0; r < d; ++r) {
            A.row(r) = N.row(idx[static_cast<std::size_t>(r)]);
            rhs(r) = b(idx[static_cast<std::size_t>(r)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rank() < d) return;
        Eigen::VectorXd x = lu.solve(rhs);
        if (((N * x) - b).maxCoeff() > kFeasTol * (1.0 + b.cwiseAbs().maxCoeff())) return;
        for (const auto& v : verts) {
            if ((v - x).norm() < 1e-12 * (1.0 + x.norm())) return;
        }
        verts.push_back(x);
    });
    if (verts.size() < static_cast<std::size_t>(d + 1)) {
        throw ParameterDomainError("polytope: empty or degenerate");
    }
    lo_.assign(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    hi_.assign(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (const auto& v : verts) {
        for (int j = 0; j < d; ++j) {
            lo_[static_cast<std::size_t>(j)] = std::min(lo_[static_cast<std::size_t>(j)], v(j));
            hi_[static_cast<std::size_t>(j)] = std::max(hi_[static_cast<std::size_t>(j)], v(j));
        }
    }

    // Chebyshev center: maximize r subject to N x + r <= b, r >= 0 (vertex enumeration in d+1 dims).
    Eigen::MatrixXd Na(m + 1, d + 1);
    Eigen::VectorXd ba(m + 1);
    Na.topLeftCorner(m, d) = N;
    Na.topRightCorner(m, 1).setOnes();
    ba.head(m) = b;
    Na.row(m).setZero();
    Na(m, d) = -1.0;
    ba(m) = 0.0;
    double best_r = -1.0;
    Eigen::VectorXd best_x;
    for_each_subset(m + 1, d + 1, [&](const std::vector<int>& idx) {
        Eigen::MatrixXd A(d + 1, d + 1);
        Eigen::VectorXd rhs(d + 1);
        for (int r = 0; r <= d; ++r) {
            A.row(r) = Na.row(idx[static_cast<std::size_t>(r)]);
            rhs(r) = ba(idx[static_cast<std::size_t>(r)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rank() < d + 1) return;
        Eigen::VectorXd z = lu.solve(rhs);
        if (((Na * z) - ba).maxCoeff() > kFeasTol * (1.0 + b.cwiseAbs().maxCoeff())) return;
        if (z(d) > best_r + 1e-14) {
            best_r = z(d);
            best_x = z.head(d);
        }
    });
    if (!(best_r > 0.0)) throw ParameterDomainError("polytope: empty interior");
    radius_ = best_r;
    center_.assign(best_x.data(), best_x.data() + d);
}

ConvexDomain::Kind ConvexDomain::kind() const { return kind_; }

bool ConvexDomain::contains(std::span<const double> x) const {
    if (kind_ == Kind::AllSpace) return true;
    return signed_distance(x) > 0.0;
}

double ConvexDomain::boundary_distance(std::span<const double> x) const {
    if (kind_ == Kind::AllSpace) return std::numeric_limits<double>::infinity();
    return std::max(0.0, signed_distance(x));
}

double ConvexDomain::signed_distance(std::span<const double> x) const {
    check_dim(x, dim_);
    switch (kind_) {
    case Kind::AllSpace:
        return std::numeric_limits<double>::infinity();
    case Kind::Interval:
        return std::min(x[0] - lo_[0], hi_[0] - x[0]);
    case Kind::Box: {
        double inside = std::numeric_limits<double>::infinity();
        double outside2 = 0.0;
        bool in = true;
        for (int j = 0; j < dim_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            const double a = x[k] - lo_[k];
            const double b = hi_[k] - x[k];
            inside = std::min(inside, std::min(a, b));
            if (a <= 0.0 || b <= 0.0) in = false;
            const double excess = std::max({0.0, -a, -b});
            outside2 += excess * excess;
        }
        return in ? inside : -std::sqrt(outside2);
    }
    case Kind::Ball: {
        double r2 = 0.0;
        for (int j = 0; j < dim_; ++j) {
            const double t = x[static_cast<std::size_t>(j)] - center_[static_cast<std::size_t>(j)];
            r2 += t * t;
        }
        return radius_ - std::sqrt(r2);
    }
    case Kind::Polytope: {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& f : faces_) {
            double dot = 0.0;
            for (int j = 0; j < dim_; ++j)
                dot += f.normal[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            s = std::min(s, f.offset - dot);
        }
        return s;
    }
    }
    return 0.0;
}

double ConvexDomain::inradius() const {
    switch (kind_) {
    case Kind::AllSpace: return std::numeric_limits<double>::infinity();
    case Kind::Interval:
    case Kind::Box: {
        double r = std::numeric_limits<double>::infinity();
        for (int j = 0; j < dim_; ++j) {
            r = std::min(r, 0.5 * (hi_[static_cast<std::size_t>(j)] - lo_[static_cast<std::size_t>(j)]));
        }
        return r;
    }
    case Kind::Ball:
    case Kind::Polytope: return radius_;
    }
    return 0.0;
}

Point ConvexDomain::chebyshev_center() const {
    switch (kind_) {
    case Kind::AllSpace: return Point(static_cast<std::size_t>(dim_), 0.0);
    case Kind::Interval:
    case Kind::Box: {
        Point c(static_cast<std::size_t>(dim_));
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.5 * (lo_[j] + hi_[j]);
        return c;
    }
    case Kind::Ball:
    case Kind::Polytope: return center_;
    }
    return {};
}

double unit_ball_volume(int d) {
    if (d < 1) throw ParameterDomainError("unit_ball_volume: dimension must be >= 1");
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double ConvexDomain::volume() const {
    switch (kind_) {
    case Kind::AllSpace: return std::numeric_limits<double>::infinity();
    case Kind::Interval:
    case Kind::Box: {
        double v = 1.0;
        for (int j = 0; j < dim_; ++j) v *= hi_[static_cast<std::size_t>(j)] - lo_[static_cast<std::size_t>(j)];
        return v;
    }
    case Kind::Ball: return unit_ball_volume(dim_) * std::pow(radius_, dim_);
    case Kind::Polytope: {
        if (dim_ == 1) return hi_[0] - lo_[0];
        if (dim_ != 2) throw ParameterDomainError("volume: polytopes supported for d <= 2");
        // Vertices are recovered as pairwise face intersections on the boundary.
        std::vector<std::pair<double, double>> v;
        const std::size_t m = faces_.size();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = i + 1; k < m; ++k) {
                const auto& a = faces_[i];
                const auto& c = faces_[k];
                const double det = a.normal[0] * c.normal[1] - a.normal[1] * c.normal[0];
                if (std::abs(det) < 1e-14) continue;
                const double x = (a.offset * c.normal[1] - a.normal[1] * c.offset) / det;
                const double y = (a.normal[0] * c.offset - a.offset * c.normal[0]) / det;
                const double p[2] = {x, y};
                if (signed_distance(p) < -1e-10) continue;
                v.emplace_back(x, y);
            }
        }
        double cx = 0.0, cy = 0.0;
        for (auto [x, y] : v) {
            cx += x;
            cy += y;
        }
        cx /= static_cast<double>(v.size());
        cy /= static_cast<double>(v.size());
        std::sort(v.begin(), v.end(), [&](auto p, auto q) {
            return std::atan2(p.second - cy, p.first - cx) < std::atan2(q.second - cy, q.first - cx);
        });
        double area = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& p = v[i];
            const auto& q = v[(i + 1) % v.size()];
            area += p.first * q.second - q.first * p.second;
        }
        return 0.5 * std::abs(area);
    }
    }
    return 0.0;
}

std::pair<Point, Point> ConvexDomain::bounding_box() const {
    switch (kind_) {
    case Kind::AllSpace:
        throw ParameterDomainError("bounding_box: the whole space is unbounded");
    case Kind::Ball: {
        Point lo = center_, hi = center_;
        for (std::size_t j = 0; j < lo.size(); ++j) {
            lo[j] -= radius_;
            hi[j] += radius_;
        }
        return {lo, hi};
    }
    default:
        return {lo_, hi_};
    }
}

ConvexDomain ConvexDomain::scaled(double s) const {
    if (!(s > 0.0) || !std::isfinite(s)) throw ParameterDomainError("scaled: factor must be > 0");
    ConvexDomain out = *this;
    for (double& x : out.lo_) x *= s;
    for (double& x : out.hi_) x *= s;
    for (double& x : out.center_) x *= s;
    if (kind_ == Kind::Ball || kind_ == Kind::Polytope) out.radius_ *= s;
    for (auto& f : out.faces_) f.offset *= s;
    return out;
}

ConvexDomain ConvexDomain::translated(std::span<const double> shift) const {
    check_dim(shift, dim_);
    ConvexDomain out = *this;
    for (std::size_t j = 0; j < shift.size(); ++j) {
        if (!out.lo_.empty()) out.lo_[j] += shift[j];
        if (!out.hi_.empty()) out.hi_[j] += shift[j];
        if (!out.center_.empty()) out.center_[j] += shift[j];
    }
    for (auto& f : out.faces_) {
        double dot = 0.0;
        for (std::size_t j = 0; j < shift.size(); ++j) dot += f.normal[j] * shift[j];
        f.offset += dot;
    }
    return out;
}

std::string ConvexDomain::describe() const {
    switch (kind_) {
    case Kind::AllSpace: return fmt::format("all_space(d={})", dim_);
    case Kind::Interval: return fmt::format("interval({}, {})", lo_[0], hi_[0]);
    case Kind::Box: return fmt::format("box(lo=[{}], hi=[{}])", fmt::join(lo_, ", "), fmt::join(hi_, ", "));
    case Kind::Ball: return fmt::format("ball(center=[{}], r={})", fmt::join(center_, ", "), radius_);
    case Kind::Polytope: return fmt::format("polytope({} faces, d={})", faces_.size(), dim_);
    }
    return "domain";
}

}  // namespace nlx
