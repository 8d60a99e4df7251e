#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nlx {

using Point = std::vector<double>;

/// Scalar field on R^d (potentials, test functions).
using Potential = std::function<double(std::span<const double>)>;
using TestFunction = std::function<double(std::span<const double>)>;

/// Half-space {x : normal . x <= offset}.
struct Halfspace {
    Point normal;
    double offset = 0.0;
};

/// Bounded open convex set in R^d, or the whole space as a no-killing sentinel.
///
/// Distances to the boundary are exact for interior points of every kind. For exterior
/// points `signed_distance` is exact for intervals, boxes and balls, and a lower bound
/// on the true distance (largest face violation) for polytopes.
class ConvexDomain {
public:
    enum class Kind { Interval, Box, Ball, Polytope, AllSpace };

    static ConvexDomain interval(double a, double b);
    static ConvexDomain box(Point lo, Point hi);
    static ConvexDomain ball(Point center, double radius);
    static ConvexDomain polytope(std::vector<Halfspace> faces);
    static ConvexDomain all_space(int dimension);

    Kind kind() const;
    int dimension() const { return dim_; }
    bool is_all_space() const { return kind() == Kind::AllSpace; }

    bool contains(std::span<const double> x) const;
    /// dist(x, boundary) for x inside, 0 outside.
    double boundary_distance(std::span<const double> x) const;
    /// Positive inside, negative outside.
    double signed_distance(std::span<const double> x) const;

    double inradius() const;
    /// Center of a largest inscribed ball.
    Point chebyshev_center() const;
    /// Lebesgue measure; polytopes are supported for d <= 2.
    double volume() const;
    /// Axis-aligned bounding box (lo, hi).
    std::pair<Point, Point> bounding_box() const;

    /// Image under x -> s x, s > 0.
    ConvexDomain scaled(double s) const;
    ConvexDomain translated(std::span<const double> shift) const;

    std::string describe() const;

    // Raw parameters, used by serialization.
    const Point& lo() const { return lo_; }
    const Point& hi() const { return hi_; }
    const Point& center() const { return center_; }
    double radius() const { return radius_; }
    const std::vector<Halfspace>& faces() const { return faces_; }

private:
    ConvexDomain() = default;
    void compute_polytope_geometry();

    Kind kind_ = Kind::Interval;
    int dim_ = 1;
    Point lo_, hi_;          // Interval, Box; cached bounding box for Polytope
    Point center_;           // Ball center, Polytope Chebyshev center
    double radius_ = 0.0;    // Ball radius, Polytope inradius
    std::vector<Halfspace> faces_;  // normals stored unit-length
};

/// Volume of the unit ball in R^d.
double unit_ball_volume(int dimension);

}  // namespace nlx
