#pragma once

#include "nlx/bernstein.hpp"
#include "nlx/domain.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace nlx {

/// Resolution and sizing of the lattice used to discretize Psi(-Laplacian).
struct GridSpec {
    /// Lattice points across the longest side of the nominal embedding box.
    std::size_t n_per_axis = 256;
    /// Nominal embedding box side / domain extent, per axis.
    double embed_factor = 4.0;
    /// Multiplier on the embedding box for the periodic FFT box on which the kernel is
    /// computed; 0 picks 64 / 8 / 2 in dimension 1 / 2 / 3, reduced to fit max_fft_points.
    int image_padding = 0;
    /// Cap on interior points (dense matrix size); 0 uses default_max_interior().
    std::size_t max_interior = 0;
    std::size_t max_fft_points = std::size_t{1} << 24;
};

/// NLX_MAX_INTERIOR from the environment, else 4096.
std::size_t default_max_interior();

/// Lattice x_m = origin + m h restricted to the open domain.
///
/// The origin is the lower corner of the domain's bounding box, so x_0 lies on or outside
/// the boundary. Interior points are enumerated with axis 0 most significant, so index
/// order is lexicographic order of coordinates.
class GridDomain {
public:
    static GridDomain build(const ConvexDomain& domain, const GridSpec& spec);

    const ConvexDomain& domain() const { return domain_; }
    const GridSpec& spec() const { return spec_; }
    int dimension() const { return domain_.dimension(); }
    double h() const { return h_; }
    std::size_t size() const { return offsets_.size() / static_cast<std::size_t>(dimension()); }

    /// Integer lattice coordinates of interior point i (length d).
    std::span<const long> multi_index(std::size_t i) const;
    Point point(std::size_t i) const;
    std::vector<Point> points() const;

    const Point& origin() const { return origin_; }
    /// Nominal embedding box, centered on the domain's bounding box.
    const Point& embed_lo() const { return embed_lo_; }
    const Point& embed_hi() const { return embed_hi_; }
    /// Periodic FFT box size per axis, in lattice points.
    const std::vector<std::size_t>& fft_size() const { return fft_size_; }
    /// Largest lattice offset between two interior points, per axis.
    const std::vector<long>& span_per_axis() const { return span_; }

private:
    GridDomain(const ConvexDomain& d) : domain_(d) {}

    ConvexDomain domain_;
    GridSpec spec_;
    double h_ = 0.0;
    Point origin_, embed_lo_, embed_hi_;
    std::vector<std::size_t> fft_size_;
    std::vector<long> span_;
    std::vector<long> offsets_;  // size() x d, row-major
};

/// Killed discrete operator Psi(-Delta_h)|_D (+ V).
struct DiscreteOperator {
    Eigen::MatrixXd matrix;
    BernsteinSpec spec;
    std::vector<double> potential;  ///< V(x_i); empty when no potential was added
    std::shared_ptr<const GridDomain> grid;

    std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
    bool has_potential() const { return !potential.empty(); }
};

/// Kernel c(k) of the periodic multiplier Psi(sum_j (4/h^2) sin^2(xi_j h / 2)) at lattice
/// offsets 0..span_j per axis, flattened with axis 0 most significant.
std::vector<double> multiplier_kernel(const GridDomain& grid, const BernsteinSpec& spec);

/// Principal submatrix of the multiplier on interior points. Linear reproduces the
/// standard second-difference Dirichlet Laplacian exactly.
DiscreteOperator assemble_operator(std::shared_ptr<const GridDomain> grid, const BernsteinSpec& spec);
DiscreteOperator assemble_operator(const ConvexDomain& domain, const GridSpec& gs, const BernsteinSpec& spec);

/// Adds V(x_i) to the diagonal. A non-finite value throws SingularityOnGridError.
DiscreteOperator add_potential(const DiscreteOperator& op, const Potential& v);
DiscreteOperator add_potential(const DiscreteOperator& op, std::vector<double> values);

struct EigenOptions {
    double rtol = 1e-8;                 ///< residual contract ||A phi - lambda phi|| <= rtol ||A|| ||phi||
    std::size_t dense_threshold = 2500; ///< dense solver up to this size, Lanczos above
    std::size_t max_k = 64;
    double tie_rtol = 1e-9;             ///< |phi| within this relative gap of the max counts as a tie
};

struct EigenPair {
    double lambda = 0.0;
    Eigen::VectorXd phi;     ///< h^{d/2} ||phi||_2 = 1
    int index = 1;           ///< k >= 1
    Point x_star;
    double r_star = 0.0;
    std::size_t x_star_index = 0;
    std::size_t tie_count = 1;  ///< grid points attaining max |phi| within tie_rtol
    double residual = 0.0;      ///< ||A phi - lambda phi|| / (||A|| ||phi||)
};

/// k smallest eigenpairs, ascending. phi_1 is made nonnegative in sum; higher modes have a
/// positive entry at their x_star. Throws NumericalError when the residual contract fails.
std::vector<EigenPair> eigensolve(const DiscreteOperator& op, int k, const EigenOptions& opts = {});

struct Extremum {
    Point x_star;
    double r_star = 0.0;
    std::size_t index = 0;
    std::size_t tie_count = 1;
};

/// Argmax of |phi| over the grid; ties go to the smallest (lexicographic) index.
Extremum locate_extremum(const Eigen::VectorXd& phi, const GridDomain& grid, double tie_rtol = 1e-9);

/// Solves A v = 1 by Cholesky. Requires an operator without potential.
Eigen::VectorXd torsion(const DiscreteOperator& op_free);

/// Transition matrix exp(-t A) on interior points. Entry (i, j) / h^d approximates the
/// killed heat kernel T(t, x_i, x_j); row sums approximate survival probabilities.
class HeatSemigroup {
public:
    explicit HeatSemigroup(const DiscreteOperator& op, std::size_t max_size = 3000);
    Eigen::MatrixXd at(double t) const;
    const Eigen::VectorXd& eigenvalues() const { return values_; }

private:
    Eigen::VectorXd values_;
    Eigen::MatrixXd vectors_;
};

Eigen::MatrixXd heat_kernel(const DiscreteOperator& op, double t);

/// Aitken delta-squared limit of three successive refinements; falls back to the last
/// value when the differences do not contract.
double aitken_extrapolate(double l1, double l2, double l3);

struct RefinementStudy {
    std::vector<std::size_t> n_per_axis;
    std::vector<double> lambdas;
    double extrapolated = 0.0;
    double contraction = 0.0;  ///< (l2 - l1) / (l3 - l2); about 2^order
};

/// Principal eigenvalue at n, 2n, 4n lattice points per axis and its extrapolated limit.
RefinementStudy refine_principal_eigenvalue(const ConvexDomain& domain, const BernsteinSpec& spec,
                                            const GridSpec& base, const Potential& v = {},
                                            int levels = 3);

}  // namespace nlx
