#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rte/boundary.hpp"
#include "rte/forward.hpp"
#include "rte/grid.hpp"

namespace rte {

/// The unknown pair (p, q) ~ (ln u, d_alpha ln u) on the closed Omega grid.
struct PairField {
  RadianceField p;
  RadianceField q;

  static PairField zeros(const Grid3& omega) {
    return {RadianceField(omega, Region::Omega), RadianceField(omega, Region::Omega)};
  }
  const Grid3& grid() const { return p.grid(); }
};

PairField operator+(const PairField& a, const PairField& b);
PairField operator-(const PairField& a, const PairField& b);
PairField operator*(double s, const PairField& a);
/// Euclidean inner product over all nodes of both components.
double dot(const PairField& a, const PairField& b);

struct InversionConfig {
  double lambda = 5.0;
  double gamma = 1e-3;
  double epsilon = 0.01;
  double rho_init = 1.0;
  double grad_tol = 1e-2;
  std::size_t max_iters = 20000;
  double armijo = 1e-4;
  /// s_norm radius R; crossing it is reported, not enforced.
  double radius = std::numeric_limits<double>::infinity();

  /// Throws ConfigError unless lambda >= 0, 0 <= gamma < 1, epsilon > 0, rho_init > 0, grad_tol > 0.
  void validate() const;
};

/// Fixed inputs of the discrete functional: grid, coefficients, kernel and parameters, with the
/// direction fields and Carleman weights precomputed.
class InverseContext {
 public:
  InverseContext(const Grid3& omega, const Geometry& geometry, SpatialField mu_s, const KernelModel& kernel,
                 const InversionConfig& config);

  const Grid3& grid() const { return grid_; }
  const Geometry& geometry() const { return geometry_; }
  const SpatialField& mu_s() const { return mu_s_; }
  const KernelMatrix& kernel() const { return kernel_; }
  const InversionConfig& config() const { return config_; }

  /// nu and d_alpha nu at node (i, j, k).
  const Vec2& nu(std::size_t n) const { return nu_[n]; }
  const Vec2& nu_alpha(std::size_t n) const { return nu_alpha_[n]; }
  /// Quadrature weight of the residual term at row j and alpha node k:
  /// h_x1 * h_z * w_alpha(k) * exp(2 lambda (z_j^2 - b^2)).
  double residual_weight(std::size_t j, std::size_t k) const { return row_weight_[j] * alpha_weight_[k]; }
  const std::vector<double>& alpha_weights() const { return alpha_weight_; }

  /// Number of free unknowns: both components, interior nodes below the eliminated row.
  std::size_t free_count() const { return 2 * free_per_slice() * grid_.na(); }
  std::size_t free_per_slice() const { return (grid_.nx() - 2) * (grid_.nz() - 3); }

 private:
  Grid3 grid_;
  Geometry geometry_;
  SpatialField mu_s_;
  KernelMatrix kernel_;
  InversionConfig config_;
  std::vector<Vec2> nu_;
  std::vector<Vec2> nu_alpha_;
  std::vector<double> row_weight_;
  std::vector<double> alpha_weight_;
};

/// L1 = -eps Lap p + T(p, q) and L2 = -eps Lap q + T(p, q) on interior nodes (zero elsewhere), with
/// T = nu.grad q + d_alpha nu.grad p + e^{-p} q mu_s int G e^{p} - e^{-p} mu_s int d_alpha G e^{p}.
RadianceField residual_L1(const PairField& pair, const InverseContext& ctx);
RadianceField residual_L2(const PairField& pair, const InverseContext& ctx);

/// Discrete S-norm squared: alpha-trapezoid of the L2, first-difference and second-difference
/// energies of p and q over Omega.
double s_norm_sq(const PairField& pair, const InverseContext& ctx);

/// Gradient of s_norm_sq with respect to every node value.
PairField s_norm_gradient(const PairField& pair, const InverseContext& ctx);

/// J = sum over interior nodes of w (L1^2 + L2^2) + gamma * s_norm_sq.
double functional_value(const PairField& pair, const InverseContext& ctx);

/// Gradient of functional_value with respect to every node value (no constraints applied).
PairField functional_gradient_full(const PairField& pair, const InverseContext& ctx);

/// Gradient of J composed with apply_constraints, with respect to the free values, laid out as a
/// PairField: free nodes carry the gradient, boundary nodes and the eliminated row are zero.
PairField functional_gradient(const PairField& pair, const InverseContext& ctx);

/// Boundary-constraint elimination. Free values are the interior nodes with 1 <= j <= nz-3;
/// boundary nodes take g1/g2 and row nz-2 is reconstructed from the one-sided Neumann closure
/// -4 p(nz-2) + p(nz-3) = 2 h_z g3 - 3 g1(., b, .), likewise for q with g4, g2.
PairField apply_constraints(std::span<const double> free, const BoundaryDataSet& data, const InverseContext& ctx);
std::vector<double> extract_free(const PairField& pair, const InverseContext& ctx);
/// Free-coordinate view of a PairField gradient (inverse of the layout used by functional_gradient).
std::vector<double> free_components(const PairField& gradient, const InverseContext& ctx);

/// Average of the x1- and z-direction linear interpolations of g1 (for p) and g2 (for q).
PairField initial_guess(const BoundaryDataSet& data, const InverseContext& ctx);

/// Inverse of the S-norm Gram matrix on one alpha slice of free values. Maps a free gradient to
/// the S-Riesz representative used as the descent direction.
class SGramSolver {
 public:
  explicit SGramSolver(const InverseContext& ctx);
  /// In place: free gradient -> S-gradient.
  void apply(std::span<double> free_gradient) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct IterationRecord {
  std::size_t iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct InversionState {
  PairField pair;
  double J = 0.0;
  double grad_norm = 0.0;
  std::size_t iter = 0;
  bool converged = false;
  bool radius_exceeded = false;
  std::vector<IterationRecord> history;
};

/// Gradient descent in the S metric from the projected initial guess, with Armijo backtracking
/// (factor 1/2). Stops when the max-norm of the free-node gradient of J drops below grad_tol, or
/// at max_iters. Throws StagnationError when no step size decreases J.
InversionState minimize(const BoundaryDataSet& data, const InverseContext& ctx);

}  // namespace rte
