#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rte/grid.hpp"

namespace rte {

struct Point {
  double x1 = 0.0;
  double z = 0.0;
};

struct Vec2 {
  double x1 = 0.0;
  double z = 0.0;
  double dot(const Vec2& o) const { return x1 * o.x1 + z * o.z; }
  double norm() const;
};

/// Omega = (-B, B) x (a, b); sources on the segment {(alpha, 0) : |alpha| <= d}.
struct Geometry {
  double B = 0.5;
  double a = 1.0;
  double b = 2.0;
  double d = 0.5;

  /// Half-width of the enclosing domain P = (-Bbar, Bbar) x (0, b).
  double bbar() const;
  /// Throws ConfigError unless 0 < a < b and B, d > 0.
  void validate() const;
  bool in_closed_omega(Point x, double tol = 1e-12) const;
  Point source(double alpha) const { return {alpha, 0.0}; }
};

/// Grids for one resolution: the enclosing domain P, its closed Omega sub-block, and
/// the alpha grid. Omega's nodes are a contiguous block of P's nodes.
struct GridSet {
  Geometry geometry;
  Grid3 domain;  // P
  Grid3 omega;
  std::size_t omega_i0 = 0;
  std::size_t omega_j0 = 0;

  static GridSet build(const Geometry& geometry, double h_x1, double h_z, double h_alpha);

  double h_x1() const { return domain.x1.h; }
  double h_z() const { return domain.z.h; }
  double h_alpha() const { return domain.alpha.h; }
  bool in_omega(std::size_t i, std::size_t j) const {
    return i >= omega_i0 && i < omega_i0 + omega.nx() && j >= omega_j0 && j < omega_j0 + omega.nz();
  }
};

/// Unit vector from the source x_alpha = (alpha, 0) toward x. Throws GeometryError at x = x_alpha.
Vec2 direction_vector(Point x, double alpha);

/// Analytic alpha-derivative of direction_vector.
Vec2 direction_alpha_derivative(Point x, double alpha);

/// exp(2 lambda z^2).
double carleman_weight(double z, double lambda);

struct LineQuadrature {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Equispaced trapezoid rule on the segment from x_alpha to x (first point x_alpha).
LineQuadrature line_quadrature(Point x, double alpha, std::size_t n_samples);

/// Number of equispaced samples so that spacing <= max_spacing (at least 2).
std::size_t samples_for_length(double length, double max_spacing);

/// Trapezoid rule over the alpha grid. Throws ConfigError on a length mismatch.
double alpha_quadrature(std::span<const double> values, const Grid1D& alpha);

/// Parameter interval [t0, t1] within [0, 1] of the segment from -> to that lies in the
/// closed Omega box, or nullopt when the segment misses it.
std::optional<std::array<double, 2>> clip_to_omega(const Geometry& geometry, Point from, Point to);

/// Bilinear interpolation stencil at x on a Grid2 (x clamped into the grid).
struct BilinearStencil {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};
BilinearStencil bilinear_stencil(const Grid2& grid, Point x);

/// Bilinear interpolation of node values (slice laid out as Grid2::index).
double bilinear(const Grid2& grid, std::span<const double> slice, Point x);

}  // namespace rte
