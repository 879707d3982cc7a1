#pragma once

#include <cstddef>
#include <vector>

#include "rte/geometry.hpp"
#include "rte/grid.hpp"
#include "rte/phantom.hpp"

namespace rte {

/// Smooth compactly supported source replacing the point source at x_alpha. The profile is
/// the standard bump C_sigma * exp(-r^2 / (sigma^2 - r^2)) for r < sigma, normalized to unit
/// mass in the plane.
struct SourceModel {
  double sigma = 0.05;
  double c_sigma = 0.0;
  double profile_integral = 0.0;  // C_sigma * int_0^sigma profile(s) ds

  static SourceModel make(double sigma);
  /// Radial profile C_sigma * exp(-r^2/(sigma^2 - r^2)), zero for r >= sigma.
  double radial(double r) const;
  /// C_sigma * int_0^min(r, sigma) profile(s) ds.
  double radial_integral(double r) const;
};

double source_value(Point x, double alpha, const SourceModel& model);

/// 2D Henyey-Greenstein kernel on the source line: H(alpha, beta), independent of x.
struct KernelModel {
  double c_g = 0.5;
  double d = 0.5;

  double value(double alpha, double beta) const;
  /// d/d alpha of value().
  double alpha_derivative(double alpha, double beta) const;
};

double kernel_value(double alpha, double beta, const KernelModel& model);

/// Kernel rows premultiplied by the beta trapezoid weights:
/// weighted(k, m) = H(alpha_k, beta_m) * w_m, likewise for the alpha derivative.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> weighted;
  std::vector<double> weighted_alpha_derivative;

  static KernelMatrix build(const KernelModel& model, const Grid1D& alpha);
  double operator()(std::size_t k, std::size_t m) const { return weighted[k * n + m]; }
  double derivative(std::size_t k, std::size_t m) const { return weighted_alpha_derivative[k * n + m]; }
};

/// Everything the forward problem needs at one resolution. The phantom lives on the P grid.
struct ForwardModel {
  GridSet grids;
  Phantom phantom;
  SourceModel source;
  KernelModel kernel;
  KernelMatrix kernel_matrix;

  static ForwardModel make(const GridSet& grids, Phantom phantom, const SourceModel& source,
                           const KernelModel& kernel);
  /// Ray sample spacing: min(h_x1, h_z)/2.
  double ray_spacing() const;
};

/// exp of the line integral of the attenuation along the segment from x_alpha to x.
/// The attenuation vanishes outside closed Omega, so the segment is clipped to Omega and
/// the clipped part integrated by the trapezoid rule with bilinear interpolation.
double attenuation_integral(Point x, double alpha, const Phantom& phantom, const Geometry& geometry,
                            double max_spacing);

/// Unscattered radiance u0(x, alpha) = (1/c(x, alpha)) int_L f(x(s) - x_alpha) ds.
double ballistic_term(Point x, double alpha, const Phantom& phantom, const Geometry& geometry,
                      const SourceModel& source, double max_spacing);

/// u0 on every P node; zero at the source point itself.
RadianceField ballistic_field(const ForwardModel& model);

/// The scattering integral operator of the forward integral equation applied to u (on P).
RadianceField scatter_apply(const RadianceField& u, const ForwardModel& model);

struct ForwardSolution {
  RadianceField u;
  RadianceField ballistic;
  std::size_t iterations = 0;
  std::vector<double> increments;  // max-norm of successive differences
};

/// Neumann-series iteration u <- u0 + K u from u = u0. Stops when the successive
/// max-norm difference is below tol. Throws ConvergenceError at max_iters.
ForwardSolution solve_forward(const ForwardModel& model, double tol = 1e-10, std::size_t max_iters = 200);

struct DirectSolution {
  RadianceField u;
  double residual = 0.0;  // |(I - K) u - u0|_inf
};

/// Dense collocation solve of (I - K) u = u0 by LU. Throws ConfigError above max_unknowns and
/// Error when the matrix is numerically singular.
DirectSolution solve_forward_direct(const ForwardModel& model, std::size_t max_unknowns = 10000);

}  // namespace rte
