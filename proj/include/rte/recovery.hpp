#pragma once

#include "rte/forward.hpp"
#include "rte/grid.hpp"
#include "rte/inverse.hpp"
#include "rte/phantom.hpp"

namespace rte {

/// a = -(1/2d) int nu.grad p dalpha + (1/2d) int e^{-p} mu_s int G e^{p(x, beta)} dbeta dalpha on
/// every Omega node. grad p is centered in the interior and one-sided (second order) on the edges.
SpatialField recover_attenuation(const RadianceField& p, const SpatialField& mu_s, const KernelMatrix& kernel,
                                 const Geometry& geometry);

/// 1 + max(mu_a) / 5, with a negative maximum clamped to zero.
double computed_contrast(const SpatialField& mu_a);

struct Reconstruction {
  SpatialField a_comp;
  SpatialField mu_a_comp;
  double contrast = 1.0;
  double l2_rel_error = 0.0;
  double centroid_offset = 0.0;
};

Reconstruction reconstruct(const PairField& pair, const InverseContext& ctx);

struct Score {
  double l2_rel_error = 0.0;
  /// Distance between the centroid of {mu_a >= max/2} and the true mask centroid. Infinite
  /// when the reconstruction has no positive values.
  double centroid_offset = 0.0;
  double contrast = 1.0;
  double true_contrast = 1.0;
  /// |contrast - true_contrast| / true_contrast.
  double contrast_error = 0.0;
};

/// Compares mu_a_comp with a phantom sampled on the same grid.
Score score(const SpatialField& mu_a_comp, const Phantom& truth);

/// Fills the metric fields of a reconstruction from score().
void apply_score(Reconstruction& rec, const Phantom& truth);

}  // namespace rte
