#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rte/grid.hpp"
#include "rte/inverse.hpp"

namespace rte {

/// Free leaves the top trace as sampled. Clamped sets the top row to zero and row nz-2 to a quarter
/// of row nz-3, so u, d_x u and the one-sided d_z u all vanish on the top face.
enum class TopCondition { Free, Clamped };

/// Smoothed white noise on the Omega grid, zero on the bottom and side faces.
struct TestFunctionSample {
  SpatialField u;
  std::uint64_t seed = 0;
  std::size_t index = 0;
  std::size_t smoothness = 0;
  TopCondition top = TopCondition::Free;
};

/// Sample `index` of the "test_functions" stream: uniform noise on [-1, 1), `passes` rounds of
/// 5-point averaging, then zeroed on the bottom and side faces.
TestFunctionSample make_test_function(const Grid2& omega, std::uint64_t seed, std::size_t index,
                                      std::size_t passes = 5, TopCondition top = TopCondition::Free);

struct CarlemanSides {
  /// int (Lap u)^2 e^{2 lambda z^2}
  double lhs = 0.0;
  /// int (lambda |grad u|^2 + lambda^3 u^2) e^{2 lambda z^2}
  double interior = 0.0;
  /// lambda^3 (||u||^2_{H^1(top)} + ||d_z u||^2_{L2(top)}) e^{2 lambda b^2}
  double boundary = 0.0;
};

/// Trapezoid quadratures of the three Carleman terms. Derivatives are centered in the interior
/// and one-sided second order on the edges. Throws ConfigError for lambda < 1.
CarlemanSides carleman_sides(const SpatialField& u, double lambda);

struct CarlemanRow {
  double lambda = 0.0;
  double min_ratio = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

struct CarlemanReport {
  std::vector<CarlemanRow> rows;
  /// ratios[l][s] = lhs / (interior - boundary) for lambda l and sample s; NaN when excluded.
  std::vector<std::vector<double>> ratios;
};

/// min over samples of lhs / (interior - boundary) for each lambda, skipping samples whose
/// denominator is not positive. Throws DomainError when every sample is skipped for some lambda.
CarlemanReport empirical_carleman_constant(const Grid2& omega, std::size_t samples,
                                           const std::vector<double>& lambdas, std::uint64_t seed,
                                           std::size_t passes = 5, TopCondition top = TopCondition::Clamped);

struct ConvexityGap {
  double gap = 0.0;
  double lower_bound = 0.0;
};

/// gap = J(v2) - J(v1) - <grad J(v1), v2 - v1>, lower_bound = gamma * s_norm_sq(v2 - v1). Both
/// pairs must carry the same boundary values (ConfigError otherwise).
ConvexityGap convexity_gap(const PairField& v1, const PairField& v2, const BoundaryDataSet& data,
                           const InverseContext& ctx);

/// Random constraint-satisfying pair: initial guess plus a smoothed perturbation of the free nodes
/// scaled to s_norm(perturbation) = radius * t, t ~ U[0, 1). Draws from the "pairs" stream.
PairField random_constrained_pair(const BoundaryDataSet& data, const InverseContext& ctx, std::uint64_t seed,
                                  std::size_t index, double radius);

struct ConvexitySweep {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  /// min over pairs of gap - lower_bound
  double min_slack = 0.0;
  std::vector<ConvexityGap> records;
};

/// Gaps for `pairs` independent couples of random_constrained_pair samples (indices 2s, 2s+1).
ConvexitySweep convexity_sweep(const BoundaryDataSet& data, const InverseContext& ctx, std::size_t pairs,
                               std::uint64_t seed, double radius);

struct GradientCheck {
  std::size_t directions = 0;
  std::size_t failures = 0;
  /// max over directions of |fd - <grad J, h>| / max(1, |<grad J, h>|)
  double worst = 0.0;
};

/// Central-difference directional derivatives (J(v + tau h) - J(v - tau h)) / (2 tau) against
/// <grad J(v), h> for random free-node directions h ~ U[-1, 1) from the "directions" stream, at a
/// random constrained base point.
GradientCheck gradient_check(const BoundaryDataSet& data, const InverseContext& ctx, std::size_t directions,
                             std::uint64_t seed, double tau = 1e-5, double tol = 1e-5);

struct LipschitzReport {
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  std::size_t pairs = 0;
};

/// ||grad J(v1) - grad J(v2)|| / ||v1 - v2|| (Euclidean over free values) over consecutive
/// pairs of random constrained samples.
LipschitzReport gradient_lipschitz(const BoundaryDataSet& data, const InverseContext& ctx, std::size_t samples,
                                   std::uint64_t seed, double radius);

}  // namespace rte
