#pragma once

#include <algorithm>

#include "rte/boundary.hpp"
#include "rte/carleman.hpp"
#include "rte/config.hpp"
#include "rte/forward.hpp"
#include "rte/inverse.hpp"
#include "rte/phantom.hpp"
#include "rte/recovery.hpp"

namespace rte {

struct ForwardRun {
  GridSet fine;
  GridSet coarse;
  Phantom phantom;  // on the fine P grid
  ForwardSolution solution;
  /// Boundary data differentiated on the fine grid, then restricted to the inverse grid.
  BoundaryDataSet data;
};

/// phantom -> solve_forward -> boundary data at h_forward -> restriction to h_inverse.
ForwardRun run_forward(const RunConfig& config);

struct InverseRun {
  InversionState state;
  Reconstruction reconstruction;
  Score score;
};

/// Omega grid of the inverse step.
Grid3 inverse_grid(const RunConfig& config);

/// initial_guess -> minimize -> recover_attenuation -> score. Throws ConfigError when the data
/// grid is not the config's inverse grid.
InverseRun run_inverse(const RunConfig& config, const BoundaryDataSet& data);

struct VerifyRun {
  GradientCheck gradient;
  ConvexitySweep convexity;
  CarlemanReport carleman;
  std::string carleman_error;  // set when the sweep was degenerate
  LipschitzReport lipschitz;
  bool passed() const {
    return gradient.failures == 0 && convexity.violations == 0 && carleman_error.empty() &&
           std::all_of(carleman.rows.begin(), carleman.rows.end(), [](const CarlemanRow& r) { return r.min_ratio > 0.0; });
  }
};

/// Gradient check on the gradient_h grid, convexity sweep on the inverse grid, Carleman sweep on
/// the inverse Omega grid.
VerifyRun run_verify(const RunConfig& config);

}  // namespace rte
