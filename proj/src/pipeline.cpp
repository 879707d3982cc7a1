#include "rte/pipeline.hpp"

#include <algorithm>

#include "rte/errors.hpp"

namespace rte {

namespace {

KernelModel kernel_of(const RunConfig& c) { return KernelModel{c.c_g, c.geometry.d}; }

InverseContext context_for(const RunConfig& c, const Grid3& omega) {
  const Phantom on_omega = make_phantom(c.letter, c.c_a, c.geometry, omega.spatial(), c.mu_s_background);
  return InverseContext(omega, c.geometry, on_omega.mu_s, kernel_of(c), c.inversion());
}

}  // namespace

ForwardRun run_forward(const RunConfig& c) {
  c.validate();
  ForwardRun run;
  run.fine = GridSet::build(c.geometry, c.h_forward, c.h_forward, c.h_forward);
  run.coarse = GridSet::build(c.geometry, c.h_inverse, c.h_inverse, c.h_inverse);
  run.phantom = make_phantom(c.letter, c.c_a, c.geometry, run.fine.domain.spatial(), c.mu_s_background);
  const ForwardModel model = ForwardModel::make(run.fine, run.phantom, SourceModel::make(c.sigma), kernel_of(c));
  run.solution = solve_forward(model, c.forward_tol, c.forward_max_iters);
  const BoundaryDataSet fine_data =
      build_boundary_data(run.solution.u, run.fine, run.phantom, model.kernel_matrix, c.delta, c.seed, c.neumann);
  run.data = restrict_to(fine_data, run.coarse.omega);
  return run;
}

Grid3 inverse_grid(const RunConfig& c) {
  return GridSet::build(c.geometry, c.h_inverse, c.h_inverse, c.h_inverse).omega;
}

InverseRun run_inverse(const RunConfig& c, const BoundaryDataSet& data) {
  c.validate();
  const Grid3 omega = inverse_grid(c);
  if (!(data.grid() == omega)) throw ConfigError("boundary data grid does not match the configured inverse grid");
  const InverseContext ctx = context_for(c, omega);
  InverseRun run;
  run.state = minimize(data, ctx);
  run.reconstruction = reconstruct(run.state.pair, ctx);
  const Phantom truth = make_phantom(c.letter, c.c_a, c.geometry, omega.spatial(), c.mu_s_background);
  apply_score(run.reconstruction, truth);
  run.score = score(run.reconstruction.mu_a_comp, truth);
  return run;
}

VerifyRun run_verify(const RunConfig& c) {
  c.validate();
  VerifyRun run;
  {
    RunConfig small = c;
    small.h_inverse = c.gradient_h;
    small.h_forward = c.gradient_h / 2.0;
    const ForwardRun fwd = run_forward(small);
    const InverseContext ctx = context_for(small, fwd.data.grid());
    run.gradient = gradient_check(fwd.data, ctx, c.gradient_directions, c.seed);
  }
  const ForwardRun fwd = run_forward(c);
  const InverseContext ctx = context_for(c, fwd.data.grid());
  run.convexity = convexity_sweep(fwd.data, ctx, c.convexity_pairs, c.seed, c.convexity_radius);
  run.lipschitz = gradient_lipschitz(fwd.data, ctx, 10, c.seed, c.convexity_radius);
  try {
    run.carleman = empirical_carleman_constant(fwd.data.grid().spatial(), c.carleman_samples, c.carleman_lambdas,
                                               c.seed, c.smoothing_passes);
  } catch (const DomainError& e) {
    run.carleman_error = e.what();
  }
  return run;
}

}  // namespace rte
