#pragma once

#include <cmath>
#include <functional>

#include "rte/boundary.hpp"
#include "rte/geometry.hpp"
#include "rte/grid.hpp"
#include "rte/inverse.hpp"

namespace rte::testing {

/// Omega grid over the default geometry with one step in every direction.
inline Grid3 omega_grid(double h, const Geometry& geo = {}) {
  return {Grid1D::over(-geo.B, geo.B, h), Grid1D::over(geo.a, geo.b, h), Grid1D::over(-geo.d, geo.d, h)};
}

using NodeFn = std::function<double(double x1, double z, double alpha)>;

/// Boundary data set with g1, g2 from analytic functions and g3, g4 on the top face.
inline BoundaryDataSet make_data(const Grid3& grid, const NodeFn& g1, const NodeFn& g2, const NodeFn& g3,
                                 const NodeFn& g4) {
  BoundaryDataSet data;
  const BoundaryLayout layout(grid);
  data.g = {layout, std::vector<double>(layout.size())};
  data.g1 = data.g;
  data.g2 = data.g;
  for (std::size_t k = 0; k < grid.na(); ++k)
    for (std::size_t b = 0; b < layout.count(); ++b) {
      const BoundaryNode& n = layout.nodes()[b];
      const double x = grid.x1.node(n.i), z = grid.z.node(n.j), a = grid.alpha.node(k);
      data.g1.values[layout.index(b, k)] = g1(x, z, a);
      data.g.values[layout.index(b, k)] = std::exp(g1(x, z, a));
      data.g2.values[layout.index(b, k)] = g2(x, z, a);
    }
  data.g3 = {grid, std::vector<double>(grid.nx() * grid.na())};
  data.g4 = data.g3;
  for (std::size_t k = 0; k < grid.na(); ++k)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      data.g3.at(i, k) = g3(grid.x1.node(i), grid.z.hi(), grid.alpha.node(k));
      data.g4.at(i, k) = g4(grid.x1.node(i), grid.z.hi(), grid.alpha.node(k));
    }
  return data;
}

inline BoundaryDataSet zero_data(const Grid3& grid) {
  const NodeFn zero = [](double, double, double) { return 0.0; };
  return make_data(grid, zero, zero, zero, zero);
}

inline InverseContext make_context(const Grid3& grid, double mu_s, double c_g = 0.5, InversionConfig config = {},
                                   const Geometry& geo = {}) {
  return InverseContext(grid, geo, SpatialField(grid.spatial(), mu_s), KernelModel{c_g, geo.d}, config);
}

/// Smooth nonlinear pair with the given boundary data enforced.
inline PairField smooth_pair(const BoundaryDataSet& data, const InverseContext& ctx, double amplitude = 0.3) {
  PairField v = initial_guess(data, ctx);
  std::vector<double> free = extract_free(v, ctx);
  for (std::size_t n = 0; n < free.size(); ++n) free[n] += amplitude * std::sin(0.37 * static_cast<double>(n) + 0.2);
  return apply_constraints(free, data, ctx);
}

}  // namespace rte::testing
