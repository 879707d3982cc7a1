#include "rte/boundary.hpp"

#include <cmath>
#include <sstream>

#include "rte/errors.hpp"
#include "rte/random.hpp"

namespace rte {

std::string_view to_string(Face face) {
  switch (face) {
    case Face::Bottom: return "bottom";
    case Face::Top: return "top";
    case Face::Left: return "left";
    case Face::Right: return "right";
  }
  return "bottom";
}

Face parse_face(std::string_view tag) {
  if (tag == "bottom") return Face::Bottom;
  if (tag == "top") return Face::Top;
  if (tag == "left") return Face::Left;
  if (tag == "right") return Face::Right;
  throw ConfigError("unknown face tag '" + std::string(tag) + "'");
}

NeumannConvention parse_neumann_convention(std::string_view tag) {
  if (tag == "derived") return NeumannConvention::Derived;
  if (tag == "derived_zero_attenuation") return NeumannConvention::DerivedZeroAttenuation;
  if (tag == "printed") return NeumannConvention::Printed;
  throw ConfigError("unknown Neumann convention '" + std::string(tag) +
                    "' (expected derived, derived_zero_attenuation or printed)");
}

std::string_view to_string(NeumannConvention convention) {
  switch (convention) {
    case NeumannConvention::Derived: return "derived";
    case NeumannConvention::DerivedZeroAttenuation: return "derived_zero_attenuation";
    case NeumannConvention::Printed: return "printed";
  }
  return "derived";
}

BoundaryLayout::BoundaryLayout(const Grid3& omega)
    : grid_(omega), lookup_(omega.slice_size(), -1) {
  const std::size_t nx = omega.nx();
  const std::size_t nz = omega.nz();
  if (nx < 3 || nz < 3) throw ConfigError("Omega grid needs at least 3 nodes per direction");
  for (std::size_t i = 0; i < nx; ++i) nodes_.push_back({Face::Bottom, i, 0});
  for (std::size_t i = 0; i < nx; ++i) nodes_.push_back({Face::Top, i, nz - 1});
  for (std::size_t j = 1; j + 1 < nz; ++j) nodes_.push_back({Face::Left, 0, j});
  for (std::size_t j = 1; j + 1 < nz; ++j) nodes_.push_back({Face::Right, nx - 1, j});
  for (std::size_t b = 0; b < nodes_.size(); ++b)
    lookup_[nodes_[b].j * nx + nodes_[b].i] = static_cast<std::ptrdiff_t>(b);
}

double BoundaryTrace::at(std::size_t i, std::size_t j, std::size_t k) const {
  const std::ptrdiff_t b = layout.node_at(i, j);
  assert(b >= 0);
  return values[layout.index(static_cast<std::size_t>(b), k)];
}

double& BoundaryTrace::at(std::size_t i, std::size_t j, std::size_t k) {
  const std::ptrdiff_t b = layout.node_at(i, j);
  assert(b >= 0);
  return values[layout.index(static_cast<std::size_t>(b), k)];
}

BoundaryTrace extract_boundary(const RadianceField& u, const GridSet& grids) {
  if (!(u.grid() == grids.domain)) throw ConfigError("extract_boundary: field is not on the P grid");
  BoundaryTrace g{BoundaryLayout(grids.omega), {}};
  g.values.resize(g.layout.size());
  for (std::size_t k = 0; k < grids.omega.na(); ++k) {
    for (std::size_t b = 0; b < g.layout.count(); ++b) {
      const BoundaryNode& n = g.layout.nodes()[b];
      g.values[g.layout.index(b, k)] = u(grids.omega_i0 + n.i, grids.omega_j0 + n.j, k);
    }
  }
  return g;
}

BoundaryTrace add_noise(const BoundaryTrace& g, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw ConfigError("noise level delta must be >= 0");
  BoundaryTrace out = g;
  if (delta == 0.0) return out;
  const RandomStream zeta(seed, "noise");
  for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] *= 1.0 + delta * zeta.uniform(n);
  return out;
}

BoundaryTrace log_data(const BoundaryTrace& g) {
  BoundaryTrace out = g;
  const std::size_t nb = g.layout.count();
  for (std::size_t n = 0; n < g.values.size(); ++n) {
    if (!(g.values[n] > 0.0)) {
      const BoundaryNode& node = g.layout.nodes()[n % nb];
      std::ostringstream msg;
      msg << "log of nonpositive boundary sample " << g.values[n] << " at " << to_string(node.face) << " node (i="
          << node.i << ", j=" << node.j << ", k=" << n / nb << ")";
      throw DomainError(msg.str());
    }
    out.values[n] = std::log(g.values[n]);
  }
  return out;
}

void alpha_difference(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  if (n < 3) throw ConfigError("alpha differencing needs at least 3 nodes");
  assert(out.size() == n);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
}

BoundaryTrace alpha_derivative(const BoundaryTrace& g) {
  const Grid3& grid = g.layout.grid();
  const std::size_t na = grid.na();
  const std::size_t nb = g.layout.count();
  BoundaryTrace out = g;
  std::vector<double> line(na), diff(na);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < na; ++k) line[k] = g.values[g.layout.index(b, k)];
    alpha_difference(line, grid.alpha.h, diff);
    for (std::size_t k = 0; k < na; ++k) out.values[g.layout.index(b, k)] = diff[k] / line[k];
  }
  return out;
}

TopTrace neumann_g3(const BoundaryTrace& g, const BoundaryTrace& g1, std::span<const double> mu_s_top,
                    std::span<const double> attenuation_top, const KernelMatrix& kernel, const Geometry& geometry,
                    NeumannConvention convention) {
  const Grid3& grid = g.layout.grid();
  const std::size_t nx = grid.nx();
  const std::size_t na = grid.na();
  const std::size_t top = grid.nz() - 1;
  if (mu_s_top.size() != nx || attenuation_top.size() != nx || kernel.n != na)
    throw ConfigError("neumann_g3: coefficient or kernel size does not match the grid");
  TopTrace g3{grid, std::vector<double>(nx * na)};
  const double h = grid.x1.h;
  for (std::size_t k = 0; k < na; ++k) {
    const double alpha = grid.alpha.node(k);
    for (std::size_t i = 0; i < nx; ++i) {
      double w_x;
      if (i == 0) {
        w_x = (-3.0 * g1.at(0, top, k) + 4.0 * g1.at(1, top, k) - g1.at(2, top, k)) / (2.0 * h);
      } else if (i + 1 == nx) {
        w_x = (3.0 * g1.at(i, top, k) - 4.0 * g1.at(i - 1, top, k) + g1.at(i - 2, top, k)) / (2.0 * h);
      } else {
        w_x = (g1.at(i + 1, top, k) - g1.at(i - 1, top, k)) / (2.0 * h);
      }
      double integral = 0.0;
      for (std::size_t m = 0; m < na; ++m) integral += kernel(k, m) * g.at(i, top, m);
      const double scatter = mu_s_top[i] / g.at(i, top, k) * integral;
      const Vec2 nu = direction_vector({grid.x1.node(i), geometry.b}, alpha);
      double value = 0.0;
      switch (convention) {
        case NeumannConvention::Derived:
          value = (-nu.x1 * w_x - attenuation_top[i] + scatter) / nu.z;
          break;
        case NeumannConvention::DerivedZeroAttenuation:
          value = (-nu.x1 * w_x + scatter) / nu.z;
          break;
        case NeumannConvention::Printed:
          value = -(nu.x1 * w_x + scatter) / nu.z;
          break;
      }
      g3.at(i, k) = value;
    }
  }
  return g3;
}

TopTrace neumann_g4(const TopTrace& g3) {
  const std::size_t nx = g3.grid.nx();
  const std::size_t na = g3.grid.na();
  TopTrace g4{g3.grid, std::vector<double>(nx * na)};
  std::vector<double> line(na), diff(na);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t k = 0; k < na; ++k) line[k] = g3.at(i, k);
    alpha_difference(line, g3.grid.alpha.h, diff);
    for (std::size_t k = 0; k < na; ++k) g4.at(i, k) = diff[k];
  }
  return g4;
}

BoundaryDataSet build_boundary_data(const RadianceField& u, const GridSet& grids, const Phantom& phantom,
                                    const KernelMatrix& kernel, double delta, std::uint64_t seed,
                                    NeumannConvention convention) {
  if (!(phantom.grid == grids.domain.spatial())) throw ConfigError("phantom must be sampled on the P grid");
  BoundaryDataSet data;
  data.noise_delta = delta;
  data.seed = seed;
  data.g = add_noise(extract_boundary(u, grids), delta, seed);
  data.g1 = log_data(data.g);
  data.g2 = alpha_derivative(data.g);
  const std::size_t nx = grids.omega.nx();
  const std::size_t jt = grids.omega_j0 + grids.omega.nz() - 1;
  std::vector<double> mu_s_top(nx), att_top(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    mu_s_top[i] = phantom.mu_s(grids.omega_i0 + i, jt);
    att_top[i] = phantom.attenuation(grids.omega_i0 + i, jt);
  }
  data.g3 = neumann_g3(data.g, data.g1, mu_s_top, att_top, kernel, grids.geometry, convention);
  data.g4 = neumann_g4(data.g3);
  return data;
}

BoundaryDataSet restrict_to(const BoundaryDataSet& data, const Grid3& coarse) {
  const Grid3& fine = data.grid();
  auto ratio = [](const Grid1D& f, const Grid1D& c) {
    const double r = c.h / f.h;
    const double rr = std::round(r);
    if (std::abs(r - rr) > 1e-9 || rr < 1.0 || std::abs(c.lo - f.lo) > 1e-12 || std::abs(c.hi() - f.hi()) > 1e-9)
      throw ConfigError("restrict_to: coarse grid nodes are not a subset of the data grid");
    return static_cast<std::size_t>(rr);
  };
  const std::size_t rx = ratio(fine.x1, coarse.x1);
  const std::size_t rz = ratio(fine.z, coarse.z);
  const std::size_t ra = ratio(fine.alpha, coarse.alpha);
  BoundaryDataSet out;
  out.noise_delta = data.noise_delta;
  out.seed = data.seed;
  const BoundaryLayout layout(coarse);
  auto restrict_trace = [&](const BoundaryTrace& t) {
    BoundaryTrace c{layout, std::vector<double>(layout.size())};
    for (std::size_t k = 0; k < coarse.na(); ++k)
      for (std::size_t b = 0; b < layout.count(); ++b) {
        const BoundaryNode& n = layout.nodes()[b];
        c.values[layout.index(b, k)] = t.at(n.i * rx, n.j * rz, k * ra);
      }
    return c;
  };
  auto restrict_top = [&](const TopTrace& t) {
    TopTrace c{coarse, std::vector<double>(coarse.nx() * coarse.na())};
    for (std::size_t k = 0; k < coarse.na(); ++k)
      for (std::size_t i = 0; i < coarse.nx(); ++i) c.at(i, k) = t.at(i * rx, k * ra);
    return c;
  };
  out.g = restrict_trace(data.g);
  out.g1 = restrict_trace(data.g1);
  out.g2 = restrict_trace(data.g2);
  out.g3 = restrict_top(data.g3);
  out.g4 = restrict_top(data.g4);
  return out;
}

}  // namespace rte
