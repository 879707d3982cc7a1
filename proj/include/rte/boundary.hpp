#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rte/forward.hpp"
#include "rte/grid.hpp"

namespace rte {

/// Faces of the Omega boundary: Bottom is z = a, Top is z = b, Left/Right are x1 = -B/+B.
/// Corner nodes belong to Bottom/Top.
enum class Face { Bottom, Top, Left, Right };

std::string_view to_string(Face face);
Face parse_face(std::string_view tag);

struct BoundaryNode {
  Face face;
  std::size_t i;
  std::size_t j;
};

/// Canonical enumeration of the boundary nodes of an Omega grid: bottom row, top row, then
/// left and right columns without corners.
class BoundaryLayout {
 public:
  BoundaryLayout() = default;
  explicit BoundaryLayout(const Grid3& omega);

  const Grid3& grid() const { return grid_; }
  const std::vector<BoundaryNode>& nodes() const { return nodes_; }
  std::size_t count() const { return nodes_.size(); }
  /// Flat index of (boundary node b, alpha node k).
  std::size_t index(std::size_t b, std::size_t k) const { return k * count() + b; }
  std::size_t size() const { return count() * grid_.na(); }
  /// Boundary-node number of spatial node (i, j), or -1 for interior nodes.
  std::ptrdiff_t node_at(std::size_t i, std::size_t j) const { return lookup_[j * grid_.nx() + i]; }
  bool operator==(const BoundaryLayout& o) const { return grid_ == o.grid_; }

 private:
  Grid3 grid_;
  std::vector<BoundaryNode> nodes_;
  std::vector<std::ptrdiff_t> lookup_;
};

/// Samples of a function on (boundary of Omega) x (alpha grid).
struct BoundaryTrace {
  BoundaryLayout layout;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j, std::size_t k) const;
  double& at(std::size_t i, std::size_t j, std::size_t k);
};

/// Samples on the top face z = b (all nx nodes) x alpha grid, index k * nx + i.
struct TopTrace {
  Grid3 grid;
  std::vector<double> values;

  double at(std::size_t i, std::size_t k) const { return values[k * grid.nx() + i]; }
  double& at(std::size_t i, std::size_t k) { return values[k * grid.nx() + i]; }
};

/// Sign convention for the top-face Neumann datum g3.
enum class NeumannConvention {
  /// From the log-transformed transport equation at z = b, keeping the boundary attenuation:
  /// g3 = (-nu_1 w_x1 - a + (mu_s/g) int G g dbeta) / nu_n, with a = mu_s on the top face.
  Derived,
  /// The same without the attenuation term (a taken as zero on the top face).
  DerivedZeroAttenuation,
  /// g3 = -(nu_1 w_x1 + (mu_s/g) int G g dbeta) / nu_n.
  Printed,
};

NeumannConvention parse_neumann_convention(std::string_view tag);
std::string_view to_string(NeumannConvention convention);

struct BoundaryDataSet {
  BoundaryTrace g;
  BoundaryTrace g1;
  BoundaryTrace g2;
  TopTrace g3;
  TopTrace g4;
  double noise_delta = 0.0;
  std::uint64_t seed = 0;

  const Grid3& grid() const { return g.layout.grid(); }
};

/// Restriction of a P-grid field to the boundary of Omega.
BoundaryTrace extract_boundary(const RadianceField& u, const GridSet& grids);

/// g * (1 + delta * zeta), zeta ~ U[0, 1) drawn per (node, alpha) from the "noise" stream.
BoundaryTrace add_noise(const BoundaryTrace& g, double delta, std::uint64_t seed);

/// Elementwise natural log. Throws DomainError naming the first nonpositive node.
BoundaryTrace log_data(const BoundaryTrace& g);

/// Second-order alpha derivative of samples on a uniform grid (one-sided at the ends).
void alpha_difference(std::span<const double> values, double h, std::span<double> out);

/// g2 = g_alpha / g with second-order differences in alpha.
BoundaryTrace alpha_derivative(const BoundaryTrace& g);

/// Top-face Neumann datum g3 = d_z ln u at z = b. w_x1 is differenced from g1 along the top
/// face; mu_s_top and attenuation_top are the coefficient values on the top-face nodes.
TopTrace neumann_g3(const BoundaryTrace& g, const BoundaryTrace& g1, std::span<const double> mu_s_top,
                    std::span<const double> attenuation_top, const KernelMatrix& kernel,
                    const Geometry& geometry, NeumannConvention convention = NeumannConvention::Derived);

/// g4 = alpha derivative of g3 (same stencil as alpha_derivative).
TopTrace neumann_g4(const TopTrace& g3);

/// Full chain g -> noise -> g1, g2, g3, g4 on the Omega grid of `grids`.
BoundaryDataSet build_boundary_data(const RadianceField& u, const GridSet& grids, const Phantom& phantom,
                                    const KernelMatrix& kernel, double delta, std::uint64_t seed,
                                    NeumannConvention convention = NeumannConvention::Derived);

/// Subsamples a data set onto a coarser Omega grid whose nodes are a subset of the data grid.
BoundaryDataSet restrict_to(const BoundaryDataSet& data, const Grid3& coarse);

}  // namespace rte
