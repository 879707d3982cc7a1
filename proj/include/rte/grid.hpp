#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace rte {

/// Closed uniform grid lo, lo + h, ..., lo + n*h.
struct Grid1D {
  double lo = 0.0;
  double h = 1.0;
  std::size_t n = 0;  // number of intervals

  /// Throws ConfigError unless (hi - lo)/h is an integer (to 1e-9 relative).
  static Grid1D over(double lo, double hi, double h);

  double node(std::size_t i) const { return lo + h * static_cast<double>(i); }
  double hi() const { return node(n); }
  std::size_t size() const { return n + 1; }
  double span() const { return h * static_cast<double>(n); }

  /// Trapezoid weights over the closed grid.
  std::vector<double> trapezoid_weights() const;

  /// Index of the node at coordinate x; throws if x is not a node.
  std::size_t index_of(double x) const;

  bool operator==(const Grid1D&) const = default;
};

struct Grid2 {
  Grid1D x1;
  Grid1D z;

  std::size_t nx() const { return x1.size(); }
  std::size_t nz() const { return z.size(); }
  std::size_t size() const { return nx() * nz(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx() + i; }
  bool operator==(const Grid2&) const = default;
};

/// Tensor grid in (x1, z, alpha). Storage is alpha-major so each alpha slice is a
/// contiguous (x1, z) image.
struct Grid3 {
  Grid1D x1;
  Grid1D z;
  Grid1D alpha;

  Grid2 spatial() const { return {x1, z}; }
  std::size_t nx() const { return x1.size(); }
  std::size_t nz() const { return z.size(); }
  std::size_t na() const { return alpha.size(); }
  std::size_t slice_size() const { return nx() * nz(); }
  std::size_t size() const { return slice_size() * na(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (k * nz() + j) * nx() + i;
  }
  bool operator==(const Grid3&) const = default;
};

/// Real function sampled on a Grid2.
class SpatialField {
 public:
  SpatialField() = default;
  explicit SpatialField(Grid2 grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}

  const Grid2& grid() const { return grid_; }
  double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  Grid2 grid_;
  std::vector<double> values_;
};

enum class Region { P, Omega };

/// Real function sampled on (spatial grid) x (alpha grid).
class RadianceField {
 public:
  RadianceField() = default;
  RadianceField(Grid3 grid, Region region, double fill = 0.0)
      : grid_(grid), region_(region), values_(grid.size(), fill) {}

  const Grid3& grid() const { return grid_; }
  Region region() const { return region_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    assert(i < grid_.nx() && j < grid_.nz() && k < grid_.na());
    return values_[grid_.index(i, j, k)];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    assert(i < grid_.nx() && j < grid_.nz() && k < grid_.na());
    return values_[grid_.index(i, j, k)];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> slice(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * grid_.slice_size(), grid_.slice_size());
  }
  std::span<double> slice(std::size_t k) {
    return std::span<double>(values_).subspan(k * grid_.slice_size(), grid_.slice_size());
  }

  double max_abs() const;
  RadianceField& operator+=(const RadianceField& other);
  RadianceField& operator-=(const RadianceField& other);
  RadianceField& operator*=(double s);

 private:
  Grid3 grid_;
  Region region_ = Region::P;
  std::vector<double> values_;
};

RadianceField operator+(RadianceField lhs, const RadianceField& rhs);
RadianceField operator-(RadianceField lhs, const RadianceField& rhs);
RadianceField operator*(double s, RadianceField f);

/// Max-norm of the difference of two fields on the same grid.
double max_abs_diff(const RadianceField& a, const RadianceField& b);

}  // namespace rte
