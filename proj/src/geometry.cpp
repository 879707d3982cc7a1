#include "rte/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rte/errors.hpp"

namespace rte {

double Vec2::norm() const { return std::hypot(x1, z); }

double Geometry::bbar() const { return std::max(B, d); }

void Geometry::validate() const {
  if (!(B > 0.0) || !(d > 0.0) || !(a > 0.0) || !(b > a)) {
    std::ostringstream msg;
    msg << "invalid geometry: need B, d > 0 and 0 < a < b (B=" << B << ", a=" << a << ", b=" << b
        << ", d=" << d << ")";
    throw ConfigError(msg.str());
  }
}

bool Geometry::in_closed_omega(Point x, double tol) const {
  return x.x1 >= -B - tol && x.x1 <= B + tol && x.z >= a - tol && x.z <= b + tol;
}

GridSet GridSet::build(const Geometry& geometry, double h_x1, double h_z, double h_alpha) {
  geometry.validate();
  GridSet g;
  g.geometry = geometry;
  const double bbar = geometry.bbar();
  g.domain.x1 = Grid1D::over(-bbar, bbar, h_x1);
  g.domain.z = Grid1D::over(0.0, geometry.b, h_z);
  g.domain.alpha = Grid1D::over(-geometry.d, geometry.d, h_alpha);
  g.omega.x1 = Grid1D::over(-geometry.B, geometry.B, h_x1);
  g.omega.z = Grid1D::over(geometry.a, geometry.b, h_z);
  g.omega.alpha = g.domain.alpha;
  g.omega_i0 = g.domain.x1.index_of(-geometry.B);
  g.omega_j0 = g.domain.z.index_of(geometry.a);
  return g;
}

Vec2 direction_vector(Point x, double alpha) {
  const double dx = x.x1 - alpha;
  const double r = std::hypot(dx, x.z);
  if (!(r > 0.0)) throw GeometryError("direction requested at its own source point");
  return {dx / r, x.z / r};
}

Vec2 direction_alpha_derivative(Point x, double alpha) {
  const double dx = x.x1 - alpha;
  const double r2 = dx * dx + x.z * x.z;
  if (!(r2 > 0.0)) throw GeometryError("direction derivative requested at its own source point");
  const double r3 = r2 * std::sqrt(r2);
  return {(-r2 + dx * dx) / r3, x.z * dx / r3};
}

double carleman_weight(double z, double lambda) { return std::exp(2.0 * lambda * z * z); }

LineQuadrature line_quadrature(Point x, double alpha, std::size_t n_samples) {
  if (n_samples < 2) throw ConfigError("line quadrature needs at least two samples");
  const Point src{alpha, 0.0};
  const double length = std::hypot(x.x1 - src.x1, x.z - src.z);
  const double step = length / static_cast<double>(n_samples - 1);
  LineQuadrature q;
  q.points.resize(n_samples);
  q.weights.assign(n_samples, step);
  q.weights.front() *= 0.5;
  q.weights.back() *= 0.5;
  for (std::size_t m = 0; m < n_samples; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(n_samples - 1);
    q.points[m] = {src.x1 + t * (x.x1 - src.x1), src.z + t * (x.z - src.z)};
  }
  q.points.back() = x;
  return q;
}

std::size_t samples_for_length(double length, double max_spacing) {
  const double cells = std::ceil(length / max_spacing - 1e-12);
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::max(cells, 1.0)) + 1);
}

double alpha_quadrature(std::span<const double> values, const Grid1D& alpha) {
  if (values.size() != alpha.size()) {
    std::ostringstream msg;
    msg << "alpha quadrature: expected " << alpha.size() << " values, got " << values.size();
    throw ConfigError(msg.str());
  }
  double interior = 0.0;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) interior += values[k];
  return alpha.h * (interior + 0.5 * (values.front() + values.back()));
}

std::optional<std::array<double, 2>> clip_to_omega(const Geometry& geometry, Point from, Point to) {
  // Liang-Barsky clipping against the closed box.
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = to.x1 - from.x1;
  const double dz = to.z - from.z;
  const std::array<double, 4> p{-dx, dx, -dz, dz};
  const std::array<double, 4> q{from.x1 + geometry.B, geometry.B - from.x1, from.z - geometry.a,
                                geometry.b - from.z};
  for (std::size_t s = 0; s < 4; ++s) {
    if (p[s] == 0.0) {
      if (q[s] < 0.0) return std::nullopt;
      continue;
    }
    const double r = q[s] / p[s];
    if (p[s] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (t0 > t1) return std::nullopt;
  return std::array<double, 2>{t0, t1};
}

BilinearStencil bilinear_stencil(const Grid2& grid, Point x) {
  auto locate = [](const Grid1D& g, double v, std::size_t& cell, double& frac) {
    double r = (v - g.lo) / g.h;
    r = std::clamp(r, 0.0, static_cast<double>(g.n));
    cell = std::min(static_cast<std::size_t>(r), g.n - 1);
    frac = r - static_cast<double>(cell);
  };
  std::size_t ci = 0, cj = 0;
  double fx = 0.0, fz = 0.0;
  locate(grid.x1, x.x1, ci, fx);
  locate(grid.z, x.z, cj, fz);
  BilinearStencil s;
  s.index = {grid.index(ci, cj), grid.index(ci + 1, cj), grid.index(ci, cj + 1),
             grid.index(ci + 1, cj + 1)};
  s.weight = {(1.0 - fx) * (1.0 - fz), fx * (1.0 - fz), (1.0 - fx) * fz, fx * fz};
  return s;
}

double bilinear(const Grid2& grid, std::span<const double> slice, Point x) {
  const BilinearStencil s = bilinear_stencil(grid, x);
  double v = 0.0;
  for (std::size_t c = 0; c < 4; ++c) v += s.weight[c] * slice[s.index[c]];
  return v;
}

}  // namespace rte
