#include "rte/phantom.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <variant>

#include "rte/errors.hpp"

namespace rte {

namespace {

// Stroke shapes, in offsets from the letter-box center (0, (a + b)/2).
struct Rect {
  double x0, x1, z0, z1;
};
struct Quad {  // convex, counter-clockwise
  std::array<Point, 4> v;
};
struct Arc {  // annulus minus a gap centered at gap_center (radians)
  double cx, cz, r_in, r_out, gap_center, gap_half;
};
using Stroke = std::variant<Rect, Quad, Arc>;

constexpr double kTol = 1e-9;

const std::vector<Stroke>& strokes(Letter letter) {
  using std::numbers::pi;
  static const std::vector<Stroke> a_strokes{
      Rect{-0.35, -0.25, -0.30, 0.30},  // left leg
      Rect{0.25, 0.35, -0.30, 0.30},    // right leg
      Rect{-0.35, 0.35, 0.20, 0.30},    // top bar
      Rect{-0.35, 0.35, -0.05, 0.05},   // crossbar
  };
  static const std::vector<Stroke> omega_strokes{
      Arc{0.0, 0.05, 0.15, 0.25, -pi / 2.0, 40.0 * pi / 180.0},
      Rect{-0.20, -0.10, -0.30, -0.10},  // legs
      Rect{0.10, 0.20, -0.30, -0.10},
      Rect{-0.35, -0.10, -0.30, -0.20},  // feet
      Rect{0.10, 0.35, -0.30, -0.20},
  };
  static const std::vector<Stroke> sz_strokes{
      // S
      Rect{-0.35, -0.05, 0.20, 0.30},
      Rect{-0.35, -0.25, -0.05, 0.30},
      Rect{-0.35, -0.05, -0.05, 0.05},
      Rect{-0.15, -0.05, -0.30, 0.05},
      Rect{-0.35, -0.05, -0.30, -0.20},
      // Z
      Rect{0.05, 0.35, 0.20, 0.30},
      Rect{0.05, 0.35, -0.30, -0.20},
      Quad{{Point{0.05, -0.20}, Point{0.15, -0.20}, Point{0.35, 0.20}, Point{0.25, 0.20}}},
  };
  static const std::vector<Stroke> none;
  switch (letter) {
    case Letter::A: return a_strokes;
    case Letter::Omega: return omega_strokes;
    case Letter::SZ: return sz_strokes;
    case Letter::None: return none;
  }
  return none;
}

bool contains(const Rect& r, Point p) {
  return p.x1 >= r.x0 - kTol && p.x1 <= r.x1 + kTol && p.z >= r.z0 - kTol && p.z <= r.z1 + kTol;
}

bool contains(const Quad& q, Point p) {
  for (std::size_t e = 0; e < 4; ++e) {
    const Point& u = q.v[e];
    const Point& w = q.v[(e + 1) % 4];
    const double cross = (w.x1 - u.x1) * (p.z - u.z) - (w.z - u.z) * (p.x1 - u.x1);
    if (cross < -kTol) return false;
  }
  return true;
}

bool contains(const Arc& a, Point p) {
  const double dx = p.x1 - a.cx;
  const double dz = p.z - a.cz;
  const double r = std::hypot(dx, dz);
  if (r < a.r_in - kTol || r > a.r_out + kTol) return false;
  const double theta = std::atan2(dz, dx);
  double off = std::remainder(theta - a.gap_center, 2.0 * std::numbers::pi);
  return std::abs(off) >= a.gap_half;
}

}  // namespace

Letter parse_letter(std::string_view tag) {
  std::string up(tag);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "A") return Letter::A;
  if (up == "OMEGA") return Letter::Omega;
  if (up == "SZ") return Letter::SZ;
  if (up == "NONE") return Letter::None;
  throw ConfigError("unknown letter tag '" + std::string(tag) + "' (expected A, OMEGA, SZ or NONE)");
}

std::string to_string(Letter letter) {
  switch (letter) {
    case Letter::A: return "A";
    case Letter::Omega: return "OMEGA";
    case Letter::SZ: return "SZ";
    case Letter::None: return "NONE";
  }
  return "NONE";
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

std::size_t Mask::components() const {
  std::vector<std::uint8_t> seen(inside.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t j = 0; j < grid.nz(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t start = grid.index(i, j);
      if (!inside[start] || seen[start]) continue;
      ++count;
      seen[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        const std::size_t ci = n % grid.nx();
        const std::size_t cj = n / grid.nx();
        auto visit = [&](std::size_t ni, std::size_t nj) {
          const std::size_t m = grid.index(ni, nj);
          if (inside[m] && !seen[m]) {
            seen[m] = 1;
            stack.push_back(m);
          }
        };
        if (ci > 0) visit(ci - 1, cj);
        if (ci + 1 < grid.nx()) visit(ci + 1, cj);
        if (cj > 0) visit(ci, cj - 1);
        if (cj + 1 < grid.nz()) visit(ci, cj + 1);
      }
    }
  }
  return count;
}

bool letter_contains(Letter letter, const Geometry& geometry, Point x) {
  const Point local{x.x1, x.z - 0.5 * (geometry.a + geometry.b)};
  for (const Stroke& s : strokes(letter)) {
    const bool hit = std::visit([&](const auto& shape) { return contains(shape, local); }, s);
    if (hit) return geometry.in_closed_omega(x, 0.0);
  }
  return false;
}

Mask letter_mask(Letter letter, const Geometry& geometry, const Grid2& grid) {
  Mask m{grid, std::vector<std::uint8_t>(grid.size(), 0)};
  for (std::size_t j = 0; j < grid.nz(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      m.inside[grid.index(i, j)] =
          letter_contains(letter, geometry, {grid.x1.node(i), grid.z.node(j)}) ? 1 : 0;
  return m;
}

Phantom make_phantom(Letter letter, double c_a, const Geometry& geometry, const Grid2& grid,
                     double mu_s_background) {
  if (letter != Letter::None && !(c_a > 0.0)) throw ConfigError("inclusion amplitude c_a must be > 0");
  if (letter == Letter::None && c_a < 0.0) throw ConfigError("inclusion amplitude c_a must be >= 0");
  if (mu_s_background < 0.0) throw ConfigError("scattering background must be >= 0");
  Phantom ph;
  ph.grid = grid;
  ph.c_a = c_a;
  ph.mu_s_background = mu_s_background;
  ph.mask = letter_mask(letter, geometry, grid);
  ph.mu_a = SpatialField(grid);
  ph.mu_s = SpatialField(grid);
  ph.attenuation = SpatialField(grid);
  for (std::size_t j = 0; j < grid.nz(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const Point x{grid.x1.node(i), grid.z.node(j)};
      if (!geometry.in_closed_omega(x, 1e-9)) continue;
      ph.mu_s(i, j) = mu_s_background;
      ph.mu_a(i, j) = ph.mask(i, j) ? c_a : 0.0;
      ph.attenuation(i, j) = ph.mu_a(i, j) + ph.mu_s(i, j);
    }
  }
  return ph;
}

double true_contrast(double c_a, double mu_s_background) { return 1.0 + c_a / mu_s_background; }

}  // namespace rte
