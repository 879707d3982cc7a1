#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rte/geometry.hpp"
#include "rte/grid.hpp"

namespace rte {

enum class Letter { A, Omega, SZ, None };

/// Parses "A", "OMEGA", "SZ" or "NONE" (case-insensitive). Throws ConfigError otherwise.
Letter parse_letter(std::string_view tag);
std::string to_string(Letter letter);

/// Boolean image on a Grid2; 1 inside the inclusion.
struct Mask {
  Grid2 grid;
  std::vector<std::uint8_t> inside;

  bool operator()(std::size_t i, std::size_t j) const { return inside[grid.index(i, j)] != 0; }
  std::size_t count() const;
  /// Number of 4-connected components of the true set.
  std::size_t components() const;
};

/// True when the point lies on a stroke of the letter. Strokes live in the box
/// [-0.35, 0.35] x [c - 0.3, c + 0.3], c = (a + b)/2, with stroke width 0.1.
bool letter_contains(Letter letter, const Geometry& geometry, Point x);

Mask letter_mask(Letter letter, const Geometry& geometry, const Grid2& grid);

struct Phantom {
  Grid2 grid;
  SpatialField mu_a;
  SpatialField mu_s;
  SpatialField attenuation;
  Mask mask;
  double c_a = 0.0;
  double mu_s_background = 5.0;
};

/// mu_s = mu_s_background on closed-Omega nodes, mu_a = c_a on the letter, a = mu_a + mu_s.
/// Throws ConfigError unless c_a > 0 (Letter::None accepts any c_a >= 0).
Phantom make_phantom(Letter letter, double c_a, const Geometry& geometry, const Grid2& grid,
                     double mu_s_background = 5.0);

/// Inclusion/background contrast 1 + c_a / mu_s_background.
double true_contrast(double c_a, double mu_s_background = 5.0);

}  // namespace rte
