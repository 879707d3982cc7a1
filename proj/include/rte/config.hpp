#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rte/boundary.hpp"
#include "rte/geometry.hpp"
#include "rte/inverse.hpp"
#include "rte/phantom.hpp"

namespace rte {

struct RunConfig {
  Geometry geometry;
  double sigma = 0.05;
  double c_g = 0.5;
  double mu_s_background = 5.0;
  Letter letter = Letter::A;
  double c_a = 5.0;
  double h_forward = 1.0 / 40.0;
  double h_inverse = 1.0 / 20.0;
  double lambda = 5.0;
  double gamma = 1e-3;
  double epsilon = 0.01;
  double delta = 0.0;
  std::uint64_t seed = 1;
  NeumannConvention neumann = NeumannConvention::Derived;
  double grad_tol = 1e-2;
  std::size_t max_iters = 20000;
  double rho_init = 1.0;
  double forward_tol = 1e-10;
  std::size_t forward_max_iters = 200;
  // verify
  std::size_t gradient_directions = 20;
  double gradient_h = 0.1;
  std::size_t convexity_pairs = 100;
  double convexity_radius = 10.0;
  std::size_t carleman_samples = 50;
  std::vector<double> carleman_lambdas{2.0, 5.0, 10.0};
  std::size_t smoothing_passes = 5;
  // not hashed
  std::filesystem::path out = "out";
  std::size_t workers = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  InversionConfig inversion() const;
  /// Sorted key=value lines of every hashed field, doubles with 17 significant digits.
  std::string canonical() const;
  /// FNV-1a of canonical(); `out` and `workers` do not enter.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Sets one field from its textual value. Throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Reads "key = value" lines; '#' starts a comment.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace rte
