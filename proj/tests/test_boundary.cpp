#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "doctest.h"
#include "rte/boundary.hpp"
#include "rte/errors.hpp"
#include "support.hpp"

using namespace rte;

namespace {

struct Synthetic {
  GridSet grids;
  ForwardModel model;
  ForwardSolution solution;
};

Synthetic synthetic(double h, Letter letter, double c_a, double mu_s = 5.0) {
  const Geometry geo;
  const GridSet gs = GridSet::build(geo, h, h, h);
  ForwardModel m = ForwardModel::make(gs, make_phantom(letter, c_a, geo, gs.domain.spatial(), mu_s),
                                      SourceModel::make(0.05), KernelModel{0.5, geo.d});
  ForwardSolution sol = solve_forward(m);
  return {gs, std::move(m), std::move(sol)};
}

BoundaryTrace trace_from(const Grid3& grid, const testing::NodeFn& f) {
  BoundaryTrace t{BoundaryLayout(grid), {}};
  t.values.resize(t.layout.size());
  for (std::size_t k = 0; k < grid.na(); ++k)
    for (std::size_t b = 0; b < t.layout.count(); ++b) {
      const BoundaryNode& n = t.layout.nodes()[b];
      t.values[t.layout.index(b, k)] = f(grid.x1.node(n.i), grid.z.node(n.j), grid.alpha.node(k));
    }
  return t;
}

/// Max deviation of g3 and g4 from one-sided z-differences of ln u on the top face.
std::pair<double, double> neumann_oracle_error(const Synthetic& s, const BoundaryDataSet& d) {
  const GridSet& gs = s.grids;
  const double h = gs.h_z();
  const std::size_t jt = gs.omega_j0 + gs.omega.nz() - 1;
  const std::size_t na = gs.omega.na();
  double e3 = 0.0, e4 = 0.0;
  for (std::size_t i = 0; i < gs.omega.nx(); ++i) {
    std::vector<double> dz(na);
    for (std::size_t k = 0; k < na; ++k) {
      auto lu = [&](std::size_t j) { return std::log(s.solution.u(gs.omega_i0 + i, j, k)); };
      dz[k] = (3.0 * lu(jt) - 4.0 * lu(jt - 1) + lu(jt - 2)) / (2.0 * h);
      e3 = std::max(e3, std::abs(d.g3.at(i, k) - dz[k]));
    }
    for (std::size_t k = 0; k < na; ++k) {
      double dza;
      if (k == 0) dza = (-3.0 * dz[0] + 4.0 * dz[1] - dz[2]) / (2.0 * h);
      else if (k + 1 == na) dza = (3.0 * dz[k] - 4.0 * dz[k - 1] + dz[k - 2]) / (2.0 * h);
      else dza = (dz[k + 1] - dz[k - 1]) / (2.0 * h);
      e4 = std::max(e4, std::abs(d.g4.at(i, k) - dza));
    }
  }
  return {e3, e4};
}

}  // namespace

TEST_SUITE("boundary") {

TEST_CASE("boundary layout lists every boundary node once") {
  const Grid3 g = testing::omega_grid(0.1);
  const BoundaryLayout layout(g);
  CHECK(layout.count() == 2 * g.nx() + 2 * (g.nz() - 2));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const BoundaryNode& n : layout.nodes()) {
    CHECK(seen.insert({n.i, n.j}).second);
    CHECK((n.i == 0 || n.j == 0 || n.i + 1 == g.nx() || n.j + 1 == g.nz()));
  }
  CHECK(layout.nodes()[layout.node_at(0, 0)].face == Face::Bottom);
  CHECK(layout.nodes()[layout.node_at(g.nx() - 1, g.nz() - 1)].face == Face::Top);
  CHECK(layout.node_at(3, 4) == -1);
  for (Face f : {Face::Bottom, Face::Top, Face::Left, Face::Right}) CHECK(parse_face(to_string(f)) == f);
  CHECK_THROWS_AS(parse_face("front"), ConfigError);
}

TEST_CASE("ballistic boundary data without attenuation") {
  const Synthetic s = synthetic(0.1, Letter::None, 0.0, 0.0);
  const BoundaryTrace g = extract_boundary(s.solution.u, s.grids);
  for (double v : g.values) CHECK(v == doctest::Approx(s.model.source.profile_integral).epsilon(1e-12));
}

TEST_CASE("noise") {
  const Grid3 grid = testing::omega_grid(0.1);
  const BoundaryTrace g = trace_from(grid, [](double x, double z, double a) { return 1.0 + x * x + z + a; });
  CHECK(add_noise(g, 0.0, 4).values == g.values);
  const BoundaryTrace noisy = add_noise(g, 0.05, 4);
  bool changed = false;
  for (std::size_t n = 0; n < g.values.size(); ++n) {
    CHECK(noisy.values[n] >= g.values[n]);
    CHECK(noisy.values[n] <= 1.05 * g.values[n]);
    changed = changed || noisy.values[n] != g.values[n];
  }
  CHECK(changed);
  CHECK(add_noise(g, 0.05, 4).values == noisy.values);
  CHECK(add_noise(g, 0.05, 5).values != noisy.values);
  CHECK_THROWS_AS(add_noise(g, -0.1, 4), ConfigError);
}

TEST_CASE("log data") {
  const Grid3 grid = testing::omega_grid(0.25);
  const BoundaryTrace one = trace_from(grid, [](double, double, double) { return 1.0; });
  for (double v : log_data(one).values) CHECK(v == 0.0);
  const BoundaryTrace e = trace_from(grid, [](double, double, double) { return std::exp(1.0); });
  for (double v : log_data(e).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  const BoundaryTrace g = trace_from(grid, [](double x, double z, double a) { return 0.1 + z * z + x * a; });
  const BoundaryTrace lg = log_data(g);
  for (std::size_t n = 0; n < g.values.size(); ++n)
    CHECK(std::abs(std::exp(lg.values[n]) - g.values[n]) <= 1e-14 * g.values[n]);

  BoundaryTrace bad = one;
  bad.at(grid.nx() - 1, 2, 1) = 0.0;
  try {
    log_data(bad);
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    const std::string what = err.what();
    CHECK(what.find("right") != std::string::npos);
    CHECK(what.find("j=2") != std::string::npos);
    CHECK(what.find("k=1") != std::string::npos);
  }
}

TEST_CASE("alpha derivative") {
  const Grid3 grid = testing::omega_grid(0.05);
  const BoundaryTrace flat = trace_from(grid, [](double x, double z, double) { return 2.0 + x + z; });
  for (double v : alpha_derivative(flat).values) CHECK(std::abs(v) < 1e-12);

  auto worst = [](double h) {
    const Grid3 g = testing::omega_grid(h);
    const BoundaryTrace t = trace_from(g, [](double, double, double a) { return std::exp(a); });
    double w = 0.0;
    for (double v : alpha_derivative(t).values) w = std::max(w, std::abs(v - 1.0));
    return w;
  };
  CHECK(worst(0.05) < 5e-3);
  CHECK(worst(0.025) < 0.3 * worst(0.05));

  // chain rule: g2 is the alpha derivative of g1
  const BoundaryTrace g = trace_from(grid, [](double x, double z, double a) { return std::exp(std::sin(3 * a) + x * z); });
  const BoundaryTrace g2 = alpha_derivative(g);
  const BoundaryTrace dg1 = trace_from(grid, [](double, double, double a) { return 3 * std::cos(3 * a); });
  for (std::size_t n = 0; n < g2.values.size(); ++n) CHECK(std::abs(g2.values[n] - dg1.values[n]) < 0.05);
  const Grid3 two_angles{grid.x1, grid.z, Grid1D::over(-0.5, 0.5, 1.0)};
  CHECK_THROWS_AS(alpha_derivative(trace_from(two_angles, [](double, double, double) { return 1.0; })), ConfigError);
}

TEST_CASE("neumann data from synthetic traces") {
  const Geometry geo;
  const Grid3 grid = testing::omega_grid(0.1);
  const KernelMatrix km = KernelMatrix::build(KernelModel{0.5, geo.d}, grid.alpha);
  const std::vector<double> zeros(grid.nx(), 0.0);

  // no scattering and g1 constant along x1
  const BoundaryTrace g = trace_from(grid, [](double, double z, double a) { return std::exp(z + a); });
  const TopTrace g3 = neumann_g3(g, log_data(g), zeros, zeros, km, geo);
  for (double v : g3.values) CHECK(std::abs(v) < 1e-12);

  CHECK(direction_vector({0.5, 2.0}, -0.5).z == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));

  TopTrace lin{grid, std::vector<double>(grid.nx() * grid.na())};
  for (std::size_t k = 0; k < grid.na(); ++k)
    for (std::size_t i = 0; i < grid.nx(); ++i) lin.at(i, k) = 1.5 - 2.5 * grid.alpha.node(k) + grid.x1.node(i);
  for (double v : neumann_g4(lin).values) CHECK(v == doctest::Approx(-2.5).epsilon(1e-10));
  TopTrace flat = lin;
  for (std::size_t k = 0; k < grid.na(); ++k)
    for (std::size_t i = 0; i < grid.nx(); ++i) flat.at(i, k) = grid.x1.node(i);
  for (double v : neumann_g4(flat).values) CHECK(std::abs(v) < 1e-12);

  // conventions differ exactly by the attenuation and scattering terms
  const std::vector<double> mu(grid.nx(), 5.0);
  const TopTrace derived = neumann_g3(g, log_data(g), mu, mu, km, geo, NeumannConvention::Derived);
  const TopTrace zero_att = neumann_g3(g, log_data(g), mu, mu, km, geo, NeumannConvention::DerivedZeroAttenuation);
  const TopTrace printed = neumann_g3(g, log_data(g), mu, mu, km, geo, NeumannConvention::Printed);
  for (std::size_t k = 0; k < grid.na(); ++k)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double nz = direction_vector({grid.x1.node(i), geo.b}, grid.alpha.node(k)).z;
      CHECK(zero_att.at(i, k) - derived.at(i, k) == doctest::Approx(5.0 / nz).epsilon(1e-12));
      CHECK(zero_att.at(i, k) == doctest::Approx(-printed.at(i, k)).epsilon(1e-12));
    }
  for (NeumannConvention c :
       {NeumannConvention::Derived, NeumannConvention::DerivedZeroAttenuation, NeumannConvention::Printed})
    CHECK(parse_neumann_convention(to_string(c)) == c);
}

TEST_CASE("neumann data against the forward field") {
  // uniform medium: g3 converges to d_z ln u, g4 to its alpha derivative
  const Synthetic coarse = synthetic(0.1, Letter::None, 0.0);
  const Synthetic fine = synthetic(0.05, Letter::None, 0.0);
  auto data = [](const Synthetic& s) {
    return build_boundary_data(s.solution.u, s.grids, s.model.phantom, s.model.kernel_matrix, 0.0, 1);
  };
  const auto [c3, c4] = neumann_oracle_error(coarse, data(coarse));
  const auto [f3, f4] = neumann_oracle_error(fine, data(fine));
  CHECK(f3 < 0.3 * c3);
  CHECK(f4 < c4);

  // letter phantom: g3 still converges at first order
  const Synthetic a_coarse = synthetic(0.1, Letter::A, 5.0);
  const Synthetic a_fine = synthetic(0.05, Letter::A, 5.0);
  CHECK(neumann_oracle_error(a_fine, data(a_fine)).first < 0.6 * neumann_oracle_error(a_coarse, data(a_coarse)).first);
}

TEST_CASE("full chain") {
  const Synthetic s = synthetic(0.05, Letter::A, 5.0);
  const BoundaryDataSet clean =
      build_boundary_data(s.solution.u, s.grids, s.model.phantom, s.model.kernel_matrix, 0.0, 1);
  for (double v : clean.g.values) CHECK(v > 0.0);
  const BoundaryDataSet other =
      build_boundary_data(s.solution.u, s.grids, s.model.phantom, s.model.kernel_matrix, 0.0, 99);
  CHECK(other.g.values == clean.g.values);

  const BoundaryDataSet noisy =
      build_boundary_data(s.solution.u, s.grids, s.model.phantom, s.model.kernel_matrix, 0.05, 7);
  const BoundaryDataSet again =
      build_boundary_data(s.solution.u, s.grids, s.model.phantom, s.model.kernel_matrix, 0.05, 7);
  CHECK(noisy.g.values == again.g.values);
  CHECK(noisy.g3.values == again.g3.values);
  CHECK(noisy.g4.values == again.g4.values);
  for (const auto* v : {&noisy.g.values, &noisy.g1.values, &noisy.g2.values, &noisy.g3.values, &noisy.g4.values})
    for (double x : *v) CHECK(std::isfinite(x));
  for (std::size_t n = 0; n < noisy.g.values.size(); ++n)
    CHECK(noisy.g1.values[n] == doctest::Approx(std::log(noisy.g.values[n])).epsilon(1e-15));

  // restriction keeps the values at shared nodes
  const Grid3 coarse = testing::omega_grid(0.1);
  const BoundaryDataSet r = restrict_to(clean, coarse);
  CHECK(r.grid() == coarse);
  for (std::size_t k = 0; k < coarse.na(); ++k) {
    CHECK(r.g1.at(0, 3, k) == clean.g1.at(0, 6, 2 * k));
    CHECK(r.g3.at(4, k) == clean.g3.at(8, 2 * k));
  }
  CHECK_THROWS_AS(restrict_to(clean, testing::omega_grid(1.0 / 30.0)), ConfigError);
}

}  // TEST_SUITE
