#include "rte/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rte/errors.hpp"
#include "rte/random.hpp"

namespace rte {

namespace {

// 5-point average; edge nodes average over the neighbours they have.
void smooth_once(const Grid2& g, std::vector<double>& f) {
  const std::size_t nx = g.nx(), nz = g.nz();
  std::vector<double> out(f.size());
  for (std::size_t j = 0; j < nz; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = f[j * nx + i];
      double count = 1.0;
      if (i > 0) acc += f[j * nx + i - 1], count += 1.0;
      if (i + 1 < nx) acc += f[j * nx + i + 1], count += 1.0;
      if (j > 0) acc += f[(j - 1) * nx + i], count += 1.0;
      if (j + 1 < nz) acc += f[(j + 1) * nx + i], count += 1.0;
      out[j * nx + i] = acc / count;
    }
  f.swap(out);
}

template <class At>
double first_derivative(At&& at, std::size_t c, std::size_t n, double h) {
  if (c == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (c + 1 == n) return (3.0 * at(c) - 4.0 * at(c - 1) + at(c - 2)) / (2.0 * h);
  return (at(c + 1) - at(c - 1)) / (2.0 * h);
}

template <class At>
double second_derivative(At&& at, std::size_t c, std::size_t n, double h) {
  const double h2 = h * h;
  if (c == 0) return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2;
  if (c + 1 == n) return (2.0 * at(c) - 5.0 * at(c - 1) + 4.0 * at(c - 2) - at(c - 3)) / h2;
  return (at(c + 1) - 2.0 * at(c) + at(c - 1)) / h2;
}

}  // namespace

TestFunctionSample make_test_function(const Grid2& omega, std::uint64_t seed, std::size_t index,
                                      std::size_t passes, TopCondition top) {
  const RandomStream stream(seed, "test_functions");
  const std::size_t n = omega.size();
  std::vector<double> f(n);
  for (std::size_t m = 0; m < n; ++m) f[m] = stream.symmetric(index * n + m);
  for (std::size_t s = 0; s < passes; ++s) smooth_once(omega, f);
  TestFunctionSample sample{SpatialField(omega), seed, index, passes, top};
  const std::size_t nx = omega.nx(), nz = omega.nz();
  for (std::size_t j = 0; j < nz; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const bool masked = j == 0 || i == 0 || i + 1 == nx;
      sample.u(i, j) = masked ? 0.0 : f[j * nx + i];
    }
  if (top == TopCondition::Clamped) {
    for (std::size_t i = 0; i < nx; ++i) {
      sample.u(i, nz - 1) = 0.0;
      sample.u(i, nz - 2) = 0.25 * sample.u(i, nz - 3);
    }
  }
  return sample;
}

CarlemanSides carleman_sides(const SpatialField& u, double lambda) {
  if (!(lambda >= 1.0)) throw ConfigError("carleman_sides needs lambda >= 1");
  const Grid2& g = u.grid();
  const std::size_t nx = g.nx(), nz = g.nz();
  if (nx < 4 || nz < 4) throw ConfigError("carleman_sides needs at least 4 nodes per direction");
  const std::vector<double> wx = g.x1.trapezoid_weights();
  const std::vector<double> wz = g.z.trapezoid_weights();
  const double hx = g.x1.h, hz = g.z.h;
  CarlemanSides s;
  for (std::size_t j = 0; j < nz; ++j) {
    const double z = g.z.node(j);
    const double weight = std::exp(2.0 * lambda * z * z);
    for (std::size_t i = 0; i < nx; ++i) {
      auto along_x = [&](std::size_t m) { return u(m, j); };
      auto along_z = [&](std::size_t m) { return u(i, m); };
      const double lap = second_derivative(along_x, i, nx, hx) + second_derivative(along_z, j, nz, hz);
      const double ux = first_derivative(along_x, i, nx, hx);
      const double uz = first_derivative(along_z, j, nz, hz);
      const double w = wx[i] * wz[j] * weight;
      s.lhs += w * lap * lap;
      s.interior += w * (lambda * (ux * ux + uz * uz) + lambda * lambda * lambda * u(i, j) * u(i, j));
    }
  }
  const std::size_t top = nz - 1;
  const double b = g.z.hi();
  double trace = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    auto along_x = [&](std::size_t m) { return u(m, top); };
    auto along_z = [&](std::size_t m) { return u(i, m); };
    const double ux = first_derivative(along_x, i, nx, hx);
    const double uz = first_derivative(along_z, top, nz, hz);
    trace += wx[i] * (u(i, top) * u(i, top) + ux * ux + uz * uz);
  }
  s.boundary = lambda * lambda * lambda * trace * std::exp(2.0 * lambda * b * b);
  return s;
}

CarlemanReport empirical_carleman_constant(const Grid2& omega, std::size_t samples,
                                           const std::vector<double>& lambdas, std::uint64_t seed,
                                           std::size_t passes, TopCondition top) {
  if (samples == 0) throw ConfigError("empirical_carleman_constant needs at least one sample");
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    if (!(lambdas[l] >= 1.0)) throw ConfigError("lambda values must be >= 1");
    if (l > 0 && !(lambdas[l] > lambdas[l - 1])) throw ConfigError("lambda values must be ascending");
  }
  CarlemanReport report;
  report.ratios.assign(lambdas.size(), std::vector<double>(samples, std::numeric_limits<double>::quiet_NaN()));
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < samples; ++s) {
    const TestFunctionSample sample = make_test_function(omega, seed, s, passes, top);
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const CarlemanSides sides = carleman_sides(sample.u, lambdas[l]);
      const double denominator = sides.interior - sides.boundary;
      if (denominator > 0.0) report.ratios[l][s] = sides.lhs / denominator;
    }
  }
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    CarlemanRow row{lambdas[l], std::numeric_limits<double>::infinity(), 0, 0};
    for (double r : report.ratios[l]) {
      if (std::isnan(r)) {
        ++row.excluded;
      } else {
        ++row.used;
        row.min_ratio = std::min(row.min_ratio, r);
      }
    }
    if (row.used == 0) {
      std::ostringstream msg;
      msg << "Carleman sweep degenerate at lambda = " << lambdas[l] << ": all " << samples
          << " samples have a nonpositive denominator";
      throw DomainError(msg.str());
    }
    report.rows.push_back(row);
  }
  return report;
}

ConvexityGap convexity_gap(const PairField& v1, const PairField& v2, const BoundaryDataSet& data,
                           const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  if (!(v1.grid() == g) || !(v2.grid() == g)) throw ConfigError("convexity_gap: pairs are not on the inversion grid");
  const std::size_t nx = g.nx(), nz = g.nz();
  auto check = [&](double a, double b, const char* what, std::size_t i, std::size_t j, std::size_t k) {
    if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
      std::ostringstream msg;
      msg << "convexity_gap: pairs differ in " << what << " at (i=" << i << ", j=" << j << ", k=" << k << ")";
      throw ConfigError(msg.str());
    }
  };
  const BoundaryLayout layout(g);
  for (std::size_t k = 0; k < g.na(); ++k) {
    for (const BoundaryNode& n : layout.nodes()) {
      check(v1.p(n.i, n.j, k), v2.p(n.i, n.j, k), "Dirichlet data", n.i, n.j, k);
      check(v1.q(n.i, n.j, k), v2.q(n.i, n.j, k), "Dirichlet data", n.i, n.j, k);
    }
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      auto closure = [&](const RadianceField& f) {
        return 3.0 * f(i, nz - 1, k) - 4.0 * f(i, nz - 2, k) + f(i, nz - 3, k);
      };
      check(closure(v1.p), closure(v2.p), "Neumann data", i, nz - 1, k);
      check(closure(v1.q), closure(v2.q), "Neumann data", i, nz - 1, k);
    }
  }
  (void)data;
  const PairField diff = v2 - v1;
  ConvexityGap out;
  out.gap = functional_value(v2, ctx) - functional_value(v1, ctx) - dot(functional_gradient(v1, ctx), diff);
  out.lower_bound = ctx.config().gamma * s_norm_sq(diff, ctx);
  return out;
}

PairField random_constrained_pair(const BoundaryDataSet& data, const InverseContext& ctx, std::uint64_t seed,
                                  std::size_t index, double radius) {
  const Grid3& g = ctx.grid();
  const PairField base = apply_constraints(extract_free(initial_guess(data, ctx), ctx), data, ctx);
  const std::vector<double> x0 = extract_free(base, ctx);
  const RandomStream stream(seed, "pairs");
  const std::size_t count = ctx.free_count();
  const std::uint64_t draws = 2 * g.size() + 1;
  const std::uint64_t offset = static_cast<std::uint64_t>(index) * draws;
  // Smooth white noise slice by slice on the full spatial grid, then keep the free nodes.
  PairField noise = PairField::zeros(g);
  const Grid2 spatial = g.spatial();
  std::size_t counter = 0;
  for (RadianceField* f : {&noise.p, &noise.q})
    for (std::size_t k = 0; k < g.na(); ++k) {
      std::vector<double> s(spatial.size());
      for (double& v : s) v = stream.symmetric(offset + counter++);
      for (int pass = 0; pass < 5; ++pass) smooth_once(spatial, s);
      std::copy(s.begin(), s.end(), f->slice(k).begin());
    }
  std::vector<double> pert = extract_free(noise, ctx);
  std::vector<double> x(count);
  for (std::size_t n = 0; n < count; ++n) x[n] = x0[n] + pert[n];
  const double norm = std::sqrt(s_norm_sq(apply_constraints(x, data, ctx) - base, ctx));
  const double scale = norm > 0.0 ? radius * stream.uniform(offset + draws - 1) / norm : 0.0;
  for (std::size_t n = 0; n < count; ++n) x[n] = x0[n] + scale * pert[n];
  return apply_constraints(x, data, ctx);
}

ConvexitySweep convexity_sweep(const BoundaryDataSet& data, const InverseContext& ctx, std::size_t pairs,
                               std::uint64_t seed, double radius) {
  ConvexitySweep sweep;
  sweep.pairs = pairs;
  sweep.records.resize(pairs);
  for (std::size_t s = 0; s < pairs; ++s) {
    const PairField v1 = random_constrained_pair(data, ctx, seed, 2 * s, radius);
    const PairField v2 = random_constrained_pair(data, ctx, seed, 2 * s + 1, radius);
    sweep.records[s] = convexity_gap(v1, v2, data, ctx);
  }
  sweep.min_slack = std::numeric_limits<double>::infinity();
  for (const ConvexityGap& c : sweep.records) {
    const double slack = c.gap - c.lower_bound;
    if (slack < 0.0) ++sweep.violations;
    sweep.min_slack = std::min(sweep.min_slack, slack);
  }
  return sweep;
}

GradientCheck gradient_check(const BoundaryDataSet& data, const InverseContext& ctx, std::size_t directions,
                             std::uint64_t seed, double tau, double tol) {
  const PairField base = random_constrained_pair(data, ctx, seed, 0, 1.0);
  const std::vector<double> x = extract_free(base, ctx);
  const std::vector<double> grad = free_components(functional_gradient(base, ctx), ctx);
  const RandomStream stream(seed, "directions");
  GradientCheck check;
  check.directions = directions;
  std::vector<double> xp(x.size()), xm(x.size());
  for (std::size_t d = 0; d < directions; ++d) {
    double analytic = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double h = stream.symmetric(d * x.size() + n);
      analytic += grad[n] * h;
      xp[n] = x[n] + tau * h;
      xm[n] = x[n] - tau * h;
    }
    const double fd = (functional_value(apply_constraints(xp, data, ctx), ctx) -
                       functional_value(apply_constraints(xm, data, ctx), ctx)) /
                      (2.0 * tau);
    const double err = std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
    check.worst = std::max(check.worst, err);
    if (!(err <= tol)) ++check.failures;
  }
  return check;
}

LipschitzReport gradient_lipschitz(const BoundaryDataSet& data, const InverseContext& ctx, std::size_t samples,
                                   std::uint64_t seed, double radius) {
  LipschitzReport report;
  if (samples < 2) return report;
  std::vector<double> prev_x, prev_g;
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const PairField v = random_constrained_pair(data, ctx, seed, s, radius);
    std::vector<double> x = extract_free(v, ctx);
    std::vector<double> gr = free_components(functional_gradient(v, ctx), ctx);
    if (s > 0) {
      double dg = 0.0, dx = 0.0;
      for (std::size_t n = 0; n < x.size(); ++n) {
        dg += (gr[n] - prev_g[n]) * (gr[n] - prev_g[n]);
        dx += (x[n] - prev_x[n]) * (x[n] - prev_x[n]);
      }
      if (dx > 0.0) {
        const double ratio = std::sqrt(dg / dx);
        report.max_ratio = std::max(report.max_ratio, ratio);
        total += ratio;
        ++report.pairs;
      }
    }
    prev_x.swap(x);
    prev_g.swap(gr);
  }
  if (report.pairs > 0) report.mean_ratio = total / static_cast<double>(report.pairs);
  return report;
}

}  // namespace rte
