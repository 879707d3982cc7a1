#include "rte/forward.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rte/errors.hpp"

namespace rte {

namespace {

// Composite Simpson rule with an even number of panels.
template <class F>
double simpson(F&& f, double lo, double hi, std::size_t panels) {
  if (hi <= lo) return 0.0;
  panels += panels % 2;
  const double h = (hi - lo) / static_cast<double>(panels);
  double sum = f(lo) + f(hi);
  for (std::size_t m = 1; m < panels; ++m) sum += (m % 2 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(m));
  return sum * h / 3.0;
}

double bump(double r, double sigma) {
  if (r >= sigma) return 0.0;
  const double r2 = r * r;
  return std::exp(-r2 / (sigma * sigma - r2));
}

constexpr std::size_t kRadialPanels = 4000;

// Trapezoid samples of the part of the segment [x_alpha, x] inside closed Omega, with the
// cumulative attenuation optical depth tau at each sample.
struct RaySamples {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<double> tau;
  double tau_total = 0.0;

  void clear() {
    points.clear();
    weights.clear();
    tau.clear();
    tau_total = 0.0;
  }
};

void sample_clipped_ray(const Phantom& phantom, const Geometry& geometry, double spacing, Point x,
                        double alpha, RaySamples& out) {
  out.clear();
  const Point src{alpha, 0.0};
  const double r = std::hypot(x.x1 - src.x1, x.z - src.z);
  if (!(r > 0.0)) return;
  const auto clip = clip_to_omega(geometry, src, x);
  if (!clip) return;
  const double length = ((*clip)[1] - (*clip)[0]) * r;
  if (!(length > 1e-14)) return;
  const std::size_t n = samples_for_length(length, spacing);
  const double step = length / static_cast<double>(n - 1);
  const Point p0{src.x1 + (*clip)[0] * (x.x1 - src.x1), src.z + (*clip)[0] * (x.z - src.z)};
  const Point p1{src.x1 + (*clip)[1] * (x.x1 - src.x1), src.z + (*clip)[1] * (x.z - src.z)};
  out.points.resize(n);
  out.weights.assign(n, step);
  out.weights.front() *= 0.5;
  out.weights.back() *= 0.5;
  out.tau.resize(n);
  const auto att = phantom.attenuation.values();
  double prev_a = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(n - 1);
    out.points[m] = {p0.x1 + t * (p1.x1 - p0.x1), p0.z + t * (p1.z - p0.z)};
    const double a = bilinear(phantom.grid, att, out.points[m]);
    out.tau[m] = m == 0 ? 0.0 : out.tau[m - 1] + 0.5 * step * (prev_a + a);
    prev_a = a;
  }
  out.tau_total = out.tau.back();
}

}  // namespace

SourceModel SourceModel::make(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("source radius sigma must be > 0");
  SourceModel m;
  m.sigma = sigma;
  const double mass = 2.0 * std::numbers::pi *
                      simpson([&](double s) { return s * bump(s, sigma); }, 0.0, sigma, kRadialPanels);
  m.c_sigma = 1.0 / mass;
  m.profile_integral = m.c_sigma * simpson([&](double s) { return bump(s, sigma); }, 0.0, sigma, kRadialPanels);
  return m;
}

double SourceModel::radial(double r) const { return c_sigma * bump(r, sigma); }

double SourceModel::radial_integral(double r) const {
  if (r >= sigma) return profile_integral;
  if (r <= 0.0) return 0.0;
  return c_sigma * simpson([&](double s) { return bump(s, sigma); }, 0.0, r, kRadialPanels);
}

double source_value(Point x, double alpha, const SourceModel& model) {
  return model.radial(std::hypot(x.x1 - alpha, x.z));
}

double KernelModel::value(double alpha, double beta) const {
  const double c2 = c_g * c_g;
  return (1.0 - c2) / (1.0 + c2 - 2.0 * c_g * std::cos(alpha - beta)) / (2.0 * d);
}

double KernelModel::alpha_derivative(double alpha, double beta) const {
  const double c2 = c_g * c_g;
  const double den = 1.0 + c2 - 2.0 * c_g * std::cos(alpha - beta);
  return -(1.0 - c2) * 2.0 * c_g * std::sin(alpha - beta) / (den * den) / (2.0 * d);
}

double kernel_value(double alpha, double beta, const KernelModel& model) {
  return model.value(alpha, beta);
}

KernelMatrix KernelMatrix::build(const KernelModel& model, const Grid1D& alpha) {
  if (!(model.c_g >= 0.0 && model.c_g < 1.0)) throw ConfigError("anisotropy c_g must lie in [0, 1)");
  KernelMatrix km;
  km.n = alpha.size();
  km.weighted.resize(km.n * km.n);
  km.weighted_alpha_derivative.resize(km.n * km.n);
  const auto w = alpha.trapezoid_weights();
  for (std::size_t k = 0; k < km.n; ++k) {
    for (std::size_t m = 0; m < km.n; ++m) {
      km.weighted[k * km.n + m] = model.value(alpha.node(k), alpha.node(m)) * w[m];
      km.weighted_alpha_derivative[k * km.n + m] = model.alpha_derivative(alpha.node(k), alpha.node(m)) * w[m];
    }
  }
  return km;
}

ForwardModel ForwardModel::make(const GridSet& grids, Phantom phantom, const SourceModel& source,
                                const KernelModel& kernel) {
  if (!(phantom.grid == grids.domain.spatial())) throw ConfigError("phantom must be sampled on the P grid");
  ForwardModel m{grids, std::move(phantom), source, kernel, KernelMatrix::build(kernel, grids.domain.alpha)};
  if (source.sigma >= grids.geometry.a) throw ConfigError("source support must not reach Omega (sigma < a)");
  return m;
}

double ForwardModel::ray_spacing() const { return 0.5 * std::min(grids.h_x1(), grids.h_z()); }

double attenuation_integral(Point x, double alpha, const Phantom& phantom, const Geometry& geometry,
                            double max_spacing) {
  RaySamples ray;
  sample_clipped_ray(phantom, geometry, max_spacing, x, alpha, ray);
  return std::exp(ray.tau_total);
}

double ballistic_term(Point x, double alpha, const Phantom& phantom, const Geometry& geometry,
                      const SourceModel& source, double max_spacing) {
  const double r = std::hypot(x.x1 - alpha, x.z);
  return source.radial_integral(r) / attenuation_integral(x, alpha, phantom, geometry, max_spacing);
}

RadianceField ballistic_field(const ForwardModel& model) {
  const Grid3& g = model.grids.domain;
  RadianceField u0(g, Region::P);
  const double spacing = model.ray_spacing();
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < g.na(); ++k) {
    const double alpha = g.alpha.node(k);
    for (std::size_t j = 0; j < g.nz(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const Point x{g.x1.node(i), g.z.node(j)};
        const double r = std::hypot(x.x1 - alpha, x.z);
        if (!(r > 1e-12)) continue;  // u(x_alpha, alpha) = 0
        u0(i, j, k) = ballistic_term(x, alpha, model.phantom, model.grids.geometry, model.source, spacing);
      }
    }
  }
  return u0;
}

namespace {

// mu_s(x) * int G(alpha_k, beta) u(x, beta) d beta on every P node.
RadianceField scattering_source(const RadianceField& u, const ForwardModel& model) {
  const Grid3& g = model.grids.domain;
  RadianceField s(g, Region::P);
  const auto mu_s = model.phantom.mu_s.values();
  const std::size_t slice = g.slice_size();
  const std::size_t na = g.na();
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < slice; ++n) {
    if (mu_s[n] == 0.0) continue;
    for (std::size_t k = 0; k < na; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < na; ++m) acc += model.kernel_matrix(k, m) * u.values()[m * slice + n];
      s.values()[k * slice + n] = mu_s[n] * acc;
    }
  }
  return s;
}

}  // namespace

RadianceField scatter_apply(const RadianceField& u, const ForwardModel& model) {
  const Grid3& g = model.grids.domain;
  if (!(u.grid() == g)) throw ConfigError("scatter_apply: field is not on the P grid");
  const RadianceField source = scattering_source(u, model);
  RadianceField out(g, Region::P);
  const Grid2 spatial = g.spatial();
  const double spacing = model.ray_spacing();
#pragma omp parallel
  {
    RaySamples ray;
#pragma omp for schedule(static)
    for (std::size_t k = 0; k < g.na(); ++k) {
      const double alpha = g.alpha.node(k);
      const auto s_k = source.slice(k);
      for (std::size_t j = 0; j < g.nz(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
          sample_clipped_ray(model.phantom, model.grids.geometry, spacing, {g.x1.node(i), g.z.node(j)}, alpha, ray);
          double acc = 0.0;
          for (std::size_t m = 0; m < ray.points.size(); ++m) {
            acc += ray.weights[m] * std::exp(ray.tau[m] - ray.tau_total) * bilinear(spatial, s_k, ray.points[m]);
          }
          out(i, j, k) = acc;
        }
      }
    }
  }
  return out;
}

ForwardSolution solve_forward(const ForwardModel& model, double tol, std::size_t max_iters) {
  if (!(tol > 0.0)) throw ConfigError("fixed-point tolerance must be > 0");
  ForwardSolution sol;
  sol.ballistic = ballistic_field(model);
  sol.u = sol.ballistic;
  double last = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    RadianceField next = sol.ballistic + scatter_apply(sol.u, model);
    last = max_abs_diff(next, sol.u);
    sol.u = std::move(next);
    sol.increments.push_back(last);
    sol.iterations = it;
    if (last < tol) return sol;
  }
  std::ostringstream msg;
  msg << "forward fixed-point iteration did not converge in " << max_iters << " iterations (last increment "
      << last << ")";
  throw ConvergenceError(msg.str(), max_iters, last);
}

DirectSolution solve_forward_direct(const ForwardModel& model, std::size_t max_unknowns) {
  const Grid3& g = model.grids.domain;
  const std::size_t n = g.size();
  if (n > max_unknowns) {
    std::ostringstream msg;
    msg << "direct forward solve: " << n << " unknowns exceed the cap of " << max_unknowns;
    throw ConfigError(msg.str());
  }
  const std::size_t slice = g.slice_size();
  const std::size_t na = g.na();
  const Grid2 spatial = g.spatial();
  const auto mu_s = model.phantom.mu_s.values();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  RaySamples ray;
  for (std::size_t k = 0; k < na; ++k) {
    const double alpha = g.alpha.node(k);
    for (std::size_t j = 0; j < g.nz(); ++j) {
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const auto row = static_cast<Eigen::Index>(g.index(i, j, k));
        sample_clipped_ray(model.phantom, model.grids.geometry, model.ray_spacing(), {g.x1.node(i), g.z.node(j)},
                           alpha, ray);
        for (std::size_t m = 0; m < ray.points.size(); ++m) {
          const double w = ray.weights[m] * std::exp(ray.tau[m] - ray.tau_total);
          const BilinearStencil st = bilinear_stencil(spatial, ray.points[m]);
          for (std::size_t c = 0; c < 4; ++c) {
            const double coeff = w * st.weight[c] * mu_s[st.index[c]];
            if (coeff == 0.0) continue;
            for (std::size_t kb = 0; kb < na; ++kb) {
              a(row, static_cast<Eigen::Index>(kb * slice + st.index[c])) -= coeff * model.kernel_matrix(k, kb);
            }
          }
        }
      }
    }
  }
  const RadianceField u0 = ballistic_field(model);
  const Eigen::Map<const Eigen::VectorXd> rhs(u0.values().data(), static_cast<Eigen::Index>(n));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (!(lu.rcond() > 1e-14)) throw Error("direct forward solve: collocation matrix is numerically singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  DirectSolution sol{RadianceField(g, Region::P), 0.0};
  std::copy(x.data(), x.data() + x.size(), sol.u.values().begin());
  sol.residual = (a * x - rhs).lpNorm<Eigen::Infinity>();
  return sol;
}

}  // namespace rte
