#include "rte/inverse.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "rte/errors.hpp"

namespace rte {

PairField operator+(const PairField& a, const PairField& b) { return {a.p + b.p, a.q + b.q}; }
PairField operator-(const PairField& a, const PairField& b) { return {a.p - b.p, a.q - b.q}; }
PairField operator*(double s, const PairField& a) { return {s * a.p, s * a.q}; }

double dot(const PairField& a, const PairField& b) {
  double acc = 0.0;
  const auto ap = a.p.values(), bp = b.p.values(), aq = a.q.values(), bq = b.q.values();
  for (std::size_t n = 0; n < ap.size(); ++n) acc += ap[n] * bp[n] + aq[n] * bq[n];
  return acc;
}

void InversionConfig::validate() const {
  std::ostringstream msg;
  if (!(lambda >= 0.0)) msg << "lambda must be >= 0; ";
  if (!(gamma >= 0.0 && gamma < 1.0)) msg << "gamma must lie in [0, 1); ";
  if (!(epsilon > 0.0)) msg << "epsilon must be > 0; ";
  if (!(rho_init > 0.0)) msg << "rho_init must be > 0; ";
  if (!(grad_tol > 0.0)) msg << "grad_tol must be > 0; ";
  if (!(armijo > 0.0 && armijo < 1.0)) msg << "armijo must lie in (0, 1); ";
  if (!msg.str().empty()) throw ConfigError("invalid inversion config: " + msg.str());
}

InverseContext::InverseContext(const Grid3& omega, const Geometry& geometry, SpatialField mu_s,
                               const KernelModel& kernel, const InversionConfig& config)
    : grid_(omega), geometry_(geometry), mu_s_(std::move(mu_s)), kernel_(KernelMatrix::build(kernel, omega.alpha)),
      config_(config) {
  config_.validate();
  if (!(mu_s_.grid() == omega.spatial())) throw ConfigError("mu_s must be sampled on the Omega grid");
  if (omega.nx() < 3 || omega.nz() < 4 || omega.na() < 2)
    throw ConfigError("inversion grid needs nx >= 3, nz >= 4 and at least 2 alpha nodes");
  nu_.resize(omega.size());
  nu_alpha_.resize(omega.size());
  for (std::size_t k = 0; k < omega.na(); ++k)
    for (std::size_t j = 0; j < omega.nz(); ++j)
      for (std::size_t i = 0; i < omega.nx(); ++i) {
        const Point x{omega.x1.node(i), omega.z.node(j)};
        const std::size_t n = omega.index(i, j, k);
        nu_[n] = direction_vector(x, omega.alpha.node(k));
        nu_alpha_[n] = direction_alpha_derivative(x, omega.alpha.node(k));
      }
  const double b = geometry.b;
  row_weight_.resize(omega.nz());
  for (std::size_t j = 0; j < omega.nz(); ++j) {
    const double z = omega.z.node(j);
    row_weight_[j] = omega.x1.h * omega.z.h * std::exp(2.0 * config_.lambda * (z * z - b * b));
  }
  alpha_weight_ = omega.alpha.trapezoid_weights();
}

namespace {

// Every term c * (sum_t coeff_t f[idx_t])^2 of the S-energy of one alpha slice; indices are
// slice-local (j * nx + i).
template <class Visit>
void for_each_s_term(const Grid3& g, Visit&& visit) {
  const std::size_t nx = g.nx();
  const std::size_t nz = g.nz();
  const double hx = g.x1.h;
  const double hz = g.z.h;
  const auto wx = g.x1.trapezoid_weights();
  const auto wz = g.z.trapezoid_weights();
  auto id = [nx](std::size_t i, std::size_t j) { return j * nx + i; };
  std::size_t idx[4];
  double coeff[4];
  for (std::size_t j = 0; j < nz; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      idx[0] = id(i, j);
      coeff[0] = 1.0;
      visit(wx[i] * wz[j], idx, coeff, 1);
    }
  // first differences, midpoint rule on cell edges
  for (std::size_t j = 0; j < nz; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      idx[0] = id(i + 1, j);
      idx[1] = id(i, j);
      coeff[0] = 1.0 / hx;
      coeff[1] = -1.0 / hx;
      visit(hx * wz[j], idx, coeff, 2);
    }
  for (std::size_t j = 0; j + 1 < nz; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      idx[0] = id(i, j + 1);
      idx[1] = id(i, j);
      coeff[0] = 1.0 / hz;
      coeff[1] = -1.0 / hz;
      visit(wx[i] * hz, idx, coeff, 2);
    }
  // second differences
  for (std::size_t j = 0; j < nz; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      idx[0] = id(i + 1, j);
      idx[1] = id(i, j);
      idx[2] = id(i - 1, j);
      coeff[0] = 1.0 / (hx * hx);
      coeff[1] = -2.0 / (hx * hx);
      coeff[2] = 1.0 / (hx * hx);
      visit(hx * wz[j], idx, coeff, 3);
    }
  for (std::size_t j = 1; j + 1 < nz; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      idx[0] = id(i, j + 1);
      idx[1] = id(i, j);
      idx[2] = id(i, j - 1);
      coeff[0] = 1.0 / (hz * hz);
      coeff[1] = -2.0 / (hz * hz);
      coeff[2] = 1.0 / (hz * hz);
      visit(wx[i] * hz, idx, coeff, 3);
    }
  for (std::size_t j = 0; j + 1 < nz; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double c = 1.0 / (hx * hz);
      idx[0] = id(i + 1, j + 1);
      idx[1] = id(i + 1, j);
      idx[2] = id(i, j + 1);
      idx[3] = id(i, j);
      coeff[0] = c;
      coeff[1] = -c;
      coeff[2] = -c;
      coeff[3] = c;
      visit(2.0 * hx * hz, idx, coeff, 4);  // f_x1z and f_zx1
    }
}

double slice_energy(const Grid3& g, std::span<const double> f) {
  double e = 0.0;
  for_each_s_term(g, [&](double c, const std::size_t* idx, const double* coeff, std::size_t count) {
    double s = 0.0;
    for (std::size_t t = 0; t < count; ++t) s += coeff[t] * f[idx[t]];
    e += c * s * s;
  });
  return e;
}

void add_slice_energy_gradient(const Grid3& g, std::span<const double> f, double scale, std::span<double> out) {
  for_each_s_term(g, [&](double c, const std::size_t* idx, const double* coeff, std::size_t count) {
    double s = 0.0;
    for (std::size_t t = 0; t < count; ++t) s += coeff[t] * f[idx[t]];
    const double factor = 2.0 * scale * c * s;
    for (std::size_t t = 0; t < count; ++t) out[idx[t]] += factor * coeff[t];
  });
}

// Residual fields plus the intermediates the gradient needs.
struct Evaluation {
  RadianceField l1;
  RadianceField l2;
  RadianceField exp_p;
  RadianceField integral_g;   // int G(alpha, beta) e^{p(x, beta)} d beta
  RadianceField integral_dg;  // int d_alpha G(alpha, beta) e^{p(x, beta)} d beta
};

Evaluation evaluate(const PairField& pair, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  if (!(pair.p.grid() == g) || !(pair.q.grid() == g)) throw ConfigError("pair is not on the inversion grid");
  const std::size_t nx = g.nx(), nz = g.nz(), na = g.na(), slice = g.slice_size();
  const double hx = g.x1.h, hz = g.z.h;
  const double eps = ctx.config().epsilon;
  Evaluation ev{RadianceField(g, Region::Omega), RadianceField(g, Region::Omega), RadianceField(g, Region::Omega),
                RadianceField(g, Region::Omega), RadianceField(g, Region::Omega)};
  const auto p = pair.p.values();
  const auto q = pair.q.values();
  for (std::size_t n = 0; n < p.size(); ++n) ev.exp_p.values()[n] = std::exp(p[n]);
  const KernelMatrix& km = ctx.kernel();
  const auto ep = ev.exp_p.values();
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < na; ++k) {
    for (std::size_t j = 1; j + 1 < nz; ++j) {
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        const std::size_t s = j * nx + i;
        const double mu = ctx.mu_s()(i, j);
        double ig = 0.0, idg = 0.0;
        if (mu != 0.0) {
          for (std::size_t m = 0; m < na; ++m) {
            ig += km(k, m) * ep[m * slice + s];
            idg += km.derivative(k, m) * ep[m * slice + s];
          }
        }
        const std::size_t n = k * slice + s;
        ev.integral_g.values()[n] = ig;
        ev.integral_dg.values()[n] = idg;
        const std::size_t e = n + 1, w = n - 1, up = n + nx, dn = n - nx;
        const double lap_p = (p[e] - 2.0 * p[n] + p[w]) / (hx * hx) + (p[up] - 2.0 * p[n] + p[dn]) / (hz * hz);
        const double lap_q = (q[e] - 2.0 * q[n] + q[w]) / (hx * hx) + (q[up] - 2.0 * q[n] + q[dn]) / (hz * hz);
        const Vec2& nu = ctx.nu(n);
        const Vec2& nua = ctx.nu_alpha(n);
        const double qx = (q[e] - q[w]) / (2.0 * hx), qz = (q[up] - q[dn]) / (2.0 * hz);
        const double px = (p[e] - p[w]) / (2.0 * hx), pz = (p[up] - p[dn]) / (2.0 * hz);
        const double transport = nu.x1 * qx + nu.z * qz + nua.x1 * px + nua.z * pz +
                                 mu * (q[n] * ig - idg) / ep[n];
        ev.l1.values()[n] = -eps * lap_p + transport;
        ev.l2.values()[n] = -eps * lap_q + transport;
      }
    }
  }
  return ev;
}

double residual_term(const Evaluation& ev, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  std::vector<double> partial(g.na(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < g.na(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j + 1 < g.nz(); ++j) {
      double row = 0.0;
      for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
        const double a = ev.l1(i, j, k), b = ev.l2(i, j, k);
        row += a * a + b * b;
      }
      acc += ctx.residual_weight(j, k) * row;
    }
    partial[k] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

// Row layout of the free values: component c (0 = p, 1 = q), alpha node k, then the interior
// block i = 1..nx-2, j = 1..nz-3.
std::size_t free_index(const Grid3& g, std::size_t c, std::size_t k, std::size_t i, std::size_t j) {
  return ((c * g.na() + k) * (g.nz() - 3) + (j - 1)) * (g.nx() - 2) + (i - 1);
}

}  // namespace

RadianceField residual_L1(const PairField& pair, const InverseContext& ctx) { return evaluate(pair, ctx).l1; }
RadianceField residual_L2(const PairField& pair, const InverseContext& ctx) { return evaluate(pair, ctx).l2; }

double s_norm_sq(const PairField& pair, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  double total = 0.0;
  for (std::size_t k = 0; k < g.na(); ++k)
    total += ctx.alpha_weights()[k] * (slice_energy(g, pair.p.slice(k)) + slice_energy(g, pair.q.slice(k)));
  return total;
}

PairField s_norm_gradient(const PairField& pair, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  PairField grad = PairField::zeros(g);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < g.na(); ++k) {
    const double w = ctx.alpha_weights()[k];
    add_slice_energy_gradient(g, pair.p.slice(k), w, grad.p.slice(k));
    add_slice_energy_gradient(g, pair.q.slice(k), w, grad.q.slice(k));
  }
  return grad;
}

double functional_value(const PairField& pair, const InverseContext& ctx) {
  const Evaluation ev = evaluate(pair, ctx);
  return residual_term(ev, ctx) + ctx.config().gamma * s_norm_sq(pair, ctx);
}

PairField functional_gradient_full(const PairField& pair, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  const std::size_t nx = g.nx(), nz = g.nz(), na = g.na(), slice = g.slice_size();
  const double hx = g.x1.h, hz = g.z.h;
  const double eps = ctx.config().epsilon;
  const Evaluation ev = evaluate(pair, ctx);
  PairField grad = s_norm_gradient(pair, ctx);
  grad = ctx.config().gamma * grad;
  const auto q = pair.q.values();
  const auto ep = ev.exp_p.values();
  auto gp = grad.p.values();
  auto gq = grad.q.values();
  // rho = dJ/dL1 + dJ/dL2 drives the shared transport part.
  RadianceField rho(g, Region::Omega);
  RadianceField coupling(g, Region::Omega);  // rho * mu_s * e^{-p}
  // Stencil transposes stay within one alpha slice.
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < na; ++k) {
    for (std::size_t j = 1; j + 1 < nz; ++j) {
      const double w = ctx.residual_weight(j, k);
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        const std::size_t n = k * slice + j * nx + i;
        const double r1 = 2.0 * w * ev.l1.values()[n];
        const double r2 = 2.0 * w * ev.l2.values()[n];
        const double r = r1 + r2;
        rho.values()[n] = r;
        const std::size_t e = n + 1, wst = n - 1, up = n + nx, dn = n - nx;
        // -eps Lap, symmetric stencil
        const double cx = -eps / (hx * hx), cz = -eps / (hz * hz);
        gp[e] += cx * r1;
        gp[wst] += cx * r1;
        gp[up] += cz * r1;
        gp[dn] += cz * r1;
        gp[n] += -2.0 * (cx + cz) * r1;
        gq[e] += cx * r2;
        gq[wst] += cx * r2;
        gq[up] += cz * r2;
        gq[dn] += cz * r2;
        gq[n] += -2.0 * (cx + cz) * r2;
        const Vec2& nu = ctx.nu(n);
        const Vec2& nua = ctx.nu_alpha(n);
        gq[e] += r * nu.x1 / (2.0 * hx);
        gq[wst] -= r * nu.x1 / (2.0 * hx);
        gq[up] += r * nu.z / (2.0 * hz);
        gq[dn] -= r * nu.z / (2.0 * hz);
        gp[e] += r * nua.x1 / (2.0 * hx);
        gp[wst] -= r * nua.x1 / (2.0 * hx);
        gp[up] += r * nua.z / (2.0 * hz);
        gp[dn] -= r * nua.z / (2.0 * hz);
        const double mu = ctx.mu_s()(i, j);
        if (mu == 0.0) continue;
        const double ig = ev.integral_g.values()[n];
        const double idg = ev.integral_dg.values()[n];
        const double scatter = mu * (q[n] * ig - idg) / ep[n];
        gq[n] += r * mu * ig / ep[n];
        gp[n] -= r * scatter;
        coupling.values()[n] = r * mu / ep[n];
      }
    }
  }
  // Coupling through the beta integrals: d/dp(x, beta_m) of the terms at (x, alpha_k).
  const KernelMatrix& km = ctx.kernel();
#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < na; ++m) {
    for (std::size_t j = 1; j + 1 < nz; ++j) {
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        const std::size_t s = j * nx + i;
        double acc = 0.0;
        for (std::size_t k = 0; k < na; ++k) {
          const std::size_t n = k * slice + s;
          const double c = coupling.values()[n];
          if (c != 0.0) acc += c * (q[n] * km(k, m) - km.derivative(k, m));
        }
        gp[m * slice + s] += acc * ep[m * slice + s];
      }
    }
  }
  return grad;
}

PairField functional_gradient(const PairField& pair, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  const PairField full = functional_gradient_full(pair, ctx);
  PairField out = PairField::zeros(g);
  const std::size_t jlast = g.nz() - 3;  // last free row; row nz-2 depends on it
  for (std::size_t k = 0; k < g.na(); ++k)
    for (std::size_t j = 1; j <= jlast; ++j)
      for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
        double vp = full.p(i, j, k);
        double vq = full.q(i, j, k);
        if (j == jlast) {
          vp += 0.25 * full.p(i, j + 1, k);
          vq += 0.25 * full.q(i, j + 1, k);
        }
        out.p(i, j, k) = vp;
        out.q(i, j, k) = vq;
      }
  return out;
}

PairField apply_constraints(std::span<const double> free, const BoundaryDataSet& data, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  if (!(data.grid() == g)) throw ConfigError("boundary data grid does not match the inversion grid");
  if (free.size() != ctx.free_count()) throw ConfigError("apply_constraints: wrong number of free values");
  const std::size_t nx = g.nx(), nz = g.nz();
  PairField v = PairField::zeros(g);
  for (std::size_t k = 0; k < g.na(); ++k) {
    for (std::size_t j = 0; j < nz; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        if (data.g1.layout.node_at(i, j) >= 0) {
          v.p(i, j, k) = data.g1.at(i, j, k);
          v.q(i, j, k) = data.g2.at(i, j, k);
        } else if (j <= nz - 3) {
          v.p(i, j, k) = free[free_index(g, 0, k, i, j)];
          v.q(i, j, k) = free[free_index(g, 1, k, i, j)];
        }
      }
    const double hz = g.z.h;
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      v.p(i, nz - 2, k) = (v.p(i, nz - 3, k) - 2.0 * hz * data.g3.at(i, k) + 3.0 * data.g1.at(i, nz - 1, k)) / 4.0;
      v.q(i, nz - 2, k) = (v.q(i, nz - 3, k) - 2.0 * hz * data.g4.at(i, k) + 3.0 * data.g2.at(i, nz - 1, k)) / 4.0;
    }
  }
  return v;
}

std::vector<double> extract_free(const PairField& pair, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  std::vector<double> free(ctx.free_count());
  for (std::size_t k = 0; k < g.na(); ++k)
    for (std::size_t j = 1; j + 3 <= g.nz(); ++j)
      for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
        free[free_index(g, 0, k, i, j)] = pair.p(i, j, k);
        free[free_index(g, 1, k, i, j)] = pair.q(i, j, k);
      }
  return free;
}

std::vector<double> free_components(const PairField& gradient, const InverseContext& ctx) {
  return extract_free(gradient, ctx);
}

PairField initial_guess(const BoundaryDataSet& data, const InverseContext& ctx) {
  const Grid3& g = ctx.grid();
  if (!(data.grid() == g)) throw ConfigError("boundary data grid does not match the inversion grid");
  const std::size_t nx = g.nx(), nz = g.nz();
  const double B = ctx.geometry().B, a = ctx.geometry().a, b = ctx.geometry().b;
  PairField v = PairField::zeros(g);
  auto blend = [&](const BoundaryTrace& t, std::size_t i, std::size_t j, std::size_t k) {
    const double x1 = g.x1.node(i), z = g.z.node(j);
    const double horizontal = (B - x1) / (2.0 * B) * t.at(0, j, k) + (x1 + B) / (2.0 * B) * t.at(nx - 1, j, k);
    const double vertical = (b - z) / (b - a) * t.at(i, 0, k) + (z - a) / (b - a) * t.at(i, nz - 1, k);
    return 0.5 * horizontal + 0.5 * vertical;
  };
  for (std::size_t k = 0; k < g.na(); ++k)
    for (std::size_t j = 0; j < nz; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        v.p(i, j, k) = blend(data.g1, i, j, k);
        v.q(i, j, k) = blend(data.g2, i, j, k);
      }
  return v;
}

struct SGramSolver::Impl {
  Grid3 grid;
  std::vector<double> alpha_weights;
  Eigen::LLT<Eigen::MatrixXd> llt;
};

SGramSolver::SGramSolver(const InverseContext& ctx) {
  auto impl = std::make_shared<Impl>();
  const Grid3& g = ctx.grid();
  impl->grid = g;
  impl->alpha_weights = ctx.alpha_weights();
  const std::size_t nx = g.nx(), nz = g.nz(), ns = g.slice_size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
  for_each_s_term(g, [&](double c, const std::size_t* idx, const double* coeff, std::size_t count) {
    for (std::size_t s = 0; s < count; ++s)
      for (std::size_t t = 0; t < count; ++t)
        a(static_cast<Eigen::Index>(idx[s]), static_cast<Eigen::Index>(idx[t])) += c * coeff[s] * coeff[t];
  });
  // Linear part of the elimination map restricted to one slice.
  const std::size_t nf = (nx - 2) * (nz - 3);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nf));
  for (std::size_t j = 1; j <= nz - 3; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const auto col = static_cast<Eigen::Index>((j - 1) * (nx - 2) + (i - 1));
      e(static_cast<Eigen::Index>(j * nx + i), col) = 1.0;
      if (j == nz - 3) e(static_cast<Eigen::Index>((j + 1) * nx + i), col) = 0.25;
    }
  const Eigen::MatrixXd m = e.transpose() * a * e;
  impl->llt.compute(m);
  if (impl->llt.info() != Eigen::Success) throw Error("S-norm Gram matrix is not positive definite");
  impl_ = std::move(impl);
}

void SGramSolver::apply(std::span<double> free_gradient) const {
  const Grid3& g = impl_->grid;
  const std::size_t nf = (g.nx() - 2) * (g.nz() - 3);
  if (free_gradient.size() != 2 * nf * g.na()) throw ConfigError("SGramSolver: wrong vector size");
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t k = 0; k < g.na(); ++k) {
      Eigen::Map<Eigen::VectorXd> block(free_gradient.data() + (c * g.na() + k) * nf, static_cast<Eigen::Index>(nf));
      block = impl_->llt.solve(block) / impl_->alpha_weights[k];
    }
}

InversionState minimize(const BoundaryDataSet& data, const InverseContext& ctx) {
  const InversionConfig& cfg = ctx.config();
  const SGramSolver gram(ctx);
  std::vector<double> x = extract_free(initial_guess(data, ctx), ctx);
  InversionState st;
  st.pair = apply_constraints(x, data, ctx);
  st.J = functional_value(st.pair, ctx);
  double step = cfg.rho_init;
  std::vector<double> trial(x.size());
  for (std::size_t it = 0;; ++it) {
    std::vector<double> grad = free_components(functional_gradient(st.pair, ctx), ctx);
    std::vector<double> dir = grad;
    gram.apply(dir);
    double slope = 0.0, gnorm = 0.0;
    for (std::size_t n = 0; n < grad.size(); ++n) {
      slope += grad[n] * dir[n];
      gnorm = std::max(gnorm, std::abs(grad[n]));
    }
    st.grad_norm = gnorm;
    st.iter = it;
    if (it == 0) st.history.push_back({0, st.J, gnorm, 0.0});
    if (gnorm < cfg.grad_tol) {
      st.converged = true;
      break;
    }
    if (it >= cfg.max_iters) break;
    step = std::min(2.0 * step, cfg.rho_init * 1e6);
    double j_trial = 0.0;
    PairField candidate;
    for (;;) {
      for (std::size_t n = 0; n < x.size(); ++n) trial[n] = x[n] - step * dir[n];
      candidate = apply_constraints(trial, data, ctx);
      j_trial = functional_value(candidate, ctx);
      if (j_trial <= st.J - cfg.armijo * step * slope) break;
      step *= 0.5;
      if (step < 1e-30 || step * gnorm < 1e-16 * std::max(1.0, gnorm)) {
        std::ostringstream msg;
        msg << "line search stagnated at iteration " << it << " (J = " << st.J << ", gradient norm = " << gnorm
            << ", directional slope = " << slope << ")";
        throw StagnationError(msg.str());
      }
    }
    x.swap(trial);
    st.pair = std::move(candidate);
    st.J = j_trial;
    st.history.push_back({it + 1, st.J, gnorm, step});
    if (!st.radius_exceeded && s_norm_sq(st.pair, ctx) > cfg.radius * cfg.radius) st.radius_exceeded = true;
  }
  return st;
}

}  // namespace rte
