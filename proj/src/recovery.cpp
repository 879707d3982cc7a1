#include "rte/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rte/errors.hpp"

namespace rte {

namespace {

double difference(const RadianceField& f, std::size_t i, std::size_t j, std::size_t k, bool along_x) {
  const Grid3& g = f.grid();
  const std::size_t n = along_x ? g.nx() : g.nz();
  const std::size_t c = along_x ? i : j;
  const double h = along_x ? g.x1.h : g.z.h;
  auto at = [&](std::size_t m) { return along_x ? f(m, j, k) : f(i, m, k); };
  if (c == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (c + 1 == n) return (3.0 * at(c) - 4.0 * at(c - 1) + at(c - 2)) / (2.0 * h);
  return (at(c + 1) - at(c - 1)) / (2.0 * h);
}

}  // namespace

SpatialField recover_attenuation(const RadianceField& p, const SpatialField& mu_s, const KernelMatrix& kernel,
                                 const Geometry& geometry) {
  const Grid3& g = p.grid();
  if (!(mu_s.grid() == g.spatial())) throw ConfigError("recover_attenuation: mu_s grid does not match p");
  if (kernel.n != g.na()) throw ConfigError("recover_attenuation: kernel size does not match the alpha grid");
  if (g.nx() < 3 || g.nz() < 3) throw ConfigError("recover_attenuation: grid needs at least 3 nodes per direction");
  const std::vector<double> wa = g.alpha.trapezoid_weights();
  const double inv_len = 1.0 / (2.0 * geometry.d);
  SpatialField a(g.spatial());
  const std::size_t nx = g.nx();
  const std::size_t nz = g.nz();
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < nz; ++j) {
    std::vector<double> ep(g.na());
    for (std::size_t i = 0; i < nx; ++i) {
      const Point x{g.x1.node(i), g.z.node(j)};
      for (std::size_t m = 0; m < g.na(); ++m) ep[m] = std::exp(p(i, j, m));
      double transport = 0.0, scatter = 0.0;
      for (std::size_t k = 0; k < g.na(); ++k) {
        const Vec2 nu = direction_vector(x, g.alpha.node(k));
        transport += wa[k] * (nu.x1 * difference(p, i, j, k, true) + nu.z * difference(p, i, j, k, false));
        if (mu_s(i, j) != 0.0) {
          double ig = 0.0;
          for (std::size_t m = 0; m < g.na(); ++m) ig += kernel(k, m) * ep[m];
          scatter += wa[k] * mu_s(i, j) * ig / ep[k];
        }
      }
      a(i, j) = inv_len * (scatter - transport);
    }
  }
  return a;
}

double computed_contrast(const SpatialField& mu_a) {
  double mx = 0.0;
  for (double v : mu_a.values()) mx = std::max(mx, v);
  return 1.0 + mx / 5.0;
}

Reconstruction reconstruct(const PairField& pair, const InverseContext& ctx) {
  Reconstruction rec;
  rec.a_comp = recover_attenuation(pair.p, ctx.mu_s(), ctx.kernel(), ctx.geometry());
  rec.mu_a_comp = rec.a_comp;
  const auto mu_s = ctx.mu_s().values();
  auto mu_a = rec.mu_a_comp.values();
  for (std::size_t n = 0; n < mu_a.size(); ++n) mu_a[n] -= mu_s[n];
  rec.contrast = computed_contrast(rec.mu_a_comp);
  return rec;
}

Score score(const SpatialField& mu_a_comp, const Phantom& truth) {
  const Grid2& g = mu_a_comp.grid();
  if (!(truth.grid == g)) throw ConfigError("score: reconstruction and phantom grids differ");
  const std::vector<double> wx = g.x1.trapezoid_weights();
  const std::vector<double> wz = g.z.trapezoid_weights();
  double err = 0.0, ref = 0.0, mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.nz(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const double w = wx[i] * wz[j];
      const double d = mu_a_comp(i, j) - truth.mu_a(i, j);
      err += w * d * d;
      ref += w * truth.mu_a(i, j) * truth.mu_a(i, j);
      mx = std::max(mx, mu_a_comp(i, j));
    }
  Score s;
  s.l2_rel_error = ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
  auto centroid = [&](auto&& inside) {
    double cx = 0.0, cz = 0.0, count = 0.0;
    for (std::size_t j = 0; j < g.nz(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i)
        if (inside(i, j)) {
          cx += g.x1.node(i);
          cz += g.z.node(j);
          count += 1.0;
        }
    return std::pair{Point{cx / count, cz / count}, count};
  };
  const auto [true_c, true_n] = centroid([&](std::size_t i, std::size_t j) { return truth.mask(i, j); });
  if (mx > 0.0 && true_n > 0.0) {
    const double threshold = 0.5 * mx;
    const auto [rec_c, rec_n] = centroid([&](std::size_t i, std::size_t j) { return mu_a_comp(i, j) >= threshold; });
    s.centroid_offset = std::hypot(rec_c.x1 - true_c.x1, rec_c.z - true_c.z);
  } else {
    s.centroid_offset = std::numeric_limits<double>::infinity();
  }
  s.contrast = computed_contrast(mu_a_comp);
  s.true_contrast = true_contrast(truth.c_a, truth.mu_s_background);
  s.contrast_error = std::abs(s.contrast - s.true_contrast) / s.true_contrast;
  return s;
}

void apply_score(Reconstruction& rec, const Phantom& truth) {
  const Score s = score(rec.mu_a_comp, truth);
  rec.l2_rel_error = s.l2_rel_error;
  rec.centroid_offset = s.centroid_offset;
}

}  // namespace rte
