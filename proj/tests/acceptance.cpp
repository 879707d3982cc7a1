// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rte/carleman.hpp"
#include "rte/config.hpp"
#include "rte/errors.hpp"
#include "rte/pipeline.hpp"

using namespace rte;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& run) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %2d %-28s %s  %s [%.1f s]\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

InverseContext context(const RunConfig& c, const Grid3& grid) {
  return InverseContext(grid, c.geometry, SpatialField(grid.spatial(), c.mu_s_background),
                        KernelModel{c.c_g, c.geometry.d}, c.inversion());
}

bool nonincreasing(const InversionState& s) {
  for (std::size_t n = 1; n < s.history.size(); ++n)
    if (s.history[n].J > s.history[n - 1].J) return false;
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RTE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  const RunConfig base;
  ForwardRun test1;  // default letter 'A', c_a = 5, noiseless; reused below
  double forward_seconds = 0.0;

  report(1, "forward positivity", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    test1 = run_forward(base);
    forward_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const GridSet& gs = test1.fine;
    double min_u = INFINITY, min_u0 = INFINITY;
    for (std::size_t k = 0; k < gs.omega.na(); ++k)
      for (std::size_t j = 0; j < gs.omega.nz(); ++j)
        for (std::size_t i = 0; i < gs.omega.nx(); ++i) {
          min_u = std::min(min_u, test1.solution.u(gs.omega_i0 + i, gs.omega_j0 + j, k));
          min_u0 = std::min(min_u0, test1.solution.ballistic(gs.omega_i0 + i, gs.omega_j0 + j, k));
        }
    const bool ok = min_u > 0.0 && min_u >= min_u0 - 1e-12 && forward_seconds <= 300.0;
    return Outcome{ok, fmt("min u = %.6g, min u0 = %.6g, %zu iterations", min_u, min_u0, test1.solution.iterations)};
  });

  report(2, "fixed point vs direct", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSet gs = GridSet::build(base.geometry, 0.125, 0.125, 0.125);
    const ForwardModel m =
        ForwardModel::make(gs, make_phantom(base.letter, base.c_a, base.geometry, gs.domain.spatial()),
                           SourceModel::make(base.sigma), KernelModel{base.c_g, base.geometry.d});
    const ForwardSolution fp = solve_forward(m, 1e-12);
    const DirectSolution direct = solve_forward_direct(m);
    const double diff = max_abs_diff(fp.u, direct.u);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool shape = gs.domain.nx() == 9 && gs.domain.nz() == 17 && gs.domain.na() == 9;
    return Outcome{shape && diff < 1e-8 && secs <= 10.0, fmt("max |u_fp - u_direct| = %.3g on 9x17x9", diff)};
  });

  report(3, "gradient check", [&] {
    RunConfig c = base;
    c.h_inverse = 0.1;
    c.h_forward = 0.05;
    const ForwardRun fwd = run_forward(c);
    const InverseContext ctx = context(c, fwd.data.grid());
    const GradientCheck g = gradient_check(fwd.data, ctx, 20, c.seed, 1e-5, 1e-5);
    const Grid3& grid = fwd.data.grid();
    const bool shape = grid.nx() == 11 && grid.nz() == 11 && grid.na() == 11;
    return Outcome{shape && g.failures == 0 && g.directions == 20,
                   fmt("%zu/20 directions within 1e-5, worst relative deviation %.3g", g.directions - g.failures, g.worst)};
  });

  const InverseContext ctx = context(base, test1.data.grid());

  report(4, "convexity gap", [&] {
    const ConvexitySweep s = convexity_sweep(test1.data, ctx, 100, base.seed, base.convexity_radius);
    return Outcome{s.pairs == 100 && s.violations == 0,
                   fmt("%zu violations in %zu pairs, min slack %.4g", s.violations, s.pairs, s.min_slack)};
  });

  InverseRun inv1;
  report(5, "descent contract", [&] {
    inv1 = run_inverse(base, test1.data);
    const InversionState& s = inv1.state;
    const bool ok = s.converged && s.grad_norm < 1e-2 && nonincreasing(s);
    return Outcome{ok, fmt("%zu iterations, final max|grad| = %.3g, J %.6g -> %.6g", s.iter, s.grad_norm,
                           s.history.front().J, s.J)};
  });

  report(6, "contrast recovery", [&] {
    const Score& s = inv1.score;
    const double cell = base.h_inverse;
    const bool contrast_ok = std::abs(s.contrast - 2.0) <= 0.25 * 2.0;
    const bool centroid_ok = s.centroid_offset <= 3.0 * cell;
    return Outcome{contrast_ok && centroid_ok,
                   fmt("contrast %.4g (limit 1.5..2.5) %s, centroid offset %.4g (limit %.3g) %s", s.contrast,
                       contrast_ok ? "ok" : "out", s.centroid_offset, 3.0 * cell, centroid_ok ? "ok" : "out")};
  });

  report(7, "contrast sweep", [&] {
    const std::array<double, 4> ca{10.0, 15.0, 20.0, 30.0};
    std::string detail;
    bool ok = true;
    for (double c_a : ca) {
      RunConfig c = base;
      c.c_a = c_a;
      const InverseRun r = run_inverse(c, run_forward(c).data);
      const double target = 1.0 + c_a / 5.0;
      const bool in = std::abs(r.score.contrast - target) <= 0.3 * target;
      ok = ok && in;
      detail += fmt("c_a=%g: %.4g vs %g%s; ", c_a, r.score.contrast, target, in ? "" : " (out)");
    }
    return Outcome{ok, detail};
  });

  report(8, "noise robustness", [&] {
    RunConfig c = base;
    c.delta = 0.05;
    const InverseRun r = run_inverse(c, run_forward(c).data);
    const bool ok = std::abs(r.score.contrast - 2.0) <= 0.35 * 2.0;
    return Outcome{ok, fmt("delta=0.05: contrast %.4g (limit 1.3..2.7), %zu iterations, converged %d", r.score.contrast,
                           r.state.iter, int(r.state.converged))};
  });

  report(9, "carleman sweep", [&] {
    const Grid2 omega = test1.data.grid().spatial();
    const std::vector<double> lambdas{2.0, 5.0, 10.0};
    const CarlemanReport a = empirical_carleman_constant(omega, 50, lambdas, base.seed);
    const CarlemanReport b = empirical_carleman_constant(omega, 50, lambdas, base.seed);
    bool ok = true;
    std::string detail;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      ok = ok && a.rows[l].min_ratio > 0.0 && a.rows[l].min_ratio == b.rows[l].min_ratio;
      detail += fmt("lambda=%g: min ratio %.4g (%zu used, %zu excluded); ", lambdas[l], a.rows[l].min_ratio,
                    a.rows[l].used, a.rows[l].excluded);
    }
    std::string free_note = "free top: ";
    try {
      const CarlemanReport f = empirical_carleman_constant(omega, 50, lambdas, base.seed, 5, TopCondition::Free);
      for (const CarlemanRow& r : f.rows) free_note += fmt("%zu excluded at lambda=%g; ", r.excluded, r.lambda);
    } catch (const DomainError& e) {
      free_note += e.what();
    }
    std::printf("             note: %s\n", free_note.c_str());
    return Outcome{ok, detail + "repeat run identical"};
  });

  report(10, "reproducibility", [&] {
    const fs::path root = fs::temp_directory_path() / "rte_acceptance";
    fs::remove_all(root);
    const int n = std::max(4, static_cast<int>(std::thread::hardware_concurrency()));
    const std::vector<std::pair<std::string, int>> runs{{"w1_a", 1}, {"w1_b", 1}, {"wN", n}};
    for (const auto& [name, workers] : runs) {
      const std::string common = " --seed 3 --delta 0.03 --workers " + std::to_string(workers) + " --out " + (root / name).string();
      if (cli("forward" + common) != 0 || cli("invert" + common) != 0)
        return Outcome{false, "CLI run " + name + " failed"};
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(root / "w1_a")) {
      const fs::path f = entry.path().filename();
      const std::string ref = slurp(root / "w1_a" / f);
      if (ref != slurp(root / "w1_b" / f)) return Outcome{false, f.string() + " differs between repeated runs"};
      if (ref != slurp(root / "wN" / f)) return Outcome{false, f.string() + " differs between 1 and N workers"};
      ++compared;
    }
    return Outcome{compared >= 5, fmt("%zu output files bit-identical across 2 runs and workers 1 vs %d", compared, n)};
  });

  std::printf("acceptance: %d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
