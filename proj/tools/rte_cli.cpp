// rte: forward data synthesis, inversion, property checks and scoring.
#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "rte/config.hpp"
#include "rte/errors.hpp"
#include "rte/io.hpp"
#include "rte/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rte;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta, c_a, lambda, gamma, epsilon;
  std::optional<std::string> letter, out;
  std::optional<std::size_t> workers;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--delta", o.delta, "multiplicative noise level");
  cmd->add_option("--letter", o.letter, "inclusion shape: A, OMEGA, SZ or NONE");
  cmd->add_option("--ca", o.c_a, "absorption inside the inclusion");
  cmd->add_option("--lambda", o.lambda, "Carleman exponent");
  cmd->add_option("--gamma", o.gamma, "regularization weight");
  cmd->add_option("--epsilon", o.epsilon, "viscosity coefficient");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "thread cap (0 = all cores)");
  cmd->add_option("--set", o.set, "extra key=value overrides")->take_all();
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.delta) c.delta = *o.delta;
  if (o.letter) c.letter = parse_letter(*o.letter);
  if (o.c_a) c.c_a = *o.c_a;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.out) c.out = *o.out;
  if (o.workers) c.workers = *o.workers;
  for (const std::string& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.validate();
  if (c.workers > 0) omp_set_num_threads(static_cast<int>(c.workers));
  fs::create_directories(c.out);
  return c;
}

Metadata config_lines(const RunConfig& c) {
  Metadata m{{"config_hash", c.hash_hex()}};
  std::istringstream in(c.canonical());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    m.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

int cmd_forward(const RunConfig& c, bool dump_u) {
  const ForwardRun run = run_forward(c);
  const std::string hash = c.hash_hex();
  write_boundary_csv(c.out / "boundary.csv", run.data, c.geometry, hash);
  if (dump_u) write_radiance_csv(c.out / "u.csv", run.solution.u, hash);
  double u_min = run.solution.u.values()[0];
  for (double v : run.data.g.values) u_min = std::min(u_min, v);
  Metadata m = config_lines(c);
  m.emplace_back("forward_iterations", std::to_string(run.solution.iterations));
  m.emplace_back("forward_last_increment",
                 format_double(run.solution.increments.empty() ? 0.0 : run.solution.increments.back()));
  m.emplace_back("boundary_min_g", format_double(u_min));
  write_key_values(c.out / "forward_manifest.txt", m);
  std::printf("forward: %zu iterations, boundary data -> %s\n", run.solution.iterations,
              (c.out / "boundary.csv").c_str());
  return 0;
}

int cmd_invert(const RunConfig& c, const fs::path& data_path) {
  const BoundaryFile file = read_boundary_csv(data_path);
  const Geometry& g = file.geometry;
  if (g.B != c.geometry.B || g.a != c.geometry.a || g.b != c.geometry.b || g.d != c.geometry.d)
    throw ConfigError("boundary file geometry does not match the config");
  const InverseRun run = run_inverse(c, file.data);
  const std::string hash = c.hash_hex();
  write_iterations_csv(c.out / "iterations.csv", run.state.history, hash);
  write_pair_csv(c.out / "pair.csv", run.state.pair, hash);
  write_reconstruction_csv(c.out / "reconstruction.csv", run.reconstruction, hash);
  Metadata m = config_lines(c);
  m.emplace_back("data_hash", file.config_hash);
  m.emplace_back("iterations", std::to_string(run.state.iter));
  m.emplace_back("converged", run.state.converged ? "true" : "false");
  m.emplace_back("J", format_double(run.state.J));
  m.emplace_back("grad_norm", format_double(run.state.grad_norm));
  m.emplace_back("radius_exceeded", run.state.radius_exceeded ? "true" : "false");
  m.emplace_back("contrast", format_double(run.score.contrast));
  m.emplace_back("true_contrast", format_double(run.score.true_contrast));
  m.emplace_back("contrast_error", format_double(run.score.contrast_error));
  m.emplace_back("l2_rel_error", format_double(run.score.l2_rel_error));
  m.emplace_back("centroid_offset", format_double(run.score.centroid_offset));
  write_key_values(c.out / "metrics.txt", m);
  std::printf("invert: %zu iterations (%s), J = %.6g, |grad| = %.3g, contrast = %.4g (true %.4g)\n", run.state.iter,
              run.state.converged ? "converged" : "iteration cap", run.state.J, run.state.grad_norm,
              run.score.contrast, run.score.true_contrast);
  return 0;
}

int cmd_verify(const RunConfig& c) {
  const VerifyRun run = run_verify(c);
  const std::string hash = c.hash_hex();
  Metadata m = config_lines(c);
  m.emplace_back("gradient_directions", std::to_string(run.gradient.directions));
  m.emplace_back("gradient_failures", std::to_string(run.gradient.failures));
  m.emplace_back("gradient_worst_error", format_double(run.gradient.worst));
  m.emplace_back("convexity_pairs", std::to_string(run.convexity.pairs));
  m.emplace_back("convexity_violations", std::to_string(run.convexity.violations));
  m.emplace_back("convexity_min_slack", format_double(run.convexity.min_slack));
  m.emplace_back("lipschitz_max_ratio", format_double(run.lipschitz.max_ratio));
  m.emplace_back("lipschitz_mean_ratio", format_double(run.lipschitz.mean_ratio));
  if (!run.carleman_error.empty()) m.emplace_back("carleman_error", run.carleman_error);
  for (const CarlemanRow& r : run.carleman.rows) {
    const std::string key = "carleman_lambda_" + format_double(r.lambda);
    m.emplace_back(key + "_min_ratio", format_double(r.min_ratio));
    m.emplace_back(key + "_used", std::to_string(r.used));
    m.emplace_back(key + "_excluded", std::to_string(r.excluded));
  }
  m.emplace_back("passed", run.passed() ? "true" : "false");
  write_key_values(c.out / "verify_report.txt", m);
  {
    CsvWriter csv(c.out / "convexity_gaps.csv", {{"config_hash", hash}}, {"pair", "gap", "lower_bound"});
    for (std::size_t s = 0; s < run.convexity.records.size(); ++s) {
      csv << std::string_view(std::to_string(s)) << run.convexity.records[s].gap
          << run.convexity.records[s].lower_bound;
      csv.end_row();
    }
  }
  {
    CsvWriter csv(c.out / "carleman_ratios.csv", {{"config_hash", hash}}, {"sample", "lambda", "ratio"});
    for (std::size_t l = 0; l < run.carleman.rows.size(); ++l)
      for (std::size_t s = 0; s < run.carleman.ratios[l].size(); ++s) {
        csv << std::string_view(std::to_string(s)) << run.carleman.rows[l].lambda << run.carleman.ratios[l][s];
        csv.end_row();
      }
  }
  std::printf("verify: gradient %zu/%zu ok (worst %.2e), convexity %zu/%zu ok, Carleman %s -> %s\n",
              run.gradient.directions - run.gradient.failures, run.gradient.directions,
              run.gradient.worst, run.convexity.pairs - run.convexity.violations, run.convexity.pairs,
              run.carleman_error.empty() ? "ok" : run.carleman_error.c_str(), run.passed() ? "PASS" : "FAIL");
  return run.passed() ? 0 : 3;
}

int cmd_score(const RunConfig& c, const fs::path& input) {
  const Reconstruction rec = read_reconstruction_csv(input);
  const Phantom truth = make_phantom(c.letter, c.c_a, c.geometry, rec.mu_a_comp.grid(), c.mu_s_background);
  const Score s = score(rec.mu_a_comp, truth);
  Metadata m{{"config_hash", c.hash_hex()},
             {"contrast", format_double(s.contrast)},
             {"true_contrast", format_double(s.true_contrast)},
             {"contrast_error", format_double(s.contrast_error)},
             {"l2_rel_error", format_double(s.l2_rel_error)},
             {"centroid_offset", format_double(s.centroid_offset)}};
  write_key_values(c.out / "score.txt", m);
  std::printf("score: contrast %.4g (true %.4g), l2 %.4g, centroid offset %.4g\n", s.contrast, s.true_contrast,
              s.l2_rel_error, s.centroid_offset);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attenuation recovery for the stationary radiative transfer equation"};
  app.require_subcommand(1);
  Overrides o_fwd, o_inv, o_ver, o_score;
  bool dump_u = false;
  std::string data_path, input_path;
  auto* fwd = app.add_subcommand("forward", "synthesize boundary data");
  add_common(fwd, o_fwd);
  fwd->add_flag("--dump-u", dump_u, "also write u on P as u.csv");
  auto* inv = app.add_subcommand("invert", "minimize the weighted functional and recover the attenuation");
  add_common(inv, o_inv);
  inv->add_option("--data", data_path, "boundary CSV (default <out>/boundary.csv)");
  auto* ver = app.add_subcommand("verify", "gradient, convexity and Carleman property checks");
  add_common(ver, o_ver);
  auto* sc = app.add_subcommand("score", "score a reconstruction CSV against the configured phantom");
  add_common(sc, o_score);
  sc->add_option("--input", input_path, "reconstruction CSV (default <out>/reconstruction.csv)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    if (*fwd) return cmd_forward(resolve(o_fwd), dump_u);
    if (*inv) {
      const RunConfig c = resolve(o_inv);
      return cmd_invert(c, data_path.empty() ? c.out / "boundary.csv" : fs::path(data_path));
    }
    if (*ver) return cmd_verify(resolve(o_ver));
    if (*sc) {
      const RunConfig c = resolve(o_score);
      return cmd_score(c, input_path.empty() ? c.out / "reconstruction.csv" : fs::path(input_path));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << " (iterations " << e.iterations() << ", last residual "
              << e.last_residual() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
