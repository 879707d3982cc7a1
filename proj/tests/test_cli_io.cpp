#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "rte/config.hpp"
#include "rte/errors.hpp"
#include "rte/io.hpp"
#include "rte/random.hpp"
#include "support.hpp"

using namespace rte;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rte_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the CLI with the given arguments; returns its exit status.
int cli(const std::string& args) {
  const std::string cmd = std::string(RTE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kSmall = "--set h_forward=0.1 --set h_inverse=0.1";

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("config defaults") {
  const RunConfig c;
  CHECK(c.geometry.B == 0.5);
  CHECK(c.geometry.d == 0.5);
  CHECK(c.geometry.a == 1.0);
  CHECK(c.geometry.b == 2.0);
  CHECK(c.sigma == 0.05);
  CHECK(c.c_g == 0.5);
  CHECK(c.mu_s_background == 5.0);
  CHECK(c.h_forward == 1.0 / 40.0);
  CHECK(c.h_inverse == 1.0 / 20.0);
  CHECK(c.lambda == 5.0);
  CHECK(c.gamma == 0.001);
  CHECK(c.epsilon == 0.01);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config hash") {
  RunConfig a, b;
  CHECK(a.hash() == b.hash());
  b.out = "elsewhere";
  b.workers = 7;
  CHECK(a.hash() == b.hash());
  b.lambda = 5.0000000001;
  CHECK(a.hash() != b.hash());
  CHECK(a.hash_hex().size() == 16);
  CHECK(a.hash() == fnv1a64(a.canonical()));
  // canonical form is sorted key=value lines
  std::istringstream lines(a.canonical());
  std::string line, prev;
  while (std::getline(lines, line)) {
    CHECK(line.find('=') != std::string::npos);
    CHECK(prev < line);
    prev = line;
  }
}

TEST_CASE("config values and files") {
  RunConfig c;
  set_config_value(c, "letter", "SZ");
  set_config_value(c, "c_a", "15");
  set_config_value(c, "seed", "42");
  set_config_value(c, "carleman_lambdas", "1, 3, 9");
  CHECK(c.letter == Letter::SZ);
  CHECK(c.c_a == 15.0);
  CHECK(c.seed == 42);
  CHECK(c.carleman_lambdas == std::vector<double>{1.0, 3.0, 9.0});
  CHECK_THROWS_AS(set_config_value(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "lambda", "five"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "seed", "-3"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "letter", "Q"), ConfigError);

  const fs::path dir = scratch("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# test config\nlambda = 3\n\ngamma=0.01  # inline\nletter = OMEGA\n";
  }
  const RunConfig loaded = load_config(dir / "run.cfg");
  CHECK(loaded.lambda == 3.0);
  CHECK(loaded.gamma == 0.01);
  CHECK(loaded.letter == Letter::Omega);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "lambda 3\n";
  }
  CHECK_THROWS_AS(load_config(dir / "bad.cfg"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), ConfigError);

  RunConfig invalid;
  invalid.c_g = 1.0;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
  invalid = {};
  invalid.h_inverse = 0.01;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
}

TEST_CASE("decimal round trip") {
  const RandomStream rs(1, "unit");
  for (std::uint64_t n = 0; n < 2000; ++n) {
    const double v = (rs.symmetric(n) * std::pow(10.0, static_cast<double>(n % 40) - 20.0));
    CHECK(parse_double(format_double(v)) == v);
  }
  for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, 1e300, 5e-324, std::numeric_limits<double>::max()})
    CHECK(parse_double(format_double(v)) == v);
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
}

TEST_CASE("boundary csv round trip") {
  const Grid3 grid = testing::omega_grid(0.1);
  const BoundaryDataSet data = testing::make_data(
      grid, [](double x, double z, double a) { return std::sin(x * 7.1) - z / 3.0 + a * a; },
      [](double x, double z, double a) { return std::exp(x + z * a) / 7.0; },
      [](double x, double, double a) { return x / 3.0 - a; }, [](double x, double, double a) { return x * a / 11.0; });
  const fs::path dir = scratch("boundary");
  write_boundary_csv(dir / "b.csv", data, Geometry{}, "00ff");
  const BoundaryFile back = read_boundary_csv(dir / "b.csv");
  CHECK(back.config_hash == "00ff");
  CHECK(back.data.grid() == grid);
  CHECK(back.data.g.values == data.g.values);
  CHECK(back.data.g1.values == data.g1.values);
  CHECK(back.data.g2.values == data.g2.values);
  CHECK(back.data.g3.values == data.g3.values);
  CHECK(back.data.g4.values == data.g4.values);
  const CsvTable t = read_csv(dir / "b.csv");
  CHECK(t.meta_value("config_hash") == "00ff");
  CHECK(t.columns == std::vector<std::string>{"face", "x1", "z", "alpha", "g", "g1", "g2", "g3", "g4"});
}

TEST_CASE("reconstruction csv and key values") {
  const Grid2 g = testing::omega_grid(0.05).spatial();
  Reconstruction rec;
  rec.a_comp = SpatialField(g);
  rec.mu_a_comp = SpatialField(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    rec.a_comp.values()[n] = 5.0 + std::sin(0.1 * static_cast<double>(n));
    rec.mu_a_comp.values()[n] = rec.a_comp.values()[n] - 5.0;
  }
  const fs::path dir = scratch("rec");
  write_reconstruction_csv(dir / "r.csv", rec, "abc");
  const Reconstruction back = read_reconstruction_csv(dir / "r.csv");
  CHECK(back.a_comp.grid() == g);
  CHECK(std::equal(back.a_comp.values().begin(), back.a_comp.values().end(), rec.a_comp.values().begin()));
  CHECK(std::equal(back.mu_a_comp.values().begin(), back.mu_a_comp.values().end(), rec.mu_a_comp.values().begin()));

  write_key_values(dir / "m.txt", {{"contrast", format_double(2.25)}, {"config_hash", "abc"}});
  const auto kv = read_key_values(dir / "m.txt");
  CHECK(kv.at("contrast") == "2.25");
  CHECK(kv.at("config_hash") == "abc");
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const std::string out = " --out " + (dir / "a").string();
  REQUIRE(cli("forward " + kSmall + out) == 0);
  CHECK(fs::exists(dir / "a" / "boundary.csv"));
  CHECK(fs::exists(dir / "a" / "forward_manifest.txt"));
  REQUIRE(cli("invert " + kSmall + out) == 0);
  for (const char* f : {"iterations.csv", "pair.csv", "reconstruction.csv", "metrics.txt"})
    CHECK(fs::exists(dir / "a" / f));
  const auto metrics = read_key_values(dir / "a" / "metrics.txt");
  CHECK(metrics.count("contrast") == 1);
  RunConfig small;
  small.h_forward = small.h_inverse = 0.1;
  for (const char* f : {"boundary.csv", "iterations.csv", "pair.csv", "reconstruction.csv", "metrics.txt",
                        "forward_manifest.txt"})
    CHECK(slurp(dir / "a" / f).find(small.hash_hex()) != std::string::npos);
  CHECK(cli("score " + kSmall + out) == 0);
  CHECK(fs::exists(dir / "a" / "score.txt"));

  // rerun into a second directory: identical bytes
  const std::string out_b = " --out " + (dir / "b").string();
  REQUIRE(cli("forward " + kSmall + out_b) == 0);
  REQUIRE(cli("invert " + kSmall + out_b) == 0);
  for (const char* f : {"boundary.csv", "iterations.csv", "pair.csv", "reconstruction.csv", "metrics.txt"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

  // noiseless data does not depend on the seed
  const std::string out_c = " --out " + (dir / "c").string();
  REQUIRE(cli("forward --seed 9 " + kSmall + out_c) == 0);
  const CsvTable ta = read_csv(dir / "a" / "boundary.csv");
  const CsvTable tc = read_csv(dir / "c" / "boundary.csv");
  const std::size_t gcol = ta.column("g");
  REQUIRE(ta.rows.size() == tc.rows.size());
  for (std::size_t r = 0; r < ta.rows.size(); ++r) CHECK(ta.rows[r][gcol] == tc.rows[r][gcol]);

  // usage errors
  CHECK(cli("forward --letter Q" + out) == 1);
  CHECK(cli("forward --no-such-flag") == 1);
  CHECK(cli("") == 1);
  CHECK(cli("invert --set h_inverse=0.2 --set h_forward=0.1" + out) == 1);  // grid mismatch with the data
  CHECK(cli("invert " + kSmall + " --data " + (dir / "none.csv").string() + out) == 1);
}

TEST_CASE("verify command") {
  const fs::path dir = scratch("verify");
  const std::string args = "verify " + kSmall + " --set convexity_pairs=10 --set carleman_samples=10 --out ";
  REQUIRE(cli(args + (dir / "a").string()) == 0);
  REQUIRE(cli(args + (dir / "b").string()) == 0);
  for (const char* f : {"verify_report.txt", "convexity_gaps.csv", "carleman_ratios.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  // gamma = 0: the bound degenerates but gaps are still reported
  REQUIRE(cli("verify " + kSmall + " --gamma 0 --set convexity_pairs=5 --set carleman_samples=5 --out " +
              (dir / "c").string()) == 0);
  const CsvTable gaps = read_csv(dir / "c" / "convexity_gaps.csv");
  CHECK(gaps.rows.size() == 5);
  for (const auto& row : gaps.rows) CHECK(parse_double(row[gaps.column("lower_bound")]) == 0.0);
}

}  // TEST_SUITE
