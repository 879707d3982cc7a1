#include "rte/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rte/errors.hpp"
#include "rte/io.hpp"
#include "rte/random.hpp"

namespace rte {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("bad number for " + std::string(key) + ": '" + s + "'");
  return v;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("bad unsigned integer for " + std::string(key) + ": '" + s + "'");
  return v;
}

std::vector<double> to_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(to_double(key, item));
  return out;
}

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  std::ostringstream msg;
  if (!(sigma > 0.0)) msg << "sigma must be > 0; ";
  if (!(c_g >= 0.0 && c_g < 1.0)) msg << "c_g must lie in [0, 1); ";
  if (!(mu_s_background >= 0.0)) msg << "mu_s_background must be >= 0; ";
  if (!(c_a >= 0.0)) msg << "c_a must be >= 0; ";
  if (!(h_forward > 0.0) || !(h_inverse > 0.0)) msg << "grid steps must be > 0; ";
  if (h_inverse < h_forward) msg << "h_inverse must not be finer than h_forward; ";
  if (!(delta >= 0.0)) msg << "delta must be >= 0; ";
  if (!(forward_tol > 0.0)) msg << "forward_tol must be > 0; ";
  if (!(convexity_radius > 0.0)) msg << "convexity_radius must be > 0; ";
  if (!(gradient_h > 0.0)) msg << "gradient_h must be > 0; ";
  if (!msg.str().empty()) throw ConfigError("invalid run config: " + msg.str());
  inversion().validate();
}

InversionConfig RunConfig::inversion() const {
  InversionConfig c;
  c.lambda = lambda;
  c.gamma = gamma;
  c.epsilon = epsilon;
  c.rho_init = rho_init;
  c.grad_tol = grad_tol;
  c.max_iters = max_iters;
  return c;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  auto num = [](double v) { return format_double(v); };
  kv["B"] = num(geometry.B);
  kv["a"] = num(geometry.a);
  kv["b"] = num(geometry.b);
  kv["d"] = num(geometry.d);
  kv["sigma"] = num(sigma);
  kv["c_g"] = num(c_g);
  kv["mu_s_background"] = num(mu_s_background);
  kv["letter"] = to_string(letter);
  kv["c_a"] = num(c_a);
  kv["h_forward"] = num(h_forward);
  kv["h_inverse"] = num(h_inverse);
  kv["lambda"] = num(lambda);
  kv["gamma"] = num(gamma);
  kv["epsilon"] = num(epsilon);
  kv["delta"] = num(delta);
  kv["seed"] = std::to_string(seed);
  kv["neumann"] = std::string(to_string(neumann));
  kv["grad_tol"] = num(grad_tol);
  kv["max_iters"] = std::to_string(max_iters);
  kv["rho_init"] = num(rho_init);
  kv["forward_tol"] = num(forward_tol);
  kv["forward_max_iters"] = std::to_string(forward_max_iters);
  kv["gradient_directions"] = std::to_string(gradient_directions);
  kv["gradient_h"] = num(gradient_h);
  kv["convexity_pairs"] = std::to_string(convexity_pairs);
  kv["convexity_radius"] = num(convexity_radius);
  kv["carleman_samples"] = std::to_string(carleman_samples);
  std::string lambdas;
  for (std::size_t i = 0; i < carleman_lambdas.size(); ++i) lambdas += (i ? "," : "") + num(carleman_lambdas[i]);
  kv["carleman_lambdas"] = lambdas;
  kv["smoothing_passes"] = std::to_string(smoothing_passes);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void set_config_value(RunConfig& c, std::string_view key_in, std::string_view value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "B") c.geometry.B = to_double(key, value);
  else if (key == "a") c.geometry.a = to_double(key, value);
  else if (key == "b") c.geometry.b = to_double(key, value);
  else if (key == "d") c.geometry.d = to_double(key, value);
  else if (key == "sigma") c.sigma = to_double(key, value);
  else if (key == "c_g") c.c_g = to_double(key, value);
  else if (key == "mu_s_background") c.mu_s_background = to_double(key, value);
  else if (key == "letter") c.letter = parse_letter(value);
  else if (key == "c_a") c.c_a = to_double(key, value);
  else if (key == "h_forward") c.h_forward = to_double(key, value);
  else if (key == "h_inverse") c.h_inverse = to_double(key, value);
  else if (key == "lambda") c.lambda = to_double(key, value);
  else if (key == "gamma") c.gamma = to_double(key, value);
  else if (key == "epsilon") c.epsilon = to_double(key, value);
  else if (key == "delta") c.delta = to_double(key, value);
  else if (key == "seed") c.seed = to_unsigned(key, value);
  else if (key == "neumann") c.neumann = parse_neumann_convention(value);
  else if (key == "grad_tol") c.grad_tol = to_double(key, value);
  else if (key == "max_iters") c.max_iters = to_unsigned(key, value);
  else if (key == "rho_init") c.rho_init = to_double(key, value);
  else if (key == "forward_tol") c.forward_tol = to_double(key, value);
  else if (key == "forward_max_iters") c.forward_max_iters = to_unsigned(key, value);
  else if (key == "gradient_directions") c.gradient_directions = to_unsigned(key, value);
  else if (key == "gradient_h") c.gradient_h = to_double(key, value);
  else if (key == "convexity_pairs") c.convexity_pairs = to_unsigned(key, value);
  else if (key == "convexity_radius") c.convexity_radius = to_double(key, value);
  else if (key == "carleman_samples") c.carleman_samples = to_unsigned(key, value);
  else if (key == "carleman_lambdas") c.carleman_lambdas = to_list(key, value);
  else if (key == "smoothing_passes") c.smoothing_passes = to_unsigned(key, value);
  else if (key == "out") c.out = value;
  else if (key == "workers") c.workers = to_unsigned(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    set_config_value(base, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
  return base;
}

}  // namespace rte
