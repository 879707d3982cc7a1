#include "rte/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "rte/errors.hpp"

namespace rte {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("bad number '" + s + "'");
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string meta_line(const Metadata& meta) {
  std::string s = "#";
  for (std::size_t i = 0; i < meta.size(); ++i) s += (i ? "," : " ") + meta[i].first + "=" + meta[i].second;
  return s;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const Metadata& meta, const std::vector<std::string>& columns)
    : out_(path), width_(columns.size()) {
  if (!out_) throw ConfigError("cannot write " + path.string());
  out_ << meta_line(meta) << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::operator<<(double v) { return *this << std::string_view(format_double(v)); }

CsvWriter& CsvWriter::operator<<(std::string_view v) {
  if (column_++ > 0) out_ << ',';
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (column_ != width_) throw Error("CsvWriter: row has the wrong number of cells");
  out_ << '\n';
  column_ = 0;
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("CSV has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

const std::string& CsvTable::meta_value(const std::string& key) const {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ConfigError("CSV metadata has no key '" + key + "'");
  return it->second;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const std::string& item : split(line.substr(1), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        std::string key = item.substr(0, eq);
        key.erase(0, key.find_first_not_of(' '));
        t.meta[key] = item.substr(eq + 1);
      }
      continue;
    }
    if (!header) {
      t.columns = split(line, ',');
      header = true;
      continue;
    }
    t.rows.push_back(split(line, ','));
    if (t.rows.back().size() != t.columns.size())
      throw ConfigError(path.string() + ": row " + std::to_string(t.rows.size()) + " has the wrong number of cells");
  }
  if (!header) throw ConfigError(path.string() + ": missing header row");
  return t;
}

void write_key_values(const std::filesystem::path& path, const Metadata& values) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [k, v] : values) out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_boundary_csv(const std::filesystem::path& path, const BoundaryDataSet& data, const Geometry& geometry,
                        const std::string& config_hash) {
  const Grid3& g = data.grid();
  const Metadata meta{{"config_hash", config_hash},
                      {"delta", format_double(data.noise_delta)},
                      {"seed", std::to_string(data.seed)},
                      {"h_x1", format_double(g.x1.h)},
                      {"h_z", format_double(g.z.h)},
                      {"h_alpha", format_double(g.alpha.h)},
                      {"B", format_double(geometry.B)},
                      {"a", format_double(geometry.a)},
                      {"b", format_double(geometry.b)},
                      {"d", format_double(geometry.d)}};
  CsvWriter csv(path, meta, {"face", "x1", "z", "alpha", "g", "g1", "g2", "g3", "g4"});
  const BoundaryLayout& layout = data.g.layout;
  for (std::size_t k = 0; k < g.na(); ++k)
    for (std::size_t b = 0; b < layout.count(); ++b) {
      const BoundaryNode& n = layout.nodes()[b];
      const std::size_t idx = layout.index(b, k);
      csv << to_string(n.face) << g.x1.node(n.i) << g.z.node(n.j) << g.alpha.node(k) << data.g.values[idx]
          << data.g1.values[idx] << data.g2.values[idx];
      if (n.face == Face::Top) {
        csv << data.g3.at(n.i, k) << data.g4.at(n.i, k);
      } else {
        csv << std::string_view() << std::string_view();
      }
      csv.end_row();
    }
}

BoundaryFile read_boundary_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  BoundaryFile f;
  f.config_hash = t.meta_value("config_hash");
  f.geometry.B = parse_double(t.meta_value("B"));
  f.geometry.a = parse_double(t.meta_value("a"));
  f.geometry.b = parse_double(t.meta_value("b"));
  f.geometry.d = parse_double(t.meta_value("d"));
  f.geometry.validate();
  Grid3 g{Grid1D::over(-f.geometry.B, f.geometry.B, parse_double(t.meta_value("h_x1"))),
          Grid1D::over(f.geometry.a, f.geometry.b, parse_double(t.meta_value("h_z"))),
          Grid1D::over(-f.geometry.d, f.geometry.d, parse_double(t.meta_value("h_alpha")))};
  const BoundaryLayout layout(g);
  BoundaryDataSet& data = f.data;
  data.noise_delta = parse_double(t.meta_value("delta"));
  data.seed = std::stoull(t.meta_value("seed"));
  for (BoundaryTrace* tr : {&data.g, &data.g1, &data.g2})
    *tr = BoundaryTrace{layout, std::vector<double>(layout.size(), std::nan(""))};
  data.g3 = TopTrace{g, std::vector<double>(g.nx() * g.na(), std::nan(""))};
  data.g4 = data.g3;
  const std::size_t c_face = t.column("face"), c_x = t.column("x1"), c_z = t.column("z"), c_a = t.column("alpha");
  const std::size_t c_g = t.column("g"), c_g1 = t.column("g1"), c_g2 = t.column("g2");
  const std::size_t c_g3 = t.column("g3"), c_g4 = t.column("g4");
  for (const auto& row : t.rows) {
    const std::size_t i = g.x1.index_of(parse_double(row[c_x]));
    const std::size_t j = g.z.index_of(parse_double(row[c_z]));
    const std::size_t k = g.alpha.index_of(parse_double(row[c_a]));
    const std::ptrdiff_t b = layout.node_at(i, j);
    if (b < 0 || layout.nodes()[static_cast<std::size_t>(b)].face != parse_face(row[c_face]))
      throw ConfigError(path.string() + ": row does not name a boundary node of its face");
    const std::size_t idx = layout.index(static_cast<std::size_t>(b), k);
    data.g.values[idx] = parse_double(row[c_g]);
    data.g1.values[idx] = parse_double(row[c_g1]);
    data.g2.values[idx] = parse_double(row[c_g2]);
    if (j + 1 == g.nz()) {
      data.g3.at(i, k) = parse_double(row[c_g3]);
      data.g4.at(i, k) = parse_double(row[c_g4]);
    }
  }
  auto complete = [](const std::vector<double>& v) {
    return std::none_of(v.begin(), v.end(), [](double x) { return std::isnan(x); });
  };
  if (!complete(data.g.values) || !complete(data.g3.values) || !complete(data.g4.values))
    throw ConfigError(path.string() + ": boundary data is incomplete for its grid");
  return f;
}

void write_radiance_csv(const std::filesystem::path& path, const RadianceField& u, const std::string& config_hash) {
  const Grid3& g = u.grid();
  CsvWriter csv(path, {{"config_hash", config_hash}}, {"x1", "z", "alpha", "u"});
  for (std::size_t k = 0; k < g.na(); ++k)
    for (std::size_t j = 0; j < g.nz(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        csv << g.x1.node(i) << g.z.node(j) << g.alpha.node(k) << u(i, j, k);
        csv.end_row();
      }
}

void write_pair_csv(const std::filesystem::path& path, const PairField& pair, const std::string& config_hash) {
  const Grid3& g = pair.grid();
  CsvWriter csv(path, {{"config_hash", config_hash}}, {"x1", "z", "alpha", "p", "q"});
  for (std::size_t k = 0; k < g.na(); ++k)
    for (std::size_t j = 0; j < g.nz(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        csv << g.x1.node(i) << g.z.node(j) << g.alpha.node(k) << pair.p(i, j, k) << pair.q(i, j, k);
        csv.end_row();
      }
}

void write_iterations_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history,
                          const std::string& config_hash) {
  CsvWriter csv(path, {{"config_hash", config_hash}}, {"iter", "J", "grad_norm", "step"});
  for (const IterationRecord& r : history) {
    csv << std::string_view(std::to_string(r.iter)) << r.J << r.grad_norm << r.step;
    csv.end_row();
  }
}

void write_reconstruction_csv(const std::filesystem::path& path, const Reconstruction& rec,
                              const std::string& config_hash) {
  const Grid2& g = rec.a_comp.grid();
  CsvWriter csv(path, {{"config_hash", config_hash}}, {"x1", "z", "a_comp", "mu_a_comp"});
  for (std::size_t j = 0; j < g.nz(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      csv << g.x1.node(i) << g.z.node(j) << rec.a_comp(i, j) << rec.mu_a_comp(i, j);
      csv.end_row();
    }
}

Reconstruction read_reconstruction_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = t.column("x1"), cz = t.column("z"), ca = t.column("a_comp"), cm = t.column("mu_a_comp");
  if (t.rows.size() < 4) throw ConfigError(path.string() + ": too few rows");
  std::vector<double> xs, zs;
  for (const auto& row : t.rows) {
    xs.push_back(parse_double(row[cx]));
    zs.push_back(parse_double(row[cz]));
  }
  auto axis = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() < 2) throw ConfigError("reconstruction grid needs at least 2 nodes per direction");
    return Grid1D::over(v.front(), v.back(), (v.back() - v.front()) / static_cast<double>(v.size() - 1));
  };
  const Grid2 g{axis(xs), axis(zs)};
  if (t.rows.size() != g.size()) throw ConfigError(path.string() + ": rows do not fill a tensor grid");
  Reconstruction rec;
  rec.a_comp = SpatialField(g);
  rec.mu_a_comp = SpatialField(g);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t i = g.x1.index_of(xs[r]);
    const std::size_t j = g.z.index_of(zs[r]);
    rec.a_comp(i, j) = parse_double(t.rows[r][ca]);
    rec.mu_a_comp(i, j) = parse_double(t.rows[r][cm]);
  }
  rec.contrast = computed_contrast(rec.mu_a_comp);
  return rec;
}

}  // namespace rte
