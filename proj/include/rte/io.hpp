#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rte/boundary.hpp"
#include "rte/inverse.hpp"
#include "rte/recovery.hpp"

namespace rte {

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view text);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// CSV with one leading "# key=value,key=value" metadata line and a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Metadata& meta, const std::vector<std::string>& columns);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::string_view v);
  void end_row();

 private:
  std::ofstream out_;
  std::size_t column_ = 0;
  std::size_t width_ = 0;
};

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  const std::string& meta_value(const std::string& key) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// key=value lines.
void write_key_values(const std::filesystem::path& path, const Metadata& values);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Columns face, x1, z, alpha, g, g1, g2, g3, g4; g3/g4 are blank off the top face. The metadata
/// line records the config hash, delta, seed, geometry and grid steps.
void write_boundary_csv(const std::filesystem::path& path, const BoundaryDataSet& data, const Geometry& geometry,
                        const std::string& config_hash);
struct BoundaryFile {
  BoundaryDataSet data;
  Geometry geometry;
  std::string config_hash;
};
BoundaryFile read_boundary_csv(const std::filesystem::path& path);

void write_radiance_csv(const std::filesystem::path& path, const RadianceField& u, const std::string& config_hash);
void write_pair_csv(const std::filesystem::path& path, const PairField& pair, const std::string& config_hash);
void write_iterations_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history,
                          const std::string& config_hash);
/// Columns x1, z, a_comp, mu_a_comp.
void write_reconstruction_csv(const std::filesystem::path& path, const Reconstruction& rec,
                              const std::string& config_hash);
/// Reads a_comp and mu_a_comp back; the grid is rebuilt from the node coordinates.
Reconstruction read_reconstruction_csv(const std::filesystem::path& path);

}  // namespace rte
