#pragma once

#include "orlhom/common.hpp"
#include "orlhom/field.hpp"
#include "orlhom/integrand.hpp"
#include "orlhom/solver.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace orlhom {

// Flat sectioned key/value text:
//   [section]
//   key = value            # comment
// Values are scalars, space/comma-separated lists, or semicolon-separated
// matrix lists (entries row-major).
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  long get_int(const std::string& section, const std::string& key) const;
  long get_int_or(const std::string& section, const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  const std::string& text() const { return text_; }
  std::string digest() const;  // FNV-1a 64 over the raw bytes, hex

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string text_;
};

struct MeshParams {
  int d = 1;
  int N = 1;
  int n = 16;
  int t = 1;
};

LatticeField field_from_config(const ConfigFile& cfg, const std::string& section, int dim);
IntegrandSpec integrand_from_config(const ConfigFile& cfg);
NonconvexSpec nonconvex_from_config(const ConfigFile& cfg);
MeshParams mesh_from_config(const ConfigFile& cfg);
SolverConfig solver_from_config(const ConfigFile& cfg);
std::vector<Mat> sigmas_from_config(const ConfigFile& cfg, int N, int d);
std::vector<int> t_list_from_config(const ConfigFile& cfg);
std::vector<std::uint64_t> seeds_from_config(const ConfigFile& cfg);

}  // namespace orlhom
