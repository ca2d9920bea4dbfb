#include "orlhom/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace orlhom {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tokens(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number '" + s + "' for " + context);
  }
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || s->second.count(key) == 0)
    throw ConfigError("config: missing key '" + key + "' in section [" + section + "]");
  return s->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get(section, key), "[" + section + "] " + key);
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long ConfigFile::get_int(const std::string& section, const std::string& key) const {
  double v = get_double(section, key);
  long i = static_cast<long>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config: expected an integer for [" + section + "] " + key);
  return i;
}

long ConfigFile::get_int_or(const std::string& section, const std::string& key, long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const auto& tok : split_tokens(get(section, key), " ,\t"))
    out.push_back(parse_double(tok, "[" + section + "] " + key));
  if (out.empty()) throw ConfigError("config: empty list for [" + section + "] " + key);
  return out;
}

std::string ConfigFile::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text_) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LatticeField field_from_config(const ConfigFile& cfg, const std::string& section, int dim) {
  std::string kind = cfg.get_or(section, "kind", "periodic");
  if (kind == "periodic") {
    auto pattern = cfg.get_list(section, "pattern");
    std::array<long, kMaxDim> period{1, 1, 1};
    if (cfg.has(section, "period")) {
      auto p = cfg.get_list(section, "period");
      if (p.size() == 1) {
        for (int i = 0; i < dim; ++i) period[i] = static_cast<long>(p[0]);
      } else if (static_cast<int>(p.size()) == dim) {
        for (int i = 0; i < dim; ++i) period[i] = static_cast<long>(p[i]);
      } else {
        throw ConfigError("config: [" + section + "] period must have 1 or d entries");
      }
    } else {
      long cells = static_cast<long>(pattern.size());
      period[0] = cells;  // default: variation along the first axis
    }
    return LatticeField::periodic(dim, pattern, period);
  }
  if (kind == "random") {
    auto values = cfg.get_list(section, "values");
    auto probs = cfg.get_list(section, "probs");
    if (values.size() != probs.size())
      throw ConfigError("config: [" + section + "] values and probs must have equal length");
    Palette palette;
    for (std::size_t i = 0; i < values.size(); ++i)
      palette.entries.push_back({values[i], probs[i]});
    std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int_or(section, "seed", 1));
    return LatticeField::random(dim, seed, palette);
  }
  throw ConfigError("config: [" + section + "] kind must be periodic or random");
}

IntegrandSpec integrand_from_config(const ConfigFile& cfg) {
  MeshParams mp = mesh_from_config(cfg);
  std::string family = cfg.get_or("integrand", "family", "power_radial");
  IntegrandSpec spec = [&] {
    if (family == "power_radial")
      return IntegrandSpec::power_radial(field_from_config(cfg, "field", mp.d),
                                         cfg.get_double("integrand", "p"));
    if (family == "variable_exponent")
      return IntegrandSpec::variable_exponent(field_from_config(cfg, "field", mp.d));
    if (family == "double_phase")
      return IntegrandSpec::double_phase(field_from_config(cfg, "field", mp.d),
                                         field_from_config(cfg, "field_b", mp.d),
                                         cfg.get_double("integrand", "p"),
                                         cfg.get_double("integrand", "q"));
    throw ConfigError("config: unknown integrand family '" + family + "'");
  }();
  if (cfg.has("integrand", "p_minus") || cfg.has("integrand", "p_plus")) {
    double pm = cfg.get_double_or("integrand", "p_minus", spec.window().p_minus);
    double pp = cfg.get_double_or("integrand", "p_plus", spec.window().p_plus);
    spec = spec.with_window(ExponentWindow(pm, pp));
  }
  if (cfg.has("integrand", "alpha") || cfg.has("integrand", "beta")) {
    spec = spec.with_bounds(cfg.get_double_or("integrand", "alpha", spec.alpha()),
                            cfg.get_double_or("integrand", "beta", spec.beta()));
  }
  return spec;
}

NonconvexSpec nonconvex_from_config(const ConfigFile& cfg) {
  double lambda = cfg.get_double_or("integrand", "lambda", 0.0);
  return NonconvexSpec::sine_bump(integrand_from_config(cfg), lambda);
}

MeshParams mesh_from_config(const ConfigFile& cfg) {
  MeshParams mp;
  mp.d = static_cast<int>(cfg.get_int_or("mesh", "d", 1));
  mp.N = static_cast<int>(cfg.get_int_or("mesh", "N", 1));
  mp.n = static_cast<int>(cfg.get_int_or("mesh", "n", 16));
  mp.t = static_cast<int>(cfg.get_int_or("mesh", "t", 1));
  return mp;
}

SolverConfig solver_from_config(const ConfigFile& cfg) {
  SolverConfig sc;
  sc.tol_g = cfg.get_double_or("solver", "tol_g", sc.tol_g);
  sc.tol_e = cfg.get_double_or("solver", "tol_e", sc.tol_e);
  sc.max_iter = static_cast<int>(cfg.get_int_or("solver", "max_iter", sc.max_iter));
  sc.memory = static_cast<int>(cfg.get_int_or("solver", "memory", sc.memory));
  sc.multistart_count = static_cast<int>(cfg.get_int_or("solver", "multistart_count", sc.multistart_count));
  sc.validate();
  return sc;
}

std::vector<Mat> sigmas_from_config(const ConfigFile& cfg, int N, int d) {
  std::vector<Mat> base;
  for (const auto& chunk : split_tokens(cfg.get("run", "sigmas"), ";")) {
    auto entries = split_tokens(chunk, " ,\t");
    if (static_cast<int>(entries.size()) != N * d)
      throw ConfigError("config: each sigma needs N*d entries (row-major)");
    Mat m(N, d);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < d; ++c)
        m(r, c) = parse_double(entries[static_cast<std::size_t>(r * d + c)], "[run] sigmas");
    base.push_back(std::move(m));
  }
  if (base.empty()) throw ConfigError("config: [run] sigmas is empty");
  if (!cfg.has("run", "sigma_scales")) return base;
  std::vector<Mat> out;
  for (double s : cfg.get_list("run", "sigma_scales"))
    for (const Mat& m : base) out.push_back(s * m);
  return out;
}

std::vector<int> t_list_from_config(const ConfigFile& cfg) {
  std::vector<int> out;
  for (double v : cfg.get_list("run", "t_list")) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<std::uint64_t> seeds_from_config(const ConfigFile& cfg) {
  std::vector<std::uint64_t> seeds;
  if (cfg.has("run", "seeds")) {
    for (double v : cfg.get_list("run", "seeds")) seeds.push_back(static_cast<std::uint64_t>(v));
    return seeds;
  }
  long count = cfg.get_int_or("run", "seed_count", 8);
  std::uint64_t base = static_cast<std::uint64_t>(cfg.get_int_or("run", "seed", 1));
  for (long i = 0; i < count; ++i) seeds.push_back(mix64(base + static_cast<std::uint64_t>(i)));
  return seeds;
}

}  // namespace orlhom
