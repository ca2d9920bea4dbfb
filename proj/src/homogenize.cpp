#include "orlhom/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orlhom {

namespace {

MeshMeta meta_of(const CubeMesh& mesh) {
  return {mesh.dim(), mesh.components(), mesh.resolution(), mesh.side(), mesh.bc().kind};
}

HomogSample solve_on_mesh(const CubeMesh& mesh, DensityView density, const Mat& sigma_offset,
                          const SolverConfig& config, SolveMode mode, CoordMap map,
                          const Mat& sigma_label) {
  EnergyAssembler assembler(mesh, density, sigma_offset, map);
  EnergyOracle oracle = make_oracle(assembler);
  auto [u, report] = minimize_energy(oracle, std::vector<double>(oracle.size, 0.0), config, mode);
  HomogSample sample;
  sample.sigma = sigma_label;
  sample.report = report;
  sample.value = report.energy / mesh.domain_measure();
  sample.mesh_meta = meta_of(mesh);
  return sample;
}

std::vector<TStat> aggregate(const std::vector<StochasticEntry>& entries,
                             std::span<const int> t_list) {
  std::vector<TStat> stats;
  for (int t : t_list) {
    TStat st;
    st.t = t;
    double sum = 0.0;
    for (const auto& e : entries)
      if (e.t == t) {
        sum += e.value;
        ++st.count;
      }
    st.mean = sum / st.count;
    double ss = 0.0;
    for (const auto& e : entries)
      if (e.t == t) ss += (e.value - st.mean) * (e.value - st.mean);
    st.std_error = st.count > 1 ? std::sqrt(ss / (st.count - 1)) / std::sqrt(static_cast<double>(st.count)) : 0.0;
    stats.push_back(st);
  }
  return stats;
}

template <typename SolveEntry>
StochasticEstimate stochastic_driver(const Mat& sigma, std::span<const int> t_list,
                                     std::span<const std::uint64_t> seeds, int jobs,
                                     bool upper_bound, SolveEntry&& solve_entry) {
  if (t_list.size() < 1) throw ConfigError("stochastic estimate: empty t list");
  for (std::size_t i = 0; i + 1 < t_list.size(); ++i)
    if (t_list[i + 1] <= t_list[i]) throw ConfigError("stochastic estimate: t list must be increasing");
  if (seeds.size() < 2) throw ConfigError("stochastic estimate: need at least 2 seeds");

  StochasticEstimate est;
  est.sigma = sigma;
  est.upper_bound = upper_bound;
  est.entries.resize(t_list.size() * seeds.size());
  parallel_for(est.entries.size(), jobs, [&](std::size_t idx) {
    std::size_t ti = idx / seeds.size();
    std::size_t si = idx % seeds.size();
    est.entries[idx] = solve_entry(t_list[ti], seeds[si]);
  });
  est.per_t = aggregate(est.entries, t_list);
  est.point_estimate = est.per_t.back().mean;
  for (std::size_t i = 0; i + 1 < est.per_t.size(); ++i)
    est.trend.push_back(est.per_t[i + 1].mean - est.per_t[i].mean);
  return est;
}

}  // namespace

int period_box_side(const IntegrandSpec& spec) {
  long side = 1;
  for (const LatticeField* f : spec.fields()) {
    if (f->kind() != LatticeField::Kind::Periodic)
      throw ConfigError("gamma cell: spec must be backed by periodic fields");
    for (int i = 0; i < f->dim(); ++i) side = std::lcm(side, f->period()[i]);
  }
  return static_cast<int>(side);
}

HomogSample gamma_cell(const IntegrandSpec& spec, const Mat& sigma, int n, const SolverConfig& config) {
  if (n < 2) throw ConfigError("gamma cell: n must be >= 2");
  const int d = spec.dim();
  const int N = static_cast<int>(sigma.rows());
  if (sigma.cols() != d) throw ConfigError("gamma cell: sigma must be N x d");
  const int T = period_box_side(spec);
  CubeMesh mesh(d, N, T, n, BoundaryCondition::periodic());
  return solve_on_mesh(mesh, DensityView::of(spec), sigma, config, SolveMode::convex(), {}, sigma);
}

HomogSample mu_over_cube(const IntegrandSpec& spec, const Mat& sigma, int t, int n,
                         const SolverConfig& config, CoordMap map) {
  if (t < 1) throw ConfigError("mu: side t must be a positive integer");
  const int d = spec.dim();
  const int N = static_cast<int>(sigma.rows());
  if (sigma.cols() != d) throw ConfigError("mu: sigma must be N x d");
  CubeMesh mesh(d, N, t, n, BoundaryCondition::affine(sigma));
  return solve_on_mesh(mesh, DensityView::of(spec), Mat(), config, SolveMode::convex(), map, sigma);
}

HomogSample mu_over_cube(const NonconvexSpec& spec, const Mat& sigma, int t, int n,
                         const SolverConfig& config, std::uint64_t noise_seed, CoordMap map) {
  if (t < 1) throw ConfigError("mu: side t must be a positive integer");
  const int d = spec.base.dim();
  const int N = static_cast<int>(sigma.rows());
  if (sigma.cols() != d) throw ConfigError("mu: sigma must be N x d");
  CubeMesh mesh(d, N, t, n, BoundaryCondition::affine(sigma));
  // lambda = 0 is convex: the single-descent path keeps phi == zeta bit-exact.
  SolveMode mode = spec.lambda == 0.0 ? SolveMode::convex()
                                      : SolveMode::multistart(noise_seed, mesh.h());
  return solve_on_mesh(mesh, DensityView::of(spec), Mat(), config, mode, map, sigma);
}

StochasticEstimate zeta_estimate(const IntegrandSpec& spec, const Mat& sigma,
                                 std::span<const int> t_list, std::span<const std::uint64_t> seeds,
                                 int n, const SolverConfig& config, int jobs) {
  return stochastic_driver(sigma, t_list, seeds, jobs, false, [&](int t, std::uint64_t seed) {
    IntegrandSpec draw = spec.reseeded(seed);
    HomogSample sample = mu_over_cube(draw, sigma, t, n, config);
    return StochasticEntry{t, seed, sample.value, sample.report};
  });
}

StochasticEstimate phi_estimate(const NonconvexSpec& spec, const Mat& sigma,
                                std::span<const int> t_list, std::span<const std::uint64_t> seeds,
                                int n, const SolverConfig& config, int jobs) {
  const bool upper = spec.lambda != 0.0;
  return stochastic_driver(sigma, t_list, seeds, jobs, upper, [&](int t, std::uint64_t seed) {
    NonconvexSpec draw = spec.reseeded(seed);
    std::uint64_t noise = mix64(seed ^ mix64(static_cast<std::uint64_t>(t)));
    HomogSample sample = mu_over_cube(draw, sigma, t, n, config, noise);
    return StochasticEntry{t, seed, sample.value, sample.report};
  });
}

SubadditivityReport check_subadditivity(const IntegrandSpec& spec, const Mat& sigma, int t, int k,
                                        int n, const SolverConfig& config) {
  if (k < 1 || t % k != 0) throw ConfigError("subadditivity: k must divide t");
  const int d = spec.dim();
  const int s = t / k;

  HomogSample whole = mu_over_cube(spec, sigma, t, n, config);
  double mu_whole = whole.report.energy;

  // mu(omega, V_i) for the translated subcube V_i = (0,s)^d + z equals
  // mu(tau_z omega, (0,s)^d) by exact field stationarity.
  double sum_parts = 0.0;
  int parts = 0;
  std::array<long, kMaxDim> z{};
  const long per_axis = k;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (int i = d - 1; i >= 0; --i) {
      z[i] = (rem % per_axis) * s;
      rem /= per_axis;
    }
    IntegrandSpec shifted = spec.shifted(std::span<const long>(z.data(), d));
    HomogSample part = mu_over_cube(shifted, sigma, s, n, config);
    sum_parts += part.report.energy;
    ++parts;
  }

  SubadditivityReport report;
  report.mu_whole = mu_whole;
  report.sum_parts = sum_parts;
  report.slack = sum_parts - mu_whole;
  report.parts = parts;
  report.tol = static_cast<double>(parts) * config.tol_e * std::max(1.0, std::abs(mu_whole));
  report.pass = report.slack >= -report.tol;
  return report;
}

StationarityReport check_stationarity(const IntegrandSpec& spec, const Mat& sigma, int t,
                                      std::span<const long> z, int n, const SolverConfig& config) {
  const int d = spec.dim();
  IntegrandSpec shifted = spec.shifted(z);
  HomogSample a = mu_over_cube(shifted, sigma, t, n, config);

  CoordMap map;
  for (int i = 0; i < d; ++i) map.offset[i] = z[i];
  HomogSample b = mu_over_cube(spec, sigma, t, n, config, map);

  StationarityReport report;
  report.mu_shifted_field = a.report.energy;
  report.mu_translated_cube = b.report.energy;
  double denom = std::max({std::abs(a.report.energy), std::abs(b.report.energy), 1e-30});
  report.rel_gap = std::abs(a.report.energy - b.report.energy) / denom;
  report.pass = report.rel_gap <= 1e-9;
  return report;
}

ScalingReport check_scaling(const IntegrandSpec& spec, const Mat& sigma, int t, int n,
                            const SolverConfig& config) {
  HomogSample direct = mu_over_cube(spec, sigma, t, n, config);

  // eps = 1/t functional on the unit cube: same grid after y = t x, with the
  // coefficient sampled at t * x.
  CoordMap map;
  map.scale = t;
  HomogSample unit = mu_over_cube(spec, sigma, 1, n * t, config, map);

  ScalingReport report;
  report.mu_direct = direct.report.energy;
  report.scaled_unit = std::pow(static_cast<double>(t), spec.dim()) * unit.report.energy;
  double denom = std::max({std::abs(report.mu_direct), std::abs(report.scaled_unit), 1e-30});
  report.rel_gap = std::abs(report.mu_direct - report.scaled_unit) / denom;
  return report;
}

}  // namespace orlhom
