#pragma once

#include "orlhom/common.hpp"
#include "orlhom/integrand.hpp"
#include "orlhom/mesh.hpp"
#include "orlhom/solver.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace orlhom {

struct MeshMeta {
  int dim = 0;
  int components = 0;
  int resolution = 0;
  int side = 0;
  BoundaryKind bc = BoundaryKind::Periodic;
};

// One homogenized density sample: value = minimum energy / side^d.
struct HomogSample {
  Mat sigma;
  double value = 0.0;
  SolveReport report;
  MeshMeta mesh_meta;
};

// Side of the coefficient period box: lcm of all field periods over all axes.
// Requires every field of the spec to be Periodic.
int period_box_side(const IntegrandSpec& spec);

// Periodic cell problem for gamma(Sigma): minimizes the discrete energy of
// Sigma + Du over mean-zero periodic u on the period box, normalized by its
// volume. Requires n >= 2.
HomogSample gamma_cell(const IntegrandSpec& spec, const Mat& sigma, int n, const SolverConfig& config);

// mu_Sigma(omega, (0,t)^d) / t^d with the affine datum on the outermost node
// layer. Nonconvex specs minimize with multistart and the value is an upper
// bound on the true infimum.
HomogSample mu_over_cube(const IntegrandSpec& spec, const Mat& sigma, int t, int n,
                         const SolverConfig& config, CoordMap map = {});
HomogSample mu_over_cube(const NonconvexSpec& spec, const Mat& sigma, int t, int n,
                         const SolverConfig& config, std::uint64_t noise_seed, CoordMap map = {});

struct StochasticEntry {
  int t = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  SolveReport report;
};

struct TStat {
  int t = 0;
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
};

struct StochasticEstimate {
  Mat sigma;
  std::vector<StochasticEntry> entries;  // ordered by (t, seed index)
  std::vector<TStat> per_t;              // ascending t
  double point_estimate = 0.0;           // largest-t mean
  std::vector<double> trend;             // successive per-t mean differences
  bool upper_bound = false;              // true for nonconvex (multistart) estimates
};

// Draws one realization per (t, seed) by reseeding the spec's Random fields,
// computes mu over (0,t)^d, and aggregates per-t statistics. Entries are
// computed independently (parallel over jobs) and reduced in key order.
StochasticEstimate zeta_estimate(const IntegrandSpec& spec, const Mat& sigma,
                                 std::span<const int> t_list, std::span<const std::uint64_t> seeds,
                                 int n, const SolverConfig& config, int jobs = 1);
StochasticEstimate phi_estimate(const NonconvexSpec& spec, const Mat& sigma,
                                std::span<const int> t_list, std::span<const std::uint64_t> seeds,
                                int n, const SolverConfig& config, int jobs = 1);

struct SubadditivityReport {
  double mu_whole = 0.0;  // raw minimum energies (not volume-normalized)
  double sum_parts = 0.0;
  double slack = 0.0;  // sum_parts - mu_whole; >= -tol certifies subadditivity
  double tol = 0.0;
  int parts = 0;
  bool pass = false;
};

// Compares mu on (0,t)^d with the sum over the k^d translated subcubes of
// side t/k. On the conforming mesh the glued subminimizers are admissible,
// so the inequality holds up to solver tolerance.
SubadditivityReport check_subadditivity(const IntegrandSpec& spec, const Mat& sigma, int t, int k,
                                        int n, const SolverConfig& config);

struct StationarityReport {
  double mu_shifted_field = 0.0;   // mu(tau_z omega, (0,t)^d)
  double mu_translated_cube = 0.0; // mu(omega, (0,t)^d + z)
  double rel_gap = 0.0;
  bool pass = false;
};

// mu(omega, V + z) = mu(tau_z omega, V): the two sides are computed through
// different routes (shifted field vs coordinate-offset sampling).
StationarityReport check_stationarity(const IntegrandSpec& spec, const Mat& sigma, int t,
                                      std::span<const long> z, int n, const SolverConfig& config);

struct ScalingReport {
  double mu_direct = 0.0;   // raw minimum on (0,t)^d
  double scaled_unit = 0.0; // t^d * minimum of the eps = 1/t functional on (0,1)^d
  double rel_gap = 0.0;
};

// mu_Sigma(omega, tQ) = t^d * min of the eps-functional on the unit cube.
ScalingReport check_scaling(const IntegrandSpec& spec, const Mat& sigma, int t, int n,
                            const SolverConfig& config);

}  // namespace orlhom
