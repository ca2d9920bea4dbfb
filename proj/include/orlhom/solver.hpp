#pragma once

#include "orlhom/common.hpp"
#include "orlhom/mesh.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace orlhom {

struct SolverConfig {
  double tol_g = 1e-8;   // gradient criterion, relative to max(1, |energy|)
  double tol_e = 1e-12;  // relative energy-decrease criterion
  int max_iter = 10000;
  int memory = 10;           // curvature pairs
  int multistart_count = 8;  // starts for nonconvex problems

  void validate() const;
};

struct SolveReport {
  double energy = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;  // sup over nodes of the nodal gradient magnitude
  bool converged = false;
  double wall_time = 0.0;  // seconds; excluded from all persisted outputs
};

struct EnergyOracle {
  std::function<double(std::span<const double>)> energy;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::size_t size = 0;
  int node_arity = 1;  // components per node, for the nodal sup norm
};

EnergyOracle make_oracle(const EnergyAssembler& assembler);

struct SolveMode {
  enum class Kind { Convex, Multistart };
  Kind kind = Kind::Convex;
  std::uint64_t noise_seed = 0;  // multistart perturbations trace to this seed
  double noise_scale = 0.0;      // nodal Gaussian scale (element size)

  static SolveMode convex() { return {}; }
  static SolveMode multistart(std::uint64_t seed, double scale) {
    return {Kind::Multistart, seed, scale};
  }
};

// Limited-memory quasi-Newton descent with Armijo backtracking. Energy is
// non-increasing across accepted steps; the first iterate meeting both the
// gradient and energy-decrease criteria is returned. max_iter exhaustion
// yields converged=false (not an exception); a NaN energy throws.
// Multistart mode restarts from u0 plus (multistart_count-1) Gaussian nodal
// perturbations and returns the best: an upper bound on the infimum.
std::pair<std::vector<double>, SolveReport> minimize_energy(const EnergyOracle& oracle,
                                                            std::vector<double> u0,
                                                            const SolverConfig& config,
                                                            SolveMode mode,
                                                            std::vector<double>* energy_trace = nullptr);

// C^1 cutoff: 1 on [0,M], cubic blend 2r^3-3r^2+1 (r=s/M-1) on [M,2M], 0 after.
double cutoff_value(double M, double s);

// psi_M(xi) = cutoff(|xi|) xi applied per node; |psi_M| <= 2M, Lipschitz
// with constant 1.97165 (the radial slope extreme of the cubic blend).
DisplacementField truncate_field(const DisplacementField& u, double M);
void truncate_values(std::span<double> values, int arity, double M);

}  // namespace orlhom
