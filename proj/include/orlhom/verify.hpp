#pragma once

#include "orlhom/common.hpp"
#include "orlhom/homogenize.hpp"
#include "orlhom/integrand.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace orlhom {

struct PropertyReport {
  std::string property;
  int samples = 0;
  double worst_violation = 0.0;  // signed, relative; <= tol passes
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

using GammaSampler = std::function<double(const Mat&)>;

struct SuiteInputs {
  std::vector<Mat> A_list;      // N x N premultipliers
  std::vector<Mat> sigma_list;  // N x d arguments
  std::vector<double> t_list;   // positive scalings for the homogeneity bound
};

// Structural checks on a homogenized density sampler:
//   (a) reinforced-Delta2: gamma(A Sigma) <= max{|A|^p-, |A|^p+} gamma(Sigma)
//   (b) growth sandwich with the proof constant alpha / 2^{p+}
//   (c) midpoint convexity
//   (d) evenness
//   (e) homogeneity bound gamma(t Sigma) >= min{t^p+, t^p-} gamma(Sigma)
// Violations are report entries; margins are relative to max(1, rhs).
std::vector<PropertyReport> structural_suite(const GammaSampler& gamma, const ExponentWindow& window,
                                             double alpha, double beta, const SuiteInputs& inputs,
                                             double tol);

// Largest singular value by power iteration on A^T A, tolerance 1e-12.
double operator_norm(const Mat& A);

// 1D effective coefficient for sum_i w_i cells of value a_i and energy a|u'|^p:
// a_hom = (sum w_i a_i^{-1/(p-1)})^{-(p-1)}.
double oned_power_effective(std::span<const double> weights, std::span<const double> values, double p);

struct LaminatePair {
  double along;   // harmonic mean: gradient parallel to the variation axis
  double across;  // arithmetic mean
};
LaminatePair laminate_quadratic_effective(std::span<const double> weights, std::span<const double> values);

struct BruteForceResult {
  double value = 0.0;  // volume-normalized minimum
  bool converged = false;
  int sweeps = 0;
};

// Minimizes the same discrete cell energy by derivative-free cyclic
// coordinate search; never touches the gradient or quasi-Newton paths.
// Free node count must not exceed 64.
BruteForceResult brute_force_gamma(const IntegrandSpec& spec, const Mat& sigma, int tiny_n,
                                   double value_tol = 1e-10);

// gamma_cell wrapped in a cache keyed by the sigma bytes. Not thread-safe.
GammaSampler memoized_gamma_sampler(const IntegrandSpec& spec, int n, const SolverConfig& config);

// Relative discretization margin from a refinement pair (n, 2n) at sigma_ref.
double refinement_margin(const IntegrandSpec& spec, const Mat& sigma_ref, int n,
                         const SolverConfig& config);

struct NonconvexSandwichReport {
  PropertyReport lower;  // phi >= alpha*zeta - tol: a failure here is a failure
  int upper_flags = 0;   // phi <= beta(2+zeta)+tol exceedances: flagged, not failed
};

// Transfers the pointwise sandwich to the estimated minima. phi values are
// upper bounds, so only the lower inequality is a hard check.
NonconvexSandwichReport nonconvex_sandwich(std::span<const double> zeta_values,
                                           std::span<const double> phi_values, double alpha,
                                           double beta, double tol);

}  // namespace orlhom
