#include "orlhom/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>

namespace orlhom {

namespace {

double window_max(double s, const ExponentWindow& w) {
  return std::max(std::pow(s, w.p_minus), std::pow(s, w.p_plus));
}

double window_min(double s, const ExponentWindow& w) {
  return std::min(std::pow(s, w.p_minus), std::pow(s, w.p_plus));
}

std::string sigma_key(const Mat& sigma) {
  std::string key(reinterpret_cast<const char*>(sigma.data()),
                  static_cast<std::size_t>(sigma.size()) * sizeof(double));
  key.push_back(static_cast<char>(sigma.rows()));
  return key;
}

// One-dimensional derivative-free line minimization for a convex section:
// expand a bracket downhill, then golden-section to the x tolerance.
template <typename F>
double line_minimum(F&& f, double x0, double step, double xtol) {
  const double phi = 0.6180339887498949;
  double f0 = f(x0);
  double xl = x0 - step, xr = x0 + step;
  double fl = f(xl), fr = f(xr);
  int guard = 0;
  while (fl < f0 && guard++ < 200) {
    xr = x0; fr = f0;
    x0 = xl; f0 = fl;
    step *= 2.0;
    xl = x0 - step; fl = f(xl);
  }
  while (fr < f0 && guard++ < 200) {
    xl = x0; fl = f0;
    x0 = xr; f0 = fr;
    step *= 2.0;
    xr = x0 + step; fr = f(xr);
  }
  // golden section on [xl, xr]
  double a = xl, b = xr;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double operator_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Mat M = A.transpose() * A;
  Vec v = Vec::Ones(M.rows());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Vec w = M * v;
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    double lam = w.dot(M * w);
    if (std::abs(lam - lambda) <= 1e-12 * std::max(1.0, std::abs(lam))) {
      lambda = lam;
      break;
    }
    lambda = lam;
    v = w;
  }
  return std::sqrt(std::max(0.0, lambda));
}

std::vector<PropertyReport> structural_suite(const GammaSampler& gamma, const ExponentWindow& window,
                                             double alpha, double beta, const SuiteInputs& inputs,
                                             double tol) {
  if (inputs.A_list.empty() || inputs.sigma_list.empty())
    throw InputDomainError("structural suite: empty sample lists");

  PropertyReport delta2{"reinforced_delta2", 0, 0.0, tol, false, ""};
  PropertyReport growth{"growth_sandwich", 0, 0.0, tol, false, ""};
  PropertyReport convexity{"midpoint_convexity", 0, 0.0, tol, false, ""};
  PropertyReport evenness{"evenness", 0, 0.0, tol, false, ""};
  PropertyReport homogeneity{"homogeneity_bound", 0, 0.0, tol, false, ""};

  auto record = [](PropertyReport& r, double margin) {
    r.worst_violation = std::max(r.worst_violation, margin);
    ++r.samples;
  };

  for (const Mat& A : inputs.A_list) {
    const double C = window_max(operator_norm(A), window);
    for (const Mat& sigma : inputs.sigma_list) {
      double lhs = gamma(A * sigma);
      double rhs = C * gamma(sigma);
      record(delta2, (lhs - rhs) / std::max(1.0, rhs));
    }
  }

  double best_lower_constant = std::numeric_limits<double>::infinity();
  for (const Mat& sigma : inputs.sigma_list) {
    double value = gamma(sigma);
    double norm = sigma.norm();
    double lower = alpha / std::pow(2.0, window.p_plus) * window_min(norm, window);
    double upper = beta * window_max(norm, window);
    record(growth, (lower - value) / std::max(1.0, value));
    record(growth, (value - upper) / std::max(1.0, upper));
    if (norm > 0.0) best_lower_constant = std::min(best_lower_constant, value / window_min(norm, window));

    record(evenness, std::abs(value - gamma(-sigma)) / std::max(1.0, value));

    for (double t : inputs.t_list) {
      double lhs = window_min(t, window) * value;
      double rhs = gamma(t * sigma);
      record(homogeneity, (lhs - rhs) / std::max(1.0, rhs));
    }
  }
  growth.note = "proof constant alpha/2^p+ = " + format_double(alpha / std::pow(2.0, window.p_plus)) +
                "; best empirical constant = " + format_double(best_lower_constant);

  const std::size_t pair_cap = std::min<std::size_t>(inputs.sigma_list.size(), 12);
  for (std::size_t i = 0; i < pair_cap; ++i) {
    for (std::size_t j = i + 1; j < pair_cap; ++j) {
      const Mat& s1 = inputs.sigma_list[i];
      const Mat& s2 = inputs.sigma_list[j];
      double mid = gamma(0.5 * (s1 + s2));
      double avg = 0.5 * (gamma(s1) + gamma(s2));
      record(convexity, (mid - avg) / std::max(1.0, avg));
    }
  }

  std::vector<PropertyReport> reports{delta2, growth, convexity, evenness, homogeneity};
  for (auto& r : reports) r.pass = r.worst_violation <= r.tol;
  return reports;
}

double oned_power_effective(std::span<const double> weights, std::span<const double> values, double p) {
  if (weights.size() != values.size() || weights.empty())
    throw InputDomainError("oned oracle: weights and values must match and be nonempty");
  if (!(p > 1.0)) throw InputDomainError("oned oracle: p must exceed 1");
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    mean += weights[i] * std::pow(values[i], -1.0 / (p - 1.0));
  }
  mean /= total;
  return std::pow(mean, -(p - 1.0));
}

LaminatePair laminate_quadratic_effective(std::span<const double> weights, std::span<const double> values) {
  if (weights.size() != values.size() || weights.empty())
    throw InputDomainError("laminate oracle: weights and values must match and be nonempty");
  double total = 0.0, harm = 0.0, arith = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    harm += weights[i] / values[i];
    arith += weights[i] * values[i];
  }
  return {total / harm, arith / total};
}

BruteForceResult brute_force_gamma(const IntegrandSpec& spec, const Mat& sigma, int tiny_n,
                                   double value_tol) {
  const int d = spec.dim();
  const int N = static_cast<int>(sigma.rows());
  const int T = period_box_side(spec);
  CubeMesh mesh(d, N, T, tiny_n, BoundaryCondition::periodic());
  if (mesh.free_node_count() > 64)
    throw InputDomainError("brute force: free node count exceeds 64");
  EnergyAssembler assembler(mesh, DensityView::of(spec), sigma);

  std::vector<double> u(static_cast<std::size_t>(mesh.dof_count()), 0.0);
  double E = assembler.energy(u);
  BruteForceResult result;
  const int max_sweeps = 20000;
  const double h = mesh.h();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double before = E;
    for (std::size_t i = 0; i < u.size(); ++i) {
      auto section = [&](double x) {
        double saved = u[i];
        u[i] = x;
        double e = assembler.energy(u);
        u[i] = saved;
        return e;
      };
      u[i] = line_minimum(section, u[i], 0.25 * h, 1e-12 * std::max(1.0, std::abs(u[i])));
    }
    E = assembler.energy(u);
    result.sweeps = sweep + 1;
    if (before - E <= value_tol * 1e-2 * std::max(1.0, std::abs(E))) {
      result.converged = true;
      break;
    }
  }
  result.value = E / mesh.domain_measure();
  return result;
}

GammaSampler memoized_gamma_sampler(const IntegrandSpec& spec, int n, const SolverConfig& config) {
  auto cache = std::make_shared<std::map<std::string, double>>();
  IntegrandSpec owned = spec;
  return [owned, n, config, cache](const Mat& sigma) {
    std::string key = sigma_key(sigma);
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    double value = gamma_cell(owned, sigma, n, config).value;
    (*cache)[key] = value;
    return value;
  };
}

double refinement_margin(const IntegrandSpec& spec, const Mat& sigma_ref, int n,
                         const SolverConfig& config) {
  double coarse = gamma_cell(spec, sigma_ref, n, config).value;
  double fine = gamma_cell(spec, sigma_ref, 2 * n, config).value;
  return std::abs(coarse - fine) / std::max(1.0, std::abs(fine));
}

NonconvexSandwichReport nonconvex_sandwich(std::span<const double> zeta_values,
                                           std::span<const double> phi_values, double alpha,
                                           double beta, double tol) {
  if (zeta_values.size() != phi_values.size() || zeta_values.empty())
    throw InputDomainError("sandwich: zeta and phi sample lists must match and be nonempty");
  NonconvexSandwichReport report;
  report.lower = {"nonconvex_sandwich_lower", 0, 0.0, tol, false, ""};
  for (std::size_t i = 0; i < zeta_values.size(); ++i) {
    double lhs = alpha * zeta_values[i];
    double margin = (lhs - phi_values[i]) / std::max(1.0, std::abs(lhs));
    report.lower.worst_violation = std::max(report.lower.worst_violation, margin);
    ++report.lower.samples;
    if (phi_values[i] > beta * (2.0 + zeta_values[i]) + tol) ++report.upper_flags;
  }
  report.lower.pass = report.lower.worst_violation <= tol;
  return report;
}

}  // namespace orlhom
