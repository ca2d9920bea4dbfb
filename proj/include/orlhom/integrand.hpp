#pragma once

#include "orlhom/common.hpp"
#include "orlhom/field.hpp"

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace orlhom {

// Coercivity and upper growth orders (p^-, p^+), 1 < p^- <= p^+ < inf.
struct ExponentWindow {
  double p_minus;
  double p_plus;

  ExponentWindow(double pm, double pp) : p_minus(pm), p_plus(pp) {
    if (!(pm > 1.0) || !(pp >= pm) || !std::isfinite(pp))
      throw ConfigError("exponent window: need 1 < p_minus <= p_plus < inf");
  }
};

enum class FamilyKind { PowerRadial, VariableExponent, DoublePhase };

struct PowerRadialFamily {
  LatticeField a;
  double p;
};

struct VariableExponentFamily {
  LatticeField p;  // cell values are the exponents
};

struct DoublePhaseFamily {
  LatticeField a;
  LatticeField b;
  double p;
  double q;
};

// Family parameters resolved at a fixed point x: a cheap, allocation-free
// evaluator for g(x, s) and its radial slope, used in assembly hot loops.
struct LocalDensity {
  FamilyKind family;
  double a = 1.0, p = 2.0, b = 0.0, q = 2.0;
  double bump = 0.0;  // lambda * a(x) for the sine bump; 0 = convex

  double eval(double s) const {
    switch (family) {
      case FamilyKind::PowerRadial:
        return (p == 2.0) ? a * s * s : a * std::pow(s, p);
      case FamilyKind::VariableExponent:
        return std::pow(s, p);
      case FamilyKind::DoublePhase:
        return a * std::pow(s, p) + b * std::pow(s, q);
    }
    return 0.0;
  }

  double slope(double s) const {
    if (s <= 0.0) return 0.0;  // superlinear at zero for p > 1
    switch (family) {
      case FamilyKind::PowerRadial:
        return (p == 2.0) ? 2.0 * a * s : a * p * std::pow(s, p - 1.0);
      case FamilyKind::VariableExponent:
        return p * std::pow(s, p - 1.0);
      case FamilyKind::DoublePhase:
        return a * p * std::pow(s, p - 1.0) + b * q * std::pow(s, q - 1.0);
    }
    return 0.0;
  }
};

// A validated Orlicz-type radial density g(x, s) = g(x, |Sigma|) with its
// exponent window and (A0) constants. The coefficient fields are owned by
// the spec; values are immutable after construction.
class IntegrandSpec {
 public:
  static IntegrandSpec power_radial(LatticeField a, double p);
  static IntegrandSpec variable_exponent(LatticeField p_field);
  static IntegrandSpec double_phase(LatticeField a, LatticeField b, double p, double q);

  // Overrides for validation experiments; values are stored as declared.
  IntegrandSpec with_window(ExponentWindow w) const;
  IntegrandSpec with_bounds(double alpha, double beta) const;

  double eval(std::span<const double> x, double s) const;
  double eval(std::span<const double> x, const Mat& sigma) const;  // g(x, |Sigma|_F)
  double slope(std::span<const double> x, double s) const;         // dg/ds
  bool has_analytic_slope() const { return true; }

  LocalDensity local_density(std::span<const double> x) const;

  FamilyKind family() const;
  const ExponentWindow& window() const { return window_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  int dim() const;

  const LatticeField& primary_field() const;
  std::vector<const LatticeField*> fields() const;

  IntegrandSpec reseeded(std::uint64_t seed) const;          // tau on omega: new realization
  IntegrandSpec shifted(std::span<const long> z) const;      // tau_z omega, exact
  IntegrandSpec with_primary_field(LatticeField f) const;

  // Representative points covering the distinct coefficient combinations,
  // used by the sampling validators.
  std::vector<std::array<double, kMaxDim>> probe_points(int budget) const;

 private:
  IntegrandSpec(std::variant<PowerRadialFamily, VariableExponentFamily, DoublePhaseFamily> fam,
                ExponentWindow w, double alpha, double beta)
      : family_(std::move(fam)), window_(w), alpha_(alpha), beta_(beta) {}

  std::variant<PowerRadialFamily, VariableExponentFamily, DoublePhaseFamily> family_;
  ExponentWindow window_;
  double alpha_;
  double beta_;
};

enum class BumpKind { SineOnEntry11 };

// Nonconvex density f(x, Sigma) = g(x, |Sigma|) + lambda * a(x) * sin^2(Sigma_11)
// with the convex sandwich alpha*g <= f <= beta*(1+g).
struct NonconvexSpec {
  IntegrandSpec base;
  double lambda;
  BumpKind kind;
  double alpha;  // sandwich constants relative to g
  double beta;

  static NonconvexSpec sine_bump(IntegrandSpec base, double lambda);

  double eval(std::span<const double> x, const Mat& sigma) const;
  double bump_coefficient(std::span<const double> x) const;  // lambda * a(x)

  NonconvexSpec reseeded(std::uint64_t seed) const;
  NonconvexSpec shifted(std::span<const long> z) const;
};

// eval_density: radial specs accept a scalar s or a matrix; nonconvex specs
// require the matrix argument.
double eval_density(const IntegrandSpec& spec, std::span<const double> x, double s);
double eval_density(const IntegrandSpec& spec, std::span<const double> x, const Mat& sigma);
double eval_density(const NonconvexSpec& spec, std::span<const double> x, const Mat& sigma);
double radial_slope(const IntegrandSpec& spec, std::span<const double> x, double s);

// Piecewise-constant matrix field over a partitioned domain.
struct PiecewiseMatrixField {
  struct Piece {
    double measure;
    std::array<double, kMaxDim> point;  // coefficient sample point
    Mat value;
  };
  std::vector<Piece> pieces;
};

// Discrete modular rho(xi) = sum |T| g(x_T, |xi_T|).
double modular(const IntegrandSpec& spec, const PiecewiseMatrixField& field);

// inf{ lambda > 0 : modular(xi/lambda) <= 1 } by bisection (rel. tol 1e-10,
// bracket [modular-based lower, magnitude-based upper], <= 200 iterations).
double luxemburg_norm(const IntegrandSpec& spec, const PiecewiseMatrixField& field);

struct StructureCheck {
  std::string name;
  bool pass;
  double worst_margin;  // signed; > 0 means violated by that amount (relative)
};

struct StructureReport {
  bool pass;
  std::vector<StructureCheck> checks;

  const StructureCheck* find(const std::string& name) const;
};

// Samples convexity, monotonicity, (inc)_{p^-}, (dec)_{p^+}, (A0) and the
// two-sided power bound on a log-spaced s grid over all distinct coefficient
// values. Failures are report entries, never exceptions.
StructureReport validate_structure(const IntegrandSpec& spec, int sample_budget);

// Samples the sandwich alpha*g <= f <= beta*(1+g) for a nonconvex spec.
StructureReport validate_sandwich(const NonconvexSpec& spec, int sample_budget);

struct DoublingReport {
  double c_delta2;   // smallest sampled constant with M(x,2s) <= c M(x,s) + h
  double l_nabla2;   // smallest sampled constant with 2 l M(x,s) <= M(x,l s) + h
  double h_const;    // constant slack term used (0 for these families)
  int violations;    // recount against the reported constants
};

DoublingReport check_doubling(const IntegrandSpec& spec, int sample_budget);

}  // namespace orlhom
