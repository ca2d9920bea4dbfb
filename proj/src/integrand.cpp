#include "orlhom/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace orlhom {

namespace {

void check_point(std::span<const double> x, int dim) {
  if (static_cast<int>(x.size()) < dim) throw InputDomainError("integrand: point has too few coordinates");
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(x[i])) throw InputDomainError("integrand: non-finite point");
}

// Log-spaced s grid on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / (count - 1));
  return g;
}

double pow_window_min(double s, const ExponentWindow& w) {
  return std::min(std::pow(s, w.p_minus), std::pow(s, w.p_plus));
}

double pow_window_max(double s, const ExponentWindow& w) {
  return std::max(std::pow(s, w.p_minus), std::pow(s, w.p_plus));
}

}  // namespace

IntegrandSpec IntegrandSpec::power_radial(LatticeField a, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("power_radial: exponent must be in (1, inf)");
  double alpha = a.min_value();
  double beta = a.max_value();
  return IntegrandSpec(PowerRadialFamily{std::move(a), p}, ExponentWindow(p, p), alpha, beta);
}

IntegrandSpec IntegrandSpec::variable_exponent(LatticeField p_field) {
  double pm = p_field.min_value();
  double pp = p_field.max_value();
  if (!(pm > 1.0)) throw ConfigError("variable_exponent: exponents must exceed 1");
  return IntegrandSpec(VariableExponentFamily{std::move(p_field)}, ExponentWindow(pm, pp), 1.0, 1.0);
}

IntegrandSpec IntegrandSpec::double_phase(LatticeField a, LatticeField b, double p, double q) {
  if (!(p > 1.0) || !(q >= p)) throw ConfigError("double_phase: need 1 < p <= q");
  if (a.dim() != b.dim()) throw ConfigError("double_phase: field dimensions differ");
  double alpha = a.min_value() + b.min_value();
  double beta = a.max_value() + b.max_value();
  return IntegrandSpec(DoublePhaseFamily{std::move(a), std::move(b), p, q}, ExponentWindow(p, q),
                       alpha, beta);
}

IntegrandSpec IntegrandSpec::with_window(ExponentWindow w) const {
  IntegrandSpec s = *this;
  s.window_ = w;
  return s;
}

IntegrandSpec IntegrandSpec::with_bounds(double alpha, double beta) const {
  IntegrandSpec s = *this;
  s.alpha_ = alpha;
  s.beta_ = beta;
  return s;
}

FamilyKind IntegrandSpec::family() const {
  return static_cast<FamilyKind>(family_.index());
}

int IntegrandSpec::dim() const {
  return primary_field().dim();
}

const LatticeField& IntegrandSpec::primary_field() const {
  return std::visit([](const auto& f) -> const LatticeField& {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerRadialFamily>) return f.a;
    else if constexpr (std::is_same_v<T, VariableExponentFamily>) return f.p;
    else return f.a;
  }, family_);
}

std::vector<const LatticeField*> IntegrandSpec::fields() const {
  return std::visit([](const auto& f) -> std::vector<const LatticeField*> {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerRadialFamily>) return {&f.a};
    else if constexpr (std::is_same_v<T, VariableExponentFamily>) return {&f.p};
    else return {&f.a, &f.b};
  }, family_);
}

LocalDensity IntegrandSpec::local_density(std::span<const double> x) const {
  check_point(x, dim());
  LocalDensity ld;
  ld.family = family();
  std::visit([&](const auto& f) {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerRadialFamily>) {
      ld.a = f.a.value_at(x);
      ld.p = f.p;
    } else if constexpr (std::is_same_v<T, VariableExponentFamily>) {
      ld.p = f.p.value_at(x);
    } else {
      ld.a = f.a.value_at(x);
      ld.b = f.b.value_at(x);
      ld.p = f.p;
      ld.q = f.q;
    }
  }, family_);
  return ld;
}

double IntegrandSpec::eval(std::span<const double> x, double s) const {
  if (!std::isfinite(s) || s < 0.0) throw InputDomainError("integrand: radial argument must be finite and >= 0");
  return local_density(x).eval(s);
}

double IntegrandSpec::eval(std::span<const double> x, const Mat& sigma) const {
  double s = sigma.norm();
  if (!std::isfinite(s)) throw InputDomainError("integrand: non-finite matrix argument");
  return local_density(x).eval(s);
}

double IntegrandSpec::slope(std::span<const double> x, double s) const {
  if (!std::isfinite(s) || s < 0.0) throw InputDomainError("integrand: radial argument must be finite and >= 0");
  return local_density(x).slope(s);
}

IntegrandSpec IntegrandSpec::reseeded(std::uint64_t seed) const {
  IntegrandSpec s = *this;
  std::visit([&](auto& f) {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerRadialFamily>) {
      f.a = f.a.reseeded(mix64(seed ^ 0x1ULL));
    } else if constexpr (std::is_same_v<T, VariableExponentFamily>) {
      f.p = f.p.reseeded(mix64(seed ^ 0x1ULL));
    } else {
      f.a = f.a.reseeded(mix64(seed ^ 0x1ULL));
      f.b = f.b.reseeded(mix64(seed ^ 0x2ULL));
    }
  }, s.family_);
  return s;
}

IntegrandSpec IntegrandSpec::shifted(std::span<const long> z) const {
  IntegrandSpec s = *this;
  std::visit([&](auto& f) {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerRadialFamily>) {
      f.a = f.a.shifted(z);
    } else if constexpr (std::is_same_v<T, VariableExponentFamily>) {
      f.p = f.p.shifted(z);
    } else {
      f.a = f.a.shifted(z);
      f.b = f.b.shifted(z);
    }
  }, s.family_);
  return s;
}

IntegrandSpec IntegrandSpec::with_primary_field(LatticeField fld) const {
  IntegrandSpec s = *this;
  std::visit([&](auto& f) {
    using T = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<T, PowerRadialFamily>) {
      f.a = std::move(fld);
    } else if constexpr (std::is_same_v<T, VariableExponentFamily>) {
      f.p = std::move(fld);
    } else {
      f.a = std::move(fld);
    }
  }, s.family_);
  return s;
}

std::vector<std::array<double, kMaxDim>> IntegrandSpec::probe_points(int budget) const {
  const int d = dim();
  std::vector<std::array<double, kMaxDim>> points;
  bool all_periodic = true;
  std::array<long, kMaxDim> box{1, 1, 1};
  for (const LatticeField* f : fields()) {
    if (f->kind() != LatticeField::Kind::Periodic) {
      all_periodic = false;
      break;
    }
    for (int i = 0; i < d; ++i) box[i] = std::lcm(box[i], f->period()[i]);
  }
  if (all_periodic) {
    long cells = 1;
    for (int i = 0; i < d; ++i) cells *= box[i];
    cells = std::min<long>(cells, budget);
    for (long flat = 0; flat < cells; ++flat) {
      long rem = flat;
      std::array<double, kMaxDim> pt{};
      for (int i = d - 1; i >= 0; --i) {
        pt[i] = static_cast<double>(rem % box[i]) + 0.5;
        rem /= box[i];
      }
      points.push_back(pt);
    }
  } else {
    // Random fields: hash-driven cells in a fixed window; with distinct
    // palette values one rapidly covers every combination.
    int count = std::min(budget, 64);
    for (int k = 0; k < count; ++k) {
      std::array<double, kMaxDim> pt{};
      for (int i = 0; i < d; ++i) {
        std::uint64_t h = mix64(0x9E6Bu + 31u * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(i));
        pt[i] = static_cast<double>(static_cast<long>(h % 33) - 16) + 0.5;
      }
      points.push_back(pt);
    }
  }
  return points;
}

NonconvexSpec NonconvexSpec::sine_bump(IntegrandSpec base, double lambda) {
  if (!(lambda >= 0.0) || !(lambda < 1.0)) throw ConfigError("nonconvex: lambda must be in [0,1)");
  double a_max = 1.0;
  if (base.family() != FamilyKind::VariableExponent) a_max = base.primary_field().max_value();
  NonconvexSpec s{std::move(base), lambda, BumpKind::SineOnEntry11, 1.0,
                  std::max(1.0, lambda * a_max)};
  return s;
}

double NonconvexSpec::bump_coefficient(std::span<const double> x) const {
  if (lambda == 0.0) return 0.0;
  if (base.family() == FamilyKind::VariableExponent) return lambda;
  return lambda * base.primary_field().value_at(x);
}

double NonconvexSpec::eval(std::span<const double> x, const Mat& sigma) const {
  double s = std::sin(sigma(0, 0));
  return base.eval(x, sigma) + bump_coefficient(x) * s * s;
}

NonconvexSpec NonconvexSpec::reseeded(std::uint64_t seed) const {
  NonconvexSpec s = *this;
  s.base = base.reseeded(seed);
  return s;
}

NonconvexSpec NonconvexSpec::shifted(std::span<const long> z) const {
  NonconvexSpec s = *this;
  s.base = base.shifted(z);
  return s;
}

double eval_density(const IntegrandSpec& spec, std::span<const double> x, double s) {
  return spec.eval(x, s);
}

double eval_density(const IntegrandSpec& spec, std::span<const double> x, const Mat& sigma) {
  return spec.eval(x, sigma);
}

double eval_density(const NonconvexSpec& spec, std::span<const double> x, const Mat& sigma) {
  return spec.eval(x, sigma);
}

double radial_slope(const IntegrandSpec& spec, std::span<const double> x, double s) {
  if (!spec.has_analytic_slope())
    throw UnsupportedFamilyError("integrand: no analytic slope for this family; use finite differences");
  return spec.slope(x, s);
}

double modular(const IntegrandSpec& spec, const PiecewiseMatrixField& field) {
  if (field.pieces.empty()) throw InputDomainError("modular: empty mesh");
  double total = 0.0;
  for (const auto& piece : field.pieces) {
    std::span<const double> x(piece.point.data(), piece.point.size());
    total += piece.measure * spec.local_density(x).eval(piece.value.norm());
  }
  return total;
}

double luxemburg_norm(const IntegrandSpec& spec, const PiecewiseMatrixField& field) {
  if (field.pieces.empty()) throw InputDomainError("luxemburg: empty mesh");
  const double pm = spec.window().p_minus;
  const double pp = spec.window().p_plus;

  auto modular_at = [&](double lam) {
    double total = 0.0;
    for (const auto& piece : field.pieces) {
      std::span<const double> x(piece.point.data(), piece.point.size());
      total += piece.measure * spec.local_density(x).eval(piece.value.norm() / lam);
    }
    return total;
  };

  double m0 = modular(spec, field);
  if (m0 == 0.0) return 0.0;

  // By (cons2), modular(xi/lam) is sandwiched between min/max{lam^{-p-},
  // lam^{-p+}} * modular(xi): the root lies in [m0^{1/p+}, m0^{1/p-}] up to
  // ordering.
  double lo = std::min(std::pow(m0, 1.0 / pm), std::pow(m0, 1.0 / pp));
  // Magnitude-based upper bound: for lam >= sup|xi|, g(x, s) <= beta s^{p-}
  // on s <= 1, so beta * sum |T| |xi_T|^{p-} / lam^{p-} <= 1 suffices.
  double sup = 0.0, weighted = 0.0;
  for (const auto& piece : field.pieces) {
    double s = piece.value.norm();
    sup = std::max(sup, s);
    weighted += piece.measure * std::pow(s, pm);
  }
  double hi = std::max(sup, std::pow(spec.beta() * weighted, 1.0 / pm));
  hi = std::max(hi, lo);
  for (int guard = 0; guard < 64 && modular_at(hi) > 1.0; ++guard) hi *= 2.0;

  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (modular_at(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

const StructureCheck* StructureReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

StructureReport validate_structure(const IntegrandSpec& spec, int sample_budget) {
  if (sample_budget < 100) throw InputDomainError("validate_structure: sample_budget must be >= 100");
  const ExponentWindow& w = spec.window();
  auto probes = spec.probe_points(sample_budget);
  int grid_n = std::max(24, sample_budget / std::max<int>(1, static_cast<int>(probes.size())));
  auto grid = log_grid(1e-3, 1e3, grid_n);
  const double rel_tol = 1e-10;

  StructureCheck convexity{"convexity", true, 0.0};
  StructureCheck monotone{"monotonicity", true, 0.0};
  StructureCheck inc{"inc_p_minus", true, 0.0};
  StructureCheck dec{"dec_p_plus", true, 0.0};
  StructureCheck a0{"A0", true, 0.0};
  StructureCheck growth{"growth_p_p", true, 0.0};

  auto record = [](StructureCheck& c, double margin) {
    c.worst_margin = std::max(c.worst_margin, margin);
  };

  for (const auto& pt : probes) {
    std::span<const double> x(pt.data(), pt.size());
    LocalDensity ld = spec.local_density(x);

    double g1 = ld.eval(1.0);
    record(a0, (spec.alpha() - g1) / std::max(1.0, spec.alpha()));
    record(a0, (g1 - spec.beta()) / std::max(1.0, spec.beta()));

    double prev = 0.0, prev_inc = -1.0, prev_dec = -1.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double s = grid[k];
      double gs = ld.eval(s);
      double scale = std::max(1.0, gs);

      record(monotone, (prev - gs) / scale);
      prev = gs;

      double r_inc = gs / std::pow(s, w.p_minus);
      if (prev_inc >= 0.0) record(inc, (prev_inc - r_inc) / std::max(1.0, r_inc));
      prev_inc = r_inc;

      double r_dec = gs / std::pow(s, w.p_plus);
      if (prev_dec >= 0.0) record(dec, (r_dec - prev_dec) / std::max(1.0, prev_dec));
      prev_dec = r_dec;

      record(growth, (spec.alpha() * pow_window_min(s, w) - gs) / scale);
      record(growth, (gs - spec.beta() * pow_window_max(s, w)) / scale);

      if (k + 1 < grid.size()) {
        double s2 = grid[k + 1];
        double mid = ld.eval(0.5 * (s + s2));
        double avg = 0.5 * (gs + ld.eval(s2));
        record(convexity, (mid - avg) / std::max(1.0, avg));
      }
    }
  }

  StructureReport report{true, {convexity, monotone, inc, dec, a0, growth}};
  for (auto& c : report.checks) {
    c.pass = c.worst_margin <= rel_tol;
    report.pass = report.pass && c.pass;
  }
  return report;
}

StructureReport validate_sandwich(const NonconvexSpec& spec, int sample_budget) {
  if (sample_budget < 100) throw InputDomainError("validate_sandwich: sample_budget must be >= 100");
  auto probes = spec.base.probe_points(sample_budget);
  StructureCheck lower{"sandwich_lower", true, 0.0};
  StructureCheck upper{"sandwich_upper", true, 0.0};
  int per_probe = std::max(8, sample_budget / std::max<int>(1, static_cast<int>(probes.size())));
  auto grid = log_grid(1e-2, 1e2, per_probe);
  std::uint64_t h = 0x51ceb00dULL;
  for (const auto& pt : probes) {
    std::span<const double> x(pt.data(), pt.size());
    for (double s : grid) {
      // random direction matrices with |Sigma| = s, entry (0,0) exercised
      h = mix64(h);
      Mat sigma(1, spec.base.dim());
      sigma.setZero();
      sigma(0, 0) = s * (uniform01(h) < 0.5 ? -1.0 : 1.0);
      double g = spec.base.eval(x, sigma);
      double f = spec.eval(x, sigma);
      double scale = std::max(1.0, g);
      lower.worst_margin = std::max(lower.worst_margin, (spec.alpha * g - f) / scale);
      upper.worst_margin = std::max(upper.worst_margin, (f - spec.beta * (1.0 + g)) / scale);
    }
  }
  StructureReport report{true, {lower, upper}};
  for (auto& c : report.checks) {
    c.pass = c.worst_margin <= 1e-12;
    report.pass = report.pass && c.pass;
  }
  return report;
}

DoublingReport check_doubling(const IntegrandSpec& spec, int sample_budget) {
  if (sample_budget < 100) throw InputDomainError("check_doubling: sample_budget must be >= 100");
  auto probes = spec.probe_points(sample_budget);
  int grid_n = std::max(32, sample_budget / std::max<int>(1, static_cast<int>(probes.size())));
  auto grid = log_grid(1e-4, 1e4, grid_n);
  const double h_const = 0.0;  // g > 0 away from 0 for these families

  double c_delta2 = 0.0;
  for (const auto& pt : probes) {
    std::span<const double> x(pt.data(), pt.size());
    LocalDensity ld = spec.local_density(x);
    for (double s : grid) c_delta2 = std::max(c_delta2, ld.eval(2.0 * s) / ld.eval(s));
  }

  // The feasible set {l : 2 l g(x,s) <= g(x,ls) for all samples} is an upper
  // interval (g convex with g(0)=0 makes g(ls)/l nondecreasing in l), so the
  // smallest constant is found by bisection. l = 2^{1/(p^- - 1)} is always
  // feasible by (inc)_{p^-}.
  auto nabla2_ok = [&](double l) {
    for (const auto& pt : probes) {
      std::span<const double> x(pt.data(), pt.size());
      LocalDensity ld = spec.local_density(x);
      for (double s : grid) {
        if (2.0 * l * ld.eval(s) > ld.eval(l * s) + h_const + 1e-13 * std::max(1.0, ld.eval(l * s)))
          return false;
      }
    }
    return true;
  };
  double lo = 1.0;
  double hi = std::max(2.0, std::pow(2.0, 1.0 / (spec.window().p_minus - 1.0)));
  for (int guard = 0; guard < 32 && !nabla2_ok(hi); ++guard) hi *= 1.5;
  for (int it = 0; it < 100 && (hi - lo) > 1e-9 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (nabla2_ok(mid))
      hi = mid;
    else
      lo = mid;
  }

  DoublingReport report{c_delta2, hi, h_const, 0};
  for (const auto& pt : probes) {
    std::span<const double> x(pt.data(), pt.size());
    LocalDensity ld = spec.local_density(x);
    for (double s : grid) {
      if (ld.eval(2.0 * s) > report.c_delta2 * ld.eval(s) + h_const + 1e-9 * std::max(1.0, ld.eval(2.0 * s)))
        ++report.violations;
      if (2.0 * report.l_nabla2 * ld.eval(s) >
          ld.eval(report.l_nabla2 * s) + h_const + 1e-9 * std::max(1.0, ld.eval(report.l_nabla2 * s)))
        ++report.violations;
    }
  }
  return report;
}

}  // namespace orlhom
