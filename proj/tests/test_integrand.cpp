#include <doctest.h>

#include "orlhom/integrand.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

using namespace orlhom;

namespace {

IntegrandSpec quadratic(double a = 1.0) {
  return IntegrandSpec::power_radial(LatticeField::constant(1, a), 2.0);
}

IntegrandSpec checkerboard_1d() {
  return IntegrandSpec::power_radial(LatticeField::periodic(1, {1.0, 4.0}, {2, 1, 1}), 2.0);
}

IntegrandSpec double_phase_unit() {
  return IntegrandSpec::double_phase(LatticeField::constant(1, 1.0), LatticeField::constant(1, 1.0),
                                     2.0, 4.0);
}

const std::array<double, 1> x0{0.5};

PiecewiseMatrixField constant_field(double value, double measure = 1.0) {
  Mat m(1, 1);
  m << value;
  return PiecewiseMatrixField{{{measure, {0.5, 0.0, 0.0}, m}}};
}

}  // namespace

TEST_CASE("eval_density on the named examples") {
  auto spec = IntegrandSpec::power_radial(LatticeField::constant(1, 2.0), 2.0);
  CHECK(eval_density(spec, x0, 3.0) == doctest::Approx(18.0).epsilon(1e-14));
  CHECK(eval_density(spec, x0, 0.0) == 0.0);
  CHECK(eval_density(checkerboard_1d(), x0, 0.0) == 0.0);
  CHECK(eval_density(double_phase_unit(), x0, 0.0) == 0.0);

  auto bump = NonconvexSpec::sine_bump(quadratic(), 0.5);
  Mat sigma(1, 1);
  sigma << std::numbers::pi / 2.0;
  CHECK(eval_density(bump, x0, sigma) == doctest::Approx(2.9674011002723395).epsilon(1e-14));

  CHECK_THROWS_AS(eval_density(spec, x0, std::nan("")), InputDomainError);
  CHECK_THROWS_AS(eval_density(spec, std::array<double, 1>{std::nan("")}, 1.0), InputDomainError);
}

TEST_CASE("radial_slope per family") {
  auto spec = IntegrandSpec::power_radial(LatticeField::constant(1, 2.0), 2.0);
  CHECK(radial_slope(spec, x0, 3.0) == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(radial_slope(spec, x0, 0.0) == 0.0);
  CHECK(radial_slope(double_phase_unit(), x0, 0.0) == 0.0);
  CHECK(radial_slope(double_phase_unit(), x0, 1.0) == doctest::Approx(6.0).epsilon(1e-14));

  // slope is the derivative: central differences on a few points
  auto varexp = IntegrandSpec::variable_exponent(LatticeField::periodic(1, {1.7, 2.6}, {2, 1, 1}));
  for (double s : {0.3, 1.0, 2.5}) {
    double h = 1e-6 * s;
    double fd = (eval_density(varexp, x0, s + h) - eval_density(varexp, x0, s - h)) / (2 * h);
    CHECK(radial_slope(varexp, x0, s) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("validate_structure accepts correct declarations") {
  auto report = validate_structure(checkerboard_1d(), 400);
  CHECK(report.pass);
  CHECK(report.find("A0") != nullptr);
  // checkerboard a in {1,4}: (A0) passes exactly with alpha=1, beta=4
  CHECK(checkerboard_1d().alpha() == 1.0);
  CHECK(checkerboard_1d().beta() == 4.0);
}

TEST_CASE("validate_structure flags a wrong coercivity exponent") {
  // s^2 / s^3 is decreasing, so (inc)_3 must fail
  auto wrong = quadratic().with_window(ExponentWindow(3.0, 3.0));
  auto report = validate_structure(wrong, 400);
  CHECK_FALSE(report.pass);
  REQUIRE(report.find("inc_p_minus") != nullptr);
  CHECK_FALSE(report.find("inc_p_minus")->pass);
}

TEST_CASE("validate_structure rejects tiny budgets") {
  CHECK_THROWS_AS(validate_structure(quadratic(), 99), InputDomainError);
}

TEST_CASE("modular of piecewise-constant fields") {
  auto spec = quadratic();
  CHECK(modular(spec, constant_field(2.0)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(modular(spec, constant_field(0.0)) == 0.0);

  PiecewiseMatrixField half;
  Mat one(1, 1), two(1, 1);
  one << 1.0;
  two << 2.0;
  half.pieces.push_back({0.5, {0.25, 0, 0}, one});
  half.pieces.push_back({0.5, {0.75, 0, 0}, two});
  CHECK(modular(spec, half) == doctest::Approx(2.5).epsilon(1e-14));

  CHECK_THROWS_AS(modular(spec, PiecewiseMatrixField{}), InputDomainError);
}

TEST_CASE("luxemburg norm: bisection against closed forms") {
  auto spec = quadratic();
  CHECK(luxemburg_norm(spec, constant_field(2.0)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(luxemburg_norm(spec, constant_field(0.0)) == 0.0);

  // half/half |xi| in {1,2}, g=s^2: modular(xi/l) = 2.5/l^2, root sqrt(2.5)
  PiecewiseMatrixField half;
  Mat one(1, 1), two(1, 1);
  one << 1.0;
  two << 2.0;
  half.pieces.push_back({0.5, {0.25, 0, 0}, one});
  half.pieces.push_back({0.5, {0.75, 0, 0}, two});
  CHECK(luxemburg_norm(spec, half) == doctest::Approx(1.5811388300841898).epsilon(1e-9));
}

TEST_CASE("doubling constants") {
  for (double p : {2.0, 3.0}) {
    auto spec = IntegrandSpec::power_radial(LatticeField::constant(1, 1.0), p);
    auto report = check_doubling(spec, 400);
    CHECK(report.c_delta2 == doctest::Approx(std::pow(2.0, p)).epsilon(1e-9));
    CHECK(report.h_const == 0.0);
    CHECK(report.violations == 0);
  }
  // g = s^2: 2l <= l^2 iff l >= 2
  CHECK(check_doubling(quadratic(), 400).l_nabla2 == doctest::Approx(2.0).epsilon(1e-6));
  // double phase s^2 + s^4: ratio (4s^2+16s^4)/(s^2+s^4) increases to 16
  auto dp = check_doubling(double_phase_unit(), 400);
  CHECK(dp.c_delta2 <= 16.0 + 1e-9);
  CHECK(dp.c_delta2 >= 4.0);
}

TEST_CASE("property: (cons2) scaling sandwich") {
  std::vector<IntegrandSpec> specs;
  specs.push_back(checkerboard_1d());
  specs.push_back(IntegrandSpec::variable_exponent(LatticeField::periodic(1, {1.5, 2.5}, {2, 1, 1})));
  specs.push_back(double_phase_unit());
  std::uint64_t h = 1234;
  for (const auto& spec : specs) {
    const auto& w = spec.window();
    for (int k = 0; k < 300; ++k) {
      h = mix64(h);
      double s = 0.1 * std::pow(100.0, uniform01(h));  // [0.1, 10]
      h = mix64(h);
      double t = 0.05 * std::pow(200.0, uniform01(h));
      h = mix64(h);
      std::array<double, 1> x{4.0 * uniform01(h) - 2.0};
      double lhs = std::min(std::pow(s, w.p_minus), std::pow(s, w.p_plus)) * spec.eval(x, t);
      double rhs = std::max(std::pow(s, w.p_minus), std::pow(s, w.p_plus)) * spec.eval(x, t);
      double mid = spec.eval(x, s * t);
      double scale = std::max(1.0, rhs);
      CHECK(mid >= lhs - 1e-9 * scale);
      CHECK(mid <= rhs + 1e-9 * scale);
    }
  }
}

TEST_CASE("property: modular homogeneity window") {
  auto spec = checkerboard_1d();
  PiecewiseMatrixField field;
  std::uint64_t h = 99;
  for (int i = 0; i < 6; ++i) {
    h = mix64(h);
    Mat m(1, 1);
    m << 3.0 * uniform01(h) + 0.1;
    field.pieces.push_back({1.0 / 6.0, {0.5 + i, 0, 0}, m});
  }
  double base = modular(spec, field);
  for (double c : {0.3, 0.9, 1.7, 4.2}) {
    PiecewiseMatrixField scaled = field;
    for (auto& piece : scaled.pieces) piece.value *= c;
    double value = modular(spec, scaled);
    double lo = std::min(std::pow(c, 2.0), std::pow(c, 2.0)) * base;
    double hi = std::max(std::pow(c, 2.0), std::pow(c, 2.0)) * base;
    CHECK(value >= lo - 1e-12 * std::max(1.0, hi));
    CHECK(value <= hi + 1e-12 * std::max(1.0, hi));
  }
  // and for a genuine p- < p+ window
  auto dp = double_phase_unit();
  double dbase = modular(dp, field);
  for (double c : {0.3, 1.7}) {
    PiecewiseMatrixField scaled = field;
    for (auto& piece : scaled.pieces) piece.value *= c;
    double value = modular(dp, scaled);
    CHECK(value >= std::min(c * c, c * c * c * c) * dbase - 1e-10);
    CHECK(value <= std::max(c * c, c * c * c * c) * dbase + 1e-10);
  }
}

TEST_CASE("property: Luxemburg norm is absolutely homogeneous and normalizes the modular") {
  auto dp = double_phase_unit();
  PiecewiseMatrixField field;
  std::uint64_t h = 2024;
  for (int i = 0; i < 5; ++i) {
    h = mix64(h);
    Mat m(1, 1);
    m << 2.0 * uniform01(h) + 0.2;
    field.pieces.push_back({0.2, {0.5 + i, 0, 0}, m});
  }
  double norm = luxemburg_norm(dp, field);
  for (double c : {0.25, 3.0}) {
    PiecewiseMatrixField scaled = field;
    for (auto& piece : scaled.pieces) piece.value *= c;
    CHECK(luxemburg_norm(dp, scaled) == doctest::Approx(c * norm).epsilon(1e-8));
  }
  PiecewiseMatrixField unit = field;
  for (auto& piece : unit.pieces) piece.value /= norm;
  CHECK(modular(dp, unit) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("nonconvex sandwich holds with the derived constants") {
  auto bump = NonconvexSpec::sine_bump(checkerboard_1d(), 0.5);
  CHECK(bump.alpha == 1.0);
  CHECK(bump.beta == doctest::Approx(2.0));  // max(1, 0.5 * 4)
  auto report = validate_sandwich(bump, 400);
  CHECK(report.pass);
  CHECK_THROWS_AS(NonconvexSpec::sine_bump(checkerboard_1d(), 1.0), ConfigError);
}

TEST_CASE("reseeding replaces realizations, shifting composes with tau") {
  Palette pal{{{1.0, 0.5}, {4.0, 0.5}}};
  auto spec = IntegrandSpec::power_radial(LatticeField::random(1, 3, pal), 2.0);
  auto other = spec.reseeded(4);
  int differing = 0;
  for (int k = 0; k < 50; ++k) {
    std::array<double, 1> x{k + 0.5};
    if (spec.eval(x, 1.0) != other.eval(x, 1.0)) ++differing;
  }
  CHECK(differing > 0);
  CHECK(spec.reseeded(3).eval(x0, 2.0) != doctest::Approx(-1.0));  // smoke: evaluates

  std::array<long, 1> z{5};
  auto shifted = spec.shifted(z);
  for (int k = 0; k < 50; ++k) {
    std::array<double, 1> x{k - 20.5};
    std::array<double, 1> xz{k - 20.5 + 5.0};
    CHECK(shifted.eval(x, 1.3) == spec.eval(xz, 1.3));
  }
}
