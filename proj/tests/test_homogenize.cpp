#include <doctest.h>

#include "orlhom/homogenize.hpp"
#include "orlhom/verify.hpp"

#include <array>
#include <cmath>
#include <vector>

using namespace orlhom;

namespace {

IntegrandSpec checkerboard_1d(double p = 2.0) {
  return IntegrandSpec::power_radial(LatticeField::periodic(1, {1.0, 4.0}, {2, 1, 1}), p);
}

IntegrandSpec random_1d(std::uint64_t seed, double p = 2.0) {
  return IntegrandSpec::power_radial(
      LatticeField::random(1, seed, Palette{{{1.0, 0.5}, {4.0, 0.5}}}), p);
}

IntegrandSpec random_2d(std::uint64_t seed) {
  return IntegrandSpec::power_radial(
      LatticeField::random(2, seed, Palette{{{1.0, 0.5}, {4.0, 0.5}}}), 2.0);
}

Mat scalar_sigma(double v) {
  Mat m(1, 1);
  m << v;
  return m;
}

}  // namespace

TEST_CASE("gamma_cell: constant coefficients give a|Sigma|^p exactly") {
  SolverConfig cfg;
  for (double p : {2.0, 3.0}) {
    auto spec = IntegrandSpec::power_radial(LatticeField::constant(2, 2.5), p);
    Mat sigma(1, 2);
    sigma << 0.8, -0.6;  // |sigma| = 1
    auto sample = gamma_cell(spec, sigma, 4, cfg);
    CHECK(sample.report.converged);
    CHECK(std::abs(sample.value - 2.5) / 2.5 <= 1e-8);
  }
}

TEST_CASE("gamma_cell: 1D two-phase quadratic equals the harmonic mean") {
  SolverConfig cfg;
  auto sample = gamma_cell(checkerboard_1d(), scalar_sigma(1.0), 64, cfg);
  CHECK(sample.report.converged);
  CHECK(std::abs(sample.value - 1.6) / 1.6 <= 0.01);
  CHECK(sample.mesh_meta.side == 2);  // period box of the {1,4} pattern
}

TEST_CASE("gamma_cell: 2D laminate against the classical oracle") {
  SolverConfig cfg;
  auto spec = IntegrandSpec::power_radial(LatticeField::periodic(2, {1.0, 4.0}, {2, 1, 1}), 2.0);
  Mat along(1, 2), across(1, 2);
  along << 1.0, 0.0;
  across << 0.0, 1.0;
  auto ga = gamma_cell(spec, along, 16, cfg);
  auto gc = gamma_cell(spec, across, 16, cfg);
  CHECK(std::abs(ga.value - 1.6) / 1.6 <= 0.02);
  CHECK(std::abs(gc.value - 2.5) / 2.5 <= 0.02);
}

TEST_CASE("gamma_cell: variable-exponent density with its structural suite") {
  SolverConfig cfg;
  auto ve = IntegrandSpec::variable_exponent(LatticeField::periodic(1, {1.8, 2.6}, {2, 1, 1}));
  auto sampler = memoized_gamma_sampler(ve, 8, cfg);
  double margin = refinement_margin(ve, scalar_sigma(1.0), 8, cfg);
  SuiteInputs inputs;
  inputs.A_list = {Mat::Identity(1, 1), 2.0 * Mat::Identity(1, 1), scalar_sigma(-0.7)};
  for (double v : {0.4, 0.9, 1.3, 2.0}) inputs.sigma_list.push_back(scalar_sigma(v));
  inputs.t_list = {0.5, 2.0};
  auto reports = structural_suite(sampler, ve.window(), ve.alpha(), ve.beta(), inputs, margin + 1e-6);
  for (const auto& r : reports) {
    INFO(r.property);
    CHECK(r.pass);
  }
  // u = 0 gives exactly 1, but shifting gradient into the low-exponent cells
  // does strictly better; cross-check the minimum against coordinate search
  double value = sampler(scalar_sigma(1.0));
  CHECK(value < 1.0);
  auto bf = brute_force_gamma(ve, scalar_sigma(1.0), 8);
  CHECK(std::abs(value - bf.value) / bf.value <= 1e-7);
}

TEST_CASE("gamma_cell: coercivity order close to 1 still reproduces the oracle") {
  // p = 1.2 two-phase: nearly linear growth. The value matches the closed
  // form at every resolution; at fine n the gradient criterion becomes
  // unattainable for this conditioning and the report honestly flags it.
  std::vector<double> w{0.5, 0.5}, a{1.0, 4.0};
  double ref = oned_power_effective(w, a, 1.2);
  auto spec = IntegrandSpec::power_radial(LatticeField::periodic(1, {1.0, 4.0}, {2, 1, 1}), 1.2);
  SolverConfig cfg;
  auto coarse = gamma_cell(spec, scalar_sigma(1.0), 16, cfg);
  CHECK(coarse.report.converged);
  CHECK(std::abs(coarse.value - ref) / ref <= 1e-10);
  auto fine = gamma_cell(spec, scalar_sigma(1.0), 32, cfg);
  CHECK(std::abs(fine.value - ref) / ref <= 1e-10);  // value exact even if flagged
}

TEST_CASE("gamma_cell: 3D laminate along/across the variation axis") {
  SolverConfig cfg;
  auto spec = IntegrandSpec::power_radial(LatticeField::periodic(3, {1.0, 4.0}, {2, 1, 1}), 2.0);
  Mat along(1, 3), across(1, 3);
  along << 1.0, 0.0, 0.0;
  across << 0.0, 0.0, 1.0;
  auto ga = gamma_cell(spec, along, 4, cfg);
  auto gc = gamma_cell(spec, across, 4, cfg);
  CHECK(std::abs(ga.value - 1.6) / 1.6 <= 0.01);
  CHECK(std::abs(gc.value - 2.5) / 2.5 <= 0.01);
}

TEST_CASE("gamma_cell preconditions") {
  SolverConfig cfg;
  CHECK_THROWS_AS(gamma_cell(checkerboard_1d(), scalar_sigma(1.0), 1, cfg), ConfigError);
  CHECK_THROWS_AS(gamma_cell(random_1d(1), scalar_sigma(1.0), 4, cfg), ConfigError);
}

TEST_CASE("gamma_cell: evenness via sign-mirrored descent") {
  SolverConfig cfg;
  auto spec = checkerboard_1d(2.5);
  auto plus = gamma_cell(spec, scalar_sigma(1.3), 16, cfg);
  auto minus = gamma_cell(spec, scalar_sigma(-1.3), 16, cfg);
  CHECK(plus.value == minus.value);  // negation mirrors the whole trajectory
  CHECK(gamma_cell(spec, scalar_sigma(0.0), 4, cfg).value == 0.0);
}

TEST_CASE("gamma_cell: bounded above by the coefficient average (u=0 competitor)") {
  SolverConfig cfg;
  auto spec = checkerboard_1d();
  double xi = 1.7;
  auto sample = gamma_cell(spec, scalar_sigma(xi), 16, cfg);
  double average = 0.5 * (1.0 + 4.0) * xi * xi;
  CHECK(sample.value <= average + 1e-9 * (1.0 + average));
}

TEST_CASE("gamma_cell: refinement is monotone on nested meshes") {
  SolverConfig cfg;
  auto spec = IntegrandSpec::power_radial(
      LatticeField::periodic(2, {1.0, 4.0, 4.0, 1.0}, {2, 2, 1}), 2.0);
  Mat sigma(1, 2);
  sigma << 1.0, 0.0;
  auto coarse = gamma_cell(spec, sigma, 4, cfg);
  auto fine = gamma_cell(spec, sigma, 8, cfg);
  CHECK(fine.value <= coarse.value + 1e-9 * (1.0 + coarse.value));
}

TEST_CASE("mu_over_cube basics") {
  SolverConfig cfg;
  auto spec = random_1d(21);
  auto zero = mu_over_cube(spec, scalar_sigma(0.0), 2, 4, cfg);
  CHECK(zero.report.energy == 0.0);  // u=0 admissible, density nonnegative

  auto constant = IntegrandSpec::power_radial(LatticeField::constant(2, 3.0), 2.0);
  Mat sigma(1, 2);
  sigma << 0.6, 0.8;
  auto sample = mu_over_cube(constant, sigma, 2, 4, cfg);
  CHECK(std::abs(sample.value - 3.0) / 3.0 <= 1e-10);  // affine minimizer
}

TEST_CASE("mu normalized values are bounded by the affine competitor") {
  SolverConfig cfg;
  auto spec = random_1d(33);
  const auto& w = spec.window();
  double xi = 1.8;
  double bound = spec.beta() * std::max(std::pow(xi, w.p_minus), std::pow(xi, w.p_plus)) + spec.beta();
  for (int t : {1, 2, 4, 8}) {
    auto sample = mu_over_cube(spec, scalar_sigma(xi), t, 4, cfg);
    CHECK(sample.value <= bound + 1e-9);
  }
}

TEST_CASE("scaling identity: mu(tQ) = t^d * unit-cube eps-minimum") {
  SolverConfig cfg;
  cfg.tol_g = 1e-11;
  cfg.tol_e = 1e-15;
  auto r1 = check_scaling(random_1d(5), scalar_sigma(1.2), 3, 8, cfg);
  CHECK(r1.rel_gap <= 1e-9);
  auto r2 = check_scaling(random_2d(6), Mat(scalar_sigma(1.0).replicate(1, 2)), 2, 4, cfg);
  CHECK(r2.rel_gap <= 1e-9);
}

TEST_CASE("zeta_estimate: constant palette reproduces a|xi|^p at every (t, seed)") {
  SolverConfig cfg;
  auto spec = IntegrandSpec::power_radial(
      LatticeField::random(1, 11, Palette{{{2.0, 1.0}}}), 2.0);
  std::vector<int> t_list{2, 4};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double xi = 1.1;
  auto est = zeta_estimate(spec, scalar_sigma(xi), t_list, seeds, 4, cfg);
  REQUIRE(est.entries.size() == 6);
  for (const auto& e : est.entries) {
    CHECK(e.report.converged);
    CHECK(std::abs(e.value - 2.0 * xi * xi) <= 1e-9 * (1.0 + 2.0 * xi * xi));
  }
  CHECK(est.point_estimate == est.per_t.back().mean);
  CHECK(est.trend.size() == 1);
}

TEST_CASE("zeta_estimate validates its ladder") {
  SolverConfig cfg;
  std::vector<std::uint64_t> seeds{1, 2};
  std::vector<int> bad{4, 4};
  CHECK_THROWS_AS(zeta_estimate(random_1d(1), scalar_sigma(1.0), bad, seeds, 2, cfg), ConfigError);
  std::vector<int> ok{2, 4};
  std::vector<std::uint64_t> one{7};
  CHECK_THROWS_AS(zeta_estimate(random_1d(1), scalar_sigma(1.0), ok, one, 2, cfg), ConfigError);
}

TEST_CASE("phi_estimate with lambda=0 reproduces zeta bit-for-bit") {
  SolverConfig cfg;
  auto spec = random_1d(17);
  auto bump = NonconvexSpec::sine_bump(spec, 0.0);
  std::vector<int> t_list{2, 4};
  std::vector<std::uint64_t> seeds{5, 6, 7};
  auto zeta = zeta_estimate(spec, scalar_sigma(1.0), t_list, seeds, 4, cfg);
  auto phi = phi_estimate(bump, scalar_sigma(1.0), t_list, seeds, 4, cfg);
  REQUIRE(zeta.entries.size() == phi.entries.size());
  for (std::size_t i = 0; i < zeta.entries.size(); ++i) {
    CHECK(zeta.entries[i].value == phi.entries[i].value);
    CHECK(zeta.entries[i].report.iterations == phi.entries[i].report.iterations);
    CHECK(zeta.entries[i].report.grad_norm == phi.entries[i].report.grad_norm);
  }
  CHECK_FALSE(phi.upper_bound);
}

TEST_CASE("phi_estimate is an upper-bound estimator dominating alpha*zeta") {
  SolverConfig cfg;
  auto spec = random_1d(23);
  auto bump = NonconvexSpec::sine_bump(spec, 0.25);
  std::vector<int> t_list{2, 4};
  std::vector<std::uint64_t> seeds{1, 2};
  auto zeta = zeta_estimate(spec, scalar_sigma(1.0), t_list, seeds, 4, cfg);
  auto phi = phi_estimate(bump, scalar_sigma(1.0), t_list, seeds, 4, cfg);
  CHECK(phi.upper_bound);
  // f >= g pointwise here, so the minima are ordered up to solver slack
  for (std::size_t i = 0; i < zeta.entries.size(); ++i)
    CHECK(phi.entries[i].value >= zeta.entries[i].value - 1e-8);
}

TEST_CASE("subadditivity over translated partitions") {
  SolverConfig cfg;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto report = check_subadditivity(random_1d(seed), scalar_sigma(1.0), 2, 2, 8, cfg);
    CHECK(report.parts == 2);
    CHECK(report.slack >= -1e-8);
    CHECK(report.pass);
  }
  // constant field: affine minimizers glue exactly, both sides equal a|xi|^p t^d
  auto constant = IntegrandSpec::power_radial(
      LatticeField::random(1, 9, Palette{{{3.0, 1.0}}}), 2.0);
  auto equal = check_subadditivity(constant, scalar_sigma(1.0), 2, 2, 8, cfg);
  CHECK(equal.mu_whole == doctest::Approx(3.0 * 2.0).epsilon(1e-10));
  CHECK(std::abs(equal.slack) <= 1e-9 * (1.0 + equal.mu_whole));
  // trivial partition: the same solve on both sides
  auto trivial = check_subadditivity(random_1d(4), scalar_sigma(1.0), 2, 1, 8, cfg);
  CHECK(trivial.slack == 0.0);
  CHECK_THROWS_AS(check_subadditivity(random_1d(4), scalar_sigma(1.0), 3, 2, 8, cfg), ConfigError);
}

TEST_CASE("stationarity: shifted field equals translated cube") {
  SolverConfig cfg;
  auto spec = random_2d(31);
  Mat sigma(1, 2);
  sigma << 1.0, -0.5;
  std::array<long, 2> zero{0, 0};
  auto id = check_stationarity(spec, sigma, 2, zero, 4, cfg);
  CHECK(id.rel_gap == 0.0);

  std::array<long, 2> z{5, -3};
  auto moved = check_stationarity(spec, sigma, 2, z, 4, cfg);
  CHECK(moved.rel_gap <= 1e-9);
  CHECK(moved.pass);

  auto again = check_stationarity(spec, sigma, 2, z, 4, cfg);
  CHECK(again.mu_shifted_field == moved.mu_shifted_field);      // bit-identical reruns
  CHECK(again.mu_translated_cube == moved.mu_translated_cube);
}

TEST_CASE("2D random checkerboard tracks the duality value sqrt(a1 a2)") {
  // For the 2D iid two-phase medium the exact effective coefficient is the
  // geometric mean, here sqrt(1*4) = 2; the estimator approaches it from
  // above (Dirichlet data and conforming elements both bias upward).
  SolverConfig cfg;
  auto spec = random_2d(77);
  Mat sigma(1, 2);
  sigma << 1.0, 0.0;
  std::vector<int> t_list{16};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  auto coarse = zeta_estimate(spec, sigma, t_list, seeds, 2, cfg, 2);
  auto fine = zeta_estimate(spec, sigma, t_list, seeds, 4, cfg, 2);
  CHECK(coarse.point_estimate > 2.0);
  CHECK(fine.point_estimate > 2.0);
  CHECK(fine.point_estimate < coarse.point_estimate);  // nested spaces
  CHECK(std::abs(fine.point_estimate - 2.0) / 2.0 < 0.10);
}

TEST_CASE("stochastic concentration: standard errors shrink with the cube") {
  SolverConfig cfg;
  auto spec = random_1d(100);
  std::vector<int> t_list{4, 32};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 12; ++s) seeds.push_back(s);
  auto est = zeta_estimate(spec, scalar_sigma(1.0), t_list, seeds, 2, cfg);
  REQUIRE(est.per_t.size() == 2);
  CHECK(est.per_t[1].std_error < est.per_t[0].std_error);
}
