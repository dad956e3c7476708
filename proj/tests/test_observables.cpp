#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amlsim/errors.hpp"
#include "amlsim/models.hpp"
#include "amlsim/observables.hpp"

using namespace amlsim;

namespace {

std::shared_ptr<const FockBasis> single_mode(const std::string& label, int cap,
                                             int weight = 1) {
  return build_basis(ModeSet({label}, {weight}), TruncationSpec::uniform(1, cap));
}

std::shared_ptr<const FockBasis> pair_basis(int cap) {
  return build_basis(ModeSet({"a1", "a2"}, {1, 1}),
                     TruncationSpec::uniform(2, cap));
}

StateVector coherent_pair(double mag_a, double mag_b, int cap) {
  auto joint = pair_basis(cap);
  auto pa = coherent_state(single_mode("a1", cap), CoherentSpec{"a1", mag_a, 0.0});
  auto pb = coherent_state(single_mode("a2", cap), CoherentSpec{"a2", mag_b, 0.3});
  return product_state(joint, {pa, pb});
}

}  // namespace

TEST_CASE("populations of reference states") {
  auto vac = vacuum_state(single_mode("c", 10));
  CHECK(population(vac, "c") == 0.0);

  auto coh = coherent_state(single_mode("c", 24), CoherentSpec{"c", 2.0, 0.0});
  CHECK(population(coh, "c") == doctest::Approx(4.0).epsilon(1e-6));

  auto sq = squeezed_state(single_mode("c", 24), SqueezeSpec{"c", 0.5, 0.0, {}});
  const double sh2 = std::sinh(0.5) * std::sinh(0.5);
  CHECK(population(sq, "c") == doctest::Approx(sh2).epsilon(1e-6));
}

TEST_CASE("vacuum and coherent states sit on the vacuum noise floor") {
  auto vac = vacuum_state(single_mode("c", 10));
  auto rep = squeezing(vac, "c");
  CHECK(rep.s1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.s2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.v1 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rep.commutator_abs == doctest::Approx(0.5).epsilon(1e-12));

  for (double phase : {0.0, 0.9}) {
    auto coh =
        coherent_state(single_mode("c", 30), CoherentSpec{"c", 1.7, phase});
    auto crep = squeezing(coh, "c");
    CHECK(std::abs(crep.s1) < 1e-6);
    CHECK(std::abs(crep.s2) < 1e-6);
    CHECK(crep.g1_mean == doctest::Approx(1.7 * std::cos(phase)).epsilon(1e-6));
    CHECK(crep.g2_mean == doctest::Approx(1.7 * std::sin(phase)).epsilon(1e-6));
  }
}

TEST_CASE("squeezed vacuum squeezes the second quadrature at phi_s = 0") {
  // with xi = (r/2) e^{-i phi_s} and phi_s = 0 the generator squeezes the
  // (a - a^)/2i component: S2 = e^{-2r} - 1, S1 = e^{2r} - 1
  const double r = 0.5;
  auto sq = squeezed_state(single_mode("c", 40), SqueezeSpec{"c", r, 0.0, {}});
  auto rep = squeezing(sq, "c");
  CHECK(rep.s2 == doctest::Approx(std::exp(-2.0 * r) - 1.0).epsilon(1e-5));
  CHECK(rep.s1 == doctest::Approx(std::exp(2.0 * r) - 1.0).epsilon(1e-5));
  CHECK(rep.s2 == doctest::Approx(-0.6321).epsilon(1e-3));
  CHECK(rep.s1 == doctest::Approx(1.7183).epsilon(1e-3));
}

TEST_CASE("Heisenberg floor holds for assorted states") {
  std::vector<StateVector> states;
  states.push_back(vacuum_state(single_mode("c", 12)));
  states.push_back(
      coherent_state(single_mode("c", 24), CoherentSpec{"c", 1.4, 0.6}));
  states.push_back(
      squeezed_state(single_mode("c", 40), SqueezeSpec{"c", 0.7, 1.1, {}}));
  auto basis = single_mode("c", 12);
  states.push_back(fock_state(basis, {3}));
  for (const auto& psi : states) {
    auto rep = squeezing(psi, "c");
    const double floor = rep.commutator_abs * rep.commutator_abs / 4.0;
    CHECK(rep.v1 * rep.v2 >= floor - 1e-10);
  }
}

TEST_CASE("mandel q of reference states") {
  auto coh = coherent_state(single_mode("c", 30), CoherentSpec{"c", 2.0, 0.0});
  CHECK(std::abs(mandel_q(coh, "c")) < 1e-6);

  auto two = fock_state(single_mode("c", 5), {2});
  CHECK(mandel_q(two, "c") == doctest::Approx(-1.0).epsilon(1e-12));

  // squeezed vacuum: Q = var/mean - 1 with var = 2 sinh^2 r cosh^2 r,
  // so Q = 2 cosh^2 r - 1 = cosh(2r)
  const double r = 0.5;
  auto sq = squeezed_state(single_mode("c", 40), SqueezeSpec{"c", r, 0.0, {}});
  CHECK(mandel_q(sq, "c") == doctest::Approx(std::cosh(2.0 * r)).epsilon(1e-6));

  auto vac = vacuum_state(single_mode("c", 5));
  CHECK_THROWS_AS(mandel_q(vac, "c"), UndefinedStatisticError);
}

TEST_CASE("cross correlations of factorized and correlated pairs") {
  auto coh2 = coherent_pair(1.3, 0.9, 20);
  CHECK(g2_cross(coh2, "a1", "a2") == doctest::Approx(1.0).epsilon(1e-6));

  // TMSV: g2 = <n^2>/<n>^2 of the truncated geometric diagonal
  const double kappa = 1.0;
  const int cap = 30;
  auto tmsv = two_mode_squeezed_vacuum(pair_basis(cap),
                                       TwoModeSqueezeSpec{"a1", "a2", kappa, 0.0});
  const double x = std::tanh(kappa) * std::tanh(kappa);
  double z = 0.0, m1 = 0.0, m2 = 0.0, p = 1.0;
  for (int n = 0; n <= cap; ++n) {
    z += p;
    m1 += n * p;
    m2 += static_cast<double>(n) * n * p;
    p *= x;
  }
  const double oracle = (m2 / z) / ((m1 / z) * (m1 / z));
  CHECK(g2_cross(tmsv, "a1", "a2") == doctest::Approx(oracle).epsilon(1e-9));
  const double sh = std::sinh(kappa);
  CHECK(g2_cross(tmsv, "a1", "a2") ==
        doctest::Approx(2.0 + 1.0 / (sh * sh)).epsilon(1e-3));
  CHECK(g2_cross(tmsv, "a1", "a2") == doctest::Approx(2.7241).epsilon(1e-3));

  // |1,1> Fock pair
  auto fock11 = fock_state(pair_basis(3), {1, 1});
  CHECK(g2_cross(fock11, "a1", "a2") == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(g2_cross(fock11, "a1", "a1"), ConfigError);
  auto vac = vacuum_state(pair_basis(3));
  CHECK_THROWS_AS(g2_cross(vac, "a1", "a2"), UndefinedStatisticError);
}

TEST_CASE("auto correlations") {
  auto coh = coherent_state(single_mode("c", 30), CoherentSpec{"c", 1.5, 0.0});
  CHECK(g2_auto(coh, "c") == doctest::Approx(1.0).epsilon(1e-6));

  auto two = fock_state(single_mode("c", 5), {2});
  CHECK(g2_auto(two, "c") == doctest::Approx(0.5).epsilon(1e-12));

  // each TMSV marginal is thermal: g2 = 2
  auto tmsv = two_mode_squeezed_vacuum(pair_basis(30),
                                       TwoModeSqueezeSpec{"a1", "a2", 1.0, 0.0});
  CHECK(g2_auto(tmsv, "a1") == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("csi check assembles the comparison") {
  auto coh2 = coherent_pair(1.1, 1.4, 20);
  auto rep = csi_check(coh2, "a1", "a2");
  CHECK(std::abs(rep.csi_lhs - rep.csi_rhs) < 1e-6);

  auto tmsv = two_mode_squeezed_vacuum(pair_basis(30),
                                       TwoModeSqueezeSpec{"a1", "a2", 1.0, 0.0});
  auto trep = csi_check(tmsv, "a1", "a2");
  CHECK(trep.csi_violated);
  CHECK(trep.csi_lhs == doctest::Approx(7.4207).epsilon(1e-2));
  CHECK(trep.csi_rhs == doctest::Approx(4.0).epsilon(1e-2));

  auto fock11 = fock_state(pair_basis(3), {1, 1});
  auto frep = csi_check(fock11, "a1", "a2");
  CHECK(frep.csi_lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(frep.csi_rhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(frep.csi_violated);
}

TEST_CASE("metric parsing round-trips and rejects junk") {
  for (const char* text :
       {"population:b", "charge", "energy", "norm", "leakage", "mandel_q:g",
        "squeezing_s1:b", "squeezing_s2:g", "g2_auto:b", "g2_cross:b:g",
        "csi_lhs:b:g", "csi_rhs:b:g", "csi_violated:b:g", "pop_ratio:g:b"}) {
    CHECK(MetricSpec::parse(text).name() == text);
  }
  CHECK_THROWS_AS(MetricSpec::parse("nonsense"), ConfigError);
  CHECK_THROWS_AS(MetricSpec::parse("population"), ConfigError);
  CHECK_THROWS_AS(MetricSpec::parse("g2_cross:b"), ConfigError);
}

TEST_CASE("series report evaluates metrics over a grid") {
  TruncationSpec trunc;
  trunc.per_mode_cutoff = {12, 12, 6};
  trunc.total_charge_cutoff = 12;
  auto basis = build_basis(three_mode_set(), trunc);
  auto h = build_h3(basis, ThreeModeParams{1.0, 1.0});
  auto coh = coherent_state(single_mode("c", 12), CoherentSpec{"c", 2.0, 0.0});
  auto vac_b = vacuum_state(single_mode("b", 12));
  auto vac_g = vacuum_state(single_mode("g", 6, 2));
  auto psi0 = product_state(basis, {coh, vac_b, vac_g});

  auto grid = TimeGrid::linear(0.1, 5);
  auto states = evolve_series(h, psi0, grid);

  std::vector<MetricSpec> metrics;
  for (const char* name :
       {"population:c", "population:b", "population:g", "charge", "energy",
        "norm", "mandel_q:b"})
    metrics.push_back(MetricSpec::parse(name));
  auto series = series_report(states, grid, metrics, &h);

  // t = 0 moments match the prepared state
  CHECK(series.value(0, "population:c") ==
        doctest::Approx(population(psi0, "c")).epsilon(1e-12));
  CHECK(series.value(0, "population:b") == 0.0);
  // the output mode has no quanta at t = 0: undefined Q becomes a NaN cell
  CHECK(std::isnan(series.value(0, "mandel_q:b")));
  CHECK_FALSE(std::isnan(series.value(5, "mandel_q:b")));

  // conserved charge column is flat within 1e-9
  const double c0 = series.value(0, "charge");
  for (std::size_t row = 0; row < grid.size(); ++row) {
    CHECK(std::abs(series.value(row, "charge") - c0) < 1e-9);
    const double by_hand = series.value(row, "population:c") +
                           series.value(row, "population:b") +
                           2.0 * series.value(row, "population:g");
    CHECK(series.value(row, "charge") ==
          doctest::Approx(by_hand).epsilon(1e-12));
  }

  // empty metric list gives a times-only table
  auto times_only = series_report(states, grid, {});
  CHECK(times_only.columns().empty());
  std::ostringstream csv;
  times_only.write_csv(csv);
  CHECK(csv.str().substr(0, 5) == "time\n");

  // length mismatch is rejected
  auto short_states = states;
  short_states.pop_back();
  CHECK_THROWS_AS(series_report(short_states, grid, metrics, &h), ConfigError);
  // energy metric without a Hamiltonian is rejected
  CHECK_THROWS_AS(series_report(states, grid, metrics, nullptr), ConfigError);
}

TEST_CASE("csv output is fixed-format and repeatable") {
  auto basis = single_mode("c", 4);
  auto psi = coherent_state(basis, CoherentSpec{"c", 0.5, 0.0});
  auto grid = TimeGrid::linear(1.0, 2);
  std::vector<StateVector> states{psi, psi, psi};
  auto series =
      series_report(states, grid, {MetricSpec::parse("population:c")});
  std::ostringstream a, b;
  series.write_csv(a);
  series.write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("time,population:c\n", 0) == 0);
}

TEST_CASE("populations, variances and correlations stay nonnegative") {
  std::vector<StateVector> states;
  states.push_back(coherent_state(single_mode("c", 24), CoherentSpec{"c", 1.8, 1.2}));
  states.push_back(squeezed_state(single_mode("c", 40), SqueezeSpec{"c", 0.9, 2.1, {}}));
  states.push_back(fock_state(single_mode("c", 6), {4}));
  for (const auto& psi : states) {
    CHECK(population(psi, "c") >= 0.0);
    auto rep = squeezing(psi, "c");
    CHECK(rep.v1 >= 0.0);
    CHECK(rep.v2 >= 0.0);
    CHECK(g2_auto(psi, "c") >= 0.0);
  }
  auto tmsv = two_mode_squeezed_vacuum(pair_basis(24),
                                       TwoModeSqueezeSpec{"a1", "a2", 0.8, 0.4});
  CHECK(g2_cross(tmsv, "a1", "a2") >= 0.0);
}

TEST_CASE("output fluxes grow quadratically at short times") {
  // slope of log<n> against log t equals 2.00 +/- 0.02 for both beams
  TruncationSpec trunc;
  trunc.per_mode_cutoff = {12, 12, 6};
  trunc.total_charge_cutoff = 12;
  for (double alpha : {1.0, 2.0}) {
    auto basis = build_basis(three_mode_set(), trunc);
    auto h = build_h3(basis, ThreeModeParams{1.0, 1.0});
    auto coh = coherent_state(single_mode("c", 12), CoherentSpec{"c", alpha, 0.0});
    auto vac_b = vacuum_state(single_mode("b", 12));
    auto vac_g = vacuum_state(single_mode("g", 6, 2));
    auto psi0 = product_state(basis, {coh, vac_b, vac_g});
    auto grid = TimeGrid::log_spaced(1e-3, 1e-2, 6);
    auto states = evolve_series(h, psi0, grid);
    for (const char* mode : {"b", "g"}) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const double lx = std::log(grid.times[i]);
        const double ly = std::log(population(states[i], mode));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      CHECK(std::abs(slope - 2.0) < 0.02);
    }
  }
}
