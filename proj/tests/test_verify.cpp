#include "spinvar/errors.hpp"
#include "spinvar/verify.hpp"

#include <doctest.h>

#include <cmath>

using namespace spinvar;

namespace {

const ScanRow& find_row(const std::vector<ScanRow>& rows, const std::string& observable, int sites,
                        double lambda = 0.0) {
  for (const ScanRow& r : rows) {
    if (r.observable == observable && r.sites == sites && r.lambda == lambda) return r;
  }
  throw std::runtime_error("row not found: " + observable);
}

ModelSpec rem_spec() { return ModelSpec{}; }

ModelSpec heisenberg_spec() {
  ModelSpec s;
  s.family = ModelFamily::Heisenberg;
  s.replicas = 1;
  return s;
}

ModelSpec ea_spec() {
  ModelSpec s;
  s.family = ModelFamily::Ea;
  return s;
}

}  // namespace

TEST_CASE("Guerra formula values") {
  CHECK(rem_pressure(1.0) == doctest::Approx(0.5 + std::log(2.0)).epsilon(1e-15));
  CHECK(rem_pressure(1.0) == doctest::Approx(1.193147).epsilon(1e-6));
  CHECK(kRemCriticalBeta == doctest::Approx(std::sqrt(2.0 * std::log(2.0))).epsilon(1e-15));
  const double below = kRemCriticalBeta * kRemCriticalBeta / 2.0 + std::log(2.0);
  const double above = kRemCriticalBeta * std::sqrt(2.0 * std::log(2.0));
  CHECK(below == doctest::Approx(above).epsilon(1e-14));
  CHECK(rem_pressure(kRemCriticalBeta * (1 - 1e-9)) == doctest::Approx(rem_pressure(kRemCriticalBeta * (1 + 1e-9))).epsilon(1e-8));
  CHECK(guerra_formula(2, 2.0, 0.1) == doctest::Approx(4.909640).epsilon(1e-6));
  CHECK(guerra_formula(2, 1.0, 0.0) == doctest::Approx(2.0 * rem_pressure(1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(guerra_formula(1, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("Guerra formula is convex in lambda") {
  for (double beta : {0.5, 1.0, 2.0}) {
    for (double lambda = -1.0; lambda <= 1.0; lambda += 0.05) {
      const double d = 0.01;
      const double second =
          guerra_formula(2, beta, lambda + d) - 2.0 * guerra_formula(2, beta, lambda) + guerra_formula(2, beta, lambda - d);
      CHECK(second >= -1e-12);
    }
  }
}

TEST_CASE("REM pressure at high temperature approaches the annealed value") {
  const GuerraReport r = guerra_compare(2, 0.5, 0.0, {12}, 40, 42);
  REQUIRE(r.points.size() == 1);
  CHECK(std::abs(r.points[0].pressure.mean - 2.0 * (0.125 + std::log(2.0))) <= 0.1);
  CHECK(r.analytic == doctest::Approx(guerra_formula(2, 0.5, 0.0)));
  CHECK(r.points[0].gap == doctest::Approx(std::abs(r.points[0].pressure.mean - r.analytic)));
}

TEST_CASE("large lambda pins the overlap") {
  const GuerraReport r = guerra_compare(2, 1.0, 3.0, {6, 8}, 20, 7);
  for (const GuerraPoint& p : r.points) CHECK(p.overlap.mean > 0.99);
  const auto rows = guerra_rows(r);
  CHECK(rows.size() >= 2 * r.points.size());
}

TEST_CASE("variance decomposition adds up") {
  for (const ModelSpec& spec : {rem_spec(), ea_spec()}) {
    const std::vector<int> sizes = spec.family == ModelFamily::Rem ? std::vector<int>{4, 6} : std::vector<int>{2};
    for (const VarianceScanPoint& p : variance_scan(spec, sizes, 1.0, 0.3, 12, 3)) {
      CHECK(std::abs(p.thermal.mean + p.disorder.mean - p.total.mean) <= 1e-10);
      CHECK(p.thermal.mean >= -1e-12);
      CHECK(p.disorder.mean >= -1e-12);
    }
  }
}

TEST_CASE("infinite-temperature thermal variance of the REM overlap") {
  const auto points = variance_scan(rem_spec(), {4}, 1e-7, 0.0, 5, 1);
  const double p = 1.0 / 16.0;
  CHECK(points[0].thermal.mean == doctest::Approx(p * (1.0 - p)).epsilon(1e-5));
  CHECK(points[0].disorder.mean <= 1e-10);
}

TEST_CASE("Heisenberg scans use a single sample") {
  CHECK(effective_samples(heisenberg_spec(), 200) == 1);
  CHECK(effective_samples(rem_spec(), 200) == 200);
  const auto points = variance_scan(heisenberg_spec(), {4}, 1.0, 0.3, 50, 1);
  CHECK(points[0].total.count == 1);
  CHECK(points[0].disorder.mean == 0.0);
}

TEST_CASE("bound attachment and trend checks") {
  ScanRow row;
  row.estimate = EstimatorResult{1.05, 0.0, 0.01, 10};
  attach_bound(row, 1.0);
  CHECK(*row.pass == false);
  CHECK(*row.ratio == doctest::Approx(1.05));
  row.estimate.std_error = 0.02;
  attach_bound(row, 1.0);
  CHECK(*row.pass == true);
  row.estimate = EstimatorResult{1.0005, 0.0, 0.0, 1};
  attach_bound(row, 1.0, 1e-3);
  CHECK(*row.pass == true);

  CHECK(non_increasing({{3.0, 0, 0, 1}, {2.0, 0, 0, 1}, {2.0, 0, 0, 1}}));
  CHECK_FALSE(non_increasing({{1.0, 0, 0, 1}, {1.1, 0, 0, 1}}));
  CHECK(non_increasing({{1.0, 0, 0.1, 1}, {1.1, 0, 0.1, 1}}));
  CHECK(non_increasing({{1.0, 0, 0, 1}, {1.0005, 0, 0, 1}}, 1e-3));
}

TEST_CASE("derivative bound for the REM and the Heisenberg chain") {
  CHECK(lemma1_bound(1, 1.0, 1.0, 0.5, 4) == doctest::Approx(2.0));
  CHECK(lemma1_bound(2, 1.0, 0.5, 0.5, 4) == doctest::Approx(std::sqrt(2.0) * 4.0 * 4.0));
  CHECK_THROWS_AS(lemma1_bound(1, 1.0, 0.0, 0.5, 4), InvalidArgument);

  const auto rem = std::make_shared<const ModelInstance>(build_rem(6, 2, DisorderStream(42, 0)));
  Lemma1Options o;
  const ScanRow r = lemma1_bound_check(rem, 1.0, o);
  CHECK(*r.pass);
  CHECK(*r.ratio <= 1.0);

  o.mu = 5.0;
  CHECK(*lemma1_bound_check(rem, 1.0, o).ratio <= 1.0);

  const auto heis = std::make_shared<const ModelInstance>(build_heisenberg(4));
  o.mu = 0.5;
  o.nodes = 32;
  CHECK(*lemma1_bound_check(heis, 1.0, o).ratio <= 1.0);

  o.order = 3;
  CHECK_THROWS_AS(lemma1_bound_check(heis, 1.0, o), InvalidArgument);
}

TEST_CASE("psi variance bound") {
  CHECK(psi_variance_bound(rem_spec(), 8, 1.0) == doctest::Approx(0.5));
  // β²|A|n²S^{2|A|}(ΣK)²/N = 1·2·4·(1/16)·1/3.
  CHECK(psi_variance_bound(ea_spec(), 3, 1.0) == doctest::Approx(1.0 / 6.0));
  const ScanRow r = psi_variance_check(rem_spec(), 8, 1.0, 0.0, 60, 42);
  CHECK(*r.pass);
  CHECK(r.estimate.mean > 0.0);
  const ScanRow hot = psi_variance_check(rem_spec(), 8, 1e-4, 0.0, 20, 42);
  CHECK(hot.estimate.mean <= psi_variance_bound(rem_spec(), 8, 1e-4));
  CHECK(hot.estimate.mean <= 1e-8);
  CHECK_THROWS_AS(psi_variance_check(heisenberg_spec(), 4, 1.0, 0.0, 10, 1), InvalidArgument);
}

TEST_CASE("overlap dichotomy values are probabilities") {
  const auto rows = overlap_dichotomy({4, 6}, 2.0, {0.0, 0.5}, 30, 5);
  CHECK(rows.size() == 8);
  for (const ScanRow& r : rows) {
    CHECK(r.estimate.mean >= 0.0);
    CHECK(r.estimate.mean <= 1.0);
  }
  const ScanRow& o = find_row(rows, "overlap", 6, 0.5);
  const ScanRow& prod = find_row(rows, "overlap_product", 6, 0.5);
  CHECK(prod.estimate.mean == doctest::Approx(o.estimate.mean * (1.0 - o.estimate.mean)).epsilon(1e-2));
}

TEST_CASE("limit-order probe on the Heisenberg chain") {
  const auto rows = limit_order_probe(heisenberg_spec(), {2, 4, 6}, {0.0, 0.1}, 1.0, 1, 1);
  for (int l : {2, 4, 6}) {
    CHECK(std::abs(find_row(rows, "h_mean", l, 0.0).estimate.mean) <= 1e-10);
    CHECK(find_row(rows, "h2_mean", l, 0.0).estimate.mean > 0.0);
    CHECK(find_row(rows, "h_mean", l, 0.1).estimate.mean > 0.0);
  }
  for (const ScanRow& r : rows) CHECK_FALSE(r.pass.has_value());
}

TEST_CASE("double commutator norms") {
  CHECK(double_commutator_norm(build_rem(4, 2, DisorderStream(1, 0))) == 0.0);
  double previous = 1e300;
  for (int l : {4, 6, 8}) {
    const ModelInstance m = build_heisenberg(l);
    const double norm = double_commutator_norm(m);
    const auto& h = std::get<HermitianOperator>(m.perturbation());
    const auto& h0 = std::get<HermitianOperator>(m.unperturbed());
    if (l == 4) CHECK(norm == doctest::Approx(operator_norm(HermitianOperator(commutator(h.matrix(), commutator(h0, h))))).epsilon(1e-10));
    CHECK(norm > 0.0);
    CHECK(norm < previous);
    previous = norm;
  }
}

TEST_CASE("assumption suite rows") {
  const auto rem = assumption_suite(rem_spec(), {4, 6}, 1.0, 0.3, 20, 2);
  CHECK(find_row(rem, "commutator_norm", 6, 0.3).estimate.mean == 0.0);
  CHECK(*find_row(rem, "psi_var_times_N", 6, 0.3).pass);
  find_row(rem, "p_N_increment", 6, 0.3);

  const auto ea = assumption_suite(ea_spec(), {2, 3}, 1.0, 0.3, 10, 2);
  CHECK(*find_row(ea, "psi_var_times_N", 3, 0.3).pass);
}

TEST_CASE("Harris sweep passes on random and model instances") {
  const auto rows = harris_sweep(12, 16, 1.0, 42);
  CHECK(rows.size() == 2 * (12 + 3));
  for (const ScanRow& r : rows) CHECK(*r.pass);
}

TEST_CASE("thermodynamic identities on every family") {
  const std::vector<double> lambdas{-0.5, 0.0, 0.3, 1.0};
  const auto check = [&](ModelInstance m, double beta) {
    const PerturbedFamily fam = assemble(std::move(m), {});
    for (const ScanRow& r : thermo_identity_check(fam, beta, lambdas)) {
      CAPTURE(r.observable);
      CAPTURE(r.lambda);
      CHECK(*r.pass);
    }
  };
  check(build_rem(5, 2, DisorderStream(3, 0)), 1.0);
  check(build_heisenberg(4), 1.0);
  check(build_ea(2, {0.3, 0.3, 0.4}, {0, 1}, SpinMagnitude::from_twice(1), DisorderStream(3, 0)), 1.0);
}

TEST_CASE("spectral and finite-difference second derivatives agree") {
  const ScanRow r = derivative_equivalence(assemble(build_heisenberg(4), {}), 0.5, 0.0);
  CHECK(*r.pass);
  CHECK(r.estimate.mean <= 1e-4);
}
