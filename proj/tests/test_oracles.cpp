#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace specfilter;
using namespace testsupport;

TEST_CASE("exact_model_risk: closed cases") {
  const ProblemInstance r1 = make_r1();

  const RiskDecomposition empty = exact_model_risk(ModelSet(), r1);
  CHECK(empty.bias == doctest::Approx(5.0125).epsilon(1e-14));
  CHECK(empty.variance == 0.0);
  CHECK(empty.total == empty.bias);

  const RiskDecomposition full = exact_model_risk(ModelSet({0, 1, 2, 3}, 4), r1);
  CHECK(full.bias == 0.0);
  CHECK(full.variance == doctest::Approx(101.05).epsilon(1e-12));

  const RiskDecomposition m13 = exact_model_risk(ModelSet({0, 2}, 4), r1);
  CHECK(m13.bias == doctest::Approx(0.0125).epsilon(1e-12));
  CHECK(m13.variance == doctest::Approx(1.01).epsilon(1e-12));
  CHECK(m13.total == doctest::Approx(1.0225).epsilon(1e-12));
  CHECK(m13.total == m13.bias + m13.variance);
}

TEST_CASE("exact_filter_risk: closed cases and reduction to model risk") {
  const ProblemInstance r1 = make_r1();

  FilterVector ones{std::vector<double>(4, 1.0)};
  CHECK(exact_filter_risk(ones, r1) == doctest::Approx(101.05).epsilon(1e-12));

  FilterVector zeros{std::vector<double>(4, 0.0)};
  CHECK(exact_filter_risk(zeros, r1) == doctest::Approx(5.0125).epsilon(1e-12));

  // binary filter equals the model risk
  FilterVector binary{{1, 0, 1, 0}};
  CHECK(exact_filter_risk(binary, r1) ==
        doctest::Approx(exact_model_risk(ModelSet({0, 2}, 4), r1).total).epsilon(1e-14));

  // oracle filter risk: sum x_i^2 sigma_i^2 / (x_i^2 + sigma_i^2)
  CHECK(exact_filter_risk(oracle_filter(r1), r1) ==
        doctest::Approx(0.8204009276005724).epsilon(1e-13));
}

TEST_CASE("oracle_model: reference instance and degenerate signal") {
  const ProblemInstance r1 = make_r1();
  CHECK(oracle_model(r1).indices() == std::vector<int>{0, 2});

  const ProblemInstance zero(SingularSystem::from_spectrum({1.0, 0.5}), {0.0, 0.0}, 0.3);
  CHECK(oracle_model(zero).indices().empty());  // 0 >= sigma_i^2 never holds
}

TEST_CASE("oracle_model equals the exhaustive argmin (200 random instances)") {
  std::mt19937 gen(42);
  std::uniform_int_distribution<int> dim(2, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const ProblemInstance inst = random_instance(gen, dim(gen));
    const auto variances = noise_variances(inst.system, inst.sigma);
    const auto expected = brute_force_best_model(inst.x, variances);
    CHECK(oracle_model(inst).mask(inst.n()) == expected);
    // and through the library's own enumerator
    CHECK(exhaustive_oracle_model(inst) == oracle_model(inst));
  }
}

TEST_CASE("exhaustive enumeration is capped at n = 20") {
  std::mt19937 gen(3);
  const ProblemInstance big = random_instance(gen, 21);
  CHECK_THROWS_AS(exhaustive_oracle_model(big), Error);
}

TEST_CASE("oracle_filter: reference values and coordinatewise minimality") {
  const ProblemInstance r1 = make_r1();
  const FilterVector lambda = oracle_filter(r1);
  CHECK(lambda.lambda[0] == doctest::Approx(1.0 / 1.01).epsilon(1e-13));
  CHECK(lambda.lambda[1] == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(lambda.lambda[2] == doctest::Approx(0.8).epsilon(1e-13));
  CHECK(lambda.lambda[3] == doctest::Approx(2.4999375015624612e-05).epsilon(1e-10));

  const ProblemInstance sparse(SingularSystem::from_spectrum({1.0, 0.5}), {0.0, 1.0}, 0.3);
  CHECK(oracle_filter(sparse).lambda[0] == 0.0);

  const double base = exact_filter_risk(lambda, r1);
  for (int i = 0; i < 4; ++i) {
    for (double delta : {-0.01, 0.01}) {
      FilterVector perturbed = lambda;
      perturbed.lambda[i] += delta;
      CHECK(exact_filter_risk(perturbed, r1) > base);
    }
  }
}

TEST_CASE("factor-2 comparison of the binary and maximal filter classes") {
  const ProblemInstance r1 = make_r1();
  const BoundReport report = factor_two_check(r1);
  CHECK(report.lhs == doctest::Approx(1.0225).epsilon(1e-12));
  CHECK(report.rhs == doctest::Approx(2 * 0.8204009276005724).epsilon(1e-12));
  CHECK(report.satisfied);

  // equality at x_i^2 = sigma_i^2
  const SingularSystem flat = SingularSystem::from_spectrum({1.0, 1.0, 1.0});
  const double sigma = 0.6;
  const double noise = sigma * sigma / 3.0;
  const ProblemInstance boundary(
      flat, {std::sqrt(noise), std::sqrt(noise), std::sqrt(noise)}, sigma);
  const BoundReport eq = factor_two_check(boundary);
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-12));
  CHECK(eq.satisfied);

  std::mt19937 gen(9);
  std::uniform_int_distribution<int> dim(2, 30);
  for (int trial = 0; trial < 10000; ++trial) {
    const ProblemInstance inst = random_instance(gen, dim(gen));
    const BoundReport r = factor_two_check(inst);
    CHECK(r.lhs <= r.rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("closed-form risks match the summation implementations to 1e-12") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 500; ++trial) {
    const ProblemInstance inst = random_instance(gen, 9);
    const auto variances = noise_variances(inst.system, inst.sigma);

    const ModelSet mstar = oracle_model(inst);
    double closed_model = 0.0;
    for (int i = 0; i < inst.n(); ++i) {
      const double x2 = inst.x[i] * inst.x[i];
      closed_model += x2 >= variances[i] ? variances[i] : x2;
    }
    CHECK(exact_model_risk(mstar, inst).total ==
          doctest::Approx(closed_model).epsilon(1e-12));

    double closed_filter = 0.0;
    for (int i = 0; i < inst.n(); ++i) {
      const double x2 = inst.x[i] * inst.x[i];
      closed_filter += x2 * variances[i] / (x2 + variances[i]);
    }
    CHECK(exact_filter_risk(oracle_filter(inst), inst) ==
          doctest::Approx(closed_filter).epsilon(1e-12));
    CHECK(filter_risk_by_summation(oracle_filter(inst).lambda, inst.x, variances) ==
          doctest::Approx(closed_filter).epsilon(1e-12));
  }
}

TEST_CASE("oracle_inequality_bound: arithmetic assembly on the reference instance") {
  const ProblemInstance r1 = make_r1();
  const double K = std::sqrt(1.0 / 3.0);
  const BoundReport report = oracle_inequality_bound(r1, 3.0, K, 1.0);

  const double expected_rhs = 1.0225 +
                              (36.0 * std::log(4.0) + 2.0 + 3.0 * std::log(5.0125)) * 1.01 +
                              2.0 * K * 3.0 / 4.0;
  CHECK(report.rhs == doctest::Approx(expected_rhs).epsilon(1e-13));
  CHECK(report.rhs == doctest::Approx(59.19835079578071).epsilon(1e-12));
  CHECK(report.lhs == 1.0);
  CHECK(report.satisfied);

  bool found_k1 = false;
  for (const auto& [name, value] : report.constants) {
    if (name == "K1") {
      CHECK(value == doctest::Approx(36.0));
      found_k1 = true;
    }
  }
  CHECK(found_k1);
}

TEST_CASE("oracle_inequality_bound: degenerate and empty-oracle cases") {
  const ProblemInstance zero(SingularSystem::from_spectrum({1, 0.9, 0.8, 0.7}),
                             {0.0, 0.0, 0.0, 0.0}, 0.5);
  try {
    oracle_inequality_bound(zero, 3.0, 1.0, 0.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::degenerate_signal);
  }

  // all x_i^2 < sigma_i^2: m* empty, rhs collapses to oracle risk + K3/n
  const ProblemInstance faint(SingularSystem::from_spectrum({1, 0.9, 0.8, 0.7}),
                              {0.01, 0.01, 0.01, 0.01}, 2.0);
  CHECK(oracle_model(faint).count() == 0);
  const double K = std::sqrt(1.0 / 3.0);
  const BoundReport report = oracle_inequality_bound(faint, 3.0, K, 0.0);
  const double oracle_risk = exact_model_risk(oracle_model(faint), faint).total;
  CHECK(report.rhs == doctest::Approx(oracle_risk + 2.0 * K * 3.0 / 4.0).epsilon(1e-13));

  CHECK_THROWS_AS(oracle_inequality_bound(ProblemInstance(SingularSystem::from_spectrum({1, 0.5}),
                                                 {1.0, 1.0}, 0.2),
                                 3.0, K, 0.0),
                  Error);  // n > 2 required
}

TEST_CASE("oracle-inequality rhs never falls below the oracle risk for unit-or-larger signals") {
  std::mt19937 gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    ProblemInstance inst = random_instance(gen, 8);
    inst.x[0] += 3.0;  // ensure ||x|| >= 1 so K2 >= 2
    const BoundReport report =
        oracle_inequality_bound(inst, 3.0, std::sqrt(1.0 / 3.0), 0.0);
    CHECK(report.rhs >= exact_model_risk(oracle_model(inst), inst).total);
  }
}

TEST_CASE("selection_error_bounds: reference arithmetic") {
  const ProblemInstance r1 = make_r1();
  const auto variances = noise_variances(r1.system, r1.sigma);
  const ThresholdParams params = threshold_params(variances, 3.0);
  const double K = std::sqrt(1.0 / 3.0);
  const CoordinateBounds bounds = selection_error_bounds(r1, params, K);

  // mu = 0 coordinates: first bound is 2 K beta sigma_i^2
  CHECK(bounds.selection[0] == doctest::Approx(2.0 * K * 3.0 * 0.01).epsilon(1e-13));
  CHECK(bounds.selection[1] == doctest::Approx(2.0 * K * 3.0 * 0.04).epsilon(1e-13));
  // i = 3: 2 K beta e^{-mu_3/beta} with mu_3 = 3 log 16, so e^{-mu/beta} = 1/16
  CHECK(bounds.selection[2] == doctest::Approx(0.21650635094610965).epsilon(1e-12));
  CHECK(bounds.omission[2] == doctest::Approx(51.906597000316054).epsilon(1e-12));
  CHECK(bounds.omission[0] == doctest::Approx(0.01 * 2.0).epsilon(1e-13));
}
