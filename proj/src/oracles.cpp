#include "specfilter/core/oracles.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace specfilter {

RiskDecomposition exact_model_risk(const ModelSet& m, const ProblemInstance& instance) {
  const int n = instance.n();
  const std::vector<bool> mask = m.mask(n);
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  RiskDecomposition risk;
  for (int i = 0; i < n; ++i) {
    if (mask[i])
      risk.variance += variances[i];
    else
      risk.bias += instance.x[i] * instance.x[i];
  }
  risk.total = risk.bias + risk.variance;
  return risk;
}

double exact_filter_risk(const FilterVector& filter, const ProblemInstance& instance) {
  require(filter.n() == instance.n(), errc::dimension_mismatch, "filter length must equal n");
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  double risk = 0.0;
  for (int i = 0; i < instance.n(); ++i) {
    const double l = filter.lambda[i];
    const double one_minus = 1.0 - l;
    risk += one_minus * one_minus * instance.x[i] * instance.x[i] + l * l * variances[i];
  }
  return risk;
}

ModelSet oracle_model(const ProblemInstance& instance) {
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  std::vector<bool> mask(instance.x.size(), false);
  for (int i = 0; i < instance.n(); ++i)
    mask[i] = instance.x[i] * instance.x[i] >= variances[i];
  return ModelSet::from_mask(mask);
}

FilterVector oracle_filter(const ProblemInstance& instance) {
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  FilterVector f;
  f.lambda.resize(instance.x.size());
  for (int i = 0; i < instance.n(); ++i) {
    const double x2 = instance.x[i] * instance.x[i];
    f.lambda[i] = x2 / (x2 + variances[i]);
  }
  return f;
}

ModelSet exhaustive_oracle_model(const ProblemInstance& instance) {
  const int n = instance.n();
  require(n <= 20, errc::invalid_argument, "exhaustive enumeration is capped at n = 20");
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_bits = 0;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    double risk = 0.0;
    for (int i = 0; i < n; ++i) {
      if (bits & (1u << i))
        risk += variances[i];
      else
        risk += instance.x[i] * instance.x[i];
    }
    if (risk < best) {
      best = risk;
      best_bits = bits;
    }
  }
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) mask[i] = (best_bits & (1u << i)) != 0;
  return ModelSet::from_mask(mask);
}

BoundReport factor_two_check(const ProblemInstance& instance) {
  BoundReport report;
  report.lhs = exact_model_risk(oracle_model(instance), instance).total;
  report.rhs = 2.0 * exact_filter_risk(oracle_filter(instance), instance);
  report.constants = {{"factor", 2.0}};
  report.satisfied = report.lhs <= report.rhs;
  return report;
}

BoundReport oracle_inequality_bound(const ProblemInstance& instance, double beta, double K,
                                    double lhs) {
  require(beta > 0.0, errc::invalid_argument, "beta must be > 0");
  require(K > 0.0, errc::invalid_argument, "K must be > 0");
  const int n = instance.n();
  require(n > 2, errc::invalid_argument, "the oracle inequality assumes n > 2");

  double norm2 = 0.0;
  for (double xi : instance.x) norm2 += xi * xi;
  if (norm2 == 0.0)
    raise(errc::degenerate_signal, "||xdag|| = 0: K2 = 2 + beta log||xdag||^2 is undefined");

  const ModelSet mstar = oracle_model(instance);
  const RiskDecomposition oracle_risk = exact_model_risk(mstar, instance);
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  double oracle_variance = 0.0;
  for (int i : mstar.indices()) oracle_variance += variances[i];

  const double k1 = 12.0 * beta;
  const double k2 = 2.0 + beta * std::log(norm2);
  const double k3 = 2.0 * K * beta;

  BoundReport report;
  report.lhs = lhs;
  report.rhs = oracle_risk.total + (k1 * std::log(static_cast<double>(n)) + k2) * oracle_variance +
               k3 / n;
  report.constants = {{"K1", k1},
                      {"K2", k2},
                      {"K3", k3},
                      {"beta", beta},
                      {"K", K},
                      {"oracle_risk", oracle_risk.total},
                      {"oracle_variance", oracle_variance},
                      {"signal_norm2", norm2}};
  report.satisfied = lhs <= report.rhs;
  return report;
}

CoordinateBounds selection_error_bounds(const ProblemInstance& instance,
                                        const ThresholdParams& params, double K) {
  require(params.n() == instance.n(), errc::dimension_mismatch,
          "threshold params length must equal n");
  require(K > 0.0, errc::invalid_argument, "K must be > 0");
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  CoordinateBounds bounds;
  bounds.selection.resize(variances.size());
  bounds.omission.resize(variances.size());
  for (int i = 0; i < instance.n(); ++i) {
    bounds.selection[i] =
        2.0 * K * params.beta * variances[i] * std::exp(-params.mu[i] / params.beta);
    bounds.omission[i] = variances[i] * (6.0 * params.mu[i] + 2.0);
  }
  return bounds;
}

}  // namespace specfilter
