#pragma once

#include <string>
#include <utility>
#include <vector>

#include "specfilter/core/filters.hpp"
#include "specfilter/core/sequence_model.hpp"

namespace specfilter {

// Bias-variance decomposition of E||xhat_m - xdag||^2 for a deterministic
// model m. The ambient term E||x_0 - xdag||^2 is constant across estimators
// and excluded throughout.
struct RiskDecomposition {
  double bias = 0.0;      // sum_{i not in m} x_i^2
  double variance = 0.0;  // sum_{i in m} sigma_i^2
  double total = 0.0;     // bias + variance
};

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<std::pair<std::string, double>> constants;
  bool satisfied = false;
};

// Per-coordinate pair of selection-excess and omission bounds, the targets of
// the Monte Carlo certification.
struct CoordinateBounds {
  std::vector<double> selection;  // bound on E((eta_i^2 - x_i^2) 1{i in mhat})
  std::vector<double> omission;   // bound on E((x_i^2 - eta_i^2) 1{i not in mhat})
};

RiskDecomposition exact_model_risk(const ModelSet& m, const ProblemInstance& instance);

// sum_i (1-lambda_i)^2 x_i^2 + lambda_i^2 sigma_i^2; equals
// exact_model_risk(...).total for binary lambda.
double exact_filter_risk(const FilterVector& filter, const ProblemInstance& instance);

// m* = {i : x_i^2 >= sigma_i^2}, the risk minimizer over all 2^n models.
ModelSet oracle_model(const ProblemInstance& instance);

// lambda*_i = x_i^2 / (x_i^2 + sigma_i^2), the risk minimizer over all of R^n.
FilterVector oracle_filter(const ProblemInstance& instance);

// Literal enumeration of all 2^n models; verification twin of oracle_model.
// Refused above n = 20.
ModelSet exhaustive_oracle_model(const ProblemInstance& instance);

// Risk of m* against twice the risk of lambda*; satisfied for every instance,
// with equality approached as x_i^2 -> sigma_i^2.
BoundReport factor_two_check(const ProblemInstance& instance);

// rhs of the oracle inequality
//   E||xhat_mhat - xdag||^2 <= E||xhat_m* - xdag||^2
//                              + (K1 log n + K2) sum_{i in m*} sigma_i^2 + K3/n
// with K1 = 12 beta, K2 = 2 + beta log||xdag||^2, K3 = 2 K beta. The lhs is a
// Monte Carlo estimate supplied by the caller.
BoundReport oracle_inequality_bound(const ProblemInstance& instance, double beta, double K,
                                    double lhs);

// Per-coordinate bounds 2 K beta sigma_i^2 e^{-mu_i/beta} on the selection
// excess E((eta_i^2 - x_i^2) 1{i in mhat}) and sigma_i^2 (6 mu_i + 2) on the
// omission error E((x_i^2 - eta_i^2) 1{i not in mhat}).
CoordinateBounds selection_error_bounds(const ProblemInstance& instance,
                                        const ThresholdParams& params, double K);

}  // namespace specfilter
