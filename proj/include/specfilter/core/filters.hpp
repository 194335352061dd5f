#pragma once

#include <span>
#include <vector>

#include "specfilter/core/sequence_model.hpp"

namespace specfilter {

// Weight vector lambda defining the filter estimator <xhat(lambda), phi_i> =
// lambda_i * ydag_i.
struct FilterVector {
  std::vector<double> lambda;

  int n() const { return static_cast<int>(lambda.size()); }
};

// A model m subset of {1..n}, stored as sorted unique zero-based indices.
// Applied as the binary filter 1{i in m}. JSON serialization at the CLI
// boundary is one-based, matching the usual indexing of the singular system.
class ModelSet {
public:
  ModelSet() = default;
  ModelSet(std::vector<int> zero_based_indices, int n);
  static ModelSet from_mask(const std::vector<bool>& mask);

  const std::vector<int>& indices() const { return indices_; }
  bool contains(int i) const;
  int count() const { return static_cast<int>(indices_.size()); }
  std::vector<bool> mask(int n) const;

  bool operator==(const ModelSet& other) const { return indices_ == other.indices_; }

private:
  std::vector<int> indices_;
};

// Threshold parameters mu_i = max{beta log(n^2 sigma_i^2), 0}. Natural log:
// the exponential-tail algebra e^{-mu_i/beta} of the noise envelope only cancels
// with ln.
struct ThresholdParams {
  double beta = 0.0;
  std::vector<double> mu;

  int n() const { return static_cast<int>(mu.size()); }
};

std::vector<double> apply_filter(const FilterVector& filter, const SequenceObservation& obs);
std::vector<double> apply_model(const ModelSet& m, const SequenceObservation& obs);

// lambda_i = 1{i <= k}
FilterVector spectral_cutoff(int k, int n);

// lambda_i = (1 + tau sigma_i^2)^-1
FilterVector tikhonov(double tau, std::span<const double> variances);

// Unbiased risk estimation restricted to binary filters: {i : ydag_i^2 >=
// 2 sigma_i^2}, the argmin of ||ydag - xhat_m||^2 + 2 sum_{i in m} sigma_i^2.
ModelSet ure_select(const SequenceObservation& obs);

ThresholdParams threshold_params(std::span<const double> variances, double beta);

// mhat = {i : ydag_i^2 >= 4 sigma_i^2 mu_i}; inclusive at the boundary, and
// every coordinate with mu_i = 0 is selected.
ModelSet threshold_select(const SequenceObservation& obs, const ThresholdParams& params);

// BIC-type penalized criterion ||ydag - x||^2 + 4 sum_i sigma_i^2 mu_i 1{x_i != 0}
// whose global minimizer is the hard-threshold estimator.
double penalized_criterion(std::span<const double> candidate, const SequenceObservation& obs,
                           const ThresholdParams& params);

}  // namespace specfilter
