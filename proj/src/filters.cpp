#include "specfilter/core/filters.hpp"

#include <algorithm>
#include <cmath>

namespace specfilter {

ModelSet::ModelSet(std::vector<int> zero_based_indices, int n)
    : indices_(std::move(zero_based_indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  for (int i : indices_)
    require(i >= 0 && i < n, errc::invalid_argument, "model index out of range");
}

ModelSet ModelSet::from_mask(const std::vector<bool>& mask) {
  ModelSet m;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) m.indices_.push_back(static_cast<int>(i));
  return m;
}

bool ModelSet::contains(int i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

std::vector<bool> ModelSet::mask(int n) const {
  std::vector<bool> out(static_cast<std::size_t>(n), false);
  for (int i : indices_) {
    require(i < n, errc::dimension_mismatch, "model index exceeds dimension");
    out[i] = true;
  }
  return out;
}

std::vector<double> apply_filter(const FilterVector& filter, const SequenceObservation& obs) {
  require(filter.n() == obs.n(), errc::dimension_mismatch, "filter length must equal n");
  std::vector<double> out(obs.ydag.size());
  for (int i = 0; i < obs.n(); ++i) out[i] = filter.lambda[i] * obs.ydag[i];
  return out;
}

std::vector<double> apply_model(const ModelSet& m, const SequenceObservation& obs) {
  std::vector<double> out(obs.ydag.size(), 0.0);
  for (int i : m.indices()) {
    require(i < obs.n(), errc::dimension_mismatch, "model index exceeds dimension");
    out[i] = obs.ydag[i];
  }
  return out;
}

FilterVector spectral_cutoff(int k, int n) {
  require(n >= 0, errc::invalid_argument, "n must be >= 0");
  require(k >= 0 && k <= n, errc::invalid_argument, "cut-off k must lie in [0, n]");
  FilterVector f;
  f.lambda.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < k; ++i) f.lambda[i] = 1.0;
  return f;
}

FilterVector tikhonov(double tau, std::span<const double> variances) {
  require(tau >= 0.0 && std::isfinite(tau), errc::invalid_argument, "tau must be >= 0");
  FilterVector f;
  f.lambda.resize(variances.size());
  for (std::size_t i = 0; i < variances.size(); ++i) f.lambda[i] = 1.0 / (1.0 + tau * variances[i]);
  return f;
}

ModelSet ure_select(const SequenceObservation& obs) {
  std::vector<bool> mask(obs.ydag.size(), false);
  for (int i = 0; i < obs.n(); ++i)
    mask[i] = obs.ydag[i] * obs.ydag[i] >= 2.0 * obs.variances[i];
  return ModelSet::from_mask(mask);
}

ThresholdParams threshold_params(std::span<const double> variances, double beta) {
  require(beta > 0.0 && std::isfinite(beta), errc::invalid_argument, "beta must be > 0");
  ThresholdParams p;
  p.beta = beta;
  p.mu.resize(variances.size());
  const double n2 = static_cast<double>(variances.size()) * static_cast<double>(variances.size());
  for (std::size_t i = 0; i < variances.size(); ++i) {
    require(variances[i] > 0.0, errc::invalid_argument, "variances must be positive");
    p.mu[i] = std::max(beta * std::log(n2 * variances[i]), 0.0);
  }
  return p;
}

ModelSet threshold_select(const SequenceObservation& obs, const ThresholdParams& params) {
  require(params.n() == obs.n(), errc::dimension_mismatch, "threshold params length must equal n");
  std::vector<bool> mask(obs.ydag.size(), false);
  for (int i = 0; i < obs.n(); ++i)
    mask[i] = obs.ydag[i] * obs.ydag[i] >= 4.0 * obs.variances[i] * params.mu[i];
  return ModelSet::from_mask(mask);
}

double penalized_criterion(std::span<const double> candidate, const SequenceObservation& obs,
                           const ThresholdParams& params) {
  require(static_cast<int>(candidate.size()) == obs.n(), errc::dimension_mismatch,
          "candidate length must equal n");
  require(params.n() == obs.n(), errc::dimension_mismatch, "threshold params length must equal n");
  double value = 0.0;
  for (int i = 0; i < obs.n(); ++i) {
    const double r = obs.ydag[i] - candidate[i];
    value += r * r;
    if (candidate[i] != 0.0) value += 4.0 * obs.variances[i] * params.mu[i];
  }
  return value;
}

}  // namespace specfilter
