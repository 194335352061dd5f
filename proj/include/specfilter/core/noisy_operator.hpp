#pragma once

#include <span>
#include <vector>

#include "specfilter/core/oracles.hpp"

namespace specfilter {

// Observed eigenvalues bhat_i = b_i + xi_i with known noise scale s > 0 and
// the exclusion constant alpha (a level at which xi is assumed to put mass on
// both sides; the selector gates on |bhat_i| > alpha s). The known-operator
// case is not a limit of this one: the selector changes shape, so s must be
// positive.
struct NoisySpectrum {
  NoisySpectrum(std::vector<double> bhat_, double s_, double alpha_);

  std::vector<double> bhat;
  double s = 0.0;
  double alpha = 1.0;

  int n() const { return static_cast<int>(bhat.size()); }
};

// Everything the conditional framework holds fixed: the realized eigenvalue
// noise xi, the underlying instance, and the induced noisy spectrum
// (bhat_i = b_i + xi_i exactly).
struct ConditionalContext {
  ConditionalContext(ProblemInstance instance_, std::vector<double> xi_, double s, double alpha);

  ProblemInstance instance;
  std::vector<double> xi;
  NoisySpectrum spectrum;

  int n() const { return instance.n(); }
};

// Claimed tail constants of the eigenvalue noise: the exponential envelope
// P(xi_i^2/s^2 > t) <= K' e^{-t/beta'} and the two-sided mass
// min{P(xi_i < -alpha s), P(xi_i > alpha s)} >= C.
struct TailCertificate2 {
  double Kprime = 1.0;
  double betaprime = 3.0;
  double C = 0.0;
};

// ytilde_i = bhat_i^-1 <y, psi_i>_n
std::vector<double> noisy_sequence(std::span<const double> y, const NoisySpectrum& spectrum,
                                   const SingularSystem& system);

// sigmahat_i^2 = sigma^2 / (n bhat_i^2)
std::vector<double> hat_sigma2(const NoisySpectrum& spectrum, double sigma);

// E_xi(etatilde_i^2) = sigmahat_i^2 + bhat_i^-2 xi_i^2 x_i^2
std::vector<double> conditional_noise_power(const ConditionalContext& ctx);

// m*_xi = {i : x_i^2 > E_xi(etatilde_i^2)}; the defining inequality is
// authoritative, the two explicit forms below are verification views.
ModelSet conditional_oracle(const ConditionalContext& ctx);

// {i : 2|bhat_i| > sigma^2/(n |b_i| x_i^2) + |b_i|}; coordinates with x_i = 0
// are never selected (the quotient is skipped there).
ModelSet conditional_oracle_form1(const ConditionalContext& ctx);

// {i : x_i^2 > sigma^2/(n (bhat_i^2 - xi_i^2)) and |bhat_i| > |b_i|/2}
ModelSet conditional_oracle_form2(const ConditionalContext& ctx);

// nu_i = max{beta log(n^2 sigmahat_i^2), 0}
std::vector<double> noisy_threshold_params(const NoisySpectrum& spectrum, double sigma,
                                           double beta);

// mhat_xi = {i : ytilde_i^2 > 8 sigmahat_i^2 nu_i, |bhat_i| > alpha s};
// strict inequalities throughout, unlike the known-operator selector.
ModelSet noisy_threshold_select(std::span<const double> ytilde, const NoisySpectrum& spectrum,
                                double sigma, double beta);

// Conditional risk of a model fixed given xi: bias sum_{i not in m} x_i^2 plus
// variance sum_{i in m} E_xi(etatilde_i^2).
RiskDecomposition conditional_risk(const ModelSet& m, const ConditionalContext& ctx);

// M = {i : |b_i| < 2 alpha s}
ModelSet m_set(const SingularSystem& system, double alpha, double s);

// rhs of the conditional oracle inequality
//   E_xi||xhat_mhat_xi - xdag||^2 <= (K1' log n + K2') E_xi||xhat_m*_xi - xdag||^2
//                                    + sum_{i in M} x_i^2 + kappa(xi)
// with K1' = max{18 beta, 4 alpha^-2 beta'}, K2' = max{9(beta log||xdag||^2 + 1), 1}
// and kappa(xi) = 4K beta/n + 4 sum_{i not in m*_xi} (xi_i^2 x_i^2 / alpha^2 s^2)
//                 1{xi_i^2 > s^2 beta' log n}.
BoundReport conditional_oracle_inequality_bound(const ConditionalContext& ctx, double beta,
                                                double K, const TailCertificate2& cert,
                                                double lhs);

// Conditional analogues of selection_error_bounds:
// 4 K beta sigmahat_i^2 e^{-nu_i/beta} + 4 xi_i^2 x_i^2/(alpha^2 s^2) on the
// selection excess and
// 9 sigmahat_i^2 nu_i + 8 E_xi(etatilde_i^2) + x_i^2 1{|bhat_i| <= alpha s}
// on the omission error.
CoordinateBounds conditional_selection_error_bounds(const ConditionalContext& ctx,
                                                    std::span<const double> nu, double K,
                                                    double beta);

// xi_i^2 <= s^2 beta' log n + xi_i^2 1{xi_i^2 > s^2 beta' log n}; returns the
// deterministic cap and the per-coordinate exceedance term.
struct TruncationDecomposition {
  double cap = 0.0;                // s^2 beta' log n
  std::vector<double> exceedance;  // xi_i^2 1{xi_i^2 > cap}
};

TruncationDecomposition squared_noise_truncation(std::span<const double> xi, double s,
                                                 double betaprime, int n);

}  // namespace specfilter
