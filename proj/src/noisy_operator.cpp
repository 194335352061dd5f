#include "specfilter/core/noisy_operator.hpp"

#include <cmath>

namespace specfilter {

NoisySpectrum::NoisySpectrum(std::vector<double> bhat_, double s_, double alpha_)
    : bhat(std::move(bhat_)), s(s_), alpha(alpha_) {
  require(s > 0.0 && std::isfinite(s), errc::invalid_argument,
          "eigenvalue noise scale s must be > 0");
  require(alpha > 0.0 && std::isfinite(alpha), errc::invalid_argument, "alpha must be > 0");
  for (double b : bhat)
    if (b == 0.0) raise(errc::zero_observed_eigenvalue, "observed eigenvalue bhat_i = 0");
}

ConditionalContext::ConditionalContext(ProblemInstance instance_, std::vector<double> xi_,
                                       double s, double alpha)
    : instance(std::move(instance_)),
      xi(std::move(xi_)),
      spectrum(
          [&] {
            require(xi.size() == static_cast<std::size_t>(instance.n()), errc::dimension_mismatch,
                    "xi length must equal n");
            std::vector<double> bhat(xi.size());
            for (std::size_t i = 0; i < xi.size(); ++i)
              bhat[i] = instance.system.spectrum()[i] + xi[i];
            return bhat;
          }(),
          s, alpha) {}

std::vector<double> noisy_sequence(std::span<const double> y, const NoisySpectrum& spectrum,
                                   const SingularSystem& system) {
  require(spectrum.n() == system.n(), errc::dimension_mismatch,
          "noisy spectrum length must equal n");
  std::vector<double> out = system.image_coefficients(y);
  for (int i = 0; i < spectrum.n(); ++i) out[i] /= spectrum.bhat[i];
  return out;
}

std::vector<double> hat_sigma2(const NoisySpectrum& spectrum, double sigma) {
  require(sigma > 0.0, errc::invalid_argument, "sigma must be > 0");
  const int n = spectrum.n();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double b = spectrum.bhat[i];
    out[i] = sigma * sigma / (n * b * b);
  }
  return out;
}

std::vector<double> conditional_noise_power(const ConditionalContext& ctx) {
  std::vector<double> out = hat_sigma2(ctx.spectrum, ctx.instance.sigma);
  for (int i = 0; i < ctx.n(); ++i) {
    const double bhat = ctx.spectrum.bhat[i];
    const double xx = ctx.instance.x[i] * ctx.instance.x[i];
    out[i] += ctx.xi[i] * ctx.xi[i] * xx / (bhat * bhat);
  }
  return out;
}

ModelSet conditional_oracle(const ConditionalContext& ctx) {
  const std::vector<double> power = conditional_noise_power(ctx);
  std::vector<bool> mask(power.size(), false);
  for (int i = 0; i < ctx.n(); ++i)
    mask[i] = ctx.instance.x[i] * ctx.instance.x[i] > power[i];
  return ModelSet::from_mask(mask);
}

ModelSet conditional_oracle_form1(const ConditionalContext& ctx) {
  const int n = ctx.n();
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const double x2 = ctx.instance.x[i] * ctx.instance.x[i];
    if (x2 == 0.0) continue;  // never selected, the quotient is undefined
    const double b = ctx.instance.system.spectrum()[i];
    const double abs_b = std::abs(b);
    // |bhat_i| in the display reads as bhat_i sgn(b_i): both agree whenever
    // bhat_i and b_i share a sign, and a sign-flipped bhat_i is never in the
    // oracle (the conditional noise power exceeds x_i^2 there).
    const double projected = b > 0.0 ? ctx.spectrum.bhat[i] : -ctx.spectrum.bhat[i];
    const double sigma2 = ctx.instance.sigma * ctx.instance.sigma;
    mask[i] = 2.0 * projected > sigma2 / (n * abs_b * x2) + abs_b;
  }
  return ModelSet::from_mask(mask);
}

ModelSet conditional_oracle_form2(const ConditionalContext& ctx) {
  const int n = ctx.n();
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const double bhat = ctx.spectrum.bhat[i];
    // bhat_i^2 - xi_i^2 > 0 is the display's implicit domain; multiplied out
    // so that a negative gap reads as "not selected" rather than as a
    // comparison against a negative quotient.
    const double gap = bhat * bhat - ctx.xi[i] * ctx.xi[i];
    const double x2 = ctx.instance.x[i] * ctx.instance.x[i];
    const double sigma2 = ctx.instance.sigma * ctx.instance.sigma;
    mask[i] = gap > 0.0 && x2 * (n * gap) > sigma2 &&
              std::abs(bhat) > std::abs(ctx.instance.system.spectrum()[i]) / 2.0;
  }
  return ModelSet::from_mask(mask);
}

std::vector<double> noisy_threshold_params(const NoisySpectrum& spectrum, double sigma,
                                           double beta) {
  require(beta > 0.0, errc::invalid_argument, "beta must be > 0");
  const std::vector<double> s2 = hat_sigma2(spectrum, sigma);
  std::vector<double> nu(s2.size());
  const double n2 = static_cast<double>(s2.size()) * static_cast<double>(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i)
    nu[i] = std::max(beta * std::log(n2 * s2[i]), 0.0);
  return nu;
}

ModelSet noisy_threshold_select(std::span<const double> ytilde, const NoisySpectrum& spectrum,
                                double sigma, double beta) {
  require(static_cast<int>(ytilde.size()) == spectrum.n(), errc::dimension_mismatch,
          "ytilde length must equal n");
  const std::vector<double> s2 = hat_sigma2(spectrum, sigma);
  const std::vector<double> nu = noisy_threshold_params(spectrum, sigma, beta);
  const double gate = spectrum.alpha * spectrum.s;
  std::vector<bool> mask(ytilde.size(), false);
  for (int i = 0; i < spectrum.n(); ++i)
    mask[i] = ytilde[i] * ytilde[i] > 8.0 * s2[i] * nu[i] && std::abs(spectrum.bhat[i]) > gate;
  return ModelSet::from_mask(mask);
}

RiskDecomposition conditional_risk(const ModelSet& m, const ConditionalContext& ctx) {
  const std::vector<bool> mask = m.mask(ctx.n());
  const std::vector<double> power = conditional_noise_power(ctx);
  RiskDecomposition risk;
  for (int i = 0; i < ctx.n(); ++i) {
    if (mask[i])
      risk.variance += power[i];
    else
      risk.bias += ctx.instance.x[i] * ctx.instance.x[i];
  }
  risk.total = risk.bias + risk.variance;
  return risk;
}

ModelSet m_set(const SingularSystem& system, double alpha, double s) {
  require(alpha > 0.0 && s > 0.0, errc::invalid_argument, "alpha and s must be > 0");
  std::vector<bool> mask(static_cast<std::size_t>(system.n()), false);
  for (int i = 0; i < system.n(); ++i)
    mask[i] = std::abs(system.spectrum()[i]) < 2.0 * alpha * s;
  return ModelSet::from_mask(mask);
}

BoundReport conditional_oracle_inequality_bound(const ConditionalContext& ctx, double beta,
                                                double K, const TailCertificate2& cert,
                                                double lhs) {
  require(beta > 0.0 && K > 0.0, errc::invalid_argument, "beta and K must be > 0");
  require(cert.Kprime > 0.0 && cert.betaprime > 0.0, errc::invalid_argument,
          "certificate constants must be > 0");
  const int n = ctx.n();
  require(n > 2, errc::invalid_argument, "the oracle inequality assumes n > 2");

  double norm2 = 0.0;
  for (double xi : ctx.instance.x) norm2 += xi * xi;
  if (norm2 == 0.0)
    raise(errc::degenerate_signal, "||xdag|| = 0: K2' involves log||xdag||^2");

  const double alpha = ctx.spectrum.alpha;
  const double s = ctx.spectrum.s;
  const ModelSet mstar = conditional_oracle(ctx);
  const double oracle_risk = conditional_risk(mstar, ctx).total;

  double m_term = 0.0;
  const ModelSet small_eigenvalues = m_set(ctx.instance.system, alpha, s);
  for (int i : small_eigenvalues.indices())
    m_term += ctx.instance.x[i] * ctx.instance.x[i];

  const double trunc = s * s * cert.betaprime * std::log(static_cast<double>(n));
  double kappa = 4.0 * K * beta / n;
  const std::vector<bool> oracle_mask = mstar.mask(n);
  for (int i = 0; i < n; ++i) {
    const double xi2 = ctx.xi[i] * ctx.xi[i];
    if (!oracle_mask[i] && xi2 > trunc)
      kappa += 4.0 * xi2 * ctx.instance.x[i] * ctx.instance.x[i] / (alpha * alpha * s * s);
  }

  const double k1p = std::max(18.0 * beta, 4.0 * cert.betaprime / (alpha * alpha));
  const double k2p = std::max(9.0 * (beta * std::log(norm2) + 1.0), 1.0);

  BoundReport report;
  report.lhs = lhs;
  report.rhs = (k1p * std::log(static_cast<double>(n)) + k2p) * oracle_risk + m_term + kappa;
  report.constants = {{"K1p", k1p},
                      {"K2p", k2p},
                      {"beta", beta},
                      {"beta_prime", cert.betaprime},
                      {"K", K},
                      {"alpha", alpha},
                      {"s", s},
                      {"kappa", kappa},
                      {"conditional_oracle_risk", oracle_risk},
                      {"m_set_term", m_term},
                      {"signal_norm2", norm2}};
  report.satisfied = lhs <= report.rhs;
  return report;
}

CoordinateBounds conditional_selection_error_bounds(const ConditionalContext& ctx,
                                                    std::span<const double> nu, double K,
                                                    double beta) {
  require(static_cast<int>(nu.size()) == ctx.n(), errc::dimension_mismatch,
          "nu length must equal n");
  require(K > 0.0 && beta > 0.0, errc::invalid_argument, "K and beta must be > 0");
  const std::vector<double> s2 = hat_sigma2(ctx.spectrum, ctx.instance.sigma);
  const std::vector<double> power = conditional_noise_power(ctx);
  const double alpha = ctx.spectrum.alpha;
  const double s = ctx.spectrum.s;
  CoordinateBounds bounds;
  bounds.selection.resize(s2.size());
  bounds.omission.resize(s2.size());
  for (int i = 0; i < ctx.n(); ++i) {
    const double x2 = ctx.instance.x[i] * ctx.instance.x[i];
    bounds.selection[i] = 4.0 * K * beta * s2[i] * std::exp(-nu[i] / beta) +
                          4.0 * ctx.xi[i] * ctx.xi[i] * x2 / (alpha * alpha * s * s);
    bounds.omission[i] = 9.0 * s2[i] * nu[i] + 8.0 * power[i] +
                         (std::abs(ctx.spectrum.bhat[i]) <= alpha * s ? x2 : 0.0);
  }
  return bounds;
}

TruncationDecomposition squared_noise_truncation(std::span<const double> xi, double s,
                                                 double betaprime, int n) {
  require(s > 0.0 && betaprime > 0.0, errc::invalid_argument, "s and beta' must be > 0");
  require(n >= 1, errc::invalid_argument, "n must be >= 1");
  TruncationDecomposition out;
  out.cap = s * s * betaprime * std::log(static_cast<double>(n));
  out.exceedance.resize(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double v = xi[i] * xi[i];
    out.exceedance[i] = v > out.cap ? v : 0.0;
  }
  return out;
}

}  // namespace specfilter
