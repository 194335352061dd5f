#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specfilter/core/noisy_operator.hpp"
#include "specfilter/core/rng.hpp"

namespace specfilter {

enum class NoiseFamily { gaussian, laplace, uniform_symmetric };

NoiseFamily parse_noise_family(const std::string& name);
const char* noise_family_name(NoiseFamily family);

// Claimed tail envelope P(gamma_i > t) <= K e^{-t/beta} for the normalized
// squared noise gamma_i = eta_i^2 / sigma_i^2.
struct TailCertificate1 {
  double K = 0.0;
  double beta = 3.0;
};

// A noise law together with the tail certificate claimed for it. `scale` is
// the standard deviation for every family (uniform-symmetric draws live on
// [-sqrt(3) scale, sqrt(3) scale] so that the variance is scale^2).
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double scale = 1.0;
  TailCertificate1 certificate;
};

// Per-family defaults. The Gaussian envelope constant is K = sqrt(1 - 2/beta),
// admissible only for beta > 2; note that a Chernoff argument gives the
// reciprocal (1 - 2/beta)^{-1/2}, so the certificate is checked on the grid
// rather than trusted.
TailCertificate1 default_certificate1(NoiseFamily family, double beta);
TailCertificate2 default_certificate2(NoiseFamily family, double betaprime, double alpha);

// n i.i.d. centered draws with variance scale^2, deterministic given the
// stream state.
std::vector<double> draw_noise(const NoiseSpec& spec, int n, RandomStream& stream);

struct TailGridPoint {
  double t = 0.0;
  double empirical = 0.0;  // survival frequency of z^2 at t
  double envelope = 0.0;   // K e^{-t/beta}
  double slack = 0.0;      // 3 binomial standard errors
  bool ok = false;
};

struct TailReport {
  std::vector<TailGridPoint> grid;
  bool envelope_ok = false;
  // two-sided mass check, run when claimed_C > 0
  bool mass_checked = false;
  double alpha = 0.0;
  double claimed_C = 0.0;
  double lower_tail_freq = 0.0;  // P(z < -alpha)
  double upper_tail_freq = 0.0;  // P(z > alpha)
  bool mass_ok = true;
  bool satisfied = false;
  long samples = 0;
};

// Empirical check of the exponential envelope on a fixed grid of t values
// (configurable), plus the two-sided mass check when claimed_C > 0. Draws are
// normalized to z = noise/scale, so the outcome is scale-free. An inadmissible
// claim (Gaussian with beta <= 2) is an error; an empirically violated one is
// reported, not thrown.
TailReport verify_tail_certificate(const NoiseSpec& spec, long samples, std::uint64_t seed,
                                   double alpha = 0.0, double claimed_C = 0.0,
                                   const std::vector<double>& grid = {0.5, 1, 2, 4, 8, 16});

struct RiskEstimate {
  double mean = 0.0;
  double stderr_of_mean = 0.0;  // sample sd / sqrt(replications)
  long replications = 0;
  std::uint64_t seed = 0;
};

struct VectorEstimate {
  std::vector<double> mean;
  std::vector<double> stderr_of_mean;
  long replications = 0;
};

// Effective worker count: `requested` (0 = hardware), capped by the
// SPECFILTER_THREADS environment variable and by the replication count.
int resolve_threads(int requested, long replications);

// Runs `kernel(rep, out)` for rep = 0..replications-1, possibly across
// threads, and reduces per-component mean and standard error with a fixed
// pairwise order. Results are bitwise independent of the thread count: every
// replication owns its slice of one value array, and the reduction only sees
// the completed array.
VectorEstimate mc_vector_mean(long replications, int width, int threads,
                              const std::function<void(long, std::span<double>)>& kernel);

struct XiConfig {
  NoiseSpec noise;                            // xi law; scale = s
  double alpha = 1.0;
  TailCertificate2 certificate;               // envelope and mass constants for xi
  bool conditional = true;                    // one xi per experiment vs per replication
  std::optional<std::vector<double>> values;  // explicit realized xi
};

struct McConfig {
  long replications = 10000;
  std::uint64_t seed = 0;
  int threads = 0;
  NoiseSpec noise;  // epsilon law; scale is bound to instance.sigma at run time
  double beta = 3.0;
  double alpha = 1.0;
  std::optional<XiConfig> xi;
};

struct EstimatorSpec {
  enum class Kind {
    cutoff,
    tikhonov,
    ure,
    threshold,
    noisy_threshold,
    oracle_model,
    oracle_filter,
    conditional_oracle,
  };
  Kind kind = Kind::ure;
  std::vector<double> args;
  std::string id;

  bool needs_xi() const {
    return kind == Kind::noisy_threshold || kind == Kind::conditional_oracle;
  }
};

// Grammar: name or name(arg[,arg]), e.g. "cutoff(3)", "tikhonov(1.5)",
// "threshold(3)", "noisy-threshold(3,1)", "ure", "oracle-model",
// "oracle-filter", "conditional-oracle".
EstimatorSpec parse_estimator(const std::string& id);

// The realized xi of a conditional experiment: explicit values if configured,
// otherwise one draw from the xi stream of the given seed.
std::vector<double> realize_xi(const XiConfig& xi, int n, std::uint64_t seed);

// Monte Carlo estimate of the sequence-space risk E sum_i (xhat_i - x_i)^2 of
// an estimator. For conditional (noisy-operator) runs the realized xi is held
// fixed across the epsilon replications; with xi.conditional = false a fresh
// xi is drawn per replication.
RiskEstimate estimate_risk(const std::string& estimator_id, const ProblemInstance& instance,
                           const McConfig& config);

}  // namespace specfilter
