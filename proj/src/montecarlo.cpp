#include "specfilter/core/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace specfilter {

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "laplace") return NoiseFamily::laplace;
  if (name == "uniform-symmetric") return NoiseFamily::uniform_symmetric;
  raise(errc::unknown_family, "unknown noise family '" + name + "'");
}

const char* noise_family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::uniform_symmetric: return "uniform-symmetric";
  }
  return "?";
}

TailCertificate1 default_certificate1(NoiseFamily family, double beta) {
  require(beta > 0.0, errc::invalid_argument, "beta must be > 0");
  TailCertificate1 cert;
  cert.beta = beta;
  switch (family) {
    case NoiseFamily::gaussian:
      require(beta > 2.0, errc::certificate_violated,
              "Gaussian tails admit no exponential envelope with beta <= 2");
      cert.K = std::sqrt(1.0 - 2.0 / beta);
      break;
    case NoiseFamily::laplace:
      cert.K = 2.0;
      break;
    case NoiseFamily::uniform_symmetric:
      cert.K = 1.0;
      break;
  }
  return cert;
}

TailCertificate2 default_certificate2(NoiseFamily family, double betaprime, double alpha) {
  require(betaprime > 0.0 && alpha > 0.0, errc::invalid_argument,
          "beta' and alpha must be > 0");
  TailCertificate2 cert;
  cert.betaprime = betaprime;
  switch (family) {
    case NoiseFamily::gaussian:
      require(betaprime > 2.0, errc::certificate_violated,
              "Gaussian tails admit no exponential envelope with beta' <= 2");
      // Chernoff constant; valid for every t, unlike the sqrt(1 - 2/beta') form.
      cert.Kprime = 1.0 / std::sqrt(1.0 - 2.0 / betaprime);
      cert.C = 0.5 * std::erfc(alpha / std::sqrt(2.0));
      break;
    case NoiseFamily::laplace:
      cert.Kprime = 2.0;
      cert.C = 0.5 * std::exp(-std::sqrt(2.0) * alpha);
      break;
    case NoiseFamily::uniform_symmetric:
      cert.Kprime = 1.0;
      cert.C = std::max(0.0, (std::sqrt(3.0) - alpha) / (2.0 * std::sqrt(3.0)));
      break;
  }
  return cert;
}

std::vector<double> draw_noise(const NoiseSpec& spec, int n, RandomStream& stream) {
  require(n >= 0, errc::invalid_argument, "n must be >= 0");
  require(spec.scale > 0.0 && std::isfinite(spec.scale), errc::invalid_argument,
          "noise scale must be > 0");
  std::vector<double> out(static_cast<std::size_t>(n));
  switch (spec.family) {
    case NoiseFamily::gaussian:
      for (auto& v : out) v = spec.scale * stream.next_gaussian();
      break;
    case NoiseFamily::laplace: {
      const double b = spec.scale / std::sqrt(2.0);
      for (auto& v : out) {
        const double e = -std::log(stream.next_uniform_open());
        const bool negative = (stream.next_u64() & 1u) != 0;
        v = negative ? -b * e : b * e;
      }
      break;
    }
    case NoiseFamily::uniform_symmetric: {
      const double half_width = spec.scale * std::sqrt(3.0);
      for (auto& v : out) v = half_width * (2.0 * stream.next_uniform() - 1.0);
      break;
    }
  }
  return out;
}

TailReport verify_tail_certificate(const NoiseSpec& spec, long samples, std::uint64_t seed,
                                   double alpha, double claimed_C,
                                   const std::vector<double>& grid) {
  require(samples >= 10000, errc::invalid_argument, "tail certification needs >= 10^4 samples");
  require(!grid.empty(), errc::invalid_argument, "grid must be non-empty");
  if (spec.family == NoiseFamily::gaussian && spec.certificate.beta <= 2.0)
    raise(errc::certificate_violated,
          "Gaussian tails admit no exponential certificate with beta <= 2");
  require(spec.certificate.K > 0.0 && spec.certificate.beta > 0.0, errc::invalid_argument,
          "certificate constants must be > 0");

  RandomStream stream = make_stream(seed, StreamPurpose::tail_cert, 0);
  std::vector<long> exceed(grid.size(), 0);
  long below = 0, above = 0;
  for (long k = 0; k < samples; ++k) {
    const double z = draw_noise(spec, 1, stream)[0] / spec.scale;
    const double z2 = z * z;
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (z2 > grid[g]) ++exceed[g];
    if (z < -alpha) ++below;
    if (z > alpha) ++above;
  }

  TailReport report;
  report.samples = samples;
  report.envelope_ok = true;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TailGridPoint point;
    point.t = grid[g];
    point.empirical = static_cast<double>(exceed[g]) / samples;
    point.envelope = spec.certificate.K * std::exp(-grid[g] / spec.certificate.beta);
    point.slack = 3.0 * std::sqrt(point.empirical * (1.0 - point.empirical) / samples);
    point.ok = point.empirical <= point.envelope + point.slack;
    report.envelope_ok = report.envelope_ok && point.ok;
    report.grid.push_back(point);
  }

  report.alpha = alpha;
  report.claimed_C = claimed_C;
  if (claimed_C > 0.0) {
    report.mass_checked = true;
    report.lower_tail_freq = static_cast<double>(below) / samples;
    report.upper_tail_freq = static_cast<double>(above) / samples;
    const double slack = 3.0 * std::sqrt(claimed_C * (1.0 - claimed_C) / samples);
    report.mass_ok = std::min(report.lower_tail_freq, report.upper_tail_freq) >= claimed_C - slack;
  }
  report.satisfied = report.envelope_ok && report.mass_ok;
  return report;
}

int resolve_threads(int requested, long replications) {
  int threads = requested;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  if (const char* env = std::getenv("SPECFILTER_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads, cap);
  }
  if (replications < threads) threads = static_cast<int>(std::max<long>(replications, 1));
  return threads;
}

namespace {

double pairwise_centered_square_sum(std::span<const double> values, double center) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double acc = 0.0;
    for (double v : values) {
      const double d = v - center;
      acc += d * d;
    }
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_centered_square_sum(values.first(half), center) +
         pairwise_centered_square_sum(values.subspan(half), center);
}

}  // namespace

VectorEstimate mc_vector_mean(long replications, int width, int threads,
                              const std::function<void(long, std::span<double>)>& kernel) {
  require(replications >= 2, errc::invalid_argument, "need at least 2 replications");
  require(width >= 1, errc::invalid_argument, "statistic width must be >= 1");

  // column-major: component c occupies a contiguous run of `replications`
  std::vector<double> values(static_cast<std::size_t>(replications) * width);
  const auto worker = [&](long lo, long hi) {
    std::vector<double> row(static_cast<std::size_t>(width));
    for (long rep = lo; rep < hi; ++rep) {
      kernel(rep, row);
      for (int c = 0; c < width; ++c)
        values[static_cast<std::size_t>(c) * replications + rep] = row[c];
    }
  };

  const int workers = resolve_threads(threads, replications);
  if (workers <= 1) {
    worker(0, replications);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const long chunk = (replications + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long lo = w * chunk;
      const long hi = std::min(replications, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  VectorEstimate estimate;
  estimate.replications = replications;
  estimate.mean.resize(width);
  estimate.stderr_of_mean.resize(width);
  for (int c = 0; c < width; ++c) {
    const std::span<const double> column(values.data() + static_cast<std::size_t>(c) * replications,
                                         static_cast<std::size_t>(replications));
    const double mean = pairwise_sum(column) / replications;
    const double ss = pairwise_centered_square_sum(column, mean);
    estimate.mean[c] = mean;
    estimate.stderr_of_mean[c] = std::sqrt(ss / (replications - 1)) / std::sqrt(replications);
  }
  return estimate;
}

EstimatorSpec parse_estimator(const std::string& id) {
  EstimatorSpec spec;
  spec.id = id;
  std::string name = id;
  const auto open = id.find('(');
  if (open != std::string::npos) {
    require(id.back() == ')', errc::unknown_estimator, "malformed estimator '" + id + "'");
    name = id.substr(0, open);
    std::string args = id.substr(open + 1, id.size() - open - 2);
    std::size_t pos = 0;
    while (pos <= args.size() && !args.empty()) {
      const auto comma = args.find(',', pos);
      const std::string tok =
          args.substr(pos, comma == std::string::npos ? args.npos : comma - pos);
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        require(used == tok.size(), errc::unknown_estimator,
                "bad estimator argument '" + tok + "'");
        spec.args.push_back(v);
      } catch (const Error&) {
        throw;
      } catch (const std::exception&) {
        raise(errc::unknown_estimator, "bad estimator argument '" + tok + "' in '" + id + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  using Kind = EstimatorSpec::Kind;
  const auto expect_args = [&](std::size_t lo, std::size_t hi) {
    require(spec.args.size() >= lo && spec.args.size() <= hi, errc::unknown_estimator,
            "wrong argument count for estimator '" + id + "'");
  };
  if (name == "cutoff") {
    spec.kind = Kind::cutoff;
    expect_args(1, 1);
  } else if (name == "tikhonov") {
    spec.kind = Kind::tikhonov;
    expect_args(1, 1);
  } else if (name == "ure") {
    spec.kind = Kind::ure;
    expect_args(0, 0);
  } else if (name == "threshold") {
    spec.kind = Kind::threshold;
    expect_args(0, 1);
  } else if (name == "noisy-threshold") {
    spec.kind = Kind::noisy_threshold;
    expect_args(0, 2);
  } else if (name == "oracle-model") {
    spec.kind = Kind::oracle_model;
    expect_args(0, 0);
  } else if (name == "oracle-filter") {
    spec.kind = Kind::oracle_filter;
    expect_args(0, 0);
  } else if (name == "conditional-oracle") {
    spec.kind = Kind::conditional_oracle;
    expect_args(0, 0);
  } else {
    raise(errc::unknown_estimator, "unknown estimator '" + id + "'");
  }
  return spec;
}

std::vector<double> realize_xi(const XiConfig& xi, int n, std::uint64_t seed) {
  if (xi.values) {
    require(static_cast<int>(xi.values->size()) == n, errc::dimension_mismatch,
            "explicit xi length must equal n");
    return *xi.values;
  }
  RandomStream stream = make_stream(seed, StreamPurpose::xi, 0);
  return draw_noise(xi.noise, n, stream);
}

namespace {

struct Prepared {
  EstimatorSpec spec;
  // known-operator estimators
  std::vector<double> lambda;  // fixed filter weights when non-empty
  bool use_ure = false;
  bool use_threshold = false;
  ThresholdParams params;
  // noisy-operator estimators
  bool noisy = false;
  double beta = 3.0;
  double alpha = 1.0;
};

Prepared prepare(const EstimatorSpec& spec, const ProblemInstance& instance,
                 const McConfig& config, const std::vector<double>& variances) {
  using Kind = EstimatorSpec::Kind;
  Prepared p;
  p.spec = spec;
  switch (spec.kind) {
    case Kind::cutoff: {
      const double karg = spec.args[0];
      const int k = static_cast<int>(karg);
      require(static_cast<double>(k) == karg, errc::unknown_estimator,
              "cutoff level must be an integer");
      p.lambda = spectral_cutoff(k, instance.n()).lambda;
      break;
    }
    case Kind::tikhonov:
      p.lambda = tikhonov(spec.args[0], variances).lambda;
      break;
    case Kind::ure:
      p.use_ure = true;
      break;
    case Kind::threshold:
      p.use_threshold = true;
      p.params = threshold_params(variances, spec.args.empty() ? config.beta : spec.args[0]);
      break;
    case Kind::oracle_model: {
      const std::vector<bool> mask = oracle_model(instance).mask(instance.n());
      p.lambda.assign(mask.size(), 0.0);
      for (std::size_t i = 0; i < mask.size(); ++i) p.lambda[i] = mask[i] ? 1.0 : 0.0;
      break;
    }
    case Kind::oracle_filter:
      p.lambda = oracle_filter(instance).lambda;
      break;
    case Kind::noisy_threshold:
      p.noisy = true;
      p.beta = spec.args.empty() ? config.beta : spec.args[0];
      p.alpha = spec.args.size() > 1 ? spec.args[1] : config.alpha;
      break;
    case Kind::conditional_oracle:
      p.noisy = true;
      break;
  }
  return p;
}

double squared_error(std::span<const double> estimate, std::span<const double> truth) {
  double err = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    err += d * d;
  }
  return err;
}

}  // namespace

RiskEstimate estimate_risk(const std::string& estimator_id, const ProblemInstance& instance,
                           const McConfig& config) {
  const EstimatorSpec spec = parse_estimator(estimator_id);
  const int n = instance.n();
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  const Prepared prep = prepare(spec, instance, config, variances);

  NoiseSpec unit_eps = config.noise;
  unit_eps.scale = 1.0;
  std::vector<double> sigma_i(n);
  for (int i = 0; i < n; ++i) sigma_i[i] = std::sqrt(variances[i]);
  const double ambient_scale = instance.sigma / std::sqrt(static_cast<double>(n));

  // conditional-run state must outlive the kernel, which runs after this block
  std::optional<ConditionalContext> fixed_ctx;
  std::optional<ModelSet> fixed_oracle;

  std::function<void(long, std::span<double>)> kernel;

  if (!prep.noisy) {
    kernel = [&, prep](long rep, std::span<double> out) {
      RandomStream stream = make_stream(config.seed, StreamPurpose::epsilon, rep);
      const std::vector<double> z = draw_noise(unit_eps, n, stream);
      std::vector<double> ydag(n);
      for (int i = 0; i < n; ++i) ydag[i] = instance.x[i] + sigma_i[i] * z[i];
      double err = 0.0;
      if (!prep.lambda.empty()) {
        for (int i = 0; i < n; ++i) {
          const double d = prep.lambda[i] * ydag[i] - instance.x[i];
          err += d * d;
        }
      } else {
        SequenceObservation obs(std::move(ydag), variances);
        const ModelSet m =
            prep.use_ure ? ure_select(obs) : threshold_select(obs, prep.params);
        err = squared_error(apply_model(m, obs), instance.x);
      }
      out[0] = err;
    };
  } else {
    require(config.xi.has_value(), errc::invalid_argument,
            "estimator '" + estimator_id + "' needs an xi configuration");
    const XiConfig& xi_cfg = *config.xi;
    const double ctx_alpha =
        prep.spec.kind == EstimatorSpec::Kind::noisy_threshold ? prep.alpha : xi_cfg.alpha;
    if (xi_cfg.conditional)
      fixed_ctx.emplace(instance, realize_xi(xi_cfg, n, config.seed), xi_cfg.noise.scale,
                        ctx_alpha);
    if (fixed_ctx && prep.spec.kind == EstimatorSpec::Kind::conditional_oracle)
      fixed_oracle = conditional_oracle(*fixed_ctx);

    kernel = [&, &xi_cfg = *config.xi, prep, ctx_alpha](long rep, std::span<double> out) {
      RandomStream stream = make_stream(config.seed, StreamPurpose::epsilon, rep);
      const std::vector<double> z = draw_noise(unit_eps, n, stream);

      std::optional<ConditionalContext> local_ctx;
      const ConditionalContext* ctx = fixed_ctx ? &*fixed_ctx : nullptr;
      if (!ctx) {
        RandomStream xi_stream = make_stream(config.seed, StreamPurpose::xi, rep);
        local_ctx.emplace(instance, draw_noise(xi_cfg.noise, n, xi_stream), xi_cfg.noise.scale,
                          ctx_alpha);
        ctx = &*local_ctx;
      }

      std::vector<double> ytilde(n);
      for (int i = 0; i < n; ++i) {
        const double eps_i = ambient_scale * z[i];
        ytilde[i] =
            (instance.system.spectrum()[i] * instance.x[i] + eps_i) / ctx->spectrum.bhat[i];
      }

      ModelSet m;
      if (prep.spec.kind == EstimatorSpec::Kind::noisy_threshold) {
        m = noisy_threshold_select(ytilde, ctx->spectrum, instance.sigma, prep.beta);
      } else {
        m = fixed_oracle ? *fixed_oracle : conditional_oracle(*ctx);
      }
      double err = 0.0;
      const std::vector<bool> mask = m.mask(n);
      for (int i = 0; i < n; ++i) {
        const double est = mask[i] ? ytilde[i] : 0.0;
        const double d = est - instance.x[i];
        err += d * d;
      }
      out[0] = err;
    };
  }

  const VectorEstimate ve = mc_vector_mean(config.replications, 1, config.threads, kernel);
  RiskEstimate est;
  est.mean = ve.mean[0];
  est.stderr_of_mean = ve.stderr_of_mean[0];
  est.replications = config.replications;
  est.seed = config.seed;
  return est;
}

}  // namespace specfilter
