#include "specfilter/specfilter.h"

#include <cstring>
#include <string>

#include "specfilter/core/experiment.hpp"
#include "specfilter/core/jsonio.hpp"
#include "specfilter/core/noisy_operator.hpp"

namespace {

thread_local std::string g_last_error;

sf_status status_of(specfilter::errc code) {
  using specfilter::errc;
  switch (code) {
    case errc::invalid_argument: return SF_ERR_INVALID_ARGUMENT;
    case errc::dimension_mismatch: return SF_ERR_DIMENSION_MISMATCH;
    case errc::rank_deficient: return SF_ERR_RANK_DEFICIENT;
    case errc::zero_observed_eigenvalue: return SF_ERR_ZERO_OBSERVED_EIGENVALUE;
    case errc::degenerate_signal: return SF_ERR_DEGENERATE_SIGNAL;
    case errc::certificate_violated: return SF_ERR_CERTIFICATE_VIOLATED;
    case errc::unknown_family: return SF_ERR_UNKNOWN_FAMILY;
    case errc::unknown_estimator: return SF_ERR_UNKNOWN_ESTIMATOR;
    case errc::parse_error: return SF_ERR_PARSE;
    case errc::io_error: return SF_ERR_IO;
  }
  return SF_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes + thread-local message.
template <typename Body>
sf_status guarded(Body&& body) {
  try {
    body();
    return SF_OK;
  } catch (const specfilter::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SF_ERR_INTERNAL;
  }
}

sf_status require_args(bool ok) {
  if (!ok) {
    g_last_error = "null argument";
    return SF_ERR_INVALID_ARGUMENT;
  }
  return SF_OK;
}

}  // namespace

struct sf_system {
  specfilter::SingularSystem system;
};

struct sf_artifacts {
  specfilter::ArtifactSet set;
};

extern "C" {

const char* sf_version(void) { return "1.0.0"; }

const char* sf_status_name(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SF_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case SF_ERR_RANK_DEFICIENT: return "rank_deficient";
    case SF_ERR_ZERO_OBSERVED_EIGENVALUE: return "zero_observed_eigenvalue";
    case SF_ERR_DEGENERATE_SIGNAL: return "degenerate_signal";
    case SF_ERR_CERTIFICATE_VIOLATED: return "certificate_violated";
    case SF_ERR_UNKNOWN_FAMILY: return "unknown_family";
    case SF_ERR_UNKNOWN_ESTIMATOR: return "unknown_estimator";
    case SF_ERR_PARSE: return "parse_error";
    case SF_ERR_IO: return "io_error";
    case SF_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* sf_last_error(void) { return g_last_error.c_str(); }

sf_status sf_system_from_matrix(const double* row_major, size_t rows, size_t cols,
                                double tolerance, sf_system** out) {
  if (sf_status s = require_args(row_major && out); s != SF_OK) return s;
  return guarded([&] {
    auto system = specfilter::SingularSystem::from_matrix(
        std::span<const double>(row_major, rows * cols), static_cast<int>(rows),
        static_cast<int>(cols), tolerance);
    *out = new sf_system{std::move(system)};
  });
}

sf_status sf_system_from_spectrum(const double* b, size_t n, sf_system** out) {
  if (sf_status s = require_args(b && out); s != SF_OK) return s;
  return guarded([&] {
    *out = new sf_system{
        specfilter::SingularSystem::from_spectrum(std::vector<double>(b, b + n))};
  });
}

sf_status sf_system_from_csv(const char* path, double tolerance, sf_system** out) {
  if (sf_status s = require_args(path && out); s != SF_OK) return s;
  return guarded([&] {
    const specfilter::DenseMatrix m =
        specfilter::load_matrix_csv(specfilter::read_file(path));
    auto system = specfilter::SingularSystem::from_matrix(m.data, m.rows, m.cols, tolerance);
    *out = new sf_system{std::move(system)};
  });
}

sf_status sf_system_from_json(const char* text, sf_system** out) {
  if (sf_status s = require_args(text && out); s != SF_OK) return s;
  return guarded([&] {
    const specfilter::OrderedJson doc = specfilter::parse_json(text);
    specfilter::require(doc.is_object() && doc.contains("b") && doc.at("b").is_array(),
                        specfilter::errc::parse_error,
                        "spectrum JSON must be an object with an array 'b'");
    std::vector<double> b;
    for (const auto& v : doc.at("b")) {
      specfilter::require(v.is_number(), specfilter::errc::parse_error,
                          "'b' must contain only numbers");
      b.push_back(v.get<double>());
    }
    *out = new sf_system{specfilter::SingularSystem::from_spectrum(std::move(b))};
  });
}

void sf_system_free(sf_system* system) { delete system; }

size_t sf_system_n(const sf_system* system) {
  return system ? static_cast<size_t>(system->system.n()) : 0;
}

size_t sf_system_d(const sf_system* system) {
  return system ? static_cast<size_t>(system->system.d()) : 0;
}

sf_status sf_system_spectrum(const sf_system* system, double* out) {
  if (sf_status s = require_args(system && out); s != SF_OK) return s;
  const auto b = system->system.spectrum();
  std::memcpy(out, b.data(), b.size() * sizeof(double));
  return SF_OK;
}

sf_status sf_noise_variances(const sf_system* system, double sigma, double* out) {
  if (sf_status s = require_args(system && out); s != SF_OK) return s;
  return guarded([&] {
    const auto v = specfilter::noise_variances(system->system, sigma);
    std::memcpy(out, v.data(), v.size() * sizeof(double));
  });
}

sf_status sf_to_sequence(const sf_system* system, const double* y, double sigma, double* ydag_out,
                         double* variances_out) {
  if (sf_status s = require_args(system && y && ydag_out); s != SF_OK) return s;
  return guarded([&] {
    const auto obs = specfilter::to_sequence(
        std::span<const double>(y, static_cast<size_t>(system->system.n())), system->system,
        sigma);
    std::memcpy(ydag_out, obs.ydag.data(), obs.ydag.size() * sizeof(double));
    if (variances_out)
      std::memcpy(variances_out, obs.variances.data(), obs.variances.size() * sizeof(double));
  });
}

sf_status sf_synthesize(const sf_system* system, const double* coeffs, double* out) {
  if (sf_status s = require_args(system && coeffs && out); s != SF_OK) return s;
  return guarded([&] {
    const auto v = system->system.synthesize(
        std::span<const double>(coeffs, static_cast<size_t>(system->system.n())));
    std::memcpy(out, v.data(), v.size() * sizeof(double));
  });
}

sf_status sf_spectral_cutoff(size_t k, size_t n, double* lambda_out) {
  if (sf_status s = require_args(lambda_out != nullptr); s != SF_OK) return s;
  return guarded([&] {
    const auto f = specfilter::spectral_cutoff(static_cast<int>(k), static_cast<int>(n));
    std::memcpy(lambda_out, f.lambda.data(), f.lambda.size() * sizeof(double));
  });
}

sf_status sf_tikhonov(double tau, const double* variances, size_t n, double* lambda_out) {
  if (sf_status s = require_args(variances && lambda_out); s != SF_OK) return s;
  return guarded([&] {
    const auto f = specfilter::tikhonov(tau, std::span<const double>(variances, n));
    std::memcpy(lambda_out, f.lambda.data(), f.lambda.size() * sizeof(double));
  });
}

sf_status sf_threshold_mu(const double* variances, size_t n, double beta, double* mu_out) {
  if (sf_status s = require_args(variances && mu_out); s != SF_OK) return s;
  return guarded([&] {
    const auto p = specfilter::threshold_params(std::span<const double>(variances, n), beta);
    std::memcpy(mu_out, p.mu.data(), p.mu.size() * sizeof(double));
  });
}

namespace {

void write_mask(const specfilter::ModelSet& m, size_t n, uint8_t* out) {
  const auto mask = m.mask(static_cast<int>(n));
  for (size_t i = 0; i < n; ++i) out[i] = mask[i] ? 1 : 0;
}

specfilter::SequenceObservation make_obs(const double* ydag, const double* variances, size_t n) {
  return specfilter::SequenceObservation(std::vector<double>(ydag, ydag + n),
                                         std::vector<double>(variances, variances + n));
}

}  // namespace

sf_status sf_threshold_select(const double* ydag, const double* variances, size_t n, double beta,
                              uint8_t* selected_out) {
  if (sf_status s = require_args(ydag && variances && selected_out); s != SF_OK) return s;
  return guarded([&] {
    const auto obs = make_obs(ydag, variances, n);
    const auto params = specfilter::threshold_params(obs.variances, beta);
    write_mask(specfilter::threshold_select(obs, params), n, selected_out);
  });
}

sf_status sf_ure_select(const double* ydag, const double* variances, size_t n,
                        uint8_t* selected_out) {
  if (sf_status s = require_args(ydag && variances && selected_out); s != SF_OK) return s;
  return guarded([&] {
    write_mask(specfilter::ure_select(make_obs(ydag, variances, n)), n, selected_out);
  });
}

sf_status sf_oracle_model(const double* x, const double* variances, size_t n,
                          uint8_t* selected_out) {
  if (sf_status s = require_args(x && variances && selected_out); s != SF_OK) return s;
  return guarded([&] {
    for (size_t i = 0; i < n; ++i) {
      specfilter::require(variances[i] > 0.0, specfilter::errc::invalid_argument,
                          "variances must be positive");
      selected_out[i] = x[i] * x[i] >= variances[i] ? 1 : 0;
    }
  });
}

sf_status sf_oracle_filter(const double* x, const double* variances, size_t n,
                           double* lambda_out) {
  if (sf_status s = require_args(x && variances && lambda_out); s != SF_OK) return s;
  return guarded([&] {
    for (size_t i = 0; i < n; ++i) {
      specfilter::require(variances[i] > 0.0, specfilter::errc::invalid_argument,
                          "variances must be positive");
      const double x2 = x[i] * x[i];
      lambda_out[i] = x2 / (x2 + variances[i]);
    }
  });
}

sf_status sf_exact_model_risk(const uint8_t* selected, const double* x, const double* variances,
                              size_t n, double* bias_out, double* variance_out,
                              double* total_out) {
  if (sf_status s = require_args(selected && x && variances); s != SF_OK) return s;
  return guarded([&] {
    double bias = 0.0, variance = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (selected[i])
        variance += variances[i];
      else
        bias += x[i] * x[i];
    }
    if (bias_out) *bias_out = bias;
    if (variance_out) *variance_out = variance;
    if (total_out) *total_out = bias + variance;
  });
}

sf_status sf_exact_filter_risk(const double* lambda, const double* x, const double* variances,
                               size_t n, double* out) {
  if (sf_status s = require_args(lambda && x && variances && out); s != SF_OK) return s;
  return guarded([&] {
    double risk = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double one_minus = 1.0 - lambda[i];
      risk += one_minus * one_minus * x[i] * x[i] + lambda[i] * lambda[i] * variances[i];
    }
    *out = risk;
  });
}

sf_status sf_noisy_threshold_select(const double* ytilde, const double* bhat, size_t n,
                                    double sigma, double beta, double alpha, double s,
                                    uint8_t* selected_out) {
  if (sf_status st = require_args(ytilde && bhat && selected_out); st != SF_OK) return st;
  return guarded([&] {
    specfilter::NoisySpectrum spectrum(std::vector<double>(bhat, bhat + n), s, alpha);
    write_mask(specfilter::noisy_threshold_select(std::span<const double>(ytilde, n), spectrum,
                                                  sigma, beta),
               n, selected_out);
  });
}

sf_status sf_cmd_run(const char* command, const char* config_json, const char* overrides_json,
                     const char* base_dir, sf_artifacts** out) {
  if (sf_status s = require_args(command && config_json && out); s != SF_OK) return s;
  return guarded([&] {
    specfilter::CommandRequest request;
    request.command = command;
    request.config = specfilter::parse_json(config_json);
    if (overrides_json) request.overrides = specfilter::parse_json(overrides_json);
    if (base_dir) request.base_dir = base_dir;
    *out = new sf_artifacts{specfilter::run_command(request)};
  });
}

size_t sf_artifacts_count(const sf_artifacts* artifacts) {
  return artifacts ? artifacts->set.artifacts.size() : 0;
}

const char* sf_artifacts_name(const sf_artifacts* artifacts, size_t index) {
  if (!artifacts || index >= artifacts->set.artifacts.size()) return nullptr;
  return artifacts->set.artifacts[index].name.c_str();
}

const char* sf_artifacts_content(const sf_artifacts* artifacts, size_t index) {
  if (!artifacts || index >= artifacts->set.artifacts.size()) return nullptr;
  return artifacts->set.artifacts[index].content.c_str();
}

int sf_artifacts_all_satisfied(const sf_artifacts* artifacts) {
  return artifacts && artifacts->set.all_satisfied ? 1 : 0;
}

sf_status sf_artifacts_write(const sf_artifacts* artifacts, const char* out_dir) {
  if (sf_status s = require_args(artifacts && out_dir); s != SF_OK) return s;
  return guarded([&] { specfilter::write_artifacts(artifacts->set, out_dir); });
}

void sf_artifacts_free(sf_artifacts* artifacts) { delete artifacts; }

}  // extern "C"
