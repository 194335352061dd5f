#include "specfilter/core/experiment.hpp"

#include <cmath>
#include <functional>

namespace specfilter {

namespace {

OrderedJson vector_json(std::span<const double> values) {
  OrderedJson out = OrderedJson::array();
  for (double v : values) out.push_back(v);
  return out;
}

OrderedJson risk_row_json(const std::string& id, const RiskEstimate& est) {
  OrderedJson row;
  row["estimator"] = id;
  row["mean"] = est.mean;
  row["stderr"] = est.stderr_of_mean;
  row["replications"] = est.replications;
  row["seed"] = est.seed;
  return row;
}

std::string risk_table_csv(const std::vector<std::pair<std::string, RiskEstimate>>& rows) {
  std::string csv = "estimator,mean,stderr,replications\n";
  for (const auto& [id, est] : rows) {
    csv += id;
    csv += ',';
    csv += format_double(est.mean);
    csv += ',';
    csv += format_double(est.stderr_of_mean);
    csv += ',';
    csv += std::to_string(est.replications);
    csv += '\n';
  }
  return csv;
}

OrderedJson tail_report_json(const TailReport& report) {
  OrderedJson out;
  out["samples"] = report.samples;
  OrderedJson grid = OrderedJson::array();
  for (const auto& point : report.grid) {
    OrderedJson row;
    row["t"] = point.t;
    row["empirical"] = point.empirical;
    row["envelope"] = point.envelope;
    row["slack_3se"] = point.slack;
    row["ok"] = point.ok;
    grid.push_back(row);
  }
  out["envelope"] = grid;
  out["envelope_ok"] = report.envelope_ok;
  if (report.mass_checked) {
    OrderedJson mass;
    mass["alpha"] = report.alpha;
    mass["C"] = report.claimed_C;
    mass["lower_tail_freq"] = report.lower_tail_freq;
    mass["upper_tail_freq"] = report.upper_tail_freq;
    mass["ok"] = report.mass_ok;
    out["two_sided_mass"] = mass;
  }
  out["satisfied"] = report.satisfied;
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo certification of the per-coordinate error bounds
// ---------------------------------------------------------------------------

struct PerCoordinateCertification {
  VectorEstimate stats;  // width 2n: selection terms first, omission terms after
  CoordinateBounds bounds;
  bool satisfied = true;
};

OrderedJson per_coordinate_json(const PerCoordinateCertification& cert) {
  const int n = static_cast<int>(cert.bounds.selection.size());
  OrderedJson rows = OrderedJson::array();
  for (int i = 0; i < n; ++i) {
    OrderedJson row;
    row["i"] = i + 1;
    row["selection_mean"] = cert.stats.mean[i];
    row["selection_stderr"] = cert.stats.stderr_of_mean[i];
    row["selection_bound"] = cert.bounds.selection[i];
    row["selection_ok"] =
        cert.stats.mean[i] <= cert.bounds.selection[i] + 3.0 * cert.stats.stderr_of_mean[i];
    row["omission_mean"] = cert.stats.mean[n + i];
    row["omission_stderr"] = cert.stats.stderr_of_mean[n + i];
    row["omission_bound"] = cert.bounds.omission[i];
    row["omission_ok"] =
        cert.stats.mean[n + i] <= cert.bounds.omission[i] + 3.0 * cert.stats.stderr_of_mean[n + i];
    rows.push_back(row);
  }
  return rows;
}

// E((eta_i^2 - x_i^2) 1{i in mhat}) and E((x_i^2 - eta_i^2) 1{i not in mhat})
// against the closed-form bounds, replications sharing the epsilon streams of the
// risk estimates.
PerCoordinateCertification certify_selection_errors(const ProblemInstance& instance,
                                          const ThresholdParams& params, double K,
                                          const McConfig& config) {
  const int n = instance.n();
  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  std::vector<double> sigma_i(n);
  for (int i = 0; i < n; ++i) sigma_i[i] = std::sqrt(variances[i]);
  NoiseSpec unit = config.noise;
  unit.scale = 1.0;

  const auto kernel = [&](long rep, std::span<double> out) {
    RandomStream stream = make_stream(config.seed, StreamPurpose::epsilon, rep);
    const std::vector<double> z = draw_noise(unit, n, stream);
    std::vector<double> ydag(n);
    for (int i = 0; i < n; ++i) ydag[i] = instance.x[i] + sigma_i[i] * z[i];
    const SequenceObservation obs(std::move(ydag), variances);
    const std::vector<bool> mask = threshold_select(obs, params).mask(n);
    for (int i = 0; i < n; ++i) {
      const double eta = obs.ydag[i] - instance.x[i];
      const double diff = eta * eta - instance.x[i] * instance.x[i];
      out[i] = mask[i] ? diff : 0.0;
      out[n + i] = mask[i] ? 0.0 : -diff;
    }
  };

  PerCoordinateCertification cert;
  cert.stats = mc_vector_mean(config.replications, 2 * n, config.threads, kernel);
  cert.bounds = selection_error_bounds(instance, params, K);
  for (int i = 0; i < n; ++i) {
    cert.satisfied =
        cert.satisfied &&
        cert.stats.mean[i] <= cert.bounds.selection[i] + 3.0 * cert.stats.stderr_of_mean[i] &&
        cert.stats.mean[n + i] <= cert.bounds.omission[i] + 3.0 * cert.stats.stderr_of_mean[n + i];
  }
  return cert;
}

// Conditional analogue for the noisy-operator selector, xi held fixed.
PerCoordinateCertification certify_conditional_selection_errors(const ConditionalContext& ctx,
                                                                 double beta, double K,
                                                                 const McConfig& config) {
  const ProblemInstance& instance = ctx.instance;
  const int n = instance.n();
  const std::vector<double> nu =
      noisy_threshold_params(ctx.spectrum, instance.sigma, beta);
  const double ambient_scale = instance.sigma / std::sqrt(static_cast<double>(n));
  NoiseSpec unit = config.noise;
  unit.scale = 1.0;

  const auto kernel = [&](long rep, std::span<double> out) {
    RandomStream stream = make_stream(config.seed, StreamPurpose::epsilon, rep);
    const std::vector<double> z = draw_noise(unit, n, stream);
    std::vector<double> ytilde(n);
    for (int i = 0; i < n; ++i) {
      const double eps_i = ambient_scale * z[i];
      ytilde[i] = (instance.system.spectrum()[i] * instance.x[i] + eps_i) / ctx.spectrum.bhat[i];
    }
    const std::vector<bool> mask =
        noisy_threshold_select(ytilde, ctx.spectrum, instance.sigma, beta).mask(n);
    for (int i = 0; i < n; ++i) {
      const double eta = ytilde[i] - instance.x[i];
      const double diff = eta * eta - instance.x[i] * instance.x[i];
      out[i] = mask[i] ? diff : 0.0;
      out[n + i] = mask[i] ? 0.0 : -diff;
    }
  };

  PerCoordinateCertification cert;
  cert.stats = mc_vector_mean(config.replications, 2 * n, config.threads, kernel);
  cert.bounds = conditional_selection_error_bounds(ctx, nu, K, beta);
  for (int i = 0; i < n; ++i) {
    cert.satisfied =
        cert.satisfied &&
        cert.stats.mean[i] <= cert.bounds.selection[i] + 3.0 * cert.stats.stderr_of_mean[i] &&
        cert.stats.mean[n + i] <= cert.bounds.omission[i] + 3.0 * cert.stats.stderr_of_mean[n + i];
  }
  return cert;
}

struct TruncationResult {
  double cap = 0.0;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

// E(xi^2 1{xi^2 > s^2 beta' log n}) against the proof's K' beta' s^2 (1+log n)/n.
TruncationResult certify_truncation(const XiConfig& xi, int n, const McConfig& config) {
  const double s = xi.noise.scale;
  const double betaprime = xi.certificate.betaprime;
  const double cap = s * s * betaprime * std::log(static_cast<double>(n));

  const auto kernel = [&](long rep, std::span<double> out) {
    RandomStream stream = make_stream(config.seed, StreamPurpose::truncation, rep);
    const double draw = draw_noise(xi.noise, 1, stream)[0];
    const double v = draw * draw;
    out[0] = v > cap ? v : 0.0;
  };

  const VectorEstimate stats = mc_vector_mean(config.replications, 1, config.threads, kernel);
  TruncationResult result;
  result.cap = cap;
  result.mean = stats.mean[0];
  result.stderr_of_mean = stats.stderr_of_mean[0];
  result.bound = xi.certificate.Kprime * betaprime * s * s *
                 (1.0 + std::log(static_cast<double>(n))) / n;
  result.satisfied = result.mean <= result.bound + 3.0 * result.stderr_of_mean;
  return result;
}

struct MSetMassResult {
  double m_term = 0.0;  // sum_{i in M} x_i^2
  double mean = 0.0;    // unconditional oracle risk over random xi
  double stderr_of_mean = 0.0;
  double C = 0.0;
  bool satisfied = false;
};

// M-set mass control: sum_{i in M} x_i^2 <= C^-1 E||xhat_m*_xi - xdag||^2,
// the expectation running over fresh xi draws. The two-sided mass constant C
// makes a halved observation likely enough that the oracle risk absorbs the
// whole sub-threshold signal.
MSetMassResult certify_m_set_mass(const ProblemInstance& instance, const XiConfig& xi,
                                    const McConfig& config) {
  const int n = instance.n();
  const auto kernel = [&](long rep, std::span<double> out) {
    RandomStream stream = make_stream(config.seed, StreamPurpose::xi_resample, rep);
    ConditionalContext ctx(instance, draw_noise(xi.noise, n, stream), xi.noise.scale, xi.alpha);
    out[0] = conditional_risk(conditional_oracle(ctx), ctx).total;
  };
  const VectorEstimate stats = mc_vector_mean(config.replications, 1, config.threads, kernel);

  MSetMassResult result;
  const ModelSet small_eigenvalues = m_set(instance.system, xi.alpha, xi.noise.scale);
  for (int i : small_eigenvalues.indices())
    result.m_term += instance.x[i] * instance.x[i];
  result.mean = stats.mean[0];
  result.stderr_of_mean = stats.stderr_of_mean[0];
  result.C = xi.certificate.C;
  result.satisfied =
      result.C > 0.0 &&
      result.m_term <= (result.mean + 3.0 * result.stderr_of_mean) / result.C;
  return result;
}

// ---------------------------------------------------------------------------
// Bound section shared by estimate / check-bounds / noisy-op
// ---------------------------------------------------------------------------

std::string default_threshold_id(double beta) {
  return "threshold(" + format_double(beta) + ")";
}

OrderedJson oracle_inequality_section(const ProblemInstance& instance, const ResolvedConfig& rc,
                                      bool* all_ok) {
  const RiskEstimate lhs = estimate_risk(default_threshold_id(rc.mc.beta), instance, rc.mc);
  const BoundReport report = oracle_inequality_bound(instance, rc.mc.beta, rc.K, lhs.mean);
  OrderedJson out = bound_json(report);
  out["lhs_estimator"] = default_threshold_id(rc.mc.beta);
  out["lhs_stderr"] = lhs.stderr_of_mean;
  out["replications"] = lhs.replications;
  out["satisfied_with_3se"] = lhs.mean <= report.rhs - 3.0 * lhs.stderr_of_mean;
  *all_ok = *all_ok && report.satisfied;
  return out;
}

OrderedJson filter_class_section(const ProblemInstance& instance, const ResolvedConfig& rc,
                                 double lhs_mean, double lhs_stderr, bool* all_ok) {
  // From the factor-2 comparison risk(m*) <= 2 inf_lambda risk, the
  // oracle-inequality rhs is at most 2 (K1 log n + K2 + 1) inf_lambda risk + K3/n.
  const int n = instance.n();
  double norm2 = 0.0;
  for (double v : instance.x) norm2 += v * v;
  const double k1 = 12.0 * rc.mc.beta;
  const double k2 = 2.0 + rc.mc.beta * std::log(norm2);
  const double k3 = 2.0 * rc.K * rc.mc.beta;
  const double inf_filter = exact_filter_risk(oracle_filter(instance), instance);

  BoundReport report;
  report.lhs = lhs_mean;
  report.rhs = 2.0 * (k1 * std::log(static_cast<double>(n)) + k2 + 1.0) * inf_filter + k3 / n;
  report.constants = {{"K1", k1},
                      {"K2", k2},
                      {"K3", k3},
                      {"inf_filter_risk", inf_filter},
                      {"log_n_coefficient",
                       2.0 * (k1 * std::log(static_cast<double>(n)) + k2 + 1.0)}};
  report.satisfied = report.lhs <= report.rhs;
  OrderedJson out = bound_json(report);
  out["lhs_stderr"] = lhs_stderr;
  *all_ok = *all_ok && report.satisfied;
  return out;
}

OrderedJson bounds_section(const ResolvedConfig& rc, bool* all_ok) {
  const ProblemInstance& instance = *rc.instance;
  const int n = instance.n();
  OrderedJson bounds;

  const BoundReport factor2 = factor_two_check(instance);
  bounds["factor_two"] = bound_json(factor2);
  *all_ok = *all_ok && factor2.satisfied;

  try {
    bounds["oracle_inequality"] = oracle_inequality_section(instance, rc, all_ok);
    const double lhs_mean = bounds["oracle_inequality"]["lhs"].get<double>();
    const double lhs_stderr = bounds["oracle_inequality"]["lhs_stderr"].get<double>();
    bounds["filter_class_inequality"] =
        filter_class_section(instance, rc, lhs_mean, lhs_stderr, all_ok);
  } catch (const Error& e) {
    if (e.code() != errc::degenerate_signal) throw;
    bounds["oracle_inequality"] = OrderedJson{{"error", "degenerate_signal"}, {"detail", e.what()}};
  }

  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  const ThresholdParams params = threshold_params(variances, rc.mc.beta);
  const PerCoordinateCertification selection =
      certify_selection_errors(instance, params, rc.K, rc.mc);
  OrderedJson selection_json;
  selection_json["K"] = rc.K;
  selection_json["beta"] = rc.mc.beta;
  selection_json["replications"] = selection.stats.replications;
  selection_json["coordinates"] = per_coordinate_json(selection);
  selection_json["satisfied"] = selection.satisfied;
  bounds["selection_error"] = selection_json;
  *all_ok = *all_ok && selection.satisfied;

  if (rc.mc.xi) {
    const XiConfig& xi = *rc.mc.xi;
    const std::vector<double> values = realize_xi(xi, n, rc.mc.seed);
    const ConditionalContext ctx(instance, values, xi.noise.scale, xi.alpha);

    McConfig conditional_mc = rc.mc;
    conditional_mc.xi->conditional = true;
    try {
      const RiskEstimate lhs = estimate_risk("noisy-threshold", instance, conditional_mc);
      const BoundReport t2 =
          conditional_oracle_inequality_bound(ctx, rc.mc.beta, rc.K, xi.certificate, lhs.mean);
      OrderedJson out = bound_json(t2);
      out["lhs_estimator"] = "noisy-threshold";
      out["lhs_stderr"] = lhs.stderr_of_mean;
      out["replications"] = lhs.replications;
      out["satisfied_with_3se"] = lhs.mean <= t2.rhs - 3.0 * lhs.stderr_of_mean;
      bounds["conditional_oracle_inequality"] = out;
      *all_ok = *all_ok && t2.satisfied;
    } catch (const Error& e) {
      if (e.code() != errc::degenerate_signal) throw;
      bounds["conditional_oracle_inequality"] =
          OrderedJson{{"error", "degenerate_signal"}, {"detail", e.what()}};
    }

    const PerCoordinateCertification cond_selection =
        certify_conditional_selection_errors(ctx, rc.mc.beta, rc.K, rc.mc);
    OrderedJson cond_selection_json;
    cond_selection_json["K"] = rc.K;
    cond_selection_json["beta"] = rc.mc.beta;
    cond_selection_json["replications"] = cond_selection.stats.replications;
    cond_selection_json["coordinates"] = per_coordinate_json(cond_selection);
    cond_selection_json["satisfied"] = cond_selection.satisfied;
    bounds["conditional_selection_error"] = cond_selection_json;
    *all_ok = *all_ok && cond_selection.satisfied;

    const TruncationResult truncation = certify_truncation(xi, n, rc.mc);
    OrderedJson truncation_json;
    truncation_json["cap"] = truncation.cap;
    truncation_json["mean"] = truncation.mean;
    truncation_json["stderr"] = truncation.stderr_of_mean;
    truncation_json["bound"] = truncation.bound;
    truncation_json["satisfied"] = truncation.satisfied;
    bounds["truncation"] = truncation_json;
    *all_ok = *all_ok && truncation.satisfied;

    const MSetMassResult mass = certify_m_set_mass(instance, xi, rc.mc);
    OrderedJson mass_json;
    mass_json["C"] = mass.C;
    mass_json["m_set_term"] = mass.m_term;
    mass_json["oracle_risk_mean"] = mass.mean;
    mass_json["oracle_risk_stderr"] = mass.stderr_of_mean;
    mass_json["satisfied"] = mass.satisfied;
    bounds["m_set_mass"] = mass_json;
    *all_ok = *all_ok && mass.satisfied;
  }

  return bounds;
}

OrderedJson xi_realized_json(const ResolvedConfig& rc) {
  const XiConfig& xi = *rc.mc.xi;
  OrderedJson out;
  if (!xi.conditional) {
    out["mode"] = "random";
    return out;
  }
  out["mode"] = "conditional";
  out["source"] = xi.values ? "explicit" : "drawn";
  out["values"] = vector_json(realize_xi(xi, rc.instance->n(), rc.mc.seed));
  return out;
}

OrderedJson report_envelope(const char* command, const ResolvedConfig& rc) {
  OrderedJson doc;
  doc["schema"] = "specfilter-report-v1";
  doc["command"] = command;
  doc["config"] = rc.echo;
  return doc;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

ArtifactSet cmd_gen_instance(const ResolvedConfig& rc) {
  OrderedJson doc;
  doc["schema"] = kInstanceSchema;
  for (const auto& [key, value] : rc.echo.at("instance").items()) doc[key] = value;
  ArtifactSet set;
  set.add("instance.json", dump_json(doc));
  return set;
}

ArtifactSet cmd_oracle_report(const ResolvedConfig& rc) {
  const ProblemInstance& instance = *rc.instance;
  OrderedJson doc = report_envelope("oracle-report", rc);

  const std::vector<double> variances = noise_variances(instance.system, instance.sigma);
  doc["variances"] = vector_json(variances);
  const ThresholdParams params = threshold_params(variances, rc.mc.beta);
  doc["threshold_mu"] = vector_json(params.mu);

  const ModelSet mstar = oracle_model(instance);
  OrderedJson model;
  model["indices"] = model_json(mstar);
  model["risk"] = risk_decomposition_json(exact_model_risk(mstar, instance));
  doc["oracle_model"] = model;

  const FilterVector lambda = oracle_filter(instance);
  double closed_form = 0.0;
  for (int i = 0; i < instance.n(); ++i) {
    const double x2 = instance.x[i] * instance.x[i];
    closed_form += x2 * variances[i] / (x2 + variances[i]);
  }
  OrderedJson filt;
  filt["lambda"] = vector_json(lambda.lambda);
  filt["risk"] = exact_filter_risk(lambda, instance);
  filt["closed_form"] = closed_form;
  doc["oracle_filter"] = filt;

  const BoundReport factor2 = factor_two_check(instance);
  doc["factor_two"] = bound_json(factor2);

  ArtifactSet set;
  set.all_satisfied = factor2.satisfied;
  set.add("oracle.json", dump_json(doc));
  return set;
}

ArtifactSet cmd_check_bounds(const ResolvedConfig& rc) {
  OrderedJson doc = report_envelope("check-bounds", rc);
  if (rc.mc.xi) doc["xi_realized"] = xi_realized_json(rc);
  bool all_ok = true;
  doc["bounds"] = bounds_section(rc, &all_ok);
  ArtifactSet set;
  set.all_satisfied = all_ok;
  set.add("bounds.json", dump_json(doc));
  return set;
}

ArtifactSet cmd_estimate(const ResolvedConfig& rc) {
  require(!rc.estimator_ids.empty(), errc::invalid_argument,
          "'estimate' needs a non-empty 'estimators' list");
  const ProblemInstance& instance = *rc.instance;

  std::vector<std::pair<std::string, RiskEstimate>> rows;
  for (const std::string& id : rc.estimator_ids)
    rows.emplace_back(id, estimate_risk(id, instance, rc.mc));

  OrderedJson doc = report_envelope("estimate", rc);
  if (rc.mc.xi) doc["xi_realized"] = xi_realized_json(rc);
  OrderedJson risk_rows = OrderedJson::array();
  for (const auto& [id, est] : rows) risk_rows.push_back(risk_row_json(id, est));
  doc["risks"] = risk_rows;
  bool all_ok = true;
  doc["bounds"] = bounds_section(rc, &all_ok);

  ArtifactSet set;
  set.all_satisfied = all_ok;
  set.add("report.json", dump_json(doc));
  set.add("risks.csv", risk_table_csv(rows));

  if (rc.emit_plot_data) {
    std::vector<std::pair<std::string, RiskEstimate>> cutoff_rows;
    std::string cutoff_csv = "k,mean,stderr\n";
    for (int k = 0; k <= instance.n(); ++k) {
      const std::string id = "cutoff(" + std::to_string(k) + ")";
      const RiskEstimate est = estimate_risk(id, instance, rc.mc);
      cutoff_csv += std::to_string(k);
      cutoff_csv += ',';
      cutoff_csv += format_double(est.mean);
      cutoff_csv += ',';
      cutoff_csv += format_double(est.stderr_of_mean);
      cutoff_csv += '\n';
    }
    set.add("plot_cutoff.csv", cutoff_csv);

    std::string est_csv = "estimator,mean,stderr\n";
    for (const auto& [id, est] : rows) {
      est_csv += id;
      est_csv += ',';
      est_csv += format_double(est.mean);
      est_csv += ',';
      est_csv += format_double(est.stderr_of_mean);
      est_csv += '\n';
    }
    set.add("plot_estimators.csv", est_csv);
  }
  return set;
}

ArtifactSet cmd_noisy_op(const ResolvedConfig& rc) {
  require(rc.mc.xi.has_value(), errc::invalid_argument, "'noisy-op' needs an 'xi' block");
  const ProblemInstance& instance = *rc.instance;
  const XiConfig& xi = *rc.mc.xi;
  const int n = instance.n();

  const std::vector<double> values = realize_xi(xi, n, rc.mc.seed);
  const ConditionalContext ctx(instance, values, xi.noise.scale, xi.alpha);

  OrderedJson doc = report_envelope("noisy-op", rc);
  OrderedJson realized;
  realized["source"] = xi.values ? "explicit" : "drawn";
  realized["values"] = vector_json(values);
  doc["xi_realized"] = realized;

  OrderedJson spectrum;
  spectrum["bhat"] = vector_json(ctx.spectrum.bhat);
  spectrum["s"] = ctx.spectrum.s;
  spectrum["alpha"] = ctx.spectrum.alpha;
  doc["spectrum"] = spectrum;

  doc["hat_sigma2"] = vector_json(hat_sigma2(ctx.spectrum, instance.sigma));
  doc["conditional_noise_power"] = vector_json(conditional_noise_power(ctx));
  doc["nu"] = vector_json(noisy_threshold_params(ctx.spectrum, instance.sigma, rc.mc.beta));
  doc["m_set"] = model_json(m_set(instance.system, xi.alpha, xi.noise.scale));

  const ModelSet defining = conditional_oracle(ctx);
  const ModelSet form1 = conditional_oracle_form1(ctx);
  const ModelSet form2 = conditional_oracle_form2(ctx);
  const bool agree = defining == form1 && defining == form2;
  OrderedJson oracle;
  oracle["defining"] = model_json(defining);
  oracle["form1"] = model_json(form1);
  oracle["form2"] = model_json(form2);
  oracle["forms_agree"] = agree;
  oracle["risk"] = risk_decomposition_json(conditional_risk(defining, ctx));
  doc["conditional_oracle"] = oracle;

  McConfig conditional_mc = rc.mc;
  conditional_mc.xi->conditional = true;
  std::vector<std::pair<std::string, RiskEstimate>> rows;
  rows.emplace_back("noisy-threshold", estimate_risk("noisy-threshold", instance, conditional_mc));
  rows.emplace_back("conditional-oracle",
                    estimate_risk("conditional-oracle", instance, conditional_mc));
  OrderedJson risk_rows = OrderedJson::array();
  for (const auto& [id, est] : rows) risk_rows.push_back(risk_row_json(id, est));
  doc["risks"] = risk_rows;

  bool all_ok = agree;
  doc["bounds"] = [&] {
    OrderedJson bounds;
    try {
      const RiskEstimate lhs = rows.front().second;
      const BoundReport t2 =
          conditional_oracle_inequality_bound(ctx, rc.mc.beta, rc.K, xi.certificate, lhs.mean);
      OrderedJson out = bound_json(t2);
      out["lhs_estimator"] = "noisy-threshold";
      out["lhs_stderr"] = lhs.stderr_of_mean;
      out["replications"] = lhs.replications;
      out["satisfied_with_3se"] = lhs.mean <= t2.rhs - 3.0 * lhs.stderr_of_mean;
      bounds["conditional_oracle_inequality"] = out;
      all_ok = all_ok && t2.satisfied;
    } catch (const Error& e) {
      if (e.code() != errc::degenerate_signal) throw;
      bounds["conditional_oracle_inequality"] =
          OrderedJson{{"error", "degenerate_signal"}, {"detail", e.what()}};
    }

    const PerCoordinateCertification cond_selection =
        certify_conditional_selection_errors(ctx, rc.mc.beta, rc.K, rc.mc);
    OrderedJson cond_selection_json;
    cond_selection_json["K"] = rc.K;
    cond_selection_json["beta"] = rc.mc.beta;
    cond_selection_json["replications"] = cond_selection.stats.replications;
    cond_selection_json["coordinates"] = per_coordinate_json(cond_selection);
    cond_selection_json["satisfied"] = cond_selection.satisfied;
    bounds["conditional_selection_error"] = cond_selection_json;
    all_ok = all_ok && cond_selection.satisfied;

    const TruncationResult truncation = certify_truncation(xi, n, rc.mc);
    OrderedJson truncation_json;
    truncation_json["cap"] = truncation.cap;
    truncation_json["mean"] = truncation.mean;
    truncation_json["stderr"] = truncation.stderr_of_mean;
    truncation_json["bound"] = truncation.bound;
    truncation_json["satisfied"] = truncation.satisfied;
    bounds["truncation"] = truncation_json;
    all_ok = all_ok && truncation.satisfied;

    const MSetMassResult mass = certify_m_set_mass(instance, xi, rc.mc);
    OrderedJson mass_json;
    mass_json["C"] = mass.C;
    mass_json["m_set_term"] = mass.m_term;
    mass_json["oracle_risk_mean"] = mass.mean;
    mass_json["oracle_risk_stderr"] = mass.stderr_of_mean;
    mass_json["satisfied"] = mass.satisfied;
    bounds["m_set_mass"] = mass_json;
    all_ok = all_ok && mass.satisfied;
    return bounds;
  }();

  ArtifactSet set;
  set.all_satisfied = all_ok;
  set.add("noisy.json", dump_json(doc));
  return set;
}

ArtifactSet cmd_certify_tails(const ResolvedConfig& rc) {
  OrderedJson doc = report_envelope("certify-tails", rc);
  bool all_ok = true;

  NoiseSpec eps;
  eps.family = rc.mc.noise.family;
  eps.scale = 1.0;
  eps.certificate = {rc.K, rc.mc.beta};
  const TailReport eps_report = verify_tail_certificate(eps, rc.tail_samples, rc.mc.seed);
  doc["epsilon"] = tail_report_json(eps_report);
  all_ok = all_ok && eps_report.satisfied;

  if (rc.mc.xi) {
    const XiConfig& xi = *rc.mc.xi;
    NoiseSpec spec;
    spec.family = xi.noise.family;
    spec.scale = 1.0;
    spec.certificate = {xi.certificate.Kprime, xi.certificate.betaprime};
    const TailReport xi_report =
        verify_tail_certificate(spec, rc.tail_samples, rc.mc.seed, xi.alpha, xi.certificate.C);
    doc["xi"] = tail_report_json(xi_report);
    all_ok = all_ok && xi_report.satisfied;
  }

  ArtifactSet set;
  set.all_satisfied = all_ok;
  set.add("tails.json", dump_json(doc));
  return set;
}

}  // namespace

OrderedJson bound_json(const BoundReport& report) {
  OrderedJson out;
  out["lhs"] = report.lhs;
  out["rhs"] = report.rhs;
  OrderedJson constants;
  for (const auto& [name, value] : report.constants) constants[name] = value;
  out["constants"] = constants;
  out["satisfied"] = report.satisfied;
  return out;
}

OrderedJson risk_decomposition_json(const RiskDecomposition& risk) {
  OrderedJson out;
  out["bias"] = risk.bias;
  out["variance"] = risk.variance;
  out["total"] = risk.total;
  return out;
}

OrderedJson model_json(const ModelSet& m) {
  OrderedJson out = OrderedJson::array();
  for (int i : m.indices()) out.push_back(i + 1);
  return out;
}

ArtifactSet run_command(const CommandRequest& request) {
  const OrderedJson merged = request.overrides.is_object()
                                 ? merge_overrides(request.config, request.overrides)
                                 : request.config;
  const bool need_instance = request.command != "certify-tails";
  const ResolvedConfig rc = resolve_config(merged, request.base_dir, need_instance);

  if (request.command == "estimate") return cmd_estimate(rc);
  if (request.command == "oracle-report") return cmd_oracle_report(rc);
  if (request.command == "check-bounds") return cmd_check_bounds(rc);
  if (request.command == "noisy-op") return cmd_noisy_op(rc);
  if (request.command == "certify-tails") return cmd_certify_tails(rc);
  if (request.command == "gen-instance") return cmd_gen_instance(rc);
  raise(errc::invalid_argument, "unknown command '" + request.command + "'");
}

}  // namespace specfilter
