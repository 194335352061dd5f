// Acceptance suite: end-to-end certification of the oracle inequalities and
// harness contracts at desk scale. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specfilter/core/experiment.hpp"
#include "../test_support.hpp"

using namespace specfilter;
using testsupport::brute_force_best_model;
using testsupport::make_r1;
using testsupport::random_instance;

namespace {

McConfig gaussian_config(long replications, std::uint64_t seed) {
  McConfig config;
  config.replications = replications;
  config.seed = seed;
  config.noise.family = NoiseFamily::gaussian;
  config.beta = 3.0;
  config.alpha = 1.0;
  return config;
}

// --------------------------------------------------------------------------
// 1. oracle_model equals the exhaustive argmin on 200 random instances
// --------------------------------------------------------------------------
bool criterion1(std::string& detail) {
  std::mt19937 gen(1001);
  std::uniform_int_distribution<int> dim(2, 12);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ProblemInstance inst = random_instance(gen, dim(gen));
    const auto variances = noise_variances(inst.system, inst.sigma);
    if (oracle_model(inst).mask(inst.n()) != brute_force_best_model(inst.x, variances))
      ++mismatches;
  }
  detail = "200 instances, " + std::to_string(mismatches) + " mismatches";
  return mismatches == 0;
}

// --------------------------------------------------------------------------
// 2. factor-2 comparison plus closed-form/summation agreement on 10^4 instances
// --------------------------------------------------------------------------
bool criterion2(std::string& detail) {
  std::mt19937 gen(1002);
  std::uniform_int_distribution<int> dim(2, 30);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ProblemInstance inst = random_instance(gen, dim(gen));
    const auto variances = noise_variances(inst.system, inst.sigma);

    const double model = exact_model_risk(oracle_model(inst), inst).total;
    const double filter = exact_filter_risk(oracle_filter(inst), inst);
    const double rhs = 2.0 * filter;
    if (model > rhs * (1.0 + 1e-12)) ++violations;
    worst_ratio = std::max(worst_ratio, model / rhs);

    double closed_model = 0.0, closed_filter = 0.0;
    for (int i = 0; i < inst.n(); ++i) {
      const double x2 = inst.x[i] * inst.x[i];
      closed_model += std::min(x2, variances[i]);
      closed_filter += x2 * variances[i] / (x2 + variances[i]);
    }
    if (std::abs(model - closed_model) > 1e-12 * std::max(1.0, closed_model)) ++violations;
    if (std::abs(filter - closed_filter) > 1e-12 * std::max(1.0, closed_filter)) ++violations;
  }
  std::ostringstream os;
  os << "10^4 instances, " << violations << " violations, worst lhs/rhs = " << worst_ratio;
  detail = os.str();
  return violations == 0;
}

// --------------------------------------------------------------------------
// 3. known-operator oracle inequality under Monte Carlo on R1 + 20 random instances
// --------------------------------------------------------------------------
bool criterion3(std::string& detail) {
  std::mt19937 gen(1003);
  std::vector<ProblemInstance> instances;
  instances.push_back(make_r1());
  const int sizes[3] = {4, 50, 100};
  for (int k = 0; k < 20; ++k) instances.push_back(random_instance(gen, sizes[k % 3]));

  const double K = std::sqrt(1.0 / 3.0);
  int failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const McConfig config = gaussian_config(10000, 30000 + k);
    const RiskEstimate lhs = estimate_risk("threshold(3)", instances[k], config);
    const BoundReport report = oracle_inequality_bound(instances[k], 3.0, K, lhs.mean);
    const double margin = report.rhs - lhs.mean - 3.0 * lhs.stderr_of_mean;
    worst_margin = std::min(worst_margin, margin);
    if (margin < 0.0) ++failures;
  }
  std::ostringstream os;
  os << instances.size() << " instances, " << failures
     << " bound failures, worst margin = " << worst_margin;
  detail = os.str();
  return failures == 0;
}

// --------------------------------------------------------------------------
// 4. per-coordinate selection/omission bounds on R1 at 10^5 replications
// --------------------------------------------------------------------------
bool criterion4(std::string& detail) {
  const ProblemInstance r1 = make_r1();
  const int n = r1.n();
  const auto variances = noise_variances(r1.system, r1.sigma);
  std::vector<double> sigma_i(n);
  for (int i = 0; i < n; ++i) sigma_i[i] = std::sqrt(variances[i]);
  const ThresholdParams params = threshold_params(variances, 3.0);
  const double K = std::sqrt(1.0 / 3.0);
  const CoordinateBounds bounds = selection_error_bounds(r1, params, K);

  const long reps = 100000;
  const std::uint64_t seed = 404;
  const auto kernel = [&](long rep, std::span<double> out) {
    RandomStream stream = make_stream(seed, StreamPurpose::epsilon, rep);
    std::vector<double> ydag(n);
    for (int i = 0; i < n; ++i) ydag[i] = r1.x[i] + sigma_i[i] * stream.next_gaussian();
    const SequenceObservation obs(std::move(ydag), variances);
    const auto mask = threshold_select(obs, params).mask(n);
    for (int i = 0; i < n; ++i) {
      const double eta = obs.ydag[i] - r1.x[i];
      const double diff = eta * eta - r1.x[i] * r1.x[i];
      out[i] = mask[i] ? diff : 0.0;
      out[n + i] = mask[i] ? 0.0 : -diff;
    }
  };
  const VectorEstimate stats = mc_vector_mean(reps, 2 * n, 0, kernel);

  int failures = 0;
  for (int i = 0; i < n; ++i) {
    if (stats.mean[i] > bounds.selection[i] + 3.0 * stats.stderr_of_mean[i]) ++failures;
    if (stats.mean[n + i] > bounds.omission[i] + 3.0 * stats.stderr_of_mean[n + i]) ++failures;
  }
  detail = "4 coordinates x 2 bounds at 10^5 replications, " + std::to_string(failures) +
           " failures";
  return failures == 0;
}

// --------------------------------------------------------------------------
// 5. conditional oracle two-form equivalence on 10^4 random pairs
// --------------------------------------------------------------------------
bool criterion5(std::string& detail) {
  std::mt19937 gen(1005);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long coordinates = 0;
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + static_cast<int>(6 * unif(gen));
    const ProblemInstance inst = random_instance(gen, n);
    const double s = 0.01 + 0.3 * unif(gen);
    std::normal_distribution<double> noise(0.0, s);
    std::vector<double> xi(n);
    for (auto& v : xi) v = noise(gen);
    bool usable = true;
    for (int i = 0; i < n; ++i) {
      const double bhat = inst.system.spectrum()[i] + xi[i];
      if (bhat == 0.0 || bhat * bhat == xi[i] * xi[i] || inst.x[i] == 0.0) usable = false;
    }
    if (!usable) continue;  // documented degeneracies
    const ConditionalContext ctx(inst, xi, s, 1.0);
    const auto defining = conditional_oracle(ctx).mask(n);
    const auto form1 = conditional_oracle_form1(ctx).mask(n);
    const auto form2 = conditional_oracle_form2(ctx).mask(n);
    for (int i = 0; i < n; ++i) {
      ++coordinates;
      if (defining[i] != form1[i] || defining[i] != form2[i]) ++mismatches;
    }
  }
  detail = std::to_string(coordinates) + " coordinates compared, " +
           std::to_string(mismatches) + " mismatches";
  return mismatches == 0 && coordinates > 30000;
}

// --------------------------------------------------------------------------
// 6. conditional oracle inequality on R1 across 10 realized xi draws
// --------------------------------------------------------------------------
bool criterion6(std::string& detail) {
  const ProblemInstance r1 = make_r1();
  const double s = 0.05, alpha = 1.0, K = std::sqrt(1.0 / 3.0);
  const TailCertificate2 cert = default_certificate2(NoiseFamily::gaussian, 3.0, alpha);

  NoiseSpec xi_law;
  xi_law.family = NoiseFamily::gaussian;
  xi_law.scale = s;

  int failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int draw = 0; draw < 10; ++draw) {
    RandomStream stream = make_stream(600 + draw, StreamPurpose::xi, 0);
    const std::vector<double> xi = draw_noise(xi_law, r1.n(), stream);

    McConfig config = gaussian_config(10000, 600 + draw);
    XiConfig xc;
    xc.noise = xi_law;
    xc.alpha = alpha;
    xc.certificate = cert;
    xc.values = xi;
    config.xi = xc;

    const ConditionalContext ctx(r1, xi, s, alpha);
    const RiskEstimate lhs = estimate_risk("noisy-threshold", r1, config);
    const BoundReport report = conditional_oracle_inequality_bound(ctx, 3.0, K, cert, lhs.mean);
    const double margin = report.rhs - lhs.mean - 3.0 * lhs.stderr_of_mean;
    worst_margin = std::min(worst_margin, margin);
    if (margin < 0.0) ++failures;
  }
  std::ostringstream os;
  os << "10 xi draws, " << failures << " bound failures, worst margin = " << worst_margin;
  detail = os.str();
  return failures == 0;
}

// --------------------------------------------------------------------------
// 7. squared-noise truncation bound for Gaussian xi at n in {10, 100, 1000}
// --------------------------------------------------------------------------
bool criterion7(std::string& detail) {
  const double s = 0.05, betaprime = 3.0;
  const double Kprime = default_certificate2(NoiseFamily::gaussian, betaprime, 1.0).Kprime;
  const long draws = 1000000;

  NoiseSpec law;
  law.family = NoiseFamily::gaussian;
  law.scale = s;
  RandomStream stream = make_stream(700, StreamPurpose::xi_resample, 0);
  std::vector<double> squares(draws);
  for (long k = 0; k < draws; ++k) {
    const double v = draw_noise(law, 1, stream)[0];
    squares[k] = v * v;
  }

  int failures = 0;
  std::ostringstream os;
  for (int n : {10, 100, 1000}) {
    const double cap = s * s * betaprime * std::log(static_cast<double>(n));
    double sum = 0.0, sum2 = 0.0;
    for (double v : squares) {
      const double stat = v > cap ? v : 0.0;
      sum += stat;
      sum2 += stat * stat;
    }
    const double mean = sum / draws;
    const double sd = std::sqrt((sum2 - draws * mean * mean) / (draws - 1));
    const double se = sd / std::sqrt(static_cast<double>(draws));
    const double bound = Kprime * betaprime * s * s * (1.0 + std::log(static_cast<double>(n))) / n;
    if (mean > bound + 3.0 * se) ++failures;
    os << " n=" << n << ": " << mean << " <= " << bound << ";";
  }
  detail = "10^6 draws," + os.str() + " " + std::to_string(failures) + " failures";
  return failures == 0;
}

// --------------------------------------------------------------------------
// 8. non-monotonic advantage of the threshold selector over every cut-off
// --------------------------------------------------------------------------
bool criterion8(std::string& detail) {
  // sparse spike riding on the smallest eigenvalue, the R1 pattern
  OrderedJson spec;
  spec["n"] = 8;
  spec["sigma"] = 0.2;
  spec["spectrum"] = OrderedJson{{"law", "polynomial"}, {"p", 1.0}};
  spec["coefficients"] =
      OrderedJson{{"law", "sparse-spikes"}, {"count", 1}, {"amplitude", 6.0}, {"positions", {8}}};
  auto [instance, echo] = materialize_instance(spec, 1, "");
  (void)echo;

  const McConfig config = gaussian_config(10000, 808);
  const RiskEstimate threshold = estimate_risk("threshold(3)", instance, config);

  double best_cutoff = std::numeric_limits<double>::infinity();
  double best_stderr = 0.0;
  int best_k = -1;
  for (int k = 0; k <= instance.n(); ++k) {
    const RiskEstimate cut =
        estimate_risk("cutoff(" + std::to_string(k) + ")", instance, config);
    if (cut.mean < best_cutoff) {
      best_cutoff = cut.mean;
      best_stderr = cut.stderr_of_mean;
      best_k = k;
    }
  }

  const double gap = best_cutoff - threshold.mean;
  const double needed = 3.0 * (threshold.stderr_of_mean + best_stderr);
  std::ostringstream os;
  os << "threshold risk " << threshold.mean << " vs best cutoff(k=" << best_k << ") "
     << best_cutoff << ", gap " << gap << " > " << needed;
  detail = os.str();
  return gap > needed;
}

// --------------------------------------------------------------------------
// 9. byte-identical outputs at parallelism 1, 4 and 8
// --------------------------------------------------------------------------
bool criterion9(std::string& detail) {
  OrderedJson config;
  config["schema"] = "specfilter-config-v1";
  config["instance"] = OrderedJson{{"n", 4},
                                   {"b", {1.0, 0.5, 0.1, 0.01}},
                                   {"x", {1.0, 0.1, 2.0, 0.05}},
                                   {"sigma", 0.2}};
  config["noise"] = OrderedJson{{"family", "gaussian"}};
  config["xi"] = OrderedJson{{"family", "gaussian"}, {"s", 0.05}};
  config["estimators"] = {"cutoff(3)", "threshold(3)", "ure", "noisy-threshold"};
  config["replications"] = 2000;
  config["seed"] = 99;
  config["emit_plot_data"] = true;
  const CommandRequest request{"estimate", config, OrderedJson(), ""};

  std::vector<ArtifactSet> runs;
  for (const char* threads : {"1", "4", "8"}) {
    setenv("SPECFILTER_THREADS", threads, 1);
    runs.push_back(run_command(request));
  }
  unsetenv("SPECFILTER_THREADS");

  int differences = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].artifacts.size() != runs[0].artifacts.size()) {
      ++differences;
      continue;
    }
    for (std::size_t i = 0; i < runs[0].artifacts.size(); ++i) {
      if (runs[r].artifacts[i].name != runs[0].artifacts[i].name ||
          runs[r].artifacts[i].content != runs[0].artifacts[i].content)
        ++differences;
    }
  }
  detail = std::to_string(runs[0].artifacts.size()) + " artifacts x 3 thread counts, " +
           std::to_string(differences) + " byte differences";
  return differences == 0;
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"oracle equivalence vs exhaustive argmin", 10.0, criterion1},
      {"factor-2 comparison and closed forms", 5.0, criterion2},
      {"known-operator oracle inequality (Monte Carlo)", 120.0, criterion3},
      {"per-coordinate selection/omission bounds", 60.0, criterion4},
      {"conditional oracle two-form equivalence", 10.0, criterion5},
      {"conditional oracle inequality (Monte Carlo)", 180.0, criterion6},
      {"squared-noise truncation bound", 30.0, criterion7},
      {"non-monotonic advantage over spectral cut-off", 60.0, criterion8},
      {"byte-identical outputs at parallelism 1/4/8", 120.0, criterion9},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[k].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criteria[k].budget_seconds) {
      ok = false;
      detail += " [over budget]";
    }
    std::printf("%s  %zu. %s: %s [%.2fs / %.0fs]\n", ok ? "PASS" : "FAIL", k + 1,
                criteria[k].name, detail.c_str(), elapsed, criteria[k].budget_seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
