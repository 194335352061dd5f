#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specfilter/core/jsonio.hpp"
#include "specfilter/core/montecarlo.hpp"

namespace specfilter {

inline constexpr const char* kConfigSchema = "specfilter-config-v1";
inline constexpr const char* kInstanceSchema = "specfilter-instance-v1";

// A config document with defaults applied and the instance materialized to
// explicit vectors. `echo` is the effective-parameter document embedded in
// every report: no command changes a default silently.
struct ResolvedConfig {
  std::optional<ProblemInstance> instance;
  McConfig mc;                   // noise scale is bound to instance.sigma at use
  double K = 0.0;                // resolved tail envelope constant
  std::vector<std::string> estimator_ids;
  bool emit_plot_data = false;
  long tail_samples = 100000;
  OrderedJson echo;
};

// Shallow top-level merge of flag overrides into a config document.
OrderedJson merge_overrides(OrderedJson config, const OrderedJson& overrides);

// Parses and validates; unknown keys are errors, not warnings. `base_dir`
// resolves a string-valued "instance" (a path to an instance file).
// `need_instance` is set by commands that cannot run without one.
ResolvedConfig resolve_config(const OrderedJson& doc, const std::string& base_dir,
                              bool need_instance);

// Materializes an instance spec (explicit vectors or generator laws:
// spectrum "polynomial" b_i = i^-p; coefficients "polynomial",
// "permuted-polynomial", "sparse-spikes") into explicit (b, x, sigma).
// Returns the instance plus its echo document with provenance.
std::pair<ProblemInstance, OrderedJson> materialize_instance(const OrderedJson& spec,
                                                             std::uint64_t default_seed,
                                                             const std::string& base_dir);

}  // namespace specfilter
