#pragma once

#include "specfilter/core/config.hpp"

namespace specfilter {

// One CLI subcommand invocation: a parsed config document, flag overrides to
// merge on top, and the directory against which relative instance paths
// resolve. Commands: estimate | oracle-report | check-bounds | noisy-op |
// certify-tails | gen-instance.
struct CommandRequest {
  std::string command;
  OrderedJson config;
  OrderedJson overrides = OrderedJson();
  std::string base_dir;
};

// Runs a command to completion and returns its output files; nothing touches
// disk until the caller writes the set, so partial results are never written.
ArtifactSet run_command(const CommandRequest& request);

OrderedJson bound_json(const BoundReport& report);

OrderedJson risk_decomposition_json(const RiskDecomposition& risk);

// one-based index list
OrderedJson model_json(const ModelSet& m);

}  // namespace specfilter
