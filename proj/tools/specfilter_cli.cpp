// specfilter command-line front-end. Everything substantive happens behind
// the C API of libspecfilter; this binary parses flags, loads the config
// file, forwards overrides and writes the returned artifacts.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "specfilter/specfilter.h"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  long replications = 0;
  double beta = 0.0;
  double alpha = 0.0;
  bool strict = false;
  bool emit_plot_data = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions* opt) {
  cmd->add_option("--config", opt->config_path, "config JSON file");
  cmd->add_option("--out", opt->out_dir, "output directory (default: out)");
  cmd->add_option("--seed", opt->seed, "random seed override");
  cmd->add_option("--replications", opt->replications, "replication count override");
  cmd->add_option("--beta", opt->beta, "threshold constant beta override");
  cmd->add_option("--alpha", opt->alpha, "eigenvalue-gate constant alpha override");
  cmd->add_flag("--strict", opt->strict, "exit 2 when a bound or certificate fails");
  cmd->add_flag("--emit-plot-data", opt->emit_plot_data,
                "write cut-off and estimator risk tables (estimate only)");
}

int run(const std::string& command, const CLI::App* cmd, const CommonOptions& opt) {
  if (opt.config_path.empty()) {
    std::fprintf(stderr, "error: --config is required\n");
    return 1;
  }
  std::ifstream in(opt.config_path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config file '%s'\n", opt.config_path.c_str());
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string config_text = buf.str();

  nlohmann::json overrides = nlohmann::json::object();
  if (cmd->count("--seed")) overrides["seed"] = opt.seed;
  if (cmd->count("--replications")) overrides["replications"] = opt.replications;
  if (cmd->count("--beta")) overrides["beta"] = opt.beta;
  if (cmd->count("--alpha")) overrides["alpha"] = opt.alpha;
  if (cmd->count("--emit-plot-data")) overrides["emit_plot_data"] = true;
  const std::string overrides_text = overrides.dump();

  // relative instance paths resolve against the config file's directory
  std::string base_dir = ".";
  const auto slash = opt.config_path.find_last_of('/');
  if (slash != std::string::npos) base_dir = opt.config_path.substr(0, slash);

  sf_artifacts* artifacts = nullptr;
  const sf_status status = sf_cmd_run(command.c_str(), config_text.c_str(),
                                      overrides_text.c_str(), base_dir.c_str(), &artifacts);
  if (status != SF_OK) {
    std::fprintf(stderr, "error (%s): %s\n", sf_status_name(status), sf_last_error());
    return status == SF_ERR_CERTIFICATE_VIOLATED ? 2 : 1;
  }

  const sf_status write_status = sf_artifacts_write(artifacts, opt.out_dir.c_str());
  if (write_status != SF_OK) {
    std::fprintf(stderr, "error (%s): %s\n", sf_status_name(write_status), sf_last_error());
    sf_artifacts_free(artifacts);
    return 1;
  }
  for (size_t i = 0; i < sf_artifacts_count(artifacts); ++i)
    std::printf("wrote %s/%s\n", opt.out_dir.c_str(), sf_artifacts_name(artifacts, i));
  std::printf("wrote %s/manifest.json\n", opt.out_dir.c_str());

  const bool satisfied = sf_artifacts_all_satisfied(artifacts) != 0;
  sf_artifacts_free(artifacts);
  if (!satisfied) {
    std::printf("note: one or more bound reports or certificates did not hold\n");
    if (opt.strict) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specfilter — threshold regularization for discrete ill-posed inverse problems"};
  app.require_subcommand(1);

  static const struct {
    const char* name;
    const char* help;
  } kCommands[] = {
      {"estimate", "Monte Carlo risk table for the configured estimators"},
      {"oracle-report", "exact oracle model/filter risks and the factor-2 check"},
      {"check-bounds", "oracle-inequality and per-coordinate bound reports"},
      {"noisy-op", "noisy-operator (conditional) report: oracle forms, selector, bounds"},
      {"certify-tails", "empirical check of the claimed tail certificates"},
      {"gen-instance", "materialize an instance spec into an explicit instance file"},
  };

  std::vector<std::pair<CLI::App*, CommonOptions>> commands;
  commands.reserve(std::size(kCommands));
  for (const auto& c : kCommands) {
    CLI::App* cmd = app.add_subcommand(c.name, c.help);
    commands.emplace_back(cmd, CommonOptions{});
  }
  for (auto& [cmd, opt] : commands) add_common_flags(cmd, &opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& [cmd, opt] : commands)
    if (cmd->parsed()) return run(cmd->get_name(), cmd, opt);
  return 1;
}
