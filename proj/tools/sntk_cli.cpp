// Command-line front end.  Every command key is also a `--key` flag; values
// resolve as defaults < --config file < flags.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sntk/experiments.hpp"

namespace {

using sntk::ExperimentConfig;
namespace ex = sntk::experiments;

bool is_bool_key(const sntk::ParamSpec& spec) {
  return spec.default_value == "true" || spec.default_value == "false";
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::vector<std::string>> values;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-space NTK tools for recurrent networks near bifurcations"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);

  const std::map<std::string, std::string> descriptions = {
      {"normal-form-sweep", "mean sensitivity norm of a scalar normal form over a grid of g"},
      {"train", "train a student RNN against a planted or checkpointed teacher"},
      {"landscape", "kernel spectral norm and stable rank along directions around a checkpoint"},
      {"two-modes", "train against a teacher with two unstable eigenvalues and track both"},
      {"probe", "one-shot kernel summary at a checkpoint"},
  };
  std::map<std::string, Subcommand> subs;
  for (const auto& name : ex::command_names()) {
    Subcommand& sub = subs[name];
    const auto d = descriptions.find(name);
    sub.app = app.add_subcommand(name, d == descriptions.end() ? "" : d->second);
    sub.app->fallthrough();
    for (const auto& spec : ex::params_for(name)) {
      auto& slot = sub.values[spec.key];
      auto* opt = sub.app->add_option("--" + spec.key, slot, spec.help + " [default: " + spec.default_value + "]");
      if (spec.key == "teacher-eigs") {
        opt->expected(2);
      } else if (is_bool_key(spec)) {
        opt->expected(0, 1);
      } else {
        opt->expected(1);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return ex::kExitConfig;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    ExperimentConfig overrides;
    try {
      if (!config_path.empty()) overrides = ExperimentConfig::load(config_path);
    } catch (const sntk::ConfigError& e) {
      std::cerr << "sntk: " << e.what() << "\n";
      return ex::kExitConfig;
    }
    for (const auto& spec : ex::params_for(name)) {
      auto* opt = sub.app->get_option("--" + spec.key);
      if (opt->count() == 0) continue;
      const auto& vals = sub.values[spec.key];
      std::string joined;
      for (const auto& v : vals) joined += (joined.empty() ? "" : " ") + v;
      if (joined.empty() && is_bool_key(spec)) joined = "true";
      overrides.set(spec.key, joined);
    }
    const int code = ex::run_command(name, overrides);
    if (code == ex::kExitConfig) std::cerr << sub.app->help();
    return code;
  }
  return ex::kExitConfig;
}
