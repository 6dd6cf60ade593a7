#include "rationeval/cli.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rationeval/attributes.hpp"
#include "rationeval/config.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/pipeline.hpp"

namespace rationeval::cli {

namespace {

const std::vector<std::string> kStages = {"filter", "judge",  "train", "shap",
                                          "elo",    "report", "all"};

void dispatch(const std::string& stage, const config::RunConfig& cfg,
              const std::optional<Attribute>& only) {
  if (stage == "filter") {
    pipeline::cmd_filter(cfg);
  } else if (stage == "judge") {
    pipeline::cmd_judge(cfg);
  } else if (stage == "train") {
    pipeline::cmd_train(cfg);
  } else if (stage == "shap") {
    pipeline::cmd_shap(cfg);
  } else if (stage == "elo") {
    pipeline::cmd_elo(cfg);
  } else if (stage == "report") {
    pipeline::cmd_report(cfg, only);
  } else if (stage == "all") {
    pipeline::cmd_all(cfg, only);
  } else {
    throw ConfigError("unknown stage: " + stage);
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"rationeval: rationale quality scoring, preference modeling and "
               "attribute leaderboards"};
  app.fallthrough();

  std::string config_path;
  std::string out;
  std::string stage = "all";
  std::vector<std::string> judges;
  std::string attribute_arg;
  std::uint64_t seed = 0;
  bool offline = false;

  app.add_option("--config", config_path, "Run config file (TOML)")->required();
  app.add_option("--out", out, "Output directory, overrides [output] dir");
  auto* stage_opt =
      app.add_option("--stage", stage, "Pipeline stage to run (default: all)")
          ->check(CLI::IsMember(kStages));
  app.add_option("--judges", judges, "Judge ids to keep on the panel")->delimiter(',');
  app.add_option("--attribute", attribute_arg,
                 "Restrict per-attribute report charts to one attribute");
  auto* seed_opt =
      app.add_option("--seed", seed, "Override the train, attribution and elo seeds");
  app.add_flag("--offline", offline, "Fail on judge-cache miss instead of calling out");

  std::string sub_stage;
  for (const std::string& name : kStages) {
    app.add_subcommand(name, "Run the " + name + " stage")
        ->callback([&sub_stage, name] { sub_stage = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!sub_stage.empty()) {
      if (stage_opt->count() > 0 && stage != sub_stage) {
        throw ConfigError("--stage " + stage + " conflicts with subcommand " + sub_stage);
      }
      stage = sub_stage;
    }

    config::Overrides overrides;
    if (!out.empty()) overrides.out_dir = out;
    if (!judges.empty()) overrides.judges = judges;
    if (seed_opt->count() > 0) overrides.seed = seed;
    overrides.offline = offline;

    std::optional<Attribute> only;
    if (!attribute_arg.empty()) {
      only = parse_attribute(attribute_arg);
      if (!only) throw ConfigError("unknown attribute: " + attribute_arg);
    }

    config::RunConfig cfg = config::load_run_config(config_path, overrides);
    dispatch(stage, cfg, only);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 5;
  }
}

}  // namespace rationeval::cli
