#include "eep/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  CLI::App app{"End-effector position estimation pipeline"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(eep::kToolVersion));

  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  bool list_keys = false;
  const std::map<std::string, std::string> about{
      {"calibrate", "refine camera poses from marker observations"},
      {"render", "render the synthetic ball-rig image corpus"},
      {"detect", "detect colored circles in the rendered frames"},
      {"track", "triangulate balls and solve end-effector poses"},
      {"simulate", "simulate robot states paired with position errors"},
      {"train", "train the position-error network"},
      {"estimate", "correct the reported positions of a state stream"},
      {"evaluate", "error statistics before and after correction"},
  };
  for (const auto& name : eep::subcommand_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("-c,--config", config_path, "key = value configuration file");
    sub->add_option("-o,--out", out_dir, "output directory (inputs are looked up here too)");
    sub->add_option("-s,--set", overrides, "override one key, key=value (repeatable)");
    sub->add_flag("--list-keys", list_keys, "print the configuration keys and defaults");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? eep::kExitOk : eep::kExitConfig;
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  if (list_keys) {
    for (const auto& k : eep::config_keys()) {
      std::cout << k.key << " = " << k.default_value << "    # " << k.help << "\n";
    }
    return eep::kExitOk;
  }

  eep::PipelineConfig cfg;
  try {
    if (!config_path.empty()) cfg = eep::PipelineConfig::load(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
  } catch (const eep::ConfigError& e) {
    std::cerr << "eep: error stage=" << stage << " kind=config code=" << eep::kExitConfig << " message=\"" << e.what()
              << "\"\n";
    return eep::kExitConfig;
  }
  return eep::run_subcommand(stage, cfg, out_dir, std::cout, std::cerr);
}
