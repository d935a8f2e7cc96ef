#pragma once

// Built-in experiment registry. Each scenario is an ordinary YAML config;
// `mdlp list-scenarios --write DIR` exports them.

#include <string>
#include <vector>

#include "mdlp/config.hpp"

namespace mdlp {

struct Scenario {
  std::string name;
  std::string summary;
  std::string yaml;
};

const std::vector<Scenario>& builtin_scenarios();
const Scenario* find_scenario(const std::string& name);
// Throws ConfigError for unknown names.
ExperimentConfig scenario_config(const std::string& name);

}  // namespace mdlp
