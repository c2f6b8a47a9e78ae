#pragma once

#include <string>

#include "objrecon/objmap/scene.hpp"

namespace objrecon::io {

/// Full run configuration; every default is the shipping value. Parsed from
/// JSON with strict key checking (unknown keys are an error).
struct RunConfig {
  uint64_t seed = 0;
  objmap::MapperConfig mapper;
  objmap::LibraryUseConfig library;
  double mesh_resolution_m = 0.005;
  double cull_tau_m = 0.02;
  std::vector<double> eval_thresholds_m = {0.01, 0.005, 0.05};

  void validate() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& config);

}  // namespace objrecon::io
