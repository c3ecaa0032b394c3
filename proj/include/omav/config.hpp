#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omav/sim.hpp"

namespace omav {

struct ZeroDynamicsSetup {
  Pose C = Pose::Identity();
  Vec6 q = Vec6::Zero();   // rad
  Vec6 qd = Vec6::Zero();  // rad/s
  double duration = 60.0;
  double dt = 1e-3;
  double sample_rate = 100.0;
};

/// Everything a TOML file can set. Angles are degrees in the file and
/// radians here.
struct Config {
  Scenario scenario;                    // params, gains and noise live here
  std::vector<std::uint64_t> seeds{1};  // one run per seed
  std::optional<ZeroDynamicsSetup> zero_dynamics;
  std::string output_dir = "out";
  std::string name = "run";
};

/// Throws ConfigError on syntax errors, unknown keys, wrong types and
/// gains that are not Hurwitz.
Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config(const std::string& path);

}  // namespace omav
