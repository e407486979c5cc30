#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trpmbm/models.hpp"

namespace trpmbm {

enum class BirthType { kPoisson, kMultiBernoulli };

struct FilterSettings {
  int max_global_hypotheses = 100;
  double global_weight_threshold = 1e-4;
  double ppp_weight_threshold = 1e-4;
  double existence_threshold = 1e-4;
  /// Below this probability of being alive at the current step a branch is frozen.
  double alive_threshold = 1e-4;
  double estimate_threshold = 0.4;
  double gate_threshold = 15.0;
  int lscan = 5;
};

struct ScenarioConfig {
  /// Number of motion modes in use (1 survival + spawning modes). Extra entries of `motion`
  /// beyond this count are ignored.
  int modes = 3;
  std::vector<MotionMode> motion;
  MeasurementModel measurement;
  std::vector<BirthComponent> birth;
  BirthType birth_type = BirthType::kPoisson;
  int horizon = 100;
  FilterSettings filter;
  std::uint64_t seed = 1;

  std::vector<MotionMode> active_modes() const {
    return {motion.begin(), motion.begin() + std::min<std::ptrdiff_t>(modes, static_cast<std::ptrdiff_t>(motion.size()))};
  }
  GaussianTreeModel tree_model() const { return GaussianTreeModel(active_modes()); }
  int state_dim() const { return static_cast<int>(motion.front().transition.rows()); }
  double birth_rate() const;
};

/// Nearly constant velocity model with sampling period `tau` and noise intensity `q`.
MotionMode constant_velocity_mode(double tau, double q, double probability);

/// Two perpendicular spawning modes (left and right of the heading) with offset `distance`.
std::vector<MotionMode> perpendicular_spawn_modes(double tau, double q, double probability, double distance);

/// The default scenario: 600 x 400 m surveillance area, 100 steps, spawning to both sides.
ScenarioConfig default_scenario();

/// Violated invariants, one message each; empty means valid.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Parses the JSON scenario format. Missing fields keep their defaults. Throws ConfigError
/// with line or field diagnostics, or with the list of violated invariants.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// JSON rendering of a configuration; parse_scenario(scenario_to_json(c)) reproduces c.
std::string scenario_to_json(const ScenarioConfig& config);

}  // namespace trpmbm
