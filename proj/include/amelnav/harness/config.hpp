#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amelnav/rl/agent.hpp"
#include "amelnav/sim/types.hpp"
#include "amelnav/srl/amelpred.hpp"

namespace amelnav::harness {

struct ExperimentConfig {
  std::string algorithm = "td3";
  srl::SrlVariant srl_variant = srl::SrlVariant::None;
  std::int64_t total_steps = 450000;
  int steps_per_episode = 9000;
  std::vector<int> checkpoint_episodes = {5, 10, 20, 35, 50};
  int buffer_capacity = 1 << 16;
  int warmup_steps = 1 << 11;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "runs";
  bool checkpoint_include_buffer = true;

  sim::EnvConfig env;
  rl::AgentConfig agent;
  srl::SrlConfig srl;

  /// Method label used in paths and trial records: algorithm plus a variant
  /// suffix, e.g. "td3", "td3-sto", "dqn-det".
  std::string method_name() const;
  int num_episodes() const {
    return static_cast<int>(total_steps / steps_per_episode);
  }
  /// Checkpoint episodes that actually occur within total_steps.
  std::vector<int> reachable_checkpoints() const;
  void validate() const;
};

/// Build a fully defaulted config. Presets: "paper" (450K steps, 5 seeds)
/// and "desk" (90K steps, 3 seeds, TS observations).
ExperimentConfig make_config(const std::string& preset,
                             const std::string& algorithm,
                             const std::string& srl_variant);

/// Parse a JSON config file; fields not present keep preset defaults.
ExperimentConfig load_config_file(const std::string& path,
                                  const std::string& preset = "paper");
ExperimentConfig config_from_json_text(const std::string& text,
                                       const std::string& preset = "paper");
std::string config_to_json_text(const ExperimentConfig& cfg);
void save_config_file(const std::string& path, const ExperimentConfig& cfg);

std::uint64_t derive_seed(std::uint64_t base, int stream);

}  // namespace amelnav::harness
