#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "amelnav/harness/agent_stack.hpp"
#include "amelnav/harness/config.hpp"
#include "amelnav/rl/replay.hpp"
#include "amelnav/sim/env.hpp"

namespace amelnav::harness {

/// Directory layout of one training run.
struct RunPaths {
  std::string dir;        // <output_dir>/<method>/seed<k>
  std::string log;        // train_log.jsonl
  static RunPaths for_run(const ExperimentConfig& cfg, std::uint64_t seed);
  std::string checkpoint(int episode) const;
};

struct TrainResult {
  std::vector<std::string> checkpoints;
  std::string log_path;
  std::int64_t steps = 0;
};

/// Seeded training loop over 9K-step episodes with checkpointing at the
/// configured episode boundaries. Environment runs terminate and restart
/// independently of the episode chunking.
class Trainer {
 public:
  Trainer(const ExperimentConfig& cfg, std::uint64_t seed);

  /// Rebuild a trainer mid-run from a checkpoint that includes the replay
  /// buffer; continuing reproduces the uninterrupted run bit-exactly.
  static std::unique_ptr<Trainer> resume(const std::string& checkpoint_path);

  TrainResult run();

  /// Advance exactly n environment steps (no checkpoint writing).
  void train_steps(std::int64_t n);

  void save_checkpoint(const std::string& path) const;

  const AgentStack& stack() const { return *stack_; }
  AgentStack& stack() { return *stack_; }
  std::int64_t global_step() const { return step_; }
  const ExperimentConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Trainer(const ExperimentConfig& cfg, std::uint64_t seed, bool fresh);

  void advance_one();
  void append_run_log(const sim::StepResult& last);

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  sim::Environment env_;
  std::unique_ptr<AgentStack> stack_;
  rl::ReplayBuffer buffer_;
  RandomEngine sample_rng_;
  Eigen::VectorXd obs_;
  std::int64_t step_ = 0;
  std::int64_t run_index_ = 0;
  double run_reward_ = 0.0;
  std::int64_t run_steps_ = 0;
  std::string log_path_;
};

/// Checkpoint header + agent stack, enough to run evaluation.
struct LoadedCheckpoint {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  int episode = 0;
  std::int64_t global_step = 0;
  std::unique_ptr<AgentStack> stack;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

/// Scale a normalized continuous action (or a discrete index vector) to an
/// environment command.
sim::ActionCommand to_command(const Eigen::VectorXd& action, bool discrete);

}  // namespace amelnav::harness
