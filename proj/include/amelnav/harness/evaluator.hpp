#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "amelnav/harness/agent_stack.hpp"
#include "amelnav/harness/config.hpp"
#include "amelnav/metrics/metrics.hpp"
#include "amelnav/sim/env.hpp"

namespace amelnav::harness {

/// Exploit-mode controller driven by the evaluator.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void on_reset(std::uint64_t trial_seed) { (void)trial_seed; }
  /// Returns a normalized continuous action or a 1-element discrete index.
  virtual Eigen::VectorXd act(const Eigen::VectorXd& obs,
                              const sim::Environment& env) = 0;
  virtual bool discrete() const = 0;
};

/// Wraps a trained agent stack.
class StackPolicy : public Policy {
 public:
  explicit StackPolicy(AgentStack& stack) : stack_(stack) {}
  Eigen::VectorXd act(const Eigen::VectorXd& obs, const sim::Environment&) override {
    return stack_.act(obs, rl::ActionMode::Exploit);
  }
  bool discrete() const override { return stack_.discrete(); }

 private:
  AgentStack& stack_;
};

/// Scripted proportional navigation toward the goal ring; used as the
/// environment sanity oracle.
class OraclePolicy : public Policy {
 public:
  Eigen::VectorXd act(const Eigen::VectorXd& obs, const sim::Environment& env) override;
  bool discrete() const override { return false; }
};

/// Uniform random actions, reseeded per trial.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(bool discrete) : discrete_(discrete) {}
  void on_reset(std::uint64_t trial_seed) override {
    rng_ = RandomEngine(trial_seed ^ 0x5eedULL);
  }
  Eigen::VectorXd act(const Eigen::VectorXd& obs, const sim::Environment& env) override;
  bool discrete() const override { return discrete_; }

 private:
  bool discrete_;
  RandomEngine rng_{0};
};

struct EvalOptions {
  int trials_per_target = 10;
  std::string method = "policy";     // label written into the records
  std::uint64_t seed = 0;            // policy seed label + trial seed base
  int checkpoint_episode = 0;
  std::string trial_path;            // JSONL output; empty skips writing
  std::string trajectory_path;       // JSONL output; empty skips writing
};

/// Runs trials_per_target x 24 exploit-mode runs with fixed per-trial seeds
/// and returns (and optionally writes) the trial records.
std::vector<metrics::TrialRecord> evaluate_policy(Policy& policy,
                                                  const ExperimentConfig& cfg,
                                                  const EvalOptions& opts);

/// Straight-line distance from the start position to the nearest point of
/// the goal ring (the circle of radius D_g around the target at its height).
double shortest_path_to_goal(const sim::TargetSpec& target, const sim::EnvConfig& env);

}  // namespace amelnav::harness
