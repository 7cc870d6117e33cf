#pragma once

#include <memory>

#include "amelnav/harness/config.hpp"
#include "amelnav/rl/agent.hpp"
#include "amelnav/rl/replay.hpp"
#include "amelnav/srl/amelpred.hpp"

namespace amelnav::harness {

/// Policy + optional representation module behind one surface. Raw
/// observations go in; normalized actions come out. With a representation
/// attached, the latent code is computed once per update and shared by the
/// value loss and the prediction loss.
class AgentStack {
 public:
  AgentStack(const ExperimentConfig& cfg, std::uint64_t seed);

  bool discrete() const { return agent_->discrete(); }
  int action_dim() const { return agent_->action_dim(); }
  int observation_dim() const { return obs_dim_; }

  Eigen::VectorXd act(const Eigen::VectorXd& obs, rl::ActionMode mode);
  Eigen::VectorXd random_action() { return agent_->random_action(); }

  struct StackStats {
    rl::UpdateStats agent;
    double srl_loss = 0.0;
  };
  StackStats update(const rl::Batch& batch);

  void set_global_step(std::int64_t t) { agent_->set_global_step(t); }

  nn::CostReport cost(rl::CostPhase phase) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);

  rl::Agent& agent() { return *agent_; }
  const rl::Agent& agent() const { return *agent_; }
  srl::AmelPred* srl() { return srl_.get(); }
  const srl::AmelPred* srl() const { return srl_.get(); }

 private:
  int obs_dim_;
  std::unique_ptr<rl::Agent> agent_;
  std::unique_ptr<srl::AmelPred> srl_;
};

}  // namespace amelnav::harness
