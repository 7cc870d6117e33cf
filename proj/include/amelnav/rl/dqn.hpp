#pragma once

#include "amelnav/nn/adam.hpp"
#include "amelnav/rl/agent.hpp"

namespace amelnav::rl {

class DqnAgent : public Agent {
 public:
  DqnAgent(AgentConfig cfg, int feature_dim, int num_actions, std::uint64_t seed);

  bool discrete() const override { return true; }
  Eigen::VectorXd select_action(const Eigen::VectorXd& features,
                                ActionMode mode) override;
  UpdateStats update(const Eigen::MatrixXd& feat, const Eigen::MatrixXd& actions,
                     const Eigen::VectorXd& rewards,
                     const Eigen::MatrixXd& next_feat, const Eigen::VectorXd& dones,
                     Eigen::MatrixXd* feature_grad) override;
  std::vector<const nn::Mlp*> cost_models(CostPhase phase) const override;
  void save(std::ostream& os) const override;
  void load(std::istream& is) override;

  double epsilon() const;
  const nn::Mlp& q_net() const { return q_; }
  const nn::Mlp& q_target() const { return q_target_; }

 private:
  nn::Mlp q_, q_target_;
  nn::AdamState opt_;
  nn::ParamSet grads_;
  std::int64_t last_target_sync_ = 0;
};

}  // namespace amelnav::rl
