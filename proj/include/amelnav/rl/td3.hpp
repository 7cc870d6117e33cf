#pragma once

#include "amelnav/nn/adam.hpp"
#include "amelnav/rl/agent.hpp"

namespace amelnav::rl {

class Td3Agent : public Agent {
 public:
  Td3Agent(AgentConfig cfg, int feature_dim, int action_dim, std::uint64_t seed);

  bool discrete() const override { return false; }
  Eigen::VectorXd select_action(const Eigen::VectorXd& features,
                                ActionMode mode) override;
  UpdateStats update(const Eigen::MatrixXd& feat, const Eigen::MatrixXd& actions,
                     const Eigen::VectorXd& rewards,
                     const Eigen::MatrixXd& next_feat, const Eigen::VectorXd& dones,
                     Eigen::MatrixXd* feature_grad) override;
  std::vector<const nn::Mlp*> cost_models(CostPhase phase) const override;
  void save(std::ostream& os) const override;
  void load(std::istream& is) override;

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic1() const { return critic1_; }
  std::int64_t update_count() const { return update_count_; }

 private:
  nn::Mlp actor_, actor_target_;
  nn::Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  nn::AdamState opt_actor_, opt_critic1_, opt_critic2_;
  nn::ParamSet actor_grads_, critic1_grads_, critic2_grads_;
  std::int64_t update_count_ = 0;
};

}  // namespace amelnav::rl
