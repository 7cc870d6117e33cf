#pragma once

#include "amelnav/nn/adam.hpp"
#include "amelnav/rl/agent.hpp"

namespace amelnav::rl {

class SacAgent : public Agent {
 public:
  SacAgent(AgentConfig cfg, int feature_dim, int action_dim, std::uint64_t seed);

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

  double alpha() const { return std::exp(log_alpha_); }
  const nn::Mlp& actor() const { return actor_; }

 private:
  nn::Mlp actor_;  // mean/logstd head; no target actor in SAC
  nn::Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  nn::AdamState opt_actor_, opt_critic1_, opt_critic2_;
  nn::ScalarAdam opt_alpha_;
  nn::ParamSet actor_grads_, critic1_grads_, critic2_grads_;
  double log_alpha_ = 0.0;
};

}  // namespace amelnav::rl
