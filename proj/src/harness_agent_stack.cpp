#include "amelnav/harness/agent_stack.hpp"

#include "amelnav/sim/env.hpp"

namespace amelnav::harness {

AgentStack::AgentStack(const ExperimentConfig& cfg, std::uint64_t seed)
    : obs_dim_(sim::observation_dim(cfg.env.observation_mode)) {
  const bool discrete = cfg.algorithm == "dqn";
  const int action_dim = discrete ? sim::kNumDiscreteActions : 4;
  const bool with_srl = cfg.srl_variant != srl::SrlVariant::None;

  const int feature_dim = with_srl ? cfg.srl.latent_dim : obs_dim_;
  agent_ = rl::make_agent(cfg.agent, feature_dim, action_dim, derive_seed(seed, 1));
  if (with_srl) {
    srl_ = std::make_unique<srl::AmelPred>(cfg.srl, obs_dim_, action_dim,
                                           derive_seed(seed, 2));
  }
}

Eigen::VectorXd AgentStack::act(const Eigen::VectorXd& obs, rl::ActionMode mode) {
  if (!srl_) return agent_->select_action(obs, mode);
  const Eigen::VectorXd z = srl_->encode(obs, mode == rl::ActionMode::Exploit);
  return agent_->select_action(z, mode);
}

AgentStack::StackStats AgentStack::update(const rl::Batch& batch) {
  StackStats stats;
  if (!srl_) {
    stats.agent = agent_->update(batch.obs, batch.action, batch.reward,
                                 batch.next_obs, batch.done, nullptr);
    return stats;
  }

  // One shared encoding per update; next observations are encoded in
  // training mode as well (the bootstrap target sees a sampled code for the
  // stochastic variant).
  srl::EncodeResult enc = srl_->encode_train(batch.obs);
  const srl::EncodeResult enc_next = srl_->encode_train(batch.next_obs);

  Eigen::MatrixXd critic_grad_z =
      Eigen::MatrixXd::Zero(srl_->latent_dim(), batch.size());
  stats.agent = agent_->update(enc.z, batch.action, batch.reward, enc_next.z,
                               batch.done, &critic_grad_z);

  const Eigen::MatrixXd action_input =
      agent_->discrete()
          ? srl::one_hot_actions(batch.action, agent_->action_dim())
          : batch.action;
  stats.srl_loss =
      srl_->update(enc, action_input, batch.next_obs, critic_grad_z).srl_loss;
  return stats;
}

nn::CostReport AgentStack::cost(rl::CostPhase phase) const {
  auto models = agent_->cost_models(phase);
  if (srl_) {
    const auto srl_models = srl_->cost_models(phase == rl::CostPhase::Learning);
    models.insert(models.end(), srl_models.begin(), srl_models.end());
  }
  return nn::count_cost(models);
}

void AgentStack::save(std::ostream& os) const {
  agent_->save(os);
  if (srl_) srl_->save(os);
}

void AgentStack::load(std::istream& is) {
  agent_->load(is);
  if (srl_) srl_->load(is);
}

}  // namespace amelnav::harness
