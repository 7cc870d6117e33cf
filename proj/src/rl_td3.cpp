#include "amelnav/rl/td3.hpp"

#include "amelnav/io.hpp"
#include "amelnav/nn/gaussian.hpp"
#include "amelnav/rl/losses.hpp"

namespace amelnav::rl {

namespace {

nn::MlpSpec actor_spec(int feature_dim, int action_dim, const std::vector<int>& hidden) {
  std::vector<int> widths;
  widths.push_back(feature_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(action_dim);
  return nn::MlpSpec::dense(widths, nn::Activation::LeakyReLU, nn::Activation::Tanh);
}

nn::MlpSpec critic_spec(int feature_dim, int action_dim, const std::vector<int>& hidden) {
  std::vector<int> widths;
  widths.push_back(feature_dim + action_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return nn::MlpSpec::dense(widths, nn::Activation::LeakyReLU, nn::Activation::None);
}

}  // namespace

Td3Agent::Td3Agent(AgentConfig cfg, int feature_dim, int action_dim,
                   std::uint64_t seed)
    : Agent(std::move(cfg), feature_dim, action_dim, seed) {
  const auto a_spec = actor_spec(feature_dim, action_dim, cfg_.hidden);
  const auto c_spec = critic_spec(feature_dim, action_dim, cfg_.hidden);
  actor_ = nn::Mlp(a_spec, rng_);
  critic1_ = nn::Mlp(c_spec, rng_);
  critic2_ = nn::Mlp(c_spec, rng_);
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  opt_actor_ = nn::AdamState(a_spec, {.lr = cfg_.lr_actor});
  opt_critic1_ = nn::AdamState(c_spec, {.lr = cfg_.lr_critic});
  opt_critic2_ = nn::AdamState(c_spec, {.lr = cfg_.lr_critic});
  actor_grads_ = nn::ParamSet::zeros(a_spec);
  critic1_grads_ = nn::ParamSet::zeros(c_spec);
  critic2_grads_ = nn::ParamSet::zeros(c_spec);
}

Eigen::VectorXd Td3Agent::select_action(const Eigen::VectorXd& features,
                                        ActionMode mode) {
  Eigen::VectorXd action = actor_.forward(features);
  if (mode == ActionMode::Explore) {
    for (Eigen::Index i = 0; i < action.size(); ++i)
      action[i] = clamp(action[i] + cfg_.expl_noise * rng_.normal(), -1.0, 1.0);
  }
  return action;
}

UpdateStats Td3Agent::update(const Eigen::MatrixXd& feat,
                             const Eigen::MatrixXd& actions,
                             const Eigen::VectorXd& rewards,
                             const Eigen::MatrixXd& next_feat,
                             const Eigen::VectorXd& dones,
                             Eigen::MatrixXd* feature_grad) {
  const int batch = static_cast<int>(feat.cols());
  const Eigen::MatrixXd smoothing =
      cfg_.target_noise * nn::normal_matrix(action_dim_, batch, rng_);
  const Eigen::VectorXd y = td3_target_values(
      actor_target_, critic1_target_, critic2_target_, next_feat, smoothing,
      rewards, dones, cfg_.gamma, cfg_.noise_clip);

  critic1_grads_.set_zero();
  critic2_grads_.set_zero();
  UpdateStats stats;
  stats.critic_loss =
      critic_pair_loss(critic1_, critic2_, feat, actions, y, 1.0,
                       &critic1_grads_, &critic2_grads_, feature_grad);
  opt_critic1_.step(critic1_.params(), critic1_grads_);
  opt_critic2_.step(critic2_.params(), critic2_grads_);

  ++update_count_;
  if (update_count_ % cfg_.policy_delay == 0) {
    actor_grads_.set_zero();
    stats.actor_loss = td3_actor_loss(actor_, critic1_, feat, &actor_grads_);
    opt_actor_.step(actor_.params(), actor_grads_);
    stats.actor_updated = true;

    nn::polyak_update(actor_target_.params(), actor_.params(), cfg_.tau);
    nn::polyak_update(critic1_target_.params(), critic1_.params(), cfg_.tau);
    nn::polyak_update(critic2_target_.params(), critic2_.params(), cfg_.tau);
  }
  return stats;
}

std::vector<const nn::Mlp*> Td3Agent::cost_models(CostPhase phase) const {
  if (phase == CostPhase::Evaluation) return {&actor_, &critic1_};
  return {&actor_, &actor_target_, &critic1_, &critic2_,
          &critic1_target_, &critic2_target_};
}

void Td3Agent::save(std::ostream& os) const {
  actor_.save(os);
  actor_target_.save(os);
  critic1_.save(os);
  critic2_.save(os);
  critic1_target_.save(os);
  critic2_target_.save(os);
  opt_actor_.save(os);
  opt_critic1_.save(os);
  opt_critic2_.save(os);
  io::write_i64(os, update_count_);
  io::write_i64(os, global_step_);
  io::write_string(os, rng_.state());
}

void Td3Agent::load(std::istream& is) {
  actor_ = nn::Mlp::load(is);
  actor_target_ = nn::Mlp::load(is);
  critic1_ = nn::Mlp::load(is);
  critic2_ = nn::Mlp::load(is);
  critic1_target_ = nn::Mlp::load(is);
  critic2_target_ = nn::Mlp::load(is);
  opt_actor_ = nn::AdamState::load(is);
  opt_critic1_ = nn::AdamState::load(is);
  opt_critic2_ = nn::AdamState::load(is);
  update_count_ = io::read_i64(is);
  global_step_ = io::read_i64(is);
  rng_.set_state(io::read_string(is));
  actor_grads_ = nn::ParamSet::zeros(actor_.spec());
  critic1_grads_ = nn::ParamSet::zeros(critic1_.spec());
  critic2_grads_ = nn::ParamSet::zeros(critic2_.spec());
}

}  // namespace amelnav::rl
