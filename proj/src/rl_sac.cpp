#include "amelnav/rl/sac.hpp"

#include "amelnav/io.hpp"
#include "amelnav/nn/gaussian.hpp"
#include "amelnav/rl/losses.hpp"

namespace amelnav::rl {

namespace {

nn::MlpSpec actor_spec(int feature_dim, int action_dim, const std::vector<int>& hidden) {
  std::vector<int> widths;
  widths.push_back(feature_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(2 * action_dim);
  return nn::MlpSpec::dense(widths, nn::Activation::LeakyReLU, nn::Activation::None,
                            false, nn::OutputHead::MeanAndLogStd);
}

nn::MlpSpec critic_spec(int feature_dim, int action_dim, const std::vector<int>& hidden) {
  std::vector<int> widths;
  widths.push_back(feature_dim + action_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return nn::MlpSpec::dense(widths, nn::Activation::LeakyReLU, nn::Activation::None);
}

}  // namespace

SacAgent::SacAgent(AgentConfig cfg, int feature_dim, int action_dim,
                   std::uint64_t seed)
    : Agent(std::move(cfg), feature_dim, action_dim, seed) {
  const auto a_spec = actor_spec(feature_dim, action_dim, cfg_.hidden);
  const auto c_spec = critic_spec(feature_dim, action_dim, cfg_.hidden);
  actor_ = nn::Mlp(a_spec, rng_);
  critic1_ = nn::Mlp(c_spec, rng_);
  critic2_ = nn::Mlp(c_spec, rng_);
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  opt_actor_ = nn::AdamState(a_spec, {.lr = cfg_.lr_actor});
  opt_critic1_ = nn::AdamState(c_spec, {.lr = cfg_.lr_critic});
  opt_critic2_ = nn::AdamState(c_spec, {.lr = cfg_.lr_critic});
  opt_alpha_.cfg.lr = cfg_.lr_alpha;
  actor_grads_ = nn::ParamSet::zeros(a_spec);
  critic1_grads_ = nn::ParamSet::zeros(c_spec);
  critic2_grads_ = nn::ParamSet::zeros(c_spec);
}

Eigen::VectorXd SacAgent::select_action(const Eigen::VectorXd& features,
                                        ActionMode mode) {
  const Eigen::VectorXd out = actor_.forward(features);
  const Eigen::VectorXd mu = out.head(action_dim_);
  if (mode == ActionMode::Exploit)
    return mu.array().tanh().matrix();
  const Eigen::VectorXd logstd = out.tail(action_dim_);
  Eigen::VectorXd noise(action_dim_);
  for (int i = 0; i < action_dim_; ++i) noise[i] = rng_.normal();
  const auto sample = nn::gaussian_sample_squashed(mu, logstd, noise);
  return sample.value;
}

UpdateStats SacAgent::update(const Eigen::MatrixXd& feat,
                             const Eigen::MatrixXd& actions,
                             const Eigen::VectorXd& rewards,
                             const Eigen::MatrixXd& next_feat,
                             const Eigen::VectorXd& dones,
                             Eigen::MatrixXd* feature_grad) {
  const int batch = static_cast<int>(feat.cols());
  UpdateStats stats;

  // Current-policy sample, shared by the alpha and actor losses.
  const Eigen::MatrixXd pi_noise = nn::normal_matrix(action_dim_, batch, rng_);

  // Entropy coefficient first, then critics and actor with the fresh value.
  {
    nn::MlpCache probe;
    const Eigen::MatrixXd out = actor_.forward(feat, &probe);
    const auto sb = nn::squashed_batch(out.topRows(action_dim_),
                                       out.bottomRows(action_dim_), pi_noise);
    const auto al = sac_alpha_loss(log_alpha_, sb.log_density.mean(),
                                   cfg_.target_entropy);
    stats.alpha_loss = al.loss;
    log_alpha_ = opt_alpha_.step(log_alpha_, al.grad);
  }
  const double alpha = std::exp(log_alpha_);
  stats.alpha = alpha;

  const Eigen::MatrixXd next_noise = nn::normal_matrix(action_dim_, batch, rng_);
  const Eigen::VectorXd y =
      sac_target_values(actor_, critic1_target_, critic2_target_, next_feat,
                        next_noise, rewards, dones, cfg_.gamma, alpha);

  critic1_grads_.set_zero();
  critic2_grads_.set_zero();
  stats.critic_loss =
      critic_pair_loss(critic1_, critic2_, feat, actions, y, 0.5,
                       &critic1_grads_, &critic2_grads_, feature_grad);
  opt_critic1_.step(critic1_.params(), critic1_grads_);
  opt_critic2_.step(critic2_.params(), critic2_grads_);

  actor_grads_.set_zero();
  const auto actor_out = sac_actor_loss(actor_, critic1_, critic2_, feat,
                                        pi_noise, alpha, &actor_grads_);
  stats.actor_loss = actor_out.loss;
  stats.actor_updated = true;
  opt_actor_.step(actor_.params(), actor_grads_);

  nn::polyak_update(critic1_target_.params(), critic1_.params(), cfg_.tau);
  nn::polyak_update(critic2_target_.params(), critic2_.params(), cfg_.tau);
  return stats;
}

std::vector<const nn::Mlp*> SacAgent::cost_models(CostPhase phase) const {
  if (phase == CostPhase::Evaluation) return {&actor_, &critic1_};
  return {&actor_, &critic1_, &critic2_, &critic1_target_, &critic2_target_};
}

void SacAgent::save(std::ostream& os) const {
  actor_.save(os);
  critic1_.save(os);
  critic2_.save(os);
  critic1_target_.save(os);
  critic2_target_.save(os);
  opt_actor_.save(os);
  opt_critic1_.save(os);
  opt_critic2_.save(os);
  io::write_f64(os, log_alpha_);
  io::write_f64(os, opt_alpha_.m);
  io::write_f64(os, opt_alpha_.v);
  io::write_i64(os, opt_alpha_.t);
  io::write_i64(os, global_step_);
  io::write_string(os, rng_.state());
}

void SacAgent::load(std::istream& is) {
  actor_ = nn::Mlp::load(is);
  critic1_ = nn::Mlp::load(is);
  critic2_ = nn::Mlp::load(is);
  critic1_target_ = nn::Mlp::load(is);
  critic2_target_ = nn::Mlp::load(is);
  opt_actor_ = nn::AdamState::load(is);
  opt_critic1_ = nn::AdamState::load(is);
  opt_critic2_ = nn::AdamState::load(is);
  log_alpha_ = io::read_f64(is);
  opt_alpha_.m = io::read_f64(is);
  opt_alpha_.v = io::read_f64(is);
  opt_alpha_.t = io::read_i64(is);
  global_step_ = io::read_i64(is);
  rng_.set_state(io::read_string(is));
  actor_grads_ = nn::ParamSet::zeros(actor_.spec());
  critic1_grads_ = nn::ParamSet::zeros(critic1_.spec());
  critic2_grads_ = nn::ParamSet::zeros(critic2_.spec());
}

}  // namespace amelnav::rl
