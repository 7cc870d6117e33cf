#include "amelnav/rl/dqn.hpp"

#include <stdexcept>

#include "amelnav/io.hpp"
#include "amelnav/rl/losses.hpp"

namespace amelnav::rl {

namespace {

nn::MlpSpec q_spec(int feature_dim, int num_actions, const std::vector<int>& hidden) {
  std::vector<int> widths;
  widths.push_back(feature_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(num_actions);
  return nn::MlpSpec::dense(widths, nn::Activation::LeakyReLU, nn::Activation::None);
}

}  // namespace

DqnAgent::DqnAgent(AgentConfig cfg, int feature_dim, int num_actions,
                   std::uint64_t seed)
    : Agent(std::move(cfg), feature_dim, num_actions, seed) {
  const auto spec = q_spec(feature_dim, num_actions, cfg_.hidden);
  q_ = nn::Mlp(spec, rng_);
  q_target_ = q_;  // hard copy at start
  opt_ = nn::AdamState(spec, {.lr = cfg_.lr});
  grads_ = nn::ParamSet::zeros(spec);
}

double DqnAgent::epsilon() const {
  const double horizon = cfg_.eps_fraction * static_cast<double>(cfg_.total_steps);
  if (horizon <= 0) return cfg_.eps_end;
  const double frac = std::min(1.0, static_cast<double>(global_step_) / horizon);
  return cfg_.eps_start + frac * (cfg_.eps_end - cfg_.eps_start);
}

Eigen::VectorXd DqnAgent::select_action(const Eigen::VectorXd& features,
                                        ActionMode mode) {
  Eigen::VectorXd out(1);
  if (mode == ActionMode::Explore && rng_.uniform() < epsilon()) {
    out[0] = static_cast<double>(rng_.uniform_int(action_dim_));
    return out;
  }
  const Eigen::VectorXd q = q_.forward(features);
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  out[0] = static_cast<double>(best);
  return out;
}

UpdateStats DqnAgent::update(const Eigen::MatrixXd& feat,
                             const Eigen::MatrixXd& actions,
                             const Eigen::VectorXd& rewards,
                             const Eigen::MatrixXd& next_feat,
                             const Eigen::VectorXd& dones,
                             Eigen::MatrixXd* feature_grad) {
  const int batch = static_cast<int>(feat.cols());
  Eigen::VectorXi action_idx(batch);
  for (int i = 0; i < batch; ++i)
    action_idx[i] = static_cast<int>(actions(0, i));

  const Eigen::VectorXd y =
      dqn_target_values(q_target_, next_feat, rewards, dones, cfg_.gamma);

  grads_.set_zero();
  UpdateStats stats;
  stats.critic_loss = dqn_td_loss(q_, feat, action_idx, y, &grads_, feature_grad);
  opt_.step(q_.params(), grads_);

  if (global_step_ - last_target_sync_ >= cfg_.target_update_interval) {
    nn::polyak_update(q_target_.params(), q_.params(), 1.0);
    last_target_sync_ = global_step_;
  }
  return stats;
}

std::vector<const nn::Mlp*> DqnAgent::cost_models(CostPhase phase) const {
  if (phase == CostPhase::Evaluation) return {&q_};
  return {&q_, &q_target_};
}

void DqnAgent::save(std::ostream& os) const {
  q_.save(os);
  q_target_.save(os);
  opt_.save(os);
  io::write_i64(os, last_target_sync_);
  io::write_i64(os, global_step_);
  io::write_string(os, rng_.state());
}

void DqnAgent::load(std::istream& is) {
  q_ = nn::Mlp::load(is);
  q_target_ = nn::Mlp::load(is);
  opt_ = nn::AdamState::load(is);
  last_target_sync_ = io::read_i64(is);
  global_step_ = io::read_i64(is);
  std::string state = io::read_string(is);
  rng_.set_state(state);
  grads_ = nn::ParamSet::zeros(q_.spec());
}

}  // namespace amelnav::rl
