#include "amelnav/rl/losses.hpp"

#include <stdexcept>

#include "amelnav/nn/gaussian.hpp"

namespace amelnav::rl {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

MatrixXd vstack(const MatrixXd& top, const MatrixXd& bottom) {
  MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace

VectorXd dqn_target_values(const nn::Mlp& q_target, const MatrixXd& next_feat,
                           const VectorXd& rewards, const VectorXd& dones,
                           double gamma) {
  const MatrixXd q_next = q_target.forward(next_feat);
  const VectorXd max_q = q_next.colwise().maxCoeff().transpose();
  return rewards.array() + gamma * (1.0 - dones.array()) * max_q.array();
}

double dqn_td_loss(const nn::Mlp& q, const MatrixXd& feat, const VectorXi& actions,
                   const VectorXd& y, nn::ParamSet* grads,
                   MatrixXd* feature_grad) {
  const int batch = static_cast<int>(feat.cols());
  if (actions.size() != batch || y.size() != batch)
    throw std::invalid_argument("dqn_td_loss: batch size mismatch");

  nn::MlpCache cache;
  const MatrixXd q_all = q.forward(feat, &cache);

  double loss = 0.0;
  MatrixXd d_out = MatrixXd::Zero(q_all.rows(), batch);
  for (int i = 0; i < batch; ++i) {
    const int a = actions[i];
    if (a < 0 || a >= q_all.rows())
      throw std::out_of_range("dqn_td_loss: action index out of range");
    const double err = q_all(a, i) - y[i];
    loss += err * err;
    d_out(a, i) = 2.0 * err / batch;
  }
  loss /= batch;

  const MatrixXd d_in = q.backward(cache, d_out, grads);
  if (feature_grad) *feature_grad += d_in;
  return loss;
}

VectorXd td3_target_values(const nn::Mlp& actor_target,
                           const nn::Mlp& critic1_target,
                           const nn::Mlp& critic2_target,
                           const MatrixXd& next_feat, const MatrixXd& noise,
                           const VectorXd& rewards, const VectorXd& dones,
                           double gamma, double noise_clip) {
  MatrixXd a_next = actor_target.forward(next_feat);
  const MatrixXd clipped_noise =
      noise.array().min(noise_clip).max(-noise_clip).matrix();
  a_next = (a_next + clipped_noise).array().min(1.0).max(-1.0).matrix();

  const MatrixXd in = vstack(next_feat, a_next);
  const VectorXd q1 = critic1_target.forward(in).transpose();
  const VectorXd q2 = critic2_target.forward(in).transpose();
  const VectorXd q_min = q1.cwiseMin(q2);
  return rewards.array() + gamma * (1.0 - dones.array()) * q_min.array();
}

double critic_pair_loss(const nn::Mlp& critic1, const nn::Mlp& critic2,
                        const MatrixXd& feat, const MatrixXd& actions,
                        const VectorXd& y, double scale, nn::ParamSet* grads1,
                        nn::ParamSet* grads2, MatrixXd* feature_grad) {
  const int batch = static_cast<int>(feat.cols());
  const MatrixXd in = vstack(feat, actions);

  double loss = 0.0;
  const nn::Mlp* critics[2] = {&critic1, &critic2};
  nn::ParamSet* grads[2] = {grads1, grads2};
  for (int k = 0; k < 2; ++k) {
    nn::MlpCache cache;
    const VectorXd q = critics[k]->forward(in, &cache).transpose();
    const VectorXd err = q - y;
    loss += scale * err.squaredNorm() / batch;
    MatrixXd d_out = (scale * 2.0 / batch) * err.transpose();
    const MatrixXd d_in = critics[k]->backward(cache, d_out, grads[k]);
    if (feature_grad) *feature_grad += d_in.topRows(feat.rows());
  }
  return loss;
}

double td3_actor_loss(const nn::Mlp& actor, const nn::Mlp& critic1,
                      const MatrixXd& feat, nn::ParamSet* actor_grads) {
  const int batch = static_cast<int>(feat.cols());
  nn::MlpCache actor_cache, critic_cache;
  const MatrixXd action = actor.forward(feat, &actor_cache);
  const MatrixXd in = vstack(feat, action);
  const VectorXd q = critic1.forward(in, &critic_cache).transpose();

  MatrixXd d_q(1, batch);
  d_q.setConstant(-1.0 / batch);
  const MatrixXd d_in = critic1.backward(critic_cache, d_q, nullptr);
  actor.backward(actor_cache, d_in.bottomRows(action.rows()), actor_grads);
  return -q.mean();
}

VectorXd sac_target_values(const nn::Mlp& actor, const nn::Mlp& critic1_target,
                           const nn::Mlp& critic2_target,
                           const MatrixXd& next_feat, const MatrixXd& noise,
                           const VectorXd& rewards, const VectorXd& dones,
                           double gamma, double alpha) {
  const MatrixXd out = actor.forward(next_feat);
  const int action_dim = static_cast<int>(out.rows()) / 2;
  const nn::SquashedBatch sb = nn::squashed_batch(
      out.topRows(action_dim), out.bottomRows(action_dim), noise);

  const MatrixXd in = vstack(next_feat, sb.action);
  const VectorXd q1 = critic1_target.forward(in).transpose();
  const VectorXd q2 = critic2_target.forward(in).transpose();
  const VectorXd q_min = q1.cwiseMin(q2);
  return rewards.array() +
         gamma * (1.0 - dones.array()) *
             (q_min.array() - alpha * sb.log_density.array());
}

SacActorLoss sac_actor_loss(const nn::Mlp& actor, const nn::Mlp& critic1,
                            const nn::Mlp& critic2, const MatrixXd& feat,
                            const MatrixXd& noise, double alpha,
                            nn::ParamSet* actor_grads) {
  const int batch = static_cast<int>(feat.cols());
  nn::MlpCache actor_cache;
  const MatrixXd out = actor.forward(feat, &actor_cache);
  const int action_dim = static_cast<int>(out.rows()) / 2;
  const nn::SquashedBatch sb = nn::squashed_batch(
      out.topRows(action_dim), out.bottomRows(action_dim), noise);

  const MatrixXd in = vstack(feat, sb.action);
  nn::MlpCache c1_cache, c2_cache;
  const VectorXd q1 = critic1.forward(in, &c1_cache).transpose();
  const VectorXd q2 = critic2.forward(in, &c2_cache).transpose();

  SacActorLoss result;
  result.mean_log_density = sb.log_density.mean();
  result.loss = alpha * result.mean_log_density - q1.cwiseMin(q2).mean();

  // Route -1/B through whichever critic realizes the minimum per sample
  // (ties go to critic 1).
  MatrixXd d_q1 = MatrixXd::Zero(1, batch);
  MatrixXd d_q2 = MatrixXd::Zero(1, batch);
  for (int i = 0; i < batch; ++i) {
    if (q1[i] <= q2[i])
      d_q1(0, i) = -1.0 / batch;
    else
      d_q2(0, i) = -1.0 / batch;
  }
  const MatrixXd d_in1 = critic1.backward(c1_cache, d_q1, nullptr);
  const MatrixXd d_in2 = critic2.backward(c2_cache, d_q2, nullptr);
  const MatrixXd d_action =
      d_in1.bottomRows(action_dim) + d_in2.bottomRows(action_dim);

  // d(tanh(u))/du = 1 - action^2; du/dmu = 1; du/dlogstd = sigma.*noise.
  // dlogpi/dmu = 2*tanh(u); dlogpi/dlogstd = -1 + 2*tanh(u).*(sigma.*noise).
  const Eigen::ArrayXXd one_minus_a2 = 1.0 - sb.action.array().square();
  const Eigen::ArrayXXd du_dlogstd = sb.sigma.array() * noise.array();
  const double inv_b = 1.0 / batch;

  MatrixXd d_mu = (alpha * inv_b * 2.0 * sb.action.array() +
                   d_action.array() * one_minus_a2)
                      .matrix();
  MatrixXd d_logstd =
      ((alpha * inv_b * (2.0 * sb.action.array() * du_dlogstd - 1.0) +
        d_action.array() * one_minus_a2 * du_dlogstd) *
       sb.clamp_mask.array())
          .matrix();

  MatrixXd d_out(out.rows(), batch);
  d_out.topRows(action_dim) = d_mu;
  d_out.bottomRows(action_dim) = d_logstd;
  actor.backward(actor_cache, d_out, actor_grads);
  return result;
}

AlphaLoss sac_alpha_loss(double log_alpha, double mean_log_density,
                         double target_entropy) {
  AlphaLoss a;
  a.loss = -log_alpha * (mean_log_density + target_entropy);
  a.grad = -(mean_log_density + target_entropy);
  return a;
}

}  // namespace amelnav::rl
