#pragma once

#include <Eigen/Core>

#include "amelnav/nn/mlp.hpp"

namespace amelnav::rl {

// Loss/gradient kernels shared by the agents and by the gradient test
// oracles. All noise enters through explicit arguments so a loss value is a
// deterministic function of (parameters, batch, noise).

/// y = r + gamma * (1 - done) * max_a Q(s', a; target).
Eigen::VectorXd dqn_target_values(const nn::Mlp& q_target,
                                  const Eigen::MatrixXd& next_feat,
                                  const Eigen::VectorXd& rewards,
                                  const Eigen::VectorXd& dones, double gamma);

/// Squared TD error on the selected-action Q values, averaged over the
/// batch. Accumulates parameter gradients into *grads and dLoss/dfeatures
/// into *feature_grad when non-null.
double dqn_td_loss(const nn::Mlp& q, const Eigen::MatrixXd& feat,
                   const Eigen::VectorXi& actions, const Eigen::VectorXd& y,
                   nn::ParamSet* grads, Eigen::MatrixXd* feature_grad);

/// y = r + gamma * (1 - done) * min_i Q_target_i(s', clip(pi_target(s') +
/// clip(noise, +-noise_clip), +-1)). `noise` is pre-scaled by sigma'.
Eigen::VectorXd td3_target_values(const nn::Mlp& actor_target,
                                  const nn::Mlp& critic1_target,
                                  const nn::Mlp& critic2_target,
                                  const Eigen::MatrixXd& next_feat,
                                  const Eigen::MatrixXd& noise,
                                  const Eigen::VectorXd& rewards,
                                  const Eigen::VectorXd& dones, double gamma,
                                  double noise_clip);

/// scale * [mean((Q1 - y)^2) + mean((Q2 - y)^2)]; scale is 1 for the TD3
/// form and 1/2 for the SAC form.
double critic_pair_loss(const nn::Mlp& critic1, const nn::Mlp& critic2,
                        const Eigen::MatrixXd& feat,
                        const Eigen::MatrixXd& actions, const Eigen::VectorXd& y,
                        double scale, nn::ParamSet* grads1, nn::ParamSet* grads2,
                        Eigen::MatrixXd* feature_grad);

/// -mean Q1(s, pi(s)); gradients flow into the actor only.
double td3_actor_loss(const nn::Mlp& actor, const nn::Mlp& critic1,
                      const Eigen::MatrixXd& feat, nn::ParamSet* actor_grads);

/// y = r + gamma * (1 - done) * (min_j Q_target_j(s', a') - alpha * logpi'),
/// a' = tanh(mu' + sigma'.*noise) from the online actor.
Eigen::VectorXd sac_target_values(const nn::Mlp& actor,
                                  const nn::Mlp& critic1_target,
                                  const nn::Mlp& critic2_target,
                                  const Eigen::MatrixXd& next_feat,
                                  const Eigen::MatrixXd& noise,
                                  const Eigen::VectorXd& rewards,
                                  const Eigen::VectorXd& dones, double gamma,
                                  double alpha);

struct SacActorLoss {
  double loss = 0.0;
  double mean_log_density = 0.0;
};

/// mean(alpha * logpi(a|s) - min_j Q_j(s, a)) with a reparameterized through
/// tanh(mu + sigma.*noise). Gradients flow into the actor only.
SacActorLoss sac_actor_loss(const nn::Mlp& actor, const nn::Mlp& critic1,
                            const nn::Mlp& critic2, const Eigen::MatrixXd& feat,
                            const Eigen::MatrixXd& noise, double alpha,
                            nn::ParamSet* actor_grads);

/// Loss -log_alpha * (mean_logpi + target_entropy) and its derivative in
/// log_alpha.
struct AlphaLoss {
  double loss = 0.0;
  double grad = 0.0;
};
AlphaLoss sac_alpha_loss(double log_alpha, double mean_log_density,
                         double target_entropy);

}  // namespace amelnav::rl
