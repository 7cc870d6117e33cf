#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "amelnav/nn/cost.hpp"
#include "amelnav/nn/mlp.hpp"
#include "amelnav/rng.hpp"

namespace amelnav::rl {

enum class ActionMode { Explore, Exploit };
enum class CostPhase { Learning, Evaluation };

struct AgentConfig {
  std::string algorithm = "td3";  // dqn | td3 | sac
  double gamma = 0.99;
  double tau = 5e-3;             // online fraction of the Polyak mix
  int batch_size = 256;
  std::vector<int> hidden = {256, 256};
  int train_freq = 1;            // env steps between gradient updates
  std::int64_t total_steps = 450000;

  // DQN
  double lr = 1e-4;
  double eps_start = 1.0, eps_end = 0.05, eps_fraction = 0.1;
  int target_update_interval = 10000;

  // TD3 / SAC
  double lr_actor = 1e-3, lr_critic = 1e-3;
  double expl_noise = 0.1, target_noise = 0.2, noise_clip = 0.5;
  int policy_delay = 2;

  // SAC
  double lr_alpha = 3e-3;
  double target_entropy = -4.0;

  /// Library-default hyperparameters per algorithm; `with_srl` switches the
  /// TD3 widths to the SAC architecture.
  static AgentConfig defaults(const std::string& algorithm, bool with_srl);
  void validate() const;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  bool actor_updated = false;
};

/// Off-policy agent over a feature vector (raw observation or SRL latent).
/// Continuous actions are normalized to [-1, 1]^dim; discrete agents return
/// a single-element vector holding the action index.
class Agent {
 public:
  Agent(AgentConfig cfg, int feature_dim, int action_dim, std::uint64_t seed)
      : cfg_(std::move(cfg)), feature_dim_(feature_dim), action_dim_(action_dim),
        rng_(seed) {
    cfg_.validate();
  }
  virtual ~Agent() = default;

  virtual bool discrete() const = 0;

  virtual Eigen::VectorXd select_action(const Eigen::VectorXd& features,
                                        ActionMode mode) = 0;

  /// Uniform action over the action space (warmup phase).
  Eigen::VectorXd random_action();

  /// One gradient update on the given feature batch. When `feature_grad` is
  /// non-null it receives the critic-loss gradient w.r.t. the current
  /// features (actor losses never contribute, so a shared encoder only
  /// learns from the value function).
  virtual UpdateStats update(const Eigen::MatrixXd& feat,
                             const Eigen::MatrixXd& actions,
                             const Eigen::VectorXd& rewards,
                             const Eigen::MatrixXd& next_feat,
                             const Eigen::VectorXd& dones,
                             Eigen::MatrixXd* feature_grad) = 0;

  virtual std::vector<const nn::Mlp*> cost_models(CostPhase phase) const = 0;

  virtual void save(std::ostream& os) const = 0;
  virtual void load(std::istream& is) = 0;

  void set_global_step(std::int64_t t) { global_step_ = t; }
  std::int64_t global_step() const { return global_step_; }
  const AgentConfig& config() const { return cfg_; }
  int feature_dim() const { return feature_dim_; }
  int action_dim() const { return action_dim_; }
  RandomEngine& rng() { return rng_; }

 protected:
  AgentConfig cfg_;
  int feature_dim_;
  int action_dim_;  // discrete: number of actions
  std::int64_t global_step_ = 0;
  RandomEngine rng_;
};

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, int feature_dim,
                                  int action_dim, std::uint64_t seed);

}  // namespace amelnav::rl
