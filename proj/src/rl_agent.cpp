#include "amelnav/rl/agent.hpp"

#include <stdexcept>

#include "amelnav/rl/dqn.hpp"
#include "amelnav/rl/sac.hpp"
#include "amelnav/rl/td3.hpp"

namespace amelnav::rl {

AgentConfig AgentConfig::defaults(const std::string& algorithm, bool with_srl) {
  AgentConfig cfg;
  cfg.algorithm = algorithm;
  if (algorithm == "dqn") {
    cfg.hidden = {64, 64};
    cfg.lr = 1e-4;
    cfg.batch_size = 32;
    cfg.train_freq = 4;
    cfg.tau = 1.0;
  } else if (algorithm == "td3") {
    cfg.hidden = with_srl ? std::vector<int>{256, 256} : std::vector<int>{400, 300};
    cfg.lr_actor = cfg.lr_critic = 1e-3;
    cfg.batch_size = 256;
    cfg.train_freq = 1;
  } else if (algorithm == "sac") {
    cfg.hidden = {256, 256};
    cfg.lr_actor = cfg.lr_critic = cfg.lr_alpha = 3e-3;
    cfg.batch_size = 256;
    cfg.train_freq = 1;
  } else {
    throw std::invalid_argument("unknown algorithm: " + algorithm);
  }
  return cfg;
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("AgentConfig: gamma in (0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("AgentConfig: tau in (0, 1]");
  if (batch_size < 1) throw std::invalid_argument("AgentConfig: batch size >= 1");
  if (train_freq < 1) throw std::invalid_argument("AgentConfig: train_freq >= 1");
  if (policy_delay < 1) throw std::invalid_argument("AgentConfig: policy_delay >= 1");
}

Eigen::VectorXd Agent::random_action() {
  if (discrete()) {
    Eigen::VectorXd a(1);
    a[0] = static_cast<double>(rng_.uniform_int(action_dim_));
    return a;
  }
  Eigen::VectorXd a(action_dim_);
  for (int i = 0; i < action_dim_; ++i) a[i] = rng_.uniform(-1.0, 1.0);
  return a;
}

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, int feature_dim,
                                  int action_dim, std::uint64_t seed) {
  if (cfg.algorithm == "dqn")
    return std::make_unique<DqnAgent>(cfg, feature_dim, action_dim, seed);
  if (cfg.algorithm == "td3")
    return std::make_unique<Td3Agent>(cfg, feature_dim, action_dim, seed);
  if (cfg.algorithm == "sac")
    return std::make_unique<SacAgent>(cfg, feature_dim, action_dim, seed);
  throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);
}

}  // namespace amelnav::rl
