#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Core>

#include "amelnav/rng.hpp"

namespace amelnav::rl {

struct Batch {
  Eigen::MatrixXd obs;       // obs_dim x B
  Eigen::MatrixXd action;    // action_dim x B (discrete: 1 x B of indices)
  Eigen::VectorXd reward;    // B
  Eigen::MatrixXd next_obs;  // obs_dim x B
  Eigen::VectorXd done;      // B, 1.0 for terminal transitions

  int size() const { return static_cast<int>(reward.size()); }
};

/// Fixed-capacity ring of transitions with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, int obs_dim, int action_dim);

  void push(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
            double reward, const Eigen::VectorXd& next_obs, bool terminal);

  Batch sample(int batch_size, RandomEngine& rng) const;

  int size() const { return size_; }
  int capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }

  /// Transition at ring slot i in insertion order (oldest first).
  Eigen::VectorXd obs_at(int i) const;

  void save(std::ostream& os) const;
  static ReplayBuffer load(std::istream& is);

 private:
  int capacity_, obs_dim_, action_dim_;
  int head_ = 0, size_ = 0;
  Eigen::MatrixXd obs_, actions_, next_obs_;
  Eigen::VectorXd rewards_, dones_;

  int slot(int logical) const { return (head_ - size_ + logical + 2 * capacity_) % capacity_; }
};

}  // namespace amelnav::rl
