#include "amelnav/rl/replay.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "amelnav/io.hpp"

namespace amelnav::rl {

ReplayBuffer::ReplayBuffer(int capacity, int obs_dim, int action_dim)
    : capacity_(capacity), obs_dim_(obs_dim), action_dim_(action_dim) {
  if (capacity < 1 || obs_dim < 1 || action_dim < 1)
    throw std::invalid_argument("ReplayBuffer: bad dimensions");
  // Zero-filled so that serialization of unused slots is well defined.
  obs_ = Eigen::MatrixXd::Zero(obs_dim, capacity);
  actions_ = Eigen::MatrixXd::Zero(action_dim, capacity);
  next_obs_ = Eigen::MatrixXd::Zero(obs_dim, capacity);
  rewards_ = Eigen::VectorXd::Zero(capacity);
  dones_ = Eigen::VectorXd::Zero(capacity);
}

void ReplayBuffer::push(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                        double reward, const Eigen::VectorXd& next_obs,
                        bool terminal) {
  if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_ ||
      action.size() != action_dim_)
    throw std::invalid_argument("ReplayBuffer::push: dimension mismatch");
  if (!std::isfinite(reward))
    throw std::invalid_argument("ReplayBuffer::push: non-finite reward");
  obs_.col(head_) = obs;
  actions_.col(head_) = action;
  next_obs_.col(head_) = next_obs;
  rewards_[head_] = reward;
  dones_[head_] = terminal ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Batch ReplayBuffer::sample(int batch_size, RandomEngine& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  if (batch_size < 1) throw std::invalid_argument("ReplayBuffer::sample: bad batch size");
  Batch b;
  b.obs.resize(obs_dim_, batch_size);
  b.action.resize(action_dim_, batch_size);
  b.next_obs.resize(obs_dim_, batch_size);
  b.reward.resize(batch_size);
  b.done.resize(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const int idx = slot(rng.uniform_int(size_));
    b.obs.col(i) = obs_.col(idx);
    b.action.col(i) = actions_.col(idx);
    b.next_obs.col(i) = next_obs_.col(idx);
    b.reward[i] = rewards_[idx];
    b.done[i] = dones_[idx];
  }
  return b;
}

Eigen::VectorXd ReplayBuffer::obs_at(int i) const {
  if (i < 0 || i >= size_) throw std::out_of_range("ReplayBuffer::obs_at");
  return obs_.col(slot(i));
}

void ReplayBuffer::save(std::ostream& os) const {
  io::write_i64(os, capacity_);
  io::write_i64(os, obs_dim_);
  io::write_i64(os, action_dim_);
  io::write_i64(os, head_);
  io::write_i64(os, size_);
  io::write_matrix(os, obs_);
  io::write_matrix(os, actions_);
  io::write_matrix(os, next_obs_);
  io::write_vector(os, rewards_);
  io::write_vector(os, dones_);
}

ReplayBuffer ReplayBuffer::load(std::istream& is) {
  const int capacity = static_cast<int>(io::read_i64(is));
  const int obs_dim = static_cast<int>(io::read_i64(is));
  const int action_dim = static_cast<int>(io::read_i64(is));
  ReplayBuffer b(capacity, obs_dim, action_dim);
  b.head_ = static_cast<int>(io::read_i64(is));
  b.size_ = static_cast<int>(io::read_i64(is));
  b.obs_ = io::read_matrix(is);
  b.actions_ = io::read_matrix(is);
  b.next_obs_ = io::read_matrix(is);
  b.rewards_ = io::read_vector(is);
  b.dones_ = io::read_vector(is);
  return b;
}

}  // namespace amelnav::rl
