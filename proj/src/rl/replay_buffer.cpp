#include "quadrl/rl/replay_buffer.hpp"

#include <string>

#include "quadrl/common/errors.hpp"

namespace quadrl::rl {

template <typename T>
ReplayBuffer<T>::ReplayBuffer(std::size_t capacity, int observation_dim, int action_dim)
    : capacity_(capacity), observation_dim_(observation_dim), action_dim_(action_dim) {
  if (capacity == 0) throw ShapeMismatch("replay buffer capacity must be positive");
  const auto cap = static_cast<Eigen::Index>(capacity);
  observations_.setZero(observation_dim, cap);
  actions_.setZero(action_dim, cap);
  rewards_.setZero(1, cap);
  next_observations_.setZero(observation_dim, cap);
  dones_.setZero(1, cap);
}

template <typename T>
void ReplayBuffer<T>::push(const Transition& t) {
  if (t.action.size() != action_dim_)
    throw ShapeMismatch("transition action has " + std::to_string(t.action.size()) +
                        " components, buffer expects " + std::to_string(action_dim_));
  const auto c = static_cast<Eigen::Index>(cursor_);
  for (int i = 0; i < observation_dim_; ++i) {
    observations_(i, c) = static_cast<T>(t.observation[i]);
    next_observations_(i, c) = static_cast<T>(t.next_observation[i]);
  }
  actions_.col(c) = t.action.cast<T>();
  rewards_(0, c) = static_cast<T>(t.reward);
  dones_(0, c) = t.done ? T(1) : T(0);
  cursor_ = (cursor_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

template <typename T>
Batch<T> ReplayBuffer<T>::gather(const std::vector<std::size_t>& indices) const {
  const auto n = static_cast<Eigen::Index>(indices.size());
  Batch<T> b;
  b.observations.resize(observation_dim_, n);
  b.actions.resize(action_dim_, n);
  b.rewards.resize(1, n);
  b.next_observations.resize(observation_dim_, n);
  b.dones.resize(1, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(indices[k]);
    b.observations.col(k) = observations_.col(i);
    b.actions.col(k) = actions_.col(i);
    b.rewards(0, k) = rewards_(0, i);
    b.next_observations.col(k) = next_observations_.col(i);
    b.dones(0, k) = dones_(0, i);
  }
  return b;
}

template <typename T>
Batch<T> ReplayBuffer<T>::sample(std::size_t n, RandomSource& rng) const {
  if (size_ < n || size_ == 0)
    throw BufferTooSmall("replay buffer holds " + std::to_string(size_) +
                         " transitions, minibatch needs " + std::to_string(n));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.index(size_);
  return gather(idx);
}

template <typename T>
Transition ReplayBuffer<T>::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  const auto c = static_cast<Eigen::Index>((oldest + i) % capacity_);
  Transition t;
  for (int k = 0; k < observation_dim_; ++k) {
    t.observation[k] = static_cast<double>(observations_(k, c));
    t.next_observation[k] = static_cast<double>(next_observations_(k, c));
  }
  t.action = actions_.col(c).template cast<double>();
  t.reward = static_cast<double>(rewards_(0, c));
  t.done = dones_(0, c) != T(0);
  return t;
}

template class ReplayBuffer<float>;
template class ReplayBuffer<double>;

}  // namespace quadrl::rl
