#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "quadrl/common/random.hpp"
#include "quadrl/env/quad_env.hpp"
#include "quadrl/nn/mlp.hpp"

namespace quadrl::rl {

struct Transition {
  env::Observation observation{};
  Eigen::VectorXd action;  // raw network action in [-1, 1]
  double reward = 0.0;
  env::Observation next_observation{};
  bool done = false;  // true only for physical failures; timeouts bootstrap
};

/// Column-wise minibatch: one transition per column.
template <typename T>
struct Batch {
  nn::Matrix<T> observations;
  nn::Matrix<T> actions;
  nn::Matrix<T> rewards;  // 1 x N
  nn::Matrix<T> next_observations;
  nn::Matrix<T> dones;    // 1 x N, 0 or 1

  Eigen::Index size() const { return observations.cols(); }
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
template <typename T>
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int observation_dim, int action_dim);

  void push(const Transition& t);

  /// N indices drawn uniformly with replacement. Throws BufferTooSmall if size < N.
  Batch<T> sample(std::size_t n, RandomSource& rng) const;
  Batch<T> gather(const std::vector<std::size_t>& indices) const;

  /// i-th oldest stored transition.
  Transition at(std::size_t i) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int action_dim() const { return action_dim_; }

 private:
  std::size_t capacity_;
  int observation_dim_;
  int action_dim_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  nn::Matrix<T> observations_;
  nn::Matrix<T> actions_;
  nn::Matrix<T> rewards_;
  nn::Matrix<T> next_observations_;
  nn::Matrix<T> dones_;
};

extern template class ReplayBuffer<float>;
extern template class ReplayBuffer<double>;

}  // namespace quadrl::rl
