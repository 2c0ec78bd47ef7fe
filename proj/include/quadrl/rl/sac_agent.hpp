#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "quadrl/common/random.hpp"
#include "quadrl/env/quad_env.hpp"
#include "quadrl/nn/adam.hpp"
#include "quadrl/nn/mlp.hpp"
#include "quadrl/rl/replay_buffer.hpp"

namespace quadrl::rl {

struct SacConfig {
  double learning_rate = 7e-4;  // actor, critics and temperature
  std::size_t buffer_capacity = 1'000'000;
  std::size_t learning_starts = 10'000;
  std::size_t batch_size = 256;
  double tau = 0.005;
  double gamma = 0.99;
  std::optional<double> target_entropy;  // unset: -action_dim
  int updates_per_step = 1;
  std::vector<int> hidden = {400, 300};
  double leaky_slope = 0.01;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  double initial_alpha = 1.0;
  double final_layer_init = 3e-3;

  void validate() const;
  bool operator==(const SacConfig&) const = default;
};

/// Actor, twin critics, their targets, the log temperature and all optimizer state.
template <typename T>
struct SacAgent {
  SacAgent(int action_dim, SacConfig config, std::uint64_t seed);

  int action_dim;
  SacConfig config;
  double target_entropy;
  nn::Mlp<T> actor;    // Gaussian head over action_dim
  nn::Mlp<T> critic1;  // (obs ++ action) -> Q
  nn::Mlp<T> critic2;
  nn::Mlp<T> target1;
  nn::Mlp<T> target2;
  double log_alpha;
  nn::AdamState<T> actor_opt;
  nn::AdamState<T> critic1_opt;
  nn::AdamState<T> critic2_opt;
  nn::ScalarAdam alpha_opt;
  std::int64_t updates = 0;

  double alpha() const;
};

/// Squashed Gaussian sample for a column batch, kept for the reparameterized backward pass.
template <typename T>
struct PolicySample {
  nn::Matrix<T> actions;   // tanh(u)
  nn::Matrix<T> log_prob;  // 1 x N
  nn::Matrix<T> mean;
  nn::Matrix<T> std;
  nn::Matrix<T> noise;     // standard normal draws, u = mean + std * noise
  typename nn::Mlp<T>::Cache cache;
};

template <typename T>
nn::Matrix<T> draw_noise(Eigen::Index rows, Eigen::Index cols, RandomSource& rng);

template <typename T>
PolicySample<T> sample_policy(const nn::Mlp<T>& actor, const nn::Matrix<T>& observations,
                              const nn::Matrix<T>& noise);

template <typename T>
nn::Matrix<T> observation_column(const env::Observation& obs);

/// [observations; actions] stacked row-wise.
template <typename T>
nn::Matrix<T> critic_input(const nn::Matrix<T>& observations, const nn::Matrix<T>& actions);

struct ActionSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

template <typename T>
ActionSample sample_action(const SacAgent<T>& agent, const env::Observation& obs, RandomSource& rng);

/// tanh(mean): the evaluation-time policy.
template <typename T>
Eigen::VectorXd deterministic_action(const SacAgent<T>& agent, const env::Observation& obs);

/// y = r + gamma (1 - done) (min target Q(s', a') - alpha log pi(a'|s')), a' ~ pi(s').
template <typename T>
nn::Matrix<T> critic_targets(const SacAgent<T>& agent, const Batch<T>& batch, RandomSource& rng);

/// Same with caller-supplied next-state noise.
template <typename T>
nn::Matrix<T> critic_targets(const SacAgent<T>& agent, const Batch<T>& batch,
                             const nn::Matrix<T>& next_noise);

struct ActorLoss {
  double loss = 0.0;
  double mean_log_prob = 0.0;
};

/// mean(alpha log pi - min(Q1, Q2)) at reparameterized actions, and its gradient
/// with respect to the actor parameters (critics held fixed).
template <typename T>
ActorLoss actor_loss(const SacAgent<T>& agent, const nn::Matrix<T>& observations,
                     const nn::Matrix<T>& noise, double alpha, nn::Gradients<T>* grads = nullptr);

struct LossReport {
  double critic1 = 0.0;
  double critic2 = 0.0;
  double actor = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
};

/// One gradient step on each critic, the actor and the temperature, then target soft updates.
template <typename T>
LossReport update_on_batch(SacAgent<T>& agent, const Batch<T>& batch, RandomSource& rng);

/// Samples a minibatch and calls update_on_batch. Throws BufferTooSmall before learning_starts.
template <typename T>
LossReport update_step(SacAgent<T>& agent, const ReplayBuffer<T>& buffer, RandomSource& rng);

extern template struct SacAgent<float>;
extern template struct SacAgent<double>;

}  // namespace quadrl::rl
