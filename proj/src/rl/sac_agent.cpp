#include "quadrl/rl/sac_agent.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "quadrl/common/errors.hpp"

namespace quadrl::rl {

namespace {

constexpr double kSquashEps = 1e-6;

nn::MlpShape actor_shape(int obs_dim, int action_dim, const SacConfig& c) {
  nn::MlpShape s;
  s.widths.push_back(obs_dim);
  s.widths.insert(s.widths.end(), c.hidden.begin(), c.hidden.end());
  s.widths.push_back(action_dim);
  s.head = nn::Head::Gaussian;
  s.leaky_slope = c.leaky_slope;
  s.log_std_min = c.log_std_min;
  s.log_std_max = c.log_std_max;
  return s;
}

nn::MlpShape critic_shape(int obs_dim, int action_dim, const SacConfig& c) {
  nn::MlpShape s = actor_shape(obs_dim + action_dim, 1, c);
  s.head = nn::Head::Linear;
  return s;
}

}  // namespace

void SacConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("sac.learning_rate must be >= 0");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("sac.tau must be in (0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("sac.gamma must be in (0, 1)");
  if (batch_size == 0) throw ConfigError("sac.batch_size must be > 0");
  if (!(batch_size <= learning_starts && learning_starts <= buffer_capacity))
    throw ConfigError("sac: require batch_size <= learning_starts <= buffer_capacity");
  if (updates_per_step < 1) throw ConfigError("sac.updates_per_step must be >= 1");
  if (hidden.empty()) throw ConfigError("sac.hidden must list at least one layer");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("sac.hidden widths must be positive");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
    throw ConfigError("sac.leaky_slope must be in [0, 1)");
  if (!(log_std_min < log_std_max) || !std::isfinite(log_std_min) || !std::isfinite(log_std_max))
    throw ConfigError("sac: log-std clamp must be finite with min < max");
  if (!(initial_alpha > 0.0)) throw ConfigError("sac.initial_alpha must be > 0");
  if (target_entropy && !std::isfinite(*target_entropy))
    throw ConfigError("sac.target_entropy must be finite");
}

template <typename T>
SacAgent<T>::SacAgent(int action_dim_, SacConfig config_, std::uint64_t seed)
    : action_dim(action_dim_),
      config(std::move(config_)),
      target_entropy(config.target_entropy.value_or(-static_cast<double>(action_dim_))),
      actor(actor_shape(env::kObservationSize, action_dim_, config)),
      critic1(critic_shape(env::kObservationSize, action_dim_, config)),
      critic2(critic_shape(env::kObservationSize, action_dim_, config)),
      log_alpha(std::log(config.initial_alpha)) {
  config.validate();
  RandomSource init = RandomSource::derive(seed, 0x696e6974);
  actor.initialize(init, config.final_layer_init);
  critic1.initialize(init, config.final_layer_init);
  critic2.initialize(init, config.final_layer_init);
  target1 = critic1;
  target2 = critic2;
  const nn::AdamParams adam{config.learning_rate};
  actor_opt = nn::make_adam(actor, adam);
  critic1_opt = nn::make_adam(critic1, adam);
  critic2_opt = nn::make_adam(critic2, adam);
  alpha_opt.params = adam;
}

template <typename T>
double SacAgent<T>::alpha() const {
  return std::exp(log_alpha);
}

template <typename T>
nn::Matrix<T> draw_noise(Eigen::Index rows, Eigen::Index cols, RandomSource& rng) {
  nn::Matrix<T> n(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) n(r, c) = static_cast<T>(rng.gaussian());
  return n;
}

template <typename T>
PolicySample<T> sample_policy(const nn::Mlp<T>& actor, const nn::Matrix<T>& observations,
                              const nn::Matrix<T>& noise) {
  const int d = actor.shape().widths.back();
  if (noise.rows() != d || noise.cols() != observations.cols())
    throw ShapeMismatch("policy noise must be action_dim x batch");
  PolicySample<T> s;
  const nn::Matrix<T> head = actor.forward(observations, &s.cache);
  s.mean = head.topRows(d);
  s.std = head.bottomRows(d).array().exp();
  s.noise = noise;
  const nn::Matrix<T> u = s.mean.array() + s.std.array() * noise.array();
  s.actions = u.array().tanh();

  const T half_log_2pi = static_cast<T>(0.5 * std::log(2.0 * std::numbers::pi));
  const auto gaussian = (T(-0.5) * noise.array().square() - head.bottomRows(d).array() - half_log_2pi)
                            .colwise().sum();
  const auto squash =
      (T(1) - s.actions.array().square() + static_cast<T>(kSquashEps)).log().colwise().sum();
  s.log_prob = (gaussian - squash).matrix();
  return s;
}

template <typename T>
nn::Matrix<T> observation_column(const env::Observation& obs) {
  nn::Matrix<T> m(env::kObservationSize, 1);
  for (int i = 0; i < env::kObservationSize; ++i) m(i, 0) = static_cast<T>(obs[i]);
  return m;
}

template <typename T>
nn::Matrix<T> critic_input(const nn::Matrix<T>& observations, const nn::Matrix<T>& actions) {
  if (observations.cols() != actions.cols())
    throw ShapeMismatch("critic input: observation and action batch sizes differ");
  nn::Matrix<T> in(observations.rows() + actions.rows(), observations.cols());
  in.topRows(observations.rows()) = observations;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

template <typename T>
ActionSample sample_action(const SacAgent<T>& agent, const env::Observation& obs,
                           RandomSource& rng) {
  const auto noise = draw_noise<T>(agent.action_dim, 1, rng);
  const auto s = sample_policy(agent.actor, observation_column<T>(obs), noise);
  return {s.actions.col(0).template cast<double>(), static_cast<double>(s.log_prob(0, 0))};
}

template <typename T>
Eigen::VectorXd deterministic_action(const SacAgent<T>& agent, const env::Observation& obs) {
  const auto head = agent.actor.forward(observation_column<T>(obs));
  return head.topRows(agent.action_dim).array().tanh().matrix().col(0).template cast<double>();
}

template <typename T>
nn::Matrix<T> critic_targets(const SacAgent<T>& agent, const Batch<T>& batch,
                             const nn::Matrix<T>& next_noise) {
  const auto next = sample_policy(agent.actor, batch.next_observations, next_noise);
  const auto in = critic_input(batch.next_observations, next.actions);
  const nn::Matrix<T> q = agent.target1.forward(in).cwiseMin(agent.target2.forward(in));
  const T alpha = static_cast<T>(agent.alpha());
  const T gamma = static_cast<T>(agent.config.gamma);
  return (batch.rewards.array() +
          gamma * (T(1) - batch.dones.array()) * (q.array() - alpha * next.log_prob.array()))
      .matrix();
}

template <typename T>
nn::Matrix<T> critic_targets(const SacAgent<T>& agent, const Batch<T>& batch, RandomSource& rng) {
  return critic_targets(agent, batch, draw_noise<T>(agent.action_dim, batch.size(), rng));
}

template <typename T>
ActorLoss actor_loss(const SacAgent<T>& agent, const nn::Matrix<T>& observations,
                     const nn::Matrix<T>& noise, double alpha_value, nn::Gradients<T>* grads) {
  const Eigen::Index n = observations.cols();
  const int d = agent.action_dim;
  const T alpha = static_cast<T>(alpha_value);
  const auto pi = sample_policy(agent.actor, observations, noise);
  const auto in = critic_input(observations, pi.actions);
  typename nn::Mlp<T>::Cache c1, c2;
  const nn::Matrix<T> q1 = agent.critic1.forward(in, &c1);
  const nn::Matrix<T> q2 = agent.critic2.forward(in, &c2);
  const nn::Matrix<T> q = q1.cwiseMin(q2);

  ActorLoss out;
  out.loss = static_cast<double>((alpha * pi.log_prob.array() - q.array()).mean());
  out.mean_log_prob = static_cast<double>(pi.log_prob.mean());
  if (!grads) return out;

  const T inv_n = T(1) / static_cast<T>(n);
  const auto pick1 = (q1.array() <= q2.array());
  const nn::Matrix<T> dq1 = pick1.select(nn::Matrix<T>::Constant(1, n, -inv_n), T(0));
  const nn::Matrix<T> dq2 = pick1.select(nn::Matrix<T>::Zero(1, n), -inv_n);
  const nn::GradientRequest input_only{false, true};
  const auto g1 = agent.critic1.backward(c1, dq1, input_only);
  const auto g2 = agent.critic2.backward(c2, dq2, input_only);
  const nn::Matrix<T> d_action = (g1.input + g2.input).bottomRows(d);

  const auto a = pi.actions.array();
  const auto one_minus = T(1) - a.square();
  const nn::Matrix<T> du =
      d_action.array() * one_minus +
      (alpha * inv_n) * T(2) * a * one_minus / (one_minus + static_cast<T>(kSquashEps));
  nn::Matrix<T> head_grad(2 * d, n);
  head_grad.topRows(d) = du;
  head_grad.bottomRows(d) = du.array() * pi.std.array() * pi.noise.array() - alpha * inv_n;
  *grads = agent.actor.backward(pi.cache, head_grad);
  return out;
}

template <typename T>
LossReport update_on_batch(SacAgent<T>& agent, const Batch<T>& batch, RandomSource& rng) {
  LossReport report;
  const double alpha = agent.alpha();
  const Eigen::Index n = batch.size();
  const T inv_n = T(1) / static_cast<T>(n);

  const nn::Matrix<T> y = critic_targets(agent, batch, rng);
  const auto in = critic_input(batch.observations, batch.actions);
  auto critic_step = [&](nn::Mlp<T>& critic, nn::AdamState<T>& opt) {
    typename nn::Mlp<T>::Cache cache;
    const nn::Matrix<T> diff = critic.forward(in, &cache) - y;
    const double loss = static_cast<double>(diff.array().square().mean());
    const auto grads = critic.backward(cache, (T(2) * inv_n) * diff);
    nn::adam_step(critic, grads, opt);
    return loss;
  };
  report.critic1 = critic_step(agent.critic1, agent.critic1_opt);
  report.critic2 = critic_step(agent.critic2, agent.critic2_opt);

  const auto noise = draw_noise<T>(agent.action_dim, n, rng);
  nn::Gradients<T> actor_grads;
  const ActorLoss actor = actor_loss(agent, batch.observations, noise, alpha, &actor_grads);
  nn::adam_step(agent.actor, actor_grads, agent.actor_opt);
  report.actor = actor.loss;

  // J(alpha) = mean(-alpha (log pi + H*)); d J / d log(alpha) = J.
  const double entropy_gap = actor.mean_log_prob + agent.target_entropy;
  report.alpha_loss = -alpha * entropy_gap;
  agent.alpha_opt.apply(agent.log_alpha, report.alpha_loss);
  report.alpha = agent.alpha();

  nn::soft_update(agent.target1, agent.critic1, agent.config.tau);
  nn::soft_update(agent.target2, agent.critic2, agent.config.tau);
  ++agent.updates;
  return report;
}

template <typename T>
LossReport update_step(SacAgent<T>& agent, const ReplayBuffer<T>& buffer, RandomSource& rng) {
  if (buffer.size() < agent.config.learning_starts)
    throw BufferTooSmall("update_step before learning_starts: buffer holds " +
                         std::to_string(buffer.size()) + " of " +
                         std::to_string(agent.config.learning_starts) + " transitions");
  return update_on_batch(agent, buffer.sample(agent.config.batch_size, rng), rng);
}

#define QUADRL_INSTANTIATE_SAC(T)                                                              \
  template struct SacAgent<T>;                                                                 \
  template nn::Matrix<T> draw_noise<T>(Eigen::Index, Eigen::Index, RandomSource&);             \
  template PolicySample<T> sample_policy(const nn::Mlp<T>&, const nn::Matrix<T>&,              \
                                         const nn::Matrix<T>&);                                \
  template nn::Matrix<T> observation_column<T>(const env::Observation&);                       \
  template nn::Matrix<T> critic_input(const nn::Matrix<T>&, const nn::Matrix<T>&);             \
  template ActionSample sample_action(const SacAgent<T>&, const env::Observation&,             \
                                      RandomSource&);                                          \
  template Eigen::VectorXd deterministic_action(const SacAgent<T>&, const env::Observation&);  \
  template nn::Matrix<T> critic_targets(const SacAgent<T>&, const Batch<T>&, RandomSource&);   \
  template nn::Matrix<T> critic_targets(const SacAgent<T>&, const Batch<T>&,                   \
                                        const nn::Matrix<T>&);                                 \
  template ActorLoss actor_loss(const SacAgent<T>&, const nn::Matrix<T>&,                      \
                                const nn::Matrix<T>&, double, nn::Gradients<T>*);              \
  template LossReport update_on_batch(SacAgent<T>&, const Batch<T>&, RandomSource&);           \
  template LossReport update_step(SacAgent<T>&, const ReplayBuffer<T>&, RandomSource&);

QUADRL_INSTANTIATE_SAC(float)
QUADRL_INSTANTIATE_SAC(double)

}  // namespace quadrl::rl
