#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include "quadrl/common/errors.hpp"
#include "quadrl/rl/checkpoint.hpp"
#include "quadrl/rl/replay_buffer.hpp"
#include "quadrl/rl/sac_agent.hpp"

using namespace quadrl;
using namespace quadrl::rl;
using Mat = nn::Matrix<double>;
using Agent = SacAgent<double>;

namespace {

SacConfig small_config() {
  SacConfig c;
  c.hidden = {32, 24};
  c.buffer_capacity = 1000;
  c.learning_starts = 16;
  c.batch_size = 16;
  return c;
}

// Gaussian policy head that ignores its input: mean mu, log-std log_sigma.
nn::Mlp<double> fixed_policy(const std::vector<double>& mu, const std::vector<double>& log_sigma) {
  const int d = static_cast<int>(mu.size());
  nn::Mlp<double> net(nn::MlpShape{{env::kObservationSize, d}, nn::Head::Gaussian});
  for (int i = 0; i < d; ++i) {
    net.layers()[0].bias(i) = mu[i];
    net.layers()[0].bias(d + i) = log_sigma[i];
  }
  return net;
}

void pin_actor(Agent& agent, const std::vector<double>& mu, const std::vector<double>& log_sigma) {
  auto& last = agent.actor.layers().back();
  last.weight.setZero();
  for (int i = 0; i < agent.action_dim; ++i) {
    last.bias(i) = mu[i];
    last.bias(agent.action_dim + i) = log_sigma[i];
  }
}

void zero_all(nn::Mlp<double>& net) {
  for (auto b : nn::parameter_blocks(net.layers())) b.setZero();
}

// log density of a = tanh(u), u ~ N(mu, sigma^2) per component, with the 1e-6 guard.
double squashed_log_density(const std::vector<double>& a, const std::vector<double>& mu,
                            const std::vector<double>& sigma) {
  double lp = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = std::atanh(a[i]);
    const double z = (u - mu[i]) / sigma[i];
    lp += -0.5 * z * z - std::log(sigma[i]) - 0.5 * std::log(2 * std::numbers::pi) -
          std::log(1 - a[i] * a[i] + 1e-6);
  }
  return lp;
}

Transition make_transition(double reward, bool done, int action_dim, double tag = 0) {
  Transition t;
  t.action = Eigen::VectorXd::Constant(action_dim, 0.1);
  t.reward = reward;
  t.done = done;
  t.observation.fill(tag);
  t.next_observation.fill(tag + 0.5);
  return t;
}

}  // namespace

TEST_CASE("squashed density integrates to one in one dimension") {
  const std::vector<double> mu{0.3}, log_sigma{std::log(0.8)};
  const auto net = fixed_policy(mu, log_sigma);
  const int cells = 20000;
  Mat noise(1, cells);
  for (int k = 0; k < cells; ++k) {
    const double a = -1.0 + (k + 0.5) * 2.0 / cells;
    noise(0, k) = (std::atanh(a) - mu[0]) / 0.8;
  }
  const Mat obs = Mat::Zero(12, cells);
  const auto s = sample_policy(net, obs, noise);
  double mass = 0;
  for (int k = 0; k < cells; ++k) mass += std::exp(s.log_prob(0, k)) * (2.0 / cells);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  // Spot-check against the closed form.
  const double a = s.actions(0, 777);
  CHECK(s.log_prob(0, 777) == doctest::Approx(squashed_log_density({a}, mu, {0.8})).epsilon(1e-10));
}

TEST_CASE("squashed density integrates to one in two dimensions") {
  const std::vector<double> mu{-0.4, 0.2}, sigma{0.6, 1.1};
  const auto net = fixed_policy(mu, {std::log(sigma[0]), std::log(sigma[1])});
  const int cells = 1500;
  const double h = 2.0 / cells;
  double mass = 0;
  Mat noise(2, cells);
  const Mat obs = Mat::Zero(12, cells);
  for (int i = 0; i < cells; ++i) {
    const double a0 = -1.0 + (i + 0.5) * h;
    for (int j = 0; j < cells; ++j) {
      const double a1 = -1.0 + (j + 0.5) * h;
      noise(0, j) = (std::atanh(a0) - mu[0]) / sigma[0];
      noise(1, j) = (std::atanh(a1) - mu[1]) / sigma[1];
    }
    const auto s = sample_policy(net, obs, noise);
    mass += s.log_prob.array().exp().sum() * h * h;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sampled actions lie strictly inside the unit box") {
  Agent agent(4, small_config(), 3);
  pin_actor(agent, {0.0, 3.0, -6.0, 15.0}, {0.0, 0.5, 0.5, -1.0});
  RandomSource rng(3);
  env::Observation obs{};
  for (int i = 0; i < 5000; ++i) {
    const auto s = sample_action(agent, obs, rng);
    CHECK((s.action.array().abs() < 1.0).all());
    CHECK(std::isfinite(s.log_prob));
  }
}

TEST_CASE("deterministic action is tanh of the mean") {
  Agent agent(3, small_config(), 4);
  env::Observation obs{};
  obs[0] = 0.2;
  const auto a = deterministic_action(agent, obs), b = deterministic_action(agent, obs);
  CHECK(a == b);

  Agent zero(3, small_config(), 4);
  zero_all(zero.actor);
  CHECK(deterministic_action(zero, obs).isZero(0.0));

  // sigma at the lower clamp: samples collapse onto tanh(mu).
  pin_actor(agent, {0.5, -1.0, 2.0}, {-20.0, -20.0, -20.0});
  RandomSource rng(1);
  const auto s = sample_action(agent, obs, rng);
  const Eigen::Vector3d expect(std::tanh(0.5), std::tanh(-1.0), std::tanh(2.0));
  CHECK((s.action - expect).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((deterministic_action(agent, obs) - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("deterministic action agrees with the Monte-Carlo policy mean") {
  // Narrow policy, so E[tanh(u)] and tanh(mu) differ by far less than the sampling error.
  Agent agent(3, small_config(), 5);
  pin_actor(agent, {0.4, -0.9, 0.05}, {-5.0, -5.0, -5.0});
  env::Observation obs{};
  RandomSource rng(99);
  const int n = 100000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d a = sample_action(agent, obs, rng).action;
    sum += a;
    sq += a.cwiseProduct(a);
  }
  const Eigen::Vector3d mean = sum / n;
  const Eigen::Vector3d var = sq / n - mean.cwiseProduct(mean);
  const Eigen::Vector3d se = (var / n).cwiseSqrt();
  const Eigen::Vector3d det = deterministic_action(agent, obs);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - det[i]) < 3 * se[i]);
}

TEST_CASE("critic target of a terminal transition is the reward") {
  Agent agent(3, small_config(), 6);
  ReplayBuffer<double> buf(4, 12, 3);
  buf.push(make_transition(-50.0, true, 3));
  buf.push(make_transition(2.5, true, 3));
  RandomSource rng(6);
  const Mat y = critic_targets(agent, buf.gather({0, 1}), rng);
  CHECK(y(0, 0) == -50.0);
  CHECK(y(0, 1) == 2.5);
}

TEST_CASE("critic target with zero networks matches the closed form") {
  Agent agent(3, small_config(), 7);
  for (auto* net : {&agent.actor, &agent.critic1, &agent.critic2, &agent.target1, &agent.target2})
    zero_all(*net);
  agent.log_alpha = std::log(0.37);
  ReplayBuffer<double> buf(1, 12, 3);
  buf.push(make_transition(1.25, false, 3));
  Mat noise(3, 1);
  noise << 0.3, -1.2, 0.7;
  const Mat y = critic_targets(agent, buf.gather({0}), noise);
  // Zero actor: mu = 0, sigma = 1, so u = noise.
  std::vector<double> a;
  for (int i = 0; i < 3; ++i) a.push_back(std::tanh(noise(i, 0)));
  const double logp = squashed_log_density(a, {0, 0, 0}, {1, 1, 1});
  const double expect = 1.25 - 0.99 * 0.37 * logp;
  CHECK(y(0, 0) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(std::abs(y(0, 0) - expect) < 1e-9);
}

TEST_CASE("critic target takes the smaller target critic") {
  Agent agent(3, small_config(), 8);
  ReplayBuffer<double> buf(8, 12, 3);
  for (int i = 0; i < 8; ++i) buf.push(make_transition(0.1 * i, false, 3, 0.1 * i));
  const auto batch = buf.gather({0, 1, 2, 3, 4, 5, 6, 7});
  RandomSource rng(8);
  const Mat noise = draw_noise<double>(3, 8, rng);

  agent.target2 = agent.target1;
  const Mat base = critic_targets(agent, batch, noise);
  agent.target2.layers().back().bias(0) += 10.0;
  const Mat inflated = critic_targets(agent, batch, noise);
  CHECK(inflated == base);
  // Twin asymmetry: y never exceeds what either target critic alone would give.
  agent.target1.layers().back().bias(0) += 20.0;  // now target2 is the smaller one
  const Mat swapped = critic_targets(agent, batch, noise);
  auto only = [&](const nn::Mlp<double>& q) {
    Agent solo = agent;
    solo.target1 = q;
    solo.target2 = q;
    return critic_targets(solo, batch, noise);
  };
  const Mat y1 = only(agent.target1), y2 = only(agent.target2);
  CHECK((swapped.array() <= y1.array()).all());
  CHECK((swapped.array() <= y2.array()).all());
  CHECK(swapped == y2);
}

TEST_CASE("zero learning rate leaves every parameter alone") {
  SacConfig c = small_config();
  c.learning_rate = 0.0;
  Agent agent(3, c, 9);
  const Agent before = agent;
  ReplayBuffer<double> buf(64, 12, 3);
  RandomSource rng(9);
  for (int i = 0; i < 32; ++i) {
    Transition t = make_transition(rng.uniform(-1, 1), i % 7 == 0, 3, rng.uniform(-1, 1));
    buf.push(t);
  }
  const auto report = update_step(agent, buf, rng);
  CHECK(std::isfinite(report.critic1));
  CHECK(std::isfinite(report.critic2));
  CHECK(std::isfinite(report.actor));
  CHECK(std::isfinite(report.alpha_loss));
  CHECK(agent.log_alpha == before.log_alpha);
  auto same = [](const nn::Mlp<double>& a, const nn::Mlp<double>& b, double tol) {
    const auto x = nn::parameter_blocks(a.layers()), y = nn::parameter_blocks(b.layers());
    for (std::size_t i = 0; i < x.size(); ++i)
      if ((x[i] - y[i]).cwiseAbs().maxCoeff() > tol * (1 + y[i].cwiseAbs().maxCoeff())) return false;
    return true;
  };
  CHECK(same(agent.actor, before.actor, 0.0));
  CHECK(same(agent.critic1, before.critic1, 0.0));
  CHECK(same(agent.critic2, before.critic2, 0.0));
  // Targets start as copies, so the soft update only rounds.
  CHECK(same(agent.target1, before.target1, 1e-15));
  CHECK(same(agent.target2, before.target2, 1e-15));
}

TEST_CASE("one update lowers the critic loss against a fixed target") {
  SacConfig c = small_config();
  c.batch_size = 1;
  c.learning_starts = 1;
  Agent agent(3, c, 10);
  for (auto* net : {&agent.actor, &agent.critic1, &agent.critic2, &agent.target1, &agent.target2})
    zero_all(*net);
  ReplayBuffer<double> buf(1, 12, 3);
  buf.push(make_transition(10.0, false, 3));
  const auto batch = buf.gather({0});
  RandomSource rng(10);
  const Mat y = critic_targets(agent, batch, draw_noise<double>(3, 1, rng));
  const Mat in = critic_input(batch.observations, batch.actions);
  auto loss = [&](const nn::Mlp<double>& q) { return (q.forward(in) - y).array().square().mean(); };
  const double l1 = loss(agent.critic1), l2 = loss(agent.critic2);
  update_step(agent, buf, rng);
  CHECK(loss(agent.critic1) < l1);
  CHECK(loss(agent.critic2) < l2);
}

TEST_CASE("temperature rises when entropy is below target and falls when above") {
  ReplayBuffer<double> buf(64, 12, 3);
  RandomSource fill(11);
  for (int i = 0; i < 64; ++i) buf.push(make_transition(fill.uniform(-1, 1), false, 3, fill.uniform(-1, 1)));
  const auto batch = buf.gather({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});

  auto alpha_after = [&](double target_entropy, double log_sigma) {
    SacConfig c = small_config();
    c.target_entropy = target_entropy;
    Agent agent(3, c, 11);
    pin_actor(agent, {0.1, -0.2, 0.0}, {log_sigma, log_sigma, log_sigma});
    RandomSource rng(12);
    const Mat noise = draw_noise<double>(3, 16, rng);
    const double mean_logp = actor_loss(agent, batch.observations, noise, agent.alpha()).mean_log_prob;
    const double before = agent.alpha();
    update_on_batch(agent, batch, rng);
    return std::pair{mean_logp, agent.alpha() - before};
  };

  // Narrow policy: log_prob well above -H* = 3, entropy below target, alpha goes up.
  auto [lp_narrow, d_narrow] = alpha_after(-3.0, -4.0);
  CHECK(lp_narrow > 3.0);
  CHECK(d_narrow > 0.0);
  // Unit-width policy against a low entropy target: log_prob below -H* = 5, alpha goes down.
  auto [lp_wide, d_wide] = alpha_after(-5.0, 0.0);
  CHECK(lp_wide < 5.0);
  CHECK(d_wide < 0.0);
}

TEST_CASE("actor gradient matches central differences on a frozen minibatch") {
  SacConfig c = small_config();
  c.hidden = {64, 48};
  c.final_layer_init = 0.3;  // critics with visible curvature
  Agent agent(3, c, 13);
  RandomSource rng(13);
  Mat obs(12, 8);
  for (int i = 0; i < obs.size(); ++i) obs.data()[i] = rng.gaussian();
  const Mat noise = draw_noise<double>(3, 8, rng);
  const double alpha = 0.3;
  nn::Gradients<double> grads;
  actor_loss(agent, obs, noise, alpha, &grads);

  auto blocks = nn::parameter_blocks(agent.actor.layers());
  const auto g = nn::parameter_blocks(std::as_const(grads.layers));
  std::vector<std::pair<std::size_t, Eigen::Index>> all;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Eigen::Index i = 0; i < blocks[b].size(); ++i) all.emplace_back(b, i);
  std::shuffle(all.begin(), all.end(), rng.engine());
  const double h = 1e-5;
  double worst = 0;
  int checked = 0;
  for (int k = 0; k < 64; ++k) {
    const auto [b, i] = all[k];
    const double saved = blocks[b][i];
    blocks[b][i] = saved + h;
    const double up = actor_loss(agent, obs, noise, alpha).loss;
    blocks[b][i] = saved - h;
    const double down = actor_loss(agent, obs, noise, alpha).loss;
    blocks[b][i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max(std::abs(numeric), std::abs(g[b][i]));
    if (scale < 1e-10) continue;
    worst = std::max(worst, std::abs(numeric - g[b][i]) / scale);
    ++checked;
  }
  CHECK(checked >= 60);
  CHECK(worst < 1e-4);
}

TEST_CASE("update before learning starts is refused") {
  SacConfig c = small_config();
  Agent agent(3, c, 14);
  ReplayBuffer<double> buf(100, 12, 3);
  for (int i = 0; i < 15; ++i) buf.push(make_transition(0, false, 3));
  RandomSource rng(14);
  CHECK_THROWS_AS(update_step(agent, buf, rng), BufferTooSmall);
}

TEST_CASE("config invariants") {
  SacConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(Agent(3, small_config(), 1).target_entropy == -3.0);
  CHECK(Agent(4, small_config(), 1).target_entropy == -4.0);
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.learning_starts = 100;  // below the batch size
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.learning_starts = c.buffer_capacity + 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("buffer evicts the oldest entry at capacity") {
  ReplayBuffer<double> buf(3, 12, 3);
  for (int i = 1; i <= 4; ++i) buf.push(make_transition(i, false, 3));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).reward == 2.0);
  CHECK(buf.at(1).reward == 3.0);
  CHECK(buf.at(2).reward == 4.0);
  buf.push(make_transition(5, true, 3));
  CHECK(buf.at(0).reward == 3.0);
  CHECK(buf.at(2).done);
}

TEST_CASE("buffer sampling is uniform") {
  ReplayBuffer<double> buf(10, 12, 3);
  for (int i = 0; i < 10; ++i) buf.push(make_transition(i, false, 3));
  RandomSource rng(2025);
  std::array<double, 10> counts{};
  for (int k = 0; k < 10000; ++k) {
    const auto b = buf.sample(10, rng);
    for (Eigen::Index j = 0; j < b.size(); ++j) counts[static_cast<int>(b.rewards(0, j))] += 1;
  }
  double chi2 = 0;
  for (double c : counts) chi2 += (c - 1e4) * (c - 1e4) / 1e4;
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(9), chi2));
  INFO("chi2 = " << chi2 << ", p = " << p);
  CHECK(p > 0.01);
}

TEST_CASE("sampling the whole buffer returns stored transitions only") {
  ReplayBuffer<double> buf(50, 12, 3);
  for (int i = 0; i < 20; ++i) buf.push(make_transition(100 + i, i % 2, 3, i));
  RandomSource rng(4);
  const auto b = buf.sample(20, rng);
  CHECK(b.size() == 20);
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const int i = static_cast<int>(b.rewards(0, j)) - 100;
    REQUIRE(i >= 0);
    REQUIRE(i < 20);
    CHECK(b.observations(0, j) == i);
    CHECK(b.next_observations(3, j) == i + 0.5);
    CHECK(b.dones(0, j) == i % 2);
  }
  CHECK_THROWS_AS(buf.sample(21, rng), BufferTooSmall);
}

TEST_CASE("checkpoint round trip is bit-exact and training continues identically") {
  SacConfig c = small_config();
  Agent agent(4, c, 15);
  ReplayBuffer<double> buf(200, 12, 4);
  RandomSource fill(15);
  for (int i = 0; i < 100; ++i) {
    Transition t = make_transition(fill.uniform(-1, 1), false, 4, fill.uniform(-1, 1));
    t.action = Eigen::Vector4d(fill.uniform(-1, 1), fill.uniform(-1, 1), 0, 0.5);
    buf.push(t);
  }
  RandomSource rng(16);
  for (int i = 0; i < 5; ++i) update_step(agent, buf, rng);

  std::stringstream ss;
  save_agent(ss, agent, {{"note", "unit"}});
  nlohmann::json meta;
  Agent copy = load_agent<double>(ss, &meta);
  CHECK(meta["note"] == "unit");
  CHECK(copy.config == agent.config);
  CHECK(copy.log_alpha == agent.log_alpha);
  CHECK(copy.updates == agent.updates);
  CHECK(copy.alpha_opt.step == agent.alpha_opt.step);

  RandomSource r1(17), r2(17);
  for (int i = 0; i < 5; ++i) {
    const auto a = update_step(agent, buf, r1);
    const auto b = update_step(copy, buf, r2);
    REQUIRE(a.critic1 == b.critic1);
    REQUIRE(a.actor == b.actor);
    REQUIRE(a.alpha == b.alpha);
  }
  const auto x = nn::parameter_blocks(std::as_const(agent.actor).layers());
  const auto y = nn::parameter_blocks(std::as_const(copy.actor).layers());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::memcmp(x[i].data(), y[i].data(), sizeof(double) * x[i].size()) == 0);

  std::stringstream bad;
  save_agent(bad, agent);
  CHECK_THROWS_AS(load_agent<float>(bad), SchemaError);
}
