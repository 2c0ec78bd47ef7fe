#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "quadrl/common/errors.hpp"
#include "quadrl/env/quad_env.hpp"

using namespace quadrl;
using namespace quadrl::env;
using control::ActionSpace;

namespace {

// Written from the formula alone: 1/(a d) + a/sqrt(2 pi sigma^2) exp(-d^2 / (2 sigma^2)).
double reward_oracle(double ex, double ey, double ez, double a = 7.0, double sigma = 0.5,
                     double floor = 1e-3) {
  double d = std::sqrt(ex * ex + ey * ey + ez * ez);
  if (d < floor) d = floor;
  const double gauss_peak = a / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
  return 1.0 / (a * d) + gauss_peak * std::exp(-(d * d) / (2.0 * sigma * sigma));
}

double hover_raw_thrust(const sim::QuadParams& p) {
  return 2.0 * p.mass * p.gravity / control::max_total_thrust(p) - 1.0;
}

}  // namespace

TEST_CASE("observation at the target, level and at rest, is zero") {
  const auto s = resting_state({0.4, -0.3, 1.2}, sim::QuadParams{});
  const auto obs = observe(s, {0.4, -0.3, 1.2});
  for (double v : obs) CHECK(v == 0.0);
}

TEST_CASE("observation carries target minus position") {
  const auto s = resting_state({0, 0, 1}, sim::QuadParams{});
  const auto obs = observe(s, {0, 0, 1.5});
  CHECK(obs[9] == 0.0);
  CHECK(obs[10] == 0.0);
  CHECK(obs[11] == 0.5);
}

TEST_CASE("observation is invariant to a common translation") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2, 2);
  sim::QuadState s;
  s.velocity = {0.1, -0.4, 0.2};
  s.angular_velocity = {0.3, 0.2, -0.1};
  s.orientation = sim::quaternion_from_euler(0.1, 0.2, -0.3);
  for (int i = 0; i < 1000; ++i) {
    s.position = {u(gen), u(gen), u(gen)};
    const Eigen::Vector3d target(u(gen), u(gen), u(gen));
    // Integer shifts keep the subtraction exact in binary floating point.
    const Eigen::Vector3d shift(std::round(u(gen)), std::round(u(gen)), std::round(u(gen)));
    sim::QuadState moved = s;
    moved.position += shift;
    const auto a = observe(s, target), b = observe(moved, target + shift);
    for (int k = 0; k < 9; ++k) CHECK(a[k] == b[k]);
    for (int k = 9; k < 12; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("error norm is the Euclidean distance") {
  const Eigen::Vector3d d(3, 4, 0);
  CHECK(d.norm() == 5.0);
  CHECK(reward(d, {}) == doctest::Approx(reward_oracle(3, 4, 0)).epsilon(1e-12));
}

TEST_CASE("reward spot values") {
  const RewardParams p;
  const double r1 = reward({1, 0, 0}, p);
  const double r05 = reward({0, 0.5, 0}, p);
  const double r0 = reward({0, 0, 0}, p);
  CHECK(std::abs(r1 - reward_oracle(1, 0, 0)) / r1 < 1e-9);
  CHECK(std::abs(r05 - reward_oracle(0, 0.5, 0)) / r05 < 1e-9);
  CHECK(r1 == doctest::Approx(0.89873).epsilon(1e-5));
  CHECK(r05 == doctest::Approx(3.67333).epsilon(1e-5));
  // 1/7 + (7 / sqrt(pi/2)) e^-2
  CHECK(r1 == doctest::Approx(1.0 / 7.0 + 7.0 / std::sqrt(std::numbers::pi / 2) * std::exp(-2.0))
                  .epsilon(1e-12));
  const double eps = 1e-3;
  const double r_floor = 1.0 / (7 * eps) + 7.0 / std::sqrt(std::numbers::pi / 2) * std::exp(-2 * eps * eps);
  CHECK(r0 == doctest::Approx(r_floor).epsilon(1e-12));
  CHECK(r0 == doctest::Approx(148.4423).epsilon(1e-6));
}

TEST_CASE("reward matches the scalar oracle on random errors") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<double> scale(-6, 1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double k = std::pow(10.0, scale(gen));  // spans the floor and far field
    const Eigen::Vector3d d(k * u(gen), k * u(gen), k * u(gen));
    const double want = reward_oracle(d.x(), d.y(), d.z());
    worst = std::max(worst, std::abs(reward(d, {}) - want) / std::abs(want));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("reward is non-increasing in distance") {
  const RewardParams p;
  double prev = reward({p.distance_floor, 0, 0}, p);
  for (int i = 1; i <= 100000; ++i) {
    const double d = p.distance_floor + (10.0 - p.distance_floor) * i / 100000.0;
    const double r = reward({0, 0, d}, p);
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("terminal status rules") {
  EnvConfig cfg;
  sim::QuadParams q;
  auto s = resting_state({0, 0, 1}, q);
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::Running);
  CHECK(terminal_status(s, 502, cfg) == EpisodeStatus::MaxSteps);
  CHECK(terminal_status(s, 501, cfg) == EpisodeStatus::Running);
  s.position.z() = 0.0;
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::Crashed);
  s.position.z() = 0.0199;
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::Crashed);
  s.position = {3.5, 0, 1};
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::OutOfBounds);
  s.position = {0, 0, 1};
  s.orientation = sim::quaternion_from_euler(1.3, 0, 0);
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::Crashed);
  s.orientation = sim::quaternion_from_euler(0, 0, 3.0);  // yaw alone is fine
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::Running);
  s.velocity.x() = std::nan("");
  CHECK(terminal_status(s, 10, cfg) == EpisodeStatus::NonFinite);
  CHECK(is_failure(EpisodeStatus::Crashed));
  CHECK(is_failure(EpisodeStatus::OutOfBounds));
  CHECK_FALSE(is_failure(EpisodeStatus::MaxSteps));
}

TEST_CASE("stabilize resets to the fixed target") {
  for (std::uint64_t seed : {1u, 2u, 77u}) {
    RandomSource rng(seed);
    const auto r = sample_reset(Task::Stabilize, {}, {}, rng);
    CHECK(r.target == Eigen::Vector3d(0, 0, 1));
  }
}

TEST_CASE("resets are reproducible and stay in range") {
  EnvConfig cfg;
  sim::QuadParams q;
  RandomSource a(42), b(42);
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e9), hi = -lo;
  Eigen::Vector3d tlo = lo, thi = hi;
  for (int i = 0; i < 10000; ++i) {
    const auto ra = sample_reset(Task::TrackRandom, cfg, q, a);
    const auto rb = sample_reset(Task::TrackRandom, cfg, q, b);
    REQUIRE(ra.state.position == rb.state.position);
    REQUIRE(ra.target == rb.target);
    lo = lo.cwiseMin(ra.state.position);
    hi = hi.cwiseMax(ra.state.position);
    tlo = tlo.cwiseMin(ra.target);
    thi = thi.cwiseMax(ra.target);
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(lo[k] >= cfg.init_position_range.lo[k]);
    CHECK(hi[k] <= cfg.init_position_range.hi[k]);
    CHECK(tlo[k] >= cfg.target_range.lo[k]);
    CHECK(thi[k] <= cfg.target_range.hi[k]);
    // 10^4 uniform draws cover the range to within a few tenths of a percent.
    const double w = cfg.init_position_range.hi[k] - cfg.init_position_range.lo[k];
    CHECK(lo[k] < cfg.init_position_range.lo[k] + 0.01 * w);
    CHECK(hi[k] > cfg.init_position_range.hi[k] - 0.01 * w);
  }
}

TEST_CASE("one env step advances 0.02 s with four physics substeps") {
  QuadEnv env({}, ActionSpace::ThrustVector, Task::Stabilize, 1);
  env.reset();
  CHECK(env.substeps() == 4);
  env.step(control::ThrustVectorAction{0.0, 0, 0});
  CHECK(env.time() == doctest::Approx(0.02).epsilon(1e-15));
  env.step(control::ThrustVectorAction{0.0, 0, 0});
  CHECK(env.time() == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("hover action at the target earns the floor-limited maximum reward") {
  EnvSettings settings;
  QuadEnv env(settings, ActionSpace::ThrustVector, Task::Stabilize, 1);
  env.reset_to({0, 0, 1}, {0, 0, 1});
  const auto r = env.step(control::ThrustVectorAction{hover_raw_thrust(settings.quad), 0, 0});
  CHECK(r.status == EpisodeStatus::Running);
  CHECK(r.reward == doctest::Approx(reward({0, 0, 0}, settings.reward)).epsilon(1e-12));

  QuadEnv rpm(settings, ActionSpace::Rpm, Task::Stabilize, 1);
  rpm.reset_to({0, 0, 1}, {0, 0, 1});
  const auto rr = rpm.step(control::RpmAction{{0, 0, 0, 0}});
  CHECK(rr.reward == doctest::Approx(reward({0, 0, 0}, settings.reward)).epsilon(1e-12));
}

TEST_CASE("falling into the ground is a crash with the penalty reward") {
  QuadEnv env({}, ActionSpace::ThrustVector, Task::Stabilize, 3);
  env.reset_to({0, 0, 0.3}, {0, 0, 1});
  StepResult r;
  int n = 0;
  do {
    r = env.step(control::ThrustVectorAction{-1.0, 0, 0});
    ++n;
  } while (r.status == EpisodeStatus::Running && n < 100);
  CHECK(r.status == EpisodeStatus::Crashed);
  CHECK(r.reward == -50.0);
  CHECK(env.state().position.z() < 0.02);
  CHECK_THROWS_AS(env.step(control::ThrustVectorAction{}), EpisodeFinished);
}

TEST_CASE("episodes end at 502 steps") {
  QuadEnv env({}, ActionSpace::ThrustVector, Task::Stabilize, 3);
  env.reset_to({0, 0, 1}, {0, 0, 1});
  const double hover = hover_raw_thrust(sim::QuadParams{});
  int n = 0;
  StepResult r;
  do {
    r = env.step(control::ThrustVectorAction{hover, 0, 0});
    ++n;
  } while (r.status == EpisodeStatus::Running);
  CHECK(n == 502);
  CHECK(r.status == EpisodeStatus::MaxSteps);
  CHECK(r.reward > 0);
}

TEST_CASE("fixed seed and action sequence reproduce an episode bit for bit") {
  auto run = [](std::uint64_t seed) {
    QuadEnv env({}, ActionSpace::Rpm, Task::TrackRandom, seed);
    env.reset();
    RandomSource actions(1234);
    std::vector<double> trace;
    for (int i = 0; i < 502 && env.status() == EpisodeStatus::Running; ++i) {
      control::RpmAction a;
      for (double& v : a.rotor) v = actions.uniform(-1, 1);
      const auto r = env.step(a);
      trace.push_back(r.reward);
      for (double v : r.observation) trace.push_back(v);
    }
    return trace;
  };
  const auto a = run(8), b = run(8), c = run(9);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  CHECK(a != c);
}

TEST_CASE("settings validation") {
  EnvSettings s;
  CHECK_NOTHROW(s.validate());
  s.env.target_range.hi.x() = 5.0;  // outside the flight bounds
  CHECK_THROWS_AS(s.validate(), ConfigError);
  EnvSettings t;
  t.env.agent_frequency = 60;  // 1/60 s is not a multiple of 1/200 s
  CHECK_THROWS_AS(t.validate(), ConfigError);
  CHECK(parse_task("track_random") == Task::TrackRandom);
  CHECK_THROWS_AS(parse_task("hover"), ConfigError);
}
