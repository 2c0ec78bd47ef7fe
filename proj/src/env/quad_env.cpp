#include "quadrl/env/quad_env.hpp"

#include <cmath>
#include <numbers>

#include "quadrl/common/errors.hpp"

namespace quadrl::env {

void RewardParams::validate() const {
  if (!(scale > 0.0)) throw ConfigError("reward.scale must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("reward.sigma must be > 0");
  if (!(distance_floor > 0.0)) throw ConfigError("reward.distance_floor must be > 0");
}

bool Box::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

bool Box::contains(const Box& other) const { return contains(other.lo) && contains(other.hi); }

void EnvConfig::validate() const {
  if (!(agent_frequency > 0.0)) throw ConfigError("env.agent_frequency must be > 0");
  if (max_steps <= 0) throw ConfigError("env.max_steps must be > 0");
  for (const Box* b : {&flight_bounds, &init_position_range, &target_range})
    if (!(b->lo.array() <= b->hi.array()).all())
      throw ConfigError("env: box lower corner must not exceed upper corner");
  if (!(flight_bounds.lo.array() < flight_bounds.hi.array()).all())
    throw ConfigError("env.flight_bounds must be non-degenerate");
  if (!flight_bounds.contains(init_position_range))
    throw ConfigError("env.init_position_range must lie inside env.flight_bounds");
  if (!flight_bounds.contains(target_range))
    throw ConfigError("env.target_range must lie inside env.flight_bounds");
  if (!(attitude_abort > 0.0)) throw ConfigError("env.attitude_abort must be > 0");
  if (!(rpm_action_scale > 0.0)) throw ConfigError("env.rpm_action_scale must be > 0");
}

void EnvSettings::validate() const {
  env.validate();
  quad.validate(env.agent_period());
  pid.validate();
  reward.validate();
}

const char* to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::Running: return "running";
    case EpisodeStatus::MaxSteps: return "max_steps";
    case EpisodeStatus::Crashed: return "crashed";
    case EpisodeStatus::OutOfBounds: return "out_of_bounds";
    case EpisodeStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

const char* to_string(Task task) {
  return task == Task::Stabilize ? "stabilize" : "track_random";
}

Task parse_task(const std::string& text) {
  if (text == "stabilize") return Task::Stabilize;
  if (text == "track_random" || text == "track") return Task::TrackRandom;
  throw ConfigError("unknown task '" + text + "' (expected stabilize or track_random)");
}

Observation observe(const sim::QuadState& state, const Eigen::Vector3d& target) {
  const Eigen::Vector3d euler = sim::euler_angles(state);
  const Eigen::Vector3d delta = target - state.position;
  return {euler.x(),         euler.y(),         euler.z(),
          state.velocity.x(), state.velocity.y(), state.velocity.z(),
          state.angular_velocity.x(), state.angular_velocity.y(), state.angular_velocity.z(),
          delta.x(),         delta.y(),         delta.z()};
}

double reward(const Eigen::Vector3d& delta, const RewardParams& p) {
  const double d = std::max(delta.norm(), p.distance_floor);
  const double z = d / p.sigma;
  return 1.0 / (p.scale * d) +
         p.scale / std::sqrt(2.0 * std::numbers::pi * p.sigma * p.sigma) * std::exp(-0.5 * z * z);
}

EpisodeStatus terminal_status(const sim::QuadState& state, int step, const EnvConfig& cfg) {
  if (!state.finite()) return EpisodeStatus::NonFinite;
  const Eigen::Vector3d euler = sim::euler_angles(state);
  if (state.position.z() < cfg.crash_altitude || std::abs(euler.x()) > cfg.attitude_abort ||
      std::abs(euler.y()) > cfg.attitude_abort)
    return EpisodeStatus::Crashed;
  if (!cfg.flight_bounds.contains(state.position)) return EpisodeStatus::OutOfBounds;
  if (step >= cfg.max_steps) return EpisodeStatus::MaxSteps;
  return EpisodeStatus::Running;
}

namespace {

Eigen::Vector3d uniform_in(const Box& box, RandomSource& rng) {
  Eigen::Vector3d p;
  for (int i = 0; i < 3; ++i)
    p[i] = box.lo[i] == box.hi[i] ? box.lo[i] : rng.uniform(box.lo[i], box.hi[i]);
  return p;
}

}  // namespace

sim::QuadState resting_state(const Eigen::Vector3d& position, const sim::QuadParams& quad) {
  sim::QuadState s;
  s.position = position;
  s.rotor_rpm.fill(sim::hover_rpm(quad));
  return s;
}

ResetSample sample_reset(Task task, const EnvConfig& cfg, const sim::QuadParams& quad,
                         RandomSource& rng) {
  ResetSample out;
  out.state = resting_state(uniform_in(cfg.init_position_range, rng), quad);
  out.target = task == Task::Stabilize ? kStabilizeTarget : uniform_in(cfg.target_range, rng);
  return out;
}

QuadEnv::QuadEnv(EnvSettings settings, control::ActionSpace space, Task task, std::uint64_t seed)
    : settings_(std::move(settings)),
      space_(space),
      task_(task),
      rng_(RandomSource::derive(seed, 0x656e76)) {
  settings_.validate();
  substeps_ = static_cast<int>(
      std::lround(settings_.env.agent_period() / settings_.quad.physics_dt));
  start(ResetSample{resting_state(kStabilizeTarget, settings_.quad), kStabilizeTarget});
}

void QuadEnv::start(const ResetSample& sample) {
  state_ = sample.state;
  target_ = sample.target;
  pid_ = {};
  steps_ = 0;
  saturated_ = 0;
  status_ = EpisodeStatus::Running;
}

Observation QuadEnv::reset() {
  start(sample_reset(task_, settings_.env, settings_.quad, rng_));
  return observation();
}

Observation QuadEnv::reset_to(const Eigen::Vector3d& position, const Eigen::Vector3d& target) {
  start(ResetSample{resting_state(position, settings_.quad), target});
  return observation();
}

StepResult QuadEnv::step(const control::ControlAction& raw_action) {
  if (status_ != EpisodeStatus::Running)
    throw EpisodeFinished(std::string("env_step called after episode ended (") +
                          to_string(status_) + ")");
  const control::ControlAction action = control::clamp_action(raw_action);
  const auto& quad = settings_.quad;
  bool blew_up = false;
  try {
    if (const auto* tv = std::get_if<control::ThrustVectorAction>(&action)) {
      const auto sp = control::decode_thrust_vector_action(*tv, sim::euler_angles(state_).z());
      for (int i = 0; i < substeps_; ++i) {
        const auto out =
            control::attitude_pid_step(state_, sp, settings_.pid, pid_, quad.physics_dt, quad);
        pid_ = out.state;
        saturated_ += out.saturated ? 1 : 0;
        state_ = sim::step_dynamics(state_, out.command, quad);
      }
    } else {
      const auto cmd = control::decode_rpm_action(std::get<control::RpmAction>(action), quad,
                                                  settings_.env.rpm_action_scale);
      for (int i = 0; i < substeps_; ++i) state_ = sim::step_dynamics(state_, cmd, quad);
    }
  } catch (const NonFiniteState&) {
    blew_up = true;
  }
  ++steps_;

  StepResult out;
  status_ = blew_up ? EpisodeStatus::NonFinite : terminal_status(state_, steps_, settings_.env);
  out.status = status_;
  out.observation = observation();
  out.reward = is_failure(status_) ? settings_.env.crash_penalty
                                   : reward(target_ - state_.position, settings_.reward);
  return out;
}

}  // namespace quadrl::env
