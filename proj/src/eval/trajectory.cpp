#include "quadrl/eval/trajectory.hpp"

#include <cmath>
#include <fstream>

#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"
#include "quadrl/sim/dynamics.hpp"

namespace quadrl::eval {

namespace {

constexpr const char* kColumns[] = {"t",   "rx",    "ry",  "rz", "x",  "y",  "z",
                                    "phi", "theta", "psi", "a0", "a1", "a2", "a3"};

TrajectorySample snapshot(const env::QuadEnv& env, const Eigen::Vector3d& reference,
                          const Eigen::VectorXd* action) {
  TrajectorySample s;
  s.t = env.time();
  s.reference = reference;
  s.position = env.state().position;
  s.euler = sim::euler_angles(env.state());
  if (action)
    for (Eigen::Index i = 0; i < action->size() && i < 4; ++i) s.action[i] = (*action)[i];
  return s;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i ? "," : "") << kColumns[i];
  os << '\n';
  for (const auto& s : log.samples) {
    os << csv::format(s.t);
    for (const auto* v : {&s.reference, &s.position, &s.euler})
      for (int k = 0; k < 3; ++k) os << ',' << csv::format((*v)[k]);
    for (double a : s.action) os << ',' << csv::format_or_empty(a);
    os << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

TrajectoryLog read_trajectory_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  std::size_t col[std::size(kColumns)];
  for (std::size_t i = 0; i < std::size(kColumns); ++i) col[i] = table.column(kColumns[i]);
  TrajectoryLog log;
  log.status = env::EpisodeStatus::MaxSteps;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    TrajectorySample s;
    s.t = table.number(r, col[0]);
    for (int k = 0; k < 3; ++k) {
      s.reference[k] = table.number(r, col[1 + k]);
      s.position[k] = table.number(r, col[4 + k]);
      s.euler[k] = table.number(r, col[7 + k]);
    }
    for (int k = 0; k < 4; ++k) s.action[k] = table.number(r, col[10 + k]);
    log.samples.push_back(s);
  }
  return log;
}

TrajectoryLog run_step_response(const Policy& policy, env::QuadEnv& env,
                                const Eigen::Vector3d& initial, const Eigen::Vector3d& target) {
  TrajectoryLog log;
  env::Observation obs = env.reset_to(initial, target);
  log.samples.push_back(snapshot(env, target, nullptr));
  while (env.status() == env::EpisodeStatus::Running) {
    const Eigen::VectorXd action = policy(obs);
    const auto res = env.step(control::make_action(env.action_space(), action.data()));
    obs = res.observation;
    log.samples.push_back(snapshot(env, target, &action));
  }
  log.status = env.status();
  log.complete = !env::is_failure(log.status);
  return log;
}

TrajectoryLog follow_path(const Policy& policy, const PathSpec& spec, env::QuadEnv& env) {
  validate(spec);
  const double total = duration(spec);
  const double period = env.settings().env.agent_period();
  const int steps = static_cast<int>(std::lround(total / period));
  env.mutable_settings().env.max_steps = steps;

  TrajectoryLog log;
  const Eigen::Vector3d start = sample_path(spec, 0.0);
  env.reset_to(start, start);
  log.samples.push_back(snapshot(env, start, nullptr));
  for (int k = 0; k < steps && env.status() == env::EpisodeStatus::Running; ++k) {
    env.set_target(sample_path(spec, std::min(k * period, total)));
    const Eigen::VectorXd action = policy(env.observation());
    env.step(control::make_action(env.action_space(), action.data()));
    const Eigen::Vector3d reference = sample_path(spec, std::min((k + 1) * period, total));
    log.samples.push_back(snapshot(env, reference, &action));
  }
  log.status = env.status();
  log.complete = !env::is_failure(log.status);
  return log;
}

}  // namespace quadrl::eval
