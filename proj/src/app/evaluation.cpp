#include "quadrl/app/evaluation.hpp"

#include <fstream>

#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"

namespace quadrl::app {

namespace {

constexpr const char* kMetricsHeader =
    "episode,initial_x,initial_y,initial_z,target_x,target_y,target_z,status,complete,"
    "steady_state_error_x,steady_state_error_y,steady_state_error_z,overshoot_x,overshoot_y,"
    "overshoot_z,settling_time,rms_path_error,final_error";

void write_vec(std::ostream& os, const Eigen::Vector3d& v) {
  for (int k = 0; k < 3; ++k) os << ',' << csv::format_or_empty(v[k]);
}

void write_metrics(std::ostream& os, const eval::TrackingMetrics& m) {
  write_vec(os, m.steady_state_error);
  write_vec(os, m.overshoot);
  os << ',' << csv::format_or_empty(m.settling_time) << ',' << csv::format(m.rms_path_error) << ','
     << csv::format(m.final_error) << '\n';
}

}  // namespace

int EvalReport::ended_within(double radius) const {
  int n = 0;
  for (const auto& e : episodes)
    if (e.metrics.final_error <= radius) ++n;
  return n;
}

EvalReport evaluate(const eval::Policy& policy, const RunConfig& cfg, const EvalOptions& options) {
  if (options.episodes <= 0) throw ConfigError("evaluation needs at least one episode");
  env::QuadEnv env(cfg.env, cfg.action_space, cfg.task, options.seed);
  RandomSource rng = RandomSource::derive(options.seed, 0x6576616c);

  EvalReport report;
  double settled_sum = 0.0;
  int settled = 0;
  for (int i = 0; i < options.episodes; ++i) {
    const auto sample = env::sample_reset(cfg.task, cfg.env.env, cfg.env.quad, rng);
    EpisodeEval ep;
    ep.initial = options.initial.value_or(sample.state.position);
    ep.target = options.target.value_or(sample.target);
    ep.log = eval::run_step_response(policy, env, ep.initial, ep.target);
    ep.metrics = eval::compute_metrics(ep.log, eval::MetricsMode::StepResponse, cfg.metrics);

    auto& agg = report.aggregate;
    agg.steady_state_error += ep.metrics.steady_state_error;
    agg.overshoot += ep.metrics.overshoot;
    agg.rms_path_error += ep.metrics.rms_path_error;
    agg.final_error += ep.metrics.final_error;
    agg.complete = agg.complete && ep.metrics.complete;
    if (ep.metrics.settled()) {
      settled_sum += ep.metrics.settling_time;
      ++settled;
    }
    report.episodes.push_back(std::move(ep));
  }
  const double n = static_cast<double>(options.episodes);
  auto& agg = report.aggregate;
  agg.steady_state_error /= n;
  agg.overshoot /= n;
  agg.rms_path_error /= n;
  agg.final_error /= n;
  agg.settling_time = settled ? settled_sum / settled : eval::kMissing;
  return report;
}

void write_metrics_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << kMetricsHeader << '\n';
  for (std::size_t i = 0; i < report.episodes.size(); ++i) {
    const auto& e = report.episodes[i];
    os << i;
    write_vec(os, e.initial);
    write_vec(os, e.target);
    os << ',' << env::to_string(e.log.status) << ',' << (e.metrics.complete ? 1 : 0);
    write_metrics(os, e.metrics);
  }
  os << "mean,,,,,,,," << (report.aggregate.complete ? 1 : 0);
  write_metrics(os, report.aggregate);
  if (!os) throw Error("failed writing " + path.string());
}

void write_path_metrics_csv(const std::filesystem::path& path, const eval::TrajectoryLog& log,
                            const eval::TrackingMetrics& metrics) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << kMetricsHeader << '\n';
  const auto& first = log.samples.front();
  os << "path";
  write_vec(os, first.position);
  write_vec(os, first.reference);
  os << ',' << env::to_string(log.status) << ',' << (metrics.complete ? 1 : 0);
  write_metrics(os, metrics);
  os << "mean";
  write_vec(os, first.position);
  write_vec(os, first.reference);
  os << ",," << (metrics.complete ? 1 : 0);
  write_metrics(os, metrics);
}

}  // namespace quadrl::app
