#include "quadrl/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "quadrl/common/errors.hpp"

namespace quadrl::eval {

TrackingMetrics compute_metrics(const TrajectoryLog& log, MetricsMode mode,
                                const MetricsOptions& options) {
  const auto& s = log.samples;
  if (s.empty()) throw Error("compute_metrics: empty trajectory log");
  if (mode == MetricsMode::StepResponse)
    for (const auto& x : s)
      if (x.reference != s.front().reference)
        throw ModeMismatch("step-response metrics need a constant reference");

  TrackingMetrics m;
  m.complete = log.complete;

  const double t_end = s.back().t;
  std::size_t window = 0;
  double sq_sum = 0.0;
  for (const auto& x : s) {
    const Eigen::Vector3d e = x.reference - x.position;
    sq_sum += e.squaredNorm();
    if (x.t >= t_end - options.steady_window - 1e-9) {
      m.steady_state_error += e.cwiseAbs();
      ++window;
    }
  }
  m.steady_state_error /= static_cast<double>(window);
  m.rms_path_error = std::sqrt(sq_sum / static_cast<double>(s.size()));
  m.final_error = (s.back().reference - s.back().position).norm();

  if (mode == MetricsMode::StepResponse) {
    const Eigen::Vector3d initial = s.front().reference - s.front().position;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(initial[k]) <= 1e-12) continue;
      const double dir = initial[k] > 0.0 ? 1.0 : -1.0;
      double excursion = 0.0;
      for (const auto& x : s) excursion = std::max(excursion, dir * (x.position[k] - x.reference[k]));
      m.overshoot[k] = 100.0 * excursion / std::abs(initial[k]);
    }
  }

  // Earliest sample after which the error never leaves the band.
  std::size_t first_inside = s.size();
  for (std::size_t i = s.size(); i-- > 0;) {
    if ((s[i].reference - s[i].position).norm() > options.settling_band) break;
    first_inside = i;
  }
  if (first_inside < s.size()) m.settling_time = s[first_inside].t - s.front().t;
  return m;
}

}  // namespace quadrl::eval
