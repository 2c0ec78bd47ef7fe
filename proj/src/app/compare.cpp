#include "quadrl/app/compare.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"

namespace quadrl::app {

namespace {

enum class Kind { TrainingLog, Metrics };

Kind kind_of(const csv::Table& t) {
  if (t.has_column("mean_reward_100")) return Kind::TrainingLog;
  if (t.has_column("steady_state_error_x")) return Kind::Metrics;
  throw SchemaError(t.source.string() +
                    ": neither a training log (mean_reward_100) nor a metrics file "
                    "(steady_state_error_x)");
}

struct TrainingStats {
  double steps = 0.0;
  double episodes = 0.0;
  double final_mean_reward = 0.0;
  double final_mean_length = 0.0;
  double mean_length = 0.0;
  double peak_mean_reward = -INFINITY;
  std::vector<std::pair<double, double>> curve;  // (step, mean_reward_100)
};

TrainingStats training_stats(const csv::Table& t) {
  const std::size_t step = t.column("step"), episode = t.column("episode"),
                    length = t.column("episode_length"), mean100 = t.column("mean_reward_100"),
                    len100 = t.column("mean_length_100");
  if (t.rows.empty()) throw SchemaError(t.source.string() + ": training log has no episodes");
  TrainingStats s;
  double length_sum = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double m = t.number(r, mean100);
    s.curve.emplace_back(t.number(r, step), m);
    s.peak_mean_reward = std::max(s.peak_mean_reward, m);
    length_sum += t.number(r, length);
  }
  const std::size_t last = t.rows.size() - 1;
  s.steps = t.number(last, step);
  s.episodes = t.number(last, episode);
  s.final_mean_reward = t.number(last, mean100);
  s.final_mean_length = t.number(last, len100);
  s.mean_length = length_sum / static_cast<double>(t.rows.size());
  return s;
}

std::string steps_to(const TrainingStats& s, double threshold) {
  for (const auto& [step, m] : s.curve)
    if (m >= threshold) return csv::format(step);
  return "not reached";
}

std::string stem(const std::filesystem::path& p) {
  const auto parent = p.parent_path().filename().string();
  return parent.empty() ? p.filename().string() : parent + "/" + p.filename().string();
}

}  // namespace

const std::vector<std::string>& ComparisonTable::row(const std::string& parameter) const {
  for (const auto& r : rows)
    if (!r.empty() && r.front() == parameter) return r;
  throw SchemaError("comparison table has no row '" + parameter + "'");
}

ComparisonTable compare_files(const std::filesystem::path& a, const std::filesystem::path& b,
                              std::optional<double> threshold) {
  const csv::Table ta = csv::read(a), tb = csv::read(b);
  const Kind ka = kind_of(ta), kb = kind_of(tb);
  if (ka != kb)
    throw SchemaError("cannot compare a training log with a metrics file (" + a.string() + " vs " +
                      b.string() + ")");

  ComparisonTable table;
  table.columns = {"parameter", stem(a), stem(b)};
  auto add = [&](std::string name, std::string va, std::string vb) {
    table.rows.push_back({std::move(name), std::move(va), std::move(vb)});
  };

  if (ka == Kind::TrainingLog) {
    const TrainingStats sa = training_stats(ta), sb = training_stats(tb);
    const double shared =
        threshold.value_or(0.5 * std::min(sa.peak_mean_reward, sb.peak_mean_reward));
    add("training_steps", csv::format(sa.steps), csv::format(sb.steps));
    add("episodes", csv::format(sa.episodes), csv::format(sb.episodes));
    add("reward_threshold", csv::format(shared), csv::format(shared));
    add("steps_to_threshold", steps_to(sa, shared), steps_to(sb, shared));
    add("peak_mean_reward_100", csv::format(sa.peak_mean_reward), csv::format(sb.peak_mean_reward));
    add("final_mean_reward_100", csv::format(sa.final_mean_reward),
        csv::format(sb.final_mean_reward));
    add("mean_episode_length", csv::format(sa.mean_length), csv::format(sb.mean_length));
    add("final_mean_length_100", csv::format(sa.final_mean_length),
        csv::format(sb.final_mean_length));
    return table;
  }

  auto mean_row = [](const csv::Table& t) {
    const std::size_t ep = t.column("episode");
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (t.rows[r][ep] == "mean") return r;
    throw SchemaError(t.source.string() + ": metrics file has no 'mean' row");
  };
  const std::size_t ra = mean_row(ta), rb = mean_row(tb);
  for (const char* col : {"steady_state_error_x", "steady_state_error_y", "steady_state_error_z",
                          "overshoot_x", "overshoot_y", "overshoot_z", "settling_time",
                          "rms_path_error", "final_error"}) {
    const std::size_t ca = ta.column(col), cb = tb.column(col);
    add(col, ta.rows[ra][ca], tb.rows[rb][cb]);
  }
  return table;
}

void write_table_csv(std::ostream& os, const ComparisonTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

}  // namespace quadrl::app
