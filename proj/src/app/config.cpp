#include "quadrl/app/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"

namespace quadrl::app {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expect) {
  throw ConfigError(key + ": cannot parse '" + value + "' as " + expect);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, text, "a finite number");
  return out;
}

template <typename I>
I parse_integer(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  I out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
    bad_value(key, text, "an integer");
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& text, std::size_t n) {
  const auto parts = csv::split(text, ',');
  if (parts.size() != n) bad_value(key, text, n == 3 ? "x,y,z" : "a comma list");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_double(key, p));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + csv::format(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<std::string(RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class Proj>
Field real(std::string key, Proj proj) {
  return {key, [proj](RunConfig& c) { return csv::format(proj(c)); },
          [proj, key](RunConfig& c, const std::string& v) { proj(c) = parse_double(key, v); }};
}

template <typename I, class Proj>
Field integer(std::string key, Proj proj) {
  return {key, [proj](RunConfig& c) { return std::to_string(proj(c)); },
          [proj, key](RunConfig& c, const std::string& v) { proj(c) = parse_integer<I>(key, v); }};
}

template <class Proj>
Field vec3(std::string key, Proj proj) {
  return {key,
          [proj](RunConfig& c) {
            const Eigen::Vector3d& v = proj(c);
            return join({v.x(), v.y(), v.z()});
          },
          [proj, key](RunConfig& c, const std::string& v) {
            const auto p = parse_list(key, v, 3);
            proj(c) = Eigen::Vector3d(p[0], p[1], p[2]);
          }};
}

void add_axis(std::vector<Field>& f, const std::string& name,
              control::AxisGains& (*axis)(RunConfig&)) {
  f.push_back(real("pid." + name + "_kp", [axis](RunConfig& c) -> double& { return axis(c).kp; }));
  f.push_back(real("pid." + name + "_ki", [axis](RunConfig& c) -> double& { return axis(c).ki; }));
  f.push_back(real("pid." + name + "_kd", [axis](RunConfig& c) -> double& { return axis(c).kd; }));
  f.push_back(real("pid." + name + "_integral_limit",
                   [axis](RunConfig& c) -> double& { return axis(c).integral_limit; }));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    using C = RunConfig;
    f.push_back({"run.task", [](C& c) { return std::string(env::to_string(c.task)); },
                 [](C& c, const std::string& v) { c.task = env::parse_task(trim(v)); }});
    f.push_back({"run.action_space",
                 [](C& c) { return std::string(control::to_string(c.action_space)); },
                 [](C& c, const std::string& v) {
                   c.action_space = control::parse_action_space(trim(v));
                 }});
    f.push_back(integer<std::int64_t>("run.total_steps",
                                      [](C& c) -> std::int64_t& { return c.total_steps; }));
    f.push_back(integer<std::uint64_t>("run.seed", [](C& c) -> std::uint64_t& { return c.seed; }));
    f.push_back(integer<std::int64_t>(
        "run.checkpoint_interval", [](C& c) -> std::int64_t& { return c.checkpoint_interval; }));
    f.push_back({"run.precision", [](C& c) { return std::string(to_string(c.precision)); },
                 [](C& c, const std::string& v) {
                   const std::string t = trim(v);
                   if (t == "f32") c.precision = Precision::F32;
                   else if (t == "f64") c.precision = Precision::F64;
                   else bad_value("run.precision", v, "f32 or f64");
                 }});

    f.push_back(real("quad.mass", [](C& c) -> double& { return c.env.quad.mass; }));
    f.push_back(vec3("quad.inertia", [](C& c) -> Eigen::Vector3d& { return c.env.quad.inertia; }));
    f.push_back(real("quad.arm_length", [](C& c) -> double& { return c.env.quad.arm_length; }));
    f.push_back(real("quad.thrust_coeff", [](C& c) -> double& { return c.env.quad.thrust_coeff; }));
    f.push_back(real("quad.torque_coeff", [](C& c) -> double& { return c.env.quad.torque_coeff; }));
    f.push_back(real("quad.rpm_min", [](C& c) -> double& { return c.env.quad.rpm_min; }));
    f.push_back(real("quad.rpm_max", [](C& c) -> double& { return c.env.quad.rpm_max; }));
    f.push_back(real("quad.gravity", [](C& c) -> double& { return c.env.quad.gravity; }));
    f.push_back(real("quad.physics_dt", [](C& c) -> double& { return c.env.quad.physics_dt; }));
    f.push_back(real("quad.motor_time_constant",
                     [](C& c) -> double& { return c.env.quad.motor_time_constant; }));

    add_axis(f, "roll", [](C& c) -> control::AxisGains& { return c.env.pid.roll; });
    add_axis(f, "pitch", [](C& c) -> control::AxisGains& { return c.env.pid.pitch; });
    add_axis(f, "yaw", [](C& c) -> control::AxisGains& { return c.env.pid.yaw; });

    f.push_back(real("env.agent_frequency",
                     [](C& c) -> double& { return c.env.env.agent_frequency; }));
    f.push_back(integer<int>("env.max_steps", [](C& c) -> int& { return c.env.env.max_steps; }));
    f.push_back(vec3("env.bounds_min",
                     [](C& c) -> Eigen::Vector3d& { return c.env.env.flight_bounds.lo; }));
    f.push_back(vec3("env.bounds_max",
                     [](C& c) -> Eigen::Vector3d& { return c.env.env.flight_bounds.hi; }));
    f.push_back(vec3("env.init_min",
                     [](C& c) -> Eigen::Vector3d& { return c.env.env.init_position_range.lo; }));
    f.push_back(vec3("env.init_max",
                     [](C& c) -> Eigen::Vector3d& { return c.env.env.init_position_range.hi; }));
    f.push_back(vec3("env.target_min",
                     [](C& c) -> Eigen::Vector3d& { return c.env.env.target_range.lo; }));
    f.push_back(vec3("env.target_max",
                     [](C& c) -> Eigen::Vector3d& { return c.env.env.target_range.hi; }));
    f.push_back(real("env.crash_altitude", [](C& c) -> double& { return c.env.env.crash_altitude; }));
    f.push_back(real("env.attitude_abort", [](C& c) -> double& { return c.env.env.attitude_abort; }));
    f.push_back(real("env.crash_penalty", [](C& c) -> double& { return c.env.env.crash_penalty; }));
    f.push_back(real("env.rpm_action_scale",
                     [](C& c) -> double& { return c.env.env.rpm_action_scale; }));

    f.push_back(real("reward.scale", [](C& c) -> double& { return c.env.reward.scale; }));
    f.push_back(real("reward.sigma", [](C& c) -> double& { return c.env.reward.sigma; }));
    f.push_back(real("reward.distance_floor",
                     [](C& c) -> double& { return c.env.reward.distance_floor; }));

    f.push_back(real("sac.learning_rate", [](C& c) -> double& { return c.sac.learning_rate; }));
    f.push_back(integer<std::size_t>("sac.buffer_capacity",
                                     [](C& c) -> std::size_t& { return c.sac.buffer_capacity; }));
    f.push_back(integer<std::size_t>("sac.learning_starts",
                                     [](C& c) -> std::size_t& { return c.sac.learning_starts; }));
    f.push_back(integer<std::size_t>("sac.batch_size",
                                     [](C& c) -> std::size_t& { return c.sac.batch_size; }));
    f.push_back(real("sac.tau", [](C& c) -> double& { return c.sac.tau; }));
    f.push_back(real("sac.gamma", [](C& c) -> double& { return c.sac.gamma; }));
    f.push_back({"sac.target_entropy",
                 [](C& c) {
                   return c.sac.target_entropy ? csv::format(*c.sac.target_entropy)
                                               : std::string("auto");
                 },
                 [](C& c, const std::string& v) {
                   if (trim(v) == "auto") c.sac.target_entropy.reset();
                   else c.sac.target_entropy = parse_double("sac.target_entropy", v);
                 }});
    f.push_back(integer<int>("sac.updates_per_step",
                             [](C& c) -> int& { return c.sac.updates_per_step; }));
    f.push_back({"sac.hidden",
                 [](C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.sac.hidden.size(); ++i)
                     s += (i ? "," : "") + std::to_string(c.sac.hidden[i]);
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   std::vector<int> widths;
                   for (const auto& p : csv::split(v, ','))
                     widths.push_back(parse_integer<int>("sac.hidden", p));
                   c.sac.hidden = widths;
                 }});
    f.push_back(real("sac.leaky_slope", [](C& c) -> double& { return c.sac.leaky_slope; }));
    f.push_back(real("sac.log_std_min", [](C& c) -> double& { return c.sac.log_std_min; }));
    f.push_back(real("sac.log_std_max", [](C& c) -> double& { return c.sac.log_std_max; }));
    f.push_back(real("sac.initial_alpha", [](C& c) -> double& { return c.sac.initial_alpha; }));
    f.push_back(real("sac.final_layer_init", [](C& c) -> double& { return c.sac.final_layer_init; }));

    f.push_back(integer<int>("eval.episodes", [](C& c) -> int& { return c.eval_episodes; }));
    f.push_back(integer<std::uint64_t>("eval.seed", [](C& c) -> std::uint64_t& { return c.eval_seed; }));
    f.push_back(real("eval.settling_band", [](C& c) -> double& { return c.metrics.settling_band; }));
    f.push_back(real("eval.steady_window", [](C& c) -> double& { return c.metrics.steady_window; }));

    f.push_back(real("path.helix_radius", [](C& c) -> double& { return c.helix.radius; }));
    f.push_back(real("path.helix_height", [](C& c) -> double& { return c.helix.height; }));
    f.push_back(real("path.helix_turns", [](C& c) -> double& { return c.helix.turns; }));
    f.push_back(real("path.helix_duration", [](C& c) -> double& { return c.helix.duration; }));
    f.push_back(vec3("path.helix_start", [](C& c) -> Eigen::Vector3d& { return c.helix.start; }));
    f.push_back(real("path.lemniscate_half_width",
                     [](C& c) -> double& { return c.lemniscate.half_width; }));
    f.push_back(real("path.lemniscate_height", [](C& c) -> double& { return c.lemniscate.height; }));
    f.push_back(real("path.lemniscate_duration",
                     [](C& c) -> double& { return c.lemniscate.duration; }));
    f.push_back({"path.lemniscate_center",
                 [](C& c) { return join({c.lemniscate.center.x(), c.lemniscate.center.y()}); },
                 [](C& c, const std::string& v) {
                   const auto p = parse_list("path.lemniscate_center", v, 2);
                   c.lemniscate.center = {p[0], p[1]};
                 }});
    return f;
  }();
  return table;
}

}  // namespace

const char* to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

void RunConfig::validate() const {
  env.validate();
  sac.validate();
  if (total_steps <= 0) throw ConfigError("run.total_steps must be > 0");
  if (checkpoint_interval <= 0) throw ConfigError("run.checkpoint_interval must be > 0");
  if (eval_episodes <= 0) throw ConfigError("eval.episodes must be > 0");
  if (!(metrics.settling_band > 0.0)) throw ConfigError("eval.settling_band must be > 0");
  if (!(metrics.steady_window > 0.0)) throw ConfigError("eval.steady_window must be > 0");
  eval::validate(helix);
  eval::validate(lemniscate);
}

std::vector<std::pair<std::string, std::string>> to_entries(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(copy));
  return out;
}

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& [key, value] : to_entries(cfg)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  return os.str();
}

void set_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const std::string key = trim(dotted_key);
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_ini_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(origin + ": key '" + section + "' must be inside a [section]");
    for (const auto& [key, node] : body) {
      try {
        set_value(cfg, section + "." + key, node.data());
      } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
      }
    }
  }
}

void apply_ini_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_ini_text(cfg, ss.str(), path.string());
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    set_value(cfg, o.substr(0, eq), o.substr(eq + 1));
  }
}

void apply_profile(RunConfig& cfg, const std::string& name) {
  if (name == "full-stabilize") {
    cfg.task = env::Task::Stabilize;
    cfg.total_steps = 2'750'000;
  } else if (name == "full-track") {
    cfg.task = env::Task::TrackRandom;
    cfg.total_steps = 1'000'000;
  } else if (name == "desk") {
    cfg.task = env::Task::Stabilize;
    cfg.total_steps = 300'000;
  } else {
    throw ConfigError("unknown profile '" + name + "' (full-stabilize, full-track, desk)");
  }
}

}  // namespace quadrl::app
