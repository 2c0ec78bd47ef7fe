#include "quadrl/eval/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"

namespace quadrl::eval {

namespace {

// Angle of the fractional part of `cycles`, so whole cycles land exactly on 0.
double cycle_angle(double cycles) {
  return 2.0 * std::numbers::pi * (cycles - std::floor(cycles));
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

double duration(const PathSpec& spec) {
  return std::visit(Overloaded{[](const Helix& h) { return h.duration; },
                               [](const Lemniscate& l) { return l.duration; },
                               [](const WaypointList& w) {
                                 return w.points.empty() ? 0.0 : w.points.back().t;
                               }},
                    spec);
}

void validate(const PathSpec& spec) {
  std::visit(Overloaded{[](const Helix& h) {
                          if (!(h.radius > 0.0)) throw ConfigError("helix radius must be > 0");
                          if (!(h.duration > 0.0)) throw ConfigError("helix duration must be > 0");
                          if (!(h.turns > 0.0)) throw ConfigError("helix turns must be > 0");
                        },
                        [](const Lemniscate& l) {
                          if (!(l.half_width > 0.0))
                            throw ConfigError("lemniscate half_width must be > 0");
                          if (!(l.duration > 0.0))
                            throw ConfigError("lemniscate duration must be > 0");
                        },
                        [](const WaypointList& w) {
                          if (w.points.size() < 2)
                            throw ConfigError("waypoint path needs at least two points");
                          if (w.points.front().t != 0.0)
                            throw ConfigError("waypoint path must start at t = 0");
                          for (std::size_t i = 1; i < w.points.size(); ++i)
                            if (!(w.points[i].t > w.points[i - 1].t))
                              throw ConfigError("waypoint times must be strictly increasing");
                        }},
             spec);
}

Eigen::Vector3d sample_path(const PathSpec& spec, double t) {
  const double total = duration(spec);
  if (!(t >= 0.0 && t <= total))
    throw OutOfDomain("path time " + std::to_string(t) + " outside [0, " + std::to_string(total) +
                      "]");
  return std::visit(
      Overloaded{
          [t](const Helix& h) -> Eigen::Vector3d {
            const double s = t / h.duration;
            const double a = cycle_angle(h.turns * s);
            return {h.start.x() + h.radius * (std::cos(a) - 1.0),
                    h.start.y() + h.radius * std::sin(a), h.start.z() + h.height * s};
          },
          [t](const Lemniscate& l) -> Eigen::Vector3d {
            const double a = cycle_angle(t / l.duration);
            const double s = std::sin(a);
            return {l.center.x() + l.half_width * s, l.center.y() + l.half_width * s * std::cos(a),
                    l.height};
          },
          [t](const WaypointList& w) -> Eigen::Vector3d {
            const auto& p = w.points;
            auto hi = std::upper_bound(p.begin(), p.end(), t,
                                       [](double v, const Waypoint& q) { return v < q.t; });
            if (hi == p.end()) return p.back().position;
            const auto lo = std::prev(hi);
            const double f = (t - lo->t) / (hi->t - lo->t);
            return lo->position + f * (hi->position - lo->position);
          }},
      spec);
}

WaypointList read_waypoints(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("path file not found: " + path.string());
  const csv::Table table = csv::read(path);
  const std::size_t ct = table.column("t"), cx = table.column("x"), cy = table.column("y"),
                    cz = table.column("z");
  WaypointList w;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(table.lines[r]);
    Waypoint p;
    p.t = table.number(r, ct);
    p.position = {table.number(r, cx), table.number(r, cy), table.number(r, cz)};
    if (!std::isfinite(p.t) || !p.position.allFinite())
      throw ConfigError(where + ": waypoint values must be finite");
    if (w.points.empty() && p.t != 0.0) throw ConfigError(where + ": first waypoint must have t = 0");
    if (!w.points.empty() && !(p.t > w.points.back().t))
      throw ConfigError(where + ": waypoint times must be strictly increasing");
    w.points.push_back(p);
  }
  if (w.points.size() < 2) throw ConfigError(path.string() + ": need at least two waypoints");
  return w;
}

}  // namespace quadrl::eval
