#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "heatplan/rng.hpp"
#include "heatplan/scenario.hpp"

namespace heatplan {

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kStraightLeadStop:
      return "straight_lead_stop";
    case SyntheticKind::kCrosswalkPedestrians:
      return "crosswalk_pedestrians";
    case SyntheticKind::kUnprotectedTurn:
      return "unprotected_turn";
    case SyntheticKind::kOpenFieldObstacle:
      return "open_field_obstacle";
  }
  return "straight_lead_stop";
}

std::optional<SyntheticKind> synthetic_kind_from_string(std::string_view name) {
  for (auto k : {SyntheticKind::kStraightLeadStop, SyntheticKind::kCrosswalkPedestrians,
                 SyntheticKind::kUnprotectedTurn, SyntheticKind::kOpenFieldObstacle}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kHistorySeconds = 2.0;

std::vector<ParamSpec> with_common(std::vector<ParamSpec> specs) {
  specs.push_back({"dt", 0.5, 0.05, 1.0, "step between expert states [s]"});
  specs.push_back({"horizon", 32, 4, 400, "number of expert states"});
  specs.push_back({"jitter", 1.0, 0.0, 1.0, "scale of seed-driven parameter jitter"});
  return specs;
}

const std::vector<ParamSpec> kLeadStopSpecs = with_common({
    {"ego_speed", 10.0, 0.0, 20.0, "initial ego speed [m/s]"},
    {"lead_gap", 30.0, 10.0, 100.0, "center distance from ego to lead [m]"},
    {"lead_speed", 10.0, 0.0, 20.0, "initial lead speed [m/s]"},
    {"lead_decel", 3.0, 0.5, 8.0, "lead braking deceleration [m/s^2]"},
    {"lead_brake_time", 1.0, 0.0, 10.0, "time at which the lead starts braking [s]"},
});

const std::vector<ParamSpec> kCrosswalkSpecs = with_common({
    {"ego_speed", 8.0, 0.0, 15.0, "initial ego speed [m/s]"},
    {"crosswalk_x", 40.0, 20.0, 100.0, "distance to the crosswalk center [m]"},
    {"pedestrian_count", 2, 1, 6, "pedestrians crossing"},
    {"pedestrian_speed", 1.3, 0.5, 2.5, "walking speed [m/s]"},
});

const std::vector<ParamSpec> kTurnSpecs = with_common({
    {"ego_speed", 5.0, 1.0, 5.5, "constant ego speed [m/s]"},
    {"turn_radius", 8.0, 6.0, 20.0, "radius of the right turn [m]"},
    {"approach_length", 20.0, 5.0, 60.0, "straight distance before the turn [m]"},
    {"pedestrian_count", 1, 0, 4, "pedestrians crossing the exit road"},
});

const std::vector<ParamSpec> kObstacleSpecs = with_common({
    {"ego_speed", 8.0, 2.0, 15.0, "constant ego speed [m/s]"},
    {"obstacle_distance", 30.0, 15.0, 80.0, "distance to the obstacle center [m]"},
    {"obstacle_size", 3.0, 1.0, 5.0, "side of the square obstacle [m]"},
    {"obstacle_lateral", 0.0, -1.0, 1.0, "lateral offset of the obstacle [m]"},
});

/// Resolved parameter values with the defaults filled in.
class Params {
 public:
  Params(const std::vector<ParamSpec>& specs, const SyntheticParams& given) : specs_(specs) {
    for (const auto& [name, value] : given) {
      const auto it = std::find_if(specs.begin(), specs.end(),
                                   [&](const ParamSpec& s) { return s.name == name; });
      if (it == specs.end()) throw RangeError("unknown parameter '" + name + "'");
      if (!std::isfinite(value) || value < it->min_value || value > it->max_value) {
        throw RangeError("parameter '" + name + "' = " + std::to_string(value) +
                         " outside [" + std::to_string(it->min_value) + ", " +
                         std::to_string(it->max_value) + "]");
      }
    }
    given_ = given;
  }

  double operator[](std::string_view name) const {
    if (auto it = given_.find(name); it != given_.end()) return it->second;
    for (const auto& s : specs_) {
      if (s.name == name) return s.default_value;
    }
    throw RangeError("unknown parameter '" + std::string(name) + "'");
  }

 private:
  const std::vector<ParamSpec>& specs_;
  SyntheticParams given_;
};

/// Piecewise path of straight lines and constant-curvature arcs with exact
/// pose evaluation.
class Path {
 public:
  explicit Path(Pose2 start) : start_(start) {}

  void add(double length, double curvature) {
    Pose2 from = pieces_.empty() ? start_ : end_of(pieces_.back());
    pieces_.push_back({from, length, curvature});
  }

  double length() const {
    double total = 0.0;
    for (const auto& p : pieces_) total += p.length;
    return total;
  }

  /// Beyond the end the last piece continues as a straight line.
  Pose2 at(double s) const {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& p = pieces_[i];
      if (s <= p.length || i + 1 == pieces_.size()) {
        if (s > p.length) {
          const Pose2 end = end_of(p);
          return Pose2(end.position() + (s - p.length) * unit_from_heading(end.heading()),
                       end.heading());
        }
        return along(p, s);
      }
      s -= p.length;
    }
    return start_;
  }

  Polyline sample(double step) const {
    Polyline out;
    const double total = length();
    const int n = std::max(1, static_cast<int>(std::ceil(total / step)));
    for (int i = 0; i <= n; ++i) out.push_back(at(total * i / n).position());
    return out;
  }

 private:
  struct Piece {
    Pose2 from;
    double length;
    double curvature;
  };

  static Pose2 along(const Piece& p, double s) {
    const double h = p.from.heading();
    if (std::abs(p.curvature) < 1e-12) {
      return Pose2(p.from.position() + s * unit_from_heading(h), h);
    }
    const double k = p.curvature;
    const double dh = k * s;
    const Vec2 local{std::sin(dh) / k, (1.0 - std::cos(dh)) / k};
    return Pose2(p.from.transform(local), h + dh);
  }
  static Pose2 end_of(const Piece& p) { return along(p, p.length); }

  Pose2 start_;
  std::vector<Piece> pieces_;
};

struct IdmParams {
  double desired_speed = 10.0;
  double max_accel = 1.5;
  double comfort_decel = 2.0;
  double headway = 1.5;
  double min_gap = 2.0;
};

double idm_accel(const IdmParams& p, double v, double gap, double lead_speed) {
  const double free = 1.0 - std::pow(v / std::max(p.desired_speed, 0.1), 4);
  if (!std::isfinite(gap)) return p.max_accel * free;
  const double s_star =
      p.min_gap + std::max(0.0, v * p.headway + v * (v - lead_speed) /
                                                    (2.0 * std::sqrt(p.max_accel * p.comfort_decel)));
  const double g = std::max(gap, 0.1);
  return p.max_accel * (free - (s_star / g) * (s_star / g));
}

struct LongitudinalState {
  double t;
  double s;
  double v;
  double a;
};

/// Integrates a jerk-limited longitudinal profile. `command(t, s, v)` returns
/// the desired acceleration; the realized acceleration follows it at a
/// bounded rate and stays within comfortable limits.
std::vector<LongitudinalState> integrate_profile(
    double v0, double dt, int steps,
    const std::function<double(double, double, double)>& command) {
  constexpr int kSub = 50;
  constexpr double kJerk = 2.0;
  constexpr double kMinAccel = -3.5;
  constexpr double kMaxAccel = 2.5;
  const double h = dt / kSub;
  std::vector<LongitudinalState> out;
  LongitudinalState st{0.0, 0.0, v0, 0.0};
  out.push_back(st);
  for (int i = 1; i < steps; ++i) {
    for (int k = 0; k < kSub; ++k) {
      double target = std::clamp(command(st.t, st.s, st.v), kMinAccel, kMaxAccel);
      if (st.v <= 1e-9 && target < 0.0) target = 0.0;
      st.a += std::clamp(target - st.a, -kJerk * h, kJerk * h);
      double v_next = st.v + st.a * h;
      if (v_next < 0.0) {
        st.s += st.v * st.v / (2.0 * std::max(-st.a, 1e-9)) * (st.v > 0 ? 1.0 : 0.0);
        v_next = 0.0;
        st.a = 0.0;
      } else {
        st.s += 0.5 * (st.v + v_next) * h;
      }
      st.v = v_next;
      st.t += h;
    }
    st.t = i * dt;
    out.push_back(st);
  }
  return out;
}

Trajectory expert_along(const Path& path, const std::vector<LongitudinalState>& profile,
                        double dt) {
  std::vector<TrajectoryState> states;
  for (const auto& p : profile) states.push_back({path.at(p.s), p.v});
  return Trajectory(dt, std::move(states));
}

/// Constant-velocity history up to t=0 and a future produced by `state_at`.
AgentTrack make_agent(std::string id, AgentKind kind, double length, double width, double dt,
                      int horizon, const std::function<TimedState(double)>& state_at) {
  AgentTrack a;
  a.id = std::move(id);
  a.kind = kind;
  a.length = length;
  a.width = width;
  const int hist = static_cast<int>(std::round(kHistorySeconds / dt));
  const TimedState now = state_at(0.0);
  const Vec2 vel = now.speed * unit_from_heading(now.pose.heading());
  for (int i = -hist; i <= 0; ++i) {
    const double t = i * dt;
    a.history.push_back({t, Pose2(now.pose.position() + t * vel, now.pose.heading()), now.speed});
  }
  for (int i = 1; i < horizon; ++i) a.future.push_back(state_at(i * dt));
  return a;
}

Polygon rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

Scenario finish(MapData map, std::vector<AgentTrack> agents, Trajectory expert, double dt) {
  EgoState ego{expert.front().pose, expert.front().speed};
  const int horizon = static_cast<int>(expert.size());
  Scenario s{std::move(map), std::move(agents), ego, std::move(expert), dt, horizon};
  validate_scenario(s);
  return s;
}

Scenario straight_lead_stop(const Params& p, Rng& rng) {
  const double dt = p["dt"];
  const int horizon = static_cast<int>(p["horizon"]);
  const double j = p["jitter"];
  const double ego_speed = std::clamp(p["ego_speed"] + j * rng.uniform(-1.0, 1.0), 0.0, 20.0);
  const double gap = p["lead_gap"] + j * rng.uniform(-3.0, 3.0);
  const double lead_speed = std::clamp(p["lead_speed"] + j * rng.uniform(-1.0, 1.0), 0.0, 20.0);
  const double decel = p["lead_decel"];
  const double brake_t = std::max(0.0, p["lead_brake_time"] + j * rng.uniform(-0.5, 0.5));
  constexpr double kLeadLength = 4.5;
  const VehicleGeometry ego_geom;

  auto lead_s = [=](double t) {
    if (t <= brake_t) return gap + lead_speed * t;
    const double tb = std::min(t - brake_t, lead_speed / decel);
    return gap + lead_speed * brake_t + lead_speed * tb - 0.5 * decel * tb * tb;
  };
  auto lead_v = [=](double t) {
    if (t <= brake_t) return lead_speed;
    return std::max(0.0, lead_speed - decel * (t - brake_t));
  };

  const double y = -kLaneWidth / 2;
  MapData map;
  map.drivable_area = {rect(-60.0, -kLaneWidth, 400.0, kLaneWidth)};
  map.baseline_paths = {{"ego_lane", {{-60.0, y}, {400.0, y}}, 15.0},
                        {"opposite_lane", {{400.0, -y}, {-60.0, -y}}, 15.0}};
  map.route = {"ego_lane"};

  std::vector<AgentTrack> agents;
  agents.push_back(make_agent("lead", AgentKind::kVehicle, kLeadLength, 2.0, dt, horizon,
                              [&](double t) {
                                return TimedState{t, Pose2(lead_s(t), y, 0.0), lead_v(t)};
                              }));

  IdmParams idm;
  idm.desired_speed = std::max(ego_speed, 1.0);
  const double bumper = 0.5 * (kLeadLength + ego_geom.length);
  const auto profile = integrate_profile(ego_speed, dt, horizon, [&](double t, double s, double v) {
    return idm_accel(idm, v, lead_s(t) - s - bumper, lead_v(t));
  });
  Path path(Pose2(0.0, y, 0.0));
  path.add(400.0, 0.0);
  return finish(std::move(map), std::move(agents), expert_along(path, profile, dt), dt);
}

Scenario crosswalk_pedestrians(const Params& p, Rng& rng) {
  const double dt = p["dt"];
  const int horizon = static_cast<int>(p["horizon"]);
  const double j = p["jitter"];
  const double ego_speed = std::clamp(p["ego_speed"] + j * rng.uniform(-1.0, 1.0), 0.0, 15.0);
  const double cx = p["crosswalk_x"] + j * rng.uniform(-3.0, 3.0);
  const int count = static_cast<int>(p["pedestrian_count"]);
  const double ped_speed = p["pedestrian_speed"];
  const VehicleGeometry ego_geom;
  const double y = -kLaneWidth / 2;

  MapData map;
  map.drivable_area = {rect(-60.0, -kLaneWidth, 300.0, kLaneWidth)};
  map.baseline_paths = {{"ego_lane", {{-60.0, y}, {300.0, y}}, 15.0},
                        {"opposite_lane", {{300.0, -y}, {-60.0, -y}}, 15.0}};
  map.route = {"ego_lane"};

  struct Ped {
    double x;
    double y0;
  };
  std::vector<Ped> peds;
  for (int i = 0; i < count; ++i) {
    peds.push_back({cx - 1.0 + 2.0 * rng.unit(), -6.0 - 1.5 * i + j * rng.uniform(-0.5, 0.5)});
  }
  std::vector<AgentTrack> agents;
  for (int i = 0; i < count; ++i) {
    const Ped ped = peds[i];
    agents.push_back(make_agent("ped_" + std::to_string(i), AgentKind::kPedestrian, 0.6, 0.6, dt,
                                horizon, [&](double t) {
                                  return TimedState{
                                      t, Pose2(ped.x, ped.y0 + ped_speed * t, kPi / 2), ped_speed};
                                }));
  }

  // The expert treats the stop line as a standing leader until every
  // pedestrian has left its lane.
  constexpr double kClearY = 1.0;
  double clear_time = 0.0;
  for (const auto& ped : peds) clear_time = std::max(clear_time, (kClearY - ped.y0) / ped_speed);
  const double stop_line = cx - 3.0;
  IdmParams idm;
  idm.desired_speed = std::max(ego_speed, 1.0);
  const auto profile = integrate_profile(ego_speed, dt, horizon, [&](double t, double s, double v) {
    if (t < clear_time) {
      const double front = s + 0.5 * ego_geom.length;
      if (front < stop_line + 0.5) return idm_accel(idm, v, stop_line - front, 0.0);
    }
    return idm_accel(idm, v, std::numeric_limits<double>::infinity(), 0.0);
  });
  Path path(Pose2(0.0, y, 0.0));
  path.add(300.0, 0.0);
  return finish(std::move(map), std::move(agents), expert_along(path, profile, dt), dt);
}

Scenario unprotected_turn(const Params& p, Rng& rng) {
  const double dt = p["dt"];
  const int horizon = static_cast<int>(p["horizon"]);
  const double j = p["jitter"];
  const double radius = p["turn_radius"];
  const double ego_speed = p["ego_speed"];
  if (ego_speed * ego_speed / radius > 3.8) {
    throw RangeError("parameter 'ego_speed' too high for 'turn_radius' (lateral accel > 3.8)");
  }
  const int count = static_cast<int>(p["pedestrian_count"]);
  const double approach = p["approach_length"] + j * rng.uniform(-3.0, 3.0);
  const double h = kLaneWidth / 2;
  const double xc = -h - radius;  // turn entry x
  const double exit_y = -h - radius;
  const double x0 = xc - approach;

  MapData map;
  map.drivable_area = {rect(-80.0, -kLaneWidth, 80.0, kLaneWidth),
                       rect(-kLaneWidth, -120.0, kLaneWidth, 60.0),
                       rect(xc - 1.0, exit_y - 1.0, -kLaneWidth + 0.5, -kLaneWidth + 0.5)};
  Path turn(Pose2(xc, -h, 0.0));
  turn.add(radius * kPi / 2, -1.0 / radius);
  map.baseline_paths = {{"east_approach", {{-80.0, -h}, {xc, -h}}, 10.0},
                        {"right_turn", turn.sample(0.5), 10.0},
                        {"south_exit", {{-h, exit_y}, {-h, -120.0}}, 10.0},
                        {"east_through", {{xc, -h}, {80.0, -h}}, 10.0},
                        {"west_lane", {{80.0, h}, {-80.0, h}}, 10.0},
                        {"north_lane", {{h, -120.0}, {h, 60.0}}, 10.0}};
  map.route = {"east_approach", "right_turn", "south_exit"};

  std::vector<AgentTrack> agents;
  const double walk_y = exit_y - 15.0;
  for (int i = 0; i < count; ++i) {
    const double start_x = -6.0 - 1.5 * i + j * rng.uniform(-0.3, 0.3);
    const double speed = 1.3;
    agents.push_back(make_agent("ped_" + std::to_string(i), AgentKind::kPedestrian, 0.6, 0.6, dt,
                                horizon, [&, start_x](double t) {
                                  return TimedState{t, Pose2(start_x + speed * t, walk_y, 0.0),
                                                    speed};
                                }));
  }

  Path path(Pose2(x0, -h, 0.0));
  path.add(approach, 0.0);
  path.add(radius * kPi / 2, -1.0 / radius);
  path.add(200.0, 0.0);
  const auto profile =
      integrate_profile(ego_speed, dt, horizon, [](double, double, double) { return 0.0; });
  return finish(std::move(map), std::move(agents), expert_along(path, profile, dt), dt);
}

Scenario open_field_obstacle(const Params& p, Rng& rng) {
  const double dt = p["dt"];
  const int horizon = static_cast<int>(p["horizon"]);
  const double j = p["jitter"];
  const double ego_speed = p["ego_speed"];
  const double ox = p["obstacle_distance"] + j * rng.uniform(-3.0, 3.0);
  const double oy = p["obstacle_lateral"] + j * rng.uniform(-0.3, 0.3);
  const double half = 0.5 * p["obstacle_size"];

  MapData map;
  map.drivable_area = {rect(-40.0, -30.0, 400.0, 30.0)};
  map.baseline_paths = {{"ego_lane", {{-40.0, 0.0}, {400.0, 0.0}}, 15.0}};
  map.route = {"ego_lane"};
  map.static_objects = {rect(ox - half, oy - half, ox + half, oy + half)};

  Path path(Pose2(0.0, 0.0, 0.0));
  path.add(400.0, 0.0);
  const auto profile =
      integrate_profile(ego_speed, dt, horizon, [](double, double, double) { return 0.0; });
  return finish(std::move(map), {}, expert_along(path, profile, dt), dt);
}

}  // namespace

const std::vector<ParamSpec>& synthetic_param_specs(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kStraightLeadStop:
      return kLeadStopSpecs;
    case SyntheticKind::kCrosswalkPedestrians:
      return kCrosswalkSpecs;
    case SyntheticKind::kUnprotectedTurn:
      return kTurnSpecs;
    case SyntheticKind::kOpenFieldObstacle:
      return kObstacleSpecs;
  }
  return kLeadStopSpecs;
}

Scenario generate_synthetic(SyntheticKind kind, const SyntheticParams& params,
                            std::uint64_t seed) {
  const Params p(synthetic_param_specs(kind), params);
  Rng rng(seed ^ (static_cast<std::uint64_t>(kind) << 56));
  switch (kind) {
    case SyntheticKind::kStraightLeadStop:
      return straight_lead_stop(p, rng);
    case SyntheticKind::kCrosswalkPedestrians:
      return crosswalk_pedestrians(p, rng);
    case SyntheticKind::kUnprotectedTurn:
      return unprotected_turn(p, rng);
    case SyntheticKind::kOpenFieldObstacle:
      return open_field_obstacle(p, rng);
  }
  throw RangeError("unknown synthetic kind");
}

}  // namespace heatplan
