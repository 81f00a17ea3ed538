#include "heatplan/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json_util.hpp"

namespace heatplan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Planning tick
// ---------------------------------------------------------------------------

PlanOutput plan_tick(const Scenario& scenario, const WorldSnapshot& snapshot,
                     const Predictor& predictor, const SolverConfig& solver,
                     const PlanOptions& options) {
  PredictionBundle bundle = predictor.predict(scenario, snapshot);
  const GridFrame frame = bundle.occupancy.frame();
  NonDrivableMap nd = build_non_drivable(bundle.occupancy, scenario.map.static_objects,
                                         scenario.map.drivable_area, frame);
  const auto kernels = kernels_for_plan(bundle.initial_plan, frame, solver.vehicle);
  std::optional<DensityWindow> window;
  if (options.windowed) window = window_around(bundle.initial_plan, frame, options.window_radius);
  CollisionDensityMap density = collision_density(nd, kernels, window);

  std::optional<RefinementResult> refinement;
  Trajectory plan = bundle.initial_plan;
  if (options.use_solver) {
    SolverConfig config = solver;
    if (!options.use_heatmap_term) config.lambda_h = 0.0;
    refinement = refine(bundle.initial_plan, density, bundle.heatmap, config);
    plan = refinement->trajectory;
  }
  return {std::move(bundle), std::move(nd),         std::move(density),
          std::move(window), std::move(refinement), std::move(plan)};
}

// ---------------------------------------------------------------------------
// Reactive agents
// ---------------------------------------------------------------------------

double idm_acceleration(double speed, double desired_speed, bool has_leader, double gap,
                        double closing_speed, const IdmParams& p) {
  const double v0 = std::max(desired_speed, 1e-3);
  double a = p.accel_max * (1.0 - std::pow(std::max(speed, 0.0) / v0, p.exponent));
  if (has_leader) {
    const double s_star =
        p.min_gap + std::max(0.0, speed * p.time_headway +
                                      speed * closing_speed /
                                          (2.0 * std::sqrt(p.accel_max * p.decel_comfort)));
    const double s = std::max(gap, 1e-2);
    a -= p.accel_max * (s_star / s) * (s_star / s);
  }
  return a;
}

namespace {

Vec2 left_normal(double heading) { return {-std::sin(heading), std::cos(heading)}; }

}  // namespace

AgentState reactive_agent_step(const AgentState& agent, std::span<const AgentState> neighbors,
                               const BaselinePath& baseline, const IdmParams& params, double dt) {
  const auto& line = baseline.points;
  const PolylineProjection self = project_to_polyline(agent.pose.position(), line);

  bool has_leader = false;
  double gap = std::numeric_limits<double>::infinity();
  double closing = 0.0;
  for (const auto& n : neighbors) {
    if (n.id == agent.id) continue;
    const PolylineProjection other = project_to_polyline(n.pose.position(), line);
    if (other.arc_length <= self.arc_length) continue;
    if (std::abs(other.lateral - self.lateral) > 0.5 * (agent.width + n.width) + 0.5) continue;
    const double g = other.arc_length - self.arc_length - 0.5 * (agent.length + n.length);
    if (g < gap) {
      gap = g;
      closing = agent.speed - n.speed * std::cos(normalize_angle(n.pose.heading() - other.heading));
      has_leader = true;
    }
  }

  const double desired = params.desired_speed_factor * baseline.speed_limit;
  const double a = idm_acceleration(agent.speed, desired, has_leader, gap, closing, params);
  double speed = agent.speed + a * dt;
  double ds = 0.5 * (agent.speed + speed) * dt;
  if (speed < 0.0) {
    ds = a < 0.0 ? agent.speed * agent.speed / (-2.0 * a) : 0.0;
    speed = 0.0;
  }
  const Pose2 base = polyline_pose_at(line, self.arc_length + ds);
  AgentState next = agent;
  next.pose = Pose2(base.position() + self.lateral * left_normal(base.heading()), base.heading());
  next.speed = speed;
  return next;
}

const BaselinePath* assign_baseline(const MapData& map, const Pose2& pose) {
  const BaselinePath* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& b : map.baseline_paths) {
    if (b.points.size() < 2) continue;
    const PolylineProjection p = project_to_polyline(pose.position(), b.points);
    if (std::abs(p.lateral) > 2.5 || p.distance > 2.5) continue;
    if (std::abs(normalize_angle(pose.heading() - p.heading)) > kPi / 4.0) continue;
    if (p.distance < best_distance) {
      best_distance = p.distance;
      best = &b;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

bool is_multiple(double value, double step) {
  const double r = value / step;
  return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, std::abs(r));
}

long steps_of(double value, double step) { return std::lround(value / step); }

}  // namespace

void SimConfig::validate() const {
  if (!(sim_dt > 0.0)) throw RangeError("sim.sim_dt must be > 0");
  if (!(replan_period > 0.0) || !is_multiple(replan_period, sim_dt)) {
    throw RangeError("sim.replan_period must be a positive multiple of sim.sim_dt");
  }
  if (!(duration >= replan_period) || !is_multiple(duration, sim_dt)) {
    throw RangeError("sim.duration must be a multiple of sim.sim_dt and >= sim.replan_period");
  }
  if (!(ttc_min > 0.0) || !(ttc_horizon >= ttc_min) || !(ttc_min_speed >= 0.0)) {
    throw RangeError("sim.ttc_min must be > 0 and sim.ttc_horizon >= sim.ttc_min");
  }
  if (!(comfort.window >= sim_dt)) throw RangeError("sim.comfort.window must be >= sim.sim_dt");
  if (!(comfort.lon_accel_min < comfort.lon_accel_max) || !(comfort.lon_jerk_max > 0.0) ||
      !(comfort.lat_accel_max > 0.0) || !(comfort.yaw_rate_max > 0.0)) {
    throw RangeError("sim.comfort bounds must be positive with lon_accel_min < lon_accel_max");
  }
  if (!(idm.accel_max > 0.0) || !(idm.decel_comfort > 0.0) || !(idm.time_headway >= 0.0) ||
      !(idm.min_gap >= 0.0) || !(idm.exponent > 0.0) || !(idm.desired_speed_factor > 0.0)) {
    throw RangeError("sim.idm parameters must be positive");
  }
  if (!(progress_min > 0.0)) throw RangeError("sim.progress_min must be > 0");
  if (plan.window_radius < 1) throw RangeError("sim.plan.window_radius must be >= 1");
}

SimConfig sim_config_from_json(const json& doc) {
  using jsonu::read;
  SimConfig c;
  const std::string p = "sim";
  jsonu::reject_unknown(doc,
                        {"replan_period", "sim_dt", "duration", "agent_mode", "idm", "ttc_min",
                         "ttc_horizon", "ttc_min_speed", "comfort", "progress_min", "plan"},
                        p);
  read(doc, "replan_period", c.replan_period, p);
  read(doc, "sim_dt", c.sim_dt, p);
  read(doc, "duration", c.duration, p);
  std::string mode = c.agent_mode == AgentMode::kReactive ? "reactive" : "non_reactive";
  read(doc, "agent_mode", mode, p);
  if (mode == "reactive") {
    c.agent_mode = AgentMode::kReactive;
  } else if (mode == "non_reactive") {
    c.agent_mode = AgentMode::kNonReactive;
  } else {
    throw ParseError("config field 'sim.agent_mode': expected non_reactive or reactive");
  }
  if (auto it = doc.find("idm"); it != doc.end()) {
    const std::string q = "sim.idm";
    jsonu::reject_unknown(*it,
                          {"accel_max", "decel_comfort", "time_headway", "min_gap", "exponent",
                           "desired_speed_factor"},
                          q);
    read(*it, "accel_max", c.idm.accel_max, q);
    read(*it, "decel_comfort", c.idm.decel_comfort, q);
    read(*it, "time_headway", c.idm.time_headway, q);
    read(*it, "min_gap", c.idm.min_gap, q);
    read(*it, "exponent", c.idm.exponent, q);
    read(*it, "desired_speed_factor", c.idm.desired_speed_factor, q);
  }
  read(doc, "ttc_min", c.ttc_min, p);
  read(doc, "ttc_horizon", c.ttc_horizon, p);
  read(doc, "ttc_min_speed", c.ttc_min_speed, p);
  if (auto it = doc.find("comfort"); it != doc.end()) {
    const std::string q = "sim.comfort";
    jsonu::reject_unknown(*it,
                          {"lon_accel_min", "lon_accel_max", "lon_jerk_max", "lat_accel_max",
                           "yaw_rate_max", "window"},
                          q);
    read(*it, "lon_accel_min", c.comfort.lon_accel_min, q);
    read(*it, "lon_accel_max", c.comfort.lon_accel_max, q);
    read(*it, "lon_jerk_max", c.comfort.lon_jerk_max, q);
    read(*it, "lat_accel_max", c.comfort.lat_accel_max, q);
    read(*it, "yaw_rate_max", c.comfort.yaw_rate_max, q);
    read(*it, "window", c.comfort.window, q);
  }
  read(doc, "progress_min", c.progress_min, p);
  if (auto it = doc.find("plan"); it != doc.end()) {
    const std::string q = "sim.plan";
    jsonu::reject_unknown(*it, {"use_solver", "use_heatmap_term", "windowed", "window_radius"}, q);
    read(*it, "use_solver", c.plan.use_solver, q);
    read(*it, "use_heatmap_term", c.plan.use_heatmap_term, q);
    read(*it, "windowed", c.plan.windowed, q);
    read(*it, "window_radius", c.plan.window_radius, q);
  }
  c.validate();
  return c;
}

json to_json(const SimConfig& c) {
  return {{"replan_period", c.replan_period},
          {"sim_dt", c.sim_dt},
          {"duration", c.duration},
          {"agent_mode", c.agent_mode == AgentMode::kReactive ? "reactive" : "non_reactive"},
          {"idm",
           {{"accel_max", c.idm.accel_max},
            {"decel_comfort", c.idm.decel_comfort},
            {"time_headway", c.idm.time_headway},
            {"min_gap", c.idm.min_gap},
            {"exponent", c.idm.exponent},
            {"desired_speed_factor", c.idm.desired_speed_factor}}},
          {"ttc_min", c.ttc_min},
          {"ttc_horizon", c.ttc_horizon},
          {"ttc_min_speed", c.ttc_min_speed},
          {"comfort",
           {{"lon_accel_min", c.comfort.lon_accel_min},
            {"lon_accel_max", c.comfort.lon_accel_max},
            {"lon_jerk_max", c.comfort.lon_jerk_max},
            {"lat_accel_max", c.comfort.lat_accel_max},
            {"yaw_rate_max", c.comfort.yaw_rate_max},
            {"window", c.comfort.window}}},
          {"progress_min", c.progress_min},
          {"plan",
           {{"use_solver", c.plan.use_solver},
            {"use_heatmap_term", c.plan.use_heatmap_term},
            {"windowed", c.plan.windowed},
            {"window_radius", c.plan.window_radius}}}};
}

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

namespace {

/// Plan state at time t after its start; constant velocity past its end.
EgoState state_on_plan(const Trajectory& plan, double t) {
  if (t <= plan.duration()) {
    const auto s = plan.at_time(t);
    return {s.pose, s.speed};
  }
  const auto& last = plan.back();
  const double extra = t - plan.duration();
  return {Pose2(last.pose.position() + (last.speed * extra) * unit_from_heading(last.pose.heading()),
                last.pose.heading()),
          last.speed};
}

Polygon ego_box(const EgoState& ego, const VehicleGeometry& v) {
  return oriented_box(ego.pose, v.length, v.width);
}

Polygon agent_box(const AgentState& a) { return oriented_box(a.pose, a.length, a.width); }

bool footprint_inside(std::span<const Vec2> box, std::span<const Polygon> drivable) {
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Vec2 a = box[i];
    const Vec2 b = box[(i + 1) % box.size()];
    const int samples = std::max(1, static_cast<int>(std::ceil((b - a).norm() / 0.25)));
    for (int k = 0; k < samples; ++k) {
      const Vec2 p = a + (static_cast<double>(k) / samples) * (b - a);
      if (!point_in_any(p, drivable)) return false;
    }
  }
  return true;
}

std::vector<std::string> tick_events(const EgoState& ego, std::span<const AgentState> agents,
                                     const MapData& map, const VehicleGeometry& vehicle) {
  std::vector<std::string> events;
  const Polygon box = ego_box(ego, vehicle);
  for (const auto& a : agents) {
    if (polygons_intersect(box, agent_box(a))) events.push_back("collision:" + a.id);
  }
  for (std::size_t i = 0; i < map.static_objects.size(); ++i) {
    if (polygons_intersect(box, map.static_objects[i])) {
      events.push_back("collision:static_" + std::to_string(i));
    }
  }
  if (!footprint_inside(box, map.drivable_area)) events.push_back("off_drivable");
  return events;
}

}  // namespace

SimulationLog run_closed_loop(const Scenario& scenario, const Predictor& predictor,
                              const SolverConfig& solver, const SimConfig& config) {
  config.validate();
  solver.validate();
  if (scenario.dt * scenario.horizon + 1e-9 < config.duration) {
    throw ValidationError("scenario horizon (" + std::to_string(scenario.dt * scenario.horizon) +
                          " s) does not cover the simulation duration");
  }
  const long steps = steps_of(config.duration, config.sim_dt);
  const long replan_every = steps_of(config.replan_period, config.sim_dt);
  const bool reactive = config.agent_mode == AgentMode::kReactive;

  std::vector<const BaselinePath*> lanes(scenario.agents.size(), nullptr);
  if (reactive) {
    for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
      const auto& a = scenario.agents[i];
      if (a.kind == AgentKind::kVehicle || a.kind == AgentKind::kCyclist) {
        lanes[i] = assign_baseline(scenario.map, a.current().pose);
      }
    }
  }
  // Reactive state per scenario agent; empty when the agent is not present.
  std::vector<std::optional<AgentState>> live(scenario.agents.size());
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    const auto& a = scenario.agents[i];
    live[i] = AgentState{a.id, a.kind, a.length, a.width, a.current().pose, a.current().speed};
  }

  SimulationLog log;
  log.sim_dt = config.sim_dt;
  EgoState ego = scenario.ego_start;
  std::optional<Trajectory> active;
  double active_start = 0.0;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.sim_dt;
    TickRecord rec;
    rec.tick = static_cast<int>(k);
    rec.time = t;
    rec.ego = ego;
    for (const auto& a : live) {
      if (a) rec.agents.push_back(*a);
    }
    rec.events = tick_events(ego, rec.agents, scenario.map, solver.vehicle);

    if (k < steps && k % replan_every == 0) {
      WorldSnapshot snap{t, ego, rec.agents};
      try {
        PlanOutput out = plan_tick(scenario, snap, predictor, solver, config.plan);
        if (out.plan.duration() + 1e-9 < config.replan_period) {
          throw ValidationError("plan horizon shorter than the replan period");
        }
        PlanRecord pr{out.bundle.initial_plan, out.plan, std::nullopt, std::nullopt, true};
        bool take = true;
        if (out.refinement) {
          pr.initial_cost = out.refinement->initial_breakdown;
          pr.refined_cost = out.refinement->breakdown;
          pr.feasible = out.refinement->feasible;
          if (!pr.feasible) {
            rec.events.push_back("solver_infeasible:" + out.refinement->infeasibility);
            take = !active.has_value();
          }
        }
        if (take) {
          active = out.plan;
          active_start = t;
        } else {
          rec.events.push_back("hold_plan");
        }
        rec.plan = std::move(pr);
      } catch (const SolverError& e) {
        rec.events.push_back(std::string("planner_failure:") + e.what());
        if (!active && e.last_valid()) {
          active = *e.last_valid();
          active_start = t;
        }
      } catch (const Error& e) {
        rec.events.push_back(std::string("planner_failure:") + e.what());
      }
      if (!active) {
        throw SolverError("no executable plan at t = " + std::to_string(t), std::nullopt);
      }
    }
    log.ticks.push_back(std::move(rec));
    if (k == steps) break;

    // Advance the world to t + sim_dt.
    const double next_t = static_cast<double>(k + 1) * config.sim_dt;
    const EgoState next_ego = state_on_plan(*active, next_t - active_start);
    if (reactive) {
      std::vector<AgentState> neighbors;
      for (const auto& a : live) {
        if (a) neighbors.push_back(*a);
      }
      neighbors.push_back(
          {"ego", AgentKind::kVehicle, solver.vehicle.length, solver.vehicle.width, ego.pose, ego.speed});
      for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
        if (lanes[i] && live[i]) {
          live[i] = reactive_agent_step(*live[i], neighbors, *lanes[i], config.idm, config.sim_dt);
        } else {
          const auto& a = scenario.agents[i];
          auto st = a.state_at(next_t);
          live[i] = st ? std::optional<AgentState>(
                             AgentState{a.id, a.kind, a.length, a.width, st->pose, st->speed})
                       : std::nullopt;
        }
      }
    } else {
      std::fill(live.begin(), live.end(), std::nullopt);
      for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
        const auto& a = scenario.agents[i];
        if (auto st = a.state_at(next_t)) {
          live[i] = AgentState{a.id, a.kind, a.length, a.width, st->pose, st->speed};
        }
      }
    }
    ego = next_ego;
  }
  return log;
}

// ---------------------------------------------------------------------------
// Log serialization
// ---------------------------------------------------------------------------

namespace {

json state_json(const Pose2& pose, double speed) {
  return json::array({pose.x(), pose.y(), pose.heading(), speed});
}

CostBreakdown breakdown_from_json(const json& j) {
  CostBreakdown b;
  b.imitation = j.at("imitation").get<double>();
  b.jerk = j.at("jerk").get<double>();
  b.curvature = j.at("curvature").get<double>();
  b.curvature_rate = j.at("curvature_rate").get<double>();
  b.accel = j.at("accel").get<double>();
  b.lateral_accel = j.at("lateral_accel").get<double>();
  b.collision = j.at("collision").get<double>();
  b.heatmap = j.at("heatmap").get<double>();
  b.total = j.at("total").get<double>();
  b.empty_collision_samples = j.at("empty_collision_samples").get<int>();
  return b;
}

Pose2 pose_from(const json& a) {
  return Pose2(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
}

}  // namespace

std::string log_to_jsonl(const SimulationLog& log, const json& header) {
  std::ostringstream out;
  json h = header;
  h["type"] = "header";
  h["sim_dt"] = log.sim_dt;
  h["ticks"] = log.ticks.size();
  out << h.dump() << "\n";
  for (const auto& r : log.ticks) {
    json line;
    line["type"] = "tick";
    line["tick"] = r.tick;
    line["t"] = r.time;
    line["ego"] = state_json(r.ego.pose, r.ego.speed);
    json agents = json::array();
    for (const auto& a : r.agents) {
      agents.push_back({{"id", a.id},
                        {"kind", std::string(to_string(a.kind))},
                        {"length", a.length},
                        {"width", a.width},
                        {"state", state_json(a.pose, a.speed)}});
    }
    line["agents"] = std::move(agents);
    line["events"] = r.events;
    if (r.plan) {
      json p;
      p["initial"] = trajectory_to_json(r.plan->initial);
      p["executed"] = trajectory_to_json(r.plan->executed);
      p["initial_cost"] = r.plan->initial_cost ? to_json(*r.plan->initial_cost) : json(nullptr);
      p["refined_cost"] = r.plan->refined_cost ? to_json(*r.plan->refined_cost) : json(nullptr);
      p["feasible"] = r.plan->feasible;
      line["plan"] = std::move(p);
    }
    out << line.dump() << "\n";
  }
  return out.str();
}

void write_log(const std::filesystem::path& path, const SimulationLog& log, const json& header) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << log_to_jsonl(log, header);
  if (!f) throw IoError("write failed: " + path.string());
}

SimulationLog log_from_jsonl(std::string_view text, json* header) {
  SimulationLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  bool seen_header = false;
  int line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        log.sim_dt = j.at("sim_dt").get<double>();
        if (header) *header = j;
        seen_header = true;
        continue;
      }
      if (type != "tick") throw ParseError("unknown record type '" + type + "'");
      TickRecord r;
      r.tick = j.at("tick").get<int>();
      r.time = j.at("t").get<double>();
      const json& e = j.at("ego");
      r.ego = {pose_from(e), e.at(3).get<double>()};
      for (const auto& a : j.at("agents")) {
        const json& st = a.at("state");
        auto kind = agent_kind_from_string(a.at("kind").get<std::string>());
        if (!kind) throw ParseError("unknown agent kind");
        r.agents.push_back({a.at("id").get<std::string>(), *kind, a.at("length").get<double>(),
                            a.at("width").get<double>(), pose_from(st), st.at(3).get<double>()});
      }
      r.events = j.at("events").get<std::vector<std::string>>();
      if (auto it = j.find("plan"); it != j.end()) {
        PlanRecord p{trajectory_from_json(it->at("initial"), "plan.initial"),
                     trajectory_from_json(it->at("executed"), "plan.executed"), std::nullopt,
                     std::nullopt, it->at("feasible").get<bool>()};
        if (!it->at("initial_cost").is_null()) p.initial_cost = breakdown_from_json(it->at("initial_cost"));
        if (!it->at("refined_cost").is_null()) p.refined_cost = breakdown_from_json(it->at("refined_cost"));
        r.plan = std::move(p);
      }
      log.ticks.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError("log line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!seen_header) throw ParseError("log has no header line");
  for (std::size_t i = 0; i < log.ticks.size(); ++i) {
    if (log.ticks[i].tick != static_cast<int>(i)) throw ParseError("log ticks are not contiguous");
  }
  return log;
}

SimulationLog read_log(const std::filesystem::path& path, json* header) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return log_from_jsonl(buf.str(), header);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

json to_json(const MetricsReport& r) {
  json j;
  const auto values = metric_values(r);
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) j[kMetricNames[i]] = values[i];
  j["collision_events"] = r.collision_events;
  j["min_ttc"] = std::isfinite(r.min_ttc) ? json(r.min_ttc) : json(nullptr);
  j["ego_progress"] = r.ego_progress;
  j["expert_progress"] = r.expert_progress;
  return j;
}

std::array<double, 8> metric_values(const MetricsReport& r) {
  return {r.collisions, r.ttc, r.drivable, r.comfort, r.progress, r.speed_limit, r.direction,
          r.aggregate};
}

namespace {

std::vector<const BaselinePath*> route_baselines(const MapData& map) {
  std::vector<const BaselinePath*> out;
  for (const auto& id : map.route) {
    if (const auto* b = map.find_baseline(id)) out.push_back(b);
  }
  if (out.empty()) {
    for (const auto& b : map.baseline_paths) out.push_back(&b);
  }
  return out;
}

/// Nearest route baseline and the projection onto it.
std::pair<const BaselinePath*, PolylineProjection> nearest_baseline(
    std::span<const BaselinePath* const> lanes, Vec2 p) {
  const BaselinePath* best = nullptr;
  PolylineProjection best_proj;
  best_proj.distance = std::numeric_limits<double>::infinity();
  for (const auto* b : lanes) {
    if (b->points.size() < 2) continue;
    const PolylineProjection proj = project_to_polyline(p, b->points);
    if (proj.distance < best_proj.distance) {
      best = b;
      best_proj = proj;
    }
  }
  return {best, best_proj};
}

double min_ttc_at(const TickRecord& r, const MapData& map, const VehicleGeometry& vehicle,
                  const SimConfig& config) {
  const int steps = static_cast<int>(std::lround(config.ttc_horizon / config.sim_dt));
  const Vec2 ego_v = r.ego.speed * unit_from_heading(r.ego.pose.heading());
  for (int i = 0; i <= steps; ++i) {
    const double tau = static_cast<double>(i) * config.sim_dt;
    const Polygon ego = oriented_box(Pose2(r.ego.pose.position() + tau * ego_v, r.ego.pose.heading()),
                                     vehicle.length, vehicle.width);
    for (const auto& a : r.agents) {
      const Vec2 p = a.pose.position() + (tau * a.speed) * unit_from_heading(a.pose.heading());
      if (polygons_intersect(ego, oriented_box(Pose2(p, a.pose.heading()), a.length, a.width))) {
        return tau;
      }
    }
    for (const auto& s : map.static_objects) {
      if (polygons_intersect(ego, s)) return tau;
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

MetricsReport compute_metrics(const SimulationLog& log, const Scenario& scenario,
                              const SimConfig& config, const VehicleGeometry& vehicle) {
  MetricsReport m;
  m.min_ttc = std::numeric_limits<double>::infinity();
  const auto& ticks = log.ticks;
  if (ticks.empty()) return m;
  const std::size_t n = ticks.size();
  const auto& map = scenario.map;

  // Collisions and drivable area.
  std::vector<std::string> colliding_prev;
  std::size_t inside = 0;
  bool collided = false;
  for (const auto& r : ticks) {
    const Polygon box = ego_box(r.ego, vehicle);
    std::vector<std::string> colliding;
    for (const auto& a : r.agents) {
      if (polygons_intersect(box, agent_box(a))) colliding.push_back(a.id);
    }
    for (std::size_t i = 0; i < map.static_objects.size(); ++i) {
      if (polygons_intersect(box, map.static_objects[i])) colliding.push_back("static_" + std::to_string(i));
    }
    for (const auto& id : colliding) {
      if (std::find(colliding_prev.begin(), colliding_prev.end(), id) == colliding_prev.end()) {
        ++m.collision_events;
      }
    }
    collided = collided || !colliding.empty();
    colliding_prev = std::move(colliding);
    if (footprint_inside(box, map.drivable_area)) ++inside;

    if (r.ego.speed >= config.ttc_min_speed) {
      m.min_ttc = std::min(m.min_ttc, min_ttc_at(r, map, vehicle, config));
    }
  }
  const double count = static_cast<double>(n);
  m.collisions = collided ? 0.0 : 1.0;
  m.drivable = static_cast<double>(inside) / count;
  m.ttc = m.min_ttc >= config.ttc_min ? 1.0 : std::clamp(m.min_ttc / config.ttc_min, 0.0, 1.0);

  // Comfort: windowed central differences of the executed speed and heading.
  const long hw = std::max(1L, std::lround(0.5 * config.comfort.window / log.sim_dt));
  auto window_of = [&](std::size_t k) {
    const auto lo = static_cast<std::size_t>(std::max(0L, static_cast<long>(k) - hw));
    const auto hi = std::min(n - 1, k + static_cast<std::size_t>(hw));
    return std::pair{lo, hi};
  };
  std::vector<double> accel(n, 0.0), yaw_rate(n, 0.0);
  for (std::size_t k = 0; k < n && n > 1; ++k) {
    const auto [lo, hi] = window_of(k);
    const double span = ticks[hi].time - ticks[lo].time;
    accel[k] = (ticks[hi].ego.speed - ticks[lo].ego.speed) / span;
    yaw_rate[k] = normalize_angle(ticks[hi].ego.pose.heading() - ticks[lo].ego.pose.heading()) / span;
  }
  std::size_t comfortable = 0;
  const auto& cb = config.comfort;
  for (std::size_t k = 0; k < n; ++k) {
    double jerk = 0.0;
    if (n > 1) {
      const auto [lo, hi] = window_of(k);
      jerk = (accel[hi] - accel[lo]) / (ticks[hi].time - ticks[lo].time);
    }
    const double lat = ticks[k].ego.speed * yaw_rate[k];
    const double slack = 1e-9;
    if (accel[k] >= cb.lon_accel_min - slack && accel[k] <= cb.lon_accel_max + slack &&
        std::abs(jerk) <= cb.lon_jerk_max + slack && std::abs(lat) <= cb.lat_accel_max + slack &&
        std::abs(yaw_rate[k]) <= cb.yaw_rate_max + slack) {
      ++comfortable;
    }
  }
  m.comfort = comfortable == n ? 1.0 : static_cast<double>(comfortable) / count;

  // Route progress, speed limit and direction against the route baselines.
  const auto lanes = route_baselines(map);
  const Polyline route = map.route_polyline();
  if (route.size() >= 2) {
    auto station = [&](Vec2 p) { return project_to_polyline(p, route).arc_length; };
    m.ego_progress = station(ticks.back().ego.pose.position()) - station(ticks.front().ego.pose.position());
    const double t_end = ticks.back().time - ticks.front().time;
    m.expert_progress = station(scenario.expert_future.at_time(t_end).pose.position()) -
                        station(scenario.expert_future.front().pose.position());
    m.progress = m.expert_progress < config.progress_min
                     ? 1.0
                     : std::clamp(m.ego_progress / m.expert_progress, 0.0, 1.0);
  }
  std::size_t under_limit = 0, aligned = 0;
  for (const auto& r : ticks) {
    const auto [lane, proj] = nearest_baseline(lanes, r.ego.pose.position());
    if (!lane) {
      ++under_limit;
      ++aligned;
      continue;
    }
    if (r.ego.speed <= lane->speed_limit + 1e-9) ++under_limit;
    if (std::abs(normalize_angle(r.ego.pose.heading() - proj.heading)) <= kPi / 2.0) ++aligned;
  }
  m.speed_limit = static_cast<double>(under_limit) / count;
  m.direction = static_cast<double>(aligned) / count;
  m.aggregate = (m.collisions + m.ttc + m.drivable + m.comfort + m.progress + m.speed_limit +
                 m.direction) /
                7.0;
  return m;
}

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

unsigned thread_count_from_env() {
  const char* v = std::getenv("HEATPLAN_THREADS");
  if (v == nullptr || *v == '\0') return std::max(1u, std::thread::hardware_concurrency());
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (end == v || *end != '\0') throw ParseError("HEATPLAN_THREADS must be a non-negative integer");
  return static_cast<unsigned>(std::min(n, 1024UL));
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& job) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace heatplan
