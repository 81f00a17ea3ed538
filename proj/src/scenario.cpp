#include "heatplan/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

namespace heatplan {

using nlohmann::json;

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kVehicle:
      return "vehicle";
    case AgentKind::kPedestrian:
      return "pedestrian";
    case AgentKind::kCyclist:
      return "cyclist";
    case AgentKind::kStatic:
      return "static";
  }
  return "vehicle";
}

std::optional<AgentKind> agent_kind_from_string(std::string_view name) {
  if (name == "vehicle") return AgentKind::kVehicle;
  if (name == "pedestrian") return AgentKind::kPedestrian;
  if (name == "cyclist") return AgentKind::kCyclist;
  if (name == "static") return AgentKind::kStatic;
  return std::nullopt;
}

std::optional<TimedState> AgentTrack::state_at(double t) const {
  const TimedState* prev = nullptr;
  auto visit = [&](const TimedState& s) -> std::optional<TimedState> {
    if (s.t == t) return s;
    if (s.t > t) {
      if (prev == nullptr) return TimedState{};  // sentinel: before start
      const double f = (t - prev->t) / (s.t - prev->t);
      const double heading =
          prev->pose.heading() + f * normalize_angle(s.pose.heading() - prev->pose.heading());
      return TimedState{t,
                        Pose2(prev->pose.x() + f * (s.pose.x() - prev->pose.x()),
                              prev->pose.y() + f * (s.pose.y() - prev->pose.y()), heading),
                        prev->speed + f * (s.speed - prev->speed)};
    }
    prev = &s;
    return std::nullopt;
  };
  if (history.empty() || t < history.front().t) return std::nullopt;
  for (const auto& s : history) {
    if (auto r = visit(s)) return r;
  }
  for (const auto& s : future) {
    if (auto r = visit(s)) return r;
  }
  return std::nullopt;
}

const BaselinePath* MapData::find_baseline(std::string_view id) const {
  for (const auto& b : baseline_paths) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

Polyline MapData::route_polyline() const {
  Polyline out;
  for (const auto& id : route) {
    const BaselinePath* b = find_baseline(id);
    if (b == nullptr) continue;
    for (const Vec2& p : b->points) {
      if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void validate_timed(const std::vector<TimedState>& states, const std::string& where) {
  for (std::size_t i = 1; i < states.size(); ++i) {
    require(states[i].t > states[i - 1].t, where + ": timestamps must be strictly increasing");
  }
  for (const auto& s : states) {
    require(std::isfinite(s.t) && std::isfinite(s.speed), where + ": non-finite value");
  }
}

}  // namespace

void validate_scenario(const Scenario& s) {
  require(s.dt > 0.0 && std::isfinite(s.dt), "dt must be positive");
  require(std::abs(s.expert_future.dt() - s.dt) < 1e-12, "expert_future.dt must equal dt");
  require(s.horizon >= 2, "horizon must be at least 2");
  require(static_cast<int>(s.expert_future.size()) == s.horizon,
          "expert_future length must equal horizon");
  require(std::isfinite(s.ego_start.speed) && s.ego_start.speed >= 0.0,
          "ego.speed must be finite and non-negative");

  std::set<std::string, std::less<>> ids;
  for (const auto& b : s.map.baseline_paths) {
    require(!b.id.empty(), "baseline_paths: empty id");
    require(ids.insert(b.id).second, "baseline_paths: duplicate id '" + b.id + "'");
    require(b.points.size() >= 2, "baseline_paths[" + b.id + "]: needs at least two points");
    require(b.speed_limit > 0.0, "baseline_paths[" + b.id + "]: speed_limit must be positive");
  }
  for (const auto& r : s.map.route) {
    require(ids.contains(r), "route references unknown baseline id '" + r + "'");
  }
  for (std::size_t i = 0; i < s.map.drivable_area.size(); ++i) {
    require(is_simple_polygon(s.map.drivable_area[i]),
            "drivable_area[" + std::to_string(i) + "] is not a simple polygon");
  }
  for (std::size_t i = 0; i < s.map.static_objects.size(); ++i) {
    require(is_simple_polygon(s.map.static_objects[i]),
            "static_objects[" + std::to_string(i) + "] is not a simple polygon");
  }
  std::set<std::string, std::less<>> agent_ids;
  for (const auto& a : s.agents) {
    const std::string where = "agents[" + a.id + "]";
    require(agent_ids.insert(a.id).second, "agents: duplicate id '" + a.id + "'");
    require(a.length > 0.0 && a.width > 0.0, where + ": footprint must be positive");
    require(!a.history.empty(), where + ": history must contain the current state");
    validate_timed(a.history, where + ".history");
    validate_timed(a.future, where + ".future");
    require(a.history.back().t <= 0.0, where + ": history must end at or before t=0");
    if (!a.future.empty()) {
      require(a.future.front().t > a.history.back().t,
              where + ": future must start after history");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError("scenario field '" + field + "': " + what);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

Vec2 point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

Polyline points(const json& v, const std::string& path) {
  Polyline out;
  const json& arr = array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(point(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<Polygon> polygons(const json& v, const std::string& path) {
  std::vector<Polygon> out;
  const json& arr = array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(points(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<TimedState> timed_states(const json& v, const std::string& path) {
  std::vector<TimedState> out;
  const json& arr = array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!arr[i].is_array() || arr[i].size() != 5) fail(p, "expected [t, x, y, heading, speed]");
    out.push_back({number(arr[i][0], p), Pose2(number(arr[i][1], p), number(arr[i][2], p),
                                               number(arr[i][3], p)),
                   number(arr[i][4], p)});
  }
  return out;
}

json dump_point(Vec2 p) { return json::array({p.x, p.y}); }

json dump_points(const Polyline& line) {
  json arr = json::array();
  for (const Vec2& p : line) arr.push_back(dump_point(p));
  return arr;
}

json dump_polygons(const std::vector<Polygon>& polys) {
  json arr = json::array();
  for (const auto& p : polys) arr.push_back(dump_points(p));
  return arr;
}

json dump_timed(const std::vector<TimedState>& states) {
  json arr = json::array();
  for (const auto& s : states) {
    arr.push_back(json::array({s.t, s.pose.x(), s.pose.y(), s.pose.heading(), s.speed}));
  }
  return arr;
}

}  // namespace

json trajectory_to_json(const Trajectory& traj) {
  json states = json::array();
  for (const auto& s : traj.states()) {
    states.push_back(json::array({s.pose.x(), s.pose.y(), s.pose.heading(), s.speed}));
  }
  json out = json::object();
  out["dt"] = traj.dt();
  out["states"] = std::move(states);
  return out;
}

Trajectory trajectory_from_json(const json& v, const std::string& path) {
  reject_unknown(v, {"dt", "states"}, path);
  const double dt = number(member(v, "dt", path), path + ".dt");
  const json& arr = array(member(v, "states", path), path + ".states");
  std::vector<TrajectoryState> states;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + ".states[" + std::to_string(i) + "]";
    if (!arr[i].is_array() || arr[i].size() != 4) fail(p, "expected [x, y, heading, speed]");
    states.push_back({Pose2(number(arr[i][0], p), number(arr[i][1], p), number(arr[i][2], p)),
                      number(arr[i][3], p)});
  }
  try {
    return Trajectory(dt, std::move(states));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

Scenario load_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("<root>", "expected an object");
  reject_unknown(doc, {"map", "agents", "ego", "expert_future", "dt", "horizon"}, "");

  MapData map;
  const json& m = member(doc, "map", "");
  reject_unknown(m, {"drivable_area", "baseline_paths", "route", "static_objects"}, "map");
  map.drivable_area = polygons(member(m, "drivable_area", "map"), "map.drivable_area");
  map.static_objects = polygons(member(m, "static_objects", "map"), "map.static_objects");
  const json& bl = array(member(m, "baseline_paths", "map"), "map.baseline_paths");
  for (std::size_t i = 0; i < bl.size(); ++i) {
    const std::string p = "map.baseline_paths[" + std::to_string(i) + "]";
    reject_unknown(bl[i], {"id", "points", "speed_limit"}, p);
    map.baseline_paths.push_back({text(member(bl[i], "id", p), p + ".id"),
                                  points(member(bl[i], "points", p), p + ".points"),
                                  number(member(bl[i], "speed_limit", p), p + ".speed_limit")});
  }
  const json& route = array(member(m, "route", "map"), "map.route");
  for (std::size_t i = 0; i < route.size(); ++i) {
    map.route.push_back(text(route[i], "map.route[" + std::to_string(i) + "]"));
  }

  std::vector<AgentTrack> agents;
  const json& ag = array(member(doc, "agents", ""), "agents");
  for (std::size_t i = 0; i < ag.size(); ++i) {
    const std::string p = "agents[" + std::to_string(i) + "]";
    reject_unknown(ag[i], {"id", "kind", "length", "width", "history", "future"}, p);
    AgentTrack a;
    a.id = text(member(ag[i], "id", p), p + ".id");
    const std::string kind = text(member(ag[i], "kind", p), p + ".kind");
    const auto k = agent_kind_from_string(kind);
    if (!k) fail(p + ".kind", "unknown agent kind '" + kind + "'");
    a.kind = *k;
    a.length = number(member(ag[i], "length", p), p + ".length");
    a.width = number(member(ag[i], "width", p), p + ".width");
    a.history = timed_states(member(ag[i], "history", p), p + ".history");
    a.future = timed_states(member(ag[i], "future", p), p + ".future");
    agents.push_back(std::move(a));
  }

  const json& ego = member(doc, "ego", "");
  reject_unknown(ego, {"x", "y", "heading", "speed"}, "ego");
  EgoState ego_start{Pose2(number(member(ego, "x", "ego"), "ego.x"),
                           number(member(ego, "y", "ego"), "ego.y"),
                           number(member(ego, "heading", "ego"), "ego.heading")),
                     number(member(ego, "speed", "ego"), "ego.speed")};

  Trajectory expert = trajectory_from_json(member(doc, "expert_future", ""), "expert_future");
  const double dt = number(member(doc, "dt", ""), "dt");
  const json& hz = member(doc, "horizon", "");
  if (!hz.is_number_integer()) fail("horizon", "expected an integer");

  Scenario s{std::move(map), std::move(agents), ego_start, std::move(expert), dt,
             hz.get<int>()};
  validate_scenario(s);
  return s;
}

std::string save_scenario(const Scenario& s) {
  json doc = json::object();
  json m = json::object();
  m["drivable_area"] = dump_polygons(s.map.drivable_area);
  json bl = json::array();
  for (const auto& b : s.map.baseline_paths) {
    json o = json::object();
    o["id"] = b.id;
    o["points"] = dump_points(b.points);
    o["speed_limit"] = b.speed_limit;
    bl.push_back(std::move(o));
  }
  m["baseline_paths"] = std::move(bl);
  m["route"] = s.map.route;
  m["static_objects"] = dump_polygons(s.map.static_objects);
  doc["map"] = std::move(m);

  json agents = json::array();
  for (const auto& a : s.agents) {
    json o = json::object();
    o["id"] = a.id;
    o["kind"] = std::string(to_string(a.kind));
    o["length"] = a.length;
    o["width"] = a.width;
    o["history"] = dump_timed(a.history);
    o["future"] = dump_timed(a.future);
    agents.push_back(std::move(o));
  }
  doc["agents"] = std::move(agents);
  doc["ego"] = {{"x", s.ego_start.pose.x()},
                {"y", s.ego_start.pose.y()},
                {"heading", s.ego_start.pose.heading()},
                {"speed", s.ego_start.speed}};
  doc["expert_future"] = trajectory_to_json(s.expert_future);
  doc["dt"] = s.dt;
  doc["horizon"] = s.horizon;
  return doc.dump(1) + "\n";
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open scenario file: " + path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return load_scenario(text);
}

void save_scenario_file(const std::filesystem::path& path, const Scenario& scenario) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << save_scenario(scenario);
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace heatplan
