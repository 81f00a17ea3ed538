#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatplan/errors.hpp"
#include "heatplan/geometry.hpp"

namespace heatplan {

enum class AgentKind { kVehicle, kPedestrian, kCyclist, kStatic };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> agent_kind_from_string(std::string_view name);

struct TimedState {
  double t = 0.0;
  Pose2 pose;
  double speed = 0.0;

  friend bool operator==(const TimedState&, const TimedState&) = default;
};

struct AgentTrack {
  std::string id;
  AgentKind kind = AgentKind::kVehicle;
  double length = 4.5;
  double width = 2.0;
  std::vector<TimedState> history;  // t <= 0, ends at the current state
  std::vector<TimedState> future;   // t > 0, ground truth

  const TimedState& current() const { return history.back(); }
  /// Interpolated ground-truth state over history and future. Empty outside
  /// the covered time span.
  std::optional<TimedState> state_at(double t) const;
  double last_time() const { return future.empty() ? history.back().t : future.back().t; }

  friend bool operator==(const AgentTrack&, const AgentTrack&) = default;
};

struct BaselinePath {
  std::string id;
  Polyline points;
  double speed_limit = 15.0;

  friend bool operator==(const BaselinePath&, const BaselinePath&) = default;
};

struct MapData {
  std::vector<Polygon> drivable_area;
  std::vector<BaselinePath> baseline_paths;
  std::vector<std::string> route;
  std::vector<Polygon> static_objects;

  const BaselinePath* find_baseline(std::string_view id) const;
  /// Concatenated polyline of the route baselines, in route order.
  Polyline route_polyline() const;

  friend bool operator==(const MapData&, const MapData&) = default;
};

struct EgoState {
  Pose2 pose;
  double speed = 0.0;

  friend bool operator==(const EgoState&, const EgoState&) = default;
};

struct Scenario {
  MapData map;
  std::vector<AgentTrack> agents;
  EgoState ego_start;
  Trajectory expert_future;
  double dt = 0.5;
  int horizon = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks every data-model invariant; throws ValidationError naming the
/// first violation.
void validate_scenario(const Scenario& scenario);

/// Parses and validates a scenario document. Schema problems raise
/// ParseError (the message names the field); invariant problems raise
/// ValidationError.
Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Canonical serialization: fixed key order, round-trip exact doubles.
std::string save_scenario(const Scenario& scenario);
void save_scenario_file(const std::filesystem::path& path, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Synthetic scenario generators
// ---------------------------------------------------------------------------

enum class SyntheticKind { kStraightLeadStop, kCrosswalkPedestrians, kUnprotectedTurn, kOpenFieldObstacle };

std::string_view to_string(SyntheticKind kind);
std::optional<SyntheticKind> synthetic_kind_from_string(std::string_view name);

/// Named numeric parameters. Unknown names and out-of-range values raise
/// RangeError naming the parameter.
using SyntheticParams = std::map<std::string, double, std::less<>>;

struct ParamSpec {
  std::string name;
  double default_value;
  double min_value;
  double max_value;
  std::string description;
};

/// Parameter table (names, defaults, inclusive ranges) for a kind.
const std::vector<ParamSpec>& synthetic_param_specs(SyntheticKind kind);

/// Pure function of (kind, params, seed). The expert future always passes the
/// solver's default hard-bound check.
Scenario generate_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed);

}  // namespace heatplan
