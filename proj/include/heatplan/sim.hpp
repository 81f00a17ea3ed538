#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatplan/collision.hpp"
#include "heatplan/predictor.hpp"
#include "heatplan/scenario.hpp"
#include "heatplan/solver.hpp"

namespace heatplan {

// ---------------------------------------------------------------------------
// One planning tick
// ---------------------------------------------------------------------------

struct PlanOptions {
  bool use_solver = true;
  bool use_heatmap_term = true;
  bool windowed = true;
  int window_radius = 32;
};

struct PlanOutput {
  PredictionBundle bundle;
  NonDrivableMap non_drivable;
  CollisionDensityMap density;
  std::optional<DensityWindow> window;
  std::optional<RefinementResult> refinement;  // empty with use_solver == false
  /// Refined trajectory when the solver ran, else the initial plan.
  Trajectory plan;
};

/// predict -> non-drivable map -> collision density -> refine.
PlanOutput plan_tick(const Scenario& scenario, const WorldSnapshot& snapshot,
                     const Predictor& predictor, const SolverConfig& solver,
                     const PlanOptions& options = {});

// ---------------------------------------------------------------------------
// Reactive agents
// ---------------------------------------------------------------------------

struct IdmParams {
  double accel_max = 1.5;
  double decel_comfort = 2.0;
  double time_headway = 1.5;
  double min_gap = 2.0;
  double exponent = 4.0;
  /// Multiplier on the baseline speed limit giving the desired speed.
  double desired_speed_factor = 1.0;
};

/// Free-road term plus interaction term; `gap` and `closing_speed` are
/// ignored when `has_leader` is false.
double idm_acceleration(double speed, double desired_speed, bool has_leader, double gap,
                        double closing_speed, const IdmParams& params);

/// Advances a vehicle along its baseline (keeping its lateral offset) with
/// the IDM acceleration towards the nearest neighbour ahead in its lane.
AgentState reactive_agent_step(const AgentState& agent, std::span<const AgentState> neighbors,
                               const BaselinePath& baseline, const IdmParams& params, double dt);

/// Baseline a vehicle follows: nearest baseline within 2.5 m laterally whose
/// direction is within pi/4 of the agent heading.
const BaselinePath* assign_baseline(const MapData& map, const Pose2& pose);

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

enum class AgentMode { kNonReactive, kReactive };

struct ComfortBounds {
  double lon_accel_min = -4.05;
  double lon_accel_max = 2.40;
  double lon_jerk_max = 4.13;
  double lat_accel_max = 4.89;
  double yaw_rate_max = 0.95;
  /// Differentiation window for the comfort signals [s].
  double window = 0.5;
};

struct SimConfig {
  double replan_period = 0.5;
  double sim_dt = 0.1;
  double duration = 8.0;
  AgentMode agent_mode = AgentMode::kNonReactive;
  IdmParams idm;
  double ttc_min = 1.0;
  double ttc_horizon = 3.0;
  /// Below this ego speed no time-to-collision is evaluated [m/s].
  double ttc_min_speed = 0.1;
  ComfortBounds comfort;
  /// Expert progress below this counts as "no progress expected" [m].
  double progress_min = 1.0;
  PlanOptions plan;

  void validate() const;
};

SimConfig sim_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SimConfig& config);

struct PlanRecord {
  Trajectory initial;
  Trajectory executed;
  std::optional<CostBreakdown> initial_cost;
  std::optional<CostBreakdown> refined_cost;
  bool feasible = true;
};

struct TickRecord {
  int tick = 0;
  double time = 0.0;
  EgoState ego;
  std::vector<AgentState> agents;
  std::vector<std::string> events;
  std::optional<PlanRecord> plan;
};

struct SimulationLog {
  std::vector<TickRecord> ticks;
  double sim_dt = 0.1;
};

/// Deterministic for fixed inputs. Planner failures are logged as events
/// and the last executable plan is held.
SimulationLog run_closed_loop(const Scenario& scenario, const Predictor& predictor,
                              const SolverConfig& solver, const SimConfig& config);

/// JSON lines: a header with the scenario and configs, then one line per tick.
std::string log_to_jsonl(const SimulationLog& log, const nlohmann::json& header);
void write_log(const std::filesystem::path& path, const SimulationLog& log,
               const nlohmann::json& header);

/// Parses a log written by log_to_jsonl. The header is returned separately.
SimulationLog log_from_jsonl(std::string_view text, nlohmann::json* header = nullptr);
SimulationLog read_log(const std::filesystem::path& path, nlohmann::json* header = nullptr);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct MetricsReport {
  double collisions = 1.0;
  double ttc = 1.0;
  double drivable = 1.0;
  double comfort = 1.0;
  double progress = 1.0;
  double speed_limit = 1.0;
  double direction = 1.0;
  double aggregate = 1.0;

  int collision_events = 0;
  double min_ttc = 0.0;  // +inf when no conflict was projected
  double ego_progress = 0.0;
  double expert_progress = 0.0;
};

inline constexpr std::array<const char*, 8> kMetricNames = {
    "collisions", "ttc", "drivable", "comfort", "progress", "speed_limit", "direction", "aggregate"};

nlohmann::json to_json(const MetricsReport& report);
std::array<double, 8> metric_values(const MetricsReport& report);

MetricsReport compute_metrics(const SimulationLog& log, const Scenario& scenario,
                              const SimConfig& config, const VehicleGeometry& vehicle = {});

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

/// HEATPLAN_THREADS: unset -> hardware concurrency, 0 -> sequential.
unsigned thread_count_from_env();

/// Runs `job(i)` for i in [0, count) on up to `threads` workers (0 or 1 runs
/// inline, in order).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace heatplan
