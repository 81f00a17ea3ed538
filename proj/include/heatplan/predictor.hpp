#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatplan/grid.hpp"
#include "heatplan/scenario.hpp"

namespace heatplan {

class PredictionError : public Error {
 public:
  using Error::Error;
};

struct GridSpec {
  int size = 224;
  double resolution = 0.5;
};

struct PredictorConfig {
  std::string kind = "constant_velocity";  // constant_velocity | noised_expert | external
  int horizon = 16;
  double dt = 0.5;
  GridSpec coarse{224, 0.5};
  GridSpec fine{448, 0.25};
  double heatmap_sigma_px = 4.0;
  double occupancy_decay = 0.97;
  double noise_lateral = 0.5;
  double noise_longitudinal = 0.5;
  std::filesystem::path bundle_dir;  // for kind == external

  void validate() const;
};

PredictorConfig predictor_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PredictorConfig& config);

struct PredictionBundle {
  Trajectory initial_plan;
  SpatialTemporalGrid heatmap;    // fine frame
  SpatialTemporalGrid occupancy;  // coarse frame

  /// Throws PredictionError when horizons differ or a value leaves [0, 1].
  void validate() const;
};

struct AgentState {
  std::string id;
  AgentKind kind = AgentKind::kVehicle;
  double length = 0.0;
  double width = 0.0;
  Pose2 pose;
  double speed = 0.0;
};

/// What a predictor may observe at a planning tick.
struct WorldSnapshot {
  double time = 0.0;
  EgoState ego;
  std::vector<AgentState> agents;
};

/// Snapshot of the scenario at t = 0.
WorldSnapshot initial_snapshot(const Scenario& scenario);

GridFrame coarse_frame(const Pose2& ego, const PredictorConfig& config);
GridFrame fine_frame(const Pose2& ego, const PredictorConfig& config);

/// The expert from `snapshot.time` on (constant-velocity extrapolation past
/// its end), blended from the current ego state over the whole horizon.
Trajectory reference_plan(const Scenario& scenario, const WorldSnapshot& snapshot,
                          const PredictorConfig& config);

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictionBundle predict(const Scenario& scenario, const WorldSnapshot& snapshot) const = 0;
};

/// Plan = reference plan; occupancy extrapolates each agent at its current
/// velocity with confidence decay^t; heatmap centered on the plan.
class ConstantVelocityPredictor final : public Predictor {
 public:
  explicit ConstantVelocityPredictor(PredictorConfig config);
  PredictionBundle predict(const Scenario& scenario, const WorldSnapshot& snapshot) const override;

 private:
  PredictorConfig config_;
};

/// Plan = reference plan plus smooth bounded lateral and longitudinal noise;
/// occupancy from ground-truth futures; heatmap centered on the clean plan.
class NoisedExpertPredictor final : public Predictor {
 public:
  NoisedExpertPredictor(PredictorConfig config, std::uint64_t seed);
  PredictionBundle predict(const Scenario& scenario, const WorldSnapshot& snapshot) const override;

 private:
  PredictorConfig config_;
  std::uint64_t seed_;
};

/// Returns a fixed bundle, e.g. one produced by an external model.
class ExternalPredictor final : public Predictor {
 public:
  explicit ExternalPredictor(PredictionBundle bundle);
  PredictionBundle predict(const Scenario& scenario, const WorldSnapshot& snapshot) const override;

 private:
  PredictionBundle bundle_;
};

PredictionBundle constant_velocity_predictor(const Scenario& scenario, const PredictorConfig& config);
PredictionBundle noised_expert_predictor(const Scenario& scenario, const PredictorConfig& config,
                                         std::uint64_t seed);

/// Adds the smooth noise used by NoisedExpertPredictor to a plan; state 0
/// is unchanged.
Trajectory add_plan_noise(const Trajectory& plan, double lateral, double longitudinal,
                          std::uint64_t seed);

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config, std::uint64_t seed);

/// Bundle directory layout: initial_plan.json, heatmap.grid, occupancy.grid.
PredictionBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const std::filesystem::path& dir, const PredictionBundle& bundle);

nlohmann::json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const nlohmann::json& doc, const std::string& path);

}  // namespace heatplan
