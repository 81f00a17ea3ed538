#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatplan/collision.hpp"
#include "heatplan/grid.hpp"
#include "heatplan/kinematics_tape.hpp"

namespace heatplan {

struct KinematicWeights {
  double jerk = 0.05;
  double curvature = 1.0;
  double curvature_rate = 0.5;
  double accel = 0.05;
  double lateral_accel = 0.05;
};

struct HardBounds {
  double accel_min = -4.0;
  double accel_max = 3.0;
  double jerk_max = 4.0;
  double curvature_max = 0.3;
  double lateral_accel_max = 4.0;
  double speed_max = 20.0;
  /// Allowed sideways speed of the chord between consecutive states.
  double lateral_slip_max = 0.5;
};

struct SolverConfig {
  double lambda_imi = 1.0;
  double lambda_o = 40.0;
  double lambda_h = 0.5;
  KinematicWeights phi;
  double sigma_o = 1.0;
  double sigma_h = 1.0;
  int samples_o = 64;
  int samples_h = 32;
  double heading_weight = 1.0;
  /// The imitation distance is sqrt(d^2 + eps^2) - eps, smooth at d = 0 [m].
  double imitation_smoothing = 0.01;
  double occupied_threshold = 0.05;
  /// Occupied pixels farther than this many sigma_o are not sampled.
  double sample_cutoff_sigmas = 8.0;
  HardBounds bounds;
  VehicleGeometry vehicle;
  int max_iters = 150;  // per penalty round
  double tolerance = 1e-7;
  int penalty_rounds = 5;
  double penalty_initial = 1.0;
  double penalty_growth = 10.0;
  /// Fraction of each bound targeted by the penalty, so that penalized
  /// iterates land strictly inside the feasible set.
  double penalty_margin = 0.95;

  /// Throws RangeError naming the first invalid field.
  void validate() const;
};

/// Unknown keys raise ParseError; missing keys keep their defaults.
SolverConfig solver_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SolverConfig& config);

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::optional<Trajectory> last_valid)
      : Error(what), last_valid_(std::move(last_valid)) {}
  const std::optional<Trajectory>& last_valid() const { return last_valid_; }

 private:
  std::optional<Trajectory> last_valid_;
};

struct BoundCheck {
  bool feasible = true;
  std::string first_violation;
  double worst_excess = 0.0;
};

/// Hard dynamic, state and control bounds of a trajectory, using the same
/// finite-difference kinematics as the cost. The first state's speed is the
/// current ego speed; the first interval's mean speed must be reachable from
/// it within the acceleration bounds.
BoundCheck check_hard_bounds(const Trajectory& trajectory, const SolverConfig& config);

// ---------------------------------------------------------------------------
// Sampled Gaussian terms
// ---------------------------------------------------------------------------

struct TermValue {
  double value = 0.0;
  Vec2 gradient;       // d value / d (x, y)
  bool empty = false;  // no pixels sampled
};

/// Occupied pixels (value > threshold) of one density plane with a
/// nearest-neighbour query ordered by (distance, row-major index).
class OccupiedSampler {
 public:
  /// `max_distance` in meters; pixels farther from the query are ignored.
  OccupiedSampler(const GridFrame& frame, std::span<const double> plane, double threshold,
                  double max_distance = std::numeric_limits<double>::infinity());

  /// Linear indices of the `count` occupied pixels nearest to `world`
  /// within the maximum distance.
  void nearest(Vec2 world, int count, std::vector<std::size_t>& out) const;

  const GridFrame& frame() const { return frame_; }
  std::span<const double> plane() const { return plane_; }
  std::size_t occupied_count() const { return occupied_.size(); }

 private:
  GridFrame frame_;
  std::span<const double> plane_;
  double threshold_;
  double radius_px_;
  std::vector<std::size_t> occupied_;
  std::vector<std::uint32_t> table_;  // summed-area table of occupied pixels

  std::uint32_t count_in(int c0, int r0, int c1, int r1) const;
};

/// Sum over the S_o nearest occupied pixels (within the sample cutoff) of v / (sigma sqrt(2 pi)) *
/// exp(-d^2 / (2 sigma^2)), d in meters.
TermValue collision_term(const Pose2& pose, const OccupiedSampler& sampler,
                         const SolverConfig& config);
TermValue collision_term(const Pose2& pose, const GridFrame& frame,
                         std::span<const double> density_plane, const SolverConfig& config);

/// The S_h largest nonzero pixels of a heatmap plane (ties by row-major
/// index), with their world positions.
struct HeatSamples {
  std::vector<Vec2> positions;
  std::vector<double> values;
};
HeatSamples top_heat_samples(const GridFrame& frame, std::span<const float> plane, int count);

TermValue heatmap_term(const Pose2& pose, const HeatSamples& samples, const SolverConfig& config);
TermValue heatmap_term(const Pose2& pose, const GridFrame& frame, std::span<const float> heat_plane,
                       const SolverConfig& config);

// ---------------------------------------------------------------------------
// Total cost
// ---------------------------------------------------------------------------

struct CostBreakdown {
  double imitation = 0.0;
  double jerk = 0.0;
  double curvature = 0.0;
  double curvature_rate = 0.0;
  double accel = 0.0;
  double lateral_accel = 0.0;
  double collision = 0.0;  // + lambda_o * sum D_o
  double heatmap = 0.0;    // - lambda_h * sum D_h
  double total = 0.0;
  int empty_collision_samples = 0;

  double kinematic() const { return jerk + curvature + curvature_rate + accel + lateral_accel; }
};

nlohmann::json to_json(const CostBreakdown& breakdown);

/// Gradient with respect to every state's (x, y, heading).
struct CostGradient {
  std::vector<double> x, y, heading;
};

/// Precomputed sampling structures for one (reference plan, density,
/// heatmap) triple; evaluation is reentrant.
class CostModel {
 public:
  CostModel(const Trajectory& reference, const CollisionDensityMap& density,
            const SpatialTemporalGrid& heat, const SolverConfig& config);

  std::size_t horizon() const { return reference_.size(); }
  const Trajectory& reference() const { return reference_; }
  const SolverConfig& config() const { return config_; }

  CostBreakdown evaluate(std::span<const double> x, std::span<const double> y,
                         std::span<const double> heading, CostGradient* gradient) const;
  CostBreakdown evaluate(const Trajectory& tau, CostGradient* gradient = nullptr) const;

 private:
  Trajectory reference_;
  const CollisionDensityMap* density_;
  SolverConfig config_;
  std::vector<OccupiedSampler> samplers_;
  std::vector<HeatSamples> heat_;
};

struct CostEvaluation {
  CostBreakdown breakdown;
  CostGradient gradient;
};

/// Throws ShapeError when horizons differ.
CostEvaluation total_cost(const Trajectory& tau, const Trajectory& reference,
                          const CollisionDensityMap& density, const SpatialTemporalGrid& heat,
                          const SolverConfig& config);

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

struct RefinementResult {
  Trajectory trajectory;
  CostBreakdown breakdown;
  CostBreakdown initial_breakdown;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
  std::string infeasibility;  // first violated bound when not feasible
  /// Best feasible total cost after each penalty round (+inf when none yet).
  std::vector<double> best_feasible_history;
};

/// Minimizes the total cost starting from the reference plan with its first
/// state pinned. Throws SolverError on a non-finite cost.
RefinementResult refine(const Trajectory& reference, const CollisionDensityMap& density,
                        const SpatialTemporalGrid& heat, const SolverConfig& config);

/// Maximum bilinear density along the trajectory, sampled every
/// `step` meters on each segment against the plane of its start state.
double max_density_along(const Trajectory& trajectory, const CollisionDensityMap& density,
                         double step = 0.1);

}  // namespace heatplan
