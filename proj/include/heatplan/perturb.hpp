#pragma once

#include <cstdint>

#include <json.hpp>

#include "heatplan/scenario.hpp"
#include "heatplan/solver.hpp"

namespace heatplan {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PerturbRanges {
  Interval x{0.0, 1.0};        // longitudinal, ego frame [m]
  Interval y{-1.0, 1.0};       // lateral, ego frame [m]
  Interval heading{-0.25, 0.25};  // [rad]

  /// Throws RangeError when an interval is reversed or non-finite.
  void validate() const;
};

PerturbRanges perturb_ranges_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PerturbRanges& ranges);

class FitError : public Error {
 public:
  using Error::Error;
};

/// Uniform offsets per axis in the pose's own frame.
Pose2 perturb_pose(const Pose2& pose, const PerturbRanges& ranges, std::uint64_t seed);

/// Target plus a quintic offset that starts at (start - target) in position
/// and velocity with zero acceleration, and vanishes with its first two
/// derivatives at `blend_index`. Later states equal the target. Headings
/// follow the blended velocity; with a zero offset the target is returned
/// unchanged.
Trajectory quintic_blend(const Pose2& start, double start_speed, const Trajectory& target,
                         std::size_t blend_index);

struct RecoveryFit {
  Trajectory trajectory;
  std::size_t blend_index;
};

/// Shortest blend (starting at half the horizon) whose result passes the hard
/// bounds. Throws FitError when even the full-horizon blend is infeasible.
RecoveryFit fit_recovery_trajectory(const Pose2& start, double start_speed,
                                    const Trajectory& target, const SolverConfig& config);

/// Scenario with the ego start perturbed and the expert replaced by its
/// recovery trajectory.
Scenario augment_sample(const Scenario& scenario, const PerturbRanges& ranges, std::uint64_t seed,
                        const SolverConfig& config = {});

}  // namespace heatplan
