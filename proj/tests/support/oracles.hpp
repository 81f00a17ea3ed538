#pragma once

#include <cstdint>
#include <vector>

#include "heatplan/collision.hpp"
#include "heatplan/grid.hpp"
#include "heatplan/solver.hpp"

namespace heatplan::testing {

/// Area of the rectangle (center, heading, length, width) inside the
/// axis-aligned square [x0, x1] x [y0, y1]. The square is clipped by the
/// rectangle's four half-planes one at a time.
double rect_square_overlap(Vec2 center, double heading, double length, double width, double x0,
                           double y0, double x1, double y1);

/// Overlap fraction of the footprint centered on every pixel with the
/// occupied pixels of a {0, 1} plane, cells outside the grid counted as
/// occupied. Pixel units: unit squares centered on integer coordinates.
std::vector<double> brute_force_density(const std::vector<double>& plane, int width, int height,
                                        double heading, double length_px, double width_px);

/// Elementwise agent || static || !drivable on {0, 1} planes.
std::vector<double> or_oracle(const std::vector<double>& agent, const std::vector<double>& stat,
                              const std::vector<double>& drivable);

std::vector<double> random_binary(std::uint64_t seed, std::size_t n, double p);

/// Random (tau, reference, density, heatmap) instance with T states.
struct CostInstance {
  Trajectory reference;
  Trajectory tau;
  CollisionDensityMap density;
  SpatialTemporalGrid heat;
};
CostInstance make_cost_instance(std::uint64_t seed, std::size_t horizon = 16);

/// Central differences of the total cost in x, y and heading of every state.
CostGradient finite_difference_gradient(const CostModel& model, const Trajectory& tau, double step);

/// Reference shifted by `offset` along each state's left normal; state 0
/// stays fixed.
Trajectory shift_lateral(const Trajectory& reference, double offset);

/// Lateral shift in [-range, range] (step `step`) minimizing the model's
/// total cost.
Trajectory lateral_shift_oracle(const CostModel& model, double range = 8.0, double step = 0.05);

/// |y - obstacle.y| where the path crosses x = obstacle.x, -1 if it does not.
double crossing_clearance(const Trajectory& path, Vec2 obstacle);

}  // namespace heatplan::testing
