#pragma once

#include <optional>
#include <span>
#include <vector>

#include "heatplan/grid.hpp"

namespace heatplan {

/// Per-timestep union of agent occupancy, static obstacles and the
/// complement of the drivable area. Values in [0, 1].
struct NonDrivableMap {
  GridStack<double> grid;
};

/// Per-timestep overlap fraction between the posed ego footprint and the
/// non-drivable map. Values in [0, 1].
struct CollisionDensityMap {
  GridStack<double> grid;
};

/// plane t = max(agent_occ^t, static_mask, 1 - drivable_mask). Masks are
/// single planes shared by every timestep. Throws ShapeError when sizes
/// disagree with the occupancy frame.
NonDrivableMap build_non_drivable(const SpatialTemporalGrid& agent_occ,
                                  std::span<const float> static_mask,
                                  std::span<const float> drivable_mask);

/// Rasterizes the polygons as {0, 1} masks on `frame` first. Throws
/// ShapeError when `frame` differs from the occupancy frame.
NonDrivableMap build_non_drivable(const SpatialTemporalGrid& agent_occ,
                                  std::span<const Polygon> static_objects,
                                  std::span<const Polygon> drivable_area, const GridFrame& frame);

/// Anti-aliased ego footprint: weight (i, j) is the area of the rotated
/// rectangle inside the pixel at offset (i - K/2, j - K/2), normalized to sum 1.
struct EgoKernel {
  double heading = 0.0;  // relative to the grid axes
  double length = 0.0;
  double width = 0.0;
  double resolution = 0.0;
  int size = 0;  // K, odd
  std::vector<double> weights;  // K x K, row-major (row = offset along grid y)

  int radius() const { return size / 2; }
  double at(int dcol, int drow) const {
    return weights[static_cast<std::size_t>(drow + radius()) * size + (dcol + radius())];
  }
};

EgoKernel build_ego_kernel(double heading, double length, double width, double resolution);

/// One kernel per plan state, headings taken relative to the frame axes.
std::vector<EgoKernel> kernels_for_plan(const Trajectory& plan, const GridFrame& frame,
                                        const VehicleGeometry& vehicle);

struct DensityWindow {
  std::vector<PixelIndex> centers;  // one per timestep
  int radius = 32;
};

/// Window centers at the pixels nearest to each plan state (clamped into the
/// grid).
DensityWindow window_around(const Trajectory& plan, const GridFrame& frame, int radius = 32);

/// Correlates each non-drivable plane with its kernel; reads outside the grid
/// count as 1. With a window, only pixels within the square window around
/// the plane's center are computed and every other pixel is set to 1.
/// Throws ShapeError when the kernel or window count differs from the plane
/// count.
CollisionDensityMap collision_density(const NonDrivableMap& nd, std::span<const EgoKernel> kernels,
                                      const std::optional<DensityWindow>& window = std::nullopt);

}  // namespace heatplan
