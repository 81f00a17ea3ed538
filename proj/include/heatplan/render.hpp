#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "heatplan/sim.hpp"

namespace heatplan {

struct RenderOptions {
  int tick = 0;
  bool heatmap = true;
  bool density = true;
  double heatmap_floor = 0.05;      // heatmap pixels below this are not drawn
  double density_threshold = 0.5;   // density pixels at or above this are drawn
  double extent = 120.0;            // side of the square view [m]
};

/// One scene: drivable area, static objects, agents, the ego footprint, the
/// heatmap in red, high collision density in yellow and the planned
/// trajectory as green dots. `plan` may be null.
std::string render_scene_svg(const Scenario& scenario, const WorldSnapshot& snapshot,
                             const PlanOutput* plan, const Trajectory* executed,
                             const VehicleGeometry& vehicle, const RenderOptions& options);

/// Scene at `options.tick` of a simulation log. When the header carries the
/// run configuration, the planning tick at or before it is recomputed to
/// draw the heatmap and density layers.
std::string render_log_svg(const SimulationLog& log, const nlohmann::json& header,
                           const RenderOptions& options);

/// One rect per pixel of the plane, grey level = value clamped to [0, 1],
/// in pixel coordinates.
std::string render_grid_svg(const SpatialTemporalGrid& grid, std::size_t plane);

}  // namespace heatplan
