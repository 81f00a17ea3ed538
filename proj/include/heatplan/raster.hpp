#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "heatplan/grid.hpp"
#include "heatplan/scenario.hpp"

namespace heatplan {

/// Sets every pixel whose center lies inside the polygon to max(pixel, value).
void fill_polygon(const GridFrame& frame, std::span<const Vec2> polygon, float value,
                  std::span<float> plane);

/// {0, 1} plane: 1 where the pixel center lies inside any polygon.
std::vector<float> polygon_mask(const GridFrame& frame, std::span<const Polygon> polygons);

/// Marks the pixel containing each point of the densely sampled polyline
/// (one pixel wide).
void draw_polyline(const GridFrame& frame, std::span<const Vec2> line, float value,
                   std::span<float> plane);

/// Sets pixels whose center lies within `half_width` meters of the polyline.
void fill_corridor(const GridFrame& frame, std::span<const Vec2> line, double half_width,
                   float value, std::span<float> plane);

enum class RasterChannel { kEgo = 0, kRoadmap, kBaseline, kAgents, kRoute, kSpeed };
inline constexpr std::size_t kRasterChannels = 6;
std::string_view to_string(RasterChannel channel);

struct RasterConfig {
  VehicleGeometry vehicle;
  double v_max = 20.0;
  double lane_width = 3.5;
};

struct RasterStack {
  GridFrame frame;
  std::array<std::vector<float>, kRasterChannels> channels;

  std::span<const float> channel(RasterChannel c) const {
    return channels[static_cast<std::size_t>(c)];
  }
  float at(RasterChannel c, int col, int row) const {
    return channels[static_cast<std::size_t>(c)][frame.linear_index({col, row})];
  }
};

/// Six-channel input raster of the scenario's current state. Geometry
/// outside the frame is clipped.
RasterStack rasterize(const Scenario& scenario, const GridFrame& frame,
                      const RasterConfig& config = {});

struct HeatmapTarget {
  SpatialTemporalGrid grid;
  /// Timesteps whose expert position fell outside the frame (all-zero planes).
  std::vector<std::size_t> clipped;
};

/// Gaussian heatmap per expert state. Each plane peaks at exactly 1 on the
/// pixel nearest the expert position; other pixels hold exp(-d^2 / 2 sigma^2)
/// of their integer pixel distance d to that pixel.
HeatmapTarget render_heatmap_target(const Trajectory& expert, const GridFrame& fine_frame,
                                    double sigma_px);

/// Hard {0, 1} occupancy: plane t marks pixel centers inside any agent
/// footprint at time t * dt. Agents without a state at that time are omitted.
SpatialTemporalGrid render_occupancy_target(std::span<const AgentTrack> agents,
                                            const GridFrame& frame, std::size_t steps,
                                            double dt);

}  // namespace heatplan
