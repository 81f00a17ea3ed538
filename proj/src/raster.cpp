#include "heatplan/raster.hpp"

#include <algorithm>
#include <cmath>

#include "heatplan/simd/kernels.hpp"

namespace heatplan {

namespace {

struct PixelRange {
  int c0, c1, r0, r1;  // inclusive; empty when c0 > c1 or r0 > r1
};

PixelRange grid_bounds(const GridFrame& frame, std::span<const Vec2> grid_pts, double pad) {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const Vec2& g : grid_pts) {
    lo_x = std::min(lo_x, g.x);
    hi_x = std::max(hi_x, g.x);
    lo_y = std::min(lo_y, g.y);
    hi_y = std::max(hi_y, g.y);
  }
  auto clampi = [](double v, int lo, int hi) {
    return static_cast<int>(std::clamp(v, static_cast<double>(lo), static_cast<double>(hi)));
  };
  return {clampi(std::ceil(lo_x - pad), 0, frame.width()),
          clampi(std::floor(hi_x + pad), -1, frame.width() - 1),
          clampi(std::ceil(lo_y - pad), 0, frame.height()),
          clampi(std::floor(hi_y + pad), -1, frame.height() - 1)};
}

std::vector<Vec2> to_grid(const GridFrame& frame, std::span<const Vec2> pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const Vec2& p : pts) out.push_back(frame.world_to_grid(p));
  return out;
}

}  // namespace

void fill_polygon(const GridFrame& frame, std::span<const Vec2> polygon, float value,
                  std::span<float> plane) {
  if (polygon.size() < 3) return;
  const std::vector<Vec2> g = to_grid(frame, polygon);
  const PixelRange r = grid_bounds(frame, g, 0.0);
  for (int row = r.r0; row <= r.r1; ++row) {
    for (int col = r.c0; col <= r.c1; ++col) {
      if (point_in_polygon({static_cast<double>(col), static_cast<double>(row)}, g)) {
        float& px = plane[frame.linear_index({col, row})];
        px = std::max(px, value);
      }
    }
  }
}

std::vector<float> polygon_mask(const GridFrame& frame, std::span<const Polygon> polygons) {
  std::vector<float> plane(frame.pixel_count(), 0.0f);
  for (const auto& poly : polygons) fill_polygon(frame, poly, 1.0f, plane);
  return plane;
}

void draw_polyline(const GridFrame& frame, std::span<const Vec2> line, float value,
                   std::span<float> plane) {
  const double step = 0.25 * frame.resolution();
  auto mark = [&](Vec2 p) {
    if (auto px = frame.nearest_pixel(p)) {
      float& v = plane[frame.linear_index(*px)];
      v = std::max(v, value);
    }
  };
  if (line.size() == 1) mark(line[0]);
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 a = line[i];
    const Vec2 b = line[i + 1];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int k = 0; k <= n; ++k) mark(a + (static_cast<double>(k) / n) * (b - a));
  }
}

void fill_corridor(const GridFrame& frame, std::span<const Vec2> line, double half_width,
                   float value, std::span<float> plane) {
  const double pad = half_width / frame.resolution() + 1.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 seg[2] = {line[i], line[i + 1]};
    const std::vector<Vec2> g = to_grid(frame, seg);
    const PixelRange r = grid_bounds(frame, g, pad);
    for (int row = r.r0; row <= r.r1; ++row) {
      for (int col = r.c0; col <= r.c1; ++col) {
        if (distance_to_segment(frame.pixel_center(col, row), seg[0], seg[1]) <= half_width) {
          float& px = plane[frame.linear_index({col, row})];
          px = std::max(px, value);
        }
      }
    }
  }
}

std::string_view to_string(RasterChannel channel) {
  switch (channel) {
    case RasterChannel::kEgo:
      return "ego";
    case RasterChannel::kRoadmap:
      return "roadmap";
    case RasterChannel::kBaseline:
      return "baseline";
    case RasterChannel::kAgents:
      return "agents";
    case RasterChannel::kRoute:
      return "route";
    case RasterChannel::kSpeed:
      return "speed";
  }
  return "ego";
}

RasterStack rasterize(const Scenario& s, const GridFrame& frame, const RasterConfig& config) {
  RasterStack out{frame, {}};
  for (auto& c : out.channels) c.assign(frame.pixel_count(), 0.0f);
  auto plane = [&](RasterChannel c) -> std::span<float> {
    return out.channels[static_cast<std::size_t>(c)];
  };

  fill_polygon(frame,
               oriented_box(s.ego_start.pose, config.vehicle.length, config.vehicle.width), 1.0f,
               plane(RasterChannel::kEgo));
  for (const auto& poly : s.map.drivable_area) {
    fill_polygon(frame, poly, 1.0f, plane(RasterChannel::kRoadmap));
  }
  for (const auto& b : s.map.baseline_paths) {
    draw_polyline(frame, b.points, 1.0f, plane(RasterChannel::kBaseline));
  }

  double oldest = 0.0;
  for (const auto& a : s.agents) oldest = std::min(oldest, a.history.front().t);
  for (const auto& a : s.agents) {
    for (const auto& st : a.history) {
      const double age = oldest < 0.0 ? st.t / oldest : 0.0;
      const auto intensity = static_cast<float>(1.0 - 0.8 * age);
      fill_polygon(frame, oriented_box(st.pose, a.length, a.width), intensity,
                   plane(RasterChannel::kAgents));
    }
  }
  for (const auto& id : s.map.route) {
    if (const BaselinePath* b = s.map.find_baseline(id)) {
      fill_corridor(frame, b->points, 0.5 * config.lane_width, 1.0f,
                    plane(RasterChannel::kRoute));
    }
  }
  const auto speed = static_cast<float>(std::clamp(s.ego_start.speed / config.v_max, 0.0, 1.0));
  std::fill(out.channels[static_cast<std::size_t>(RasterChannel::kSpeed)].begin(),
            out.channels[static_cast<std::size_t>(RasterChannel::kSpeed)].end(), speed);
  return out;
}

HeatmapTarget render_heatmap_target(const Trajectory& expert, const GridFrame& fine_frame,
                                    double sigma_px) {
  if (!(sigma_px > 0.0)) throw RangeError("sigma_px must be positive");
  HeatmapTarget out{SpatialTemporalGrid(fine_frame, expert.size(), 0.0f), {}};
  const int w = fine_frame.width();
  const int h = fine_frame.height();
  const double inv = 1.0 / (2.0 * sigma_px * sigma_px);
  std::vector<float> gx(w), gy(h);
  const auto& k = simd::kernels();
  for (std::size_t t = 0; t < expert.size(); ++t) {
    const auto px = fine_frame.nearest_pixel(expert[t].pose.position());
    if (!px) {
      out.clipped.push_back(t);
      continue;
    }
    for (int c = 0; c < w; ++c) {
      const double d = c - px->col;
      gx[c] = static_cast<float>(std::exp(-d * d * inv));
    }
    for (int r = 0; r < h; ++r) {
      const double d = r - px->row;
      gy[r] = static_cast<float>(std::exp(-d * d * inv));
    }
    auto plane = out.grid.plane(t);
    for (int r = 0; r < h; ++r) {
      k.scale_row(gy[r], gx.data(), plane.data() + static_cast<std::size_t>(r) * w, w);
    }
  }
  return out;
}

SpatialTemporalGrid render_occupancy_target(std::span<const AgentTrack> agents,
                                            const GridFrame& frame, std::size_t steps,
                                            double dt) {
  SpatialTemporalGrid grid(frame, steps, 0.0f);
  for (std::size_t t = 0; t < steps; ++t) {
    auto plane = grid.plane(t);
    for (const auto& a : agents) {
      if (auto st = a.state_at(static_cast<double>(t) * dt)) {
        fill_polygon(frame, oriented_box(st->pose, a.length, a.width), 1.0f, plane);
      }
    }
  }
  return grid;
}

}  // namespace heatplan
