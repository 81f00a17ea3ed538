#include "heatplan/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "heatplan/config.hpp"

namespace heatplan {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Points in SVG user space: x east, y flipped so north is up.
std::string points(std::span<const Vec2> poly) {
  std::string out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (i) out += ' ';
    out += num(poly[i].x) + "," + num(-poly[i].y);
  }
  return out;
}

void polygon(std::ostringstream& o, std::span<const Vec2> poly, const std::string& cls,
             const std::string& style) {
  o << "<polygon class=\"" << cls << "\" points=\"" << points(poly) << "\" style=\"" << style
    << "\"/>\n";
}

Polygon pixel_polygon(const GridFrame& f, int c, int r) {
  return {f.grid_to_world({c - 0.5, r - 0.5}), f.grid_to_world({c + 0.5, r - 0.5}),
          f.grid_to_world({c + 0.5, r + 0.5}), f.grid_to_world({c - 0.5, r + 0.5})};
}

}  // namespace

std::string render_scene_svg(const Scenario& scenario, const WorldSnapshot& snap,
                             const PlanOutput* plan, const Trajectory* executed,
                             const VehicleGeometry& vehicle, const RenderOptions& opt) {
  std::ostringstream o;
  const Vec2 center = snap.ego.pose.transform({0.25 * opt.extent, 0.0});
  const double half = 0.5 * opt.extent;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(center.x - half) << " "
    << num(-center.y - half) << " " << num(opt.extent) << " " << num(opt.extent)
    << "\" width=\"800\" height=\"800\">\n";
  o << "<rect x=\"" << num(center.x - half) << "\" y=\"" << num(-center.y - half) << "\" width=\""
    << num(opt.extent) << "\" height=\"" << num(opt.extent) << "\" style=\"fill:#202020\"/>\n";

  o << "<g id=\"drivable\">\n";
  for (const auto& p : scenario.map.drivable_area) polygon(o, p, "drivable", "fill:#5a5a5a");
  o << "</g>\n<g id=\"baselines\">\n";
  for (const auto& b : scenario.map.baseline_paths) {
    o << "<polyline class=\"baseline\" points=\"" << points(b.points)
      << "\" style=\"fill:none;stroke:#9a9a9a;stroke-width:0.15;stroke-dasharray:1,1\"/>\n";
  }
  o << "</g>\n<g id=\"static\">\n";
  for (const auto& p : scenario.map.static_objects) polygon(o, p, "static", "fill:#8b5a2b");
  o << "</g>\n";

  if (plan && opt.heatmap) {
    const auto& heat = plan->bundle.heatmap;
    const GridFrame& f = heat.frame();
    o << "<g id=\"heatmap\">\n";
    for (int r = 0; r < f.height(); ++r) {
      for (int c = 0; c < f.width(); ++c) {
        float v = 0.0f;
        for (std::size_t t = 0; t < heat.planes(); ++t) v = std::max(v, heat.at(t, c, r));
        if (v < opt.heatmap_floor) continue;
        polygon(o, pixel_polygon(f, c, r), "heat", "fill:#ff0000;fill-opacity:" + num(v));
      }
    }
    o << "</g>\n";
  }
  if (plan && opt.density) {
    const auto& grid = plan->density.grid;
    const GridFrame& f = grid.frame();
    std::vector<char> hot(f.pixel_count(), 0);
    for (std::size_t t = 0; t < grid.planes(); ++t) {
      int c0 = 0, r0 = 0, c1 = f.width() - 1, r1 = f.height() - 1;
      if (plan->window) {
        const PixelIndex ctr = plan->window->centers[t];
        const int rad = plan->window->radius;
        c0 = std::max(0, ctr.col - rad);
        r0 = std::max(0, ctr.row - rad);
        c1 = std::min(f.width() - 1, ctr.col + rad);
        r1 = std::min(f.height() - 1, ctr.row + rad);
      }
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          if (grid.at(t, c, r) >= opt.density_threshold) hot[f.linear_index({c, r})] = 1;
        }
      }
    }
    o << "<g id=\"density\">\n";
    for (int r = 0; r < f.height(); ++r) {
      for (int c = 0; c < f.width(); ++c) {
        if (hot[f.linear_index({c, r})]) {
          polygon(o, pixel_polygon(f, c, r), "density", "fill:#ffd700;fill-opacity:0.6");
        }
      }
    }
    o << "</g>\n";
  }

  o << "<g id=\"agents\">\n";
  for (const auto& a : snap.agents) {
    polygon(o, oriented_box(a.pose, a.length, a.width), "agent",
            a.kind == AgentKind::kPedestrian ? "fill:#4fa3ff" : "fill:#2f6fd0");
  }
  o << "</g>\n<g id=\"ego\">\n";
  polygon(o, oriented_box(snap.ego.pose, vehicle.length, vehicle.width), "ego",
          "fill:#ffffff;stroke:#000000;stroke-width:0.1");
  o << "</g>\n";

  if (plan) {
    o << "<g id=\"initial-plan\">\n";
    for (const auto& s : plan->bundle.initial_plan.states()) {
      o << "<circle class=\"initial\" cx=\"" << num(s.pose.x()) << "\" cy=\"" << num(-s.pose.y())
        << "\" r=\"0.3\" style=\"fill:#b0b0b0\"/>\n";
    }
    o << "</g>\n";
  }
  const Trajectory* shown = executed ? executed : (plan ? &plan->plan : nullptr);
  if (shown) {
    o << "<g id=\"plan\">\n";
    for (const auto& s : shown->states()) {
      o << "<circle class=\"plan\" cx=\"" << num(s.pose.x()) << "\" cy=\"" << num(-s.pose.y())
        << "\" r=\"0.4\" style=\"fill:#00d000\"/>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_log_svg(const SimulationLog& log, const json& header, const RenderOptions& opt) {
  if (opt.tick < 0 || static_cast<std::size_t>(opt.tick) >= log.ticks.size()) {
    throw RangeError("render: tick " + std::to_string(opt.tick) + " outside [0, " +
                     std::to_string(log.ticks.size()) + ")");
  }
  if (!header.contains("scenario")) throw ParseError("log header has no scenario");
  const Scenario scenario = load_scenario(header.at("scenario").dump());
  const TickRecord& rec = log.ticks[static_cast<std::size_t>(opt.tick)];
  const WorldSnapshot snap{rec.time, rec.ego, rec.agents};

  // Planning tick at or before the requested one.
  const TickRecord* planned = nullptr;
  for (int k = opt.tick; k >= 0 && !planned; --k) {
    if (log.ticks[static_cast<std::size_t>(k)].plan) planned = &log.ticks[static_cast<std::size_t>(k)];
  }
  std::optional<PlanOutput> plan;
  VehicleGeometry vehicle;
  if (header.contains("config")) {
    const RunConfig config = run_config_from_json(header.at("config"));
    vehicle = config.solver.vehicle;
    if (planned && (opt.heatmap || opt.density)) {
      const auto predictor = make_predictor(config.predictor, config.seed);
      PlanOptions po = config.sim.plan;
      po.use_solver = false;
      plan = plan_tick(scenario, {planned->time, planned->ego, planned->agents}, *predictor,
                       config.solver, po);
    }
  }
  const Trajectory* executed = planned ? &planned->plan->executed : nullptr;
  return render_scene_svg(scenario, snap, plan ? &*plan : nullptr, executed, vehicle, opt);
}

std::string render_grid_svg(const SpatialTemporalGrid& grid, std::size_t plane) {
  if (plane >= grid.planes()) {
    throw RangeError("render: plane " + std::to_string(plane) + " outside [0, " +
                     std::to_string(grid.planes()) + ")");
  }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << grid.width() << " "
    << grid.height() << "\" width=\"" << std::max(grid.width(), 256) << "\" height=\""
    << std::max(grid.height(), 256) << "\" shape-rendering=\"crispEdges\">\n<g id=\"pixels\">\n";
  // Row 0 at the bottom so that the grid's +y axis points up.
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const double v = std::clamp(static_cast<double>(grid.at(plane, c, r)), 0.0, 1.0);
      const int g = static_cast<int>(std::lround(255.0 * v));
      o << "<rect class=\"px\" x=\"" << c << "\" y=\"" << grid.height() - 1 - r
        << "\" width=\"1\" height=\"1\" fill=\"rgb(" << g << "," << g << "," << g << ")\"/>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace heatplan
