#include "oracles.hpp"

#include <cmath>
#include <limits>

#include "heatplan/raster.hpp"
#include "heatplan/rng.hpp"

namespace heatplan::testing {

namespace {

/// Keeps the part of `poly` with a*x + b*y <= c.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, double a, double b, double c) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double fp = a * p.x + b * p.y - c;
    const double fq = a * q.x + b * q.y - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double s = fp / (fp - fq);
      out.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
    }
  }
  return out;
}

double shoelace(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(twice);
}

}  // namespace

double rect_square_overlap(Vec2 center, double heading, double length, double width, double x0,
                           double y0, double x1, double y1) {
  std::vector<Vec2> poly = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  const double ca = std::cos(heading);
  const double sa = std::sin(heading);
  // Longitudinal axis u = (ca, sa), lateral axis v = (-sa, ca).
  const double cu = ca * center.x + sa * center.y;
  const double cv = -sa * center.x + ca * center.y;
  poly = clip_half_plane(poly, ca, sa, cu + 0.5 * length);
  poly = clip_half_plane(poly, -ca, -sa, -(cu - 0.5 * length));
  poly = clip_half_plane(poly, -sa, ca, cv + 0.5 * width);
  poly = clip_half_plane(poly, sa, -ca, -(cv - 0.5 * width));
  return poly.size() < 3 ? 0.0 : shoelace(poly);
}

std::vector<double> brute_force_density(const std::vector<double>& plane, int width, int height,
                                        double heading, double length_px, double width_px) {
  const int reach = static_cast<int>(std::ceil(0.5 * std::hypot(length_px, width_px) + 0.5));
  const int side = 2 * reach + 1;
  // Overlap of the footprint centered at the origin with the cell at each offset.
  std::vector<double> overlap(static_cast<std::size_t>(side) * side);
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      overlap[static_cast<std::size_t>(dy + reach) * side + (dx + reach)] = rect_square_overlap(
          {0.0, 0.0}, heading, length_px, width_px, dx - 0.5, dy - 0.5, dx + 0.5, dy + 0.5);
    }
  }
  const double area = length_px * width_px;
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double covered = 0.0;
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const int qc = c + dx;
          const int qr = r + dy;
          const bool inside = qc >= 0 && qr >= 0 && qc < width && qr < height;
          const double occ = inside ? plane[static_cast<std::size_t>(qr) * width + qc] : 1.0;
          covered += occ * overlap[static_cast<std::size_t>(dy + reach) * side + (dx + reach)];
        }
      }
      out[static_cast<std::size_t>(r) * width + c] = covered / area;
    }
  }
  return out;
}

std::vector<double> or_oracle(const std::vector<double>& agent, const std::vector<double>& stat,
                              const std::vector<double>& drivable) {
  std::vector<double> out(agent.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (agent[i] != 0.0 || stat[i] != 0.0 || drivable[i] == 0.0) ? 1.0 : 0.0;
  }
  return out;
}

std::vector<double> random_binary(std::uint64_t seed, std::size_t n, double p) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.unit() < p ? 1.0 : 0.0;
  return out;
}

CostInstance make_cost_instance(std::uint64_t seed, std::size_t horizon) {
  Rng rng(seed);
  const double dt = 0.5;
  const double speed = rng.uniform(3.0, 10.0);
  const double amp = rng.uniform(-2.0, 2.0);
  const double omega = rng.uniform(0.1, 0.4);
  std::vector<TrajectoryState> ref_states;
  for (std::size_t i = 0; i < horizon; ++i) {
    const double t = dt * static_cast<double>(i);
    const double x = speed * t;
    const double y = amp * std::sin(omega * t);
    const double dydx = amp * omega * std::cos(omega * t) / speed;
    ref_states.push_back({Pose2(x, y, std::atan(dydx)), speed * std::sqrt(1.0 + dydx * dydx)});
  }
  Trajectory reference(dt, ref_states);

  std::vector<TrajectoryState> tau_states = ref_states;
  for (std::size_t i = 1; i < horizon; ++i) {
    const Pose2& p = tau_states[i].pose;
    tau_states[i].pose = Pose2(p.x() + rng.uniform(-0.3, 0.3), p.y() + rng.uniform(-0.3, 0.3),
                               p.heading() + rng.uniform(-0.05, 0.05));
  }
  Trajectory tau(dt, tau_states);

  const GridFrame frame = make_ego_frame(Pose2(0.0, 0.0, 0.0), 0.5, 224, 224);
  std::vector<Polygon> obstacles;
  const int count = rng.uniform_int(1, 4);
  for (int k = 0; k < count; ++k) {
    const double ox = rng.uniform(5.0, speed * dt * static_cast<double>(horizon));
    const double oy = rng.uniform(-4.0, 4.0);
    obstacles.push_back(oriented_box(Pose2(ox, oy, rng.uniform(-0.5, 0.5)), rng.uniform(1.0, 4.0),
                                     rng.uniform(1.0, 3.0)));
  }
  const Polygon road = {{-60.0, -12.0}, {120.0, -12.0}, {120.0, 12.0}, {-60.0, 12.0}};
  SpatialTemporalGrid occ(frame, horizon, 0.0f);
  const NonDrivableMap nd = build_non_drivable(occ, obstacles, std::vector<Polygon>{road}, frame);
  const auto kernels = kernels_for_plan(reference, frame, VehicleGeometry{});
  CollisionDensityMap density = collision_density(nd, kernels);

  const GridFrame fine = make_ego_frame(Pose2(0.0, 0.0, 0.0), 0.25, 448, 448);
  SpatialTemporalGrid heat = render_heatmap_target(reference, fine, 4.0).grid;
  return {std::move(reference), std::move(tau), std::move(density), std::move(heat)};
}

CostGradient finite_difference_gradient(const CostModel& model, const Trajectory& tau, double step) {
  const std::size_t n = tau.size();
  std::vector<double> x(n), y(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = tau[i].pose.x();
    y[i] = tau[i].pose.y();
    h[i] = tau[i].pose.heading();
  }
  CostGradient g{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  auto diff = [&](std::vector<double>& v, std::size_t i) {
    const double v0 = v[i];
    v[i] = v0 + step;
    const double fp = model.evaluate(x, y, h, nullptr).total;
    v[i] = v0 - step;
    const double fm = model.evaluate(x, y, h, nullptr).total;
    v[i] = v0;
    return (fp - fm) / (2.0 * step);
  };
  for (std::size_t i = 0; i < n; ++i) {
    g.x[i] = diff(x, i);
    g.y[i] = diff(y, i);
    g.heading[i] = diff(h, i);
  }
  return g;
}

Trajectory shift_lateral(const Trajectory& reference, double offset) {
  std::vector<TrajectoryState> states(reference.states().begin(), reference.states().end());
  for (std::size_t t = 1; t < states.size(); ++t) {
    const double h = states[t].pose.heading();
    const Vec2 normal{-std::sin(h), std::cos(h)};
    states[t].pose = Pose2(states[t].pose.position() + offset * normal, h);
  }
  return Trajectory(reference.dt(), std::move(states));
}

Trajectory lateral_shift_oracle(const CostModel& model, double range, double step) {
  const int n = static_cast<int>(std::lround(range / step));
  double best = std::numeric_limits<double>::infinity();
  double best_offset = 0.0;
  for (int k = -n; k <= n; ++k) {
    const double offset = k * step;
    const double cost = model.evaluate(shift_lateral(model.reference(), offset)).total;
    if (cost < best) {
      best = cost;
      best_offset = offset;
    }
  }
  return shift_lateral(model.reference(), best_offset);
}

double crossing_clearance(const Trajectory& path, Vec2 obstacle) {
  for (std::size_t t = 0; t + 1 < path.size(); ++t) {
    const double x0 = path[t].pose.x();
    const double x1 = path[t + 1].pose.x();
    if ((x0 - obstacle.x) * (x1 - obstacle.x) <= 0.0 && x1 != x0) {
      const double f = (obstacle.x - x0) / (x1 - x0);
      const double y = path[t].pose.y() + f * (path[t + 1].pose.y() - path[t].pose.y());
      return std::abs(y - obstacle.y);
    }
  }
  return -1.0;
}

}  // namespace heatplan::testing
