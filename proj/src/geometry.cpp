#include "heatplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heatplan/kinematics_tape.hpp"

namespace heatplan {

double normalize_angle(double angle) {
  if (angle > -kPi && angle <= kPi) {
    return angle;
  }
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

Pose2::Pose2(double x, double y, double heading)
    : x_(x), y_(y), heading_(normalize_angle(heading)) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(heading)) {
    throw std::invalid_argument("Pose2: non-finite component");
  }
}

Trajectory::Trajectory(double dt, std::vector<TrajectoryState> states)
    : dt_(dt), states_(std::move(states)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw std::invalid_argument("Trajectory: dt must be positive and finite");
  }
  if (states_.size() < 2) {
    throw std::invalid_argument("Trajectory: at least two states required, got " +
                                std::to_string(states_.size()));
  }
  for (const auto& s : states_) {
    if (!std::isfinite(s.speed)) {
      throw std::invalid_argument("Trajectory: non-finite speed");
    }
  }
}

TrajectoryState Trajectory::at_time(double t) const {
  if (t <= 0.0) {
    return states_.front();
  }
  const double u = t / dt_;
  const auto last = static_cast<double>(states_.size() - 1);
  if (u >= last) {
    return states_.back();
  }
  const auto i = static_cast<std::size_t>(std::floor(u));
  const double f = u - static_cast<double>(i);
  const auto& a = states_[i];
  const auto& b = states_[i + 1];
  const double heading =
      a.pose.heading() + f * normalize_angle(b.pose.heading() - a.pose.heading());
  return {Pose2(a.pose.x() + f * (b.pose.x() - a.pose.x()),
                a.pose.y() + f * (b.pose.y() - a.pose.y()), heading),
          a.speed + f * (b.speed - a.speed)};
}

GridFrame::GridFrame(Vec2 origin, double resolution, int width, int height, double orientation)
    : origin_(origin),
      resolution_(resolution),
      width_(width),
      height_(height),
      orientation_(orientation) {
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw std::invalid_argument("GridFrame: resolution must be positive");
  }
  if (width_ <= 0 || height_ <= 0) {
    throw std::invalid_argument("GridFrame: width and height must be positive");
  }
  if (!std::isfinite(origin_.x) || !std::isfinite(origin_.y) || !std::isfinite(orientation_)) {
    throw std::invalid_argument("GridFrame: non-finite origin or orientation");
  }
}

Vec2 GridFrame::world_to_grid(Vec2 world) const {
  const Vec2 local = rotate(world - origin_, -orientation_);
  return {local.x / resolution_, local.y / resolution_};
}

Vec2 GridFrame::grid_to_world(Vec2 pixel) const {
  return origin_ + rotate({pixel.x * resolution_, pixel.y * resolution_}, orientation_);
}

bool GridFrame::contains(Vec2 pixel) const {
  return pixel.x >= -0.5 && pixel.y >= -0.5 && pixel.x < static_cast<double>(width_) - 0.5 &&
         pixel.y < static_cast<double>(height_) - 0.5;
}

PixelIndex GridFrame::round_pixel(Vec2 world) const {
  const Vec2 g = world_to_grid(world);
  const double big = 1e9;
  return {static_cast<int>(std::floor(std::clamp(g.x, -big, big) + 0.5)),
          static_cast<int>(std::floor(std::clamp(g.y, -big, big) + 0.5))};
}

std::optional<PixelIndex> GridFrame::nearest_pixel(Vec2 world) const {
  const PixelIndex p = round_pixel(world);
  if (!contains(p)) {
    return std::nullopt;
  }
  return p;
}

GridFrame make_ego_frame(const Pose2& ego, double resolution, int width, int height) {
  const double ego_col = static_cast<double>(width) / 4.0;
  const double ego_row = static_cast<double>(height - 1) / 2.0;
  const Vec2 origin =
      ego.position() - rotate({ego_col * resolution, ego_row * resolution}, ego.heading());
  return GridFrame(origin, resolution, width, height, ego.heading());
}

Polygon oriented_box(const Pose2& center, double length, double width) {
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {center.transform({hl, hw}), center.transform({-hl, hw}), center.transform({-hl, -hw}),
          center.transform({hl, -hw})};
}

double signed_area(std::span<const Vec2> polygon) {
  double acc = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    acc += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * acc;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

bool point_in_any(Vec2 p, std::span<const Polygon> polygons) {
  return std::any_of(polygons.begin(), polygons.end(),
                     [&](const Polygon& poly) { return point_in_polygon(p, poly); });
}

namespace {

int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const int o1 = orientation_sign(a0, a1, b0);
  const int o2 = orientation_sign(a0, a1, b1);
  const int o3 = orientation_sign(b0, b1, a0);
  const int o4 = orientation_sign(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

bool is_simple_polygon(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a0 = polygon[i];
    const Vec2 a1 = polygon[(i + 1) % n];
    if (a0 == a1) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a0, a1, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return std::abs(signed_area(polygon)) > 0.0;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  return point_in_polygon(a.front(), b) || point_in_polygon(b.front(), a);
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_polygon(Vec2 p, std::span<const Vec2> polygon) {
  if (point_in_polygon(p, polygon)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    best = std::min(best, distance_to_segment(p, polygon[i], polygon[(i + 1) % polygon.size()]));
  }
  return best;
}

Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  Polygon output(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2 c0 = clip[e];
    const Vec2 c1 = clip[(e + 1) % m];
    const Vec2 edge = c1 - c0;
    Polygon input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2 cur = input[i];
      const Vec2 prev = input[(i + input.size() - 1) % input.size()];
      const double d_cur = cross(edge, cur - c0);
      const double d_prev = cross(edge, prev - c0);
      if (d_cur >= 0.0) {
        if (d_prev < 0.0) {
          const double t = d_prev / (d_prev - d_cur);
          output.push_back(prev + t * (cur - prev));
        }
        output.push_back(cur);
      } else if (d_prev >= 0.0) {
        const double t = d_prev / (d_prev - d_cur);
        output.push_back(prev + t * (cur - prev));
      }
    }
  }
  return output;
}

double polyline_length(std::span<const Vec2> line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    len += (line[i] - line[i - 1]).norm();
  }
  return len;
}

PolylineProjection project_to_polyline(Vec2 p, std::span<const Vec2> line) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (line.empty()) return best;
  if (line.size() == 1) {
    best.distance = (p - line[0]).norm();
    return best;
  }
  double s0 = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 a = line[i];
    const Vec2 ab = line[i + 1] - a;
    const double len = ab.norm();
    if (len <= 0.0) continue;
    const double t = std::clamp(dot(p - a, ab) / (len * len), 0.0, 1.0);
    const Vec2 q = a + t * ab;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.arc_length = s0 + t * len;
      best.heading = std::atan2(ab.y, ab.x);
      best.lateral = cross(ab, p - a) / len;
    }
    s0 += len;
  }
  return best;
}

Pose2 polyline_pose_at(std::span<const Vec2> line, double arc_length) {
  if (line.size() < 2) {
    throw std::invalid_argument("polyline_pose_at: need at least two points");
  }
  double s0 = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 ab = line[i + 1] - line[i];
    const double len = ab.norm();
    const bool last = i + 2 == line.size();
    if (arc_length <= s0 + len || last) {
      const double t = len > 0.0 ? std::clamp((arc_length - s0) / len, 0.0, 1.0) : 0.0;
      return Pose2(line[i] + t * ab, std::atan2(ab.y, ab.x));
    }
    s0 += len;
  }
  return Pose2(line.back(), 0.0);
}

KinematicProfile trajectory_kinematics(const Trajectory& trajectory, double wheelbase) {
  const std::size_t n = trajectory.size();
  if (n < 4) {
    throw std::invalid_argument("trajectory_kinematics: need at least 4 states");
  }
  std::vector<double> x(n), y(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = trajectory[i].pose.x();
    y[i] = trajectory[i].pose.y();
    h[i] = trajectory[i].pose.heading();
  }
  KinematicsTape tape;
  tape.forward(x, y, h, trajectory.dt());
  KinematicProfile out;
  auto copy = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  out.speed = copy(tape.speed());
  out.accel = copy(tape.accel());
  out.jerk = copy(tape.jerk());
  out.yaw_rate = copy(tape.yaw_rate());
  out.curvature = copy(tape.curvature());
  out.curvature_rate = copy(tape.curvature_rate());
  out.lateral_accel = copy(tape.lateral_accel());
  out.steering.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.steering[i] = std::atan(wheelbase * out.curvature[i]);
  }
  return out;
}

}  // namespace heatplan
