#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace heatplan {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline Vec2 unit_from_heading(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

/// Planar pose. The heading is normalized on construction.
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double heading);
  Pose2(Vec2 position, double heading) : Pose2(position.x, position.y, heading) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double heading() const { return heading_; }
  Vec2 position() const { return {x_, y_}; }

  /// Expresses a body-frame offset in the world frame.
  Vec2 transform(Vec2 local) const { return position() + rotate(local, heading_); }
  Vec2 inverse_transform(Vec2 world) const {
    return rotate(world - position(), -heading_);
  }

  friend bool operator==(const Pose2&, const Pose2&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double heading_ = 0.0;
};

struct TrajectoryState {
  Pose2 pose;
  double speed = 0.0;

  friend bool operator==(const TrajectoryState&, const TrajectoryState&) = default;
};

/// Fixed-step sequence of poses with speeds. At least two states, positive dt,
/// finite values.
class Trajectory {
 public:
  Trajectory(double dt, std::vector<TrajectoryState> states);

  double dt() const { return dt_; }
  std::size_t size() const { return states_.size(); }
  double duration() const { return dt_ * static_cast<double>(states_.size() - 1); }
  std::span<const TrajectoryState> states() const { return states_; }
  const TrajectoryState& operator[](std::size_t i) const { return states_[i]; }
  const TrajectoryState& front() const { return states_.front(); }
  const TrajectoryState& back() const { return states_.back(); }

  /// Linear interpolation in time, heading interpolated along the short arc.
  /// Times outside [0, duration] are clamped.
  TrajectoryState at_time(double t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  double dt_;
  std::vector<TrajectoryState> states_;
};

/// Integer pixel address, column-major naming: col along the frame x axis.
struct PixelIndex {
  int col = 0;
  int row = 0;
  friend bool operator==(PixelIndex, PixelIndex) = default;
};

/// Geo-reference of a raster. Pixel (col, row) has its center at
/// origin + R(orientation) * (col * resolution, row * resolution).
class GridFrame {
 public:
  GridFrame(Vec2 origin, double resolution, int width, int height, double orientation = 0.0);

  Vec2 origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double orientation() const { return orientation_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  /// Fractional pixel coordinates (x = column, y = row). Never clips.
  Vec2 world_to_grid(Vec2 world) const;
  Vec2 grid_to_world(Vec2 pixel) const;
  Vec2 pixel_center(int col, int row) const {
    return grid_to_world({static_cast<double>(col), static_cast<double>(row)});
  }

  /// True when the fractional coordinate lies inside the pixel area of the grid.
  bool contains(Vec2 pixel) const;
  bool contains(PixelIndex p) const {
    return p.col >= 0 && p.row >= 0 && p.col < width_ && p.row < height_;
  }
  /// Pixel whose area contains the world point, if inside the grid.
  std::optional<PixelIndex> nearest_pixel(Vec2 world) const;
  PixelIndex round_pixel(Vec2 world) const;

  std::size_t linear_index(PixelIndex p) const {
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(p.col);
  }

  friend bool operator==(const GridFrame&, const GridFrame&) = default;

 private:
  Vec2 origin_;
  double resolution_;
  int width_;
  int height_;
  double orientation_;
};

/// Ego-aligned frame: +x (columns) forward, the ego a quarter of the extent
/// from the rear edge and centered laterally.
GridFrame make_ego_frame(const Pose2& ego, double resolution, int width, int height);

struct VehicleGeometry {
  double length = 4.0;
  double width = 2.0;
  double wheelbase = 2.5;
};

// ---------------------------------------------------------------------------
// Polygons and polylines
// ---------------------------------------------------------------------------

using Polygon = std::vector<Vec2>;
using Polyline = std::vector<Vec2>;

/// Corners of a rectangle centered at the pose, counter-clockwise.
Polygon oriented_box(const Pose2& center, double length, double width);

double signed_area(std::span<const Vec2> polygon);
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);
bool point_in_any(Vec2 p, std::span<const Polygon> polygons);
bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
/// No two non-adjacent edges touch; at least three vertices.
bool is_simple_polygon(std::span<const Vec2> polygon);
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);
double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
/// Zero when inside.
double distance_to_polygon(Vec2 p, std::span<const Vec2> polygon);
/// Sutherland-Hodgman clip of `subject` by a convex counter-clockwise `clip`.
Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

struct PolylineProjection {
  double arc_length = 0.0;
  double lateral = 0.0;  // positive to the left of travel
  double heading = 0.0;
  double distance = 0.0;
};

double polyline_length(std::span<const Vec2> line);
PolylineProjection project_to_polyline(Vec2 p, std::span<const Vec2> line);
/// Point and tangent heading at an arc length (clamped to the line).
Pose2 polyline_pose_at(std::span<const Vec2> line, double arc_length);

// ---------------------------------------------------------------------------
// Kinematics
// ---------------------------------------------------------------------------

/// Speed below which curvature is taken as heading rate over this floor.
inline constexpr double kCurvatureSpeedFloor = 0.1;

struct KinematicProfile {
  std::vector<double> speed;
  std::vector<double> accel;
  std::vector<double> jerk;
  std::vector<double> yaw_rate;
  std::vector<double> curvature;
  std::vector<double> curvature_rate;
  std::vector<double> lateral_accel;
  std::vector<double> steering;
};

/// Finite-difference kinematics of a trajectory (positions and headings only;
/// stored speeds are ignored). Requires at least four states.
KinematicProfile trajectory_kinematics(const Trajectory& trajectory, double wheelbase);

}  // namespace heatplan
