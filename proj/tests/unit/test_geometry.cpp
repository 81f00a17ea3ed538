#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heatplan/geometry.hpp"
#include "heatplan/rng.hpp"
#include "oracles.hpp"

namespace heatplan {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(NormalizeAngle, WrapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(normalize_angle(0.0), 0.0);
  EXPECT_NEAR(normalize_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(2 * kPi + 0.1), 0.1, 1e-12);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(rng.uniform(-100.0, 100.0));
    EXPECT_GT(a, -kPi);
    EXPECT_LE(a, kPi);
  }
}

TEST(Pose2, TransformRoundTrip) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Pose2 p(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-4, 4));
    const Vec2 local{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Vec2 back = p.inverse_transform(p.transform(local));
    EXPECT_NEAR(back.x, local.x, 1e-9);
    EXPECT_NEAR(back.y, local.y, 1e-9);
  }
}

TEST(Trajectory, RejectsMalformedInput) {
  EXPECT_THROW(Trajectory(0.5, {TrajectoryState{}}), std::invalid_argument);
  EXPECT_THROW(Trajectory(0.0, {TrajectoryState{}, TrajectoryState{}}), std::invalid_argument);
}

TEST(Trajectory, AtTimeInterpolatesAndClamps) {
  const Trajectory t(1.0, {{Pose2(0, 0, 0), 1.0}, {Pose2(2, 0, 0), 3.0}});
  EXPECT_NEAR(t.at_time(0.5).pose.x(), 1.0, 1e-12);
  EXPECT_NEAR(t.at_time(0.5).speed, 2.0, 1e-12);
  EXPECT_NEAR(t.at_time(5.0).pose.x(), 2.0, 1e-12);
  EXPECT_NEAR(t.at_time(-1.0).pose.x(), 0.0, 1e-12);
}

TEST(Polygon, OrientedBoxAreaAndContainment) {
  const Polygon box = oriented_box(Pose2(1, 2, 0.7), 4.0, 2.0);
  EXPECT_NEAR(signed_area(box), 8.0, 1e-12);
  EXPECT_TRUE(point_in_polygon({1, 2}, box));
  EXPECT_FALSE(point_in_polygon({10, 2}, box));
  EXPECT_TRUE(is_simple_polygon(box));
}

TEST(Polygon, ClipConvexMatchesHalfPlaneOracle) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vec2 c{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double h = rng.uniform(-kPi, kPi);
    const double l = rng.uniform(0.5, 4), w = rng.uniform(0.5, 3);
    const Polygon box = oriented_box(Pose2(c, h), l, w);
    const Polygon cell = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
    const Polygon clipped = clip_convex(box, cell);
    const double area = clipped.size() >= 3 ? std::abs(signed_area(clipped)) : 0.0;
    EXPECT_NEAR(area, testing::rect_square_overlap(c, h, l, w, -0.5, -0.5, 0.5, 0.5), 1e-12);
  }
}

TEST(Polygon, IntersectionAndDistance) {
  const Polygon a = oriented_box(Pose2(0, 0, 0), 2, 2);
  const Polygon b = oriented_box(Pose2(1.5, 0, 0.3), 2, 2);
  const Polygon c = oriented_box(Pose2(5, 0, 0), 2, 2);
  EXPECT_TRUE(polygons_intersect(a, b));
  EXPECT_FALSE(polygons_intersect(a, c));
  EXPECT_NEAR(distance_to_polygon({3, 0}, a), 2.0, 1e-12);
  EXPECT_EQ(distance_to_polygon({0.2, 0.1}, a), 0.0);
  EXPECT_TRUE(segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 0}));
  EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
}

TEST(Polyline, ProjectionSignsAndArcLength) {
  const Polyline line = {{0, 0}, {10, 0}, {10, 10}};
  EXPECT_NEAR(polyline_length(line), 20.0, 1e-12);
  const auto p = project_to_polyline({4, 1}, line);
  EXPECT_NEAR(p.arc_length, 4.0, 1e-12);
  EXPECT_NEAR(p.lateral, 1.0, 1e-12);
  EXPECT_NEAR(project_to_polyline({4, -1}, line).lateral, -1.0, 1e-12);
  const Pose2 q = polyline_pose_at(line, 15.0);
  EXPECT_NEAR(q.x(), 10.0, 1e-12);
  EXPECT_NEAR(q.y(), 5.0, 1e-12);
  EXPECT_NEAR(q.heading(), kPi / 2, 1e-12);
}

TEST(GridFrame, WorldGridRoundTrip) {
  const GridFrame f({3, -4}, 0.25, 100, 80, 0.6);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec2 w{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const Vec2 back = f.grid_to_world(f.world_to_grid(w));
    EXPECT_NEAR(back.x, w.x, 1e-9);
    EXPECT_NEAR(back.y, w.y, 1e-9);
  }
  const Vec2 c = f.pixel_center(0, 0);
  EXPECT_NEAR(c.x, 3.0, 1e-12);
  EXPECT_NEAR(c.y, -4.0, 1e-12);
  EXPECT_FALSE(f.nearest_pixel(f.grid_to_world({-1.0, 5.0})).has_value());
}

TEST(GridFrame, EgoFramePlacesEgoAQuarterFromTheRear) {
  const Pose2 ego(10, 20, 0.3);
  const GridFrame f = make_ego_frame(ego, 0.5, 224, 224);
  const Vec2 g = f.world_to_grid(ego.position());
  EXPECT_NEAR(g.x, 56.0, 1e-9);
  EXPECT_NEAR(g.y, 111.5, 1e-9);
  EXPECT_NEAR(f.orientation(), 0.3, 1e-12);
}

TEST(Kinematics, StraightConstantSpeed) {
  std::vector<TrajectoryState> s;
  for (int i = 0; i < 10; ++i) s.push_back({Pose2(5.0 * 0.5 * i, 0, 0), 5.0});
  const auto k = trajectory_kinematics(Trajectory(0.5, s), 2.5);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(k.speed[i], 5.0, 1e-12);
    EXPECT_NEAR(k.accel[i], 0.0, 1e-12);
    EXPECT_NEAR(k.curvature[i], 0.0, 1e-12);
  }
}

TEST(Kinematics, CircleHasConstantCurvature) {
  const double r = 20.0, v = 5.0, dt = 0.1;
  std::vector<TrajectoryState> s;
  for (int i = 0; i < 40; ++i) {
    const double a = v * dt * i / r;
    s.push_back({Pose2(r * std::sin(a), r - r * std::cos(a), a), v});
  }
  const auto k = trajectory_kinematics(Trajectory(dt, s), 2.5);
  for (std::size_t i = 2; i + 2 < s.size(); ++i) {
    EXPECT_NEAR(k.curvature[i], 1.0 / r, 1e-3);
    EXPECT_NEAR(k.lateral_accel[i], v * v / r, 2e-2);
  }
}

}  // namespace
}  // namespace heatplan
