#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "heatplan/solver.hpp"
#include "oracles.hpp"

namespace heatplan {
namespace {

using nlohmann::json;

TEST(SolverConfig, JsonRoundTripAndUnknownKeys) {
  SolverConfig c;
  c.lambda_o = 12.5;
  c.bounds.jerk_max = 3.0;
  const SolverConfig back = solver_config_from_json(to_json(c));
  EXPECT_EQ(back.lambda_o, 12.5);
  EXPECT_EQ(back.bounds.jerk_max, 3.0);
  EXPECT_THROW(solver_config_from_json(json{{"lambda_x", 1.0}}), ParseError);
  EXPECT_THROW(solver_config_from_json(json{{"bounds", {{"nope", 1.0}}}}), ParseError);
  EXPECT_THROW(solver_config_from_json(json{{"lambda_o", "high"}}), ParseError);
}

TEST(SolverConfig, ValidateRejectsBadValues) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.sigma_o = 0.0;
  EXPECT_THROW(c.validate(), RangeError);
  c = SolverConfig{};
  c.lambda_imi = -1.0;
  EXPECT_THROW(c.validate(), RangeError);
}

TEST(HardBounds, DetectsViolations) {
  const SolverConfig c;
  std::vector<TrajectoryState> s;
  for (int i = 0; i < 16; ++i) s.push_back({Pose2(5.0 * 0.5 * i, 0, 0), 5.0});
  EXPECT_TRUE(check_hard_bounds(Trajectory(0.5, s), c).feasible);
  s[8].pose = Pose2(s[8].pose.x() + 3.0, 0, 0);  // sudden jump forward
  const auto check = check_hard_bounds(Trajectory(0.5, s), c);
  EXPECT_FALSE(check.feasible);
  EXPECT_FALSE(check.first_violation.empty());
  EXPECT_GT(check.worst_excess, 0.0);
}

TEST(CollisionTerm, GradientMatchesFiniteDifferences) {
  const auto inst = testing::make_cost_instance(3);
  const SolverConfig c;
  const auto plane = inst.density.grid.plane(8);
  const GridFrame& f = inst.density.grid.frame();
  const Pose2 p = inst.tau[8].pose;
  const TermValue v = collision_term(p, f, plane, c);
  const double h = 1e-6;
  const double gx = (collision_term(Pose2(p.x() + h, p.y(), 0), f, plane, c).value -
                     collision_term(Pose2(p.x() - h, p.y(), 0), f, plane, c).value) / (2 * h);
  const double gy = (collision_term(Pose2(p.x(), p.y() + h, 0), f, plane, c).value -
                     collision_term(Pose2(p.x(), p.y() - h, 0), f, plane, c).value) / (2 * h);
  EXPECT_NEAR(v.gradient.x, gx, 1e-6 * std::max(1.0, std::abs(gx)));
  EXPECT_NEAR(v.gradient.y, gy, 1e-6 * std::max(1.0, std::abs(gy)));
}

TEST(CollisionTerm, EmptyWhenNothingIsOccupied) {
  const GridFrame f({0, 0}, 0.5, 20, 20);
  const std::vector<double> plane(f.pixel_count(), 0.0);
  const TermValue v = collision_term(Pose2(5, 5, 0), f, plane, SolverConfig{});
  EXPECT_TRUE(v.empty);
  EXPECT_EQ(v.value, 0.0);
}

TEST(OccupiedSampler, NearestOrderedByDistance) {
  const GridFrame f({0, 0}, 1.0, 10, 10);
  std::vector<double> plane(f.pixel_count(), 0.0);
  plane[f.linear_index({2, 2})] = 1.0;
  plane[f.linear_index({5, 5})] = 1.0;
  plane[f.linear_index({9, 9})] = 1.0;
  const OccupiedSampler s(f, plane, 0.5, 6.0);
  EXPECT_EQ(s.occupied_count(), 3u);
  std::vector<std::size_t> out;
  s.nearest({4.9, 5.0}, 2, out);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], f.linear_index({5, 5}));
  EXPECT_EQ(out[1], f.linear_index({2, 2}));
  s.nearest({1.0, 1.0}, 5, out);  // (9, 9) lies beyond the maximum distance
  EXPECT_EQ(out.size(), 2u);
}

TEST(HeatmapTerm, TopSamplesAndGradient) {
  const GridFrame f({0, 0}, 0.5, 20, 20);
  std::vector<float> plane(f.pixel_count(), 0.0f);
  plane[f.linear_index({4, 4})] = 1.0f;
  plane[f.linear_index({6, 4})] = 0.5f;
  plane[f.linear_index({10, 10})] = 0.2f;
  const HeatSamples top = top_heat_samples(f, plane, 2);
  ASSERT_EQ(top.values.size(), 2u);
  EXPECT_EQ(top.values[0], 1.0);
  EXPECT_EQ(top.values[1], 0.5);
  SolverConfig c;
  const Pose2 p(2.3, 1.7, 0);
  const TermValue v = heatmap_term(p, top, c);
  const double h = 1e-6;
  const double gx = (heatmap_term(Pose2(p.x() + h, p.y(), 0), top, c).value -
                     heatmap_term(Pose2(p.x() - h, p.y(), 0), top, c).value) / (2 * h);
  EXPECT_NEAR(v.gradient.x, gx, 1e-8);
}

TEST(TotalCost, ReferenceHasZeroImitationAndHorizonMustMatch) {
  const auto inst = testing::make_cost_instance(4);
  const SolverConfig c;
  const auto e = total_cost(inst.reference, inst.reference, inst.density, inst.heat, c);
  EXPECT_NEAR(e.breakdown.imitation, 0.0, 1e-12);
  EXPECT_NEAR(e.breakdown.total,
              e.breakdown.imitation + e.breakdown.kinematic() + e.breakdown.collision + e.breakdown.heatmap,
              1e-9);
  const Trajectory shorter(0.5, {inst.reference[0], inst.reference[1]});
  EXPECT_THROW(total_cost(shorter, inst.reference, inst.density, inst.heat, c), ShapeError);
}

TEST(Refine, LowersCostKeepsStartAndIsFeasible) {
  const SolverConfig c;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = testing::make_cost_instance(20 + seed);
    const auto r = refine(inst.reference, inst.density, inst.heat, c);
    EXPECT_LE(r.breakdown.total, r.initial_breakdown.total + 1e-9);
    EXPECT_EQ(r.trajectory[0].pose, inst.reference[0].pose);
    EXPECT_EQ(r.trajectory.size(), inst.reference.size());
    if (r.feasible) EXPECT_TRUE(check_hard_bounds(r.trajectory, c).feasible);
  }
}

TEST(Refine, PureImitationIsIdentity) {
  SolverConfig c;
  c.lambda_o = c.lambda_h = 0.0;
  c.phi = KinematicWeights{0, 0, 0, 0, 0};
  const auto inst = testing::make_cost_instance(42);
  const auto r = refine(inst.reference, inst.density, inst.heat, c);
  for (std::size_t t = 0; t < inst.reference.size(); ++t) {
    EXPECT_NEAR(r.trajectory[t].pose.x(), inst.reference[t].pose.x(), 1e-6);
    EXPECT_NEAR(r.trajectory[t].pose.y(), inst.reference[t].pose.y(), 1e-6);
  }
}

TEST(MaxDensityAlong, SamplesTheSegments) {
  const GridFrame f({0, 0}, 1.0, 10, 3);
  CollisionDensityMap d{GridStack<double>(f, 2, 0.0)};
  d.grid.at(0, 5, 1) = 0.8;
  const Trajectory through(1.0, {{Pose2(0, 1, 0), 8}, {Pose2(8, 1, 0), 8}});
  const Trajectory beside(1.0, {{Pose2(0, 2, 0), 8}, {Pose2(8, 2, 0), 8}});
  EXPECT_NEAR(max_density_along(through, d), 0.8, 1e-9);
  EXPECT_LT(max_density_along(beside, d), 0.8);
}

}  // namespace
}  // namespace heatplan
