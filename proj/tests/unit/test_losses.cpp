#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "heatplan/losses.hpp"

namespace heatplan {
namespace {

Trajectory line(double y, std::size_t n) {
  std::vector<TrajectoryState> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({Pose2(1.0 * i, y, 0), 2.0});
  return Trajectory(0.5, s);
}

TEST(ImitationLoss, ZeroForIdenticalAndWeightedOtherwise) {
  const LossConfig c;
  EXPECT_EQ(imitation_loss(line(0, 4), line(0, 4), c), 0.0);
  // Unit lateral error at every state: sum over t = 1..T of exp(t / (alpha T)).
  double want = 0;
  for (int t = 1; t <= 4; ++t) want += std::exp(t / (c.alpha * 4));
  EXPECT_NEAR(imitation_loss(line(1, 4), line(0, 4), c), want, 1e-12);
  EXPECT_THROW(imitation_loss(line(0, 4), line(0, 5), c), ShapeError);
}

TEST(ImitationLoss, HeadingErrorIsWrapped) {
  std::vector<TrajectoryState> a = {{Pose2(0, 0, 3.1), 1}, {Pose2(1, 0, 3.1), 1}};
  std::vector<TrajectoryState> b = {{Pose2(0, 0, -3.1), 1}, {Pose2(1, 0, -3.1), 1}};
  LossConfig c;
  const double l = imitation_loss(Trajectory(0.5, a), Trajectory(0.5, b), c);
  EXPECT_LT(l, 0.2);
}

TEST(FocalLoss, SinglePositivePixel) {
  const GridFrame one({0, 0}, 1.0, 1, 1);
  const LossConfig c;
  EXPECT_NEAR(heatmap_focal_loss(SpatialTemporalGrid(one, 1, 0.5f), SpatialTemporalGrid(one, 1, 1.0f), c),
              0.25 * std::numbers::ln2, 1e-12);
}

TEST(FocalLoss, NegativeTermUsesPenaltyReduction) {
  const GridFrame two({0, 0}, 1.0, 2, 1);
  SpatialTemporalGrid pred(two, 1, 0.5f), tgt(two, 1, 1.0f);
  tgt.at(0, 1, 0) = 0.5f;
  const LossConfig c;
  // Positive: 0.25 ln 2. Negative: (1 - 0.5)^4 * 0.5^2 * ln 2.
  const double want = 0.25 * std::numbers::ln2 + std::pow(0.5, 4) * 0.25 * std::numbers::ln2;
  EXPECT_NEAR(heatmap_focal_loss(pred, tgt, c), want, 1e-12);
}

TEST(FocalLoss, PerfectPredictionIsNearZeroAndNoPositivesThrows) {
  const GridFrame f({0, 0}, 1.0, 3, 3);
  SpatialTemporalGrid tgt(f, 2, 0.0f);
  tgt.at(0, 1, 1) = 1.0f;
  tgt.at(1, 0, 0) = 1.0f;
  EXPECT_LT(heatmap_focal_loss(tgt, tgt, LossConfig{}), 1e-6);
  EXPECT_THROW(heatmap_focal_loss(tgt, SpatialTemporalGrid(f, 2, 0.0f), LossConfig{}), ValidationError);
  EXPECT_THROW(heatmap_focal_loss(SpatialTemporalGrid(f, 1, 0.5f), tgt, LossConfig{}), ShapeError);
}

TEST(OccupancyBce, UniformHalfAndClamping) {
  const GridFrame f({0, 0}, 1.0, 4, 4);
  SpatialTemporalGrid tgt(f, 2, 0.0f);
  tgt.at(1, 2, 2) = 1.0f;
  EXPECT_NEAR(occupancy_bce(SpatialTemporalGrid(f, 2, 0.5f), tgt), std::numbers::ln2, 1e-12);
  const double worst = occupancy_bce(SpatialTemporalGrid(f, 1, 1.0f), SpatialTemporalGrid(f, 1, 0.0f));
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_NEAR(worst, -std::log(1e-6), 1e-3);
}

TEST(TotalLoss, WeightedSum) {
  const LossConfig c;
  EXPECT_EQ(total_loss({1, 1, 1}, c), 102.0);
  EXPECT_EQ(total_loss({2, 0, 0.5}, c), 52.0);
  LossConfig w;
  w.lambda_occ = 0.0;
  EXPECT_EQ(total_loss({1, 1, 1}, w), 2.0);
}

TEST(LossConfig, JsonAndValidation) {
  LossConfig c;
  c.lambda_hm = 2.0;
  EXPECT_EQ(loss_config_from_json(to_json(c)).lambda_hm, 2.0);
  EXPECT_THROW(loss_config_from_json(nlohmann::json{{"gamma", 2}}), ParseError);
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), RangeError);
}

}  // namespace
}  // namespace heatplan
