#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "heatplan/predictor.hpp"

namespace heatplan {
namespace {

Scenario lead_stop() { return generate_synthetic(SyntheticKind::kStraightLeadStop, {}, 0); }

TEST(PredictorConfig, JsonAndValidation) {
  PredictorConfig c;
  c.kind = "noised_expert";
  c.noise_lateral = 0.8;
  const auto back = predictor_config_from_json(to_json(c));
  EXPECT_EQ(back.kind, "noised_expert");
  EXPECT_EQ(back.noise_lateral, 0.8);
  EXPECT_THROW(predictor_config_from_json(nlohmann::json{{"kind", 3}}), ParseError);
  EXPECT_THROW(predictor_config_from_json(nlohmann::json{{"bogus", 3}}), ParseError);
  c.kind = "oracle";
  EXPECT_ANY_THROW(c.validate());
}

TEST(ReferencePlan, StartsAtEgoAndFollowsExpertAtT0) {
  const Scenario s = lead_stop();
  const PredictorConfig c;
  const Trajectory r = reference_plan(s, initial_snapshot(s), c);
  ASSERT_EQ(r.size(), 16u);
  EXPECT_EQ(r[0].pose.position(), s.ego_start.pose.position());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(r[i].pose.x(), s.expert_future[i].pose.x(), 1e-9);
    EXPECT_NEAR(r[i].pose.y(), s.expert_future[i].pose.y(), 1e-9);
  }
}

TEST(ConstantVelocityPredictor, ShapesRangesAndDecay) {
  const Scenario s = lead_stop();
  const PredictorConfig c;
  const auto b = ConstantVelocityPredictor(c).predict(s, initial_snapshot(s));
  EXPECT_NO_THROW(b.validate());
  EXPECT_EQ(b.occupancy.planes(), 16u);
  EXPECT_EQ(b.occupancy.width(), 224);
  EXPECT_EQ(b.heatmap.width(), 448);
  EXPECT_EQ(b.initial_plan.size(), 16u);
  // Occupancy mass of the single agent is decayed by gamma^t.
  float peak0 = 0, peak5 = 0;
  for (float v : b.occupancy.plane(0)) peak0 = std::max(peak0, v);
  for (float v : b.occupancy.plane(5)) peak5 = std::max(peak5, v);
  EXPECT_NEAR(peak0, 1.0f, 1e-6);
  EXPECT_NEAR(peak5, std::pow(0.97, 5), 1e-6);
}

TEST(NoisedExpertPredictor, DeterministicPerSeedAndBounded) {
  const Scenario s = generate_synthetic(SyntheticKind::kOpenFieldObstacle, {}, 1);
  PredictorConfig c;
  c.kind = "noised_expert";
  const auto snap = initial_snapshot(s);
  const auto a = NoisedExpertPredictor(c, 5).predict(s, snap);
  const auto b = NoisedExpertPredictor(c, 5).predict(s, snap);
  const auto d = NoisedExpertPredictor(c, 6).predict(s, snap);
  EXPECT_EQ(a.initial_plan, b.initial_plan);
  EXPECT_NE(a.initial_plan, d.initial_plan);
  const Trajectory clean = reference_plan(s, snap, c);
  EXPECT_EQ(a.initial_plan[0].pose, clean[0].pose);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const Vec2 local = clean[i].pose.inverse_transform(a.initial_plan[i].pose.position());
    EXPECT_LE(std::abs(local.y), c.noise_lateral + 1e-9);
    EXPECT_LE(std::abs(local.x), c.noise_longitudinal + 1e-9);
  }
}

TEST(AddPlanNoise, ZeroAmplitudeIsIdentity) {
  const Scenario s = lead_stop();
  const Trajectory r = reference_plan(s, initial_snapshot(s), PredictorConfig{});
  const Trajectory n = add_plan_noise(r, 0.0, 0.0, 9);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(n[i].pose.x(), r[i].pose.x(), 1e-12);
    EXPECT_NEAR(n[i].pose.y(), r[i].pose.y(), 1e-12);
  }
}

TEST(Bundle, SaveLoadRoundTripAndExternalPredictor) {
  const Scenario s = lead_stop();
  const auto b = ConstantVelocityPredictor(PredictorConfig{}).predict(s, initial_snapshot(s));
  const auto dir = std::filesystem::temp_directory_path() / "heatplan_unit_bundle";
  std::filesystem::remove_all(dir);
  save_bundle(dir, b);
  const auto back = load_bundle(dir);
  EXPECT_EQ(back.initial_plan, b.initial_plan);
  EXPECT_EQ(back.heatmap, b.heatmap);
  EXPECT_EQ(back.occupancy, b.occupancy);
  const auto ext = ExternalPredictor(back).predict(s, initial_snapshot(s));
  EXPECT_EQ(ext.initial_plan, b.initial_plan);
  std::filesystem::remove_all(dir);
  EXPECT_ANY_THROW(load_bundle(dir));
}

TEST(Bundle, ValidateRejectsOutOfRangeValues) {
  const Scenario s = lead_stop();
  auto b = ConstantVelocityPredictor(PredictorConfig{}).predict(s, initial_snapshot(s));
  b.heatmap.plane(0)[0] = 1.5f;
  EXPECT_THROW(b.validate(), PredictionError);
}

TEST(MakePredictor, DispatchesOnKind) {
  PredictorConfig c;
  EXPECT_NE(dynamic_cast<ConstantVelocityPredictor*>(make_predictor(c, 0).get()), nullptr);
  c.kind = "noised_expert";
  EXPECT_NE(dynamic_cast<NoisedExpertPredictor*>(make_predictor(c, 0).get()), nullptr);
}

TEST(TrajectoryJson, RoundTrip) {
  const Scenario s = lead_stop();
  EXPECT_EQ(trajectory_from_json(trajectory_to_json(s.expert_future), "t"), s.expert_future);
}

}  // namespace
}  // namespace heatplan
