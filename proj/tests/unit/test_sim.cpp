#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "heatplan/sim.hpp"

namespace heatplan {
namespace {

using nlohmann::json;

/// Ego replaying the expert, agents on their ground truth.
SimulationLog expert_playback(const Scenario& s, const SimConfig& c) {
  SimulationLog log;
  log.sim_dt = c.sim_dt;
  const int ticks = static_cast<int>(std::lround(c.duration / c.sim_dt));
  for (int k = 0; k <= ticks; ++k) {
    TickRecord r;
    r.tick = k;
    r.time = k * c.sim_dt;
    const auto e = s.expert_future.at_time(r.time);
    r.ego = {e.pose, e.speed};
    for (const auto& a : s.agents) {
      if (const auto st = a.state_at(r.time)) {
        r.agents.push_back({a.id, a.kind, a.length, a.width, st->pose, st->speed});
      }
    }
    log.ticks.push_back(std::move(r));
  }
  return log;
}

TEST(Idm, FreeRoadAndFollowing) {
  const IdmParams p;
  EXPECT_NEAR(idm_acceleration(0.0, 10.0, false, 0, 0, p), p.accel_max, 1e-12);
  EXPECT_NEAR(idm_acceleration(10.0, 10.0, false, 0, 0, p), 0.0, 1e-12);
  EXPECT_LT(idm_acceleration(10.0, 10.0, true, 5.0, 10.0, p), -p.decel_comfort);
  // A distant leader barely matters.
  EXPECT_NEAR(idm_acceleration(5.0, 10.0, true, 1e4, 0.0, p), idm_acceleration(5.0, 10.0, false, 0, 0, p),
              1e-3);
}

TEST(Idm, AccelerationDecreasesAsTheGapCloses) {
  const IdmParams p;
  double prev = -1e9;
  for (double gap = 3.0; gap < 100.0; gap += 1.0) {
    const double a = idm_acceleration(8.0, 12.0, true, gap, 2.0, p);
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(ReactiveAgent, StopsBehindAStoppedLeader) {
  const BaselinePath lane{"lane", {{-100, 0}, {500, 0}}, 15.0};
  AgentState follower{"f", AgentKind::kVehicle, 4.5, 2.0, Pose2(0, 0.3, 0), 12.0};
  const AgentState leader{"l", AgentKind::kVehicle, 4.5, 2.0, Pose2(60, 0, 0), 0.0};
  const IdmParams p;
  for (int i = 0; i < 300; ++i) {
    follower = reactive_agent_step(follower, std::span(&leader, 1), lane, p, 0.1);
    EXPECT_GE(follower.speed, 0.0);
    EXPECT_LT(follower.pose.x() + 0.5 * follower.length, leader.pose.x() - 0.5 * leader.length);
  }
  EXPECT_NEAR(follower.pose.y(), 0.3, 1e-9);  // lateral offset kept
  EXPECT_LT(follower.speed, 0.1);
}

TEST(AssignBaseline, NearestAlignedBaseline) {
  MapData map;
  map.baseline_paths = {{"east", {{-100, 0}, {100, 0}}, 10.0}, {"west", {{100, 3.5}, {-100, 3.5}}, 10.0}};
  EXPECT_EQ(assign_baseline(map, Pose2(0, 0.5, 0))->id, "east");
  EXPECT_EQ(assign_baseline(map, Pose2(0, 3.0, 3.1))->id, "west");
  EXPECT_EQ(assign_baseline(map, Pose2(0, 1.0, 1.5)), nullptr);
  EXPECT_EQ(assign_baseline(map, Pose2(0, 20.0, 0.0)), nullptr);
}

TEST(SimConfig, JsonAndValidation) {
  SimConfig c;
  c.duration = 4.0;
  c.agent_mode = AgentMode::kReactive;
  c.plan.use_solver = false;
  const SimConfig back = sim_config_from_json(to_json(c));
  EXPECT_EQ(back.duration, 4.0);
  EXPECT_EQ(back.agent_mode, AgentMode::kReactive);
  EXPECT_FALSE(back.plan.use_solver);
  EXPECT_THROW(sim_config_from_json(json{{"speed", 1}}), ParseError);
  c = SimConfig{};
  c.replan_period = 0.33;
  EXPECT_ANY_THROW(c.validate());
}

TEST(Metrics, ExpertPlaybackScoresOne) {
  const SimConfig c;
  for (auto kind : {SyntheticKind::kStraightLeadStop, SyntheticKind::kUnprotectedTurn,
                    SyntheticKind::kCrosswalkPedestrians}) {
    const Scenario s = generate_synthetic(kind, {}, 0);
    const MetricsReport m = compute_metrics(expert_playback(s, c), s, c);
    for (double v : metric_values(m)) EXPECT_EQ(v, 1.0) << to_string(kind) << "\n" << to_json(m).dump();
  }
}

TEST(Metrics, ObstacleExpertDrivesThroughObstacle) {
  const SimConfig c;
  const Scenario s = generate_synthetic(SyntheticKind::kOpenFieldObstacle, {}, 0);
  const MetricsReport m = compute_metrics(expert_playback(s, c), s, c);
  EXPECT_EQ(m.collisions, 0.0);
}

TEST(Metrics, FootprintIntersectionZeroesCollisions) {
  const SimConfig c;
  const Scenario s = generate_synthetic(SyntheticKind::kStraightLeadStop, {}, 0);
  SimulationLog log = expert_playback(s, c);
  log.ticks[10].ego.pose = log.ticks[10].agents.front().pose;
  const MetricsReport m = compute_metrics(log, s, c);
  EXPECT_EQ(m.collisions, 0.0);
  EXPECT_EQ(m.collision_events, 1);
  for (double v : metric_values(m)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Metrics, StationaryEgoMakesNoProgress) {
  const SimConfig c;
  const Scenario s = generate_synthetic(SyntheticKind::kOpenFieldObstacle, {}, 0);
  SimulationLog log = expert_playback(s, c);
  for (auto& t : log.ticks) t.ego = {s.ego_start.pose, 0.0};
  EXPECT_EQ(compute_metrics(log, s, c).progress, 0.0);
}

TEST(ClosedLoop, NonReactiveAgentsFollowGroundTruth) {
  SimConfig c;
  c.duration = 2.0;
  c.plan.use_solver = false;
  const Scenario s = generate_synthetic(SyntheticKind::kCrosswalkPedestrians, {}, 3);
  const SimulationLog log = run_closed_loop(s, ConstantVelocityPredictor(PredictorConfig{}), SolverConfig{}, c);
  ASSERT_EQ(log.ticks.size(), 21u);
  for (const auto& t : log.ticks) {
    for (const auto& a : t.agents) {
      const auto it = std::find_if(s.agents.begin(), s.agents.end(), [&](const auto& x) { return x.id == a.id; });
      ASSERT_NE(it, s.agents.end());
      const auto truth = it->state_at(t.time);
      ASSERT_TRUE(truth.has_value());
      EXPECT_EQ(a.pose, truth->pose);
    }
  }
  int planned = 0;
  for (const auto& t : log.ticks) planned += t.plan.has_value();
  EXPECT_EQ(planned, 4);  // t = 0, 0.5, 1.0, 1.5
}

TEST(ClosedLoop, DeterministicAndLogRoundTrip) {
  SimConfig c;
  c.duration = 3.0;
  PredictorConfig pc;
  pc.kind = "noised_expert";
  const Scenario s = generate_synthetic(SyntheticKind::kOpenFieldObstacle, {}, 2);
  const NoisedExpertPredictor pred(pc, 7);
  const auto a = run_closed_loop(s, pred, SolverConfig{}, c);
  const auto b = run_closed_loop(s, pred, SolverConfig{}, c);
  const json header = {{"note", "unit"}};
  const std::string text = log_to_jsonl(a, header);
  EXPECT_EQ(text, log_to_jsonl(b, header));
  json back_header;
  const auto back = log_from_jsonl(text, &back_header);
  EXPECT_EQ(back_header.at("note"), "unit");
  EXPECT_EQ(log_to_jsonl(back, header), text);
  EXPECT_THROW(log_from_jsonl("{\"type\":\"tick\"}\n"), ParseError);
}

TEST(ClosedLoop, ReactiveModeRuns) {
  SimConfig c;
  c.duration = 2.0;
  c.agent_mode = AgentMode::kReactive;
  c.plan.use_solver = false;
  const Scenario s = generate_synthetic(SyntheticKind::kStraightLeadStop, {}, 1);
  const auto log = run_closed_loop(s, ConstantVelocityPredictor(PredictorConfig{}), SolverConfig{}, c);
  EXPECT_EQ(log.ticks.size(), 21u);
  EXPECT_EQ(log.ticks.back().agents.size(), s.agents.size());
}

TEST(ParallelFor, CoversEveryIndexOnceAndRethrows) {
  for (unsigned threads : {0u, 1u, 4u}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, threads, [](std::size_t i) {
                   if (i == 3) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
  }
}

TEST(ThreadCount, ReadsTheEnvironment) {
  ::setenv("HEATPLAN_THREADS", "0", 1);
  EXPECT_EQ(thread_count_from_env(), 0u);
  ::setenv("HEATPLAN_THREADS", "3", 1);
  EXPECT_EQ(thread_count_from_env(), 3u);
  ::unsetenv("HEATPLAN_THREADS");
  EXPECT_GE(thread_count_from_env(), 1u);
}

}  // namespace
}  // namespace heatplan
