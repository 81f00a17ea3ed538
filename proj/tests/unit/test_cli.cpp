#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "heatplan/cli.hpp"

namespace heatplan {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("heatplan_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "heatplan");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }
  std::string path(const std::string& p) const { return (dir_ / p).string(); }
  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  }
  static int count(const std::string& text, const std::string& needle) {
    int n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, GenWritesLoadableDeterministicFiles) {
  ASSERT_EQ(run({"gen", "straight_lead_stop", "--seed", "4", "--out", path("a")}), kExitOk) << err_.str();
  ASSERT_EQ(run({"gen", "straight_lead_stop", "--seed", "4", "--out", path("b")}), kExitOk);
  const auto file = dir_ / "a" / "straight_lead_stop_4.json";
  const Scenario s = load_scenario_file(file);
  EXPECT_EQ(s.agents.size(), 1u);
  EXPECT_EQ(slurp(file), slurp(dir_ / "b" / "straight_lead_stop_4.json"));
}

TEST_F(Cli, GenCountParamsAndPerturb) {
  ASSERT_EQ(run({"gen", "open_field_obstacle", "--count", "3", "--param", "obstacle_size=2",
                 "--perturb", "--out", path("g")}),
            kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "g" / "open_field_obstacle_2.json"));
  const Scenario plain = generate_synthetic(SyntheticKind::kOpenFieldObstacle, {{"obstacle_size", 2}}, 1);
  const Scenario pert = load_scenario_file(dir_ / "g" / "open_field_obstacle_1.json");
  EXPECT_EQ(pert.map, plain.map);
  EXPECT_NE(pert.ego_start.pose, plain.ego_start.pose);
}

TEST_F(Cli, GenBadParamNamesIt) {
  EXPECT_EQ(run({"gen", "straight_lead_stop", "--param", "lead_gap=5000", "--out", path("x")}), kExitDomain);
  EXPECT_NE(err_.str().find("lead_gap"), std::string::npos);
  EXPECT_EQ(run({"gen", "straight_lead_stop", "--param", "lead_gap", "--out", path("x")}), kExitUsage);
  EXPECT_EQ(run({"gen", "no_such_kind", "--out", path("x")}), kExitUsage);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"plan"}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_EQ(run({"plan", path("missing.json")}), kExitUsage);
  EXPECT_EQ(run({"simulate", path("missing.json"), "--out", path("s")}), kExitUsage);
}

TEST_F(Cli, ConfigIsCheckedAndApplied) {
  std::ofstream(path("bad.json")) << R"({"solver": {"lambda_o": 1}, "mystery": 2})";
  EXPECT_EQ(run({"--config", path("bad.json"), "gen", "straight_lead_stop", "--out", path("g")}), kExitUsage);
  EXPECT_NE(err_.str().find("mystery"), std::string::npos);

  std::ofstream(path("ext.json")) << R"({"predictor": {"kind": "external", "bundle_dir": "nowhere"}})";
  EXPECT_EQ(run({"--config", path("ext.json"), "gen", "straight_lead_stop", "--out", path("g")}), kExitUsage);

  std::ofstream(path("good.json")) << R"({"seed": 12, "output_dir": "made_here"})";
  ASSERT_EQ(run({"--config", path("good.json"), "gen", "straight_lead_stop"}), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "made_here" / "straight_lead_stop_12.json"));
}

TEST_F(Cli, PlanLowersTheCollisionTerm) {
  ASSERT_EQ(run({"gen", "open_field_obstacle", "--out", path("sc")}), kExitOk);
  ASSERT_EQ(run({"plan", path("sc/open_field_obstacle_0.json"), "--grids", "--out", path("p")}), kExitOk)
      << err_.str();
  const json doc = json::parse(slurp(dir_ / "p" / "breakdown.json"));
  EXPECT_LT(doc["refined"]["collision"].get<double>(), doc["initial"]["collision"].get<double>());
  EXPECT_LT(doc["max_density_refined"].get<double>(), doc["max_density_initial"].get<double>());
  for (const char* f : {"initial_plan.json", "refined_plan.json", "density.grid", "non_drivable.grid",
                        "heatmap.grid", "occupancy.grid"}) {
    EXPECT_TRUE(fs::exists(dir_ / "p" / f)) << f;
  }
}

TEST_F(Cli, PlanWithOnlyImitationKeepsThePlan) {
  ASSERT_EQ(run({"gen", "open_field_obstacle", "--out", path("sc")}), kExitOk);
  std::ofstream(path("imi.json"))
      << R"({"solver": {"lambda_o": 0, "lambda_h": 0, "phi": {"jerk": 0, "curvature": 0,
            "curvature_rate": 0, "accel": 0, "lateral_accel": 0}}})";
  ASSERT_EQ(run({"--config", path("imi.json"), "plan", path("sc/open_field_obstacle_0.json"), "--out", path("p")}),
            kExitOk)
      << err_.str();
  const Trajectory a = trajectory_from_json(json::parse(slurp(dir_ / "p" / "initial_plan.json")), "a");
  const Trajectory b = trajectory_from_json(json::parse(slurp(dir_ / "p" / "refined_plan.json")), "b");
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].pose.x(), b[i].pose.x(), 1e-6);
    EXPECT_NEAR(a[i].pose.y(), b[i].pose.y(), 1e-6);
  }
}

TEST_F(Cli, PlanWithoutSolverReportsNoRefinement) {
  ASSERT_EQ(run({"gen", "open_field_obstacle", "--out", path("sc")}), kExitOk);
  ASSERT_EQ(run({"plan", path("sc/open_field_obstacle_0.json"), "--no-solver", "--out", path("p")}), kExitOk);
  const json doc = json::parse(slurp(dir_ / "p" / "breakdown.json"));
  EXPECT_FALSE(doc["solver"].get<bool>());
  EXPECT_TRUE(doc["refined"].is_null());
  EXPECT_EQ(slurp(dir_ / "p" / "initial_plan.json"), slurp(dir_ / "p" / "refined_plan.json"));
}

TEST_F(Cli, SimulateIsDeterministicAndRenders) {
  ASSERT_EQ(run({"gen", "straight_lead_stop", "--param", "lead_gap=40", "--out", path("sc")}), kExitOk);
  const std::string sc = path("sc/straight_lead_stop_0.json");
  ASSERT_EQ(run({"simulate", sc, "--out", path("s1")}), kExitOk) << err_.str();
  ASSERT_EQ(run({"simulate", sc, "--out", path("s2")}), kExitOk);
  const std::string log = slurp(dir_ / "s1" / "log.jsonl");
  EXPECT_EQ(log, slurp(dir_ / "s2" / "log.jsonl"));
  const json metrics = json::parse(slurp(dir_ / "s1" / "metrics.json"));
  EXPECT_EQ(metrics["collisions"].get<double>(), 1.0);

  ASSERT_EQ(run({"render", path("s1/log.jsonl"), "--tick", "0", "--tick", "12", "--out", path("r")}), kExitOk)
      << err_.str();
  const std::string svg = slurp(dir_ / "r" / "tick_0012.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "class=\"ego\""), 1);
  EXPECT_GT(count(svg, "class=\"heat\""), 0);
  EXPECT_GT(count(svg, "class=\"plan\""), 0);
  EXPECT_EQ(count(svg, "<g"), count(svg, "</g>"));

  ASSERT_EQ(run({"render", path("s1/log.jsonl"), "--tick", "12", "--no-heatmap", "--out", path("r2")}), kExitOk);
  const std::string plain = slurp(dir_ / "r2" / "tick_0012.svg");
  EXPECT_EQ(count(plain, "class=\"heat\""), 0);
  EXPECT_EQ(count(plain, "id=\"heatmap\""), 0);
  EXPECT_EQ(count(plain, "class=\"ego\""), 1);

  EXPECT_EQ(run({"render", path("s1/log.jsonl"), "--tick", "100000", "--out", path("r3")}), kExitDomain);
}

TEST_F(Cli, RenderGridHasOneRectPerPixel) {
  GridStack<float> g(GridFrame({0, 0}, 0.5, 7, 5), 2, 0.25f);
  write_grid_file(dir_ / "g.grid", g);
  ASSERT_EQ(run({"render", path("g.grid"), "--plane", "1", "--out", path("r")}), kExitOk) << err_.str();
  const std::string svg = slurp(dir_ / "r" / "g_plane_01.svg");
  EXPECT_EQ(count(svg, "class=\"px\""), 35);
  EXPECT_EQ(run({"render", path("g.grid"), "--plane", "2", "--out", path("r")}), kExitDomain);
  std::ofstream(path("junk.grid")) << "junk";
  EXPECT_EQ(run({"render", path("junk.grid"), "--out", path("r")}), kExitUsage);
}

TEST_F(Cli, EvalRowsSortedIdenticalAndMean) {
  ASSERT_EQ(run({"gen", "straight_lead_stop", "--count", "2", "--out", path("suite")}), kExitOk);
  fs::copy_file(dir_ / "suite" / "straight_lead_stop_0.json", dir_ / "suite" / "a_copy.json");
  ::setenv("HEATPLAN_THREADS", "2", 1);
  ASSERT_EQ(run({"eval", path("suite"), "--no-solver", "--out", path("e")}), kExitOk) << err_.str();
  ::unsetenv("HEATPLAN_THREADS");
  std::istringstream csv(slurp(dir_ / "e" / "eval.csv"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(csv, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0].rfind("scenario,collisions,ttc,drivable,comfort,progress,speed_limit,direction,aggregate", 0), 0u);
  EXPECT_EQ(lines[1].rfind("a_copy.json,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("straight_lead_stop_0.json,", 0), 0u);
  EXPECT_EQ(lines[1].substr(lines[1].find(',')), lines[2].substr(lines[2].find(',')));
  EXPECT_EQ(lines[4].rfind("mean,", 0), 0u);
}

TEST_F(Cli, EvalReportsFailuresPerRow) {
  ASSERT_EQ(run({"gen", "straight_lead_stop", "--out", path("suite")}), kExitOk);
  std::ofstream(path("suite/broken.json")) << "{}";
  EXPECT_EQ(run({"eval", path("suite"), "--no-solver", "--out", path("e")}), kExitDomain);
  const std::string csv = slurp(dir_ / "e" / "eval.csv");
  EXPECT_NE(csv.find("broken.json,"), std::string::npos);
  EXPECT_NE(csv.find("straight_lead_stop_0.json,1.000000"), std::string::npos);
}

TEST_F(Cli, EvalEmptyDirectoryIsAnError) {
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(run({"eval", path("empty"), "--out", path("e")}), kExitUsage);
  EXPECT_EQ(run({"eval", path("nope"), "--out", path("e")}), kExitUsage);
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.seed = 99;
  c.solver.lambda_o = 3.0;
  c.sim.duration = 5.0;
  c.predictor.kind = "noised_expert";
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.solver.lambda_o, 3.0);
  EXPECT_EQ(back.sim.duration, 5.0);
  EXPECT_EQ(back.predictor.kind, "noised_expert");
  EXPECT_THROW(run_config_from_json(json{{"seed", -1}}), ParseError);
}

}  // namespace
}  // namespace heatplan
