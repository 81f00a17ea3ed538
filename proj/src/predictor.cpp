#include "heatplan/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "heatplan/perturb.hpp"
#include "heatplan/raster.hpp"
#include "heatplan/rng.hpp"
#include "json_util.hpp"

namespace heatplan {

using nlohmann::json;

void PredictorConfig::validate() const {
  if (kind != "constant_velocity" && kind != "noised_expert" && kind != "external") {
    throw RangeError("predictor.kind must be constant_velocity, noised_expert or external");
  }
  if (horizon < 4) throw RangeError("predictor.horizon must be >= 4");
  if (!(dt > 0.0)) throw RangeError("predictor.dt must be > 0");
  for (const GridSpec* g : {&coarse, &fine}) {
    if (g->size < 8 || !(g->resolution > 0.0)) {
      throw RangeError("predictor grid size must be >= 8 and resolution > 0");
    }
  }
  if (!(heatmap_sigma_px > 0.0)) throw RangeError("predictor.heatmap_sigma_px must be > 0");
  if (!(occupancy_decay > 0.0 && occupancy_decay <= 1.0)) {
    throw RangeError("predictor.occupancy_decay must lie in (0, 1]");
  }
  if (!(noise_lateral >= 0.0) || !(noise_longitudinal >= 0.0)) {
    throw RangeError("predictor noise amplitudes must be >= 0");
  }
  if (kind == "external" && bundle_dir.empty()) {
    throw RangeError("predictor.bundle_dir is required for the external predictor");
  }
}

PredictorConfig predictor_config_from_json(const json& doc) {
  using jsonu::read;
  PredictorConfig c;
  const std::string p = "predictor";
  jsonu::reject_unknown(doc,
                        {"kind", "horizon", "dt", "coarse", "fine", "heatmap_sigma_px",
                         "occupancy_decay", "noise_lateral", "noise_longitudinal", "bundle_dir"},
                        p);
  read(doc, "kind", c.kind, p);
  read(doc, "horizon", c.horizon, p);
  read(doc, "dt", c.dt, p);
  for (auto [key, spec] : {std::pair{"coarse", &c.coarse}, std::pair{"fine", &c.fine}}) {
    if (auto it = doc.find(key); it != doc.end()) {
      const std::string q = p + "." + key;
      jsonu::reject_unknown(*it, {"size", "resolution"}, q);
      read(*it, "size", spec->size, q);
      read(*it, "resolution", spec->resolution, q);
    }
  }
  read(doc, "heatmap_sigma_px", c.heatmap_sigma_px, p);
  read(doc, "occupancy_decay", c.occupancy_decay, p);
  read(doc, "noise_lateral", c.noise_lateral, p);
  read(doc, "noise_longitudinal", c.noise_longitudinal, p);
  std::string dir;
  read(doc, "bundle_dir", dir, p);
  c.bundle_dir = dir;
  c.validate();
  return c;
}

json to_json(const PredictorConfig& c) {
  return {{"kind", c.kind},
          {"horizon", c.horizon},
          {"dt", c.dt},
          {"coarse", {{"size", c.coarse.size}, {"resolution", c.coarse.resolution}}},
          {"fine", {{"size", c.fine.size}, {"resolution", c.fine.resolution}}},
          {"heatmap_sigma_px", c.heatmap_sigma_px},
          {"occupancy_decay", c.occupancy_decay},
          {"noise_lateral", c.noise_lateral},
          {"noise_longitudinal", c.noise_longitudinal},
          {"bundle_dir", c.bundle_dir.string()}};
}

void PredictionBundle::validate() const {
  const std::size_t n = initial_plan.size();
  if (heatmap.planes() != n || occupancy.planes() != n) {
    throw PredictionError("bundle horizons differ: plan " + std::to_string(n) + ", heatmap " +
                          std::to_string(heatmap.planes()) + ", occupancy " +
                          std::to_string(occupancy.planes()));
  }
  auto in_unit = [](std::span<const float> v) {
    return std::all_of(v.begin(), v.end(), [](float f) { return f >= 0.0f && f <= 1.0f; });
  };
  if (!in_unit(heatmap.values())) throw PredictionError("heatmap values outside [0, 1]");
  if (!in_unit(occupancy.values())) throw PredictionError("occupancy values outside [0, 1]");
}

WorldSnapshot initial_snapshot(const Scenario& s) {
  WorldSnapshot snap;
  snap.time = 0.0;
  snap.ego = s.ego_start;
  for (const auto& a : s.agents) {
    snap.agents.push_back({a.id, a.kind, a.length, a.width, a.current().pose, a.current().speed});
  }
  return snap;
}

GridFrame coarse_frame(const Pose2& ego, const PredictorConfig& c) {
  return make_ego_frame(ego, c.coarse.resolution, c.coarse.size, c.coarse.size);
}

GridFrame fine_frame(const Pose2& ego, const PredictorConfig& c) {
  return make_ego_frame(ego, c.fine.resolution, c.fine.size, c.fine.size);
}

namespace {

TrajectoryState expert_at(const Trajectory& expert, double t) {
  if (t <= expert.duration()) return expert.at_time(t);
  const auto& last = expert.back();
  const double extra = t - expert.duration();
  return {Pose2(last.pose.position() + (last.speed * extra) * unit_from_heading(last.pose.heading()),
                last.pose.heading()),
          last.speed};
}

}  // namespace

Trajectory reference_plan(const Scenario& s, const WorldSnapshot& snap, const PredictorConfig& c) {
  std::vector<TrajectoryState> states;
  states.reserve(c.horizon);
  for (int i = 0; i < c.horizon; ++i) states.push_back(expert_at(s.expert_future, snap.time + i * c.dt));
  const Trajectory target(c.dt, std::move(states));
  return quintic_blend(snap.ego.pose, snap.ego.speed, target, target.size() - 1);
}

Trajectory add_plan_noise(const Trajectory& plan, double lateral, double longitudinal,
                          std::uint64_t seed) {
  Rng rng(seed);
  const double c1 = rng.uniform(-1.0, 1.0);
  const double c2 = rng.uniform(-1.0, 1.0) * (1.0 - std::abs(c1));
  const double c3 = rng.uniform(-1.0, 1.0);
  const double c4 = rng.uniform(-1.0, 1.0) * (1.0 - std::abs(c3));
  const std::size_t n = plan.size();
  const double span = plan.duration();
  auto profile = [&](double a, double b, double u) {
    return a * (3.0 * u * u - 2.0 * u * u * u) + b * std::sin(kPi * u);
  };
  auto slope = [&](double a, double b, double u) {
    return (a * (6.0 * u - 6.0 * u * u) + b * kPi * std::cos(kPi * u)) / span;
  };
  std::vector<TrajectoryState> states(plan.states().begin(), plan.states().end());
  for (std::size_t i = 1; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    const auto& s = plan[i];
    const double lat = lateral * profile(c1, c2, u);
    const double lon = longitudinal * profile(c3, c4, u);
    const Vec2 pos = s.pose.transform({lon, lat});
    const double speed = std::max(0.0, s.speed + longitudinal * slope(c3, c4, u));
    double heading = s.pose.heading();
    if (speed > 0.5) heading += std::atan2(lateral * slope(c1, c2, u), speed);
    states[i] = {Pose2(pos, heading), speed};
  }
  return Trajectory(plan.dt(), std::move(states));
}

ConstantVelocityPredictor::ConstantVelocityPredictor(PredictorConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

PredictionBundle ConstantVelocityPredictor::predict(const Scenario& s,
                                                    const WorldSnapshot& snap) const {
  const PredictorConfig& c = config_;
  Trajectory plan = reference_plan(s, snap, c);
  const GridFrame coarse = coarse_frame(snap.ego.pose, c);
  SpatialTemporalGrid occ(coarse, plan.size(), 0.0f);
  for (std::size_t t = 0; t < plan.size(); ++t) {
    const auto conf = static_cast<float>(std::pow(c.occupancy_decay, static_cast<double>(t)));
    const double dt = static_cast<double>(t) * c.dt;
    for (const auto& a : snap.agents) {
      const Vec2 pos = a.pose.position() + (a.speed * dt) * unit_from_heading(a.pose.heading());
      fill_polygon(coarse, oriented_box(Pose2(pos, a.pose.heading()), a.length, a.width), conf,
                   occ.plane(t));
    }
  }
  HeatmapTarget heat = render_heatmap_target(plan, fine_frame(snap.ego.pose, c), c.heatmap_sigma_px);
  PredictionBundle b{std::move(plan), std::move(heat.grid), std::move(occ)};
  b.validate();
  return b;
}

NoisedExpertPredictor::NoisedExpertPredictor(PredictorConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
  config_.validate();
}

PredictionBundle NoisedExpertPredictor::predict(const Scenario& s, const WorldSnapshot& snap) const {
  const PredictorConfig& c = config_;
  const Trajectory clean = reference_plan(s, snap, c);
  const auto tick = static_cast<std::uint64_t>(std::llround(snap.time * 1000.0));
  Trajectory plan = add_plan_noise(clean, c.noise_lateral, c.noise_longitudinal,
                                   splitmix64(seed_ ^ splitmix64(tick)));
  const GridFrame coarse = coarse_frame(snap.ego.pose, c);
  SpatialTemporalGrid occ(coarse, plan.size(), 0.0f);
  for (std::size_t t = 0; t < plan.size(); ++t) {
    for (const auto& a : s.agents) {
      if (auto st = a.state_at(snap.time + static_cast<double>(t) * c.dt)) {
        fill_polygon(coarse, oriented_box(st->pose, a.length, a.width), 1.0f, occ.plane(t));
      }
    }
  }
  HeatmapTarget heat = render_heatmap_target(clean, fine_frame(snap.ego.pose, c), c.heatmap_sigma_px);
  PredictionBundle b{std::move(plan), std::move(heat.grid), std::move(occ)};
  b.validate();
  return b;
}

ExternalPredictor::ExternalPredictor(PredictionBundle bundle) : bundle_(std::move(bundle)) {
  bundle_.validate();
}

PredictionBundle ExternalPredictor::predict(const Scenario&, const WorldSnapshot&) const {
  return bundle_;
}

PredictionBundle constant_velocity_predictor(const Scenario& s, const PredictorConfig& c) {
  return ConstantVelocityPredictor(c).predict(s, initial_snapshot(s));
}

PredictionBundle noised_expert_predictor(const Scenario& s, const PredictorConfig& c,
                                         std::uint64_t seed) {
  return NoisedExpertPredictor(c, seed).predict(s, initial_snapshot(s));
}

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& c, std::uint64_t seed) {
  c.validate();
  if (c.kind == "noised_expert") return std::make_unique<NoisedExpertPredictor>(c, seed);
  if (c.kind == "external") return std::make_unique<ExternalPredictor>(load_bundle(c.bundle_dir));
  return std::make_unique<ConstantVelocityPredictor>(c);
}

PredictionBundle load_bundle(const std::filesystem::path& dir) {
  const auto plan_path = dir / "initial_plan.json";
  std::ifstream f(plan_path);
  if (!f) throw IoError("cannot open " + plan_path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(plan_path.string() + ": " + e.what());
  }
  Trajectory plan = trajectory_from_json(doc, "initial_plan");
  PredictionBundle b{std::move(plan), read_grid_file(dir / "heatmap.grid"),
                     read_grid_file(dir / "occupancy.grid")};
  b.validate();
  return b;
}

void save_bundle(const std::filesystem::path& dir, const PredictionBundle& b) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / "initial_plan.json");
  if (!f) throw IoError("cannot write " + (dir / "initial_plan.json").string());
  f << trajectory_to_json(b.initial_plan).dump(1) << "\n";
  write_grid_file(dir / "heatmap.grid", b.heatmap);
  write_grid_file(dir / "occupancy.grid", b.occupancy);
}

}  // namespace heatplan
