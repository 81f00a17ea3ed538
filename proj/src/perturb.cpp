#include "heatplan/perturb.hpp"

#include <cmath>

#include "heatplan/rng.hpp"
#include "json_util.hpp"

namespace heatplan {

using nlohmann::json;

void PerturbRanges::validate() const {
  auto check = [](const Interval& i, const char* name) {
    if (!std::isfinite(i.lo) || !std::isfinite(i.hi) || i.lo > i.hi) {
      throw RangeError(std::string("perturb.") + name + " must be a finite [lo, hi] with lo <= hi");
    }
  };
  check(x, "x");
  check(y, "y");
  check(heading, "heading");
}

PerturbRanges perturb_ranges_from_json(const json& doc) {
  PerturbRanges r;
  jsonu::reject_unknown(doc, {"x", "y", "heading"}, "perturb");
  auto read = [&](const char* key, Interval& target) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ParseError(std::string("config field 'perturb.") + key + "': expected [lo, hi]");
    }
    target = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  };
  read("x", r.x);
  read("y", r.y);
  read("heading", r.heading);
  r.validate();
  return r;
}

json to_json(const PerturbRanges& r) {
  return {{"x", {r.x.lo, r.x.hi}}, {"y", {r.y.lo, r.y.hi}}, {"heading", {r.heading.lo, r.heading.hi}}};
}

Pose2 perturb_pose(const Pose2& pose, const PerturbRanges& ranges, std::uint64_t seed) {
  ranges.validate();
  Rng rng(seed);
  const double dx = rng.uniform(ranges.x.lo, ranges.x.hi);
  const double dy = rng.uniform(ranges.y.lo, ranges.y.hi);
  const double dh = rng.uniform(ranges.heading.lo, ranges.heading.hi);
  return Pose2(pose.transform({dx, dy}), pose.heading() + dh);
}

Trajectory quintic_blend(const Pose2& start, double start_speed, const Trajectory& target,
                         std::size_t blend_index) {
  const std::size_t n = target.size();
  if (blend_index < 1 || blend_index >= n) {
    throw RangeError("quintic_blend: blend_index must lie in [1, T-1]");
  }
  const auto& t0 = target[0];
  const Vec2 d0 = start.position() - t0.pose.position();
  const Vec2 v_target0 = t0.speed * unit_from_heading(t0.pose.heading());
  const Vec2 v0 = start_speed * unit_from_heading(start.heading()) - v_target0;
  const double tau = static_cast<double>(blend_index) * target.dt();

  std::vector<TrajectoryState> states(target.states().begin(), target.states().end());
  states[0] = {start, start_speed};
  for (std::size_t i = 1; i < blend_index; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(blend_index);
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    const double h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    const double h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    const double dh0 = (-30.0 * u2 + 60.0 * u3 - 30.0 * u4) / tau;
    const double dh1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    const Vec2 offset = h0 * d0 + (h1 * tau) * v0;
    const Vec2 rate = dh0 * d0 + dh1 * v0;

    const auto& tg = target[i];
    const Vec2 v_target = tg.speed * unit_from_heading(tg.pose.heading());
    const Vec2 v = v_target + rate;
    double heading = tg.pose.heading();
    double speed = tg.speed;
    if (!(rate == Vec2{})) {
      speed = tg.speed + (v.norm() - v_target.norm());
      if (v.norm() > 0.1 && v_target.norm() > 0.1) {
        heading += normalize_angle(std::atan2(v.y, v.x) - std::atan2(v_target.y, v_target.x));
      } else {
        // Near standstill the velocity direction is undefined; interpolate.
        heading += h0 * normalize_angle(start.heading() - t0.pose.heading());
      }
    }
    states[i] = {Pose2(tg.pose.position() + offset, heading), std::max(speed, 0.0)};
  }
  return Trajectory(target.dt(), std::move(states));
}

RecoveryFit fit_recovery_trajectory(const Pose2& start, double start_speed,
                                    const Trajectory& target, const SolverConfig& config) {
  const std::size_t n = target.size();
  if (n < 4) throw RangeError("fit_recovery_trajectory: target needs at least 4 states");
  std::string last_reason;
  for (std::size_t k = std::max<std::size_t>(1, (n - 1) / 2); k < n; ++k) {
    Trajectory fit = quintic_blend(start, start_speed, target, k);
    const BoundCheck check = check_hard_bounds(fit, config);
    if (check.feasible) return {std::move(fit), k};
    last_reason = check.first_violation;
  }
  throw FitError("no feasible recovery trajectory: " + last_reason);
}

Scenario augment_sample(const Scenario& scenario, const PerturbRanges& ranges, std::uint64_t seed,
                        const SolverConfig& config) {
  const Pose2 start = perturb_pose(scenario.ego_start.pose, ranges, seed);
  Scenario out = scenario;
  if (start == scenario.ego_start.pose) return out;
  RecoveryFit fit =
      fit_recovery_trajectory(start, scenario.ego_start.speed, scenario.expert_future, config);
  out.ego_start.pose = start;
  out.expert_future = std::move(fit.trajectory);
  validate_scenario(out);
  return out;
}

}  // namespace heatplan
