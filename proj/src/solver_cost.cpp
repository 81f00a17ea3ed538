#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "heatplan/solver.hpp"
#include "json_util.hpp"
#include "solver_bounds.hpp"

namespace heatplan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw RangeError(std::string("solver.") + name + " must be finite and >= 0");
    }
  };
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw RangeError(std::string("solver.") + name + " must be finite and > 0");
    }
  };
  nonneg(lambda_imi, "lambda_imi");
  nonneg(lambda_o, "lambda_o");
  nonneg(lambda_h, "lambda_h");
  nonneg(phi.jerk, "phi.jerk");
  nonneg(phi.curvature, "phi.curvature");
  nonneg(phi.curvature_rate, "phi.curvature_rate");
  nonneg(phi.accel, "phi.accel");
  nonneg(phi.lateral_accel, "phi.lateral_accel");
  positive(sigma_o, "sigma_o");
  positive(sigma_h, "sigma_h");
  if (samples_o < 1) throw RangeError("solver.samples_o must be >= 1");
  if (samples_h < 1) throw RangeError("solver.samples_h must be >= 1");
  nonneg(heading_weight, "heading_weight");
  nonneg(occupied_threshold, "occupied_threshold");
  nonneg(imitation_smoothing, "imitation_smoothing");
  positive(sample_cutoff_sigmas, "sample_cutoff_sigmas");
  if (!(bounds.accel_min < bounds.accel_max)) {
    throw RangeError("solver.bounds.accel_min must be below accel_max");
  }
  positive(bounds.jerk_max, "bounds.jerk_max");
  positive(bounds.curvature_max, "bounds.curvature_max");
  positive(bounds.lateral_accel_max, "bounds.lateral_accel_max");
  positive(bounds.speed_max, "bounds.speed_max");
  positive(bounds.lateral_slip_max, "bounds.lateral_slip_max");
  positive(vehicle.length, "vehicle.length");
  positive(vehicle.width, "vehicle.width");
  positive(vehicle.wheelbase, "vehicle.wheelbase");
  if (max_iters < 0) throw RangeError("solver.max_iters must be >= 0");
  positive(tolerance, "tolerance");
  if (penalty_rounds < 1) throw RangeError("solver.penalty_rounds must be >= 1");
  positive(penalty_initial, "penalty_initial");
  if (!(penalty_growth >= 1.0)) throw RangeError("solver.penalty_growth must be >= 1");
  if (!(penalty_margin > 0.0 && penalty_margin <= 1.0)) {
    throw RangeError("solver.penalty_margin must lie in (0, 1]");
  }
}

SolverConfig solver_config_from_json(const json& doc) {
  using jsonu::read;
  SolverConfig c;
  const std::string p = "solver";
  jsonu::reject_unknown(doc,
                        {"lambda_imi", "lambda_o", "lambda_h", "phi", "sigma_o", "sigma_h",
                         "samples_o", "samples_h", "heading_weight", "imitation_smoothing", "occupied_threshold",
                         "sample_cutoff_sigmas", "bounds",
                         "vehicle", "max_iters", "tolerance", "penalty_rounds", "penalty_initial",
                         "penalty_growth", "penalty_margin"},
                        p);
  read(doc, "lambda_imi", c.lambda_imi, p);
  read(doc, "lambda_o", c.lambda_o, p);
  read(doc, "lambda_h", c.lambda_h, p);
  if (auto it = doc.find("phi"); it != doc.end()) {
    const std::string q = p + ".phi";
    jsonu::reject_unknown(*it, {"jerk", "curvature", "curvature_rate", "accel", "lateral_accel"},
                          q);
    read(*it, "jerk", c.phi.jerk, q);
    read(*it, "curvature", c.phi.curvature, q);
    read(*it, "curvature_rate", c.phi.curvature_rate, q);
    read(*it, "accel", c.phi.accel, q);
    read(*it, "lateral_accel", c.phi.lateral_accel, q);
  }
  read(doc, "sigma_o", c.sigma_o, p);
  read(doc, "sigma_h", c.sigma_h, p);
  read(doc, "samples_o", c.samples_o, p);
  read(doc, "samples_h", c.samples_h, p);
  read(doc, "heading_weight", c.heading_weight, p);
  read(doc, "imitation_smoothing", c.imitation_smoothing, p);
  read(doc, "occupied_threshold", c.occupied_threshold, p);
  read(doc, "sample_cutoff_sigmas", c.sample_cutoff_sigmas, p);
  if (auto it = doc.find("bounds"); it != doc.end()) {
    const std::string q = p + ".bounds";
    jsonu::reject_unknown(*it,
                          {"accel_min", "accel_max", "jerk_max", "curvature_max",
                           "lateral_accel_max", "speed_max", "lateral_slip_max"},
                          q);
    read(*it, "accel_min", c.bounds.accel_min, q);
    read(*it, "accel_max", c.bounds.accel_max, q);
    read(*it, "jerk_max", c.bounds.jerk_max, q);
    read(*it, "curvature_max", c.bounds.curvature_max, q);
    read(*it, "lateral_accel_max", c.bounds.lateral_accel_max, q);
    read(*it, "speed_max", c.bounds.speed_max, q);
    read(*it, "lateral_slip_max", c.bounds.lateral_slip_max, q);
  }
  if (auto it = doc.find("vehicle"); it != doc.end()) {
    const std::string q = p + ".vehicle";
    jsonu::reject_unknown(*it, {"length", "width", "wheelbase"}, q);
    read(*it, "length", c.vehicle.length, q);
    read(*it, "width", c.vehicle.width, q);
    read(*it, "wheelbase", c.vehicle.wheelbase, q);
  }
  read(doc, "max_iters", c.max_iters, p);
  read(doc, "tolerance", c.tolerance, p);
  read(doc, "penalty_rounds", c.penalty_rounds, p);
  read(doc, "penalty_initial", c.penalty_initial, p);
  read(doc, "penalty_growth", c.penalty_growth, p);
  read(doc, "penalty_margin", c.penalty_margin, p);
  c.validate();
  return c;
}

json to_json(const SolverConfig& c) {
  return {{"lambda_imi", c.lambda_imi},
          {"lambda_o", c.lambda_o},
          {"lambda_h", c.lambda_h},
          {"phi",
           {{"jerk", c.phi.jerk},
            {"curvature", c.phi.curvature},
            {"curvature_rate", c.phi.curvature_rate},
            {"accel", c.phi.accel},
            {"lateral_accel", c.phi.lateral_accel}}},
          {"sigma_o", c.sigma_o},
          {"sigma_h", c.sigma_h},
          {"samples_o", c.samples_o},
          {"samples_h", c.samples_h},
          {"heading_weight", c.heading_weight},
          {"imitation_smoothing", c.imitation_smoothing},
          {"occupied_threshold", c.occupied_threshold},
          {"sample_cutoff_sigmas", c.sample_cutoff_sigmas},
          {"bounds",
           {{"accel_min", c.bounds.accel_min},
            {"accel_max", c.bounds.accel_max},
            {"jerk_max", c.bounds.jerk_max},
            {"curvature_max", c.bounds.curvature_max},
            {"lateral_accel_max", c.bounds.lateral_accel_max},
            {"speed_max", c.bounds.speed_max},
            {"lateral_slip_max", c.bounds.lateral_slip_max}}},
          {"vehicle",
           {{"length", c.vehicle.length},
            {"width", c.vehicle.width},
            {"wheelbase", c.vehicle.wheelbase}}},
          {"max_iters", c.max_iters},
          {"tolerance", c.tolerance},
          {"penalty_rounds", c.penalty_rounds},
          {"penalty_initial", c.penalty_initial},
          {"penalty_growth", c.penalty_growth},
          {"penalty_margin", c.penalty_margin}};
}

// ---------------------------------------------------------------------------
// Hard bounds
// ---------------------------------------------------------------------------


BoundCheck check_hard_bounds(const Trajectory& trajectory, const SolverConfig& config) {
  if (trajectory.size() < 4) {
    throw ShapeError("check_hard_bounds: need at least 4 states");
  }
  const std::size_t n = trajectory.size();
  std::vector<double> x(n), y(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = trajectory[i].pose.x();
    y[i] = trajectory[i].pose.y();
    h[i] = trajectory[i].pose.heading();
  }
  KinematicsTape tape;
  tape.forward(x, y, h, trajectory.dt());
  BoundCheck out;
  constexpr double kSlack = 1e-9;
  detail::visit_bounds(tape, trajectory.front().speed, config, 1.0, nullptr,
                       [&](const char* name, std::size_t t, double excess, auto*, double) {
                         if (excess <= kSlack) return;
                         if (out.feasible) {
                           std::ostringstream msg;
                           msg << name << " bound exceeded by " << excess << " at step " << t;
                           out.first_violation = msg.str();
                         }
                         out.feasible = false;
                         out.worst_excess = std::max(out.worst_excess, excess);
                       });
  return out;
}

// ---------------------------------------------------------------------------
// Sampled terms
// ---------------------------------------------------------------------------

namespace {

constexpr int kOffsetRadius = 96;

struct Offset {
  int dc, dr;
  double dist;
};

const std::vector<Offset>& sorted_offsets() {
  static const std::vector<Offset> table = [] {
    std::vector<Offset> v;
    for (int dr = -kOffsetRadius; dr <= kOffsetRadius; ++dr) {
      for (int dc = -kOffsetRadius; dc <= kOffsetRadius; ++dc) {
        const int d2 = dc * dc + dr * dr;
        if (d2 <= kOffsetRadius * kOffsetRadius) v.push_back({dc, dr, std::sqrt(double(d2))});
      }
    }
    std::stable_sort(v.begin(), v.end(),
                     [](const Offset& a, const Offset& b) { return a.dist < b.dist; });
    return v;
  }();
  return table;
}

double gaussian_norm(double sigma) { return 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi)); }

}  // namespace

OccupiedSampler::OccupiedSampler(const GridFrame& frame, std::span<const double> plane,
                                 double threshold, double max_distance)
    : frame_(frame),
      plane_(plane),
      threshold_(threshold),
      radius_px_(max_distance / frame.resolution()) {
  if (plane.size() != frame.pixel_count()) {
    throw ShapeError("OccupiedSampler: plane size does not match frame");
  }
  const int w = frame.width();
  const int h = frame.height();
  table_.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  for (int r = 0; r < h; ++r) {
    std::uint32_t row = 0;
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (plane[i] > threshold) {
        occupied_.push_back(i);
        ++row;
      }
      table_[static_cast<std::size_t>(r + 1) * (w + 1) + c + 1] =
          table_[static_cast<std::size_t>(r) * (w + 1) + c + 1] + row;
    }
  }
}

std::uint32_t OccupiedSampler::count_in(int c0, int r0, int c1, int r1) const {
  const int w = frame_.width();
  c0 = std::max(c0, 0);
  r0 = std::max(r0, 0);
  c1 = std::min(c1, w - 1);
  r1 = std::min(r1, frame_.height() - 1);
  if (c0 > c1 || r0 > r1) return 0;
  auto at = [&](int c, int r) { return table_[static_cast<std::size_t>(r) * (w + 1) + c]; };
  return at(c1 + 1, r1 + 1) - at(c0, r1 + 1) - at(c1 + 1, r0) + at(c0, r0);
}

void OccupiedSampler::nearest(Vec2 world, int count, std::vector<std::size_t>& out) const {
  out.clear();
  if (occupied_.empty() || count <= 0) return;
  const Vec2 g = frame_.world_to_grid(world);
  const int w = frame_.width();
  const double r2max = radius_px_ * radius_px_;
  if (std::isfinite(radius_px_)) {
    const int span = static_cast<int>(std::ceil(radius_px_));
    const int c = static_cast<int>(std::floor(g.x));
    const int r = static_cast<int>(std::floor(g.y));
    if (count_in(c - span, r - span, c + span + 1, r + span + 1) == 0) return;
  }
  struct Cand {
    double d2;
    std::size_t idx;
  };
  thread_local std::vector<Cand> cands;
  cands.clear();
  auto finish = [&] {
    const std::size_t k = std::min<std::size_t>(count, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(),
                      [](const Cand& a, const Cand& b) {
                        return a.d2 < b.d2 || (a.d2 == b.d2 && a.idx < b.idx);
                      });
    for (std::size_t i = 0; i < k; ++i) out.push_back(cands[i].idx);
  };
  auto dist2 = [&](std::size_t idx) {
    const double dc = static_cast<double>(idx % w) - g.x;
    const double dr = static_cast<double>(idx / w) - g.y;
    return dc * dc + dr * dr;
  };
  auto brute_force = [&] {
    cands.clear();
    for (std::size_t idx : occupied_) {
      const double d2 = dist2(idx);
      if (d2 <= r2max) cands.push_back({d2, idx});
    }
    finish();
  };

  const bool near_grid = g.x > -kOffsetRadius / 2 && g.y > -kOffsetRadius / 2 &&
                         g.x < w + kOffsetRadius / 2 && g.y < frame_.height() + kOffsetRadius / 2;
  if (!near_grid || occupied_.size() <= static_cast<std::size_t>(count)) {
    brute_force();
    return;
  }
  const int c0 = static_cast<int>(std::floor(g.x + 0.5));
  const int r0 = static_cast<int>(std::floor(g.y + 0.5));
  const double delta = std::hypot(c0 - g.x, r0 - g.y);
  // Every pixel within radius_px_ of the query lies within radius_px_ + delta
  // of (c0, r0); the table covers that disk when it is small enough.
  const bool table_covers = radius_px_ + delta < kOffsetRadius;
  double bound = table_covers ? radius_px_ + delta : std::numeric_limits<double>::infinity();
  for (const Offset& o : sorted_offsets()) {
    if (o.dist > bound) break;
    const int c = c0 + o.dc;
    const int r = r0 + o.dr;
    if (c < 0 || r < 0 || c >= w || r >= frame_.height()) continue;
    const std::size_t idx = frame_.linear_index({c, r});
    if (!(plane_[idx] > threshold_)) continue;
    const double d2 = dist2(idx);
    if (d2 > r2max) continue;
    cands.push_back({d2, idx});
    if (cands.size() == static_cast<std::size_t>(count)) {
      double worst = 0.0;
      for (const Cand& cand : cands) worst = std::max(worst, cand.d2);
      bound = std::min(bound, std::sqrt(worst) + delta);
    }
  }
  if (cands.size() < static_cast<std::size_t>(count) && !table_covers) {
    brute_force();
    return;
  }
  finish();
}

TermValue collision_term(const Pose2& pose, const OccupiedSampler& sampler,
                         const SolverConfig& config) {
  thread_local std::vector<std::size_t> idx;
  sampler.nearest(pose.position(), config.samples_o, idx);
  TermValue out;
  out.empty = idx.empty();
  const double norm = gaussian_norm(config.sigma_o);
  const double inv2s2 = 1.0 / (2.0 * config.sigma_o * config.sigma_o);
  const int w = sampler.frame().width();
  for (std::size_t i : idx) {
    const Vec2 p = sampler.frame().pixel_center(static_cast<int>(i % w), static_cast<int>(i / w));
    const Vec2 d = pose.position() - p;
    const double g = sampler.plane()[i] * norm * std::exp(-d.squared_norm() * inv2s2);
    out.value += g;
    out.gradient = out.gradient - (2.0 * inv2s2 * g) * d;
  }
  return out;
}

TermValue collision_term(const Pose2& pose, const GridFrame& frame,
                         std::span<const double> density_plane, const SolverConfig& config) {
  const OccupiedSampler sampler(frame, density_plane, config.occupied_threshold,
                                config.sample_cutoff_sigmas * config.sigma_o);
  return collision_term(pose, sampler, config);
}

HeatSamples top_heat_samples(const GridFrame& frame, std::span<const float> plane, int count) {
  if (plane.size() != frame.pixel_count()) {
    throw ShapeError("top_heat_samples: plane size does not match frame");
  }
  std::vector<std::pair<float, std::size_t>> v;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (plane[i] > 0.0f) v.emplace_back(plane[i], i);
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 0)), v.size());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  HeatSamples out;
  const int w = frame.width();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t idx = v[i].second;
    out.positions.push_back(frame.pixel_center(static_cast<int>(idx % w), static_cast<int>(idx / w)));
    out.values.push_back(v[i].first);
  }
  return out;
}

TermValue heatmap_term(const Pose2& pose, const HeatSamples& samples, const SolverConfig& config) {
  TermValue out;
  out.empty = samples.values.empty();
  const double norm = gaussian_norm(config.sigma_h);
  const double inv2s2 = 1.0 / (2.0 * config.sigma_h * config.sigma_h);
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    const Vec2 d = pose.position() - samples.positions[i];
    const double g = samples.values[i] * norm * std::exp(-d.squared_norm() * inv2s2);
    out.value += g;
    out.gradient = out.gradient - (2.0 * inv2s2 * g) * d;
  }
  return out;
}

TermValue heatmap_term(const Pose2& pose, const GridFrame& frame, std::span<const float> heat_plane,
                       const SolverConfig& config) {
  return heatmap_term(pose, top_heat_samples(frame, heat_plane, config.samples_h), config);
}

// ---------------------------------------------------------------------------
// Total cost
// ---------------------------------------------------------------------------

json to_json(const CostBreakdown& b) {
  return {{"imitation", b.imitation},
          {"jerk", b.jerk},
          {"curvature", b.curvature},
          {"curvature_rate", b.curvature_rate},
          {"accel", b.accel},
          {"lateral_accel", b.lateral_accel},
          {"collision", b.collision},
          {"heatmap", b.heatmap},
          {"total", b.total},
          {"empty_collision_samples", b.empty_collision_samples}};
}

CostModel::CostModel(const Trajectory& reference, const CollisionDensityMap& density,
                     const SpatialTemporalGrid& heat, const SolverConfig& config)
    : reference_(reference), density_(&density), config_(config) {
  config_.validate();
  const std::size_t n = reference.size();
  if (n < 4) throw ShapeError("CostModel: horizon must be at least 4");
  if (density.grid.planes() != n) {
    throw ShapeError("CostModel: density has " + std::to_string(density.grid.planes()) +
                     " planes, plan has " + std::to_string(n) + " states");
  }
  if (heat.planes() != n) {
    throw ShapeError("CostModel: heatmap has " + std::to_string(heat.planes()) +
                     " planes, plan has " + std::to_string(n) + " states");
  }
  samplers_.reserve(n);
  heat_.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    samplers_.emplace_back(density.grid.frame(), density.grid.plane(t), config_.occupied_threshold,
                           config_.sample_cutoff_sigmas * config_.sigma_o);
    heat_.push_back(top_heat_samples(heat.frame(), heat.plane(t), config_.samples_h));
  }
}

CostBreakdown CostModel::evaluate(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> heading, CostGradient* grad) const {
  const std::size_t n = reference_.size();
  if (x.size() != n || y.size() != n || heading.size() != n) {
    throw ShapeError("CostModel::evaluate: horizon mismatch");
  }
  const SolverConfig& c = config_;
  CostBreakdown b;
  if (grad) {
    grad->x.assign(n, 0.0);
    grad->y.assign(n, 0.0);
    grad->heading.assign(n, 0.0);
  }

  const double w2 = c.heading_weight * c.heading_weight;
  const double eps = c.imitation_smoothing;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& r = reference_[t].pose;
    const double dx = x[t] - r.x();
    const double dy = y[t] - r.y();
    const double dh = normalize_angle(heading[t] - r.heading());
    const double norm = std::sqrt(dx * dx + dy * dy + w2 * dh * dh + eps * eps);
    b.imitation += c.lambda_imi * (norm - eps);
    if (grad && norm > 0.0) {
      grad->x[t] += c.lambda_imi * dx / norm;
      grad->y[t] += c.lambda_imi * dy / norm;
      grad->heading[t] += c.lambda_imi * w2 * dh / norm;
    }
  }

  KinematicsTape tape;
  tape.forward(x, y, heading, reference_.dt());
  KinematicsTape::Seeds seeds;
  seeds.reset(n);
  auto squares = [&](std::span<const double> q, double weight, std::vector<double>& seed) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += q[t] * q[t];
      seed[t] = 2.0 * weight * q[t];
    }
    return weight * acc;
  };
  b.jerk = squares(tape.jerk(), c.phi.jerk, seeds.jerk);
  b.curvature = squares(tape.curvature(), c.phi.curvature, seeds.curvature);
  b.curvature_rate = squares(tape.curvature_rate(), c.phi.curvature_rate, seeds.curvature_rate);
  b.accel = squares(tape.accel(), c.phi.accel, seeds.accel);
  b.lateral_accel = squares(tape.lateral_accel(), c.phi.lateral_accel, seeds.lateral_accel);
  if (grad) tape.backward(seeds, grad->x, grad->y, grad->heading);

  for (std::size_t t = 0; t < n; ++t) {
    const Pose2 pose(x[t], y[t], heading[t]);
    if (c.lambda_o > 0.0) {
      const TermValue o = collision_term(pose, samplers_[t], c);
      b.collision += c.lambda_o * o.value;
      if (o.empty) ++b.empty_collision_samples;
      if (grad) {
        grad->x[t] += c.lambda_o * o.gradient.x;
        grad->y[t] += c.lambda_o * o.gradient.y;
      }
    } else if (samplers_[t].occupied_count() == 0) {
      ++b.empty_collision_samples;
    }
    if (c.lambda_h > 0.0) {
      const TermValue h = heatmap_term(pose, heat_[t], c);
      b.heatmap -= c.lambda_h * h.value;
      if (grad) {
        grad->x[t] -= c.lambda_h * h.gradient.x;
        grad->y[t] -= c.lambda_h * h.gradient.y;
      }
    }
  }
  b.total = b.imitation + b.kinematic() + b.collision + b.heatmap;
  return b;
}

CostBreakdown CostModel::evaluate(const Trajectory& tau, CostGradient* grad) const {
  const std::size_t n = tau.size();
  if (n != reference_.size()) throw ShapeError("CostModel::evaluate: horizon mismatch");
  std::vector<double> x(n), y(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = tau[i].pose.x();
    y[i] = tau[i].pose.y();
    h[i] = tau[i].pose.heading();
  }
  return evaluate(x, y, h, grad);
}

CostEvaluation total_cost(const Trajectory& tau, const Trajectory& reference,
                          const CollisionDensityMap& density, const SpatialTemporalGrid& heat,
                          const SolverConfig& config) {
  if (tau.size() != reference.size()) {
    throw ShapeError("total_cost: trajectory and reference horizons differ");
  }
  const CostModel model(reference, density, heat, config);
  CostEvaluation out;
  out.breakdown = model.evaluate(tau, &out.gradient);
  return out;
}

double max_density_along(const Trajectory& trajectory, const CollisionDensityMap& density,
                         double step) {
  const auto& grid = density.grid;
  double best = 0.0;
  const std::size_t n = trajectory.size();
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t plane = std::min(t, grid.planes() - 1);
    const Vec2 a = trajectory[t].pose.position();
    if (t + 1 == n) {
      best = std::max(best, sample_bilinear(grid, plane, a, 1.0));
      break;
    }
    const Vec2 bpt = trajectory[t + 1].pose.position();
    const int k = std::max(1, static_cast<int>(std::ceil((bpt - a).norm() / step)));
    for (int i = 0; i < k; ++i) {
      const double f = static_cast<double>(i) / k;
      best = std::max(best, sample_bilinear(grid, plane, a + f * (bpt - a), 1.0));
    }
  }
  return best;
}

}  // namespace heatplan
