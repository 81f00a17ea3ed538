#pragma once

#include <limits>
#include <vector>

#include "heatplan/solver.hpp"

namespace heatplan {

namespace detail {

/// Visits every bound of the tape scaled by `margin`. The callback receives
/// (name, index, excess, seed vector, sign): the excess is positive when
/// violated, and d excess / d quantity = sign.
template <typename F>
void visit_bounds(const KinematicsTape& tape, double ego_speed, const SolverConfig& c,
                  double margin, KinematicsTape::Seeds* seeds, F&& on_excess) {
  const HardBounds& b = c.bounds;
  const std::size_t n = tape.size();
  auto check = [&](const char* name, std::size_t t, double value, double lo, double hi,
                   std::vector<double>* seed) {
    if (value > hi) on_excess(name, t, value - hi, seed, 1.0);
    if (value < lo) on_excess(name, t, lo - value, seed, -1.0);
  };
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    check("accel", t, tape.accel()[t], margin * b.accel_min, margin * b.accel_max,
          seeds ? &seeds->accel : nullptr);
    check("jerk", t, tape.jerk()[t], -margin * b.jerk_max, margin * b.jerk_max,
          seeds ? &seeds->jerk : nullptr);
    check("curvature", t, tape.curvature()[t], -margin * b.curvature_max,
          margin * b.curvature_max, seeds ? &seeds->curvature : nullptr);
    check("lateral_accel", t, tape.lateral_accel()[t], -margin * b.lateral_accel_max,
          margin * b.lateral_accel_max, seeds ? &seeds->lateral_accel : nullptr);
    if (t == 0) {
      const double half = 0.5 * tape.dt();
      check("initial_speed", t, tape.speed()[0], ego_speed + margin * b.accel_min * half,
            ego_speed + margin * b.accel_max * half, seeds ? &seeds->speed : nullptr);
    } else {
      check("speed", t, tape.speed()[t], -inf, margin * b.speed_max,
            seeds ? &seeds->speed : nullptr);
    }
    check("longitudinal_speed", t, tape.longitudinal_speed()[t], 0.0, inf,
          seeds ? &seeds->longitudinal_speed : nullptr);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    check("lateral_slip", i, tape.segment_lateral_speed()[i], -margin * b.lateral_slip_max,
          margin * b.lateral_slip_max, seeds ? &seeds->segment_lateral_speed : nullptr);
  }
  for (std::size_t i = 0; i + 2 < n; ++i) {
    check("segment_accel", i, tape.segment_accel()[i], margin * b.accel_min,
          margin * b.accel_max, seeds ? &seeds->segment_accel : nullptr);
  }
}

}  // namespace detail

}  // namespace heatplan
