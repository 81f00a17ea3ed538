#include "heatplan/kinematics_tape.hpp"

#include <cassert>
#include <cmath>

#include "heatplan/geometry.hpp"

namespace heatplan {

namespace fd {

void diff(std::span<const double> in, double dt, std::span<double> out) {
  const std::size_t n = in.size();
  assert(n >= 2 && out.size() == n);
  out[0] = (in[1] - in[0]) / dt;
  out[n - 1] = (in[n - 1] - in[n - 2]) / dt;
  for (std::size_t t = 1; t + 1 < n; ++t) {
    out[t] = (in[t + 1] - in[t - 1]) / (2.0 * dt);
  }
}

void diff_angle(std::span<const double> in, double dt, std::span<double> out) {
  const std::size_t n = in.size();
  assert(n >= 2 && out.size() == n);
  out[0] = normalize_angle(in[1] - in[0]) / dt;
  out[n - 1] = normalize_angle(in[n - 1] - in[n - 2]) / dt;
  for (std::size_t t = 1; t + 1 < n; ++t) {
    out[t] = normalize_angle(in[t + 1] - in[t - 1]) / (2.0 * dt);
  }
}

void diff_transpose(std::span<const double> adj_out, double dt, std::span<double> adj_in) {
  const std::size_t n = adj_out.size();
  assert(n >= 2 && adj_in.size() == n);
  adj_in[0] -= adj_out[0] / dt;
  adj_in[1] += adj_out[0] / dt;
  adj_in[n - 1] += adj_out[n - 1] / dt;
  adj_in[n - 2] -= adj_out[n - 1] / dt;
  for (std::size_t t = 1; t + 1 < n; ++t) {
    const double g = adj_out[t] / (2.0 * dt);
    adj_in[t + 1] += g;
    adj_in[t - 1] -= g;
  }
}

}  // namespace fd

void KinematicsTape::Seeds::reset(std::size_t n) {
  for (auto* v : {&speed, &accel, &jerk, &curvature, &curvature_rate, &lateral_accel,
                  &longitudinal_speed}) {
    v->assign(n, 0.0);
  }
  segment_lateral_speed.assign(n > 0 ? n - 1 : 0, 0.0);
  segment_accel.assign(n > 1 ? n - 2 : 0, 0.0);
}

void KinematicsTape::forward(std::span<const double> x, std::span<const double> y,
                             std::span<const double> heading, double dt) {
  n_ = x.size();
  dt_ = dt;
  x_.assign(x.begin(), x.end());
  y_.assign(y.begin(), y.end());
  heading_.assign(heading.begin(), heading.end());
  for (auto* v : {&vx_, &vy_, &speed_, &accel_, &jerk_, &yaw_rate_, &curvature_,
                  &curvature_rate_, &lateral_accel_, &longitudinal_speed_}) {
    v->resize(n_);
  }
  segment_lateral_speed_.resize(n_ - 1);
  segment_mid_heading_.resize(n_ - 1);
  segment_speed_.resize(n_ - 1);
  segment_accel_.resize(n_ - 2);

  fd::diff(x_, dt, vx_);
  fd::diff(y_, dt, vy_);
  for (std::size_t t = 0; t < n_; ++t) {
    speed_[t] = std::hypot(vx_[t], vy_[t]);
    longitudinal_speed_[t] = std::cos(heading_[t]) * vx_[t] + std::sin(heading_[t]) * vy_[t];
  }
  fd::diff(speed_, dt, accel_);
  fd::diff(accel_, dt, jerk_);
  fd::diff_angle(heading_, dt, yaw_rate_);
  for (std::size_t t = 0; t < n_; ++t) {
    const double denom = std::max(speed_[t], kCurvatureSpeedFloor);
    curvature_[t] = yaw_rate_[t] / denom;
    lateral_accel_[t] = speed_[t] * speed_[t] * curvature_[t];
  }
  fd::diff(curvature_, dt, curvature_rate_);
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    const double mid = heading_[i] + 0.5 * normalize_angle(heading_[i + 1] - heading_[i]);
    segment_mid_heading_[i] = mid;
    const double dx = x_[i + 1] - x_[i];
    const double dy = y_[i + 1] - y_[i];
    segment_lateral_speed_[i] = (-std::sin(mid) * dx + std::cos(mid) * dy) / dt;
    segment_speed_[i] = std::hypot(dx, dy) / dt;
  }
  for (std::size_t i = 0; i + 2 < n_; ++i) {
    segment_accel_[i] = (segment_speed_[i + 1] - segment_speed_[i]) / dt;
  }
}

void KinematicsTape::backward(const Seeds& seeds, std::span<double> gx, std::span<double> gy,
                              std::span<double> gh) const {
  const std::size_t n = n_;
  std::vector<double> g_speed(seeds.speed.begin(), seeds.speed.end());
  std::vector<double> g_accel(seeds.accel.begin(), seeds.accel.end());
  std::vector<double> g_curv(seeds.curvature.begin(), seeds.curvature.end());
  std::vector<double> g_yaw(n, 0.0);
  std::vector<double> g_vx(n, 0.0);
  std::vector<double> g_vy(n, 0.0);

  fd::diff_transpose(seeds.curvature_rate, dt_, g_curv);

  for (std::size_t t = 0; t < n; ++t) {
    // lateral_accel = s^2 * kappa
    const double s = speed_[t];
    const double g_lat = seeds.lateral_accel[t];
    g_speed[t] += 2.0 * s * curvature_[t] * g_lat;
    g_curv[t] += s * s * g_lat;
    // kappa = omega / max(s, floor)
    if (s > kCurvatureSpeedFloor) {
      g_yaw[t] += g_curv[t] / s;
      g_speed[t] -= yaw_rate_[t] / (s * s) * g_curv[t];
    } else {
      g_yaw[t] += g_curv[t] / kCurvatureSpeedFloor;
    }
  }

  fd::diff_transpose(seeds.jerk, dt_, g_accel);
  fd::diff_transpose(g_accel, dt_, g_speed);

  for (std::size_t t = 0; t < n; ++t) {
    const double s = speed_[t];
    if (s > 0.0) {
      g_vx[t] += vx_[t] / s * g_speed[t];
      g_vy[t] += vy_[t] / s * g_speed[t];
    }
    const double c = std::cos(heading_[t]);
    const double sn = std::sin(heading_[t]);
    const double g_lon = seeds.longitudinal_speed[t];
    g_vx[t] += c * g_lon;
    g_vy[t] += sn * g_lon;
    gh[t] += (-sn * vx_[t] + c * vy_[t]) * g_lon;
  }

  fd::diff_transpose(g_vx, dt_, gx);
  fd::diff_transpose(g_vy, dt_, gy);
  fd::diff_transpose(g_yaw, dt_, gh);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g = seeds.segment_lateral_speed[i];
    if (g == 0.0) continue;
    const double mid = segment_mid_heading_[i];
    const double c = std::cos(mid);
    const double sn = std::sin(mid);
    const double dx = x_[i + 1] - x_[i];
    const double dy = y_[i + 1] - y_[i];
    gx[i + 1] += -sn / dt_ * g;
    gx[i] -= -sn / dt_ * g;
    gy[i + 1] += c / dt_ * g;
    gy[i] -= c / dt_ * g;
    const double d_mid = (-c * dx - sn * dy) / dt_ * g;
    gh[i] += 0.5 * d_mid;
    gh[i + 1] += 0.5 * d_mid;
  }

  std::vector<double> g_seg(n - 1, 0.0);
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double g = seeds.segment_accel[i] / dt_;
    g_seg[i + 1] += g;
    g_seg[i] -= g;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (g_seg[i] == 0.0) continue;
    const double dx = x_[i + 1] - x_[i];
    const double dy = y_[i + 1] - y_[i];
    const double len = std::hypot(dx, dy);
    if (len == 0.0) continue;
    const double gx_ = g_seg[i] * dx / (len * dt_);
    const double gy_ = g_seg[i] * dy / (len * dt_);
    gx[i + 1] += gx_;
    gx[i] -= gx_;
    gy[i + 1] += gy_;
    gy[i] -= gy_;
  }
}

}  // namespace heatplan
