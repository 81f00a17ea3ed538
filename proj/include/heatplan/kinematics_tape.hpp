#pragma once

#include <span>
#include <vector>

namespace heatplan {

/// Forward finite-difference kinematics over raw state arrays, with a reverse
/// pass that propagates adjoints of every derived quantity back to x, y and
/// heading. Shared by `trajectory_kinematics`, the solver cost and the
/// hard-bound penalty so that all three see identical stencils.
///
/// Stencils: central differences at interior samples, one-sided at both ends.
/// Heading differences are wrapped. Segment lateral velocity uses the chord
/// between consecutive samples against their mid-heading; segment
/// acceleration is the change of chord speed between consecutive segments.
class KinematicsTape {
 public:
  struct Seeds {
    std::vector<double> speed;
    std::vector<double> accel;
    std::vector<double> jerk;
    std::vector<double> curvature;
    std::vector<double> curvature_rate;
    std::vector<double> lateral_accel;
    std::vector<double> longitudinal_speed;
    std::vector<double> segment_lateral_speed;  // size T - 1
    std::vector<double> segment_accel;          // size T - 2

    void reset(std::size_t n);
  };

  void forward(std::span<const double> x, std::span<const double> y,
               std::span<const double> heading, double dt);

  /// Accumulates (+=) gradients into gx, gy, gh.
  void backward(const Seeds& seeds, std::span<double> gx, std::span<double> gy,
                std::span<double> gh) const;

  std::size_t size() const { return n_; }
  double dt() const { return dt_; }

  std::span<const double> vx() const { return vx_; }
  std::span<const double> vy() const { return vy_; }
  std::span<const double> speed() const { return speed_; }
  std::span<const double> accel() const { return accel_; }
  std::span<const double> jerk() const { return jerk_; }
  std::span<const double> yaw_rate() const { return yaw_rate_; }
  std::span<const double> curvature() const { return curvature_; }
  std::span<const double> curvature_rate() const { return curvature_rate_; }
  std::span<const double> lateral_accel() const { return lateral_accel_; }
  std::span<const double> longitudinal_speed() const { return longitudinal_speed_; }
  std::span<const double> segment_lateral_speed() const { return segment_lateral_speed_; }
  std::span<const double> segment_speed() const { return segment_speed_; }
  std::span<const double> segment_accel() const { return segment_accel_; }

 private:
  std::size_t n_ = 0;
  double dt_ = 1.0;
  std::vector<double> x_, y_, heading_;
  std::vector<double> vx_, vy_, speed_, accel_, jerk_;
  std::vector<double> yaw_rate_, curvature_, curvature_rate_, lateral_accel_;
  std::vector<double> longitudinal_speed_, segment_lateral_speed_;
  std::vector<double> segment_mid_heading_;
  std::vector<double> segment_speed_, segment_accel_;
};

namespace fd {

/// out = D in, with the stencils described above. `in.size() >= 2`.
void diff(std::span<const double> in, double dt, std::span<double> out);
void diff_angle(std::span<const double> in, double dt, std::span<double> out);
/// adj_in += D^T adj_out (the same for wrapped angles).
void diff_transpose(std::span<const double> adj_out, double dt, std::span<double> adj_in);

}  // namespace fd

}  // namespace heatplan
