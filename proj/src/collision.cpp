#include "heatplan/collision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatplan/raster.hpp"
#include "heatplan/simd/kernels.hpp"

namespace heatplan {

NonDrivableMap build_non_drivable(const SpatialTemporalGrid& agent_occ,
                                  std::span<const float> static_mask,
                                  std::span<const float> drivable_mask) {
  const std::size_t n = agent_occ.plane_size();
  if (static_mask.size() != n || drivable_mask.size() != n) {
    throw ShapeError("build_non_drivable: mask size " + std::to_string(static_mask.size()) + "/" +
                     std::to_string(drivable_mask.size()) + " does not match plane size " +
                     std::to_string(n));
  }
  const auto& k = simd::kernels();
  NonDrivableMap out{GridStack<double>(agent_occ.frame(), agent_occ.planes(), 0.0)};
  std::vector<double> agent(n), stat(static_mask.begin(), static_mask.end()),
      drive(drivable_mask.begin(), drivable_mask.end());
  for (std::size_t t = 0; t < agent_occ.planes(); ++t) {
    const auto src = agent_occ.plane(t);
    std::copy(src.begin(), src.end(), agent.begin());
    k.max_or_complement(agent.data(), stat.data(), drive.data(), out.grid.plane(t).data(), n);
  }
  return out;
}

NonDrivableMap build_non_drivable(const SpatialTemporalGrid& agent_occ,
                                  std::span<const Polygon> static_objects,
                                  std::span<const Polygon> drivable_area, const GridFrame& frame) {
  if (!(agent_occ.frame() == frame)) {
    throw ShapeError("build_non_drivable: occupancy frame differs from the target frame");
  }
  return build_non_drivable(agent_occ, polygon_mask(frame, static_objects),
                            polygon_mask(frame, drivable_area));
}

EgoKernel build_ego_kernel(double heading, double length, double width, double resolution) {
  if (!(length > 0.0) || !(width > 0.0) || !(resolution > 0.0)) {
    throw RangeError("build_ego_kernel: footprint and resolution must be positive");
  }
  EgoKernel k;
  k.heading = normalize_angle(heading);
  k.length = length;
  k.width = width;
  k.resolution = resolution;
  const double diag = std::hypot(length, width);
  int size = static_cast<int>(std::ceil(diag / resolution - 1e-12));
  if (size % 2 == 0) ++size;
  k.size = size;
  k.weights.assign(static_cast<std::size_t>(size) * size, 0.0);

  // Work in pixel units, footprint centered on the origin.
  const Polygon box = oriented_box(Pose2(0.0, 0.0, k.heading), length / resolution,
                                   width / resolution);
  const int r = size / 2;
  double total = 0.0;
  for (int dr = -r; dr <= r; ++dr) {
    for (int dc = -r; dc <= r; ++dc) {
      const Polygon cell = {{dc - 0.5, dr - 0.5}, {dc + 0.5, dr - 0.5}, {dc + 0.5, dr + 0.5},
                            {dc - 0.5, dr + 0.5}};
      const Polygon clipped = clip_convex(box, cell);
      const double area = clipped.size() >= 3 ? std::abs(signed_area(clipped)) : 0.0;
      k.weights[static_cast<std::size_t>(dr + r) * size + (dc + r)] = area;
      total += area;
    }
  }
  for (double& w : k.weights) w /= total;
  return k;
}

std::vector<EgoKernel> kernels_for_plan(const Trajectory& plan, const GridFrame& frame,
                                        const VehicleGeometry& vehicle) {
  std::vector<EgoKernel> out;
  out.reserve(plan.size());
  for (const auto& s : plan.states()) {
    out.push_back(build_ego_kernel(s.pose.heading() - frame.orientation(), vehicle.length,
                                   vehicle.width, frame.resolution()));
  }
  return out;
}

DensityWindow window_around(const Trajectory& plan, const GridFrame& frame, int radius) {
  DensityWindow w;
  w.radius = radius;
  for (const auto& s : plan.states()) {
    PixelIndex p = frame.round_pixel(s.pose.position());
    p.col = std::clamp(p.col, 0, frame.width() - 1);
    p.row = std::clamp(p.row, 0, frame.height() - 1);
    w.centers.push_back(p);
  }
  return w;
}

CollisionDensityMap collision_density(const NonDrivableMap& nd, std::span<const EgoKernel> kernels,
                                      const std::optional<DensityWindow>& window) {
  const std::size_t planes = nd.grid.planes();
  if (kernels.size() != planes) {
    throw ShapeError("collision_density: " + std::to_string(kernels.size()) + " kernels for " +
                     std::to_string(planes) + " planes");
  }
  if (window && window->centers.size() != planes) {
    throw ShapeError("collision_density: window count does not match plane count");
  }
  const int w = nd.grid.width();
  const int h = nd.grid.height();
  CollisionDensityMap out{GridStack<double>(nd.grid.frame(), planes, 1.0)};
  const auto& simd_k = simd::kernels();

  int pad = 0;
  for (const auto& k : kernels) pad = std::max(pad, k.radius());
  const int wp = w + 2 * pad;
  const int hp = h + 2 * pad;
  std::vector<double> padded(static_cast<std::size_t>(wp) * hp);
  std::vector<std::ptrdiff_t> offsets;
  std::vector<double> weights;

  for (std::size_t t = 0; t < planes; ++t) {
    const EgoKernel& k = kernels[t];
    offsets.clear();
    weights.clear();
    const int r = k.radius();
    for (int dr = -r; dr <= r; ++dr) {
      for (int dc = -r; dc <= r; ++dc) {
        const double wt = k.at(dc, dr);
        if (wt == 0.0) continue;
        offsets.push_back(static_cast<std::ptrdiff_t>(dr) * wp + dc);
        weights.push_back(wt);
      }
    }

    int c_lo = 0, c_hi = w - 1, r_lo = 0, r_hi = h - 1;
    if (window) {
      const PixelIndex c = window->centers[t];
      c_lo = std::max(0, c.col - window->radius);
      c_hi = std::min(w - 1, c.col + window->radius);
      r_lo = std::max(0, c.row - window->radius);
      r_hi = std::min(h - 1, c.row + window->radius);
    }
    if (c_lo > c_hi || r_lo > r_hi) continue;

    std::fill(padded.begin(), padded.end(), 1.0);
    const auto src = nd.grid.plane(t);
    for (int row = std::max(0, r_lo - pad); row <= std::min(h - 1, r_hi + pad); ++row) {
      const int col0 = std::max(0, c_lo - pad);
      const int col1 = std::min(w - 1, c_hi + pad);
      std::copy(src.begin() + static_cast<std::ptrdiff_t>(row) * w + col0,
                src.begin() + static_cast<std::ptrdiff_t>(row) * w + col1 + 1,
                padded.begin() + static_cast<std::ptrdiff_t>(row + pad) * wp + pad + col0);
    }
    auto dst = out.grid.plane(t);
    for (int row = r_lo; row <= r_hi; ++row) {
      const double* base = padded.data() + static_cast<std::ptrdiff_t>(row + pad) * wp + pad + c_lo;
      double* o = dst.data() + static_cast<std::ptrdiff_t>(row) * w + c_lo;
      simd_k.correlate_row(base, offsets.data(), weights.data(), offsets.size(), o,
                           static_cast<std::size_t>(c_hi - c_lo + 1));
      for (int c = 0; c <= c_hi - c_lo; ++c) o[c] = std::clamp(o[c], 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace heatplan
