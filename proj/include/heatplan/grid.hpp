#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatplan/errors.hpp"
#include "heatplan/geometry.hpp"

namespace heatplan {

/// Stack of equally-sized planes sharing one geo-reference, stored row-major
/// per plane.
template <typename T>
class GridStack {
 public:
  GridStack(GridFrame frame, std::size_t planes, T fill = T{})
      : frame_(frame), planes_(planes), data_(planes * frame.pixel_count(), fill) {}

  const GridFrame& frame() const { return frame_; }
  std::size_t planes() const { return planes_; }
  int width() const { return frame_.width(); }
  int height() const { return frame_.height(); }
  std::size_t plane_size() const { return frame_.pixel_count(); }

  std::span<T> plane(std::size_t t) {
    return std::span<T>(data_).subspan(t * plane_size(), plane_size());
  }
  std::span<const T> plane(std::size_t t) const {
    return std::span<const T>(data_).subspan(t * plane_size(), plane_size());
  }
  T& at(std::size_t t, int col, int row) {
    return data_[t * plane_size() + frame_.linear_index({col, row})];
  }
  T at(std::size_t t, int col, int row) const {
    return data_[t * plane_size() + frame_.linear_index({col, row})];
  }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  friend bool operator==(const GridStack&, const GridStack&) = default;

 private:
  GridFrame frame_;
  std::size_t planes_;
  std::vector<T> data_;
};

/// T x H x W field with values in [0, 1]: heatmaps and occupancy.
using SpatialTemporalGrid = GridStack<float>;

/// Bilinear sample of one plane at a world point; outside reads return
/// `outside`.
template <typename T>
double sample_bilinear(const GridStack<T>& grid, std::size_t plane, Vec2 world,
                       double outside = 0.0) {
  const Vec2 g = grid.frame().world_to_grid(world);
  if (!grid.frame().contains(g)) return outside;
  const int w = grid.width();
  const int h = grid.height();
  const double cx = std::clamp(g.x, 0.0, static_cast<double>(w - 1));
  const double cy = std::clamp(g.y, 0.0, static_cast<double>(h - 1));
  const int c0 = std::min(static_cast<int>(cx), std::max(w - 2, 0));
  const int r0 = std::min(static_cast<int>(cy), std::max(h - 2, 0));
  const int c1 = std::min(c0 + 1, w - 1);
  const int r1 = std::min(r0 + 1, h - 1);
  const double fx = cx - c0;
  const double fy = cy - r0;
  const double v00 = grid.at(plane, c0, r0);
  const double v10 = grid.at(plane, c1, r0);
  const double v01 = grid.at(plane, c0, r1);
  const double v11 = grid.at(plane, c1, r1);
  return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

// ---------------------------------------------------------------------------
// Binary grid files
//
//   offset  size  field
//   0       8     magic "HPGRID01"
//   8       4     uint32 planes (T)
//   12      4     uint32 height (H)
//   16      4     uint32 width (W)
//   20      4     uint32 reserved (0)
//   24      8     float64 origin x
//   32      8     float64 origin y
//   40      8     float64 resolution
//   48      8     float64 orientation
//   56      ...   float32 values, T planes of H rows of W, row-major
//
// All fields little-endian.
// ---------------------------------------------------------------------------

inline constexpr char kGridMagic[8] = {'H', 'P', 'G', 'R', 'I', 'D', '0', '1'};
inline constexpr std::size_t kGridHeaderBytes = 56;

class GridFormatError : public Error {
 public:
  using Error::Error;
};

std::string encode_grid(const GridStack<float>& grid);
std::string encode_grid(const GridStack<double>& grid);
GridStack<float> decode_grid(std::string_view bytes);

void write_grid_file(const std::filesystem::path& path, const GridStack<float>& grid);
void write_grid_file(const std::filesystem::path& path, const GridStack<double>& grid);
GridStack<float> read_grid_file(const std::filesystem::path& path);

}  // namespace heatplan
