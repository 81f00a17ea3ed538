#include "heatplan/grid.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "heatplan/errors.hpp"

namespace heatplan {

static_assert(std::endian::native == std::endian::little,
              "grid serialization assumes a little-endian host");

namespace {

template <typename V>
void put(std::string& out, V value) {
  char buf[sizeof(V)];
  std::memcpy(buf, &value, sizeof(V));
  out.append(buf, sizeof(V));
}

template <typename V>
V get(std::string_view bytes, std::size_t offset) {
  V value;
  std::memcpy(&value, bytes.data() + offset, sizeof(V));
  return value;
}

template <typename T>
std::string encode(const GridStack<T>& grid) {
  std::string out;
  out.reserve(kGridHeaderBytes + grid.values().size() * sizeof(float));
  out.append(kGridMagic, sizeof(kGridMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.planes()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.height()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.width()));
  put<std::uint32_t>(out, 0U);
  put<double>(out, grid.frame().origin().x);
  put<double>(out, grid.frame().origin().y);
  put<double>(out, grid.frame().resolution());
  put<double>(out, grid.frame().orientation());
  for (T v : grid.values()) {
    put<float>(out, static_cast<float>(v));
  }
  return out;
}

template <typename T>
void write_file(const std::filesystem::path& path, const GridStack<T>& grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  const std::string bytes = encode(grid);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string encode_grid(const GridStack<float>& grid) { return encode(grid); }
std::string encode_grid(const GridStack<double>& grid) { return encode(grid); }

GridStack<float> decode_grid(std::string_view bytes) {
  if (bytes.size() < kGridHeaderBytes || std::memcmp(bytes.data(), kGridMagic, 8) != 0) {
    throw GridFormatError("not a grid file (bad magic or truncated header)");
  }
  const auto planes = get<std::uint32_t>(bytes, 8);
  const auto height = get<std::uint32_t>(bytes, 12);
  const auto width = get<std::uint32_t>(bytes, 16);
  const Vec2 origin{get<double>(bytes, 24), get<double>(bytes, 32)};
  const double resolution = get<double>(bytes, 40);
  const double orientation = get<double>(bytes, 48);
  GridFrame frame = [&] {
    try {
      return GridFrame(origin, resolution, static_cast<int>(width), static_cast<int>(height),
                       orientation);
    } catch (const std::invalid_argument& e) {
      throw GridFormatError(std::string("invalid grid frame: ") + e.what());
    }
  }();
  const std::size_t count = static_cast<std::size_t>(planes) * frame.pixel_count();
  if (bytes.size() != kGridHeaderBytes + count * sizeof(float)) {
    throw GridFormatError("grid payload size does not match header dimensions");
  }
  GridStack<float> grid(frame, planes);
  std::memcpy(grid.values().data(), bytes.data() + kGridHeaderBytes, count * sizeof(float));
  return grid;
}

void write_grid_file(const std::filesystem::path& path, const GridStack<float>& grid) {
  write_file(path, grid);
}
void write_grid_file(const std::filesystem::path& path, const GridStack<double>& grid) {
  write_file(path, grid);
}

GridStack<float> read_grid_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open grid file: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_grid(bytes);
}

}  // namespace heatplan
