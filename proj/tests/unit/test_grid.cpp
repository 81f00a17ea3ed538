#include <gtest/gtest.h>

#include <filesystem>

#include "heatplan/grid.hpp"
#include "heatplan/rng.hpp"

namespace heatplan {
namespace {

GridStack<float> random_grid(std::uint64_t seed) {
  GridStack<float> g(GridFrame({1.5, -2.25}, 0.5, 7, 5, 0.4), 3);
  Rng rng(seed);
  for (auto& v : g.values()) v = static_cast<float>(rng.unit());
  return g;
}

TEST(GridFile, EncodeDecodeRoundTrip) {
  const auto g = random_grid(1);
  const std::string bytes = encode_grid(g);
  EXPECT_EQ(bytes.size(), kGridHeaderBytes + 3 * 7 * 5 * sizeof(float));
  EXPECT_EQ(bytes.substr(0, 8), std::string(kGridMagic, 8));
  EXPECT_EQ(decode_grid(bytes), g);
}

TEST(GridFile, DoubleGridsAreStoredAsFloat) {
  GridStack<double> g(GridFrame({0, 0}, 1.0, 2, 2), 1, 0.25);
  const auto back = decode_grid(encode_grid(g));
  EXPECT_EQ(back.at(0, 1, 1), 0.25f);
}

TEST(GridFile, RejectsMalformedBytes) {
  const std::string bytes = encode_grid(random_grid(2));
  EXPECT_THROW(decode_grid(bytes.substr(0, 20)), GridFormatError);
  EXPECT_THROW(decode_grid(bytes.substr(0, bytes.size() - 4)), GridFormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_grid(bad), GridFormatError);
}

TEST(GridFile, FileRoundTripAndMissingFile) {
  const auto path = std::filesystem::temp_directory_path() / "heatplan_unit_grid.grid";
  const auto g = random_grid(3);
  write_grid_file(path, g);
  EXPECT_EQ(read_grid_file(path), g);
  std::filesystem::remove(path);
  EXPECT_THROW(read_grid_file(path), IoError);
}

TEST(SampleBilinear, ExactAtCentersAndLinearBetween) {
  GridStack<double> g(GridFrame({0, 0}, 1.0, 3, 3), 1, 0.0);
  g.at(0, 1, 1) = 1.0;
  EXPECT_DOUBLE_EQ(sample_bilinear(g, 0, {1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(sample_bilinear(g, 0, {1.5, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(sample_bilinear(g, 0, {1.5, 1.5}), 0.25);
  EXPECT_DOUBLE_EQ(sample_bilinear(g, 0, {10.0, 1.0}, 7.0), 7.0);
}

}  // namespace
}  // namespace heatplan
