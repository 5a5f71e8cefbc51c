#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blowup/grid.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("blowup_grid_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST(Grid, CenteredCoordinatesMirrorExactly) {
  const Grid2D g = Grid2D::centered(16, 3.0);
  EXPECT_EQ(g.x(8), 0.0);
  EXPECT_EQ(g.y(8), 0.0);
  EXPECT_DOUBLE_EQ(g.x(0), -3.0);
  EXPECT_EQ(g.mirror_j(0), -1);
  for (int j = 1; j < 16; ++j) {
    EXPECT_EQ(g.mirror_j(j), 16 - j);
    EXPECT_EQ(g.y(j), -g.y(g.mirror_j(j)));
  }
}

TEST(Grid, UncenteredMirror) {
  Grid2D g;
  g.nx = g.ny = 5;
  g.x0 = g.y0 = -1.0;
  g.h = 0.5;
  EXPECT_EQ(g.mirror_j(0), 4);
  EXPECT_EQ(g.mirror_j(2), 2);
}

TEST(Grid, DumpRoundTrip) {
  const fs::path dir = scratch("rt");
  const Grid2D g = Grid2D::centered(8, 2.0);
  const ScalarField2D f = sample(g, [](Vec2 x) { return x.x * 1e-3 + x.y * x.y; });
  write_grid_dump(f, 0.25, "rho", dir.string(), "field_rho_t0");
  EXPECT_EQ(fs::file_size(dir / "field_rho_t0.bin"), 64u * 8u);
  GridDumpHeader h;
  const ScalarField2D r = read_grid_dump(dir.string(), "field_rho_t0", &h);
  EXPECT_EQ(h.nx, 8);
  EXPECT_EQ(h.ny, 8);
  EXPECT_EQ(h.t, 0.25);
  EXPECT_EQ(h.field_name, "rho");
  EXPECT_DOUBLE_EQ(h.x_min, -2.0);
  EXPECT_DOUBLE_EQ(h.x_max, g.x_max());
  ASSERT_EQ(r.v.size(), f.v.size());
  EXPECT_EQ(std::memcmp(r.v.data(), f.v.data(), f.v.size() * sizeof(double)), 0);
}

TEST(Grid, SidecarKeysInOrder) {
  const fs::path dir = scratch("keys");
  write_grid_dump(ScalarField2D(Grid2D::centered(4, 1.0), 1.0), 0.0, "psi", dir.string(), "d");
  std::istringstream is(slurp(dir / "d.txt"));
  std::vector<std::string> keys;
  for (std::string k, v; is >> k >> v;) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"nx", "ny", "x_min", "x_max", "y_min", "y_max", "t", "field_name"}));
}

TEST(Grid, BinaryIsLittleEndianFloat64) {
  const fs::path dir = scratch("le");
  Grid2D g;
  g.nx = g.ny = 2;
  ScalarField2D f(g, 0.0);
  f.v[1] = 1.0;  // 0x3FF0000000000000
  write_grid_dump(f, 0.0, "x", dir.string(), "b");
  const std::string raw = slurp(dir / "b.bin");
  ASSERT_EQ(raw.size(), 32u);
  EXPECT_EQ(static_cast<unsigned char>(raw[15]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(raw[14]), 0xF0);
  EXPECT_EQ(raw[8], 0);
}

TEST(Grid, MalformedSidecarThrows) {
  const fs::path dir = scratch("bad");
  write_grid_dump(ScalarField2D(Grid2D::centered(4, 1.0), 1.0), 0.0, "psi", dir.string(), "d");
  std::ofstream(dir / "d.txt") << "nx four\nny 4\n";
  EXPECT_THROW(read_grid_dump(dir.string(), "d"), std::runtime_error);
  fs::remove(dir / "d.txt");
  EXPECT_THROW(read_grid_dump(dir.string(), "d"), std::runtime_error);
}

TEST(Grid, SizeMismatchThrows) {
  const fs::path dir = scratch("size");
  write_grid_dump(ScalarField2D(Grid2D::centered(4, 1.0), 1.0), 0.0, "psi", dir.string(), "d");
  fs::resize_file(dir / "d.bin", 100);
  EXPECT_THROW(read_grid_dump(dir.string(), "d"), std::runtime_error);
}
