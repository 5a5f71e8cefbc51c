/// @file grid.hpp
/// Uniform square-cell grids, sampled fields and the raw grid dump format.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace blowup {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

/// Nodes x_i = x0 + i h, y_j = y0 + j h; storage row-major with x fastest.
struct Grid2D {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, h = 1.0;
  // Origin node of centered grids (-1 otherwise); coordinates are then (i - io) h,
  // which makes mirrored nodes exact negatives.
  int io = -1, jo = -1;

  /// N x N grid on [-L, L)^2 with the origin at index N/2 (N even).
  static Grid2D centered(int N, double half_width);

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double x(int i) const { return io >= 0 ? (i - io) * h : x0 + i * h; }
  double y(int j) const { return jo >= 0 ? (j - jo) * h : y0 + j * h; }
  Vec2 point(int i, int j) const { return {x(i), y(j)}; }
  double x_max() const { return x(nx - 1); }
  double y_max() const { return y(ny - 1); }
  /// Index of the node mirrored in x2, or -1 if it is off the grid.
  int mirror_j(int j) const;
  bool same_as(const Grid2D& o) const;
};

struct ScalarField2D {
  Grid2D grid;
  std::vector<double> v;

  ScalarField2D() = default;
  explicit ScalarField2D(const Grid2D& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
  double& at(int i, int j) { return v[grid.index(i, j)]; }
  double at(int i, int j) const { return v[grid.index(i, j)]; }
};

struct VectorField2D {
  Grid2D grid;
  std::vector<double> v1, v2;

  VectorField2D() = default;
  explicit VectorField2D(const Grid2D& g) : grid(g), v1(g.size(), 0.0), v2(g.size(), 0.0) {}
};

/// Samples f at every node (data-parallel).
ScalarField2D sample(const Grid2D& g, const std::function<double(Vec2)>& f);

/// Writes name.bin (raw little-endian float64) and name.txt (sidecar).
void write_grid_dump(const ScalarField2D& f, double t, const std::string& field_name,
                     const std::string& dir, const std::string& stem);

struct GridDumpHeader {
  int nx = 0, ny = 0;
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0, t = 0;
  std::string field_name;
};

/// Reads a dump; throws std::runtime_error on malformed sidecar or size mismatch.
ScalarField2D read_grid_dump(const std::string& dir, const std::string& stem,
                             GridDumpHeader* header = nullptr);

}  // namespace blowup
