#include "blowup/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

#include "blowup/parallel.hpp"

namespace blowup {

Grid2D Grid2D::centered(int N, double half_width) {
  if (N < 2 || N % 2 != 0) throw std::invalid_argument("Grid2D::centered: N must be even");
  Grid2D g;
  g.nx = g.ny = N;
  g.h = 2.0 * half_width / N;
  g.x0 = g.y0 = -(N / 2) * g.h;
  g.io = g.jo = N / 2;
  return g;
}

int Grid2D::mirror_j(int j) const {
  if (jo >= 0) {
    const int k = 2 * jo - j;
    return k >= 0 && k < ny ? k : -1;
  }
  const double m = (-y(j) - y0) / h;
  const long k = std::lround(m);
  if (std::fabs(m - k) > 1e-9 || k < 0 || k >= ny) return -1;
  return static_cast<int>(k);
}

bool Grid2D::same_as(const Grid2D& o) const {
  return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && h == o.h &&
         io == o.io && jo == o.jo;
}

ScalarField2D sample(const Grid2D& g, const std::function<double(Vec2)>& f) {
  ScalarField2D out(g);
  parallel_for(static_cast<std::size_t>(g.ny), [&](std::size_t j) {
    for (int i = 0; i < g.nx; ++i) out.at(i, static_cast<int>(j)) = f(g.point(i, static_cast<int>(j)));
  });
  return out;
}

namespace {

void put_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_le(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_grid_dump(const ScalarField2D& f, double t, const std::string& field_name,
                     const std::string& dir, const std::string& stem) {
  const std::filesystem::path base(dir);
  std::ofstream bin(base / (stem + ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
  for (double v : f.v) put_le(bin, v);
  std::ofstream txt(base / (stem + ".txt"));
  if (!txt) throw std::runtime_error("cannot write " + stem + ".txt");
  txt << std::setprecision(17) << "nx " << f.grid.nx << "\nny " << f.grid.ny << "\nx_min "
      << f.grid.x0 << "\nx_max " << f.grid.x_max() << "\ny_min " << f.grid.y0 << "\ny_max "
      << f.grid.y_max() << "\nt " << t << "\nfield_name " << field_name << "\n";
}

ScalarField2D read_grid_dump(const std::string& dir, const std::string& stem,
                             GridDumpHeader* header) {
  const std::filesystem::path base(dir);
  std::ifstream txt(base / (stem + ".txt"));
  if (!txt) throw std::runtime_error("missing sidecar " + stem + ".txt");
  std::map<std::string, std::string> kv;
  std::string k, v;
  while (txt >> k >> v) kv[k] = v;
  GridDumpHeader h;
  try {
    h.nx = std::stoi(kv.at("nx"));
    h.ny = std::stoi(kv.at("ny"));
    h.x_min = std::stod(kv.at("x_min"));
    h.x_max = std::stod(kv.at("x_max"));
    h.y_min = std::stod(kv.at("y_min"));
    h.y_max = std::stod(kv.at("y_max"));
    h.t = std::stod(kv.at("t"));
    h.field_name = kv.at("field_name");
  } catch (const std::exception&) {
    throw std::runtime_error("malformed sidecar " + stem + ".txt");
  }
  if (h.nx < 2 || h.ny < 2) throw std::runtime_error("bad dimensions in " + stem + ".txt");
  Grid2D g;
  g.nx = h.nx;
  g.ny = h.ny;
  g.x0 = h.x_min;
  g.y0 = h.y_min;
  g.h = (h.x_max - h.x_min) / (h.nx - 1);
  std::ifstream bin(base / (stem + ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("missing " + stem + ".bin");
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(bin)), {});
  if (raw.size() != g.size() * 8) throw std::runtime_error("size mismatch in " + stem + ".bin");
  ScalarField2D f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f.v[i] = get_le(raw.data() + 8 * i);
  if (header) *header = h;
  return f;
}

}  // namespace blowup
