#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "blowup/cutoff.hpp"
#include "blowup/fields.hpp"

using namespace blowup;

namespace {
constexpr double kHalfPi = std::numbers::pi / 2;

struct Desk {
  Dynamics dyn = integrate_layers(ConstructionParams::desk(), DynamicsOptions{});
  FieldStack stack = FieldStack::recentered(dyn);
  double mid(int n) const { return 0.5 * (dyn.schedule()[n - 1] + dyn.schedule()[n]); }
};
const Desk& desk() {
  static const Desk d;
  return d;
}

// x in original coordinates at moving coordinates X of layer s (shift 0)
Vec2 at_moving(const LayerSnapshot& s, double X1, double X2) { return {s.c + X1 / s.a, X2 / s.b}; }
double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }
}  // namespace

TEST(Cutoff, PlateauSupportAndEvenness) {
  const Cutoff1D& c = Cutoff1D::layer();
  EXPECT_DOUBLE_EQ(c.plateau(), 8 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(c.support(), 16 * std::numbers::pi);
  EXPECT_EQ(c.value(0.0), 1.0);
  EXPECT_EQ(c.value(8 * std::numbers::pi), 1.0);
  EXPECT_EQ(c.value(16 * std::numbers::pi), 0.0);
  EXPECT_EQ(c.value(100.0), 0.0);
  for (double y : {26.0, 30.0, 40.0, 47.0}) {
    EXPECT_DOUBLE_EQ(c.value(y), c.value(-y));
    EXPECT_DOUBLE_EQ(c(y).d1, -c(-y).d1);
  }
}

TEST(Cutoff, TableMatchesIndependentQuadrature) {
  const Cutoff1D c(1.0, 2.0);
  for (double z : {0.05, 0.2, 0.5, 0.77, 0.95}) EXPECT_NEAR(c.value(1.0 + z), 1.0 - Cutoff1D::transition_reference(z), 1e-10);
  const double e = 1e-5;
  for (double y : {1.3, 1.5, 1.8}) {
    EXPECT_NEAR(c(y).d1, (c.value(y + e) - c.value(y - e)) / (2 * e), 1e-7);
    EXPECT_NEAR(c(y).d2, (c(y + e).d1 - c(y - e).d1) / (2 * e), 1e-5);
    EXPECT_NEAR(c(y).d3, (c(y + e).d2 - c(y - e).d2) / (2 * e), 1e-3);
  }
}

TEST(Fields, PlateauValues) {
  const Desk& d = desk();
  for (int n = 1; n <= 3; ++n) {
    const LayerSnapshot s = d.dyn.snapshot(n, d.mid(n));
    ASSERT_TRUE(s.active);
    const Cutoff1D& cut = Cutoff1D::layer();
    const PointFields peak = eval_layer(s, cut, at_moving(s, kHalfPi, kHalfPi));
    EXPECT_LT(rel(peak.psi, s.B), 1e-12);
    EXPECT_LT(rel(peak.omega, s.B * (s.a * s.a + s.b * s.b)), 1e-12);
    const PointFields axis = eval_layer(s, cut, at_moving(s, kHalfPi, 0.0));
    EXPECT_LT(rel(axis.u.x, s.B * s.b), 1e-12);
    EXPECT_EQ(axis.u.y, 0.0);
    EXPECT_LT(rel(axis.rho, s.D), 1e-12);
    // off-diagonal gradient entries, trace zero
    const Vec2 xq = at_moving(s, 0.7, 1.1);
    const Vec2 X = moving_coords(s, xq);  // round trip through x loses digits for large a
    const PointFields q = eval_layer(s, cut, xq);
    const double ss = std::sin(X.x) * std::sin(X.y);
    EXPECT_NEAR(q.gradu[0][0] + q.gradu[1][1], 0.0, 1e-12 * std::fabs(q.gradu[0][0]));
    EXPECT_LT(rel(q.gradu[0][1], s.a * s.a * s.B * ss), 1e-12);
    EXPECT_LT(rel(q.gradu[1][0], -s.b * s.b * s.B * ss), 1e-12);
  }
}

TEST(Fields, OutsideSupportIsZero) {
  const Desk& d = desk();
  const LayerSnapshot s = d.dyn.snapshot(1, d.mid(1));
  const Box b = layer_box(s);
  const PointFields f = eval_layer(s, Cutoff1D::layer(), {b.cx + 1.01 * b.hx, 0.3 * b.hy});
  EXPECT_EQ(f.psi, 0.0);
  EXPECT_EQ(f.omega, 0.0);
  EXPECT_EQ(f.rho, 0.0);
}

TEST(Fields, Parities) {
  const Desk& d = desk();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 1; n <= 3; ++n) {
    const FieldSlice sl = d.stack.slice(d.mid(n));
    const Box b = layer_box(sl.layers()[n - 1], d.stack.shift());
    for (int k = 0; k < 50; ++k) {
      const Vec2 x{b.cx + b.hx * U(rng), b.hy * U(rng)}, m{x.x, -x.y};
      const PointFields f = sl.eval(x), g = sl.eval(m);
      EXPECT_EQ(f.psi, -g.psi);
      EXPECT_EQ(f.u.x, g.u.x);
      EXPECT_EQ(f.u.y, -g.u.y);
      EXPECT_EQ(f.omega, -g.omega);
      EXPECT_EQ(f.rho, g.rho);
      EXPECT_EQ(f.drho.x, g.drho.x);
      EXPECT_EQ(f.drho.y, -g.drho.y);
      EXPECT_EQ(sl.f_omega(x), -sl.f_omega(m));
      EXPECT_EQ(sl.material_derivative(x).y, -sl.material_derivative(m).y);
    }
  }
}

TEST(Fields, MaterialDerivativeOnAxisAndBeforeActivity) {
  const Desk& d = desk();
  const FieldSlice sl = d.stack.slice(d.mid(1));
  for (double x1 : {-1.0, 0.0, 0.4, 2.0}) EXPECT_EQ(sl.material_derivative({x1, 0.0}).y, 0.0);
  const FieldSlice before = d.stack.slice(0.0);
  const Vec2 U = before.material_derivative({0.3, 0.2});
  EXPECT_EQ(U.x, 0.0);
  EXPECT_EQ(U.y, 0.0);
}

TEST(Fields, TelescopedMatchesDirect) {
  const Desk& d = desk();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 1; n <= 3; ++n) {
    const FieldSlice sl = d.stack.slice(d.mid(n));
    const Box b = layer_box(sl.layers()[n - 1], d.stack.shift());
    for (int k = 0; k < 100; ++k) {
      const Vec2 x{b.cx + b.hx * U(rng), b.hy * U(rng)};
      const Vec2 a = sl.material_derivative(x), t = sl.material_derivative_telescoped(x);
      const double scale = std::hypot(a.x, a.y);
      if (scale == 0.0) continue;
      EXPECT_LE(std::hypot(a.x - t.x, a.y - t.y), 1e-8 * scale);
    }
  }
}

TEST(Fields, VelocitySplitRecombines) {
  const Desk& d = desk();
  const LayerSnapshot s = d.dyn.snapshot(1, d.mid(1));
  // transition zone of the cutoff in moving coordinates
  for (double X1 : {0.3, 30.0, 40.0})
    for (double X2 : {0.5, 28.0, 45.0}) {
      const VelocitySplit v = velocity_split(s, {X1, X2});
      const Vec2 u = eval_layer(s, Cutoff1D::layer(), at_moving(s, X1, X2)).u;
      EXPECT_NEAR(v.V.x + s.lambda * v.W.x, u.x, 1e-12 * (std::fabs(u.x) + s.B * s.b));
      EXPECT_NEAR(v.V.y + s.lambda * v.W.y, u.y, 1e-12 * (std::fabs(u.y) + s.B * s.a));
    }
}

// central differences of the closed forms refine at second order
TEST(Fields, FiniteDifferenceRefinement) {
  const Desk& d = desk();
  const double t = d.mid(1);
  const LayerSnapshot s = d.dyn.snapshot(1, t);
  const FieldStack& st = d.stack;
  const Vec2 q{s.c - st.shift() + 1.3 / s.a, 0.8 / s.b};
  auto err = [&](double h) {
    auto vel = [&](double a, double b) { return st.velocity(t, {a, b}); };
    auto psi = [&](double a, double b) { return st.stream(t, {a, b}); };
    auto rho = [&](double a, double b) { return st.density(t, {a, b}); };
    const Vec2 ux1 = vel(q.x + h, q.y), ux0 = vel(q.x - h, q.y);
    const Vec2 uy1 = vel(q.x, q.y + h), uy0 = vel(q.x, q.y - h);
    const double curl = (ux1.y - ux0.y) / (2 * h) - (uy1.x - uy0.x) / (2 * h);
    const double d2psi = (psi(q.x, q.y + h) - psi(q.x, q.y - h)) / (2 * h);
    const double drho2 = (rho(q.x, q.y + h) - rho(q.x, q.y - h)) / (2 * h);
    return std::array<double, 4>{std::fabs(curl - st.vorticity(t, q)),
                                 std::fabs(d2psi - st.velocity(t, q).x),
                                 std::fabs((ux1.x - ux0.x) / (2 * h) - st.gradu(t, q)[0][0]),
                                 std::fabs(drho2 - st.density_gradient(t, q).y)};
  };
  const double h0 = 0.02 / s.a;
  const auto e1 = err(h0), e2 = err(h0 / 2);
  for (int k = 0; k < 4; ++k) EXPECT_GT(e1[k] / e2[k], 3.8) << "quantity " << k;
}

TEST(Fields, DensityTimeDerivativeIsAnalytic) {
  const Desk& d = desk();
  const double t = d.mid(1), dt = 1e-6;
  const LayerSnapshot s = d.dyn.snapshot(1, t);
  const Vec2 x{s.c - d.stack.shift() + 0.9 / s.a, 0.4 / s.b};
  const double fd = (d.stack.density(t + dt, x) - d.stack.density(t - dt, x)) / (2 * dt);
  const FieldSlice sl = d.stack.slice(t);
  EXPECT_NEAR(sl.eval(x).drho_dt, fd, 1e-5 * std::fabs(fd));
}
