/// @file fields.hpp
/// Closed-form layer fields and their space/time derivatives.
///
/// Convention: u = (d psi/dx2, -d psi/dx1), i.e. u = -perp(psi) with
/// perp f = (-df/dx2, df/dx1); omega = du2/dx1 - du1/dx2 = -Laplacian(psi).
/// Velocity gradients are stored as G[i][j] = d u_j / d x_i.
#pragma once

#include <array>
#include <vector>

#include "blowup/cutoff.hpp"
#include "blowup/dynamics.hpp"
#include "blowup/grid.hpp"

namespace blowup {

using Mat2 = std::array<std::array<double, 2>, 2>;

/// All pointwise quantities of a layer (or of the layer sum).
struct PointFields {
  double psi = 0;
  Vec2 u;
  double omega = 0;
  Mat2 gradu{};
  Vec2 domega;     // grad omega
  Vec2 du_dt;      // partial_t u at fixed x
  double domega_dt = 0;
  double rho = 0;
  Vec2 drho;
  double drho_dt = 0;

  PointFields& operator+=(const PointFields& o);
};

/// s(y) = phi(lam y) sin y with s', s'', s''' and r(y) = phi(lam y) cos y with r'.
struct ProfileValues {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  double r0 = 0, r1 = 0;
};
ProfileValues layer_profile(const Cutoff1D& cut, double lam, double y);

/// Moving coordinates (a(x1 - c), b x2).
Vec2 moving_coords(const LayerSnapshot& s, Vec2 x, double shift = 0.0);

/// One layer at one point. shift is subtracted from the layer center.
PointFields eval_layer(const LayerSnapshot& s, const Cutoff1D& cut, Vec2 x, double shift = 0.0);

double eval_layer_stream(const LayerSnapshot& s, Vec2 x, double shift = 0.0);
Vec2 eval_layer_velocity(const LayerSnapshot& s, Vec2 x, double shift = 0.0);
double eval_layer_vorticity(const LayerSnapshot& s, Vec2 x, double shift = 0.0);
double eval_layer_density(const LayerSnapshot& s, Vec2 x, double shift = 0.0);
Mat2 eval_gradu(const LayerSnapshot& s, Vec2 x, double shift = 0.0);

/// Leading part V and correction W of the layer velocity in moving coordinates,
/// with u~ = V + lambda W.
struct VelocitySplit {
  Vec2 V, W;
};
VelocitySplit velocity_split(const LayerSnapshot& s, Vec2 X);

/// Support box of a layer at its snapshot: |x1 - c| <= hx, |x2| <= hy.
struct Box {
  double cx = 0, hx = 0, hy = 0;
};
Box layer_box(const LayerSnapshot& s, double shift = 0.0);

/// Layer sum at a fixed time.
class FieldSlice {
 public:
  FieldSlice(std::vector<LayerSnapshot> layers, double t, double shift, const Cutoff1D* cut);

  double t() const { return t_; }
  const std::vector<LayerSnapshot>& layers() const { return layers_; }

  PointFields eval(Vec2 x) const;
  /// partial_t u + u . grad u (direct form).
  Vec2 material_derivative(Vec2 x) const;
  /// Same quantity through the per-layer telescoped decomposition.
  Vec2 material_derivative_telescoped(Vec2 x) const;
  /// f_rho = partial_t rho + u . grad rho.
  double f_rho(Vec2 x) const;
  /// f_omega = partial_t omega + u . grad omega - d rho / dx2.
  double f_omega(Vec2 x) const;

 private:
  std::vector<LayerSnapshot> layers_;
  double t_, shift_;
  const Cutoff1D* cut_;
};

class FieldStack {
 public:
  /// shift is subtracted from every center (blow-up point recentering).
  FieldStack(const Dynamics& dyn, double shift = 0.0,
             const Cutoff1D& cut = Cutoff1D::layer());
  static FieldStack recentered(const Dynamics& dyn);

  const Dynamics& dynamics() const { return *dyn_; }
  double shift() const { return shift_; }
  const Cutoff1D& cutoff() const { return *cut_; }

  FieldSlice slice(double t) const;

  double stream(double t, Vec2 x) const;
  double density(double t, Vec2 x) const;
  Vec2 velocity(double t, Vec2 x) const;
  double vorticity(double t, Vec2 x) const;
  Mat2 gradu(double t, Vec2 x) const;
  Vec2 du_dt(double t, Vec2 x) const;
  Vec2 material_derivative(double t, Vec2 x) const;
  Vec2 density_gradient(double t, Vec2 x) const;

 private:
  const Dynamics* dyn_;
  double shift_;
  const Cutoff1D* cut_;
};

}  // namespace blowup
