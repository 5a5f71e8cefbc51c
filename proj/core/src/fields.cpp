#include "blowup/fields.hpp"

#include <cmath>

namespace blowup {

namespace {

bool outside(const LayerSnapshot& s, const Cutoff1D& cut, Vec2 X) {
  const double R = cut.support();
  return std::fabs(s.lambda * X.x) >= R || std::fabs(s.lambda * X.y) >= R;
}

/// d/dt of the moving coordinates at fixed x.
Vec2 coord_rate(const LayerSnapshot& s, Vec2 X) {
  return {s.da / s.a * X.x - s.a * s.dc, s.db / s.b * X.y};
}

}  // namespace

ProfileValues layer_profile(const Cutoff1D& cut, double lam, double y) {
  const CutoffValue c = cut(lam * y);
  const double sn = std::sin(y), cs = std::cos(y);
  const double p0 = c.v, p1 = lam * c.d1, p2 = lam * lam * c.d2, p3 = lam * lam * lam * c.d3;
  ProfileValues f;
  f.s0 = p0 * sn;
  f.s1 = p1 * sn + p0 * cs;
  f.s2 = p2 * sn + 2.0 * p1 * cs - p0 * sn;
  f.s3 = p3 * sn + 3.0 * p2 * cs - 3.0 * p1 * sn - p0 * cs;
  f.r0 = p0 * cs;
  f.r1 = p1 * cs - p0 * sn;
  return f;
}

PointFields& PointFields::operator+=(const PointFields& o) {
  psi += o.psi;
  u.x += o.u.x;
  u.y += o.u.y;
  omega += o.omega;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gradu[i][j] += o.gradu[i][j];
  domega.x += o.domega.x;
  domega.y += o.domega.y;
  du_dt.x += o.du_dt.x;
  du_dt.y += o.du_dt.y;
  domega_dt += o.domega_dt;
  rho += o.rho;
  drho.x += o.drho.x;
  drho.y += o.drho.y;
  drho_dt += o.drho_dt;
  return *this;
}

Vec2 moving_coords(const LayerSnapshot& s, Vec2 x, double shift) {
  return {s.a * (x.x - (s.c - shift)), s.b * x.y};
}

PointFields eval_layer(const LayerSnapshot& s, const Cutoff1D& cut, Vec2 x, double shift) {
  PointFields f;
  if (!s.active) return f;
  const Vec2 X = moving_coords(s, x, shift);
  if (outside(s, cut, X)) return f;
  const ProfileValues P = layer_profile(cut, s.lambda, X.x);
  const ProfileValues Q = layer_profile(cut, s.lambda, X.y);
  const double a = s.a, b = s.b, B = s.B;
  const Vec2 Xd = coord_rate(s, X);

  f.psi = B * P.s0 * Q.s0;
  f.u.x = b * B * P.s0 * Q.s1;
  f.u.y = -a * B * P.s1 * Q.s0;
  f.omega = -B * (a * a * P.s2 * Q.s0 + b * b * P.s0 * Q.s2);

  f.gradu[0][0] = a * b * B * P.s1 * Q.s1;
  f.gradu[1][0] = b * b * B * P.s0 * Q.s2;
  f.gradu[0][1] = -a * a * B * P.s2 * Q.s0;
  f.gradu[1][1] = -a * b * B * P.s1 * Q.s1;

  f.domega.x = -B * (a * a * a * P.s3 * Q.s0 + a * b * b * P.s1 * Q.s2);
  f.domega.y = -B * (a * a * b * P.s2 * Q.s1 + b * b * b * P.s0 * Q.s3);

  const double K1 = b * B, dK1 = s.db * B + b * s.dB;
  f.du_dt.x = dK1 * P.s0 * Q.s1 + K1 * (P.s1 * Xd.x * Q.s1 + P.s0 * Q.s2 * Xd.y);
  const double K2 = -a * B, dK2 = -(s.da * B + a * s.dB);
  f.du_dt.y = dK2 * P.s1 * Q.s0 + K2 * (P.s2 * Xd.x * Q.s0 + P.s1 * Q.s1 * Xd.y);

  const double W1 = -B * a * a, dW1 = -(s.dB * a * a + 2.0 * B * a * s.da);
  const double W2 = -B * b * b, dW2 = -(s.dB * b * b + 2.0 * B * b * s.db);
  f.domega_dt = dW1 * P.s2 * Q.s0 + W1 * (P.s3 * Xd.x * Q.s0 + P.s2 * Q.s1 * Xd.y) +
                dW2 * P.s0 * Q.s2 + W2 * (P.s1 * Xd.x * Q.s2 + P.s0 * Q.s3 * Xd.y);

  const double D = s.D;
  f.rho = D * P.s0 * Q.r0;
  f.drho.x = a * D * P.s1 * Q.r0;
  f.drho.y = b * D * P.s0 * Q.r1;
  f.drho_dt = s.dD * P.s0 * Q.r0 + D * (P.s1 * Xd.x * Q.r0 + P.s0 * Q.r1 * Xd.y);
  return f;
}

double eval_layer_stream(const LayerSnapshot& s, Vec2 x, double shift) {
  return eval_layer(s, Cutoff1D::layer(), x, shift).psi;
}
Vec2 eval_layer_velocity(const LayerSnapshot& s, Vec2 x, double shift) {
  return eval_layer(s, Cutoff1D::layer(), x, shift).u;
}
double eval_layer_vorticity(const LayerSnapshot& s, Vec2 x, double shift) {
  return eval_layer(s, Cutoff1D::layer(), x, shift).omega;
}
double eval_layer_density(const LayerSnapshot& s, Vec2 x, double shift) {
  return eval_layer(s, Cutoff1D::layer(), x, shift).rho;
}
Mat2 eval_gradu(const LayerSnapshot& s, Vec2 x, double shift) {
  return eval_layer(s, Cutoff1D::layer(), x, shift).gradu;
}

VelocitySplit velocity_split(const LayerSnapshot& s, Vec2 X) {
  const Cutoff1D& cut = Cutoff1D::layer();
  const CutoffValue p = cut(s.lambda * X.x), q = cut(s.lambda * X.y);
  const double s1 = std::sin(X.x), c1 = std::cos(X.x), s2 = std::sin(X.y), c2 = std::cos(X.y);
  VelocitySplit v;
  v.V = {s.B * p.v * q.v * s.b * s1 * c2, -s.B * p.v * q.v * s.a * c1 * s2};
  v.W = {s.B * s.b * p.v * q.d1 * s1 * s2, -s.B * s.a * p.d1 * q.v * s1 * s2};
  return v;
}

Box layer_box(const LayerSnapshot& s, double shift) {
  const double R = Cutoff1D::layer().support();
  return {s.c - shift, R / (s.lambda * s.a), R / (s.lambda * s.b)};
}

FieldSlice::FieldSlice(std::vector<LayerSnapshot> layers, double t, double shift,
                       const Cutoff1D* cut)
    : layers_(std::move(layers)), t_(t), shift_(shift), cut_(cut) {}

PointFields FieldSlice::eval(Vec2 x) const {
  PointFields sum;
  for (const auto& s : layers_) sum += eval_layer(s, *cut_, x, shift_);
  return sum;
}

Vec2 FieldSlice::material_derivative(Vec2 x) const {
  const PointFields f = eval(x);
  Vec2 m = f.du_dt;
  m.x += f.u.x * f.gradu[0][0] + f.u.y * f.gradu[1][0];
  m.y += f.u.x * f.gradu[0][1] + f.u.y * f.gradu[1][1];
  return m;
}

Vec2 FieldSlice::material_derivative_telescoped(Vec2 x) const {
  Vec2 total;
  Vec2 U;       // velocity of the layers already added
  Mat2 GU{};    // its gradient
  for (const auto& s : layers_) {
    if (!s.active) continue;
    const Vec2 X = moving_coords(s, x, shift_);
    if (outside(s, *cut_, X)) continue;
    const PointFields f = eval_layer(s, *cut_, x, shift_);
    // time derivative at fixed moving coordinates, minus the frame drift
    const CutoffValue p = (*cut_)(s.lambda * X.x), q = (*cut_)(s.lambda * X.y);
    const double s1 = p.v * std::sin(X.x);
    const double s1p = s.lambda * p.d1 * std::sin(X.x) + p.v * std::cos(X.x);
    const double s2 = q.v * std::sin(X.y);
    const double s2p = s.lambda * q.d1 * std::sin(X.y) + q.v * std::cos(X.y);
    const Vec2 coef_rate{(s.db * s.B + s.b * s.dB) * s1 * s2p,
                         -(s.da * s.B + s.a * s.dB) * s1p * s2};
    const Vec2 drift{s.dc - s.da * X.x / (s.a * s.a), -s.db * X.y / (s.b * s.b)};
    Vec2 dudt;
    dudt.x = coef_rate.x - (drift.x * f.gradu[0][0] + drift.y * f.gradu[1][0]);
    dudt.y = coef_rate.y - (drift.x * f.gradu[0][1] + drift.y * f.gradu[1][1]);
    // U.grad u + u.grad U + u.grad u
    for (int j = 0; j < 2; ++j) {
      const double inc = (j == 0 ? dudt.x : dudt.y) +
                         U.x * f.gradu[0][j] + U.y * f.gradu[1][j] +
                         f.u.x * GU[0][j] + f.u.y * GU[1][j] +
                         f.u.x * f.gradu[0][j] + f.u.y * f.gradu[1][j];
      (j == 0 ? total.x : total.y) += inc;
    }
    U.x += f.u.x;
    U.y += f.u.y;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) GU[i][j] += f.gradu[i][j];
  }
  return total;
}

double FieldSlice::f_rho(Vec2 x) const {
  const PointFields f = eval(x);
  return f.drho_dt + f.u.x * f.drho.x + f.u.y * f.drho.y;
}

double FieldSlice::f_omega(Vec2 x) const {
  const PointFields f = eval(x);
  return f.domega_dt + f.u.x * f.domega.x + f.u.y * f.domega.y - f.drho.y;
}

FieldStack::FieldStack(const Dynamics& dyn, double shift, const Cutoff1D& cut)
    : dyn_(&dyn), shift_(shift), cut_(&cut) {}

FieldStack FieldStack::recentered(const Dynamics& dyn) {
  return FieldStack(dyn, dyn.final_centers().back());
}

FieldSlice FieldStack::slice(double t) const {
  return FieldSlice(dyn_->snapshot_all(t), t, shift_, cut_);
}

double FieldStack::stream(double t, Vec2 x) const { return slice(t).eval(x).psi; }
double FieldStack::density(double t, Vec2 x) const { return slice(t).eval(x).rho; }
Vec2 FieldStack::velocity(double t, Vec2 x) const { return slice(t).eval(x).u; }
double FieldStack::vorticity(double t, Vec2 x) const { return slice(t).eval(x).omega; }
Mat2 FieldStack::gradu(double t, Vec2 x) const { return slice(t).eval(x).gradu; }
Vec2 FieldStack::du_dt(double t, Vec2 x) const { return slice(t).eval(x).du_dt; }
Vec2 FieldStack::material_derivative(double t, Vec2 x) const {
  return slice(t).material_derivative(x);
}
Vec2 FieldStack::density_gradient(double t, Vec2 x) const { return slice(t).eval(x).drho; }

}  // namespace blowup
