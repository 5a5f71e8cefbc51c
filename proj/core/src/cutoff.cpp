#include "blowup/cutoff.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace blowup {

BumpValue standard_bump(double s) {
  BumpValue b;
  if (!(s > 0.0 && s < 1.0)) return b;
  const double q = s * (1.0 - s), dq = 1.0 - 2.0 * s;
  // (ln bump)' and higher, with q'' = -2
  const double L1 = dq / (q * q);
  const double N = -2.0 * q - 2.0 * dq * dq;
  const double L2 = N / (q * q * q);
  const double dN = 6.0 * dq;
  const double L3 = (dN * q - 3.0 * dq * N) / (q * q * q * q);
  b.v = std::exp(-1.0 / q);
  b.d1 = b.v * L1;
  b.d2 = b.v * (L1 * L1 + L2);
  b.d3 = b.v * (L1 * L1 * L1 + 3.0 * L1 * L2 + L3);
  return b;
}

namespace {

// 8-point Gauss-Legendre on [a, b]
double gauss8(const std::function<double(double)>& f, double a, double b) {
  static const std::array<double, 4> x = {0.1834346424956498, 0.5255324099163290,
                                          0.7966664774136267, 0.9602898564975363};
  static const std::array<double, 4> w = {0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};
  const double m = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * (f(m + r * x[i]) + f(m - r * x[i]));
  return s * r;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double eps) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 50);
}

double bump_value(double s) { return standard_bump(s).v; }

}  // namespace

Cutoff1D::Cutoff1D(double plateau, double support, int table_cells)
    : plateau_(plateau), support_(support), width_(support - plateau) {
  if (!(plateau > 0.0 && support > plateau)) throw std::invalid_argument("Cutoff1D: bad radii");
  if (table_cells < 16) throw std::invalid_argument("Cutoff1D: table too small");
  F_.assign(table_cells + 1, 0.0);
  dz_ = 1.0 / table_cells;
  double acc = 0.0;
  for (int i = 0; i < table_cells; ++i) {
    acc += gauss8(bump_value, i * dz_, (i + 1) * dz_);
    F_[i + 1] = acc;
  }
  norm_ = acc;
  for (double& v : F_) v /= norm_;
  F_.back() = 1.0;
}

const Cutoff1D& Cutoff1D::layer() {
  static const Cutoff1D c(8.0 * std::numbers::pi, 16.0 * std::numbers::pi);
  return c;
}

double Cutoff1D::transition(double z) const {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const int n = static_cast<int>(F_.size()) - 1;
  int i = static_cast<int>(z / dz_);
  if (i >= n) i = n - 1;
  const double u = (z - i * dz_) / dz_;
  const double f0 = F_[i], f1 = F_[i + 1];
  const double m0 = bump_value(i * dz_) / norm_ * dz_;
  const double m1 = bump_value((i + 1) * dz_) / norm_ * dz_;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * f1 +
         (u3 - u2) * m1;
}

double Cutoff1D::transition_reference(double z) {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double total = simpson(bump_value, 0.0, 1.0, 1e-17);
  return simpson(bump_value, 0.0, z, 1e-17) / total;
}

double Cutoff1D::value(double y) const {
  const double a = std::fabs(y);
  if (a <= plateau_) return 1.0;
  if (a >= support_) return 0.0;
  return transition((support_ - a) / width_);
}

CutoffValue Cutoff1D::operator()(double y) const {
  CutoffValue c;
  const double a = std::fabs(y);
  if (a <= plateau_) {
    c.v = 1.0;
    return c;
  }
  if (a >= support_) return c;
  const double z = (support_ - a) / width_;
  const double sg = y < 0.0 ? -1.0 : 1.0;
  const BumpValue b = standard_bump(z);
  const double w = width_;
  c.v = transition(z);
  // dz/dy = -sg / w
  c.d1 = -sg * b.v / norm_ / w;
  c.d2 = b.d1 / norm_ / (w * w);
  c.d3 = -sg * b.d2 / norm_ / (w * w * w);
  return c;
}

}  // namespace blowup
