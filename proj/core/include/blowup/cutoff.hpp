/// @file cutoff.hpp
/// Smooth even cutoff: 1 on [-plateau, plateau], 0 outside [-support, support].
#pragma once

#include <vector>

namespace blowup {

/// Standard bump exp(-1/(s(1-s))) on (0,1) and its first three derivatives.
struct BumpValue {
  double v = 0, d1 = 0, d2 = 0, d3 = 0;
};
BumpValue standard_bump(double s);

struct CutoffValue {
  double v = 0, d1 = 0, d2 = 0, d3 = 0;
};

/// Mollified step built from the normalized integral of the standard bump.
/// The integral is tabulated (cubic Hermite, exact slopes); derivatives are
/// evaluated from the bump directly.
class Cutoff1D {
 public:
  Cutoff1D(double plateau, double support, int table_cells = 8192);

  /// The layer cutoff: plateau 8 pi, support 16 pi.
  static const Cutoff1D& layer();

  CutoffValue operator()(double y) const;
  double value(double y) const;

  double plateau() const { return plateau_; }
  double support() const { return support_; }

  /// Transition profile F(z) = int_0^z bump / int_0^1 bump from an independent
  /// adaptive quadrature (slow; for tests).
  static double transition_reference(double z);

 private:
  double transition(double z) const;

  double plateau_, support_, width_;
  double norm_;  // int_0^1 bump
  std::vector<double> F_;
  double dz_;
};

}  // namespace blowup
