/// @file fixedpoint.hpp
/// The screening potential Phi, the map T : a -> perp-grad Psi and its Banach iteration.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/cutoff.hpp"
#include "blowup/elliptic.hpp"
#include "blowup/fields.hpp"
#include "blowup/grid.hpp"

namespace blowup {

struct NonContractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Phi(x) = int_{-inf}^{x2} Laplacian psi(x1, s) ds with
/// psi = A phi(mu x1) phi(mu x2) cos x1 sin x2, evaluated at s * x.
class PhiPotential {
 public:
  double epsilon = 0.5;
  double A = 0.0;
  double mu_phi = 0.0;
  double scale = 1.0;          // Phi_s(x) = Phi(scale * x)
  double certified_lip = 0.0;  // sup |perp-grad Delta^{-1} d2 Phi| through the Poisson solver
  double closed_form_lip = 0.0;  // sup |perp-grad psi| from the closed form
  int lip_grid = 0;

  double value(Vec2 x) const;
  Vec2 grad(Vec2 x) const;
  /// (-d2 Phi, d1 Phi).
  Vec2 perp_grad(Vec2 x) const;
  /// psi_s(x) = psi(s x) / s, so that Laplacian psi_s = d2 Phi_s.
  double aux_psi(Vec2 x) const;
  /// chi_s(x) = chi(s x) / s with chi = int_{-inf}^{x2} d1 psi(x1, s) ds, so that
  /// Laplacian chi_s = d1 Phi_s. Both are compactly supported.
  double aux_chi(Vec2 x) const;
  Vec2 perp_grad_aux_psi(Vec2 x) const;
  Vec2 perp_grad_aux_chi(Vec2 x) const;
  /// Half-width of the square support at the current scale.
  double support_half_width() const;

  /// Natural-scale pieces; exposed for tests.
  double G(double y) const;
  double G2(double y) const;

  static constexpr double kPlateau = 1.0;
  static constexpr double kSupport = 2.0;

 private:
  friend PhiPotential build_phi(double, double, int, int);
  struct Tables;
  std::shared_ptr<const Tables> tab_;
  double value_natural(double x1, double x2) const;
  Vec2 grad_natural(double x1, double x2) const;
};

/// Builds Phi for epsilon in (0,1), rescaled so its support half-width is
/// support_half_width, and measures the Lipschitz bound on a lip_grid^2 grid.
/// Throws QuadratureError if the measured bound exceeds (1 + epsilon) / 2.
PhiPotential build_phi(double epsilon, double support_half_width, int lip_grid = 1024,
                       int table_cells = 1 << 16);

/// Largest extent max(|c1| + hx, hy) of the layer-1 box over [0, t_end].
double layer_one_extent(const FieldStack& stack, int samples = 2000);

/// Default Phi support half-width: 8 x layer_one_extent, so Phi varies slowly on layer 1.
double default_phi_support(const FieldStack& stack);

/// a(t_k, x): one vector field per time slice.
using TimeField = std::vector<VectorField2D>;

struct FixedPointConfig {
  int N = 256;
  double half_width = 0.0;  // 0: 1.45 x the largest layer-1 box extent
  int samples_per_epoch = 8;
  double epsilon = 0.5;
  int phi_lip_grid = 1024;
  std::vector<int> epochs;  // empty: all epochs
  std::vector<double> times;  // non-empty: exactly these slices, epochs ignored
};

/// Static per-slice data on the lattice.
struct TimeSlice {
  double t = 0.0;
  int epoch = 0;
  bool resolved = false;
  Vec2 U0;           // material derivative at the origin
  double rho0 = 0;   // rho_B(t, 0)
  ScalarField2D rho, d1rho, d2rho, f_omega, U1, U2;
};

class FixedPointProblem {
 public:
  FixedPointProblem(const FieldStack& stack, const PhiPotential& phi, const FixedPointConfig& cfg);

  const Grid2D& grid() const { return grid_; }
  const FieldStack& stack() const { return *stack_; }
  const PhiPotential& phi() const { return phi_; }
  const std::vector<TimeSlice>& slices() const { return slices_; }
  std::size_t size() const { return slices_.size(); }
  const ScalarField2D& phi_field() const { return Phi_; }
  const VectorField2D& phi_grad() const { return dPhi_; }
  /// Index of the origin node.
  int i0() const { return grid_.nx / 2; }
  int j0() const { return grid_.ny / 2; }
  double rho_B_sup() const;

  /// g = U(t,0) - a(t,0) - (rho_bar + rho_B(t,0)) e1.
  Vec2 g_of_t(std::size_t k, Vec2 a_at_origin, double rho_bar) const;
  /// Right-hand side of the Psi equation.
  ScalarField2D assemble_rhs(std::size_t k, const VectorField2D& a, Vec2 g, double rho_bar) const;
  /// The same without -g . perp-grad Phi, whose inverse Laplacian is g1 psi_s - g2 chi_s.
  ScalarField2D assemble_local_rhs(std::size_t k, const VectorField2D& a, Vec2 g,
                                   double rho_bar) const;
  /// The bracket multiplying d rho / dx2 at the origin.
  double bracket_at_origin(std::size_t k, Vec2 a_at_origin, Vec2 g, double rho_bar) const;
  /// raw_defect receives the parity defect of T(a) before projection.
  VectorField2D apply_T_slice(std::size_t k, const VectorField2D& a, double rho_bar,
                              double* raw_defect = nullptr) const;
  TimeField apply_T(const TimeField& a, double rho_bar, double* raw_defect = nullptr) const;
  /// Projection of each T(a) onto the admissible parity class (on by default). Off, the
  /// a2(0) direction feeds g2 and grows roundoff by about 2x per step.
  void set_projection(bool on) { project_ = on; }
  bool projection() const { return project_; }

  TimeField zero() const;
  /// Smooth compact bumps, a1 even and a2 odd in x2.
  TimeField random_admissible(std::mt19937_64& rng, double amplitude = 1.0) const;

  /// rhs(a) - perp-div(a) with central differences, sup over nodes >= 2 cells from the edge.
  double varpsi_residual(std::size_t k, const VectorField2D& a, Vec2 g, double rho_bar) const;

 private:
  const FieldStack* stack_;
  PhiPotential phi_;
  Grid2D grid_;
  std::shared_ptr<const NewtonianSolver> solver_;
  ScalarField2D Phi_;
  VectorField2D dPhi_;
  VectorField2D perp_psi_, perp_chi_;
  std::vector<TimeSlice> slices_;
  bool project_ = true;
};

/// Lattice sup of the pointwise Euclidean norm of a - b.
double lattice_distance(const TimeField& a, const TimeField& b);
double lattice_sup(const TimeField& a);
Vec2 at_origin(const VectorField2D& a);

/// Replaces a1 by its even part and a2 by its odd part in x2 on mirrored row pairs.
void project_admissible(VectorField2D& f);

/// Largest symmetry defect max(|a1(x1,x2) - a1(x1,-x2)|, |a2(x1,x2) + a2(x1,-x2)|).
double symmetry_defect(const TimeField& a);

struct FixedPointState {
  TimeField a;
  std::vector<Vec2> g;  // g(t_k) at the final iterate
  std::vector<double> distances;
  std::vector<double> ratios;
  std::vector<double> residuals;        // max varpsi residual of each iterate
  std::vector<double> slice_residuals;  // varpsi residual per slice at the final iterate
  std::vector<double> symmetry_defects;  // parity defect of T(a) before projection
  double apriori_bound = 0.0;     // 0.9^k / 0.1 * |a_1 - a_0|
  double fixed_point_defect = 0.0;  // |T(a*) - a*|
  double residual = 0.0;  // max slice residual over resolved slices
  double max_bracket = 0.0;
  double max_g2 = 0.0;
  int iterations = 0;
  bool converged = false;

  void write_history_csv(std::ostream& os) const;
  void write_g_csv(std::ostream& os, const FixedPointProblem& prob) const;
};

FixedPointState iterate_to_fixed_point(const FixedPointProblem& prob, double rho_bar, double tol,
                                       int max_iter, const TimeField* start = nullptr);

struct ContractionRow {
  double rho_bar = 0.0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  int pairs = 0;
};
struct ContractionTable {
  std::vector<ContractionRow> rows;
  std::optional<double> selected;  // smallest rho_bar with max ratio <= 0.9
  void write_csv(std::ostream& os) const;
};

/// Doubling ladder starting at 2 sup|rho_B|.
std::vector<double> default_rho_ladder(const FixedPointProblem& prob, int rungs = 12);
ContractionTable contraction_search(const FixedPointProblem& prob, const std::vector<double>& ladder,
                                    int pairs = 20, std::uint64_t seed = 1);

struct ScreenedRow {
  double t = 0.0;
  int epoch = 0;
  double unscreened_defect = 0.0;  // d psi/dx2 (t,0) + rho_bar + rho_B(t,0) - U1(t,0)
  double dpsi_dx2_origin = 0.0;
  double grad_perp_psi_gradient_sup = 0.0;
  int picard_iterations = 0;
  double residual_phi = 0.0, residual_psi = 0.0;
  bool diverged = false;
};
struct ScreenedReport {
  double rho_bar = 0.0;
  std::vector<ScreenedRow> rows;
  void write_csv(std::ostream& os) const;
};
/// Canonical decomposition of f_u = g Phi + a* at the last slice of each epoch.
ScreenedReport screened_diagnostics(const FixedPointProblem& prob, const FixedPointState& st,
                                    double rho_bar, double tol = 1e-10);

}  // namespace blowup
