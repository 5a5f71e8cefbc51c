/// @file elliptic.hpp
/// Free-space Poisson solves by discrete convolution with (1/2pi) ln|x|.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

struct PaddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoissonProblem {
  ScalarField2D rhs;
  double mean = 0.0;          // integral of rhs
  double support_diam = 0.0;  // diameter of the bounding box of |rhs| > 0
  double zero_mean_correction = 0.0;

  /// Measures mean/support; with enforce_zero_mean the mean is removed by a
  /// normalized bump centered on the support.
  static PoissonProblem make(ScalarField2D rhs, bool enforce_zero_mean = false);
  /// Throws PaddingError unless each side keeps >= margin * width of empty grid.
  void check_padding(double margin = 0.125) const;
};

struct PotentialDerivatives {
  ScalarField2D u, ux, uy, uxx, uxy, uyy;
};

/// Convolution engine bound to one grid. Kernel transforms are built lazily.
class NewtonianSolver {
 public:
  explicit NewtonianSolver(const Grid2D& g);
  ~NewtonianSolver();
  NewtonianSolver(const NewtonianSolver&) = delete;
  NewtonianSolver& operator=(const NewtonianSolver&) = delete;

  const Grid2D& grid() const;

  ScalarField2D potential(const ScalarField2D& rhs) const;
  /// ux, uy always; u and the Hessian on request.
  PotentialDerivatives derivatives(const ScalarField2D& rhs, bool with_potential,
                                   bool with_hessian) const;
  /// (-du/dx2, du/dx1).
  VectorField2D perp_gradient(const ScalarField2D& rhs) const;

  /// Shared instance per grid geometry.
  static std::shared_ptr<const NewtonianSolver> for_grid(const Grid2D& g);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Average of (1/2pi) ln|y| over the square cell of side h centered at 0.
double log_kernel_cell_average(double h);

ScalarField2D newtonian_potential(const PoissonProblem& problem);
PotentialDerivatives potential_derivatives(const PoissonProblem& problem);

/// 5-point Laplacian (interior only, boundary rows left 0).
ScalarField2D five_point_laplacian(const ScalarField2D& u);

struct BenchRow {
  double diam = 0.0;
  double u_lp_quotient = 0.0;      // ||u||_p / ||f||_p
  double grad_lp_quotient = 0.0;   // ||grad u||_p / ||f||_p
  double w1p_quotient = 0.0;       // ||grad u||_{W^{1,p}} / ((1 + diam) ||f||_p)
  double grad_l2_quotient = 0.0;   // ||grad u||_2 / ||f||_q
  double d2u_holder_quotient = 0.0;  // [D^2 u]_alpha / [f]_alpha
  double d2u_sup_quotient = 0.0;     // ||D^2u||_inf / (1/alpha [f]_alpha + ((p-1)/2)^{(p-1)/p} ||f||_p)
};

struct BenchReport {
  double p = 4.0, q = 8.0, r = 1.5, alpha = 0.5;
  std::vector<BenchRow> rows;
  double exponent_u = 0.0, exponent_grad = 0.0, exponent_grad_l2 = 0.0;
  double predicted_u = 2.0, predicted_grad = 1.0, predicted_grad_l2 = 0.0;
  double max_w1p = 0.0, max_d2u_holder = 0.0, max_d2u_sup = 0.0;

  void write_csv(std::ostream& os) const;
};

/// Scaling family f_s(x) = (Laplacian of (1-|x|^2)^4)(x / s) on a fixed grid.
BenchReport estimate_bench(const std::vector<double>& diams, int N, double half_width, double p,
                           double q, double r, double alpha);

struct CanonicalDecomposition {
  ScalarField2D phi, psi;
  VectorField2D grad_phi;
  VectorField2D grad_psi;  // (d psi/dx1, d psi/dx2)
  int iterations = 0;
  double last_step = 0.0;
  double residual_phi = 0.0;  // sup | div(grad phi / rho) - div f |
  double residual_psi = 0.0;  // sup | Lap psi - perp.f - (grad phi/rho).(perp rho/rho) |
  std::vector<double> steps;
};

/// Splits f = grad(phi)/rho + perp(psi) by Picard iteration on phi.
CanonicalDecomposition canonical_decompose(const VectorField2D& f, const ScalarField2D& rho,
                                           double tol, int max_iter = 500);

/// Central-difference divergence and perp-divergence (d1 f2 - d2 f1); boundary 0.
ScalarField2D divergence(const VectorField2D& f);
ScalarField2D curl(const VectorField2D& f);
VectorField2D central_gradient(const ScalarField2D& f);

}  // namespace blowup
