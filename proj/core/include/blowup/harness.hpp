/// @file harness.hpp
/// Forces as residuals of the truncated construction, PDE residual checks,
/// the symmetry suite, the blow-up monitor and the support tracker.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blowup/fields.hpp"
#include "blowup/fixedpoint.hpp"
#include "blowup/grid.hpp"

namespace blowup {

struct BoussinesqForces {
  ScalarField2D f_rho, f_omega;
};
BoussinesqForces boussinesq_forces(const FieldSlice& slice, const Grid2D& g);
BoussinesqForces boussinesq_forces(const FieldStack& stack, double t, const Grid2D& g);

struct ResidualReport {
  std::string id;
  double t = 0.0;
  double h = 0.0;
  double residual = 0.0;  // interior sup norm
  double ratio = 0.0;     // residual(2h) / residual(h); 0 on the coarsest level
};

/// Sup over nodes at least `margin` cells from the edge.
double interior_sup(const ScalarField2D& f, int margin = 2);

/// Vorticity equation of the inhomogeneous Euler system with f_u = g Phi + a*:
///   dw/dt + u.grad w - [f_u - U].perp(rho)/rho - perp.f_u,  rho = rho_bar + rho_B.
/// With ablate_g the g Phi part of f_u is dropped.
ResidualReport euler_vorticity_residual(const FixedPointProblem& prob, std::size_t k,
                                        const VectorField2D& a_star, Vec2 g, double rho_bar,
                                        bool ablate_g = false);

/// d rho/dt + u.grad rho - f_rho with rho = rho_bar + rho_B, grad rho by central
/// differences on g; the analytic identity residual is returned in `identity`.
ResidualReport mass_equation_check(const FieldStack& stack, double t, const Grid2D& g,
                                   double rho_bar, double* identity = nullptr);

/// Sets ratio fields along a refinement ladder (reports ordered coarse to fine).
void fill_refinement_ratios(std::vector<ResidualReport>& ladder);

/// Solves the fixed point on each lattice size of `sizes` (same box) and reports the
/// vorticity residual at every slice (cfg's, or `times` when given); rows grouped by
/// slice, coarse to fine.
/// The ablated rows reuse the converged a* with g dropped from f_u.
struct EulerLadder {
  std::vector<std::vector<ResidualReport>> normal, ablated;  // [slice][level]
};
EulerLadder euler_refinement(const FieldStack& stack, const PhiPotential& phi,
                             FixedPointConfig cfg, const std::vector<int>& sizes, double rho_bar,
                             double tol, int max_iter, const std::vector<double>& times = {});

/// Closed forms against central differences of sampled fields (interior nodes).
struct ConsistencyReport {
  double h = 0.0;
  double u_vs_perp_psi = 0.0;  // |u - (d2 psi, -d1 psi)|
  double div_u = 0.0;
  double omega_vs_curl = 0.0;  // |omega - (d1 u2 - d2 u1)|
  double gradu_vs_fd = 0.0;    // max entry |d_i u_j - FD|
  double drho_vs_fd = 0.0;
  double max() const;
};
ConsistencyReport field_consistency(const FieldStack& stack, double t, const Grid2D& g);

struct SymmetryReport {
  // psi odd, u1 even, u2 odd, omega odd, rho even, f_omega odd in x2
  double psi = 0, u1 = 0, u2 = 0, omega = 0, rho = 0, f_omega = 0;
  double max() const;
};
/// Evaluates each parity at mirrored node pairs of a symmetric grid, relative to
/// the field's sup (absolute when the sup is below 1).
SymmetryReport symmetry_suite(const FieldStack& stack, double t, const Grid2D& g);

struct MonitorRow {
  int n = 0;
  double t0 = 0, t1 = 0;
  double I = 0;        // int ||omega||_inf
  double I_plus = 0;   // int ||omega^(n)||_inf
  double I_minus = 0;  // int ||sum_{m<n} omega^(m)||_inf
  double I_plus_peak = 0;    // int |omega^(n)| at moving coordinates (pi/2, pi/2)
  double I_plus_closed = 0;  // same rule on B_n (a_n^2 + b_n^2)
  double Q = 0;              // tail quadrature ratio
  double plateau_ratio_max = 0;  // max over samples of sup|omega^(n)| / (B (a^2+b^2))
  bool q_at_least_half = false;
};
struct MonitorOptions {
  int time_intervals = 64;   // Simpson intervals per epoch (even)
  int cells_per_half_pi = 1;  // moving-grid nodes per pi/2
};
std::vector<MonitorRow> blowup_monitor(const FieldStack& stack, const MonitorOptions& opt = {});
void write_monitor_csv(const std::vector<MonitorRow>& rows, std::ostream& os);

struct SupportRow {
  double t = 0;
  int epoch = 0;
  double radius = 0;
  double box_radius = 0;
};
/// Radius of {|rho| > 1e-14} measured on the active layer's moving grid.
std::vector<SupportRow> support_tracker(const FieldStack& stack, const std::vector<double>& times,
                                        int cells_per_axis = 257);
void write_support_csv(const std::vector<SupportRow>& rows, std::ostream& os);

/// One row of the master verification report.
struct CheckRow {
  std::string check;
  double t = 0.0;
  double h = 0.0;
  double value = 0.0;
  double threshold = 0.0;
  bool asserted = true;
  bool pass = true;
};
void write_check_csv(const std::vector<CheckRow>& rows, std::ostream& os);

}  // namespace blowup
