#include <gtest/gtest.h>

#include <cmath>

#include "blowup/elliptic.hpp"

using namespace blowup;

namespace {
// g = (1 - |x - c|^2 / R^2)^4 inside the disc, with its analytic derivatives.
struct Bump {
  double cx = 0, cy = 0, R = 1, A = 1;
  double q(double x, double y) const { return ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (R * R); }
  double value(double x, double y) const {
    const double s = 1.0 - q(x, y);
    return s > 0 ? A * s * s * s * s : 0.0;
  }
  // d/dx of A s^4 = A 4 s^3 (-2 (x - cx) / R^2)
  double dx(double x, double y) const {
    const double s = 1.0 - q(x, y);
    return s > 0 ? -8.0 * A * s * s * s * (x - cx) / (R * R) : 0.0;
  }
  double dy(double x, double y) const {
    const double s = 1.0 - q(x, y);
    return s > 0 ? -8.0 * A * s * s * s * (y - cy) / (R * R) : 0.0;
  }
  // radial: f'' + f'/r = (-16 s^3 + 48 q s^2) / R^2
  double lap(double x, double y) const {
    const double qq = q(x, y), s = 1.0 - qq;
    return s > 0 ? A * (-16.0 * s * s * s + 48.0 * qq * s * s) / (R * R) : 0.0;
  }
};

double interior_err(const ScalarField2D& a, const std::function<double(double, double)>& f) {
  double e = 0.0;
  const Grid2D& g = a.grid;
  for (int j = 2; j < g.ny - 2; ++j)
    for (int i = 2; i < g.nx - 2; ++i) e = std::max(e, std::fabs(a.at(i, j) - f(g.x(i), g.y(j))));
  return e;
}

ScalarField2D sampled(const Grid2D& g, const std::function<double(double, double)>& f) {
  return sample(g, [&](Vec2 p) { return f(p.x, p.y); });
}
}  // namespace

TEST(Poisson, ZeroRhs) {
  const Grid2D g = Grid2D::centered(64, 2.0);
  const ScalarField2D u = newtonian_potential(PoissonProblem::make(ScalarField2D(g)));
  for (double v : u.v) EXPECT_EQ(v, 0.0);
}

TEST(Poisson, ManufacturedBumpRefinesAtSecondOrder) {
  const Bump b;
  double prev = 0.0;
  for (int N : {128, 256, 512}) {
    const Grid2D g = Grid2D::centered(N, 2.0);
    const PoissonProblem pr = PoissonProblem::make(sampled(g, [&](double x, double y) { return b.lap(x, y); }));
    EXPECT_LT(std::fabs(pr.mean), 1e-4);  // quadrature of an exact zero-mean rhs
    const ScalarField2D u = newtonian_potential(pr);
    const double e = interior_err(u, [&](double x, double y) { return b.value(x, y); });
    if (N == 512) {
      EXPECT_LT(e, 1e-4);
    }
    if (prev > 0) {
      EXPECT_GT(prev / e, 3.5) << "N = " << N;
    }
    prev = e;
  }
}

TEST(Poisson, GradientAndHessianTrace) {
  const Bump b;
  const Grid2D g = Grid2D::centered(256, 2.0);
  const PoissonProblem pr = PoissonProblem::make(sampled(g, [&](double x, double y) { return b.lap(x, y); }));
  const PotentialDerivatives d = potential_derivatives(pr);
  EXPECT_LT(interior_err(d.ux, [&](double x, double y) { return b.dx(x, y); }), 1e-3);
  EXPECT_LT(interior_err(d.uy, [&](double x, double y) { return b.dy(x, y); }), 1e-3);
  double tr = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    tr = std::max(tr, std::fabs(d.uxx.v[k] + d.uyy.v[k] - pr.rhs.v[k]));
    scale = std::max(scale, std::fabs(pr.rhs.v[k]));
  }
  EXPECT_LT(tr, 1e-2 * scale);
}

TEST(Poisson, LinearityAndShift) {
  const Grid2D g = Grid2D::centered(128, 2.0);
  const Bump b1{0.1, -0.2, 0.5, 1.0}, b2{-0.3, 0.25, 0.4, 2.0};
  const auto solver = NewtonianSolver::for_grid(g);
  const ScalarField2D f1 = sampled(g, [&](double x, double y) { return b1.lap(x, y); });
  const ScalarField2D f2 = sampled(g, [&](double x, double y) { return b2.lap(x, y); });
  ScalarField2D mix(g);
  for (std::size_t k = 0; k < g.size(); ++k) mix.v[k] = 2.0 * f1.v[k] - 3.0 * f2.v[k];
  const ScalarField2D u1 = solver->potential(f1), u2 = solver->potential(f2), um = solver->potential(mix);
  double lin = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    lin = std::max(lin, std::fabs(um.v[k] - (2.0 * u1.v[k] - 3.0 * u2.v[k])));
    scale = std::max(scale, std::fabs(um.v[k]));
  }
  EXPECT_LT(lin, 1e-12 * scale);
  // shift by whole cells
  const int s = 7;
  ScalarField2D sh(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = s; i < g.nx; ++i) sh.at(i, j) = f1.at(i - s, j);
  const ScalarField2D us = solver->potential(sh);
  double eq = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = s; i < g.nx; ++i) eq = std::max(eq, std::fabs(us.at(i, j) - u1.at(i - s, j)));
  EXPECT_LT(eq, 1e-12);
}

TEST(Poisson, ParityOfSolution) {
  const Grid2D g = Grid2D::centered(128, 2.0);
  const Bump b{0.2, 0.4, 0.3, 1.0}, m{0.2, -0.4, 0.3, 1.0};
  const ScalarField2D odd = sampled(g, [&](double x, double y) { return b.lap(x, y) - m.lap(x, y); });
  const PotentialDerivatives d = NewtonianSolver::for_grid(g)->derivatives(odd, true, false);
  const ScalarField2D even = sampled(g, [&](double x, double y) { return b.lap(x, y) + m.lap(x, y); });
  const PotentialDerivatives e = NewtonianSolver::for_grid(g)->derivatives(even, false, false);
  for (int j = 1; j < g.ny; ++j) {
    const int k = g.mirror_j(j);
    for (int i = 0; i < g.nx; i += 9) {
      EXPECT_NEAR(d.u.at(i, j), -d.u.at(i, k), 1e-14);
      EXPECT_NEAR(e.uy.at(i, j), -e.uy.at(i, k), 1e-13);
    }
  }
}

TEST(Poisson, PaddingIsEnforced) {
  const Grid2D g = Grid2D::centered(64, 1.0);
  const Bump b{0, 0, 0.95, 1.0};
  const PoissonProblem pr = PoissonProblem::make(sampled(g, [&](double x, double y) { return b.lap(x, y); }));
  EXPECT_THROW(pr.check_padding(), PaddingError);
  EXPECT_THROW(newtonian_potential(pr), PaddingError);
}

TEST(Poisson, ZeroMeanEnforcement) {
  const Grid2D g = Grid2D::centered(128, 2.0);
  const Bump b{0, 0, 0.5, 1.0};
  const PoissonProblem pr = PoissonProblem::make(sampled(g, [&](double x, double y) { return b.value(x, y); }), true);
  EXPECT_GT(pr.zero_mean_correction, 0.0);
  EXPECT_EQ(pr.mean, 0.0);
  double sum = 0.0;
  for (double v : pr.rhs.v) sum += v;
  EXPECT_NEAR(sum * g.h * g.h, 0.0, 1e-12);
}

TEST(Poisson, FivePointLaplacianOfQuadratic) {
  const Grid2D g = Grid2D::centered(32, 1.0);
  const ScalarField2D u = sampled(g, [](double x, double y) { return 3 * x * x - y * y + x * y; });
  const ScalarField2D L = five_point_laplacian(u);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) EXPECT_NEAR(L.at(i, j), 4.0, 1e-10);
}

TEST(Bench, ScalingExponents) {
  const BenchReport r = estimate_bench({0.5, 0.75, 1.0, 1.5}, 512, 4.0, 4.0, 8.0, 1.5, 0.5);
  EXPECT_NEAR(r.exponent_u, 2.0, 0.1);
  EXPECT_NEAR(r.exponent_grad, 1.0, 0.1);
  EXPECT_EQ(r.rows.size(), 4u);
  for (const BenchRow& row : r.rows) EXPECT_GT(row.u_lp_quotient, 0.0);
}

TEST(Helmholtz, ConstantDensityOneStep) {
  const Grid2D g = Grid2D::centered(256, 2.0);
  const Bump p{0.2, 0.1, 0.6, 1.0}, s{-0.2, 0.0, 0.5, 0.7};
  VectorField2D f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      f.v1[g.index(i, j)] = p.dx(x, y) / 2.0 - s.dy(x, y);
      f.v2[g.index(i, j)] = p.dy(x, y) / 2.0 + s.dx(x, y);
    }
  const CanonicalDecomposition c = canonical_decompose(f, ScalarField2D(g, 2.0), 1e-12);
  EXPECT_LE(c.iterations, 2);
  EXPECT_LT(interior_err(c.phi, [&](double x, double y) { return p.value(x, y); }), 2e-3);
  EXPECT_LT(interior_err(c.psi, [&](double x, double y) { return s.value(x, y); }), 2e-3);
}

TEST(Helmholtz, DivergenceFreeInputHasNoPotentialPart) {
  const Grid2D g = Grid2D::centered(256, 2.0);
  const Bump s{0.1, 0.0, 0.6, 1.0};
  VectorField2D f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      f.v1[g.index(i, j)] = -s.dy(g.x(i), g.y(j));
      f.v2[g.index(i, j)] = s.dx(g.x(i), g.y(j));
    }
  const CanonicalDecomposition c = canonical_decompose(f, ScalarField2D(g, 1.5), 1e-12);
  double phi = 0.0;
  for (double v : c.phi.v) phi = std::max(phi, std::fabs(v));
  EXPECT_LT(phi, 1e-3);
  EXPECT_LT(interior_err(c.psi, [&](double x, double y) { return s.value(x, y); }), 2e-3);
}

TEST(Helmholtz, VariableDensityRecoversPotentials) {
  const Grid2D g = Grid2D::centered(256, 2.0);
  const Bump p{0.2, 0.1, 0.6, 1.0}, s{-0.2, 0.0, 0.5, 0.7}, r{0.0, 0.2, 0.7, 0.3};
  ScalarField2D rho(g);
  VectorField2D f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j), rr = 2.0 + r.value(x, y);
      rho.at(i, j) = rr;
      f.v1[g.index(i, j)] = p.dx(x, y) / rr - s.dy(x, y);
      f.v2[g.index(i, j)] = p.dy(x, y) / rr + s.dx(x, y);
    }
  const CanonicalDecomposition c = canonical_decompose(f, rho, 1e-10);
  EXPECT_GT(c.iterations, 2);
  EXPECT_LT(interior_err(c.phi, [&](double x, double y) { return p.value(x, y); }), 2e-3);
  EXPECT_LT(interior_err(c.psi, [&](double x, double y) { return s.value(x, y); }), 2e-3);
  EXPECT_LT(c.last_step, 1e-10);
}

TEST(Helmholtz, RejectsNonPositiveDensity) {
  const Grid2D g = Grid2D::centered(32, 1.0);
  EXPECT_THROW(canonical_decompose(VectorField2D(g), ScalarField2D(g, 0.0), 1e-8), std::invalid_argument);
}
