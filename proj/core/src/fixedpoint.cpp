#include "blowup/fixedpoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "blowup/fieldnorms.hpp"
#include "blowup/harness.hpp"
#include "blowup/parallel.hpp"

namespace blowup {

namespace {

double gauss8(const std::function<double(double)>& f, double a, double b) {
  static const std::array<double, 4> x = {0.1834346424956498, 0.5255324099163290,
                                          0.7966664774136267, 0.9602898564975363};
  static const std::array<double, 4> w = {0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};
  const double m = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * (f(m - r * x[i]) + f(m + r * x[i]));
  return s * r;
}

double hermite(double y0, double y1, double d0, double d1, double h, double u) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 +
         (u3 - u2) * h * d1;
}

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double bump4(double r2) {
  if (r2 >= 1.0) return 0.0;
  const double w = 1.0 - r2;
  return w * w * w * w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Phi

struct PhiPotential::Tables {
  Cutoff1D cut{PhiPotential::kPlateau, PhiPotential::kSupport};
  double mu = 0.0;
  double R = 0.0;  // natural support half-width 2 / mu
  double dy = 0.0;
  std::vector<double> G, G2, dG, dG2;

  // G and G2 are even (odd integrands with zero total); evaluate on y <= 0 only so
  // mirrored nodes agree bit for bit.
  double lookup(const std::vector<double>& v, const std::vector<double>& dv, double y) const {
    y = -std::fabs(y);
    if (y <= -R || y >= R) return 0.0;
    const int n = static_cast<int>(v.size()) - 1;
    int i = static_cast<int>((y + R) / dy);
    if (i >= n) i = n - 1;
    const double u = (y + R - i * dy) / dy;
    return hermite(v[i], v[i + 1], dv[i], dv[i + 1], dy, u);
  }
};

double PhiPotential::G(double y) const { return tab_->lookup(tab_->G, tab_->dG, y); }
double PhiPotential::G2(double y) const { return tab_->lookup(tab_->G2, tab_->dG2, y); }

double PhiPotential::value_natural(double x1, double x2) const {
  const Tables& T = *tab_;
  if (std::fabs(x1) >= T.R || std::fabs(x2) >= T.R) return 0.0;
  const double mu = T.mu;
  const CutoffValue c1 = T.cut(mu * x1), c2 = T.cut(mu * x2);
  const double s1 = std::sin(x1), k1 = std::cos(x1), k2 = std::cos(x2);
  const double P = c1.v * k1;
  const double Q = mu * mu * c1.d2 * k1 - 2.0 * mu * c1.d1 * s1;
  return A * (P * (2.0 * c2.v * k2 + mu * mu * G2(x2)) + Q * G(x2));
}

Vec2 PhiPotential::grad_natural(double x1, double x2) const {
  const Tables& T = *tab_;
  if (std::fabs(x1) >= T.R || std::fabs(x2) >= T.R) return {};
  const double mu = T.mu, mu2 = mu * mu;
  const CutoffValue c1 = T.cut(mu * x1), c2 = T.cut(mu * x2);
  const double s1 = std::sin(x1), k1 = std::cos(x1), s2 = std::sin(x2), k2 = std::cos(x2);
  const double P = c1.v * k1;
  const double Q = mu2 * c1.d2 * k1 - 2.0 * mu * c1.d1 * s1;
  const double dP = mu * c1.d1 * k1 - c1.v * s1;
  const double dQ = mu2 * mu * c1.d3 * k1 - 3.0 * mu2 * c1.d2 * s1 - 2.0 * mu * c1.d1 * k1;
  const double g = G(x2), g2 = G2(x2);
  Vec2 d;
  d.x = A * (dP * (2.0 * c2.v * k2 + mu2 * g2) + dQ * g);
  d.y = A * (P * (2.0 * (mu * c2.d1 * k2 - c2.v * s2) + mu2 * c2.d2 * s2) + Q * c2.v * s2);
  return d;
}

double PhiPotential::value(Vec2 x) const { return value_natural(scale * x.x, scale * x.y); }

Vec2 PhiPotential::grad(Vec2 x) const {
  const Vec2 d = grad_natural(scale * x.x, scale * x.y);
  return {scale * d.x, scale * d.y};
}

Vec2 PhiPotential::perp_grad(Vec2 x) const {
  const Vec2 d = grad(x);
  return {-d.y, d.x};
}

double PhiPotential::aux_psi(Vec2 x) const {
  const double y1 = scale * x.x, y2 = scale * x.y;
  const Tables& T = *tab_;
  if (std::fabs(y1) >= T.R || std::fabs(y2) >= T.R) return 0.0;
  return A * T.cut.value(T.mu * y1) * T.cut.value(T.mu * y2) * std::cos(y1) * std::sin(y2) / scale;
}

double PhiPotential::aux_chi(Vec2 x) const {
  const double y1 = scale * x.x, y2 = scale * x.y;
  const Tables& T = *tab_;
  if (std::fabs(y1) >= T.R || std::fabs(y2) >= T.R) return 0.0;
  const CutoffValue c1 = T.cut(T.mu * y1);
  const double dP = T.mu * c1.d1 * std::cos(y1) - c1.v * std::sin(y1);
  return A * dP * G(y2) / scale;
}

Vec2 PhiPotential::perp_grad_aux_psi(Vec2 x) const {
  const double y1 = scale * x.x, y2 = scale * x.y;
  const Tables& T = *tab_;
  if (std::fabs(y1) >= T.R || std::fabs(y2) >= T.R) return {};
  const double mu = T.mu;
  const CutoffValue c1 = T.cut(mu * y1), c2 = T.cut(mu * y2);
  const double s1 = std::sin(y1), k1 = std::cos(y1), s2 = std::sin(y2), k2 = std::cos(y2);
  const double d1 = A * (mu * c1.d1 * k1 - c1.v * s1) * c2.v * s2;
  const double d2 = A * c1.v * k1 * (mu * c2.d1 * s2 + c2.v * k2);
  return {-d2, d1};
}

Vec2 PhiPotential::perp_grad_aux_chi(Vec2 x) const {
  const double y1 = scale * x.x, y2 = scale * x.y;
  const Tables& T = *tab_;
  if (std::fabs(y1) >= T.R || std::fabs(y2) >= T.R) return {};
  const double mu = T.mu;
  const CutoffValue c1 = T.cut(mu * y1), c2 = T.cut(mu * y2);
  const double s1 = std::sin(y1), k1 = std::cos(y1);
  const double dP = mu * c1.d1 * k1 - c1.v * s1;
  const double ddP = mu * mu * c1.d2 * k1 - 2.0 * mu * c1.d1 * s1 - c1.v * k1;
  const double d1 = A * ddP * G(y2);
  const double d2 = A * dP * c2.v * std::sin(y2);
  return {-d2, d1};
}

double PhiPotential::support_half_width() const { return tab_->R / scale; }

PhiPotential build_phi(double epsilon, double support_half_width, int lip_grid, int table_cells) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("build_phi: epsilon must lie in (0,1)");
  if (!(support_half_width > 0.0)) throw std::invalid_argument("build_phi: support must be positive");
  auto tab = std::make_shared<PhiPotential::Tables>();
  // smallness rule: mu = (eps/4) / max(int |phi''|, sup |phi'|)
  const int m = 200000;
  const double z0 = -PhiPotential::kSupport, dz = 2.0 * PhiPotential::kSupport / m;
  double int_d2 = 0.0, sup_d1 = 0.0;
  for (int i = 0; i < m; ++i) {
    const CutoffValue c = tab->cut(z0 + (i + 0.5) * dz);
    int_d2 += std::fabs(c.d2) * dz;
    sup_d1 = std::max(sup_d1, std::fabs(c.d1));
  }
  tab->mu = 0.25 * epsilon / std::max(int_d2, sup_d1);
  tab->R = PhiPotential::kSupport / tab->mu;
  tab->dy = 2.0 * tab->R / table_cells;
  const double mu = tab->mu;
  const Cutoff1D& cut = tab->cut;
  auto f = [&](double s) { return cut.value(mu * s) * std::sin(s); };
  auto f2 = [&](double s) { return cut(mu * s).d2 * std::sin(s); };
  tab->G.assign(table_cells + 1, 0.0);
  tab->G2.assign(table_cells + 1, 0.0);
  tab->dG.resize(table_cells + 1);
  tab->dG2.resize(table_cells + 1);
  for (int k = 0; k <= table_cells; ++k) {
    const double y = -tab->R + k * tab->dy;
    tab->dG[k] = f(y);
    tab->dG2[k] = f2(y);
    if (k > 0) {
      const double y0 = y - tab->dy;
      tab->G[k] = tab->G[k - 1] + gauss8(f, y0, y);
      tab->G2[k] = tab->G2[k - 1] + gauss8(f2, y0, y);
    }
  }

  PhiPotential phi;
  phi.epsilon = epsilon;
  phi.mu_phi = mu;
  phi.tab_ = tab;
  phi.scale = tab->R / support_half_width;
  // Phi(0) = A (2 + mu^2 G2(0)) = 1
  phi.A = 1.0 / (2.0 + mu * mu * phi.G2(0.0));
  phi.lip_grid = lip_grid;

  if (lip_grid > 0) {
    // perp-grad Delta^{-1} d2 Phi on a grid keeping the padding margin
    const Grid2D g = Grid2D::centered(lip_grid, support_half_width / 0.74);
    ScalarField2D d2(g);
    ScalarField2D closed(g);
    parallel_for(g.size(), [&](std::size_t idx) {
      const int i = static_cast<int>(idx % g.nx), j = static_cast<int>(idx / g.nx);
      const Vec2 x = g.point(i, j);
      d2.v[idx] = phi.grad(x).y;
      const Vec2 pg = phi.perp_grad_aux_psi(x);
      closed.v[idx] = std::hypot(pg.x, pg.y);
    });
    const PoissonProblem prob = PoissonProblem::make(d2);
    prob.check_padding();
    const PotentialDerivatives d = NewtonianSolver::for_grid(g)->derivatives(prob.rhs, false, false);
    double lip = 0.0, cl = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      lip = std::max(lip, std::hypot(d.uy.v[k], d.ux.v[k]));
      cl = std::max(cl, closed.v[k]);
    }
    phi.certified_lip = lip;
    phi.closed_form_lip = cl;
    if (lip > 0.5 * (1.0 + epsilon)) {
      std::ostringstream os;
      os << "build_phi: measured Lipschitz bound " << lip << " exceeds " << 0.5 * (1.0 + epsilon)
         << " (grid " << lip_grid << " too coarse)";
      throw QuadratureError(os.str());
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// The map

double default_phi_support(const FieldStack& stack) { return 8.0 * layer_one_extent(stack); }

double layer_one_extent(const FieldStack& stack, int samples) {
  const Dynamics& d = stack.dynamics();
  double R = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double t = d.t_end() * k / samples;
    const Box b = layer_box(d.snapshot(1, t), stack.shift());
    R = std::max(R, std::max(std::fabs(b.cx) + b.hx, b.hy));
  }
  return R;
}

FixedPointProblem::FixedPointProblem(const FieldStack& stack, const PhiPotential& phi,
                                     const FixedPointConfig& cfg)
    : stack_(&stack), phi_(phi) {
  const double L = cfg.half_width > 0.0 ? cfg.half_width : 1.45 * layer_one_extent(stack);
  grid_ = Grid2D::centered(cfg.N, L);
  solver_ = NewtonianSolver::for_grid(grid_);
  Phi_ = ScalarField2D(grid_);
  dPhi_ = VectorField2D(grid_);
  perp_psi_ = VectorField2D(grid_);
  perp_chi_ = VectorField2D(grid_);
  parallel_for(grid_.size(), [&](std::size_t idx) {
    const Vec2 x = grid_.point(static_cast<int>(idx % grid_.nx), static_cast<int>(idx / grid_.nx));
    Phi_.v[idx] = phi_.value(x);
    const Vec2 d = phi_.grad(x);
    dPhi_.v1[idx] = d.x;
    dPhi_.v2[idx] = d.y;
    const Vec2 p = phi_.perp_grad_aux_psi(x), q = phi_.perp_grad_aux_chi(x);
    perp_psi_.v1[idx] = p.x;
    perp_psi_.v2[idx] = p.y;
    perp_chi_.v1[idx] = q.x;
    perp_chi_.v2[idx] = q.y;
  });

  const Dynamics& dyn = stack.dynamics();
  const auto& sched = dyn.schedule();
  std::vector<int> epochs = cfg.epochs;
  if (epochs.empty())
    for (int n = 1; n <= dyn.layers(); ++n) epochs.push_back(n);
  if (!cfg.times.empty()) epochs.clear();
  for (double t : cfg.times) {
    if (!(t >= sched[0] && t < 1.0)) throw std::invalid_argument("FixedPointProblem: time out of range");
    TimeSlice s;
    s.t = t;
    s.epoch = 1;
    while (s.epoch < dyn.layers() && t >= sched[s.epoch]) ++s.epoch;
    slices_.push_back(std::move(s));
  }
  for (int n : epochs) {
    if (n < 1 || n > dyn.layers()) throw std::invalid_argument("FixedPointProblem: epoch out of range");
    const double t0 = sched[n - 1], t1 = sched[n];
    for (int k = 0; k < cfg.samples_per_epoch; ++k) {
      TimeSlice s;
      s.t = t0 + (k + 0.5) / cfg.samples_per_epoch * (t1 - t0);
      s.epoch = n;
      slices_.push_back(std::move(s));
    }
  }
  for (TimeSlice& s : slices_) {
    const FieldSlice fs = stack.slice(s.t);
    s.resolved = true;
    for (const LayerSnapshot& L : fs.layers())
      if (L.active && (L.B != 0.0 || L.D != 0.0) &&
          2.0 * std::numbers::pi / std::max(L.a, L.b) < 4.0 * grid_.h)
        s.resolved = false;
    s.U0 = fs.material_derivative({0.0, 0.0});
    s.rho0 = fs.eval({0.0, 0.0}).rho;
    s.rho = ScalarField2D(grid_);
    s.d1rho = ScalarField2D(grid_);
    s.d2rho = ScalarField2D(grid_);
    s.U1 = ScalarField2D(grid_);
    s.U2 = ScalarField2D(grid_);
    parallel_for(grid_.size(), [&](std::size_t idx) {
      const Vec2 x =
          grid_.point(static_cast<int>(idx % grid_.nx), static_cast<int>(idx / grid_.nx));
      const PointFields f = fs.eval(x);
      s.rho.v[idx] = f.rho;
      s.d1rho.v[idx] = f.drho.x;
      s.d2rho.v[idx] = f.drho.y;
      s.U1.v[idx] = f.du_dt.x + f.u.x * f.gradu[0][0] + f.u.y * f.gradu[1][0];
      s.U2.v[idx] = f.du_dt.y + f.u.x * f.gradu[0][1] + f.u.y * f.gradu[1][1];
    });
    s.f_omega = boussinesq_forces(fs, grid_).f_omega;
  }
}

double FixedPointProblem::rho_B_sup() const {
  double m = 0.0;
  for (const TimeSlice& s : slices_)
    for (double v : s.rho.v) m = std::max(m, std::fabs(v));
  return m;
}

Vec2 FixedPointProblem::g_of_t(std::size_t k, Vec2 a0, double rho_bar) const {
  const TimeSlice& s = slices_.at(k);
  return {s.U0.x - a0.x - (rho_bar + s.rho0), s.U0.y - a0.y};
}

double FixedPointProblem::bracket_at_origin(std::size_t k, Vec2 a0, Vec2 g, double rho_bar) const {
  const TimeSlice& s = slices_.at(k);
  const double phi0 = Phi_.at(i0(), j0());
  return 1.0 + (g.x * phi0 + a0.x - s.U0.x) / (rho_bar + s.rho0);
}

ScalarField2D FixedPointProblem::assemble_local_rhs(std::size_t k, const VectorField2D& a, Vec2 g,
                                                    double rho_bar) const {
  const TimeSlice& s = slices_.at(k);
  ScalarField2D rhs(grid_);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double inv = 1.0 / (rho_bar + s.rho.v[i]);
    const double Phi = Phi_.v[i];
    const double c1 = g.x * Phi + a.v1[i] - s.U1.v[i];
    const double c2 = g.y * Phi + a.v2[i] - s.U2.v[i];
    rhs.v[i] = s.d2rho.v[i] * (1.0 + c1 * inv) - s.d1rho.v[i] * c2 * inv + s.f_omega.v[i];
  }
  return rhs;
}

ScalarField2D FixedPointProblem::assemble_rhs(std::size_t k, const VectorField2D& a, Vec2 g,
                                              double rho_bar) const {
  ScalarField2D rhs = assemble_local_rhs(k, a, g, rho_bar);
  // g . perp-grad Phi = -g1 d2 Phi + g2 d1 Phi
  for (std::size_t i = 0; i < grid_.size(); ++i)
    rhs.v[i] -= -g.x * dPhi_.v2[i] + g.y * dPhi_.v1[i];
  return rhs;
}

VectorField2D FixedPointProblem::apply_T_slice(std::size_t k, const VectorField2D& a,
                                               double rho_bar, double* raw_defect) const {
  const Vec2 g = g_of_t(k, at_origin(a), rho_bar);
  PoissonProblem prob = PoissonProblem::make(assemble_local_rhs(k, a, g, rho_bar));
  prob.check_padding();
  VectorField2D out = solver_->perp_gradient(prob.rhs);
  // Delta^{-1}(-g . perp-grad Phi) = g1 psi_s - g2 chi_s
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    out.v1[i] += g.x * perp_psi_.v1[i] - g.y * perp_chi_.v1[i];
    out.v2[i] += g.x * perp_psi_.v2[i] - g.y * perp_chi_.v2[i];
  }
  if (raw_defect) *raw_defect = symmetry_defect(TimeField{out});
  if (project_) project_admissible(out);
  return out;
}

TimeField FixedPointProblem::apply_T(const TimeField& a, double rho_bar, double* raw_defect) const {
  if (a.size() != slices_.size()) throw std::invalid_argument("apply_T: slice count mismatch");
  TimeField out(a.size());
  std::vector<double> defects(a.size(), 0.0);
  parallel_for(a.size(), [&](std::size_t k) { out[k] = apply_T_slice(k, a[k], rho_bar, &defects[k]); });
  if (raw_defect) *raw_defect = *std::max_element(defects.begin(), defects.end());
  return out;
}

TimeField FixedPointProblem::zero() const {
  return TimeField(slices_.size(), VectorField2D(grid_));
}

TimeField FixedPointProblem::random_admissible(std::mt19937_64& rng, double amplitude) const {
  TimeField out = zero();
  const double L = 0.5 * grid_.x_max();
  for (VectorField2D& f : out) {
    const double A1 = uniform(rng, -amplitude, amplitude);
    const double A2 = uniform(rng, -amplitude, amplitude);
    const bool on_axis = uniform01(rng) < 0.5;
    const double p1 = uniform(rng, -0.3, 0.3) * L * (on_axis ? 0.1 : 1.0);
    const double q1 = on_axis ? 0.0 : uniform(rng, 0.0, 0.3) * L;
    const double w1 = uniform(rng, 0.15, 0.4) * L;
    const double p2 = uniform(rng, -0.3, 0.3) * L;
    const double q2 = uniform(rng, 0.05, 0.3) * L;
    const double w2 = uniform(rng, 0.15, 0.4) * L;
    for (int j = 0; j < grid_.ny; ++j)
      for (int i = 0; i < grid_.nx; ++i) {
        const double x = grid_.x(i), y = grid_.y(j);
        const double dx1 = (x - p1) / w1, dx2 = (x - p2) / w2;
        const std::size_t idx = grid_.index(i, j);
        f.v1[idx] = A1 * (bump4(dx1 * dx1 + std::pow((y - q1) / w1, 2)) +
                          bump4(dx1 * dx1 + std::pow((y + q1) / w1, 2)));
        f.v2[idx] = A2 * (bump4(dx2 * dx2 + std::pow((y - q2) / w2, 2)) -
                          bump4(dx2 * dx2 + std::pow((y + q2) / w2, 2)));
      }
  }
  return out;
}

double FixedPointProblem::varpsi_residual(std::size_t k, const VectorField2D& a, Vec2 g,
                                          double rho_bar) const {
  const ScalarField2D rhs = assemble_rhs(k, a, g, rho_bar);
  // perp . a = -d2 a1 + d1 a2
  const ScalarField2D pd = curl(a);
  ScalarField2D r(grid_);
  for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] = rhs.v[i] - pd.v[i];
  return interior_sup(r, 2);
}

Vec2 at_origin(const VectorField2D& a) {
  const std::size_t idx = a.grid.index(a.grid.nx / 2, a.grid.ny / 2);
  return {a.v1[idx], a.v2[idx]};
}

double lattice_distance(const TimeField& a, const TimeField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("lattice_distance: size mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].v1.size(); ++i)
      d = std::max(d, std::hypot(a[k].v1[i] - b[k].v1[i], a[k].v2[i] - b[k].v2[i]));
  return d;
}

double lattice_sup(const TimeField& a) {
  double d = 0.0;
  for (const auto& f : a)
    for (std::size_t i = 0; i < f.v1.size(); ++i) d = std::max(d, std::hypot(f.v1[i], f.v2[i]));
  return d;
}

void project_admissible(VectorField2D& f) {
  const Grid2D& g = f.grid;
  for (int j = 0; j < g.ny; ++j) {
    const int jm = g.mirror_j(j);
    if (jm < j) continue;  // unpaired rows are left alone; pairs handled once
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t p = g.index(i, j), q = g.index(i, jm);
      const double e = 0.5 * (f.v1[p] + f.v1[q]), o = 0.5 * (f.v2[p] - f.v2[q]);
      f.v1[p] = f.v1[q] = e;
      f.v2[p] = o;
      f.v2[q] = -o;
    }
  }
}

double symmetry_defect(const TimeField& a) {
  double d = 0.0;
  for (const auto& f : a) {
    const Grid2D& g = f.grid;
    for (int j = 0; j < g.ny; ++j) {
      const int jm = g.mirror_j(j);
      if (jm < 0) continue;
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t p = g.index(i, j), q = g.index(i, jm);
        d = std::max(d, std::fabs(f.v1[p] - f.v1[q]));
        d = std::max(d, std::fabs(f.v2[p] + f.v2[q]));
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Banach iteration

namespace {
double max_residual(const FixedPointProblem& prob, const TimeField& a, double rho_bar,
                    std::vector<double>* per_slice) {
  std::vector<double> r(a.size());
  parallel_for(a.size(), [&](std::size_t k) {
    r[k] = prob.varpsi_residual(k, a[k], prob.g_of_t(k, at_origin(a[k]), rho_bar), rho_bar);
  });
  double m = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (prob.slices()[k].resolved) m = std::max(m, r[k]);
  if (per_slice) *per_slice = r;
  return m;
}
}  // namespace

FixedPointState iterate_to_fixed_point(const FixedPointProblem& prob, double rho_bar, double tol,
                                       int max_iter, const TimeField* start) {
  FixedPointState st;
  TimeField a = start ? *start : prob.zero();
  double first = 0.0;
  int bad = 0;
  for (int it = 1; it <= max_iter; ++it) {
    double raw = 0.0;
    TimeField b = prob.apply_T(a, rho_bar, &raw);
    const double d = lattice_distance(b, a);
    const double ratio = st.distances.empty() || st.distances.back() == 0.0
                             ? 0.0
                             : d / st.distances.back();
    st.distances.push_back(d);
    st.ratios.push_back(ratio);
    st.symmetry_defects.push_back(raw);
    st.residuals.push_back(max_residual(prob, b, rho_bar, nullptr));
    st.iterations = it;
    if (it == 1) first = d;
    a = std::move(b);
    if (ratio > 1.0) {
      if (++bad >= 2) {
        std::ostringstream os;
        os << "iterate_to_fixed_point: distance ratio above 1 on two consecutive steps at rho_bar="
           << rho_bar << " (iteration " << it << ")";
        throw NonContractionError(os.str());
      }
    } else {
      bad = 0;
    }
    if (d < tol) {
      st.converged = true;
      break;
    }
  }
  st.apriori_bound = std::pow(0.9, st.iterations) / (1.0 - 0.9) * first;
  st.residual = max_residual(prob, a, rho_bar, &st.slice_residuals);
  st.g.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Vec2 a0 = at_origin(a[k]);
    st.g[k] = prob.g_of_t(k, a0, rho_bar);
    st.max_bracket = std::max(st.max_bracket, std::fabs(prob.bracket_at_origin(k, a0, st.g[k], rho_bar)));
    st.max_g2 = std::max(st.max_g2, std::fabs(st.g[k].y));
  }
  st.fixed_point_defect = lattice_distance(prob.apply_T(a, rho_bar), a);
  st.a = std::move(a);
  return st;
}

void FixedPointState::write_history_csv(std::ostream& os) const {
  os << std::setprecision(17) << "iter,distance,ratio,residual,symmetry_defect\n";
  for (std::size_t i = 0; i < distances.size(); ++i)
    os << i + 1 << ',' << distances[i] << ',' << ratios[i] << ',' << residuals[i] << ','
       << symmetry_defects[i] << '\n';
}

void FixedPointState::write_g_csv(std::ostream& os, const FixedPointProblem& prob) const {
  os << std::setprecision(17) << "t,g1,g2\n";
  for (std::size_t k = 0; k < g.size(); ++k)
    os << prob.slices()[k].t << ',' << g[k].x << ',' << g[k].y << '\n';
}

std::vector<double> default_rho_ladder(const FixedPointProblem& prob, int rungs) {
  std::vector<double> ladder;
  double r = 2.0 * prob.rho_B_sup();
  if (r <= 0.0) r = 1.0;
  for (int i = 0; i < rungs; ++i, r *= 2.0) ladder.push_back(r);
  return ladder;
}

ContractionTable contraction_search(const FixedPointProblem& prob, const std::vector<double>& ladder,
                                    int pairs, std::uint64_t seed) {
  ContractionTable tab;
  for (double rho_bar : ladder) {
    std::mt19937_64 rng(seed);
    ContractionRow row;
    row.rho_bar = rho_bar;
    double sum = 0.0;
    for (int p = 0; p < pairs; ++p) {
      const TimeField a = prob.random_admissible(rng);
      const TimeField b = prob.random_admissible(rng);
      const double dab = lattice_distance(a, b);
      if (dab == 0.0) continue;
      const double r = lattice_distance(prob.apply_T(a, rho_bar), prob.apply_T(b, rho_bar)) / dab;
      row.max_ratio = std::max(row.max_ratio, r);
      sum += r;
      ++row.pairs;
    }
    row.mean_ratio = row.pairs ? sum / row.pairs : 0.0;
    tab.rows.push_back(row);
    if (!tab.selected && row.pairs > 0 && row.max_ratio <= 0.9) tab.selected = rho_bar;
  }
  return tab;
}

void ContractionTable::write_csv(std::ostream& os) const {
  os << std::setprecision(17) << "rho_bar,max_ratio,mean_ratio,pairs,selected\n";
  for (const auto& r : rows)
    os << r.rho_bar << ',' << r.max_ratio << ',' << r.mean_ratio << ',' << r.pairs << ','
       << (selected && *selected == r.rho_bar ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Screened diagnostics

ScreenedReport screened_diagnostics(const FixedPointProblem& prob, const FixedPointState& st,
                                    double rho_bar, double tol) {
  ScreenedReport rep;
  rep.rho_bar = rho_bar;
  const Grid2D& g = prob.grid();
  const auto& slices = prob.slices();
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const bool last = k + 1 == slices.size() || slices[k + 1].epoch != slices[k].epoch;
    if (!last) continue;
    const TimeSlice& s = slices[k];
    VectorField2D fu(g);
    ScalarField2D rho(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      fu.v1[i] = st.g[k].x * prob.phi_field().v[i] + st.a[k].v1[i];
      fu.v2[i] = st.g[k].y * prob.phi_field().v[i] + st.a[k].v2[i];
      rho.v[i] = rho_bar + s.rho.v[i];
    }
    ScreenedRow row;
    row.t = s.t;
    row.epoch = s.epoch;
    try {
      const CanonicalDecomposition cd = canonical_decompose(fu, rho, tol);
      const std::size_t o = g.index(prob.i0(), prob.j0());
      row.dpsi_dx2_origin = cd.grad_psi.v2[o];
      row.unscreened_defect = row.dpsi_dx2_origin + rho_bar + s.rho0 - s.U0.x;
      // gradient of perp-grad psi = (-d2 psi, d1 psi)
      VectorField2D pg(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        pg.v1[i] = -cd.grad_psi.v2[i];
        pg.v2[i] = cd.grad_psi.v1[i];
      }
      ScalarField2D c1(g), c2(g);
      c1.v = pg.v1;
      c2.v = pg.v2;
      const VectorField2D g1 = central_gradient(c1);
      const VectorField2D g2 = central_gradient(c2);
      double m = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        m = std::max({m, std::fabs(g1.v1[i]), std::fabs(g1.v2[i]), std::fabs(g2.v1[i]),
                      std::fabs(g2.v2[i])});
      row.grad_perp_psi_gradient_sup = m;
      row.picard_iterations = cd.iterations;
      row.residual_phi = cd.residual_phi;
      row.residual_psi = cd.residual_psi;
    } catch (const DivergenceError&) {
      row.diverged = true;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void ScreenedReport::write_csv(std::ostream& os) const {
  os << std::setprecision(17)
     << "t,epoch,rho_bar,dpsi_dx2_origin,unscreened_defect,grad_perp_psi_gradient_sup,"
        "picard_iterations,residual_phi,residual_psi,diverged\n";
  for (const auto& r : rows)
    os << r.t << ',' << r.epoch << ',' << rho_bar << ',' << r.dpsi_dx2_origin << ','
       << r.unscreened_defect << ',' << r.grad_perp_psi_gradient_sup << ','
       << r.picard_iterations << ',' << r.residual_phi << ',' << r.residual_psi << ','
       << (r.diverged ? 1 : 0) << '\n';
}

}  // namespace blowup
