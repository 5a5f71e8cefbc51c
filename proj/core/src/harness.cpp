#include "blowup/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "blowup/parallel.hpp"

namespace blowup {

BoussinesqForces boussinesq_forces(const FieldSlice& slice, const Grid2D& g) {
  BoussinesqForces out{ScalarField2D(g), ScalarField2D(g)};
  parallel_for(g.size(), [&](std::size_t idx) {
    const Vec2 x = g.point(static_cast<int>(idx % g.nx), static_cast<int>(idx / g.nx));
    const PointFields f = slice.eval(x);
    out.f_rho.v[idx] = f.drho_dt + f.u.x * f.drho.x + f.u.y * f.drho.y;
    out.f_omega.v[idx] = f.domega_dt + f.u.x * f.domega.x + f.u.y * f.domega.y - f.drho.y;
  });
  return out;
}

BoussinesqForces boussinesq_forces(const FieldStack& stack, double t, const Grid2D& g) {
  return boussinesq_forces(stack.slice(t), g);
}

double interior_sup(const ScalarField2D& f, int margin) {
  const Grid2D& g = f.grid;
  double m = 0.0;
  for (int j = margin; j < g.ny - margin; ++j)
    for (int i = margin; i < g.nx - margin; ++i) m = std::max(m, std::fabs(f.at(i, j)));
  return m;
}

ResidualReport euler_vorticity_residual(const FixedPointProblem& prob, std::size_t k,
                                        const VectorField2D& a_star, Vec2 g, double rho_bar,
                                        bool ablate_g) {
  const Grid2D& G = prob.grid();
  const TimeSlice& s = prob.slices().at(k);
  const FieldSlice fs = prob.stack().slice(s.t);
  const Vec2 gg = ablate_g ? Vec2{} : g;
  VectorField2D fu(G);
  for (std::size_t i = 0; i < G.size(); ++i) {
    fu.v1[i] = gg.x * prob.phi_field().v[i] + a_star.v1[i];
    fu.v2[i] = gg.y * prob.phi_field().v[i] + a_star.v2[i];
  }
  const ScalarField2D perp_div = curl(fu);
  ScalarField2D r(G);
  parallel_for(G.size(), [&](std::size_t idx) {
    const Vec2 x = G.point(static_cast<int>(idx % G.nx), static_cast<int>(idx / G.nx));
    const PointFields f = fs.eval(x);
    const double lhs = f.domega_dt + f.u.x * f.domega.x + f.u.y * f.domega.y;
    const double rho = rho_bar + f.rho;
    const double U1 = f.du_dt.x + f.u.x * f.gradu[0][0] + f.u.y * f.gradu[1][0];
    const double U2 = f.du_dt.y + f.u.x * f.gradu[0][1] + f.u.y * f.gradu[1][1];
    // perp rho = (-d2 rho, d1 rho)
    const double coupling = ((fu.v1[idx] - U1) * (-f.drho.y) + (fu.v2[idx] - U2) * f.drho.x) / rho;
    r.v[idx] = lhs - coupling - perp_div.v[idx];
  });
  ResidualReport rep;
  rep.id = ablate_g ? "euler_vorticity_ablate_g" : "euler_vorticity";
  rep.t = s.t;
  rep.h = G.h;
  rep.residual = interior_sup(r, 2);
  return rep;
}

ResidualReport mass_equation_check(const FieldStack& stack, double t, const Grid2D& g,
                                   double rho_bar, double* identity) {
  const FieldSlice fs = stack.slice(t);
  ScalarField2D rho(g);
  std::vector<PointFields> pf(g.size());
  parallel_for(g.size(), [&](std::size_t idx) {
    const Vec2 x = g.point(static_cast<int>(idx % g.nx), static_cast<int>(idx / g.nx));
    pf[idx] = fs.eval(x);
    rho.v[idx] = rho_bar + pf[idx].rho;
  });
  const BoussinesqForces F = boussinesq_forces(fs, g);
  const VectorField2D grad = central_gradient(rho);
  ScalarField2D r(g);
  double id = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PointFields& f = pf[i];
    r.v[i] = f.drho_dt + f.u.x * grad.v1[i] + f.u.y * grad.v2[i] - F.f_rho.v[i];
    id = std::max(id, std::fabs(f.drho_dt + f.u.x * f.drho.x + f.u.y * f.drho.y - F.f_rho.v[i]));
  }
  if (identity) *identity = id;
  ResidualReport rep;
  rep.id = "mass_equation";
  rep.t = t;
  rep.h = g.h;
  rep.residual = interior_sup(r, 1);
  return rep;
}

void fill_refinement_ratios(std::vector<ResidualReport>& ladder) {
  for (std::size_t i = 0; i < ladder.size(); ++i)
    ladder[i].ratio = i == 0 || ladder[i].residual == 0.0
                          ? 0.0
                          : ladder[i - 1].residual / ladder[i].residual;
}

EulerLadder euler_refinement(const FieldStack& stack, const PhiPotential& phi,
                             FixedPointConfig cfg, const std::vector<int>& sizes, double rho_bar,
                             double tol, int max_iter, const std::vector<double>& times) {
  if (cfg.half_width <= 0.0) cfg.half_width = 1.45 * layer_one_extent(stack);
  if (!times.empty()) cfg.times = times;
  EulerLadder out;
  for (int N : sizes) {
    cfg.N = N;
    const FixedPointProblem prob(stack, phi, cfg);
    std::vector<int> ks;
    for (std::size_t k = 0; k < prob.size(); ++k) ks.push_back(static_cast<int>(k));
    out.normal.resize(ks.size());
    out.ablated.resize(ks.size());
    const FixedPointState st = iterate_to_fixed_point(prob, rho_bar, tol, max_iter);
    for (std::size_t q = 0; q < ks.size(); ++q) {
      const std::size_t k = static_cast<std::size_t>(ks[q]);
      out.normal[q].push_back(euler_vorticity_residual(prob, k, st.a[k], st.g[k], rho_bar, false));
      out.ablated[q].push_back(euler_vorticity_residual(prob, k, st.a[k], st.g[k], rho_bar, true));
    }
  }
  for (auto& l : out.normal) fill_refinement_ratios(l);
  for (auto& l : out.ablated) fill_refinement_ratios(l);
  return out;
}

double ConsistencyReport::max() const {
  return std::max({u_vs_perp_psi, div_u, omega_vs_curl, gradu_vs_fd, drho_vs_fd});
}

ConsistencyReport field_consistency(const FieldStack& stack, double t, const Grid2D& g) {
  const FieldSlice fs = stack.slice(t);
  std::vector<PointFields> pf(g.size());
  parallel_for(g.size(), [&](std::size_t idx) {
    pf[idx] = fs.eval(g.point(static_cast<int>(idx % g.nx), static_cast<int>(idx / g.nx)));
  });
  ConsistencyReport r;
  r.h = g.h;
  const double inv2h = 0.5 / g.h;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      const PointFields& c = pf[g.index(i, j)];
      const PointFields& e = pf[g.index(i + 1, j)];
      const PointFields& w = pf[g.index(i - 1, j)];
      const PointFields& n = pf[g.index(i, j + 1)];
      const PointFields& s = pf[g.index(i, j - 1)];
      const double d1psi = (e.psi - w.psi) * inv2h, d2psi = (n.psi - s.psi) * inv2h;
      r.u_vs_perp_psi = std::max(r.u_vs_perp_psi, std::hypot(c.u.x - d2psi, c.u.y + d1psi));
      const double d1u1 = (e.u.x - w.u.x) * inv2h, d2u1 = (n.u.x - s.u.x) * inv2h;
      const double d1u2 = (e.u.y - w.u.y) * inv2h, d2u2 = (n.u.y - s.u.y) * inv2h;
      r.div_u = std::max(r.div_u, std::fabs(d1u1 + d2u2));
      r.omega_vs_curl = std::max(r.omega_vs_curl, std::fabs(c.omega - (d1u2 - d2u1)));
      r.gradu_vs_fd = std::max({r.gradu_vs_fd, std::fabs(c.gradu[0][0] - d1u1),
                                std::fabs(c.gradu[0][1] - d1u2), std::fabs(c.gradu[1][0] - d2u1),
                                std::fabs(c.gradu[1][1] - d2u2)});
      r.drho_vs_fd = std::max({r.drho_vs_fd, std::fabs(c.drho.x - (e.rho - w.rho) * inv2h),
                               std::fabs(c.drho.y - (n.rho - s.rho) * inv2h)});
    }
  return r;
}

double SymmetryReport::max() const { return std::max({psi, u1, u2, omega, rho, f_omega}); }

SymmetryReport symmetry_suite(const FieldStack& stack, double t, const Grid2D& g) {
  const FieldSlice fs = stack.slice(t);
  std::vector<PointFields> pf(g.size());
  parallel_for(g.size(), [&](std::size_t idx) {
    pf[idx] = fs.eval(g.point(static_cast<int>(idx % g.nx), static_cast<int>(idx / g.nx)));
  });
  auto fo = [](const PointFields& f) {
    return f.domega_dt + f.u.x * f.domega.x + f.u.y * f.domega.y - f.drho.y;
  };
  double sup[6] = {}, def[6] = {};
  for (int j = 0; j < g.ny; ++j) {
    const int jm = g.mirror_j(j);
    for (int i = 0; i < g.nx; ++i) {
      const PointFields& p = pf[g.index(i, j)];
      const double v[6] = {p.psi, p.u.x, p.u.y, p.omega, p.rho, fo(p)};
      for (int q = 0; q < 6; ++q) sup[q] = std::max(sup[q], std::fabs(v[q]));
      if (jm < 0) continue;
      const PointFields& m = pf[g.index(i, jm)];
      const double w[6] = {m.psi, m.u.x, m.u.y, m.omega, m.rho, fo(m)};
      // parity: +1 even, -1 odd
      static const double par[6] = {-1, 1, -1, -1, 1, -1};
      for (int q = 0; q < 6; ++q) def[q] = std::max(def[q], std::fabs(v[q] - par[q] * w[q]));
    }
  }
  for (int q = 0; q < 6; ++q)
    if (sup[q] > 1.0) def[q] /= sup[q];
  return {def[0], def[1], def[2], def[3], def[4], def[5]};
}

// ---------------------------------------------------------------------------
// Blow-up monitor

namespace {

/// omega of one layer along 1D node sets: omega = -B (a^2 S2(x1) S0(x2) + b^2 S0(x1) S2(x2)).
struct Axis {
  std::vector<double> s0, s2;
};

Axis axis_x1(const LayerSnapshot& s, const Cutoff1D& cut, double shift, const std::vector<double>& x1) {
  Axis A;
  A.s0.resize(x1.size());
  A.s2.resize(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double X = s.a * (x1[i] - (s.c - shift));
    if (std::fabs(s.lambda * X) >= cut.support()) {
      A.s0[i] = A.s2[i] = 0.0;
      continue;
    }
    const ProfileValues p = layer_profile(cut, s.lambda, X);
    A.s0[i] = p.s0;
    A.s2[i] = p.s2;
  }
  return A;
}

Axis axis_x2(const LayerSnapshot& s, const Cutoff1D& cut, const std::vector<double>& x2) {
  Axis A;
  A.s0.resize(x2.size());
  A.s2.resize(x2.size());
  for (std::size_t i = 0; i < x2.size(); ++i) {
    const double X = s.b * x2[i];
    if (std::fabs(s.lambda * X) >= cut.support()) {
      A.s0[i] = A.s2[i] = 0.0;
      continue;
    }
    const ProfileValues p = layer_profile(cut, s.lambda, X);
    A.s0[i] = p.s0;
    A.s2[i] = p.s2;
  }
  return A;
}

struct SupSample {
  double total = 0, own = 0, older = 0;
};

/// Sups over the union of the moving grids of layers 1..n at one time.
SupSample omega_sups(const std::vector<LayerSnapshot>& snaps, int n, const Cutoff1D& cut,
                     double shift, int cells_per_half_pi) {
  SupSample out;
  const double dX = 0.5 * std::numbers::pi / cells_per_half_pi;
  for (int m = 1; m <= n; ++m) {
    const LayerSnapshot& g = snaps[m - 1];
    if (g.B == 0.0) continue;
    const int K = static_cast<int>(std::ceil(cut.support() / g.lambda / dX));
    std::vector<double> x1(2 * K + 1), x2(2 * K + 1);
    for (int k = -K; k <= K; ++k) {
      x1[k + K] = (g.c - shift) + k * dX / g.a;
      x2[k + K] = k * dX / g.b;
    }
    std::vector<Axis> A1, A2;
    std::vector<double> wa, wb;
    for (int l = 1; l <= n; ++l) {
      const LayerSnapshot& s = snaps[l - 1];
      A1.push_back(axis_x1(s, cut, shift, x1));
      A2.push_back(axis_x2(s, cut, x2));
      wa.push_back(-s.B * s.a * s.a);
      wb.push_back(-s.B * s.b * s.b);
    }
    const std::size_t M = x1.size();
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t i = 0; i < M; ++i) {
        double older = 0.0, own = 0.0;
        for (int l = 0; l < n; ++l) {
          if (wa[l] == 0.0) continue;
          const double w = wa[l] * A1[l].s2[i] * A2[l].s0[j] + wb[l] * A1[l].s0[i] * A2[l].s2[j];
          if (l == n - 1)
            own = w;
          else
            older += w;
        }
        out.total = std::max(out.total, std::fabs(older + own));
        out.own = std::max(out.own, std::fabs(own));
        out.older = std::max(out.older, std::fabs(older));
      }
  }
  return out;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size() - 1;
  double s = f.front() + f.back();
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

}  // namespace

std::vector<MonitorRow> blowup_monitor(const FieldStack& stack, const MonitorOptions& opt) {
  const Dynamics& dyn = stack.dynamics();
  const auto& sched = dyn.schedule();
  const int M = opt.time_intervals + (opt.time_intervals % 2);
  std::vector<MonitorRow> rows;
  for (int n = 1; n <= dyn.layers(); ++n) {
    MonitorRow row;
    row.n = n;
    row.t0 = sched[n - 1];
    row.t1 = sched[n];
    const double h = (row.t1 - row.t0) / M;
    std::vector<double> tot(M + 1), own(M + 1), older(M + 1), closed(M + 1), peak(M + 1);
    parallel_for(static_cast<std::size_t>(M + 1), [&](std::size_t i) {
      const double t = row.t0 + static_cast<double>(i) * h;
      const auto snaps = dyn.snapshot_all(t);
      const SupSample s = omega_sups(snaps, n, stack.cutoff(), stack.shift(), opt.cells_per_half_pi);
      const LayerSnapshot& L = snaps[n - 1];
      tot[i] = s.total;
      own[i] = s.own;
      older[i] = s.older;
      closed[i] = L.B * (L.a * L.a + L.b * L.b);
      // moving coordinates (pi/2, pi/2) mapped back to the plane
      const double q = 0.5 * std::numbers::pi;
      const Vec2 x{L.c - stack.shift() + q / L.a, q / L.b};
      peak[i] = L.B == 0.0 ? 0.0 : std::fabs(eval_layer(L, stack.cutoff(), x, stack.shift()).omega);
    });
    for (int i = 0; i <= M; ++i)
      if (closed[i] > 0.0) row.plateau_ratio_max = std::max(row.plateau_ratio_max, own[i] / closed[i]);
    row.I = simpson(tot, h);
    row.I_plus = simpson(own, h);
    row.I_minus = simpson(older, h);
    row.I_plus_closed = simpson(closed, h);
    row.I_plus_peak = simpson(peak, h);
    // Q = int_{t_n}^{t_n + 3/4 (1 - t_n)} h b / int_{t_n}^1 h b
    const ActivityBump& bump = dyn.bump(n);
    const double tq = std::min(row.t0 + 0.75 * (1.0 - row.t0), row.t1);
    const int Mq = 2048;
    auto hb_integral = [&](double a, double b) {
      std::vector<double> v(Mq + 1);
      const double dh = (b - a) / Mq;
      for (int i = 0; i <= Mq; ++i) {
        const double t = a + i * dh;
        v[i] = bump(t) * dyn.snapshot(n, t).b;
      }
      return simpson(v, dh);
    };
    const double full = hb_integral(row.t0, row.t1);
    row.Q = full > 0.0 ? hb_integral(row.t0, tq) / full : 0.0;
    row.q_at_least_half = row.Q >= 0.5;
    rows.push_back(row);
  }
  return rows;
}

void write_monitor_csv(const std::vector<MonitorRow>& rows, std::ostream& os) {
  os << std::setprecision(17)
     << "n,t0,t1,I,I_plus,I_minus,I_plus_peak,I_plus_closed,Q,q_at_least_half,"
        "plateau_ratio_max\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.t0 << ',' << r.t1 << ',' << r.I << ',' << r.I_plus << ',' << r.I_minus
       << ',' << r.I_plus_peak << ',' << r.I_plus_closed << ',' << r.Q << ',' << (r.q_at_least_half ? 1 : 0) << ','
       << r.plateau_ratio_max << '\n';
}

// ---------------------------------------------------------------------------
// Support tracker

std::vector<SupportRow> support_tracker(const FieldStack& stack, const std::vector<double>& times,
                                        int cells_per_axis) {
  const Dynamics& dyn = stack.dynamics();
  const auto& sched = dyn.schedule();
  const Cutoff1D& cut = stack.cutoff();
  std::vector<SupportRow> rows(times.size());
  parallel_for(times.size(), [&](std::size_t q) {
    SupportRow& row = rows[q];
    row.t = times[q];
    row.epoch = 0;
    for (int n = 1; n <= dyn.layers(); ++n)
      if (row.t >= sched[n - 1] && row.t < sched[n]) row.epoch = n;
    const auto snaps = dyn.snapshot_all(row.t);
    for (const LayerSnapshot& s : snaps) {
      if (s.D == 0.0) continue;
      const Box b = layer_box(s, stack.shift());
      row.box_radius = std::max(row.box_radius, std::hypot(std::fabs(b.cx) + b.hx, b.hy));
      const double R = cut.support() / s.lambda;
      const double dX = 2.0 * R / (cells_per_axis - 1);
      std::vector<double> r1(cells_per_axis), x1(cells_per_axis), x2(cells_per_axis);
      std::vector<ProfileValues> P1(cells_per_axis), P2(cells_per_axis);
      for (int k = 0; k < cells_per_axis; ++k) {
        const double X = -R + k * dX;
        P1[k] = layer_profile(cut, s.lambda, X);
        P2[k] = P1[k];
        x1[k] = (s.c - stack.shift()) + X / s.a;
        x2[k] = X / s.b;
      }
      for (int j = 0; j < cells_per_axis; ++j)
        for (int i = 0; i < cells_per_axis; ++i) {
          const double rho = s.D * P1[i].s0 * P2[j].r0;
          if (std::fabs(rho) > 1e-14)
            row.radius = std::max(row.radius, std::hypot(x1[i], x2[j]));
        }
    }
  });
  return rows;
}

void write_support_csv(const std::vector<SupportRow>& rows, std::ostream& os) {
  os << std::setprecision(17) << "t,epoch,radius,box_radius\n";
  for (const auto& r : rows)
    os << r.t << ',' << r.epoch << ',' << r.radius << ',' << r.box_radius << '\n';
}

void write_check_csv(const std::vector<CheckRow>& rows, std::ostream& os) {
  os << std::setprecision(17) << "check,t,h,value,threshold,asserted,pass\n";
  for (const auto& r : rows)
    os << r.check << ',' << r.t << ',' << r.h << ',' << r.value << ',' << r.threshold << ','
       << (r.asserted ? 1 : 0) << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace blowup
