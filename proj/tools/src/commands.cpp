#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "blowup/dynamics.hpp"
#include "blowup/elliptic.hpp"
#include "blowup/fieldnorms.hpp"
#include "blowup/fields.hpp"
#include "blowup/fixedpoint.hpp"
#include "blowup/parallel.hpp"
#include "blowup/scales.hpp"
#include "manifest.hpp"

namespace blowup::cli {
namespace fs = std::filesystem;
namespace {

void say(const Context& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream f(fs::path(dir) / name, std::ios::binary);
  if (!f) throw IoError("cannot write " + (fs::path(dir) / name).string());
  f << std::setprecision(17);
  return f;
}

void finish(const Context& ctx) {
  {
    std::ofstream f = open_out(ctx.out, kConfigName);
    ctx.cfg.write(f);
  }
  write_version_stamp(ctx.out);
  write_manifest(ctx.out);
}

DynamicsOptions dynamics_options(const RunConfig& c) {
  DynamicsOptions o;
  o.steps_per_epoch = c.ode_steps_per_epoch;
  o.halving_tol = c.ode_halving_tol;
  o.check_halving = true;
  return o;
}

FixedPointConfig fixed_point_config(const RunConfig& c, const FieldStack& stack) {
  FixedPointConfig f;
  f.N = c.fp_N;
  f.half_width = c.fp_half_width > 0 ? c.fp_half_width : 1.45 * layer_one_extent(stack);
  f.samples_per_epoch = c.samples_per_epoch;
  f.epsilon = c.phi_epsilon;
  f.phi_lip_grid = c.phi_lip_grid;
  return f;
}

/// Middle of every epoch (the last one capped at t_end).
std::vector<double> epoch_midpoints(const Dynamics& dyn) {
  std::vector<double> t;
  const auto& s = dyn.schedule();
  for (int n = 1; n <= dyn.layers(); ++n) t.push_back(std::min(0.5 * (s[n - 1] + s[n]), dyn.t_end()));
  return t;
}

void write_schedule(const ConstructionParams& p, std::ostream& os) {
  os << std::setprecision(17)
     << "n,t_n,log_one_minus_t_n,log_lambda_n,log_M_n,log_ab_endpoint,kbar_uniform_bound\n";
  const std::vector<double> logs = log_schedule(p);
  for (int n = 1; n <= p.n_max + 1; ++n) {
    const double l = logs[n - 1];
    os << n << ',' << 0.0 - std::expm1(l) << ',' << l << ',' << lambda_n(p, n).log_mag << ','
       << m_n(p, n).log_mag << ',' << ab_endpoint(p, n).first.log_mag << ','
       << kbar_deviation_bound(p, n, 0.5).uniform << '\n';
  }
}

void write_kbar_profiles(const ConstructionParams& p, std::ostream& os) {
  os << std::setprecision(17) << "that";
  for (int n = 1; n <= p.n_max; ++n) os << ",kbar_" << n;
  os << ",tent\n";
  for (int i = 0; i <= 1000; ++i) {
    const double th = i / 1000.0;
    os << th;
    for (int n = 1; n <= p.n_max; ++n) os << ',' << kbar_n(p, n, th);
    os << ',' << p.k_max * (1.0 - std::fabs(1.0 - 2.0 * th)) << '\n';
  }
}

void dump_fields(const FieldStack& stack, const std::vector<double>& times, int N, double L,
                 const std::string& dir) {
  const Grid2D g = Grid2D::centered(N, L);
  for (std::size_t q = 0; q < times.size(); ++q) {
    const double t = times[q];
    const FieldSlice fs = stack.slice(t);
    ScalarField2D psi(g), rho(g), omega(g), fom(g);
    parallel_for(g.size(), [&](std::size_t idx) {
      const Vec2 x = g.point(static_cast<int>(idx % g.nx), static_cast<int>(idx / g.nx));
      const PointFields f = fs.eval(x);
      psi.v[idx] = f.psi;
      rho.v[idx] = f.rho;
      omega.v[idx] = f.omega;
      fom.v[idx] = fs.f_omega(x);
    });
    const std::string tag = "_t" + std::to_string(q);
    write_grid_dump(psi, t, "psi", dir, "field_psi" + tag);
    write_grid_dump(rho, t, "rho", dir, "field_rho" + tag);
    write_grid_dump(omega, t, "omega", dir, "field_omega" + tag);
    write_grid_dump(fom, t, "f_omega", dir, "field_f_omega" + tag);
  }
}

void add(std::vector<CheckRow>& rows, const std::string& id, double t, double h, double value,
         double threshold, bool pass, bool asserted = true) {
  CheckRow r;
  r.check = id;
  r.t = t;
  r.h = h;
  r.value = value;
  r.threshold = threshold;
  r.pass = pass;
  r.asserted = asserted;
  rows.push_back(r);
}

/// Residuals must shrink level to level and the finest ratio must reach `ratio`.
/// Coarser ratios are reported only: layer-1 content sits at k h ~ 1 on the
/// coarse levels, so they are pre-asymptotic.
void add_ladder(std::vector<CheckRow>& rows, const std::string& id,
                const std::vector<ResidualReport>& ladder, double ratio, bool asserted = true) {
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    const ResidualReport& r = ladder[l];
    const bool finest = l + 1 == ladder.size();
    const bool shrinking = l == 0 || r.residual < ladder[l - 1].residual;
    const bool pass = shrinking && (!finest || l == 0 || r.ratio >= ratio);
    add(rows, id + (finest ? "_finest" : "_level" + std::to_string(l)), r.t, r.h,
        l == 0 ? r.residual : r.ratio, finest ? ratio : 1.0, pass, asserted);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_layers(const Context& ctx) {
  ctx.cfg.validate();
  const ConstructionParams p = ctx.cfg.params();
  ensure_dir(ctx.out);
  {
    std::ofstream f = open_out(ctx.out, "schedule.csv");
    write_schedule(p, f);
  }
  {
    std::ofstream f = open_out(ctx.out, "kbar_profiles.csv");
    write_kbar_profiles(p, f);
  }
  if (ctx.cfg.preset == "schedule-only") {
    say(ctx, "schedule-only preset: log-domain schedule written, no trajectories");
    finish(ctx);
    return kOk;
  }
  (void)schedule(p);  // double-precision schedule needed for trajectories
  HalvingReport halving;
  const Dynamics dyn = integrate_layers(p, dynamics_options(ctx.cfg), &halving);
  say(ctx, "integrated " + std::to_string(dyn.layers()) + " layers");
  write_layer_csvs(dyn, ctx.out);

  const SeparationReport sep = layer_separation_check(dyn);
  const FieldStack stack = FieldStack::recentered(dyn);
  const BlowupPoint bp = blowup_point(dyn, stack.shift());
  {
    std::ofstream f = open_out(ctx.out, "layers_summary.csv");
    f << "key,value\n";
    f << "t_end," << dyn.t_end() << '\n';
    f << "step_halving_max_rel_change," << halving.max_rel_change << '\n';
    f << "separation_max_ratio," << sep.max_ratio << '\n';
    f << "separation_violated," << (sep.violated ? 1 : 0) << '\n';
    f << "recenter_shift," << stack.shift() << '\n';
    f << "blowup_point_x1," << bp.x1 << '\n';
    f << "blowup_point_bound," << bp.error_bound << '\n';
    f << "layer_one_extent," << layer_one_extent(stack) << '\n';
  }
  const std::vector<double> times =
      ctx.cfg.dump_times.empty() ? epoch_midpoints(dyn) : ctx.cfg.dump_times;
  for (double t : times)
    if (t > dyn.t_end()) throw ConfigError("dump time beyond t_end");
  const double L = ctx.cfg.fp_half_width > 0 ? ctx.cfg.fp_half_width : 1.45 * layer_one_extent(stack);
  dump_fields(stack, times, ctx.cfg.dump_N, L, ctx.out);
  finish(ctx);
  return kOk;
}

int cmd_phi(const Context& ctx) {
  ctx.cfg.validate();
  ensure_dir(ctx.out);
  const ConstructionParams p = ctx.cfg.params();
  double support = PhiPotential::kSupport;  // natural scale unless a desk stack is available
  std::optional<Dynamics> dyn;
  if (ctx.cfg.preset != "schedule-only") {
    dyn.emplace(integrate_layers(p, dynamics_options(ctx.cfg), nullptr));
    support = default_phi_support(FieldStack::recentered(*dyn));
  }
  const PhiPotential phi = build_phi(ctx.cfg.phi_epsilon, support, ctx.cfg.phi_lip_grid);
  const double bound = 0.5 * (1.0 + ctx.cfg.phi_epsilon);
  // evenness on a symmetric grid
  const Grid2D g = Grid2D::centered(256, phi.support_half_width() * 1.05);
  ScalarField2D v(g);
  double even = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) v.at(i, j) = phi.value(g.point(i, j));
  for (int j = 0; j < g.ny; ++j) {
    const int m = g.mirror_j(j);
    if (m < 0) continue;
    for (int i = 0; i < g.nx; ++i) even = std::max(even, std::fabs(v.at(i, j) - v.at(i, m)));
  }
  {
    std::ofstream f = open_out(ctx.out, "phi.csv");
    f << "key,value\n";
    f << "epsilon," << phi.epsilon << '\n';
    f << "mu_phi," << phi.mu_phi << '\n';
    f << "A," << phi.A << '\n';
    f << "scale," << phi.scale << '\n';
    f << "support_half_width," << phi.support_half_width() << '\n';
    f << "phi_at_origin," << phi.value({0.0, 0.0}) << '\n';
    f << "lip_grid," << phi.lip_grid << '\n';
    f << "certified_lip," << phi.certified_lip << '\n';
    f << "closed_form_lip," << phi.closed_form_lip << '\n';
    f << "lip_bound," << bound << '\n';
    f << "evenness_defect," << even << '\n';
  }
  write_grid_dump(v, 0.0, "Phi", ctx.out, "field_Phi");
  finish(ctx);
  const bool ok = std::fabs(phi.value({0.0, 0.0}) - 1.0) <= 1e-10 && phi.certified_lip <= 0.75 &&
                  even == 0.0;
  return ok ? kOk : kCheckFailed;
}

int cmd_poisson_bench(const Context& ctx) {
  ctx.cfg.validate();
  ensure_dir(ctx.out);
  const RunConfig& c = ctx.cfg;
  const BenchReport rep =
      estimate_bench(c.bench_diams, c.bench_N, c.bench_half_width, c.bench_p, c.bench_q, c.bench_r,
                     c.bench_alpha);
  {
    std::ofstream f = open_out(ctx.out, "poisson_bench.csv");
    rep.write_csv(f);
  }
  finish(ctx);
  const bool ok = std::fabs(rep.exponent_u - rep.predicted_u) <= 0.1 &&
                  std::fabs(rep.exponent_grad - rep.predicted_grad) <= 0.1;
  return ok ? kOk : kCheckFailed;
}

int cmd_fixedpoint(const Context& ctx) {
  ctx.cfg.validate();
  if (ctx.cfg.preset == "schedule-only")
    throw ConfigError("fixedpoint needs grid fields; the schedule-only preset has none");
  ensure_dir(ctx.out);
  const RunConfig& c = ctx.cfg;
  const ConstructionParams p = c.params();
  const Dynamics dyn = integrate_layers(p, dynamics_options(c), nullptr);
  const FieldStack stack = FieldStack::recentered(dyn);
  const PhiPotential phi = build_phi(c.phi_epsilon, default_phi_support(stack), c.phi_lip_grid);
  const FixedPointProblem prob(stack, phi, fixed_point_config(c, stack));
  say(ctx, "lattice " + std::to_string(prob.grid().nx) + "^2, " + std::to_string(prob.size()) +
               " time slices");

  const ContractionTable tab =
      contraction_search(prob, default_rho_ladder(prob, c.ladder_rungs), c.contraction_pairs, c.seed);
  {
    std::ofstream f = open_out(ctx.out, "contraction.csv");
    tab.write_csv(f);
  }
  double rho_bar = c.rho_bar;
  if (rho_bar <= 0.0) {
    if (!tab.selected) {
      say(ctx, "no ladder value of rho_bar gives a contraction ratio <= 0.9");
      finish(ctx);
      return kCheckFailed;
    }
    rho_bar = *tab.selected;
  }
  say(ctx, "iterating at rho_bar = " + std::to_string(rho_bar));
  const FixedPointState st = iterate_to_fixed_point(prob, rho_bar, c.banach_tol, c.banach_max_iter);
  {
    std::ofstream f = open_out(ctx.out, "iteration_history.csv");
    st.write_history_csv(f);
  }
  {
    std::ofstream f = open_out(ctx.out, "g_trace.csv");
    st.write_g_csv(f, prob);
  }
  // converged a* at the last slice of each epoch
  for (std::size_t k = 0; k < prob.size(); ++k) {
    const bool last = k + 1 == prob.size() || prob.slices()[k + 1].epoch != prob.slices()[k].epoch;
    if (!last) continue;
    ScalarField2D a1(prob.grid()), a2(prob.grid());
    a1.v = st.a[k].v1;
    a2.v = st.a[k].v2;
    const std::string tag = "_e" + std::to_string(prob.slices()[k].epoch);
    write_grid_dump(a1, prob.slices()[k].t, "a_star_1", ctx.out, "field_a_star_1" + tag);
    write_grid_dump(a2, prob.slices()[k].t, "a_star_2", ctx.out, "field_a_star_2" + tag);
  }
  const ScreenedReport scr = screened_diagnostics(prob, st, rho_bar, c.screened_tol);
  {
    std::ofstream f = open_out(ctx.out, "screened.csv");
    scr.write_csv(f);
  }
  {
    std::ofstream f = open_out(ctx.out, "fixedpoint_summary.csv");
    f << "key,value\n";
    f << "rho_bar," << rho_bar << '\n';
    f << "iterations," << st.iterations << '\n';
    f << "converged," << (st.converged ? 1 : 0) << '\n';
    f << "fixed_point_defect," << st.fixed_point_defect << '\n';
    f << "apriori_bound," << st.apriori_bound << '\n';
    f << "varpsi_residual_resolved," << st.residual << '\n';
    f << "max_bracket," << st.max_bracket << '\n';
    f << "max_g2," << st.max_g2 << '\n';
    f << "phi_certified_lip," << phi.certified_lip << '\n';
  }
  finish(ctx);
  return st.converged ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

std::vector<CheckRow> verification_checks(const RunConfig& c, bool ablate_g, std::ostream* log) {
  Context lc;
  lc.log = log;
  std::vector<CheckRow> rows;
  const ConstructionParams p = c.params();

  // parameters and schedule
  add(rows, "param_identity_two_thirds", 0, 0, std::fabs(1.0 - p.Lambda - p.k_max - 2.0 / 3.0),
      1e-12, std::fabs(1.0 - p.Lambda - p.k_max - 2.0 / 3.0) <= 1e-12);
  const double id2 = std::fabs(-1.0 + 2.0 * p.Lambda + 3.0 * p.k_max + p.Lambda);
  add(rows, "param_identity_lambda", 0, 0, id2, 1e-12, id2 <= 1e-12);
  const std::vector<double> sched = schedule(p);
  add(rows, "schedule_t1_zero", 0, 0, sched[0], 0.0, sched[0] == 0.0);
  double kb_err = 0.0, kb_mono = 0.0;
  for (int n = 1; n <= p.n_max; ++n) {
    kb_err = std::max({kb_err, std::fabs(kbar_n(p, n, 0.0)), std::fabs(kbar_n(p, n, 1.0)),
                       std::fabs(kbar_n(p, n, 0.5) - p.k_max)});
    if (n < p.n_max)
      for (int i = 0; i <= 1000; ++i)
        kb_mono = std::max(kb_mono, kbar_n(p, n + 1, i / 1000.0) - kbar_n(p, n, i / 1000.0));
  }
  double t_step = 1.0;
  for (std::size_t n = 1; n < sched.size(); ++n) t_step = std::min(t_step, sched[n] - sched[n - 1]);
  add(rows, "schedule_strictly_increasing", 0, 0, t_step, 0.0, t_step > 0.0);
  double dev = -1.0;  // worst |kbar - tent| - bound
  for (int n = 1; n <= p.n_max; ++n)
    for (int i = 0; i <= 1000; ++i) {
      const double th = i / 1000.0;
      const double tent = p.k_max * (1.0 - std::fabs(1.0 - 2.0 * th));
      dev = std::max(dev, std::fabs(kbar_n(p, n, th) - tent) - kbar_deviation_bound(p, n, th).pointwise);
    }
  // the bound is attained as n grows, so only rounding slack is allowed
  add(rows, "kbar_deviation_bound", 0, 0, dev, 1e-14, dev <= 1e-14);
  add(rows, "kbar_endpoints_and_peak", 0, 0, kb_err, 1e-10, kb_err <= 1e-10);
  add(rows, "kbar_monotone_in_n", 0, 0, kb_mono, 0.0, kb_mono <= 0.0);

  // dynamics
  HalvingReport halving;
  const Dynamics dyn = integrate_layers(p, dynamics_options(c), &halving);
  if (log) *log << "dynamics integrated" << std::endl;
  double ab = 0.0, mrel = 0.0;
  for (const LayerState& s : dyn.states()) {
    for (std::size_t i = 0; i < s.t.size(); ++i)
      ab = std::max(ab, std::fabs(s.a[i] * s.b[i] / s.const_ab - 1.0));
    const std::size_t e = s.t.size() - 1;
    mrel = std::max(mrel, std::fabs(s.B[e] * s.a[e] * s.b[e] / s.M - 1.0));
  }
  add(rows, "dynamics_ab_conserved", 0, 0, ab, 1e-9, ab <= 1e-9);
  add(rows, "dynamics_M_identity", dyn.t_end(), 0, mrel, 1e-9, mrel <= 1e-9);
  add(rows, "dynamics_step_halving", 0, 0, halving.max_rel_change, c.ode_halving_tol,
      halving.max_rel_change < c.ode_halving_tol);
  const SeparationReport sep = layer_separation_check(dyn);
  add(rows, "layer_separation", 0, 0, sep.max_ratio, 1.0, !sep.violated);

  const FieldStack stack = FieldStack::recentered(dyn);
  const BlowupPoint bp = blowup_point(dyn, stack.shift());
  add(rows, "blowup_point_at_origin", 1.0, 0, std::fabs(bp.x1), bp.error_bound,
      std::fabs(bp.x1) <= bp.error_bound);
  const double R1 = layer_one_extent(stack);
  const std::vector<double> mids = epoch_midpoints(dyn);

  // symmetry suite on every epoch, consistency on the resolved epoch
  for (double t : mids) {
    const SymmetryReport s = symmetry_suite(stack, t, Grid2D::centered(256, 1.45 * R1));
    add(rows, "symmetry_suite", t, 2.9 * R1 / 256, s.max(), 1e-13, s.max() <= 1e-13);
  }
  {
    std::vector<ConsistencyReport> lad;
    for (int N : c.consistency_sizes) lad.push_back(field_consistency(stack, mids[0], Grid2D::centered(N, R1)));
    for (std::size_t l = 1; l < lad.size(); ++l) {
      const ConsistencyReport &a = lad[l - 1], &b = lad[l];
      const double ratio = std::min({a.u_vs_perp_psi / b.u_vs_perp_psi, a.div_u / b.div_u,
                                     a.omega_vs_curl / b.omega_vs_curl, a.gradu_vs_fd / b.gradu_vs_fd,
                                     a.drho_vs_fd / b.drho_vs_fd});
      add(rows, "field_fd_consistency_ratio", mids[0], b.h, ratio, c.refinement_ratio,
          ratio >= c.refinement_ratio);
    }
  }

  // forces, supports and the monitor
  {
    MonitorOptions mo;
    mo.cells_per_half_pi = c.monitor_cells_per_half_pi;
    mo.time_intervals = c.monitor_time_intervals;
    const std::vector<MonitorRow> mon = blowup_monitor(stack, mo);
    for (std::size_t n = 1; n < mon.size(); ++n)
      add(rows, "monitor_I_increasing", mon[n].t0, 0, mon[n].I / mon[n - 1].I, 1.0,
          mon[n].I > mon[n - 1].I);
    for (const MonitorRow& r : mon) {
      const double rel = std::fabs(r.I_plus_peak - r.I_plus_closed) / r.I_plus_closed;
      add(rows, "monitor_I_plus_peak_vs_closed_" + std::to_string(r.n), r.t0, 0, rel, 1e-6, rel <= 1e-6);
      add(rows, "monitor_I_plus_sup_ge_closed_" + std::to_string(r.n), r.t0, 0,
          r.I_plus / r.I_plus_closed, 1.0, r.I_plus >= r.I_plus_closed * (1.0 - 1e-12));
      add(rows, "monitor_Q_" + std::to_string(r.n), r.t0, 0, r.Q, 0.5, r.q_at_least_half, false);
    }
  }
  {
    std::vector<double> times;
    for (int n = 1; n <= dyn.layers(); ++n)
      for (int k = 0; k < 16; ++k) {
        const double t = sched[n - 1] + (k + 0.5) / 16.0 * (sched[n] - sched[n - 1]);
        if (t <= dyn.t_end()) times.push_back(t);
      }
    const std::vector<SupportRow> sup = support_tracker(stack, times, c.support_cells);
    double excess = 0.0;
    std::vector<double> per_epoch(dyn.layers() + 1, 0.0);
    for (const SupportRow& r : sup) {
      excess = std::max(excess, r.radius - r.box_radius);
      per_epoch[r.epoch] = std::max(per_epoch[r.epoch], r.radius);
    }
    add(rows, "support_inside_layer_box", 0, 0, excess, 0.0, excess <= 0.0);
    for (int n = 2; n <= dyn.layers(); ++n)
      add(rows, "support_shrinks_across_epochs", sched[n - 1], 0, per_epoch[n] / per_epoch[n - 1], 1.0,
          per_epoch[n] <= per_epoch[n - 1]);
  }
  {
    std::vector<ResidualReport> mass;
    for (int N : c.mass_sizes) {
      double identity = 0.0;
      mass.push_back(mass_equation_check(stack, mids[0], Grid2D::centered(N, 1.45 * R1),
                                         c.rho_bar > 0 ? c.rho_bar : 1.0, &identity));
      add(rows, "mass_forcing_identity", mids[0], mass.back().h, identity, 1e-9, identity <= 1e-9);
    }
    fill_refinement_ratios(mass);
    add_ladder(rows, "mass_equation_refinement", mass, c.refinement_ratio);
  }
  if (log) *log << "field checks done" << std::endl;

  // fixed point
  const PhiPotential phi = build_phi(c.phi_epsilon, default_phi_support(stack), c.phi_lip_grid);
  add(rows, "phi_origin_value", 0, 0, std::fabs(phi.value({0, 0}) - 1.0), 1e-10,
      std::fabs(phi.value({0, 0}) - 1.0) <= 1e-10);
  add(rows, "phi_lipschitz", 0, 0, phi.certified_lip, 0.75, phi.certified_lip <= 0.75);
  const FixedPointConfig fc = fixed_point_config(c, stack);
  const FixedPointProblem prob(stack, phi, fc);
  const ContractionTable tab =
      contraction_search(prob, default_rho_ladder(prob, c.ladder_rungs), c.contraction_pairs, c.seed);
  double rho_bar = c.rho_bar;
  if (rho_bar <= 0.0) rho_bar = tab.selected ? *tab.selected : tab.rows.back().rho_bar;
  double search_ratio = 0.0;
  for (const auto& r : tab.rows)
    if (r.rho_bar == rho_bar) search_ratio = r.max_ratio;
  add(rows, "contraction_ratio_at_selected_rho", 0, 0, search_ratio, 0.9,
      tab.selected.has_value() && search_ratio <= 0.9);
  if (log) *log << "contraction search done, rho_bar = " << rho_bar << std::endl;

  const FixedPointState st = iterate_to_fixed_point(prob, rho_bar, c.banach_tol, c.banach_max_iter);
  double worst_ratio = 0.0;
  for (double r : st.ratios) worst_ratio = std::max(worst_ratio, r);
  add(rows, "banach_converged", 0, 0, st.distances.back(), c.banach_tol, st.converged);
  add(rows, "banach_step_ratio", 0, 0, worst_ratio, 0.9, worst_ratio <= 0.9);
  {
    std::mt19937_64 rng(c.seed + 1);
    const TimeField start = prob.random_admissible(rng, 10.0);
    const FixedPointState st2 =
        iterate_to_fixed_point(prob, rho_bar, c.banach_tol, c.banach_max_iter, &start);
    const double d = lattice_distance(st.a, st2.a);
    add(rows, "banach_unique_fixed_point", 0, 0, d, 10 * c.banach_tol, d <= 10 * c.banach_tol);
  }
  double scale = 1.0;
  for (const Vec2& g : st.g) scale = std::max(scale, std::fabs(g.x));
  add(rows, "cancellation_bracket", 0, 0, st.max_bracket, 1e-8, st.max_bracket <= 1e-8);
  add(rows, "g2_zero", 0, 0, st.max_g2, 1e-14 * scale, st.max_g2 <= 1e-14 * scale);
  double sym = 0.0;
  for (double s : st.symmetry_defects) sym = std::max(sym, s);
  add(rows, "iterate_parity_defect", 0, 0, sym, 1e-8 * std::max(1.0, lattice_sup(st.a)),
      sym <= 1e-8 * std::max(1.0, lattice_sup(st.a)));
  if (log) *log << "fixed point done in " << st.iterations << " iterations" << std::endl;

  // end-to-end vorticity residual
  {
    std::vector<double> times = c.euler_times;
    if (times.empty()) times.push_back(mids[0]);
    const EulerLadder lad =
        euler_refinement(stack, phi, fc, c.euler_sizes, rho_bar, c.residual_tol, c.banach_max_iter, times);
    for (std::size_t q = 0; q < times.size(); ++q) {
      add_ladder(rows, ablate_g ? "euler_vorticity_refinement_ablate_g" : "euler_vorticity_refinement",
                 ablate_g ? lad.ablated[q] : lad.normal[q], c.refinement_ratio);
      if (!ablate_g)
        add(rows, "euler_ablate_g_does_not_refine", times[q], lad.ablated[q].back().h,
            lad.ablated[q].back().ratio, c.refinement_ratio,
            lad.ablated[q].back().ratio < c.refinement_ratio, false);
    }
  }
  if (log) *log << "residual ladders done" << std::endl;

  // fieldnorms property suite
  {
    std::vector<double> x, fv, gv;
    const int M = 1000;
    for (int i = -M; i <= M; ++i) {
      const double xi = static_cast<double>(i) / M;
      x.push_back(xi);
      fv.push_back(std::pow(std::fabs(xi), 0.6));
      gv.push_back(i == 0 ? 0.0 : std::pow(std::fabs(xi), -0.5));
    }
    const Samples f = to_samples_1d(x, fv), g = to_samples_1d(x, gv);
    SingularProductInput in;
    in.beta = 0.6;
    in.sigma = 0.5;
    in.eta = 0.55;
    in.R = 0.5;
    const auto [K0, Kb] = fit_annulus_constants(g, in);
    in.K0 = K0;
    in.K_bs = Kb;
    const SingularProductResult sp = singular_product_extend(f, g, in);
    // |x|^0.1 has C^0.1 seminorm exactly 1 (pair with the origin)
    add(rows, "singular_product_holder", 0, 0, std::fabs(sp.measured_holder - 1.0), 0.02,
        std::fabs(sp.measured_holder - 1.0) <= 0.02);
    add(rows, "singular_product_certified", 0, 0, sp.measured_holder / sp.certified_holder, 1.0,
        sp.measured_holder <= sp.certified_holder && sp.measured_sup <= sp.certified_sup);
  }
  return rows;
}

int cmd_verify(const Context& ctx) {
  ctx.cfg.validate();
  if (ctx.cfg.preset == "schedule-only")
    throw ConfigError("verify needs grid fields; the schedule-only preset has none");
  // prior artifacts must be intact
  if (fs::exists(ctx.out)) {
    const ManifestCheck mc = check_manifest(ctx.out);
    if (!mc.ok()) {
      std::string msg = "checksum failure:";
      for (const auto& n : mc.mismatched) msg += " " + n;
      for (const auto& n : mc.missing) msg += " missing:" + n;
      throw IoError(msg);
    }
    for (const auto& e : fs::directory_iterator(ctx.out)) {
      const fs::path path = e.path();
      if (path.extension() != ".bin") continue;
      (void)read_grid_dump(ctx.out, path.stem().string());
    }
  }
  ensure_dir(ctx.out);
  const std::vector<CheckRow> rows = verification_checks(ctx.cfg, ctx.ablate_g, ctx.log);
  {
    std::ofstream f = open_out(ctx.out, ctx.ablate_g ? "verify_report_ablate_g.csv" : "verify_report.csv");
    write_check_csv(rows, f);
  }
  finish(ctx);
  std::vector<std::string> failed;
  for (const CheckRow& r : rows)
    if (r.asserted && !r.pass) failed.push_back(r.check);
  if (failed.empty()) return kOk;
  // reported even under --quiet
  std::cerr << "failed checks:";
  for (const auto& f : failed) std::cerr << ' ' << f;
  std::cerr << std::endl;
  return kCheckFailed;
}

int run_guarded(int (*cmd)(const Context&), const Context& ctx, std::ostream& err) {
  try {
    return cmd(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParamError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ScheduleError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const ConvergenceError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const NonContractionError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const QuadratureError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const PaddingError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const DivergenceError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::runtime_error& e) {
    // the library raises bare runtime_error only for file I/O and malformed dumps
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace blowup::cli
