#include "blowup/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace blowup {

double ActivityBump::operator()(double t) const {
  const double s = (t - t_n) / (t_np1 - t_n);
  if (!(s > 0.0 && s < 1.0)) return 0.0;
  return std::exp(4.0 - 1.0 / (s * (1.0 - s)));
}

double ActivityBump::derivative(double t) const {
  const double s = (t - t_n) / (t_np1 - t_n);
  if (!(s > 0.0 && s < 1.0)) return 0.0;
  const double q = s * (1.0 - s);
  return std::exp(4.0 - 1.0 / q) * (1.0 - 2.0 * s) / (q * q) / (t_np1 - t_n);
}

double pendulum_profile(const ConstructionParams& p, int n, double that) {
  if (n < 2) throw ParamError("pendulum_profile: n must be >= 2");
  const double A = arccosh_of_exp(p.k_max * growth_exponent(n, p.gamma) * p.lnC());
  return std::asin(std::exp(-log_cosh(A * (1.0 - 2.0 * that))));
}

Dynamics::Dynamics(const ConstructionParams& p, int steps_per_epoch)
    : p_(p), steps_(steps_per_epoch) {
  if (steps_ < 1) throw ParamError("steps_per_epoch must be positive");
  sched_ = blowup::schedule(p_);
  const double lnC = p_.lnC();
  for (int n = 1; n <= p_.n_max; ++n) {
    bumps_.push_back({sched_[n - 1], sched_[n]});
    Layer L;
    L.en = growth_exponent(n, p_.gamma);
    L.b1 = std::exp(L.en * lnC);
    L.ab = std::exp(2.0 * L.en * lnC);
    L.M = m_n(p_, n).to_double();
    L.lambda = lambda_n(p_, n).to_double();
    layers_.push_back(L);
  }
  bounds_ = sched_;
  bounds_.push_back(1.0);
  for (int pass = 1; pass <= p_.n_max; ++pass) integrate(pass);
}

double Dynamics::t_end() const {
  const int n = p_.n_max;
  return sched_[n] - 1e-3 * (sched_[n] - sched_[n - 1]);
}

double Dynamics::b_of(int m, double L) const {
  const Layer& l = layers_[m - 1];
  return l.b1 * std::exp(L - l.L1);
}

double Dynamics::B_of(int m, double a, double b, double K) const {
  const Layer& l = layers_[m - 1];
  return 2.0 * l.M / (a * a + b * b) * (K / l.K1);
}

void Dynamics::rhs(int active, double t, const double* y, double* dy) const {
  for (int n = 1; n <= active; ++n) {
    const double cn = y[3 * (n - 1)];
    double ssin = 0.0, scos = 0.0;
    for (int m = 1; m < n; ++m) {
      const double bm = b_of(m, y[3 * (m - 1) + 1]);
      const double am = layers_[m - 1].ab / bm;
      const double Bm = B_of(m, am, bm, y[3 * (m - 1) + 2]);
      const double arg = am * (cn - y[3 * (m - 1)]);
      ssin += Bm * bm * std::sin(arg);
      scos += Bm * am * bm * std::cos(arg);
    }
    dy[3 * (n - 1)] = ssin;
    dy[3 * (n - 1) + 1] = scos;
    dy[3 * (n - 1) + 2] = bumps_[n - 1](t) * std::exp(y[3 * (n - 1) + 1]);
  }
}

void Dynamics::rk4_step(int active, double t, double h, const double* y, double* out) const {
  const int d = 3 * active;
  std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
  rhs(active, t, y, k1.data());
  for (int i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(active, t + 0.5 * h, tmp.data(), k2.data());
  for (int i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(active, t + 0.5 * h, tmp.data(), k3.data());
  for (int i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(active, t + h, tmp.data(), k4.data());
  for (int i = 0; i < d; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void Dynamics::integrate(int upto) {
  const int dim = 3 * p_.n_max;
  std::vector<double> y(dim, 0.0), next(dim, 0.0);
  node_t_.clear();
  node_seg_.clear();
  node_y_.clear();
  const int nseg = static_cast<int>(bounds_.size()) - 1;
  for (int s = 0; s < nseg; ++s) {
    const int active = std::min(s + 1, upto);
    const double t0 = bounds_[s], t1 = bounds_[s + 1];
    if (s + 1 <= upto && s + 1 <= p_.n_max) {
      // activation of layer n = s+1: a_{n-1}(1)(c_n - c_{n-1}) = arcsin(C^{-k_max e_n})
      const int n = s + 1;
      const double prev_c = n >= 2 ? y[3 * (n - 2)] : 0.0;
      const double a_prev_end = std::exp(growth_exponent(n - 1, p_.gamma) * p_.lnC());
      const double shift = std::asin(std::exp(-p_.k_max * layers_[n - 1].en * p_.lnC()));
      y[3 * (n - 1)] = prev_c + shift / a_prev_end;
      y[3 * (n - 1) + 1] = 0.0;
      y[3 * (n - 1) + 2] = 0.0;
    }
    const double h = (t1 - t0) / steps_;
    for (int i = 0; i < steps_; ++i) {
      const double t = t0 + i * h;
      node_t_.push_back(t);
      node_seg_.push_back(s);
      node_y_.push_back(y);
      rk4_step(active, t, h, y.data(), next.data());
      std::copy(next.begin(), next.begin() + 3 * active, y.begin());
    }
  }
  node_t_.push_back(1.0);
  node_seg_.push_back(nseg - 1);
  node_y_.push_back(y);
  Layer& l = layers_[upto - 1];
  l.L1 = y[3 * (upto - 1) + 1];
  l.K1 = y[3 * (upto - 1) + 2];
  l.closed = true;
}

void Dynamics::state_at(double t, int& active, std::vector<double>& y) const {
  if (t < 0.0 || t > 1.0) throw std::out_of_range("Dynamics: time outside [0, 1]");
  auto it = std::upper_bound(node_t_.begin(), node_t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - node_t_.begin());
  i = i == 0 ? 0 : i - 1;
  // at a segment boundary the later node carries the activated layer
  const int s = node_seg_[i];
  active = std::min(s + 1, p_.n_max);
  const double dt = t - node_t_[i];
  y = node_y_[i];
  if (dt > 0.0) {
    std::vector<double> out(y.size(), 0.0);
    rk4_step(active, node_t_[i], dt, y.data(), out.data());
    std::copy(out.begin(), out.begin() + 3 * active, y.begin());
  }
}

LayerSnapshot Dynamics::make_snapshot(int n, int active, double t,
                                      const std::vector<double>& y) const {
  LayerSnapshot s;
  const Layer& l = layers_[n - 1];
  s.lambda = l.lambda;
  if (n > active) {
    // layer not yet born: frame frozen at its birth values, amplitude zero
    s.active = false;
    s.b = l.b1 * std::exp(-l.L1);
    s.a = l.ab / s.b;
    return s;
  }
  s.active = true;
  std::vector<double> dy(3 * active, 0.0);
  rhs(active, t, y.data(), dy.data());
  const double L = y[3 * (n - 1) + 1], K = y[3 * (n - 1) + 2];
  s.c = y[3 * (n - 1)];
  s.b = b_of(n, L);
  s.a = l.ab / s.b;
  s.B = B_of(n, s.a, s.b, K);
  s.dc = dy[3 * (n - 1)];
  const double dL = dy[3 * (n - 1) + 1];
  s.db = s.b * dL;
  s.da = -s.a * dL;
  const double q = s.a * s.a + s.b * s.b;
  s.dB = 2.0 * l.M / q * (dy[3 * (n - 1) + 2] / l.K1) -
         s.B * (2.0 * s.a * s.da + 2.0 * s.b * s.db) / q;
  const double H = l.b1 * std::exp(-l.L1) * l.K1;
  s.D = -2.0 * l.M * bumps_[n - 1](t) / H;
  s.dD = -2.0 * l.M * bumps_[n - 1].derivative(t) / H;
  return s;
}

LayerSnapshot Dynamics::snapshot(int n, double t) const {
  if (n < 1 || n > p_.n_max) throw std::out_of_range("Dynamics::snapshot: bad layer");
  int active = 0;
  std::vector<double> y;
  state_at(t, active, y);
  return make_snapshot(n, active, t, y);
}

std::vector<LayerSnapshot> Dynamics::snapshot_all(double t) const {
  int active = 0;
  std::vector<double> y;
  state_at(t, active, y);
  std::vector<LayerSnapshot> out;
  out.reserve(p_.n_max);
  for (int n = 1; n <= p_.n_max; ++n) out.push_back(make_snapshot(n, active, t, y));
  return out;
}

std::vector<LayerState> Dynamics::states() const {
  std::vector<LayerState> out;
  for (int n = 1; n <= p_.n_max; ++n) {
    const Layer& l = layers_[n - 1];
    LayerState st;
    st.n = n;
    st.t_n = sched_[n - 1];
    st.t_np1 = sched_[n];
    st.const_ab = l.ab;
    st.lambda = l.lambda;
    st.M = l.M;
    st.H = l.b1 * std::exp(-l.L1) * l.K1;
    for (std::size_t i = 0; i < node_t_.size(); ++i) {
      if (node_seg_[i] < n - 1) continue;
      const auto& y = node_y_[i];
      const double L = y[3 * (n - 1) + 1];
      const double b = b_of(n, L);
      const double a = l.ab / b;
      st.t.push_back(node_t_[i]);
      st.a.push_back(a);
      st.b.push_back(b);
      st.B.push_back(B_of(n, a, b, y[3 * (n - 1) + 2]));
      st.k.push_back((L - l.L1) / (l.en * p_.lnC()));
      st.center.push_back(y[3 * (n - 1)]);
    }
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<double> Dynamics::final_centers() const {
  std::vector<double> c;
  for (int n = 1; n <= p_.n_max; ++n) c.push_back(node_y_.back()[3 * (n - 1)]);
  return c;
}

namespace {

double rel_change(double x, double y) {
  const double scale = std::max(std::fabs(x), std::fabs(y));
  return scale == 0.0 ? 0.0 : std::fabs(x - y) / scale;
}

}  // namespace

Dynamics integrate_layers(const ConstructionParams& p, const DynamicsOptions& opt,
                          HalvingReport* report) {
  Dynamics d(p, opt.steps_per_epoch);
  if (!opt.check_halving) return d;
  Dynamics fine(p, 2 * opt.steps_per_epoch);
  HalvingReport r;
  const char* names[] = {"a", "b", "B", "k", "center1"};
  for (double t : {d.t_end(), 1.0}) {
    for (int n = 1; n <= p.n_max; ++n) {
      const LayerSnapshot x = d.snapshot(n, t), y = fine.snapshot(n, t);
      const double en = growth_exponent(n, p.gamma);
      const double kx = std::log(x.b) / (en * p.lnC()) - 1.0;
      const double ky = std::log(y.b) / (en * p.lnC()) - 1.0;
      const double vals[5] = {rel_change(x.a, y.a), rel_change(x.b, y.b), rel_change(x.B, y.B),
                              rel_change(kx, ky), rel_change(x.c, y.c)};
      for (int q = 0; q < 5; ++q) {
        if (vals[q] > r.max_rel_change) {
          r.max_rel_change = vals[q];
          std::ostringstream os;
          os << names[q] << "_" << n << "(t=" << t << ")";
          r.worst = os.str();
        }
      }
    }
  }
  if (report) *report = r;
  if (r.max_rel_change > opt.halving_tol) {
    std::ostringstream os;
    os << "layer integration not converged under step halving: " << r.worst
       << " changed by " << r.max_rel_change;
    throw ConvergenceError(os.str());
  }
  return d;
}

SeparationReport layer_separation_check(const Dynamics& dyn, int samples_per_epoch) {
  const int N = dyn.layers();
  const auto& sched = dyn.schedule();
  SeparationReport rep;
  rep.ratio.assign(N, std::vector<double>(N, 0.0));
  const double t_end = dyn.t_end();
  for (int n = 2; n <= N; ++n) {
    const double t0 = sched[n - 1];
    const int samples = samples_per_epoch * (N - n + 1);
    for (int i = 0; i <= samples; ++i) {
      const double t = t0 + (t_end - t0) * i / samples;
      const auto snap = dyn.snapshot_all(t);
      for (int m = 1; m < n; ++m) {
        const double r = std::fabs(snap[n - 1].c - snap[m - 1].c) * snap[m - 1].a /
                         (8.0 * std::numbers::pi);
        rep.ratio[n - 1][m - 1] = std::max(rep.ratio[n - 1][m - 1], r);
        if (r > rep.max_ratio) {
          rep.max_ratio = r;
          rep.worst_n = n;
          rep.worst_m = m;
        }
      }
    }
  }
  rep.violated = rep.max_ratio > 1.0;
  return rep;
}

BlowupPoint blowup_point(const Dynamics& dyn, double shift) {
  const auto& p = dyn.params();
  BlowupPoint bp;
  for (double c : dyn.final_centers()) bp.estimates.push_back(c - shift);
  for (int n = 1; n <= p.n_max; ++n)
    bp.bounds.push_back(8.0 * std::numbers::pi * std::exp(-growth_exponent(n, p.gamma) * p.lnC()));
  bp.x1 = bp.estimates.back();
  bp.error_bound = bp.bounds.back();
  return bp;
}

void write_layer_csv(const LayerState& s, std::ostream& os) {
  os << "t,a,b,B,k,center1\n" << std::setprecision(17);
  for (std::size_t i = 0; i < s.t.size(); ++i)
    os << s.t[i] << ',' << s.a[i] << ',' << s.b[i] << ',' << s.B[i] << ',' << s.k[i] << ','
       << s.center[i] << '\n';
}

std::vector<std::string> write_layer_csvs(const Dynamics& dyn, const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& s : dyn.states()) {
    const std::string name = "layer_" + std::to_string(s.n) + ".csv";
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw std::runtime_error("cannot write " + name);
    write_layer_csv(s, f);
    names.push_back(name);
  }
  return names;
}

}  // namespace blowup
