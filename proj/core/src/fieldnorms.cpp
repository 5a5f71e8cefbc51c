#include "blowup/fieldnorms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "blowup/parallel.hpp"

namespace blowup {

Samples to_samples(const ScalarField2D& f) {
  Samples s;
  s.reserve(f.v.size());
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) s.push_back({f.grid.x(i), f.grid.y(j), f.at(i, j)});
  return s;
}

Samples to_samples_1d(const std::vector<double>& x, const std::vector<double>& v) {
  if (x.size() != v.size()) throw std::invalid_argument("to_samples_1d: size mismatch");
  Samples s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = {x[i], 0.0, v[i]};
  return s;
}

namespace {

double pair_ratio(const Sample& a, const Sample& b, double alpha) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  const double d2 = dx * dx + dy * dy;
  if (d2 == 0.0) return 0.0;
  const double dv = std::fabs(a.v - b.v);
  if (dv == 0.0) return 0.0;
  return alpha == 1.0 ? dv / std::sqrt(d2) : dv / std::pow(d2, 0.5 * alpha);
}

/// Exact pair maximum over the index set.
double scan_all(const Samples& s, const std::vector<std::size_t>& idx, double alpha) {
  const std::size_t n = idx.size();
  std::vector<double> row(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double m = 0.0;
    const Sample& a = s[idx[i]];
    for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, pair_ratio(a, s[idx[j]], alpha));
    row[i] = m;
  });
  double m = 0.0;
  for (double r : row) m = std::max(m, r);
  return m;
}

/// Groups sample indices into spatial tiles (offset by a fraction of a tile).
std::vector<std::vector<std::size_t>> tiles(const Samples& s, std::size_t per_tile, double offset) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& p : s) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const std::size_t T = (s.size() + per_tile - 1) / per_tile;
  const bool flat = ymax - ymin <= 0.0;
  std::size_t tx = flat ? T : static_cast<std::size_t>(std::ceil(std::sqrt(double(T))));
  std::size_t ty = flat ? 1 : tx;
  tx = std::max<std::size_t>(tx, 1);
  const double wx = (xmax - xmin) / tx * (1.0 + 1e-12) + 1e-300;
  const double wy = (ymax - ymin) / ty * (1.0 + 1e-12) + 1e-300;
  const std::size_t cx = tx + 1, cy = ty + 1;
  std::vector<std::vector<std::size_t>> out(cx * cy);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto ix = static_cast<std::size_t>((s[i].x - xmin) / wx + offset);
    const auto iy = flat ? 0 : static_cast<std::size_t>((s[i].y - ymin) / wy + offset);
    out[std::min(iy, cy - 1) * cx + std::min(ix, cx - 1)].push_back(i);
  }
  return out;
}

}  // namespace

HolderValue holder_seminorm(const Samples& s, double alpha, std::size_t pair_budget) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder_seminorm: alpha in (0,1]");
  if (s.size() < 2) throw std::invalid_argument("holder_seminorm: need >= 2 samples");
  HolderValue out;
  const std::size_t n = s.size();
  if (n * n <= pair_budget) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    out.value = scan_all(s, idx, alpha);
    out.pairs = n * (n - 1) / 2;
    return out;
  }
  out.lower_bound = true;
  const auto m = static_cast<std::size_t>(std::sqrt(double(pair_budget)));
  double best = 0.0;
  for (double offset : {0.0, 0.5}) {
    for (const auto& tile : tiles(s, m, offset)) {
      if (tile.size() < 2) continue;
      best = std::max(best, scan_all(s, tile, alpha));
      out.pairs += tile.size() * (tile.size() - 1) / 2;
    }
  }
  // coarse cross-tile stage: strided subsample
  const std::size_t stride = (n + m - 1) / m;
  std::vector<std::size_t> coarse;
  for (std::size_t i = 0; i < n; i += stride) coarse.push_back(i);
  best = std::max(best, scan_all(s, coarse, alpha));
  out.pairs += coarse.size() * (coarse.size() - 1) / 2;
  out.value = best;
  return out;
}

double sup_norm(const Samples& s) {
  double m = 0.0;
  for (const auto& p : s) m = std::max(m, std::fabs(p.v));
  return m;
}

double lp_norm(const ScalarField2D& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p >= 1");
  const Grid2D& g = f.grid;
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i < g.nx; ++i) {
      const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      acc += wx * wy * std::pow(std::fabs(f.at(i, j)), p);
    }
  }
  return std::pow(acc * g.h * g.h, 1.0 / p);
}

Samples outside_ball(const Samples& s, double r) {
  Samples o;
  for (const auto& p : s)
    if (std::hypot(p.x, p.y) >= r) o.push_back(p);
  return o;
}

Samples outside_closed_ball(const Samples& s, double r) {
  Samples o;
  for (const auto& p : s)
    if (std::hypot(p.x, p.y) > r) o.push_back(p);
  return o;
}

std::string HolderReport::serialize() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "sup_norm=" << sup_norm << "\n";
  for (const auto& [p, v] : lp_norms) os << "lp_" << p << "=" << v << "\n";
  for (const auto& [a, v] : holder_seminorms) os << "holder_" << a << "=" << v << "\n";
  os << "holder_lower_bound=" << (holder_lower_bound ? 1 : 0) << "\n";
  if (annulus) {
    os << "annulus_r=" << annulus->r << "\n";
    os << "annulus_sup_norm=" << annulus->sup_norm << "\n";
    for (const auto& [a, v] : annulus->holder_seminorms)
      os << "annulus_holder_" << a << "=" << v << "\n";
  }
  return os.str();
}

HolderReport HolderReport::parse(const std::string& text) {
  HolderReport r;
  std::istringstream is(text);
  std::string line;
  auto num = [](const std::string& s) { return std::stod(s); };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("HolderReport: bad line " + line);
    const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "sup_norm") r.sup_norm = num(v);
    else if (k.rfind("lp_", 0) == 0) r.lp_norms[num(k.substr(3))] = num(v);
    else if (k == "holder_lower_bound") r.holder_lower_bound = v == "1";
    else if (k.rfind("holder_", 0) == 0) r.holder_seminorms[num(k.substr(7))] = num(v);
    else if (k == "annulus_r") {
      if (!r.annulus) r.annulus.emplace();
      r.annulus->r = num(v);
    } else if (k == "annulus_sup_norm") {
      if (!r.annulus) r.annulus.emplace();
      r.annulus->sup_norm = num(v);
    } else if (k.rfind("annulus_holder_", 0) == 0) {
      if (!r.annulus) r.annulus.emplace();
      r.annulus->holder_seminorms[num(k.substr(15))] = num(v);
    } else {
      throw std::runtime_error("HolderReport: unknown key " + k);
    }
  }
  return r;
}

HolderReport holder_report(const ScalarField2D& f, const std::vector<double>& alphas,
                           std::optional<double> annulus_r, std::size_t pair_budget) {
  HolderReport r;
  const Samples s = to_samples(f);
  r.sup_norm = sup_norm(s);
  for (double p : {1.0, 2.0, 8.0}) r.lp_norms[p] = lp_norm(f, p);
  for (double a : alphas) {
    const HolderValue h = holder_seminorm(s, a, pair_budget);
    r.holder_seminorms[a] = h.value;
    r.holder_lower_bound = r.holder_lower_bound || h.lower_bound;
  }
  if (annulus_r) {
    HolderReport::Annulus an;
    an.r = *annulus_r;
    const Samples o = outside_ball(s, *annulus_r);
    an.sup_norm = sup_norm(o);
    for (double a : alphas)
      an.holder_seminorms[a] = o.size() >= 2 ? holder_seminorm(o, a, pair_budget).value : 0.0;
    r.annulus = an;
  }
  return r;
}

InverseBounds inverse_bounds(const Samples& f, double lambda, double alpha,
                             std::size_t pair_budget) {
  if (!(lambda > 0.0)) throw std::invalid_argument("inverse_bounds: lambda must be positive");
  Samples inv = f;
  for (auto& p : inv) {
    if (p.v < lambda) throw std::invalid_argument("inverse_bounds: sample below lambda");
    p.v = 1.0 / p.v;
  }
  InverseBounds b;
  b.sup_of_inverse = sup_norm(inv);
  const HolderValue hi = holder_seminorm(inv, alpha, pair_budget);
  const HolderValue hf = holder_seminorm(f, alpha, pair_budget);
  b.holder_of_inverse = hi.value;
  b.lower_bound = hi.lower_bound || hf.lower_bound;
  b.certified_sup = 1.0 / lambda;
  b.certified_holder = hf.value / (lambda * lambda);
  return b;
}

namespace {

bool is_origin(const Sample& p) { return p.x == 0.0 && p.y == 0.0; }

Samples without_origin(const Samples& s) {
  Samples o;
  for (const auto& p : s)
    if (!is_origin(p)) o.push_back(p);
  return o;
}

double holder_or_zero(const Samples& s, double a, std::size_t budget, bool* lb = nullptr) {
  if (s.size() < 2) return 0.0;
  const HolderValue h = holder_seminorm(s, a, budget);
  if (lb && h.lower_bound) *lb = true;
  return h.value;
}

struct Ladder {
  std::vector<double> r, gsup, ghol;
};

Ladder annulus_ladder(const Samples& g, const SingularProductInput& in, std::size_t budget) {
  Ladder L;
  const Samples g0 = without_origin(g);
  for (int k = 0; k < in.dyadic_levels; ++k) {
    const double r = in.R * std::ldexp(1.0, -k);
    const Samples o = outside_ball(g0, r);
    L.r.push_back(r);
    L.gsup.push_back(sup_norm(o));
    L.ghol.push_back(holder_or_zero(o, in.beta - in.sigma, budget));
  }
  return L;
}

}  // namespace

std::pair<double, double> fit_annulus_constants(const Samples& g, const SingularProductInput& in,
                                                std::size_t pair_budget) {
  const Ladder L = annulus_ladder(g, in, pair_budget);
  double K0 = 0.0, Kb = 0.0;
  for (std::size_t k = 0; k < L.r.size(); ++k) {
    K0 = std::max(K0, L.gsup[k] * std::pow(L.r[k], in.sigma));
    Kb = std::max(Kb, L.ghol[k] * std::pow(L.r[k], in.eta));
  }
  return {K0, Kb};
}

SingularProductResult singular_product_extend(const Samples& f, const Samples& g,
                                              const SingularProductInput& in,
                                              std::size_t pair_budget) {
  if (!(in.beta > 0 && in.beta < 1 && in.sigma > 0 && in.sigma < in.beta && in.eta > 0 &&
        in.eta < in.beta && in.R > 0))
    throw std::invalid_argument("singular_product_extend: exponents out of range");
  if (f.size() != g.size()) throw std::invalid_argument("singular_product_extend: size mismatch");
  SingularProductResult res;
  const double fsup = sup_norm(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].x != g[i].x || f[i].y != g[i].y)
      throw std::invalid_argument("singular_product_extend: f and g sampled at different points");
    if (is_origin(f[i]) && std::fabs(f[i].v) > 1e-14 * std::max(fsup, 1.0))
      throw HypothesisError("f(0) != 0");
  }
  const Ladder L = annulus_ladder(g, in, pair_budget);
  res.ladder_r = L.r;
  res.ladder_g_sup = L.gsup;
  res.ladder_g_holder = L.ghol;
  for (std::size_t k = 0; k < L.r.size(); ++k) {
    const double slack = 1.0 + 1e-12;
    if (L.gsup[k] > in.K0 * std::pow(L.r[k], -in.sigma) * slack) {
      std::ostringstream os;
      os << "sup of g outside B(0," << L.r[k] << ") exceeds K0 r^-sigma";
      throw HypothesisError(os.str());
    }
    if (L.ghol[k] > in.K_bs * std::pow(L.r[k], -in.eta) * slack) {
      std::ostringstream os;
      os << "Hoelder seminorm of g outside B(0," << L.r[k] << ") exceeds K r^-eta";
      throw HypothesisError(os.str());
    }
  }
  res.product = f;
  for (std::size_t i = 0; i < f.size(); ++i)
    res.product[i].v = is_origin(f[i]) ? 0.0 : f[i].v * g[i].v;

  const double bs = in.beta - in.sigma;
  bool lb = false;
  const double f_beta = holder_or_zero(f, in.beta, pair_budget, &lb);
  const double f_bs = holder_or_zero(f, bs, pair_budget, &lb);
  const Samples f_out = outside_closed_ball(f, in.R);
  const Samples g_out = outside_closed_ball(without_origin(g), in.R);
  const double f_out_sup = sup_norm(f_out), g_out_sup = sup_norm(g_out);
  const double f_out_bs = holder_or_zero(f_out, bs, pair_budget, &lb);
  const double g_out_bs = holder_or_zero(g_out, bs, pair_budget, &lb);

  res.certified_sup = std::max(in.K0 * std::pow(in.R, bs) * f_beta, f_out_sup * g_out_sup);
  res.certified_holder =
      std::max(g_out_sup * f_out_bs + f_out_sup * g_out_bs,
               in.K_bs * std::pow(in.R, in.beta - in.eta) * f_beta +
                   std::max(std::pow(2.0, in.sigma) * in.K0 * f_beta, g_out_sup * f_bs));
  res.measured_sup = sup_norm(res.product);
  const HolderValue ph = holder_seminorm(res.product, bs, pair_budget);
  res.measured_holder = ph.value;
  res.holder_lower_bound = ph.lower_bound || lb;
  return res;
}

BlowupVerdict necessary_blowup_check(const std::vector<std::vector<double>>& f,
                                     const std::vector<std::vector<double>>& g,
                                     const std::vector<int>& epoch, double bound) {
  if (f.size() != g.size() || f.size() != epoch.size())
    throw std::invalid_argument("necessary_blowup_check: size mismatch");
  BlowupVerdict v;
  int max_epoch = 0;
  for (int e : epoch) max_epoch = std::max(max_epoch, e);
  v.epoch_max.assign(max_epoch, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].size() != g[i].size()) throw std::invalid_argument("necessary_blowup_check: sample mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < f[i].size(); ++k) m = std::max(m, std::fabs(f[i][k] * g[i][k]));
    v.product_sup.push_back(m);
    if (epoch[i] >= 1) v.epoch_max[epoch[i] - 1] = std::max(v.epoch_max[epoch[i] - 1], m);
    if (m > bound) v.bounded = false;
  }
  v.strictly_increasing = v.epoch_max.size() >= 2;
  for (std::size_t e = 1; e < v.epoch_max.size(); ++e)
    if (!(v.epoch_max[e] > v.epoch_max[e - 1])) v.strictly_increasing = false;
  return v;
}

InterpolationResult interpolation_check(const Samples& s, double alpha, double beta, double gamma,
                                        std::size_t pair_budget) {
  if (!(beta > 0.0 && beta < gamma && gamma <= 1.0))
    throw std::invalid_argument("interpolation_check: need 0 < beta < gamma <= 1");
  InterpolationResult r;
  const double hb = holder_seminorm(s, beta, pair_budget).value;
  const double hg = holder_seminorm(s, gamma, pair_budget).value;
  const double sup = sup_norm(s);
  const double slack = 1.05;
  if (alpha > 0.0) {
    if (!(alpha < beta)) throw std::invalid_argument("interpolation_check: need alpha < beta");
    const double ha = holder_seminorm(s, alpha, pair_budget).value;
    r.item1_checked = true;
    r.item1_lhs = hb;
    r.item1_rhs = std::pow(ha, (gamma - beta) / (gamma - alpha)) *
                  std::pow(hg, (beta - alpha) / (gamma - alpha));
    r.item1_pass = r.item1_lhs <= r.item1_rhs * (1.0 + 1e-12);
    r.item1_pass_slack = r.item1_lhs <= r.item1_rhs * slack;
  }
  r.item2_lhs = hb;
  r.item2_rhs = 2.0 * std::pow(sup, (gamma - beta) / gamma) * std::pow(hg, beta / gamma);
  r.item2_pass = r.item2_lhs <= r.item2_rhs * (1.0 + 1e-12);
  r.item2_pass_slack = r.item2_lhs <= r.item2_rhs * slack;
  return r;
}

double fit_power_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_power_exponent: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace blowup
