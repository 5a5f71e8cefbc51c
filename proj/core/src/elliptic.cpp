#include "blowup/elliptic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include "blowup/fieldnorms.hpp"
#include "blowup/parallel.hpp"

namespace blowup {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kInv2Pi = 0.5 / std::numbers::pi;

}  // namespace

double log_kernel_cell_average(double h) {
  return kInv2Pi * (std::log(0.5 * h) + 0.5 * std::log(2.0) - 1.5 + 0.25 * std::numbers::pi);
}

enum Kernel { kLog = 0, kGx, kGy, kHxx, kHxy, kHyy, kKernelCount };

struct NewtonianSolver::Impl {
  Grid2D g;
  int M0 = 0, M1 = 0;  // padded rows (y) and columns (x)
  std::size_t nreal = 0, ncplx = 0;
  fftw_plan fwd = nullptr, inv = nullptr;
  fftw_complex* kernels[kKernelCount] = {};
  std::once_flag once[kKernelCount];

  explicit Impl(const Grid2D& grid) : g(grid) {
    M0 = 2 * g.ny;
    M1 = 2 * g.nx;
    nreal = static_cast<std::size_t>(M0) * M1;
    ncplx = static_cast<std::size_t>(M0) * (M1 / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* r = fftw_alloc_real(nreal);
    fftw_complex* c = fftw_alloc_complex(ncplx);
    fwd = fftw_plan_dft_r2c_2d(M0, M1, r, c, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(M0, M1, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (auto* k : kernels)
      if (k) fftw_free(k);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }

  double kernel_value(Kernel k, int di, int dj) const {
    const double h = g.h;
    if (di == 0 && dj == 0) {
      switch (k) {
        case kLog: return log_kernel_cell_average(h);
        case kHxx:
        case kHyy: return 0.5 / (h * h);  // delta part; the principal value averages to 0
        default: return 0.0;
      }
    }
    const double x = di * h, y = dj * h, r2 = x * x + y * y;
    switch (k) {
      case kLog: return kInv2Pi * 0.5 * std::log(r2);
      case kGx: return kInv2Pi * x / r2;
      case kGy: return kInv2Pi * y / r2;
      case kHxx: return kInv2Pi * (y * y - x * x) / (r2 * r2);
      case kHxy: return kInv2Pi * (-2.0 * x * y) / (r2 * r2);
      case kHyy: return kInv2Pi * (x * x - y * y) / (r2 * r2);
      default: return 0.0;
    }
  }

  const fftw_complex* kernel(Kernel k) {
    std::call_once(once[k], [&] {
      double* r = fftw_alloc_real(nreal);
      std::fill(r, r + nreal, 0.0);
      for (int dj = -(g.ny - 1); dj <= g.ny - 1; ++dj) {
        const std::size_t row = static_cast<std::size_t>((dj + M0) % M0) * M1;
        for (int di = -(g.nx - 1); di <= g.nx - 1; ++di)
          r[row + (di + M1) % M1] = kernel_value(k, di, dj);
      }
      fftw_complex* c = fftw_alloc_complex(ncplx);
      fftw_execute_dft_r2c(fwd, r, c);
      fftw_free(r);
      kernels[k] = c;
    });
    return kernels[k];
  }

  fftw_complex* transform(const ScalarField2D& rhs) const {
    double* r = fftw_alloc_real(nreal);
    std::fill(r, r + nreal, 0.0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) r[static_cast<std::size_t>(j) * M1 + i] = rhs.at(i, j);
    fftw_complex* c = fftw_alloc_complex(ncplx);
    fftw_execute_dft_r2c(fwd, r, c);
    fftw_free(r);
    return c;
  }

  ScalarField2D apply(const fftw_complex* F, Kernel k) {
    const fftw_complex* K = kernel(k);
    fftw_complex* c = fftw_alloc_complex(ncplx);
    for (std::size_t i = 0; i < ncplx; ++i) {
      const double ar = F[i][0], ai = F[i][1], br = K[i][0], bi = K[i][1];
      c[i][0] = ar * br - ai * bi;
      c[i][1] = ar * bi + ai * br;
    }
    double* r = fftw_alloc_real(nreal);
    fftw_execute_dft_c2r(inv, c, r);
    fftw_free(c);
    ScalarField2D out(g);
    const double scale = g.h * g.h / static_cast<double>(nreal);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out.at(i, j) = r[static_cast<std::size_t>(j) * M1 + i] * scale;
    fftw_free(r);
    return out;
  }
};

NewtonianSolver::NewtonianSolver(const Grid2D& g) : impl_(std::make_unique<Impl>(g)) {}
NewtonianSolver::~NewtonianSolver() = default;

const Grid2D& NewtonianSolver::grid() const { return impl_->g; }

namespace {
void require_grid(const Grid2D& a, const Grid2D& b) {
  if (!a.same_as(b)) throw std::invalid_argument("NewtonianSolver: grid mismatch");
}
}  // namespace

ScalarField2D NewtonianSolver::potential(const ScalarField2D& rhs) const {
  require_grid(rhs.grid, impl_->g);
  fftw_complex* F = impl_->transform(rhs);
  ScalarField2D u = impl_->apply(F, kLog);
  fftw_free(F);
  return u;
}

PotentialDerivatives NewtonianSolver::derivatives(const ScalarField2D& rhs, bool with_potential,
                                                  bool with_hessian) const {
  require_grid(rhs.grid, impl_->g);
  fftw_complex* F = impl_->transform(rhs);
  PotentialDerivatives d;
  if (with_potential) d.u = impl_->apply(F, kLog);
  d.ux = impl_->apply(F, kGx);
  d.uy = impl_->apply(F, kGy);
  if (with_hessian) {
    d.uxx = impl_->apply(F, kHxx);
    d.uxy = impl_->apply(F, kHxy);
    d.uyy = impl_->apply(F, kHyy);
  }
  fftw_free(F);
  return d;
}

VectorField2D NewtonianSolver::perp_gradient(const ScalarField2D& rhs) const {
  const PotentialDerivatives d = derivatives(rhs, false, false);
  VectorField2D v(impl_->g);
  for (std::size_t i = 0; i < v.v1.size(); ++i) {
    v.v1[i] = -d.uy.v[i];
    v.v2[i] = d.ux.v[i];
  }
  return v;
}

std::shared_ptr<const NewtonianSolver> NewtonianSolver::for_grid(const Grid2D& g) {
  static std::mutex m;
  static std::map<std::tuple<int, int, double, double, double>,
                  std::weak_ptr<const NewtonianSolver>> cache;
  std::lock_guard<std::mutex> lock(m);
  const auto key = std::make_tuple(g.nx, g.ny, g.x0, g.y0, g.h);
  if (auto sp = cache[key].lock()) return sp;
  auto sp = std::make_shared<const NewtonianSolver>(g);
  cache[key] = sp;
  return sp;
}

PoissonProblem PoissonProblem::make(ScalarField2D rhs, bool enforce_zero_mean) {
  PoissonProblem p;
  const Grid2D& g = rhs.grid;
  double sum = 0.0;
  int imin = g.nx, imax = -1, jmin = g.ny, jmax = -1;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = rhs.at(i, j);
      sum += v;
      if (v != 0.0) {
        imin = std::min(imin, i);
        imax = std::max(imax, i);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
      }
    }
  p.mean = sum * g.h * g.h;
  if (imax >= 0) p.support_diam = std::hypot((imax - imin) * g.h, (jmax - jmin) * g.h);
  if (enforce_zero_mean && imax >= 0 && p.mean != 0.0) {
    const double cx = 0.5 * (g.x(imin) + g.x(imax)), cy = 0.5 * (g.y(jmin) + g.y(jmax));
    const double rad = std::max(0.5 * std::min((imax - imin) * g.h, (jmax - jmin) * g.h), 2.0 * g.h);
    ScalarField2D bump(g);
    double bsum = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double q = (std::pow(g.x(i) - cx, 2) + std::pow(g.y(j) - cy, 2)) / (rad * rad);
        const double b = q < 1.0 ? std::pow(1.0 - q, 4) : 0.0;
        bump.at(i, j) = b;
        bsum += b;
      }
    const double c = p.mean / (bsum * g.h * g.h);
    for (std::size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] -= c * bump.v[k];
    p.zero_mean_correction = std::fabs(p.mean);
    p.mean = 0.0;
  }
  p.rhs = std::move(rhs);
  return p;
}

void PoissonProblem::check_padding(double margin) const {
  const Grid2D& g = rhs.grid;
  int imin = g.nx, imax = -1, jmin = g.ny, jmax = -1;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (rhs.at(i, j) != 0.0) {
        imin = std::min(imin, i);
        imax = std::max(imax, i);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
      }
  if (imax < 0) return;
  const double mx = margin * g.nx, my = margin * g.ny;
  if (imin < mx || g.nx - 1 - imax < mx || jmin < my || g.ny - 1 - jmax < my) {
    std::ostringstream os;
    os << "rhs support [" << imin << "," << imax << "]x[" << jmin << "," << jmax
       << "] leaves less than " << margin << " of the grid as padding";
    throw PaddingError(os.str());
  }
}

ScalarField2D newtonian_potential(const PoissonProblem& problem) {
  problem.check_padding();
  return NewtonianSolver::for_grid(problem.rhs.grid)->potential(problem.rhs);
}

PotentialDerivatives potential_derivatives(const PoissonProblem& problem) {
  problem.check_padding();
  return NewtonianSolver::for_grid(problem.rhs.grid)->derivatives(problem.rhs, true, true);
}

ScalarField2D five_point_laplacian(const ScalarField2D& u) {
  const Grid2D& g = u.grid;
  ScalarField2D L(g);
  const double ih2 = 1.0 / (g.h * g.h);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      L.at(i, j) = (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1) -
                    4.0 * u.at(i, j)) * ih2;
  return L;
}

ScalarField2D divergence(const VectorField2D& f) {
  const Grid2D& g = f.grid;
  ScalarField2D d(g);
  const double i2h = 0.5 / g.h;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      d.at(i, j) = (f.v1[g.index(i + 1, j)] - f.v1[g.index(i - 1, j)] +
                    f.v2[g.index(i, j + 1)] - f.v2[g.index(i, j - 1)]) * i2h;
  return d;
}

ScalarField2D curl(const VectorField2D& f) {
  const Grid2D& g = f.grid;
  ScalarField2D d(g);
  const double i2h = 0.5 / g.h;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      d.at(i, j) = (f.v2[g.index(i + 1, j)] - f.v2[g.index(i - 1, j)] -
                    (f.v1[g.index(i, j + 1)] - f.v1[g.index(i, j - 1)])) * i2h;
  return d;
}

VectorField2D central_gradient(const ScalarField2D& f) {
  const Grid2D& g = f.grid;
  VectorField2D d(g);
  const double i2h = 0.5 / g.h;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      d.v1[g.index(i, j)] = (f.at(i + 1, j) - f.at(i - 1, j)) * i2h;
      d.v2[g.index(i, j)] = (f.at(i, j + 1) - f.at(i, j - 1)) * i2h;
    }
  return d;
}

namespace {

/// Laplacian of (1-|x|^2)^4 inside the unit disk: 16(1-r^2)^2(4r^2-1)... computed directly.
double bump_laplacian(double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 >= 1.0) return 0.0;
  const double w = 1.0 - r2;
  // g = w^4, grad g = -8 w^3 x, Lap g = -16 w^3 + 48 w^2 r^2
  return -16.0 * w * w * w + 48.0 * w * w * r2;
}

double vec_lp(const ScalarField2D& a, const ScalarField2D& b, double p) {
  ScalarField2D m(a.grid);
  for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = std::hypot(a.v[i], b.v[i]);
  return lp_norm(m, p);
}

Samples strided(const ScalarField2D& f, int stride) {
  Samples s;
  for (int j = 0; j < f.grid.ny; j += stride)
    for (int i = 0; i < f.grid.nx; i += stride) s.push_back({f.grid.x(i), f.grid.y(j), f.at(i, j)});
  return s;
}

}  // namespace

BenchReport estimate_bench(const std::vector<double>& diams, int N, double half_width, double p,
                           double q, double r, double alpha) {
  BenchReport rep;
  rep.p = p;
  rep.q = q;
  rep.r = r;
  rep.alpha = alpha;
  const double a = (r - 1.0) * q / r;
  rep.predicted_grad_l2 = 2.0 * (a + 1.0 / r - 1.0 / q) / (a + 1.0);
  const Grid2D g = Grid2D::centered(N, half_width);
  const auto solver = NewtonianSolver::for_grid(g);
  const int stride = std::max(1, N / 128);
  const std::size_t budget = 1'000'000;
  std::vector<double> D, qu, qg, qg2;
  for (double diam : diams) {
    const double s = 0.5 * diam;
    const ScalarField2D f = sample(g, [&](Vec2 x) { return bump_laplacian(x.x / s, x.y / s); });
    PoissonProblem prob = PoissonProblem::make(f);
    prob.check_padding();
    const PotentialDerivatives d = solver->derivatives(prob.rhs, true, true);
    BenchRow row;
    row.diam = diam;
    const double fp = lp_norm(f, p), fq = lp_norm(f, q);
    if (fp == 0.0) {
      rep.rows.push_back(row);
      continue;
    }
    const double grad_p = vec_lp(d.ux, d.uy, p);
    ScalarField2D hess(g);
    for (std::size_t i = 0; i < hess.v.size(); ++i)
      hess.v[i] = std::sqrt(d.uxx.v[i] * d.uxx.v[i] + 2.0 * d.uxy.v[i] * d.uxy.v[i] +
                            d.uyy.v[i] * d.uyy.v[i]);
    row.u_lp_quotient = lp_norm(d.u, p) / fp;
    row.grad_lp_quotient = grad_p / fp;
    row.w1p_quotient = (grad_p + lp_norm(hess, p)) / ((1.0 + diam) * fp);
    row.grad_l2_quotient = vec_lp(d.ux, d.uy, 2.0) / fq;
    const double fh = holder_seminorm(strided(f, stride), alpha, budget).value;
    double d2h = 0.0, d2sup = 0.0;
    for (const ScalarField2D* c : {&d.uxx, &d.uxy, &d.uyy}) {
      d2h = std::max(d2h, holder_seminorm(strided(*c, stride), alpha, budget).value);
      d2sup = std::max(d2sup, sup_norm(to_samples(*c)));
    }
    row.d2u_holder_quotient = d2h / fh;
    row.d2u_sup_quotient =
        d2sup / (fh / alpha + std::pow((p - 1.0) / 2.0, (p - 1.0) / p) * fp);
    rep.max_w1p = std::max(rep.max_w1p, row.w1p_quotient);
    rep.max_d2u_holder = std::max(rep.max_d2u_holder, row.d2u_holder_quotient);
    rep.max_d2u_sup = std::max(rep.max_d2u_sup, row.d2u_sup_quotient);
    D.push_back(diam);
    qu.push_back(row.u_lp_quotient);
    qg.push_back(row.grad_lp_quotient);
    qg2.push_back(row.grad_l2_quotient);
    rep.rows.push_back(row);
  }
  if (D.size() >= 2) {
    rep.exponent_u = fit_power_exponent(D, qu);
    rep.exponent_grad = fit_power_exponent(D, qg);
    rep.exponent_grad_l2 = fit_power_exponent(D, qg2);
  }
  return rep;
}

void BenchReport::write_csv(std::ostream& os) const {
  os << std::setprecision(12);
  os << "diam,u_lp_quotient,grad_lp_quotient,w1p_quotient,grad_l2_quotient,"
        "d2u_holder_quotient,d2u_sup_quotient\n";
  for (const auto& r : rows)
    os << r.diam << ',' << r.u_lp_quotient << ',' << r.grad_lp_quotient << ',' << r.w1p_quotient
       << ',' << r.grad_l2_quotient << ',' << r.d2u_holder_quotient << ',' << r.d2u_sup_quotient
       << '\n';
  os << "fitted_exponent,u_lp," << exponent_u << ",predicted," << predicted_u << '\n';
  os << "fitted_exponent,grad_lp," << exponent_grad << ",predicted," << predicted_grad << '\n';
  os << "fitted_exponent,grad_l2," << exponent_grad_l2 << ",predicted," << predicted_grad_l2
     << '\n';
}

CanonicalDecomposition canonical_decompose(const VectorField2D& f, const ScalarField2D& rho,
                                           double tol, int max_iter) {
  const Grid2D& g = f.grid;
  require_grid(g, rho.grid);
  for (double v : rho.v)
    if (!(v > 0.0)) throw std::invalid_argument("canonical_decompose: rho must be positive");
  const auto solver = NewtonianSolver::for_grid(g);
  const ScalarField2D divf = divergence(f);
  const ScalarField2D curlf = curl(f);
  const VectorField2D grho = central_gradient(rho);
  const std::size_t n = g.size();

  CanonicalDecomposition out;
  ScalarField2D rhs(g);
  VectorField2D gphi(g);
  ScalarField2D phi(g);
  int growing = 0;
  double prev_step = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t k = 0; k < n; ++k)
      rhs.v[k] = rho.v[k] * divf.v[k] +
                 (grho.v1[k] * gphi.v1[k] + grho.v2[k] * gphi.v2[k]) / rho.v[k];
    const PotentialDerivatives d = solver->derivatives(rhs, true, false);
    double step = 0.0;
    for (std::size_t k = 0; k < n; ++k) step = std::max(step, std::fabs(d.u.v[k] - phi.v[k]));
    phi = d.u;
    gphi.v1 = d.ux.v;
    gphi.v2 = d.uy.v;
    out.steps.push_back(step);
    out.iterations = it;
    out.last_step = step;
    if (it > 1 && prev_step > 0.0 && step / prev_step > 0.95) {
      if (++growing >= 5) throw DivergenceError("canonical_decompose: Picard iteration diverges");
    } else {
      growing = 0;
    }
    prev_step = step;
    if (step < tol) break;
  }
  // residual of div(grad phi / rho) = div f with Lap phi = rhs of the last solve
  double res1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double F = rho.v[k] * divf.v[k] +
                     (grho.v1[k] * gphi.v1[k] + grho.v2[k] * gphi.v2[k]) / rho.v[k];
    res1 = std::max(res1, std::fabs(rhs.v[k] - F) / rho.v[k]);
  }
  ScalarField2D rhs2(g);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = rho.v[k];
    // perp rho = (-d2 rho, d1 rho)
    rhs2.v[k] = curlf.v[k] + (gphi.v1[k] * (-grho.v2[k]) + gphi.v2[k] * grho.v1[k]) / (r * r);
  }
  const PotentialDerivatives dpsi = solver->derivatives(rhs2, true, true);
  double res2 = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    res2 = std::max(res2, std::fabs(dpsi.uxx.v[k] + dpsi.uyy.v[k] - rhs2.v[k]));
  out.phi = phi;
  out.grad_phi = gphi;
  out.psi = dpsi.u;
  out.grad_psi = VectorField2D(g);
  out.grad_psi.v1 = dpsi.ux.v;
  out.grad_psi.v2 = dpsi.uy.v;
  out.residual_phi = res1;
  out.residual_psi = res2;
  return out;
}

}  // namespace blowup
