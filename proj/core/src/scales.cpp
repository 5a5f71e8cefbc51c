#include "blowup/scales.hpp"

#include <cfloat>
#include <cmath>
#include <sstream>

namespace blowup {

namespace {
const double kLogMax = std::log(DBL_MAX);
}

LogScaled LogScaled::from_double(double x) {
  if (x == 0.0) return {0, 0.0};
  return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
}

double LogScaled::to_double() const {
  if (sign == 0) return 0.0;
  if (log_mag > kLogMax) {
    std::ostringstream os;
    os << "LogScaled overflow: ln|x| = " << log_mag;
    throw OverflowError(os.str());
  }
  return sign * std::exp(log_mag);
}

LogScaled LogScaled::operator*(const LogScaled& o) const {
  if (sign == 0 || o.sign == 0) return {0, 0.0};
  return {sign * o.sign, log_mag + o.log_mag};
}

LogScaled LogScaled::operator/(const LogScaled& o) const {
  if (o.sign == 0) throw std::domain_error("LogScaled division by zero");
  if (sign == 0) return {0, 0.0};
  return {sign * o.sign, log_mag - o.log_mag};
}

LogScaled LogScaled::operator+(const LogScaled& o) const {
  if (sign == 0) return o;
  if (o.sign == 0) return *this;
  const LogScaled& big = log_mag >= o.log_mag ? *this : o;
  const LogScaled& small = log_mag >= o.log_mag ? o : *this;
  const double r = std::exp(small.log_mag - big.log_mag);
  if (big.sign == small.sign) return {big.sign, big.log_mag + std::log1p(r)};
  if (r == 1.0) return {0, 0.0};
  return {big.sign, big.log_mag + std::log1p(-r)};
}

LogScaled LogScaled::operator-(const LogScaled& o) const { return *this + (-o); }

double alpha_star() { return std::sqrt(4.0 / 3.0) - 1.0; }

ConstructionParams ConstructionParams::make(double C, double gamma, double delta, double mu,
                                            double alpha, double rho_bar, int n_max) {
  if (!(C > 2.0)) throw ParamError("C must exceed 2");
  if (!(gamma > 0.5 && gamma < 1.0)) throw ParamError("gamma must lie in (1/2, 1)");
  if (!(delta > 0.0)) throw ParamError("delta must be positive");
  if (!(mu > 0.0)) throw ParamError("mu must be positive");
  const double as = blowup::alpha_star();
  if (!(alpha > 0.0 && alpha < as)) throw ParamError("alpha must lie in (0, alpha*)");
  if (!(rho_bar >= 0.0)) throw ParamError("rho_bar must be non-negative");
  if (n_max < 1) throw ParamError("n_max must be at least 1");
  ConstructionParams p;
  p.C = C;
  p.gamma = gamma;
  p.delta = delta;
  p.mu = mu;
  p.alpha = alpha;
  p.rho_bar = rho_bar;
  p.n_max = n_max;
  p.alpha_star = as;
  p.Lambda = as * (1.0 + as);
  p.k_max = as;
  // Y normalizes t_1 = 0: ln Y = ln arccosh(C^{k_max e_1}) - delta e_0 ln C.
  const double lnC = std::log(C);
  p.log_Y = std::log(arccosh_of_exp(p.k_max * growth_exponent(1, gamma) * lnC)) -
            delta * growth_exponent(0, gamma) * lnC;
  return p;
}

ConstructionParams ConstructionParams::desk() {
  return make(4.0, 0.6, 0.4, 0.02, 0.1, 0.0, 3);
}

double ConstructionParams::Y() const { return std::exp(log_Y); }
double ConstructionParams::lnC() const { return std::log(C); }

double growth_exponent(int n, double gamma) {
  if (n < 0) throw ParamError("growth_exponent: n must be >= 0");
  return std::pow(1.0 / (1.0 - gamma), n);
}

double arccosh_of_exp(double L) {
  if (L < 0.0) throw std::domain_error("arccosh_of_exp: argument below 1");
  // arccosh(X) = ln X + ln(1 + sqrt(1 - X^{-2}))
  return L + std::log1p(std::sqrt(-std::expm1(-2.0 * L)));
}

double log_cosh(double z) {
  const double a = std::fabs(z);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

LogScaled lambda_n(const ConstructionParams& p, int n) {
  if (n < 1) throw ParamError("lambda_n: n must be >= 1");
  return LogScaled::from_log(-p.Lambda * growth_exponent(n, p.gamma) * p.lnC());
}

double kbar_n(const ConstructionParams& p, int n, double that) {
  if (n < 1) throw ParamError("kbar_n: n must be >= 1");
  const double en = growth_exponent(n, p.gamma);
  const double A = arccosh_of_exp(p.k_max * en * p.lnC());
  return p.k_max - log_cosh(A * (1.0 - 2.0 * that)) / (p.lnC() * en);
}

DeviationBound kbar_deviation_bound(const ConstructionParams& p, int n, double that) {
  if (n < 1) throw ParamError("kbar_deviation_bound: n must be >= 1");
  const double en = growth_exponent(n, p.gamma);
  const double lnC = p.lnC();
  const double m = std::min(that, 1.0 - that);
  const double tail = std::exp(-2.0 * std::fabs(1.0 - 2.0 * that) * p.k_max * en * lnC);
  DeviationBound b;
  b.pointwise = (2.0 * std::log(2.0) * m + tail) / (lnC * en);
  b.uniform = (1.0 + std::log(2.0)) / lnC * std::pow(1.0 - p.gamma, n);
  return b;
}

double log_one_minus_t(const ConstructionParams& p, int n) {
  if (n < 1) throw ParamError("time_scale: n must be >= 1");
  const double lnC = p.lnC();
  // Same operation order as log_Y so that n = 1 cancels exactly.
  const double num = std::log(arccosh_of_exp(p.k_max * growth_exponent(n, p.gamma) * lnC)) -
                     p.delta * growth_exponent(n - 1, p.gamma) * lnC;
  return num - p.log_Y;
}

double time_scale(const ConstructionParams& p, int n) {
  const double l = log_one_minus_t(p, n);
  if (n >= 2) {
    // compared in the log domain; 1 - t_n may be far below double resolution
    const double prev = log_one_minus_t(p, n - 1);
    if (!(l < prev)) {
      std::ostringstream os;
      os << "degenerate schedule: t_" << n << " = " << 0.0 - std::expm1(l) << " <= t_" << n - 1
         << " = " << 0.0 - std::expm1(prev);
      throw ScheduleError(os.str());
    }
  }
  return 0.0 - std::expm1(l);
}

double time_scale_direct(const ConstructionParams& p, int n) {
  const double en = growth_exponent(n, p.gamma);
  const double X = std::pow(p.C, p.k_max * en);
  const double Y = std::pow(p.C, -p.delta) * std::acosh(std::pow(p.C, p.k_max * growth_exponent(1, p.gamma)));
  return 1.0 - std::pow(p.C, -p.delta * growth_exponent(n - 1, p.gamma)) * std::acosh(X) / Y;
}

std::vector<double> schedule(const ConstructionParams& p) {
  std::vector<double> t;
  for (int n = 1; n <= p.n_max + 1; ++n) {
    t.push_back(time_scale(p, n));
    if (n >= 2 && !(t[n - 1] > t[n - 2])) {
      std::ostringstream os;
      os << "schedule not separable in double precision at n = " << n
         << " (ln(1 - t_n) = " << log_one_minus_t(p, n) << ")";
      throw ScheduleError(os.str());
    }
  }
  return t;
}

std::vector<double> log_schedule(const ConstructionParams& p) {
  std::vector<double> l;
  for (int n = 1; n <= p.n_max + 1; ++n) {
    (void)time_scale(p, n);
    l.push_back(log_one_minus_t(p, n));
  }
  return l;
}

LogScaled m_n(const ConstructionParams& p, int n) {
  if (n < 1) throw ParamError("m_n: n must be >= 1");
  return LogScaled::from_log(p.log_Y + p.delta * growth_exponent(n, p.gamma) * p.lnC());
}

std::pair<LogScaled, LogScaled> ab_endpoint(const ConstructionParams& p, int n) {
  if (n < 0) throw ParamError("ab_endpoint: n must be >= 0");
  const auto v = LogScaled::from_log(growth_exponent(n, p.gamma) * p.lnC());
  return {v, v};
}

}  // namespace blowup
