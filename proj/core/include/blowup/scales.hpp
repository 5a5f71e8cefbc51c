/// @file scales.hpp
/// Construction parameters, log-domain arithmetic and the closed-form schedules.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blowup {

/// Raised when a LogScaled value does not fit in a double.
struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

/// Raised when the parameters give a non-increasing time schedule.
struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised on parameters outside their admissible ranges.
struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Signed quantity stored as (sign, ln|x|).
struct LogScaled {
  int sign = 0;
  double log_mag = 0.0;

  static LogScaled from_log(double log_mag, int sign = 1) { return {sign, log_mag}; }
  static LogScaled from_double(double x);

  /// Throws OverflowError when |x| exceeds the double range.
  double to_double() const;
  bool is_zero() const { return sign == 0; }

  LogScaled operator*(const LogScaled& o) const;
  LogScaled operator/(const LogScaled& o) const;
  LogScaled operator+(const LogScaled& o) const;
  LogScaled operator-(const LogScaled& o) const;
  LogScaled operator-() const { return {-sign, log_mag}; }
};

struct ConstructionParams {
  double C = 4.0;
  double gamma = 0.6;
  double delta = 0.4;
  double mu = 0.02;
  double alpha = 0.1;
  double rho_bar = 0.0;  // 0 means "pick by contraction search"
  int n_max = 3;

  // derived
  double alpha_star = 0.0;
  double Lambda = 0.0;
  double k_max = 0.0;
  double log_Y = 0.0;

  /// Validates ranges and fills the derived constants.
  static ConstructionParams make(double C, double gamma, double delta, double mu,
                                 double alpha, double rho_bar, int n_max);
  static ConstructionParams desk();

  double Y() const;
  double lnC() const;
};

double alpha_star();

/// e_n = (1/(1-gamma))^n.
double growth_exponent(int n, double gamma);

/// arccosh(e^L) for L >= 0 without forming e^L.
double arccosh_of_exp(double L);
/// ln cosh z, stable for large |z|.
double log_cosh(double z);

LogScaled lambda_n(const ConstructionParams& p, int n);

/// Ideal profile kbar_n at normalized time that in [0,1].
double kbar_n(const ConstructionParams& p, int n, double that);

struct DeviationBound {
  double pointwise = 0.0;
  double uniform = 0.0;
};
DeviationBound kbar_deviation_bound(const ConstructionParams& p, int n, double that);

/// ln(1 - t_n) evaluated in the log domain.
double log_one_minus_t(const ConstructionParams& p, int n);
/// t_n. Throws ScheduleError when t_n <= t_{n-1} (n >= 2).
double time_scale(const ConstructionParams& p, int n);
/// Same value through plain floating arithmetic (for cross-checks only).
double time_scale_direct(const ConstructionParams& p, int n);
/// t_1 .. t_{n_max+1}, validated strictly increasing as doubles.
std::vector<double> schedule(const ConstructionParams& p);
/// ln(1 - t_n) for n = 1 .. n_max+1, validated strictly decreasing. Usable when the
/// t_n themselves round to 1.
std::vector<double> log_schedule(const ConstructionParams& p);

LogScaled m_n(const ConstructionParams& p, int n);

/// a_n(1) = b_n(1) = C^{e_n}.
std::pair<LogScaled, LogScaled> ab_endpoint(const ConstructionParams& p, int n);

}  // namespace blowup
