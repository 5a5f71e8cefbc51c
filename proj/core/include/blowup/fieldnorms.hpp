/// @file fieldnorms.hpp
/// Sup, L^p and Hoelder seminorms on sampled fields, plus the Hoelder toolbox
/// (inverse bound, singular product extension, interpolation checks).
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

/// A sampled value at a point. 1D data uses y = 0.
struct Sample {
  double x = 0, y = 0, v = 0;
};
using Samples = std::vector<Sample>;

Samples to_samples(const ScalarField2D& f);
Samples to_samples_1d(const std::vector<double>& x, const std::vector<double>& v);

inline constexpr std::size_t kDefaultPairBudget = 4'000'000;

struct HolderValue {
  double value = 0.0;
  bool lower_bound = false;  // tiled estimate, not the exact pair maximum
  std::size_t pairs = 0;
};

/// sup |f(x) - f(y)| / |x - y|^alpha over sample pairs.
HolderValue holder_seminorm(const Samples& s, double alpha,
                            std::size_t pair_budget = kDefaultPairBudget);

double sup_norm(const Samples& s);
/// Tensor-product trapezoid L^p norm on a uniform grid.
double lp_norm(const ScalarField2D& f, double p);
/// Samples with |x| >= r (complement of the open ball).
Samples outside_ball(const Samples& s, double r);
/// Samples with |x| > r (complement of the closed ball).
Samples outside_closed_ball(const Samples& s, double r);

struct HolderReport {
  double sup_norm = 0.0;
  std::map<double, double> lp_norms;
  std::map<double, double> holder_seminorms;
  bool holder_lower_bound = false;
  struct Annulus {
    double r = 0.0;
    double sup_norm = 0.0;
    std::map<double, double> holder_seminorms;
  };
  std::optional<Annulus> annulus;

  /// Flat key=value record, one pair per line, fixed key order.
  std::string serialize() const;
  static HolderReport parse(const std::string& text);
};

HolderReport holder_report(const ScalarField2D& f, const std::vector<double>& alphas,
                           std::optional<double> annulus_r = std::nullopt,
                           std::size_t pair_budget = kDefaultPairBudget);

struct InverseBounds {
  double sup_of_inverse = 0.0;
  double holder_of_inverse = 0.0;
  double certified_sup = 0.0;     // 1 / lambda
  double certified_holder = 0.0;  // [f]_alpha / lambda^2
  bool lower_bound = false;
};
/// Throws std::invalid_argument when a sample lies below lambda.
InverseBounds inverse_bounds(const Samples& f, double lambda, double alpha,
                             std::size_t pair_budget = kDefaultPairBudget);

struct SingularProductInput {
  double beta = 0.6, sigma = 0.5, eta = 0.55, R = 1.0;
  double K0 = 1.0, K_bs = 1.0;
  int dyadic_levels = 12;
};

struct SingularProductResult {
  Samples product;  // f g with the origin set to 0
  double measured_sup = 0.0;
  double measured_holder = 0.0;  // exponent beta - sigma
  double certified_sup = 0.0;
  double certified_holder = 0.0;
  bool holder_lower_bound = false;
  std::vector<double> ladder_r;
  std::vector<double> ladder_g_sup;
  std::vector<double> ladder_g_holder;
};

struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// f and g sampled at the same points; g at the origin is ignored.
/// Throws HypothesisError when f(0) != 0 or g breaks the annulus bounds on the dyadic ladder.
SingularProductResult singular_product_extend(const Samples& f, const Samples& g,
                                              const SingularProductInput& in,
                                              std::size_t pair_budget = kDefaultPairBudget);

/// Smallest constants making the annulus hypotheses hold on the dyadic ladder.
std::pair<double, double> fit_annulus_constants(const Samples& g, const SingularProductInput& in,
                                                std::size_t pair_budget = kDefaultPairBudget);

struct BlowupVerdict {
  std::vector<double> product_sup;   // ||f g(t_i)||_inf
  std::vector<double> epoch_max;     // max over samples of each epoch
  bool strictly_increasing = false;  // across epochs
  bool bounded = true;               // trace never exceeds the bound argument
};
/// f[i], g[i] sampled at the same points for time sample i, epoch[i] >= 1.
BlowupVerdict necessary_blowup_check(const std::vector<std::vector<double>>& f,
                                     const std::vector<std::vector<double>>& g,
                                     const std::vector<int>& epoch, double bound = 1e300);

struct InterpolationResult {
  // item 1 (alpha < beta < gamma): [f]_b <= [f]_a^{(g-b)/(g-a)} [f]_g^{(b-a)/(g-a)}
  bool item1_checked = false;
  double item1_lhs = 0, item1_rhs = 0;
  bool item1_pass = true, item1_pass_slack = true;
  // item 2 (0 < beta < gamma): [f]_b <= 2 ||f||_inf^{(g-b)/g} [f]_g^{b/g}
  double item2_lhs = 0, item2_rhs = 0;
  bool item2_pass = true, item2_pass_slack = true;
  bool pass() const { return item1_pass && item2_pass; }
};
/// alpha <= 0 skips item 1.
InterpolationResult interpolation_check(const Samples& s, double alpha, double beta, double gamma,
                                        std::size_t pair_budget = kDefaultPairBudget);

/// Least-squares slope of log y against log x.
double fit_power_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace blowup
