/// @file dynamics.hpp
/// Layer ODE system: centers, b_n (and a_n = const/b_n), amplitudes B_n.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blowup/scales.hpp"

namespace blowup {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Smooth switch exp(4 - 1/(s(1-s))) on (t_n, t_np1), maximum 1 at the midpoint.
struct ActivityBump {
  double t_n = 0.0;
  double t_np1 = 1.0;

  double operator()(double t) const;
  double derivative(double t) const;
};

/// a_{n-1}(1) * Xi at normalized time that, closed form.
double pendulum_profile(const ConstructionParams& p, int n, double that);

/// Time-sampled trajectories of one layer on [t_n, 1].
struct LayerState {
  int n = 0;
  double t_n = 0.0;
  double t_np1 = 0.0;
  double const_ab = 0.0;
  double lambda = 0.0;
  double M = 0.0;
  double H = 0.0;  // int h_n b_n over the epoch
  std::vector<double> t, a, b, B, k, center;
};

/// Everything the field formulas need from one layer at one time.
struct LayerSnapshot {
  bool active = false;
  double a = 0, b = 0, c = 0, B = 0;
  double da = 0, db = 0, dc = 0, dB = 0;
  double D = 0, dD = 0;  // density amplitude -2 M h / H and its time derivative
  double lambda = 0;
};

struct DynamicsOptions {
  int steps_per_epoch = 2048;
  double halving_tol = 1e-8;
  bool check_halving = true;
};

struct HalvingReport {
  double max_rel_change = 0.0;
  std::string worst;  // which endpoint value
};

/// Integrated layer system with dense (one-step) evaluation between nodes.
class Dynamics {
 public:
  Dynamics(const ConstructionParams& p, int steps_per_epoch);

  const ConstructionParams& params() const { return p_; }
  const std::vector<double>& schedule() const { return sched_; }
  int layers() const { return p_.n_max; }
  double t_end() const;
  const ActivityBump& bump(int n) const { return bumps_[n - 1]; }

  /// Layer n (1-based) at time t in [0, 1].
  LayerSnapshot snapshot(int n, double t) const;
  /// All layers at time t, index 0 = layer 1.
  std::vector<LayerSnapshot> snapshot_all(double t) const;

  /// Sampled trajectories (node values), one per layer.
  std::vector<LayerState> states() const;

  /// Centers at t = 1 for each layer (original coordinates).
  std::vector<double> final_centers() const;

 private:
  struct Layer {
    double ab = 0, b1 = 0, M = 0, lambda = 0, en = 0;
    double L1 = 0, K1 = 0;  // L(1), K(1)
    bool closed = false;
  };

  void integrate(int upto);
  void rhs(int active, double t, const double* y, double* dy) const;
  void rk4_step(int active, double t, double h, const double* y, double* out) const;
  void state_at(double t, int& active, std::vector<double>& y) const;
  LayerSnapshot make_snapshot(int n, int active, double t, const std::vector<double>& y) const;
  double b_of(int m, double L) const;
  double B_of(int m, double a, double b, double K) const;

  ConstructionParams p_;
  int steps_;
  std::vector<double> sched_;  // t_1 .. t_{n_max+1}
  std::vector<ActivityBump> bumps_;
  std::vector<Layer> layers_;
  // segment s covers [bounds_[s], bounds_[s+1]]; segment s has layers 1..s+1 active
  std::vector<double> bounds_;
  std::vector<double> node_t_;
  std::vector<int> node_seg_;
  std::vector<std::vector<double>> node_y_;  // state after activation at that node
};

/// Integrates with the given step and with half of it; throws ConvergenceError on mismatch.
Dynamics integrate_layers(const ConstructionParams& p, const DynamicsOptions& opt,
                          HalvingReport* report = nullptr);

struct SeparationReport {
  double max_ratio = 0.0;  // max |c_n - c_m| a_m / (8 pi), m < n
  int worst_n = 0, worst_m = 0;
  bool violated = false;
  std::vector<std::vector<double>> ratio;  // [n-1][m-1]
};
SeparationReport layer_separation_check(const Dynamics& dyn, int samples_per_epoch = 256);

struct BlowupPoint {
  double x1 = 0.0;
  double error_bound = 0.0;
  std::vector<double> estimates;  // c_n(1), n = 1..n_max
  std::vector<double> bounds;     // 8 pi C^{-e_n}
};
/// shift is subtracted from every center (use final_centers().back() to recenter).
BlowupPoint blowup_point(const Dynamics& dyn, double shift = 0.0);

/// Writes one CSV per layer (columns t,a,b,B,k,center1); returns the file names.
std::vector<std::string> write_layer_csvs(const Dynamics& dyn, const std::string& dir);
void write_layer_csv(const LayerState& s, std::ostream& os);

}  // namespace blowup
