/// @file run_config.hpp
/// Flat key=value run configuration.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/scales.hpp"

namespace blowup::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string preset = "desk";
  std::string out_dir = "out";  // --out overrides

  // construction
  double C = 4.0, gamma = 0.6, delta = 0.4, mu = 0.02, alpha = 0.1;
  double rho_bar = 0.0;  // 0: contraction search
  int n_max = 3;

  // dynamics
  int ode_steps_per_epoch = 2048;
  double ode_halving_tol = 1e-8;

  // fixed-frame lattice (elliptic solves)
  int fp_N = 256;
  double fp_half_width = 0.0;  // 0: 1.45 x layer-1 extent
  int samples_per_epoch = 8;
  double phi_epsilon = 0.5;
  int phi_lip_grid = 1024;
  double banach_tol = 1e-8;
  int banach_max_iter = 200;
  int contraction_pairs = 20;
  int ladder_rungs = 12;
  unsigned long long seed = 1;
  double screened_tol = 1e-10;

  // moving-frame resolution and monitor
  int monitor_cells_per_half_pi = 1;
  int monitor_time_intervals = 64;
  int support_cells = 257;

  // residual ladders
  std::vector<int> euler_sizes{512, 1024, 2048};
  std::vector<double> euler_times;  // empty: the middle sample of epoch 1
  double residual_tol = 1e-10;
  double refinement_ratio = 3.5;
  std::vector<int> mass_sizes{256, 512, 1024};
  std::vector<int> consistency_sizes{256, 512, 1024};

  // dumps
  std::vector<double> dump_times;  // empty: middle of every epoch
  int dump_N = 256;

  // poisson-bench
  int bench_N = 512;
  double bench_half_width = 4.0;
  std::vector<double> bench_diams{0.5, 0.75, 1.0, 1.5};
  double bench_p = 4.0, bench_q = 8.0, bench_r = 1.5, bench_alpha = 0.5;

  /// Built and validated construction parameters (throws ConfigError).
  ConstructionParams params() const;
  /// Throws ConfigError on out-of-range settings.
  void validate() const;

  /// Fully resolved config, every key in a fixed order.
  void write(std::ostream& os) const;
};

/// Preset defaults: "desk" or "schedule-only".
RunConfig preset_config(const std::string& name);

/// Applies key=value lines on top of cfg. '#' starts a comment; unknown keys,
/// duplicate keys and malformed values throw ConfigError.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);

}  // namespace blowup::cli
