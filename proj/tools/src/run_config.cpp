#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>
#include <variant>

namespace blowup::cli {
namespace {

using Slot = std::variant<double*, int*, unsigned long long*, std::string*, std::vector<int>*,
                          std::vector<double>*>;

std::vector<std::pair<const char*, Slot>> slots(RunConfig& c) {
  return {
      {"out_dir", &c.out_dir},
      {"C", &c.C},
      {"gamma", &c.gamma},
      {"delta", &c.delta},
      {"mu", &c.mu},
      {"alpha", &c.alpha},
      {"rho_bar", &c.rho_bar},
      {"n_max", &c.n_max},
      {"ode_steps_per_epoch", &c.ode_steps_per_epoch},
      {"ode_halving_tol", &c.ode_halving_tol},
      {"fp_N", &c.fp_N},
      {"fp_half_width", &c.fp_half_width},
      {"samples_per_epoch", &c.samples_per_epoch},
      {"phi_epsilon", &c.phi_epsilon},
      {"phi_lip_grid", &c.phi_lip_grid},
      {"banach_tol", &c.banach_tol},
      {"banach_max_iter", &c.banach_max_iter},
      {"contraction_pairs", &c.contraction_pairs},
      {"ladder_rungs", &c.ladder_rungs},
      {"seed", &c.seed},
      {"screened_tol", &c.screened_tol},
      {"monitor_cells_per_half_pi", &c.monitor_cells_per_half_pi},
      {"monitor_time_intervals", &c.monitor_time_intervals},
      {"support_cells", &c.support_cells},
      {"euler_sizes", &c.euler_sizes},
      {"euler_times", &c.euler_times},
      {"residual_tol", &c.residual_tol},
      {"refinement_ratio", &c.refinement_ratio},
      {"mass_sizes", &c.mass_sizes},
      {"consistency_sizes", &c.consistency_sizes},
      {"dump_times", &c.dump_times},
      {"dump_N", &c.dump_N},
      {"bench_N", &c.bench_N},
      {"bench_half_width", &c.bench_half_width},
      {"bench_diams", &c.bench_diams},
      {"bench_p", &c.bench_p},
      {"bench_q", &c.bench_q},
      {"bench_r", &c.bench_r},
      {"bench_alpha", &c.bench_alpha},
  };
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError("non-finite value for " + key);
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  return out;
}

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

void assign(const std::string& key, Slot slot, const std::string& v) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>)
          *p = v;
        else if constexpr (std::is_same_v<T, std::vector<int>>)
          *p = parse_list<int>(key, v);
        else if constexpr (std::is_same_v<T, std::vector<double>>)
          *p = parse_list<double>(key, v);
        else
          *p = parse_number<T>(key, v);
      },
      slot);
}

}  // namespace

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "desk") return c;
  if (name == "schedule-only") {
    // Proof-regime scales: exercised through log-domain schedules only.
    c.preset = name;
    c.C = 1e4;
    c.gamma = 0.9;
    c.delta = 0.05;
    c.n_max = 6;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk or schedule-only)");
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  bool any_key = false;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key " + key);
    if (key == "preset") {
      if (any_key) throw ConfigError("preset must precede all other keys");
      cfg = preset_config(value);
      any_key = true;
      continue;
    }
    any_key = true;
    bool found = false;
    for (auto& [name, slot] : slots(cfg))
      if (key == name) {
        assign(key, slot, value);
        found = true;
        break;
      }
    if (!found) throw ConfigError("unknown key " + key);
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

ConstructionParams RunConfig::params() const {
  try {
    return ConstructionParams::make(C, gamma, delta, mu, alpha, rho_bar, n_max);
  } catch (const ParamError& e) {
    throw ConfigError(e.what());
  }
}

void RunConfig::validate() const {
  (void)params();
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(ode_steps_per_epoch >= 64, "ode_steps_per_epoch must be >= 64");
  need(ode_halving_tol > 0, "ode_halving_tol must be > 0");
  need(fp_N >= 16 && fp_N % 2 == 0, "fp_N must be even and >= 16");
  need(fp_half_width >= 0, "fp_half_width must be >= 0");
  need(samples_per_epoch >= 1, "samples_per_epoch must be >= 1");
  need(phi_epsilon > 0 && phi_epsilon < 1, "phi_epsilon must lie in (0,1)");
  need(phi_lip_grid >= 64, "phi_lip_grid must be >= 64");
  need(banach_tol > 0, "banach_tol must be > 0");
  need(banach_max_iter >= 1, "banach_max_iter must be >= 1");
  need(contraction_pairs >= 1, "contraction_pairs must be >= 1");
  need(ladder_rungs >= 1, "ladder_rungs must be >= 1");
  need(screened_tol > 0, "screened_tol must be > 0");
  need(monitor_cells_per_half_pi >= 1, "monitor_cells_per_half_pi must be >= 1");
  need(monitor_time_intervals >= 2, "monitor_time_intervals must be >= 2");
  need(support_cells >= 3, "support_cells must be >= 3");
  need(euler_sizes.size() >= 2 && mass_sizes.size() >= 2 && consistency_sizes.size() >= 2,
       "refinement ladders need at least 2 sizes");
  for (const auto* v : {&euler_sizes, &mass_sizes, &consistency_sizes})
    for (int n : *v) need(n >= 16 && n % 2 == 0, "ladder sizes must be even and >= 16");
  for (double t : euler_times) need(t >= 0 && t < 1, "euler_times must lie in [0,1)");
  for (double t : dump_times) need(t >= 0 && t < 1, "dump_times must lie in [0,1)");
  need(dump_N >= 16 && dump_N % 2 == 0, "dump_N must be even and >= 16");
  need(bench_N >= 16 && bench_half_width > 0 && bench_diams.size() >= 2, "bad poisson-bench settings");
  need(bench_p > 1 && bench_q > 1 && bench_r > 1 && bench_alpha > 0 && bench_alpha <= 1,
       "bad poisson-bench exponents");
}

void RunConfig::write(std::ostream& os) const {
  os << "preset = " << preset << '\n';
  RunConfig& self = const_cast<RunConfig&>(*this);
  for (auto& [name, slot] : slots(self)) {
    os << name << " = ";
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>)
            os << fmt(*p);
          else if constexpr (std::is_same_v<T, std::vector<int>> ||
                             std::is_same_v<T, std::vector<double>>)
            os << fmt_list(*p);
          else
            os << *p;
        },
        slot);
    os << '\n';
  }
}

}  // namespace blowup::cli
