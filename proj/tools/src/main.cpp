#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "blowup/parallel.hpp"
#include "commands.hpp"
#include "manifest.hpp"

using namespace blowup::cli;

int main(int argc, char** argv) {
  CLI::App app{"Finite-time blow-up construction: layers, fixed point and verification"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path, out, preset;
  int threads = 0;
  bool ablate_g = false;
  bool quiet = false;

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Context&);
  };
  const Sub subs[] = {
      {"layers", "Integrate the layer ODEs; write trajectories, schedule and field dumps", cmd_layers},
      {"fixedpoint", "Contraction search and Banach iteration for the pressure-gradient field",
       cmd_fixedpoint},
      {"verify", "Run every asserted check and write the master report", cmd_verify},
      {"phi", "Build the screening potential and measure its Lipschitz bound", cmd_phi},
      {"poisson-bench", "Diameter-scaling estimates of the Poisson solver", cmd_poisson_bench},
  };
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", config_path, "Flat key=value config file");
    sc->add_option("--out", out, "Output directory (overrides out_dir)");
    sc->add_option("--threads", threads, "Worker cap for data-parallel loops")->check(CLI::NonNegativeNumber);
    sc->add_option("--preset", preset, "desk or schedule-only");
    sc->add_flag("--quiet", quiet, "No progress lines");
    if (std::string(s.name) == "verify")
      sc->add_flag("--ablate-g", ablate_g, "Drop g Phi from the force in the vorticity residual");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  const Sub* chosen = nullptr;
  for (const Sub& s : subs)
    if (app.got_subcommand(s.name)) chosen = &s;

  Context ctx;
  try {
    ctx.cfg = preset_config(preset.empty() ? "desk" : preset);
    if (!config_path.empty()) apply_config_file(ctx.cfg, config_path);
    if (!preset.empty() && ctx.cfg.preset != preset)
      throw ConfigError("--preset " + preset + " conflicts with preset " + ctx.cfg.preset +
                        " in the config file");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (!out.empty()) ctx.cfg.out_dir = out;
  ctx.out = ctx.cfg.out_dir;
  ctx.ablate_g = ablate_g;
  ctx.log = quiet ? nullptr : &std::cerr;
  if (threads > 0) blowup::set_thread_count(threads);

  return run_guarded(chosen->fn, ctx, std::cerr);
}
