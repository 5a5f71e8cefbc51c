/// @file commands.hpp
/// Subcommand bodies of the command line driver.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blowup/harness.hpp"
#include "run_config.hpp"

namespace blowup::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kIoError = 3 };

struct Context {
  RunConfig cfg;
  std::string out = "out";
  bool ablate_g = false;
  std::ostream* log = nullptr;  // progress lines; null for silence
};

int cmd_layers(const Context& ctx);
int cmd_fixedpoint(const Context& ctx);
int cmd_verify(const Context& ctx);
int cmd_phi(const Context& ctx);
int cmd_poisson_bench(const Context& ctx);

/// Runs a command and maps the library's exceptions onto exit codes.
int run_guarded(int (*cmd)(const Context&), const Context& ctx, std::ostream& err);

/// The verify suite without any I/O; rows in report order.
std::vector<CheckRow> verification_checks(const RunConfig& cfg, bool ablate_g,
                                          std::ostream* log = nullptr);

}  // namespace blowup::cli
