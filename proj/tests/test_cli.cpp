#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "manifest.hpp"
#include "run_config.hpp"

using namespace blowup::cli;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("blowup_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("blowup_cli_" + name + ".cfg");
  std::ofstream(p) << text;
  return p;
}

struct RunResult {
  int code = -1;
  std::string output;
};
// Runs the installed-layout binary; stdout and stderr land in a log next to the out dir.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log = fs::temp_directory_path() / ("blowup_cli_log_" + std::to_string(counter++));
  const std::string cmd = std::string(BLOWUP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

std::string header(const fs::path& csv) {
  std::ifstream in(csv);
  std::string h;
  std::getline(in, h);
  return h;
}

int data_rows(const fs::path& csv) {
  std::ifstream in(csv);
  int n = -1;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out[e.path().filename().string()] = slurp(e.path());
  return out;
}

// Fast fixed-point settings; the default lattice runs in the verify tests below.
const char* kSmallLattice =
    "fp_N = 64\nsamples_per_epoch = 2\nphi_lip_grid = 256\ncontraction_pairs = 4\n";
}  // namespace

TEST(Config, DefaultsMatchDeskPreset) {
  const RunConfig c = preset_config("desk");
  EXPECT_EQ(c.C, 4.0);
  EXPECT_EQ(c.gamma, 0.6);
  EXPECT_EQ(c.delta, 0.4);
  EXPECT_EQ(c.n_max, 3);
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(preset_config("huge"), ConfigError);
}

TEST(Config, UnknownDuplicateAndMalformedKeys) {
  RunConfig c = preset_config("desk");
  EXPECT_THROW(apply_config_text(c, "colour = red\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "gamma = 0.5\ngamma = 0.6\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "gamma = half\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "gamma\n"), ConfigError);
  RunConfig ok = preset_config("desk");
  apply_config_text(ok, "# comment\n\ngamma = 0.5  # trailing\nn_max = 2\n");
  EXPECT_EQ(ok.gamma, 0.5);
  EXPECT_EQ(ok.n_max, 2);
}

TEST(Config, InvalidGammaIsRejected) {
  RunConfig c = preset_config("desk");
  apply_config_text(c, "gamma = 1.5\n");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, PresetKeyResetsDefaults) {
  RunConfig c = preset_config("desk");
  apply_config_text(c, "preset = schedule-only\n");
  EXPECT_EQ(c.preset, "schedule-only");
  EXPECT_EQ(c.out_dir, preset_config("schedule-only").out_dir);
}

TEST(Config, ResolvedConfigRoundTrip) {
  RunConfig c = preset_config("desk");
  apply_config_text(c, "gamma = 0.55\neuler_sizes = 64,128\nseed = 17\n");
  std::ostringstream a;
  c.write(a);
  RunConfig back = preset_config("desk");
  apply_config_text(back, a.str());
  std::ostringstream b;
  back.write(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.euler_sizes, (std::vector<int>{64, 128}));
}

TEST(Manifest, KnownDigest) {
  EXPECT_EQ(sha256_bytes("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_bytes(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Manifest, WriteAndCheck) {
  const fs::path dir = scratch("manifest");
  fs::create_directories(dir);
  std::ofstream(dir / "b.csv") << "x\n1\n";
  std::ofstream(dir / "a.txt") << "hello";
  EXPECT_FALSE(check_manifest(dir.string()).present);
  write_manifest(dir.string());
  const std::string m = slurp(dir / kManifestName);
  EXPECT_EQ(m.substr(0, 64), sha256_bytes("hello"));
  EXPECT_NE(m.find("  a.txt\n"), std::string::npos);
  EXPECT_LT(m.find("a.txt"), m.find("b.csv"));
  EXPECT_TRUE(check_manifest(dir.string()).ok());
  std::ofstream(dir / "b.csv") << "x\n2\n";
  fs::remove(dir / "a.txt");
  const ManifestCheck c = check_manifest(dir.string());
  EXPECT_EQ(c.mismatched, (std::vector<std::string>{"b.csv"}));
  EXPECT_EQ(c.missing, (std::vector<std::string>{"a.txt"}));
}

TEST(Cli, VersionAndUsage) {
  const RunResult v = run_cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.output.find(version_string()), std::string::npos);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("layers --threads -1").code, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path out = scratch("cfgerr");
  EXPECT_EQ(run_cli("layers --config " + write_config("gamma", "gamma = 1.5\n").string() + " --out " + out.string()).code, 2);
  EXPECT_EQ(run_cli("layers --config " + write_config("unknown", "colour = red\n").string() + " --out " + out.string()).code, 2);
  EXPECT_EQ(run_cli("layers --config /nonexistent/x.cfg --out " + out.string()).code, 2);
  EXPECT_EQ(run_cli("layers --preset nope --out " + out.string()).code, 2);
  const fs::path conflict = write_config("conflict", "preset = schedule-only\n");
  EXPECT_EQ(run_cli("layers --preset desk --config " + conflict.string() + " --out " + out.string()).code, 2);
  EXPECT_EQ(run_cli("fixedpoint --preset schedule-only --out " + out.string()).code, 2);
}

TEST(Cli, LayersDefaultPreset) {
  const fs::path out = scratch("layers");
  ASSERT_EQ(run_cli("layers --quiet --out " + out.string()).code, 0);
  for (const char* f : {"layer_1.csv", "layer_2.csv", "layer_3.csv", "schedule.csv", "kbar_profiles.csv",
                        "layers_summary.csv", kConfigName, kVersionName, kManifestName})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_FALSE(fs::exists(out / "layer_4.csv"));
  EXPECT_EQ(header(out / "schedule.csv"),
            "n,t_n,log_one_minus_t_n,log_lambda_n,log_M_n,log_ab_endpoint,kbar_uniform_bound");
  EXPECT_EQ(data_rows(out / "schedule.csv"), 4);  // t_1 .. t_4
  EXPECT_EQ(header(out / "layer_2.csv"), "t,a,b,B,k,center1");
  EXPECT_GT(data_rows(out / "layer_2.csv"), 100);
  EXPECT_EQ(header(out / "kbar_profiles.csv"), "that,kbar_1,kbar_2,kbar_3,tent");
  // dumps for psi, rho, omega, f_omega at each epoch midpoint
  for (const char* f : {"psi", "rho", "omega", "f_omega"})
    for (int q = 0; q < 3; ++q) {
      const std::string stem = std::string("field_") + f + "_t" + std::to_string(q);
      EXPECT_TRUE(fs::exists(out / (stem + ".bin"))) << stem;
      EXPECT_EQ(fs::file_size(out / (stem + ".bin")), 256u * 256u * 8u);
    }
  EXPECT_TRUE(check_manifest(out.string()).ok());
  EXPECT_NE(slurp(out / kConfigName).find("gamma = 0.6"), std::string::npos);
  EXPECT_EQ(slurp(out / kVersionName).rfind("blowup ", 0), 0u);
}

TEST(Cli, LayersSingleLayer) {
  const fs::path out = scratch("single");
  const fs::path cfg = write_config("single", "n_max = 1\n");
  ASSERT_EQ(run_cli("layers --quiet --config " + cfg.string() + " --out " + out.string()).code, 0);
  EXPECT_TRUE(fs::exists(out / "layer_1.csv"));
  EXPECT_FALSE(fs::exists(out / "layer_2.csv"));
  EXPECT_EQ(data_rows(out / "schedule.csv"), 2);
}

TEST(Cli, LayersScheduleOnly) {
  const fs::path out = scratch("schedonly");
  ASSERT_EQ(run_cli("layers --quiet --preset schedule-only --out " + out.string()).code, 0);
  EXPECT_TRUE(fs::exists(out / "schedule.csv"));
  EXPECT_FALSE(fs::exists(out / "layer_1.csv"));
  EXPECT_GE(data_rows(out / "schedule.csv"), 7);
  EXPECT_TRUE(check_manifest(out.string()).ok());
}

TEST(Cli, RunsAreByteIdentical) {
  const fs::path a = scratch("same_a"), b = scratch("same_b");
  ASSERT_EQ(run_cli("layers --quiet --out " + a.string()).code, 0);
  ASSERT_EQ(run_cli("layers --quiet --out " + b.string()).code, 0);
  const fs::path cfg = write_config("same_fp", kSmallLattice);
  ASSERT_EQ(run_cli("fixedpoint --quiet --config " + cfg.string() + " --out " + a.string()).code, 0);
  ASSERT_EQ(run_cli("fixedpoint --quiet --config " + cfg.string() + " --out " + b.string()).code, 0);
  const auto ca = csv_files(a), cb = csv_files(b);
  EXPECT_GE(ca.size(), 10u);
  EXPECT_EQ(ca, cb);
  EXPECT_EQ(slurp(a / "field_a_star_1_e2.bin"), slurp(b / "field_a_star_1_e2.bin"));
}

TEST(Cli, FixedPointSmallLattice) {
  const fs::path out = scratch("fp_small");
  const fs::path cfg = write_config("fp_small", kSmallLattice);
  ASSERT_EQ(run_cli("fixedpoint --quiet --config " + cfg.string() + " --out " + out.string()).code, 0);
  EXPECT_EQ(header(out / "contraction.csv"), "rho_bar,max_ratio,mean_ratio,pairs,selected");
  EXPECT_EQ(header(out / "iteration_history.csv"), "iter,distance,ratio,residual,symmetry_defect");
  EXPECT_EQ(header(out / "g_trace.csv"), "t,g1,g2");
  EXPECT_EQ(data_rows(out / "g_trace.csv"), 6);
  EXPECT_NE(slurp(out / "fixedpoint_summary.csv").find("converged,1"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "screened.csv"));
  EXPECT_TRUE(fs::exists(out / "field_a_star_2_e3.txt"));
}

TEST(Cli, FixedPointLooseToleranceOneIteration) {
  const fs::path out = scratch("fp_loose");
  const fs::path cfg = write_config("fp_loose", std::string(kSmallLattice) + "banach_tol = 1e0\n");
  ASSERT_EQ(run_cli("fixedpoint --quiet --config " + cfg.string() + " --out " + out.string()).code, 0);
  EXPECT_EQ(data_rows(out / "iteration_history.csv"), 1);
  EXPECT_NE(slurp(out / "fixedpoint_summary.csv").find("iterations,1\n"), std::string::npos);
}

TEST(Cli, FixedPointTinyRhoBarFails) {
  const fs::path out = scratch("fp_tiny");
  const fs::path cfg = write_config("fp_tiny", std::string(kSmallLattice) + "rho_bar = 1e-3\n");
  const RunResult r = run_cli("fixedpoint --config " + cfg.string() + " --out " + out.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("distance ratio above 1"), std::string::npos);
}

TEST(Cli, FixedPointDefaultConverges) {
  const fs::path out = scratch("fp_default");
  ASSERT_EQ(run_cli("fixedpoint --quiet --out " + out.string()).code, 0);
  std::ifstream in(out / "fixedpoint_summary.csv");
  std::map<std::string, double> kv;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    kv[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  EXPECT_EQ(kv.at("converged"), 1.0);
  EXPECT_LE(kv.at("iterations"), 200.0);
  EXPECT_LT(kv.at("max_bracket"), 1e-8);
  EXPECT_EQ(kv.at("max_g2"), 0.0);
}

TEST(Cli, VerifyRejectsCorruptedDump) {
  const fs::path out = scratch("corrupt");
  ASSERT_EQ(run_cli("layers --quiet --out " + out.string()).code, 0);
  {
    std::fstream f(out / "field_rho_t1.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(1000);
    f.put('\x7f');
  }
  const RunResult r = run_cli("verify --out " + out.string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("field_rho_t1.bin"), std::string::npos);
}

TEST(Cli, VerifyRejectsTruncatedDump) {
  const fs::path out = scratch("truncated");
  ASSERT_EQ(run_cli("layers --quiet --out " + out.string()).code, 0);
  fs::resize_file(out / "field_psi_t0.bin", 1024);
  write_manifest(out.string());  // digests agree, the sidecar does not
  EXPECT_EQ(run_cli("verify --quiet --out " + out.string()).code, 3);
}

TEST(Cli, VerifyDefaultPasses) {
  const fs::path out = scratch("verify");
  ASSERT_EQ(run_cli("layers --quiet --out " + out.string()).code, 0);
  const RunResult r = run_cli("verify --quiet --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(header(out / "verify_report.csv"), "check,t,h,value,threshold,asserted,pass");
  EXPECT_GT(data_rows(out / "verify_report.csv"), 40);
  EXPECT_TRUE(check_manifest(out.string()).ok());
}

TEST(Cli, VerifyAblationFailsOnEuler) {
  const fs::path out = scratch("ablate");
  const RunResult r = run_cli("verify --quiet --ablate-g --out " + out.string());
  EXPECT_EQ(r.code, 1);
  const std::string report = slurp(out / "verify_report_ablate_g.csv");
  EXPECT_NE(report.find("euler_vorticity_refinement_ablate_g_finest,"), std::string::npos);
  EXPECT_NE(r.output.find("euler_vorticity_refinement"), std::string::npos);
  // nothing outside the Euler ladder changes
  std::istringstream is(report);
  for (std::string line; std::getline(is, line);)
    if (line.size() > 2 && line.substr(line.size() - 2) == ",0") {
      EXPECT_EQ(line.rfind("euler_", 0), 0u) << line;
    }
}
