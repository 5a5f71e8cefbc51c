#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "blowup/harness.hpp"

using namespace blowup;

namespace {
struct Desk {
  Dynamics dyn = integrate_layers(ConstructionParams::desk(), DynamicsOptions{});
  FieldStack stack = FieldStack::recentered(dyn);
  double R1 = layer_one_extent(stack);
  double mid(int n) const { return 0.5 * (dyn.schedule()[n - 1] + dyn.schedule()[n]); }
};
const Desk& desk() {
  static const Desk d;
  return d;
}
}  // namespace

TEST(Harness, SymmetrySuiteIsExactOnCenteredGrids) {
  const Desk& d = desk();
  for (int n = 1; n <= 3; ++n) {
    const SymmetryReport s = symmetry_suite(d.stack, d.mid(n), Grid2D::centered(64, 1.45 * d.R1));
    EXPECT_LE(s.max(), 1e-13) << n;
  }
}

TEST(Harness, FieldConsistencyRefines) {
  const Desk& d = desk();
  const ConsistencyReport c1 = field_consistency(d.stack, d.mid(1), Grid2D::centered(128, d.R1));
  const ConsistencyReport c2 = field_consistency(d.stack, d.mid(1), Grid2D::centered(256, d.R1));
  EXPECT_GT(c1.max() / c2.max(), 3.5);
}

TEST(Harness, MassIdentityAndRefinement) {
  const Desk& d = desk();
  std::vector<ResidualReport> ladder;
  for (int N : {128, 256, 512}) {
    double identity = -1.0;
    ladder.push_back(mass_equation_check(d.stack, d.mid(1), Grid2D::centered(N, 1.45 * d.R1), 1.0, &identity));
    EXPECT_LE(identity, 1e-9);
  }
  fill_refinement_ratios(ladder);
  EXPECT_EQ(ladder[0].ratio, 0.0);
  EXPECT_GT(ladder[2].ratio, 3.5);
  EXPECT_LT(ladder[2].residual, ladder[1].residual);
}

TEST(Harness, MassResidualIgnoresRhoBar) {
  // rho_bar is constant in space and time, so it drops out of the transport residual
  const Desk& d = desk();
  const Grid2D g = Grid2D::centered(64, 1.45 * d.R1);
  const double r1 = mass_equation_check(d.stack, d.mid(1), g, 1.0).residual;
  const double r2 = mass_equation_check(d.stack, d.mid(1), g, 1000.0).residual;
  EXPECT_NEAR(r1, r2, 1e-9 * (1.0 + r1));
}

TEST(Harness, MonitorIncreasesAndMatchesClosedForm) {
  const std::vector<MonitorRow> mon = blowup_monitor(desk().stack);
  ASSERT_EQ(mon.size(), 3u);
  for (std::size_t n = 1; n < mon.size(); ++n) EXPECT_GT(mon[n].I, mon[n - 1].I);
  for (const MonitorRow& r : mon) {
    EXPECT_LE(std::fabs(r.I_plus_peak - r.I_plus_closed), 1e-6 * r.I_plus_closed) << r.n;
    EXPECT_GE(r.I_plus, r.I_plus_closed * (1.0 - 1e-12));
    EXPECT_GE(r.I, r.I_plus * (1.0 - 1e-12));
  }
  std::ostringstream os;
  write_monitor_csv(mon, os);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Harness, SupportStaysInsideLayerBox) {
  const Desk& d = desk();
  const std::vector<double>& s = d.dyn.schedule();
  const std::vector<SupportRow> rows = support_tracker(d.stack, {d.mid(1), d.mid(2), d.mid(3)}, 65);
  ASSERT_EQ(rows.size(), 3u);
  for (const SupportRow& r : rows) {
    EXPECT_GT(r.radius, 0.0);
    EXPECT_LE(r.radius, r.box_radius);
  }
  EXPECT_EQ(rows[1].epoch, 2);
  EXPECT_LT(rows[2].radius, rows[0].radius);
  EXPECT_GT(s[1], d.mid(1));
}

TEST(Harness, CheckCsvFormat) {
  std::ostringstream os;
  write_check_csv({CheckRow{"x", 0.5, 0.1, 2.0, 3.0, false, true}}, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "check,t,h,value,threshold,asserted,pass");
  EXPECT_NE(os.str().find("x,0.5,0.10000000000000001,2,3,0,1"), std::string::npos);
}

TEST(Harness, EulerResidualRefinesAndAblationDoesNot) {
  const Desk& d = desk();
  const PhiPotential phi = build_phi(0.5, default_phi_support(d.stack), 1024);
  FixedPointConfig cfg;
  cfg.times = {d.mid(1)};
  cfg.phi_lip_grid = 1024;
  // the selected rho_bar of the desk preset
  const EulerLadder lad = euler_refinement(d.stack, phi, cfg, {128, 256, 512}, 3.5502331329227244, 1e-10, 200);
  ASSERT_EQ(lad.normal.size(), 1u);
  const std::vector<ResidualReport>& n = lad.normal[0];
  const std::vector<ResidualReport>& a = lad.ablated[0];
  ASSERT_EQ(n.size(), 3u);
  EXPECT_LT(n[2].residual, n[1].residual);
  EXPECT_LT(n[1].residual, n[0].residual);
  EXPECT_GT(n[2].ratio, 3.0);
  // dropping g Phi leaves an O(1) residual that refinement cannot remove
  EXPECT_LT(a[2].ratio, 1.5);
  EXPECT_GT(a[2].residual, 3.0 * n[2].residual);
}
