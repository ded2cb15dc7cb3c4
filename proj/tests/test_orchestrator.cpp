#include <gtest/gtest.h>

#include "ntnopt/orchestrator.hpp"
#include "test_util.hpp"

using namespace ntnopt;
using namespace ntnopt::testutil;

TEST(MaxRsrp, PicksStrongestAndIgnoresCommonScaling) {
  Topology topo = tiny_topology(2, 0, 1);
  RadioConfig radio;
  const auto chan = manual_channel(topo, {{1e-12, 2e-12}});
  EXPECT_EQ(max_rsrp_association(topo, chan, {1.0, 1.0})[0], 1);
  EXPECT_EQ(max_rsrp_association(topo, chan, {7.0, 7.0})[0], 1);
}

TEST(MaxRsrp, MatchesBruteForceOnRandomInstances) {
  Topology topo = tiny_topology(4, 1, 20);
  const auto chan = random_channel(topo, 123);
  std::vector<double> p{0.05, 0.03, 0.06, 0.02, 0.04};
  const auto serving = max_rsrp_association(topo, chan, p);
  for (int i = 0; i < 20; ++i) {
    int best = 0;
    for (int j = 1; j < 5; ++j)
      if (chan.gain(i, j) * p[std::size_t(j)] >
          chan.gain(i, best) * p[std::size_t(best)])
        best = j;
    EXPECT_EQ(serving[std::size_t(i)], best);
  }
}

namespace {

struct Snapshot {
  Topology topo;
  ChannelState chan;
  RadioConfig radio;
};

Snapshot desk_lite(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.area_side_km = 8.0;
  cfg.ue_density_per_km2 = 0.75;  // 48 UEs
  cfg.hex_rings = 1;              // 7 macros
  cfg.rng_seed = seed;
  Snapshot snap;
  snap.topo = make_topology(cfg, {17.7, 14.0}, {15.8, 30.0});
  snap.chan = build_channel_state(snap.topo, ChannelParams{}, seed * 977 + 3);
  return snap;
}

}  // namespace

TEST(RunPolicy, BaselineServesFromMacrosOnlyOnTenMegahertz) {
  Snapshot snap = desk_lite(1);
  OrchestratorOptions opts;
  const Policy policy{PolicyKind::kBaselineTnOnly, 0.0};
  const RunReport report = run_policy(snap.topo, snap.chan, snap.radio, policy, opts);
  ASSERT_EQ(int(report.per_ue.size()), snap.topo.ue_count());
  for (const auto& u : report.per_ue) {
    EXPECT_LT(u.serving_bs, snap.topo.macro_count());
    EXPECT_EQ(u.tier, 't');
  }
  // Spot-check one covered UE's rate against a hand evaluation on 10 MHz.
  const auto& u = *std::find_if(report.per_ue.begin(), report.per_ue.end(),
                                [](const UeRecord& r) { return r.covered; });
  AllocationState alloc;
  alloc.serving.resize(std::size_t(snap.topo.ue_count()));
  for (const auto& rec : report.per_ue) alloc.serving[std::size_t(rec.ue)] = rec.serving_bs;
  alloc.load = alloc.integer_loads(snap.topo.bs_count());
  alloc.power_w = max_powers(snap.topo);
  RadioConfig ten = snap.radio;
  ten.total_bandwidth_hz = 10e6;
  const double g = sinr(u.ue, u.serving_bs, snap.topo, snap.chan, alloc.power_w, ten);
  const double expected =
      link_rate_bps(snap.topo, u.serving_bs, g, 0.0, alloc.load[std::size_t(u.serving_bs)], ten);
  EXPECT_NEAR(u.rate_bps, expected, 1e-6 * expected);
}

TEST(RunPolicy, ThreegppSplitUsesThreeQuartersForTheSatellite) {
  Snapshot snap = desk_lite(2);
  OrchestratorOptions opts;
  const RunReport report =
      run_policy(snap.topo, snap.chan, snap.radio, {PolicyKind::kThreegppSplit, 0.0}, opts);
  EXPECT_DOUBLE_EQ(report.sat_share_final, 0.75);
}

TEST(RunPolicy, TrivialSingleUeNetworkAgreesAcrossPolicies) {
  Topology topo = tiny_topology(1, 1, 1);
  RadioConfig radio;
  // Macro far stronger than the satellite and above the coverage threshold.
  const auto chan = manual_channel(topo, {{1e-9, 1e-13}});
  OrchestratorOptions opts;
  std::vector<Policy> policies{{PolicyKind::kBaselineTnOnly, 0.0},
                               {PolicyKind::kThreegppSplit, 0.0},
                               {PolicyKind::kFixedEpsilon, 0.5},
                               {PolicyKind::kFrameworkOptimal, 0.0}};
  for (const auto& policy : policies) {
    const RunReport report = run_policy(topo, chan, radio, policy, opts);
    EXPECT_EQ(report.per_ue[0].serving_bs, 0) << policy.name();
    EXPECT_TRUE(report.per_ue[0].covered) << policy.name();
  }
}

TEST(RunPolicy, FrameworkNeverFallsBelowItsOwnInitialization) {
  for (std::uint64_t seed : {3, 4, 5}) {
    Snapshot snap = desk_lite(seed);
    OrchestratorOptions opts;
    const RunReport report = run_policy(snap.topo, snap.chan, snap.radio,
                                        {PolicyKind::kFrameworkOptimal, 0.0}, opts);
    // Initialization: max-RSRP association, split 0.5, max power.
    AllocationState init;
    init.power_w = max_powers(snap.topo);
    init.serving = max_rsrp_association(snap.topo, snap.chan, init.power_w);
    init.load = init.integer_loads(snap.topo.bs_count());
    init.sat_share = 0.5;
    const double init_slt = network_slt_covered(init, snap.topo, snap.chan, snap.radio);
    EXPECT_GE(report.slt, init_slt - 1e-9) << "seed " << seed;
  }
}

TEST(RunPolicy, ReportStatisticsIncludeZeroRateUes) {
  Topology topo = tiny_topology(1, 0, 10);
  RadioConfig radio;
  std::vector<std::vector<double>> beta(10, std::vector<double>(1, 1e-10));
  beta[7][0] = 1e-20;  // hopeless UE
  beta[8][0] = 1e-20;  // another one
  const auto chan = manual_channel(topo, beta);
  OrchestratorOptions opts;
  const RunReport report =
      run_policy(topo, chan, radio, {PolicyKind::kBaselineTnOnly, 0.0}, opts);
  EXPECT_NEAR(report.coverage_ratio, 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(report.p5_rate_bps, 0.0);  // 20% zeros pull the 5th percentile to 0
  EXPECT_GT(report.mean_rate_bps, 0.0);
  int zero_rates = 0;
  for (const auto& u : report.per_ue) zero_rates += u.rate_bps == 0.0 ? 1 : 0;
  EXPECT_EQ(zero_rates, 2);
}

TEST(ComparePolicies, RowsAndSnapshotDiscipline) {
  Snapshot snap = desk_lite(6);
  OrchestratorOptions opts;
  const RunReport a =
      run_policy(snap.topo, snap.chan, snap.radio, {PolicyKind::kBaselineTnOnly, 0.0}, opts);
  const RunReport b =
      run_policy(snap.topo, snap.chan, snap.radio, {PolicyKind::kThreegppSplit, 0.0}, opts);
  const ComparisonTable table = compare_policies({a, b});
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].policy, "baseline_tn_only");
  EXPECT_EQ(table.rows[1].policy, "threegpp_split");

  // Identical policies produce identical rows.
  const RunReport a2 =
      run_policy(snap.topo, snap.chan, snap.radio, {PolicyKind::kBaselineTnOnly, 0.0}, opts);
  const ComparisonTable twice = compare_policies({a, a2});
  EXPECT_DOUBLE_EQ(twice.rows[0].mean_mbps, twice.rows[1].mean_mbps);
  EXPECT_DOUBLE_EQ(twice.rows[0].coverage_pct, twice.rows[1].coverage_pct);

  // Reports from different snapshots must be rejected.
  Snapshot other = desk_lite(7);
  const RunReport c = run_policy(other.topo, other.chan, other.radio,
                                 {PolicyKind::kBaselineTnOnly, 0.0}, opts);
  EXPECT_THROW(compare_policies({a, c}), std::invalid_argument);
}

TEST(RunPolicy, CoverageInfeasibleLinksAreFlaggedNotFatal) {
  Topology topo = tiny_topology(2, 0, 3);
  RadioConfig radio;
  // UE 2 cannot be covered by anyone even at max power.
  const auto chan = manual_channel(
      topo, {{1e-10, 1e-12}, {1e-12, 1e-10}, {1e-17, 1e-17}});
  OrchestratorOptions opts;
  const RunReport report = run_policy(topo, chan, radio,
                                      {PolicyKind::kFrameworkOptimal, 0.0}, opts);
  EXPECT_TRUE(report.coverage_infeasible);
  EXPECT_FALSE(report.per_ue[2].covered);
  EXPECT_DOUBLE_EQ(report.per_ue[2].rate_bps, 0.0);
  EXPECT_LT(report.coverage_ratio, 1.0);
}
