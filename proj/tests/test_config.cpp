#include <gtest/gtest.h>

#include "ntnopt/config.hpp"

using namespace ntnopt;

TEST(Config, DefaultsCarryTheDocumentedRadioTable) {
  CampaignConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.radio.total_bandwidth_hz, 40e6);
  EXPECT_DOUBLE_EQ(cfg.radio.subcarrier_spacing_hz, 15e3);
  EXPECT_DOUBLE_EQ(cfg.radio.noise_density_dbm_per_hz, -174.0);
  EXPECT_DOUBLE_EQ(cfg.radio.coverage_threshold_dbm, -120.0);
  EXPECT_DOUBLE_EQ(cfg.radio.tn_max_power_per_re_dbm, 17.7);
  EXPECT_DOUBLE_EQ(cfg.radio.ntn_max_power_per_re_dbm, 15.8);
  EXPECT_DOUBLE_EQ(cfg.channel.tn_antenna_gain_dbi, 14.0);
  EXPECT_DOUBLE_EQ(cfg.channel.ntn_antenna_gain_dbi, 30.0);
  EXPECT_DOUBLE_EQ(cfg.channel.tn_shadow_sigma_los_db, 4.0);
  EXPECT_DOUBLE_EQ(cfg.channel.tn_shadow_sigma_nlos_db, 8.0);
  EXPECT_DOUBLE_EQ(cfg.channel.ntn_shadow_sigma_los_db, 0.0);
  EXPECT_DOUBLE_EQ(cfg.channel.ntn_shadow_sigma_nlos_db, 12.0);
  EXPECT_DOUBLE_EQ(cfg.scenario.inter_site_distance_m, 1732.0);
  EXPECT_DOUBLE_EQ(cfg.scenario.ue_density_per_km2, 2.0);
  EXPECT_DOUBLE_EQ(cfg.scenario.hotspot_bs_fraction, 0.30);
  EXPECT_DOUBLE_EQ(cfg.scenario.hotspot_ue_fraction, 0.50);
}

TEST(Config, ParsesSectionsKeysAndLists) {
  const std::string text = R"(
# comment
[scenario]
area_side_km = 12.5
hex_rings = 2

[radio]
total_bandwidth_hz = 20e6

[solver]
rho_update = slackness
lambda_residual_units = linear
objective_variant = bandwidth_only
line_search = off
outer_rounds = 2

[campaign]
policies = baseline_tn_only, fixed_epsilon(0.25), framework_fixed_epsilon(0), framework_optimal
seeds = 4, 8, 15
output_dir = /tmp/somewhere
)";
  const CampaignConfig cfg = parse_campaign_config(text);
  EXPECT_DOUBLE_EQ(cfg.scenario.area_side_km, 12.5);
  EXPECT_EQ(cfg.scenario.hex_rings, 2);
  EXPECT_DOUBLE_EQ(cfg.radio.total_bandwidth_hz, 20e6);
  EXPECT_EQ(cfg.solver.dual.rho_update, RhoUpdate::kSlackness);
  EXPECT_EQ(cfg.solver.dual.lambda_units, LambdaResidualUnits::kLinear);
  EXPECT_EQ(cfg.solver.dual.objective, ObjectiveVariant::kBandwidthOnly);
  EXPECT_FALSE(cfg.solver.power.line_search);
  EXPECT_EQ(cfg.solver.outer_rounds, 2);
  ASSERT_EQ(cfg.policies.size(), 4u);
  EXPECT_EQ(cfg.policies[1].kind, PolicyKind::kFixedEpsilon);
  EXPECT_DOUBLE_EQ(cfg.policies[1].epsilon, 0.25);
  EXPECT_EQ(cfg.policies[2].kind, PolicyKind::kFrameworkFixedEpsilon);
  EXPECT_DOUBLE_EQ(cfg.policies[2].epsilon, 0.0);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{4, 8, 15}));
  EXPECT_EQ(cfg.output_dir, "/tmp/somewhere");
}

TEST(Config, UnknownKeysAndSectionsCarryFieldPaths) {
  try {
    parse_campaign_config(std::string("[scenario]\nfrobnicate = 3\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field, "[scenario] frobnicate");
  }
  try {
    parse_campaign_config(std::string("[warp]\nx = 1\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field, "[warp]");
  }
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_THROW(parse_campaign_config(std::string("[scenario]\narea_side_km = banana\n")),
               ConfigError);
  EXPECT_THROW(parse_campaign_config(std::string("key_without_section = 1\n")), ConfigError);
  // Validation failures point at the offending section.
  try {
    parse_campaign_config(std::string("[scenario]\nue_density_per_km2 = -2\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field, "[scenario]");
  }
  // Policy arguments outside [0, 1] are rejected.
  EXPECT_THROW(parse_campaign_config(std::string("[campaign]\npolicies = fixed_epsilon(1.5)\n")),
               ConfigError);
  EXPECT_THROW(parse_campaign_config(std::string("[campaign]\npolicies = totally_new_policy\n")),
               ConfigError);
}

TEST(Config, PolicyNamesRoundTrip) {
  for (const std::string name :
       {"baseline_tn_only", "threegpp_split", "fixed_epsilon(0.25)",
        "framework_fixed_epsilon(0)", "framework_optimal"}) {
    const Policy p = Policy::parse(name);
    EXPECT_EQ(Policy::parse(p.name()).kind, p.kind);
    EXPECT_DOUBLE_EQ(Policy::parse(p.name()).epsilon, p.epsilon);
  }
}

TEST(Config, MissingFileIsAnIoErrorNotAConfigError) {
  EXPECT_THROW(load_campaign_config("/nonexistent/nope.cfg"), std::runtime_error);
  try {
    load_campaign_config("/nonexistent/nope.cfg");
  } catch (const ConfigError&) {
    FAIL() << "missing file must not be a ConfigError";
  } catch (const std::runtime_error&) {
  }
}
