#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ntnopt/config.hpp"
#include "ntnopt/report_io.hpp"

namespace ntnopt {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string policy_dirname(const std::string& policy_name) {
  std::string out;
  for (char c : policy_name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')
      out += c;
    else if (c == '(')
      out += '_';
    // ')' and anything else dropped
  }
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace detail

inline std::uint64_t channel_seed_for(std::uint64_t campaign_seed) {
  std::uint64_t s = campaign_seed ^ 0xC8A5D5C817ED3170ULL;
  return splitmix64(s);
}

/// One (topology, gain matrix) snapshot per seed, shared by every policy.
struct SeedSnapshot {
  std::uint64_t seed = 0;
  Topology topo;
  ChannelState chan;
};

inline SeedSnapshot build_snapshot(const CampaignConfig& cfg, std::uint64_t seed,
                                   int threads = 1) {
  SeedSnapshot snap;
  snap.seed = seed;
  ScenarioConfig scen = cfg.scenario;
  scen.rng_seed = seed;
  snap.topo = make_topology(
      scen, {cfg.radio.tn_max_power_per_re_dbm, cfg.channel.tn_antenna_gain_dbi},
      {cfg.radio.ntn_max_power_per_re_dbm, cfg.channel.ntn_antenna_gain_dbi});
  snap.chan = build_channel_state(snap.topo, cfg.channel, channel_seed_for(seed), threads);
  return snap;
}

struct CampaignOutcome {
  // reports[p][s] is policy p on seed s (indices follow the config order).
  std::vector<std::vector<RunReport>> reports;
  std::vector<PolicySummary> pooled;  // one row per policy, UEs pooled over seeds
  bool any_coverage_infeasible = false;
};

/// Run every (policy, seed) pair on shared per-seed snapshots. Pure compute;
/// writing artifacts is separate so tests can exercise both halves.
inline CampaignOutcome run_campaign_compute(const CampaignConfig& cfg, int threads = 1) {
  CampaignOutcome outcome;
  const std::size_t P = cfg.policies.size();
  const std::size_t S = cfg.seeds.size();
  outcome.reports.assign(P, std::vector<RunReport>(S));

  parallel_for(S, threads, [&](std::size_t si) {
    const SeedSnapshot snap = build_snapshot(cfg, cfg.seeds[si]);
    for (std::size_t pi = 0; pi < P; ++pi) {
      RunReport r = run_policy(snap.topo, snap.chan, cfg.radio, cfg.policies[pi],
                               cfg.solver);
      r.seed = snap.seed;
      outcome.reports[pi][si] = std::move(r);
    }
  });

  for (std::size_t pi = 0; pi < P; ++pi) {
    std::vector<const RunReport*> of_policy;
    for (const auto& r : outcome.reports[pi]) {
      of_policy.push_back(&r);
      outcome.any_coverage_infeasible |= r.coverage_infeasible;
    }
    outcome.pooled.push_back(pooled_summary(cfg.policies[pi].name(), of_policy));
  }
  return outcome;
}

/// Write the per-seed artifact set (report.json, per_ue.csv, rate_cdf.csv,
/// rsrp_cdf.csv, trajectory.csv), per-policy pooled CDFs and summary, and the
/// combined comparison table.
inline void write_campaign_artifacts(const CampaignConfig& cfg,
                                     const CampaignOutcome& outcome,
                                     const std::string& output_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + output_dir);

  for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
    const std::string pdir_name = detail::policy_dirname(cfg.policies[pi].name());
    const fs::path pdir = fs::path(output_dir) / pdir_name;
    std::vector<double> pooled_rates, pooled_rsrp;
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      const RunReport& r = outcome.reports[pi][si];
      const fs::path sdir = pdir / ("seed_" + std::to_string(cfg.seeds[si]));
      fs::create_directories(sdir, ec);
      if (ec) throw IoError("cannot create " + sdir.string());

      {
        auto out = detail::open_out(sdir / "report.json");
        out << report_to_json(r).dump(2) << "\n";
      }
      {
        auto out = detail::open_out(sdir / "per_ue.csv");
        write_per_ue_csv(out, r);
      }
      std::vector<double> rates, rsrps;
      for (const auto& u : r.per_ue) {
        rates.push_back(u.rate_bps);
        rsrps.push_back(u.rsrp_dbm);
      }
      pooled_rates.insert(pooled_rates.end(), rates.begin(), rates.end());
      pooled_rsrp.insert(pooled_rsrp.end(), rsrps.begin(), rsrps.end());
      {
        auto out = detail::open_out(sdir / "rate_cdf.csv");
        write_cdf_csv(out, "rate_bps", cdf_points(std::move(rates)));
      }
      {
        auto out = detail::open_out(sdir / "rsrp_cdf.csv");
        write_cdf_csv(out, "rsrp_dbm", cdf_points(std::move(rsrps)));
      }
      {
        auto out = detail::open_out(sdir / "trajectory.csv");
        write_trajectory_csv(out, r.trajectory);
      }
    }
    {
      auto out = detail::open_out(pdir / "rate_cdf.csv");
      write_cdf_csv(out, "rate_bps", cdf_points(std::move(pooled_rates)));
    }
    {
      auto out = detail::open_out(pdir / "rsrp_cdf.csv");
      write_cdf_csv(out, "rsrp_dbm", cdf_points(std::move(pooled_rsrp)));
    }
    {
      auto out = detail::open_out(pdir / "summary.json");
      const PolicySummary& s = outcome.pooled[pi];
      nlohmann::json j{{"policy", s.policy},
                       {"p5_kbps", s.p5_kbps},
                       {"mean_mbps", s.mean_mbps},
                       {"median_mbps", s.median_mbps},
                       {"p95_mbps", s.p95_mbps},
                       {"coverage_pct", s.coverage_pct},
                       {"seeds", cfg.seeds}};
      out << j.dump(2) << "\n";
    }
  }

  auto table = detail::open_out(fs::path(output_dir) / "table.csv");
  write_table_csv(table, outcome.pooled);
}

inline CampaignOutcome run_campaign(const CampaignConfig& cfg, int threads = 1) {
  CampaignOutcome outcome = run_campaign_compute(cfg, threads);
  write_campaign_artifacts(cfg, outcome, cfg.output_dir);
  return outcome;
}

// ---------------------------------------------------------------------------
// Summarize completed campaign artifacts from disk. Returns 0 and prints the
// per-policy table (plus percentage deltas for a two-policy directory), or 1
// when the directory holds no reports; missing or unreadable files are listed.
// ---------------------------------------------------------------------------

inline int summarize(const std::string& output_dir, std::ostream& out,
                     std::ostream& err) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(output_dir)) {
    err << "no reports found: " << output_dir << " is not a directory\n";
    return 1;
  }

  struct Pooled {
    std::vector<double> rates;
    double covered = 0.0, total = 0.0;
  };
  std::map<std::string, Pooled> by_policy;
  std::vector<std::string> problems;

  for (const auto& policy_entry : fs::directory_iterator(output_dir)) {
    if (!policy_entry.is_directory()) continue;
    for (const auto& seed_entry : fs::directory_iterator(policy_entry.path())) {
      if (!seed_entry.is_directory()) continue;
      const fs::path report_path = seed_entry.path() / "report.json";
      const fs::path per_ue_path = seed_entry.path() / "per_ue.csv";
      std::ifstream report_in(report_path);
      std::ifstream per_ue_in(per_ue_path);
      if (!report_in) {
        problems.push_back("missing " + report_path.string());
        continue;
      }
      if (!per_ue_in) {
        problems.push_back("missing " + per_ue_path.string());
        continue;
      }
      std::string policy;
      try {
        nlohmann::json j;
        report_in >> j;
        policy = j.at("policy").get<std::string>();
      } catch (const std::exception& e) {
        problems.push_back("unreadable " + report_path.string() + ": " + e.what());
        continue;
      }
      Pooled& pooled = by_policy[policy];
      std::string line;
      std::getline(per_ue_in, line);  // header
      while (std::getline(per_ue_in, line)) {
        if (line.empty()) continue;
        // rate is column 7, covered column 8
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 8) {
          problems.push_back("malformed row in " + per_ue_path.string());
          break;
        }
        pooled.rates.push_back(std::stod(cells[6]));
        pooled.covered += cells[7] == "1" ? 1.0 : 0.0;
        pooled.total += 1.0;
      }
    }
  }

  for (const auto& p : problems) err << p << "\n";
  if (by_policy.empty()) {
    err << "no reports found\n";
    return 1;
  }

  std::vector<PolicySummary> rows;
  for (const auto& [policy, pooled] : by_policy)
    rows.push_back(summarize_rates(policy, pooled.rates, pooled.covered / pooled.total));
  print_summary_table(out, rows);
  return 0;
}

}  // namespace ntnopt
