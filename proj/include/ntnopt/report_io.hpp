#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ntnopt/common.hpp"
#include "ntnopt/orchestrator.hpp"

namespace ntnopt {

// ---------------------------------------------------------------------------
// Text artifacts. All doubles go through format_double (%.17g) so rerunning an
// identical campaign reproduces every file byte for byte.
// ---------------------------------------------------------------------------

inline void write_per_ue_csv(std::ostream& out, const RunReport& report) {
  out << "ue_id,x,y,serving_bs,tier,rsrp_dbm,rate_bps,covered\n";
  for (const auto& u : report.per_ue) {
    out << u.ue << "," << format_double(u.x) << "," << format_double(u.y) << ","
        << u.serving_bs << "," << u.tier << "," << format_double(u.rsrp_dbm) << ","
        << format_double(u.rate_bps) << "," << (u.covered ? 1 : 0) << "\n";
  }
}

/// Empirical CDF points: sorted, deduplicated on the x axis (each x keeps its
/// highest cumulative fraction), ending at exactly 1.
inline std::vector<std::pair<double, double>> cdf_points(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> pts;
  const double n = double(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double frac = (i + 1 == values.size()) ? 1.0 : double(i + 1) / n;
    if (!pts.empty() && pts.back().first == values[i])
      pts.back().second = frac;
    else
      pts.emplace_back(values[i], frac);
  }
  if (!pts.empty()) pts.back().second = 1.0;
  return pts;
}

inline void write_cdf_csv(std::ostream& out, const std::string& x_name,
                          const std::vector<std::pair<double, double>>& points) {
  out << x_name << ",cdf\n";
  for (const auto& [x, f] : points)
    out << format_double(x) << "," << format_double(f) << "\n";
}

/// One file for both solver stages: dual rows carry the split/price columns,
/// power rows the power columns; inapplicable cells stay empty.
inline void write_trajectory_csv(std::ostream& out,
                                 const std::vector<RoundTrajectory>& rounds) {
  out << "round,stage,t,slt,epsilon,sat_ue_fraction,lambda_norm,mu_norm,alpha,rho,"
         "mean_power_w,tn_mean_power_w,ntn_mean_power_w\n";
  for (const auto& r : rounds) {
    for (const auto& d : r.dual) {
      out << r.round << ",dual," << d.t << "," << format_double(d.slt) << ","
          << format_double(d.sat_share) << "," << format_double(d.sat_ue_fraction)
          << "," << format_double(d.lambda_norm) << "," << format_double(d.mu_norm)
          << "," << format_double(d.alpha) << "," << format_double(d.rho) << ",,,\n";
    }
    for (const auto& p : r.power) {
      out << r.round << ",power," << p.t << "," << format_double(p.slt) << ",,,,,,,"
          << format_double(p.mean_power_w) << "," << format_double(p.tn_mean_power_w)
          << "," << format_double(p.ntn_mean_power_w) << "\n";
    }
  }
}

inline nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["policy"] = report.policy;
  j["seed"] = report.seed;
  j["snapshot_hash"] = report.snapshot_hash;
  j["scalars"] = {
      {"slt", report.slt},
      {"epsilon_final", report.sat_share_final},
      {"coverage_ratio", report.coverage_ratio},
      {"mean_rate_bps", report.mean_rate_bps},
      {"median_rate_bps", report.median_rate_bps},
      {"p5_rate_bps", report.p5_rate_bps},
      {"p95_rate_bps", report.p95_rate_bps},
      {"mean_power_w", report.mean_power_w},
      {"iterations", report.iterations},
      {"outer_rounds_used", report.outer_rounds_used},
      {"converged", report.converged},
      {"coverage_infeasible", report.coverage_infeasible},
  };
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : report.trajectory) {
    nlohmann::json jr;
    jr["round"] = r.round;
    nlohmann::json dual = nlohmann::json::array();
    for (const auto& d : r.dual)
      dual.push_back({{"t", d.t},
                      {"slt", d.slt},
                      {"epsilon", d.sat_share},
                      {"sat_ue_fraction", d.sat_ue_fraction},
                      {"lambda_norm", d.lambda_norm},
                      {"mu_norm", d.mu_norm},
                      {"alpha", d.alpha},
                      {"rho", d.rho}});
    nlohmann::json power = nlohmann::json::array();
    for (const auto& p : r.power)
      power.push_back({{"t", p.t},
                       {"slt", p.slt},
                       {"mean_power_w", p.mean_power_w},
                       {"tn_mean_power_w", p.tn_mean_power_w},
                       {"ntn_mean_power_w", p.ntn_mean_power_w}});
    jr["dual"] = std::move(dual);
    jr["power"] = std::move(power);
    rounds.push_back(std::move(jr));
  }
  j["trajectory"] = std::move(rounds);
  return j;
}

inline RunReport report_scalars_from_json(const nlohmann::json& j) {
  RunReport r;
  r.policy = j.at("policy").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.snapshot_hash = j.at("snapshot_hash").get<std::uint64_t>();
  const auto& s = j.at("scalars");
  r.slt = s.at("slt").get<double>();
  r.sat_share_final = s.at("epsilon_final").get<double>();
  r.coverage_ratio = s.at("coverage_ratio").get<double>();
  r.mean_rate_bps = s.at("mean_rate_bps").get<double>();
  r.median_rate_bps = s.at("median_rate_bps").get<double>();
  r.p5_rate_bps = s.at("p5_rate_bps").get<double>();
  r.p95_rate_bps = s.at("p95_rate_bps").get<double>();
  r.mean_power_w = s.at("mean_power_w").get<double>();
  r.iterations = s.at("iterations").get<int>();
  r.outer_rounds_used = s.at("outer_rounds_used").get<int>();
  r.converged = s.at("converged").get<bool>();
  r.coverage_infeasible = s.at("coverage_infeasible").get<bool>();
  return r;
}

inline void write_table_csv(std::ostream& out, const std::vector<PolicySummary>& rows) {
  out << "policy,p5_kbps,mean_mbps,median_mbps,p95_mbps,coverage_pct\n";
  for (const auto& r : rows) {
    out << r.policy << "," << format_double(r.p5_kbps) << ","
        << format_double(r.mean_mbps) << "," << format_double(r.median_mbps) << ","
        << format_double(r.p95_mbps) << "," << format_double(r.coverage_pct) << "\n";
  }
}

inline void print_summary_table(std::ostream& out, const std::vector<PolicySummary>& rows) {
  auto line = [&](const std::string& name, auto get) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-18s", name.c_str());
    out << buf;
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), " %16.3f", get(r));
      out << buf;
    }
    out << "\n";
  };
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-18s", "metric");
  out << buf;
  for (const auto& r : rows) {
    std::string name = r.policy;
    if (name.size() > 16) name = name.substr(0, 16);
    std::snprintf(buf, sizeof(buf), " %16s", name.c_str());
    out << buf;
  }
  out << "\n";
  line("p5 (kbps)", [](const PolicySummary& r) { return r.p5_kbps; });
  line("mean (Mbps)", [](const PolicySummary& r) { return r.mean_mbps; });
  line("median (Mbps)", [](const PolicySummary& r) { return r.median_mbps; });
  line("p95 (Mbps)", [](const PolicySummary& r) { return r.p95_mbps; });
  line("coverage (%)", [](const PolicySummary& r) { return r.coverage_pct; });

  if (rows.size() == 2) {
    out << "\ndelta of " << rows[1].policy << " vs " << rows[0].policy << ":\n";
    auto delta = [&](const std::string& name, double a, double b) {
      char d[96];
      if (a != 0.0)
        std::snprintf(d, sizeof(d), "  %-16s %+.1f%%\n", name.c_str(),
                      (b - a) / std::abs(a) * 100.0);
      else
        std::snprintf(d, sizeof(d), "  %-16s n/a (reference is zero)\n", name.c_str());
      out << d;
    };
    delta("p5", rows[0].p5_kbps, rows[1].p5_kbps);
    delta("mean", rows[0].mean_mbps, rows[1].mean_mbps);
    delta("median", rows[0].median_mbps, rows[1].median_mbps);
    delta("p95", rows[0].p95_mbps, rows[1].p95_mbps);
    delta("coverage", rows[0].coverage_pct, rows[1].coverage_pct);
  }
}

}  // namespace ntnopt
