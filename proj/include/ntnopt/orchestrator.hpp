#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntnopt/channel.hpp"
#include "ntnopt/common.hpp"
#include "ntnopt/dual_solver.hpp"
#include "ntnopt/linkmodel.hpp"
#include "ntnopt/power_solver.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt {

// ---------------------------------------------------------------------------
// Policies. The two benchmarks fix the association to max-RSRP and transmit
// at full power: `baseline_tn_only` is a plain terrestrial network on 10 MHz,
// `threegpp_split` hands 30 of 40 MHz to the satellite. `fixed_epsilon` is a
// max-RSRP benchmark at an arbitrary split, `framework_fixed_epsilon`
// optimizes association and power with the split frozen, and
// `framework_optimal` optimizes all three.
// ---------------------------------------------------------------------------

enum class PolicyKind {
  kBaselineTnOnly,
  kThreegppSplit,
  kFixedEpsilon,
  kFrameworkFixedEpsilon,
  kFrameworkOptimal
};

struct Policy {
  PolicyKind kind = PolicyKind::kFrameworkOptimal;
  double epsilon = 0.0;  // used by the *_epsilon kinds

  bool uses_framework() const {
    return kind == PolicyKind::kFrameworkFixedEpsilon ||
           kind == PolicyKind::kFrameworkOptimal;
  }
  bool includes_satellite() const { return kind != PolicyKind::kBaselineTnOnly; }

  std::string name() const {
    switch (kind) {
      case PolicyKind::kBaselineTnOnly: return "baseline_tn_only";
      case PolicyKind::kThreegppSplit: return "threegpp_split";
      case PolicyKind::kFixedEpsilon:
        return "fixed_epsilon(" + format_double(epsilon, 6) + ")";
      case PolicyKind::kFrameworkFixedEpsilon:
        return "framework_fixed_epsilon(" + format_double(epsilon, 6) + ")";
      case PolicyKind::kFrameworkOptimal: return "framework_optimal";
    }
    return "?";
  }

  static Policy parse(const std::string& text) {
    auto parse_arg = [&](const std::string& prefix) {
      const std::string rest = text.substr(prefix.size());
      if (rest.size() < 3 || rest.front() != '(' || rest.back() != ')')
        throw std::invalid_argument("policy '" + text + "': expected '(value)'");
      std::size_t pos = 0;
      const std::string inner = rest.substr(1, rest.size() - 2);
      double v = std::stod(inner, &pos);
      if (pos != inner.size())
        throw std::invalid_argument("policy '" + text + "': bad numeric argument");
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("policy '" + text + "': split must lie in [0, 1]");
      return v;
    };
    if (text == "baseline_tn_only") return {PolicyKind::kBaselineTnOnly, 0.0};
    if (text == "threegpp_split") return {PolicyKind::kThreegppSplit, 0.0};
    if (text == "framework_optimal") return {PolicyKind::kFrameworkOptimal, 0.0};
    if (text.rfind("fixed_epsilon", 0) == 0 && text.find("framework") == std::string::npos)
      return {PolicyKind::kFixedEpsilon, parse_arg("fixed_epsilon")};
    if (text.rfind("framework_fixed_epsilon", 0) == 0)
      return {PolicyKind::kFrameworkFixedEpsilon, parse_arg("framework_fixed_epsilon")};
    throw std::invalid_argument("unknown policy '" + text + "'");
  }
};

struct OrchestratorOptions {
  int outer_rounds = 3;          // stage 1 <-> stage 2 alternations
  double outer_rel_tol = 1e-4;   // early stop once the objective stabilizes
  DualSolverOptions dual;
  PowerSolverOptions power;
  double benchmark_tn_bandwidth_hz = 10e6;   // baseline macro bandwidth
  double threegpp_sat_bandwidth_hz = 30e6;   // satellite share of the band
  int threads = 1;
};

struct UeRecord {
  int ue = 0;
  double x = 0.0, y = 0.0;
  int serving_bs = 0;
  char tier = 't';  // 't' terrestrial, 's' satellite
  double rsrp_dbm = 0.0;
  double rate_bps = 0.0;
  bool covered = false;
};

struct RoundTrajectory {
  int round = 0;
  std::vector<DualTrajectoryRow> dual;
  std::vector<PowerTrajectoryRow> power;
};

struct RunReport {
  std::string policy;
  std::uint64_t seed = 0;
  std::uint64_t snapshot_hash = 0;
  std::vector<UeRecord> per_ue;
  double slt = 0.0;
  double sat_share_final = 0.0;
  double coverage_ratio = 0.0;
  double mean_rate_bps = 0.0;
  double median_rate_bps = 0.0;
  double p5_rate_bps = 0.0;
  double p95_rate_bps = 0.0;
  double mean_power_w = 0.0;
  int iterations = 0;  // dual iterations summed over rounds
  int outer_rounds_used = 0;
  bool converged = true;
  bool coverage_infeasible = false;
  std::vector<RoundTrajectory> trajectory;
};

/// Hash of the (topology, gain matrix) snapshot so that only reports computed
/// from identical inputs are ever compared.
inline std::uint64_t snapshot_hash(const Topology& topo, const ChannelState& chan) {
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a
  auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const std::string t = serialize_topology(topo);
  mix(t.data(), t.size());
  mix(chan.beta.data().data(), chan.beta.data().size() * sizeof(double));
  return h;
}

/// Max-RSRP rule: every UE picks the BS with the strongest per-RE received
/// power; ties go to the lowest BS id. UEs whose best RSRP sits below the
/// coverage threshold stay associated for bookkeeping but are uncovered.
inline std::vector<int> max_rsrp_association(const Topology& topo,
                                             const ChannelState& chan,
                                             const std::vector<double>& power_w,
                                             bool include_satellites = true) {
  return max_rsrp_serving(topo, chan, power_w, include_satellites);
}

namespace detail {

inline std::vector<double> max_powers(const Topology& topo) {
  std::vector<double> p(std::size_t(topo.bs_count()));
  for (int j = 0; j < topo.bs_count(); ++j) p[std::size_t(j)] = topo.bs_max_power_w(j);
  return p;
}

inline void fill_report_metrics(RunReport& report, const AllocationState& alloc,
                                const Topology& topo, const ChannelState& chan,
                                const RadioConfig& radio, ObjectiveVariant variant,
                                bool satellite_active) {
  const int K = topo.ue_count();
  report.per_ue.clear();
  report.per_ue.reserve(std::size_t(K));
  std::vector<double> rates;
  rates.reserve(std::size_t(K));
  int covered_count = 0;
  for (int i = 0; i < K; ++i) {
    UeRecord rec;
    rec.ue = i;
    rec.x = topo.ues[std::size_t(i)].pos.x;
    rec.y = topo.ues[std::size_t(i)].pos.y;
    rec.serving_bs = alloc.serving[std::size_t(i)];
    rec.tier = topo.is_satellite(rec.serving_bs) ? 's' : 't';
    const double beta = chan.gain(i, rec.serving_bs);
    const double p = alloc.power_w[std::size_t(rec.serving_bs)];
    rec.rsrp_dbm = beta * p > 0.0 ? rsrp_dbm(beta, p) : -400.0;
    rec.covered = is_covered(beta, p, radio);
    if (rec.covered) {
      const double g = sinr(i, rec.serving_bs, topo, chan, alloc.power_w, radio);
      rec.rate_bps = link_rate_bps(topo, rec.serving_bs, g, alloc.sat_share,
                                   alloc.load[std::size_t(rec.serving_bs)], radio);
      ++covered_count;
    } else {
      rec.rate_bps = 0.0;
    }
    rates.push_back(rec.rate_bps);
    report.per_ue.push_back(rec);
  }
  report.coverage_ratio = double(covered_count) / double(K);
  report.slt = network_slt_covered(alloc, topo, chan, radio, variant);
  report.sat_share_final = alloc.sat_share;
  report.mean_rate_bps = mean(rates);
  report.median_rate_bps = quantile(rates, 0.50);
  report.p5_rate_bps = quantile(rates, 0.05);
  report.p95_rate_bps = quantile(rates, 0.95);
  double ptotal = 0.0;
  int pcount = 0;
  for (int j = 0; j < topo.bs_count(); ++j) {
    if (!satellite_active && topo.is_satellite(j)) continue;
    ptotal += alloc.power_w[std::size_t(j)];
    ++pcount;
  }
  report.mean_power_w = pcount ? ptotal / double(pcount) : 0.0;
}

}  // namespace detail

/// Run one policy end to end on a fixed (topology, channel) snapshot.
inline RunReport run_policy(const Topology& topo, const ChannelState& chan,
                            const RadioConfig& radio, const Policy& policy,
                            const OrchestratorOptions& opts,
                            const DualObserver& dual_observer = nullptr) {
  RunReport report;
  report.policy = policy.name();
  report.snapshot_hash = snapshot_hash(topo, chan);

  const int B = topo.bs_count();
  AllocationState alloc;
  alloc.power_w = detail::max_powers(topo);

  if (!policy.uses_framework()) {
    RadioConfig effective = radio;
    switch (policy.kind) {
      case PolicyKind::kBaselineTnOnly:
        effective.total_bandwidth_hz = opts.benchmark_tn_bandwidth_hz;
        alloc.sat_share = 0.0;
        break;
      case PolicyKind::kThreegppSplit:
        alloc.sat_share =
            std::clamp(opts.threegpp_sat_bandwidth_hz / radio.total_bandwidth_hz, 0.0, 1.0);
        break;
      default:
        alloc.sat_share = policy.epsilon;
        break;
    }
    alloc.serving =
        max_rsrp_association(topo, chan, alloc.power_w, policy.includes_satellite());
    alloc.load = alloc.integer_loads(B);
    detail::fill_report_metrics(report, alloc, topo, chan, effective, opts.dual.objective,
                                policy.includes_satellite());
    return report;
  }

  DualSolverOptions dual_opts = opts.dual;
  if (policy.kind == PolicyKind::kFrameworkFixedEpsilon)
    dual_opts.fixed_sat_share = policy.epsilon;

  std::vector<double> power = detail::max_powers(topo);
  std::vector<int> serving;
  DualState dual_state;
  double share = 0.5;
  double prev_slt = kNegInf;
  bool have_warm = false;

  for (int round = 1; round <= opts.outer_rounds; ++round) {
    DualSolveResult stage1 = solve_association(
        topo, chan, power, radio, dual_opts, dual_observer,
        have_warm ? &serving : nullptr, have_warm ? &dual_state : nullptr,
        have_warm ? std::optional<double>(share) : std::nullopt, opts.threads);
    serving = stage1.alloc.serving;
    share = stage1.alloc.sat_share;
    dual_state = stage1.dual;
    have_warm = true;
    report.iterations += stage1.iterations;
    report.converged = report.converged && stage1.converged;

    PowerSolveResult stage2 = solve_power(power, serving, share, topo, chan, radio,
                                          opts.power, opts.dual.objective);
    power = stage2.power_w;
    report.coverage_infeasible = report.coverage_infeasible || stage2.coverage_infeasible;

    RoundTrajectory rt;
    rt.round = round;
    rt.dual = std::move(stage1.trajectory);
    rt.power = std::move(stage2.trajectory);
    report.trajectory.push_back(std::move(rt));
    report.outer_rounds_used = round;

    AllocationState cur{serving, {}, share, power};
    cur.load = cur.integer_loads(B);
    const double slt = network_slt_covered(cur, topo, chan, radio, opts.dual.objective);
    if (std::isfinite(slt) && std::isfinite(prev_slt) &&
        std::abs(slt - prev_slt) < opts.outer_rel_tol * std::abs(slt))
      break;
    prev_slt = slt;
  }

  alloc.serving = serving;
  alloc.sat_share = share;
  alloc.power_w = power;
  alloc.load = alloc.integer_loads(B);
  detail::fill_report_metrics(report, alloc, topo, chan, radio, opts.dual.objective, true);
  return report;
}

// ---------------------------------------------------------------------------
// Policy comparison. All reports must come from the same snapshot; the table
// carries the rate percentiles and coverage per policy.
// ---------------------------------------------------------------------------

struct PolicySummary {
  std::string policy;
  double p5_kbps = 0.0;
  double mean_mbps = 0.0;
  double median_mbps = 0.0;
  double p95_mbps = 0.0;
  double coverage_pct = 0.0;
};

struct ComparisonTable {
  std::vector<PolicySummary> rows;
};

inline PolicySummary summarize_rates(const std::string& policy,
                                     const std::vector<double>& rates_bps,
                                     double coverage_ratio) {
  PolicySummary s;
  s.policy = policy;
  s.p5_kbps = quantile(rates_bps, 0.05) / 1e3;
  s.mean_mbps = mean(rates_bps) / 1e6;
  s.median_mbps = quantile(rates_bps, 0.50) / 1e6;
  s.p95_mbps = quantile(rates_bps, 0.95) / 1e6;
  s.coverage_pct = coverage_ratio * 100.0;
  return s;
}

inline ComparisonTable compare_policies(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("compare_policies: no reports");
  ComparisonTable table;
  for (const auto& r : reports) {
    if (r.snapshot_hash != reports.front().snapshot_hash)
      throw std::invalid_argument("compare_policies: reports from different snapshots");
    std::vector<double> rates;
    rates.reserve(r.per_ue.size());
    for (const auto& u : r.per_ue) rates.push_back(u.rate_bps);
    table.rows.push_back(summarize_rates(r.policy, rates, r.coverage_ratio));
  }
  return table;
}

/// Pool per-UE rates of several seeds of the same policy into one summary row
/// (seeds are pooled, not averaged, matching how the rate CDFs are built).
inline PolicySummary pooled_summary(const std::string& policy,
                                    const std::vector<const RunReport*>& reports) {
  std::vector<double> rates;
  double covered = 0.0, total = 0.0;
  for (const RunReport* r : reports) {
    for (const auto& u : r->per_ue) {
      rates.push_back(u.rate_bps);
      covered += u.covered ? 1.0 : 0.0;
      total += 1.0;
    }
  }
  if (rates.empty()) throw std::invalid_argument("pooled_summary: no UEs");
  return summarize_rates(policy, rates, covered / total);
}

}  // namespace ntnopt
