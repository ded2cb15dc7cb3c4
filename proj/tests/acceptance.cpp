// Acceptance suite. Runs every top-level criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion; the exit code is the number of
// failures. Criteria 7-10 run on the desk preset passed as argv[1].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ntnopt/campaign.hpp"
#include "ntnopt/config.hpp"
#include "ntnopt/dual_solver.hpp"
#include "ntnopt/power_solver.hpp"

using namespace ntnopt;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] C%-2d %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct RandomPowerInstance {
  Topology topo;
  ChannelState chan;
  RadioConfig radio;
  std::vector<int> serving;
};

RandomPowerInstance random_power_instance(std::uint64_t seed, int macros = 3,
                                          int sats = 1, int ues = 10) {
  RandomPowerInstance inst;
  inst.topo.area_side_m = 10e3;
  for (int j = 0; j < macros; ++j)
    inst.topo.macros.push_back({j, {1500.0 * (j + 1), 2000.0}, 17.7, 14.0});
  for (int s = 0; s < sats; ++s)
    inst.topo.satellites.push_back({macros + s, {5e3, 5e3}, 600e3, 90.0, 15.8, 30.0});
  for (int i = 0; i < ues; ++i)
    inst.topo.ues.push_back({i, {700.0 * (i + 1), 450.0 * i}, false});
  const std::size_t K = std::size_t(ues), B = std::size_t(macros + sats);
  inst.chan.beta = Matrix<double>(K, B);
  inst.chan.los = Matrix<std::uint8_t>(K, B, 1);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < B; ++j) {
      Rng rng = Rng::derive(seed, i, j);
      inst.chan.beta(i, j) = db_to_linear(rng.uniform(-120.0, -90.0));
    }
  Rng rng(seed * 31 + 5);
  inst.serving.resize(K);
  for (std::size_t i = 0; i < K; ++i) inst.serving[i] = int(rng.uniform_index(B));
  return inst;
}

double objective_of(const RandomPowerInstance& inst, const std::vector<double>& p) {
  AllocationState alloc;
  alloc.serving = inst.serving;
  alloc.load = alloc.integer_loads(inst.topo.bs_count());
  alloc.sat_share = 0.3;
  alloc.power_w = p;
  return network_slt(alloc, inst.topo, inst.chan, inst.radio);
}

// --- C1: derivative formulas vs central finite differences ------------------

void criterion1() {
  const double t0 = now_seconds();
  double worst = 0.0;
  bool pass = true;
  for (std::uint64_t seed = 1; seed <= 50 && pass; ++seed) {
    RandomPowerInstance inst = random_power_instance(seed);
    Rng rng(seed + 9000);
    std::vector<double> p(std::size_t(inst.topo.bs_count()));
    for (int j = 0; j < inst.topo.bs_count(); ++j)
      p[std::size_t(j)] = inst.topo.bs_max_power_w(j) * rng.uniform(0.3, 0.7);

    const auto grad = slt_gradient(p, inst.serving, inst.topo, inst.chan, inst.radio);
    const auto hess = slt_hessian_diag(p, inst.serving, inst.topo, inst.chan, inst.radio);
    for (int j = 0; j < inst.topo.bs_count(); ++j) {
      const double h = 1e-6 * p[std::size_t(j)];
      auto shifted = p;
      shifted[std::size_t(j)] = p[std::size_t(j)] + h;
      const double fp = objective_of(inst, shifted);
      const auto gp = slt_gradient(shifted, inst.serving, inst.topo, inst.chan, inst.radio);
      shifted[std::size_t(j)] = p[std::size_t(j)] - h;
      const double fm = objective_of(inst, shifted);
      const auto gm = slt_gradient(shifted, inst.serving, inst.topo, inst.chan, inst.radio);

      const double fd_grad = (fp - fm) / (2.0 * h);
      const double rel_g =
          std::abs(fd_grad - grad[std::size_t(j)]) / std::max(1e-30, std::abs(grad[std::size_t(j)]));
      const double fd_hess =
          (gp[std::size_t(j)] - gm[std::size_t(j)]) / (2.0 * h);
      const double rel_h =
          std::abs(fd_hess - hess[std::size_t(j)]) / std::max(1e-30, std::abs(hess[std::size_t(j)]));
      worst = std::max({worst, rel_g, rel_h});
      if (rel_g >= 1e-4 || rel_h >= 1e-4) pass = false;
    }
  }
  const double dt = now_seconds() - t0;
  if (dt >= 10.0) pass = false;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "50 instances, worst rel err %.2e, %.2fs", worst, dt);
  report(1, "derivatives match central finite differences (<1e-4)", pass, buf);
}

// --- C2: bandwidth split optimizer ------------------------------------------

void criterion2() {
  bool pass = true;
  double worst_res = 0.0, worst_gap = 0.0;
  auto residual = [](double K, double Ks, double rho, double eps) {
    return rho * eps * eps - (K + rho) * eps + Ks;
  };
  auto bisect = [&](double K, double Ks, double rho) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (residual(K, Ks, rho, lo) * residual(K, Ks, rho, mid) <= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };

  Rng rng(424242);
  for (int rep = 0; rep < 10000; ++rep) {
    const double K = rng.uniform(1.0, 1e4);
    const double Ks = rng.uniform(0.01, 0.99) * K;
    const double rho = std::pow(10.0, rng.uniform(-12.0, 2.0)) * K;
    const double eps = optimal_epsilon(K, Ks, rho);
    const double res = std::abs(residual(K, Ks, rho, eps));
    const double gap = std::abs(eps - bisect(K, Ks, rho));
    worst_res = std::max(worst_res, res);
    worst_gap = std::max(worst_gap, gap);
    if (res >= 1e-9 || gap >= 1e-8) pass = false;
  }
  for (int rep = 0; rep < 50; ++rep) {
    const double K = rng.uniform(1.0, 1e4);
    const double rho = rng.uniform(0.0, 100.0);
    if (optimal_epsilon(K, 0.0, rho) != 0.0) pass = false;
    if (optimal_epsilon(K, K, rho) != 1.0) pass = false;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "1e4 triples, worst |residual| %.2e, worst bisection gap %.2e", worst_res,
                worst_gap);
  report(2, "split optimizer zeroes its quadratic and matches bisection", pass, buf);
}

// --- C3: stage-1 feasibility on seeded desk runs -----------------------------

void criterion3(const CampaignConfig& desk) {
  bool pass = true;
  std::string why;
  for (std::uint64_t seed = 1; seed <= 20 && pass; ++seed) {
    const SeedSnapshot snap = build_snapshot(desk, seed);
    std::vector<double> pmax(std::size_t(snap.topo.bs_count()));
    for (int j = 0; j < snap.topo.bs_count(); ++j)
      pmax[std::size_t(j)] = snap.topo.bs_max_power_w(j);

    auto observer = [&](const DualIterationView& view) {
      for (int bs : view.serving)
        if (bs < 0 || bs >= snap.topo.bs_count()) {
          pass = false;
          why = "invalid serving index";
        }
      if (int(view.serving.size()) != snap.topo.ue_count()) {
        pass = false;
        why = "association rows missing";
      }
      for (double l : view.dual.lambda)
        if (l < 0.0) {
          pass = false;
          why = "negative lambda";
        }
      if (view.dual.rho < 0.0) {
        pass = false;
        why = "negative rho";
      }
    };
    const auto result = solve_association(snap.topo, snap.chan, pmax, desk.radio,
                                          desk.solver.dual, observer);
    double total = 0.0;
    for (double k : result.alloc.load) total += k;
    if (total != double(snap.topo.ue_count())) {
      pass = false;
      why = "rounded loads do not sum to K";
    }
  }
  report(3, "stage-1 feasibility every iteration on 20 desk seeds", pass, why);
}

// --- C4: weak duality on small instances -------------------------------------

void criterion4() {
  bool pass = true;
  double worst_margin = 1e300;
  for (std::uint64_t seed : {11, 22, 33, 44}) {
    Topology topo;
    topo.area_side_m = 10e3;
    topo.macros.push_back({0, {2000.0, 2000.0}, 17.7, 14.0});
    topo.macros.push_back({1, {6000.0, 2000.0}, 17.7, 14.0});
    topo.satellites.push_back({2, {5e3, 5e3}, 600e3, 90.0, 15.8, 30.0});
    for (int i = 0; i < 8; ++i) topo.ues.push_back({i, {900.0 * (i + 1), 3000.0}, false});
    ChannelState chan;
    chan.beta = Matrix<double>(8, 3);
    chan.los = Matrix<std::uint8_t>(8, 3, 1);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        Rng rng = Rng::derive(seed, i, j);
        chan.beta(i, j) = db_to_linear(rng.uniform(-105.0, -85.0));  // all coverable
      }
    RadioConfig radio;
    std::vector<double> pmax(3);
    for (int j = 0; j < 3; ++j) pmax[std::size_t(j)] = topo.bs_max_power_w(j);

    DualSolverOptions opts;
    opts.max_iterations = 60;
    double best_primal = kNegInf;
    auto observer = [&](const DualIterationView& view) {
      AllocationState a;
      a.serving = view.serving;
      a.load = a.integer_loads(3);
      a.sat_share = view.sat_share;
      a.power_w = pmax;
      best_primal = std::max(best_primal, network_slt(a, topo, chan, radio, opts.objective));
      const double dual = dual_value(view.dual, topo, chan, pmax, radio, opts,
                                     {view.sat_share});
      worst_margin = std::min(worst_margin, dual - best_primal);
      if (dual < best_primal - 1e-7) pass = false;
    };
    solve_association(topo, chan, pmax, radio, opts, observer);
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "min dual-primal margin %.3e", worst_margin);
  report(4, "dual value dominates every feasible primal on small instances", pass, buf);
}

// --- C5: association equals exhaustive argmax ---------------------------------

void criterion5() {
  bool pass = true;
  Rng rng(5150);
  ChannelState chan;
  chan.beta = Matrix<double>(6, 5, 1e-12);  // fallback metric, unused here
  std::vector<double> p(5, 0.05);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix<double> scores{6, 5};
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        scores(i, j) = std::round(rng.uniform(-4.0, 4.0) * 2.0) / 2.0;  // many ties
    const auto result = optimal_association(scores, chan, p);
    for (std::size_t i = 0; i < 6; ++i) {
      int best = 0;
      for (int j = 1; j < 5; ++j)
        if (scores(i, std::size_t(j)) > scores(i, std::size_t(best))) best = j;
      if (result.serving[i] != best) pass = false;
    }
  }
  report(5, "association matches exhaustive per-UE argmax with ties", pass, "");
}

// --- C6: power ascent, box feasibility, exact coverage ------------------------

void criterion6() {
  bool pass = true;
  std::string why;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    RandomPowerInstance inst = random_power_instance(seed);
    std::vector<double> p0(std::size_t(inst.topo.bs_count()));
    for (int j = 0; j < inst.topo.bs_count(); ++j)
      p0[std::size_t(j)] = inst.topo.bs_max_power_w(j);
    PowerSolverOptions opts;
    const auto result =
        solve_power(p0, inst.serving, 0.3, inst.topo, inst.chan, inst.radio, opts);

    for (std::size_t i = 1; i < result.trajectory.size(); ++i)
      if (result.trajectory[i].slt < result.trajectory[i - 1].slt - 1e-9) {
        pass = false;
        why = "objective decreased";
      }
    for (int j = 0; j < inst.topo.bs_count(); ++j) {
      if (result.power_w[std::size_t(j)] < result.box.tau[std::size_t(j)] ||
          result.power_w[std::size_t(j)] > result.box.p_max[std::size_t(j)]) {
        pass = false;
        why = "power left the box";
      }
    }
    std::vector<bool> infeasible(std::size_t(inst.topo.bs_count()), false);
    for (const auto& rec : result.box.infeasible) infeasible[std::size_t(rec.bs)] = true;
    for (int i = 0; i < inst.topo.ue_count(); ++i) {
      const int bs = inst.serving[std::size_t(i)];
      if (infeasible[std::size_t(bs)]) continue;
      if (!is_covered(inst.chan.gain(i, bs), result.power_w[std::size_t(bs)], inst.radio)) {
        pass = false;
        why = "served UE below threshold";
      }
    }
  }
  report(6, "power ascent is monotone, boxed, and keeps coverage exactly", pass, why);
}

// --- C7-C10: desk-scale reproduction ------------------------------------------

struct DeskRun {
  CampaignOutcome outcome;
  std::vector<int> bs_counts;   // per seed: BS count
  std::vector<bool> has_unloaded;  // per seed: any BS with zero final load
  double runtime_s = 0.0;
  int policy_baseline = -1, policy_threegpp = -1, policy_eps0 = -1, policy_opt = -1;
};

DeskRun run_desk(const CampaignConfig& desk) {
  DeskRun run;
  const double t0 = now_seconds();
  run.outcome = run_campaign_compute(desk, default_thread_count());
  for (std::size_t pi = 0; pi < desk.policies.size(); ++pi) {
    switch (desk.policies[pi].kind) {
      case PolicyKind::kBaselineTnOnly: run.policy_baseline = int(pi); break;
      case PolicyKind::kThreegppSplit: run.policy_threegpp = int(pi); break;
      case PolicyKind::kFrameworkFixedEpsilon:
        if (desk.policies[pi].epsilon == 0.0) run.policy_eps0 = int(pi);
        break;
      case PolicyKind::kFrameworkOptimal: run.policy_opt = int(pi); break;
      default: break;
    }
  }
  // Unloaded-BS detection for the framework_optimal runs.
  for (std::size_t si = 0; si < desk.seeds.size(); ++si) {
    const SeedSnapshot snap = build_snapshot(desk, desk.seeds[si]);
    run.bs_counts.push_back(snap.topo.bs_count());
    const RunReport& r = run.outcome.reports[std::size_t(run.policy_opt)][si];
    std::vector<int> counts(std::size_t(snap.topo.bs_count()), 0);
    for (const auto& u : r.per_ue) counts[std::size_t(u.serving_bs)]++;
    bool unloaded = false;
    for (int c : counts) unloaded |= (c == 0);
    run.has_unloaded.push_back(unloaded);
  }
  run.runtime_s = now_seconds() - t0;
  return run;
}

double pooled_outage(const std::vector<RunReport>& reports) {
  double uncovered = 0.0, total = 0.0;
  for (const auto& r : reports)
    for (const auto& u : r.per_ue) {
      uncovered += u.covered ? 0.0 : 1.0;
      total += 1.0;
    }
  return uncovered / total;
}

void criterion7(const DeskRun& run, const CampaignConfig& desk) {
  const auto& baseline = run.outcome.reports[std::size_t(run.policy_baseline)];
  const auto& opt = run.outcome.reports[std::size_t(run.policy_opt)];
  const auto& threegpp = run.outcome.reports[std::size_t(run.policy_threegpp)];

  int better_seeds = 0;
  for (std::size_t si = 0; si < desk.seeds.size(); ++si)
    if (opt[si].coverage_ratio > baseline[si].coverage_ratio) ++better_seeds;

  const double out_base = pooled_outage(baseline);
  const double out_opt = pooled_outage(opt);
  const double out_3gpp = pooled_outage(threegpp);

  const bool pass = better_seeds >= 9 && out_opt * 5.0 <= out_base &&
                    run.runtime_s < 300.0;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "outage baseline %.2f%%, framework %.3f%%, 3gpp %.3f%%; better on %d/10 "
                "seeds; campaign %.1fs",
                out_base * 100.0, out_opt * 100.0, out_3gpp * 100.0, better_seeds,
                run.runtime_s);
  report(7, "satellite integration cuts outage >=5x (>=9/10 seeds better)", pass, buf);
}

void criterion8(const DeskRun& run) {
  const auto& pooled = run.outcome.pooled;
  const PolicySummary& baseline = pooled[std::size_t(run.policy_baseline)];
  const PolicySummary& threegpp = pooled[std::size_t(run.policy_threegpp)];
  const PolicySummary& eps0 = pooled[std::size_t(run.policy_eps0)];
  const PolicySummary& opt = pooled[std::size_t(run.policy_opt)];

  const double ratio_3gpp_baseline = threegpp.mean_mbps / baseline.mean_mbps;
  const bool ordering = eps0.mean_mbps > opt.mean_mbps &&
                        opt.mean_mbps > threegpp.mean_mbps &&
                        ratio_3gpp_baseline > 0.75 && ratio_3gpp_baseline < 1.75;
  const bool tails = opt.p5_kbps > 0.0 && eps0.p5_kbps == 0.0;
  const bool gain = opt.mean_mbps >= 1.5 * baseline.mean_mbps;
  const bool pass = ordering && tails && gain;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "mean Mbps: eps0 %.1f > opt %.1f > 3gpp %.2f ~ baseline %.2f; p5 kbps: "
                "opt %.1f vs eps0 %.1f; gain %.1fx",
                eps0.mean_mbps, opt.mean_mbps, threegpp.mean_mbps, baseline.mean_mbps,
                opt.p5_kbps, eps0.p5_kbps, opt.mean_mbps / baseline.mean_mbps);
  report(8, "rate trade-off ordering and >=1.5x mean gain over baseline", pass, buf);
}

void criterion9(const DeskRun& run) {
  bool pass = true;
  std::string why;
  const auto& opt = run.outcome.reports[std::size_t(run.policy_opt)];
  for (const RunReport& r : opt) {
    if (!r.converged) {
      pass = false;
      why = "iteration cap hit on seed " + std::to_string(r.seed);
    }
    if (r.trajectory.empty() || r.trajectory.front().dual.empty()) {
      pass = false;
      why = "missing trajectory";
      continue;
    }
    const auto& rows = r.trajectory.front().dual;  // first stage-1 pass
    const double final_eps = rows.back().sat_share;
    if (std::abs(final_eps - 0.5) > 0.05) {
      const bool decreasing = final_eps < 0.5;
      double running = rows.front().sat_share;
      for (const auto& row : rows) {
        if (decreasing) {
          if (row.sat_share > running + 0.05) {
            pass = false;
            why = "split oscillated above trend on seed " + std::to_string(r.seed);
          }
          running = std::min(running, row.sat_share);
        } else {
          if (row.sat_share < running - 0.05) {
            pass = false;
            why = "split oscillated below trend on seed " + std::to_string(r.seed);
          }
          running = std::max(running, row.sat_share);
        }
      }
    }
  }
  if (pass && !opt.empty()) {
    const auto& rows = opt.front().trajectory.front().dual;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "eps 0.5 -> %.3f in %d iterations (seed %llu)",
                  rows.back().sat_share, rows.back().t,
                  (unsigned long long)opt.front().seed);
    why = buf;
  }
  report(9, "stage-1 stabilizes within 200 iterations; split trends from 0.5", pass, why);
}

void criterion10(const DeskRun& run) {
  bool pass = true;
  int applicable = 0;
  double worst_drop = 1.0;
  const auto& opt = run.outcome.reports[std::size_t(run.policy_opt)];
  for (std::size_t si = 0; si < opt.size(); ++si) {
    if (!run.has_unloaded[si]) continue;
    ++applicable;
    const RunReport& r = opt[si];
    const auto& first_power = r.trajectory.front().power;
    if (first_power.empty()) {
      pass = false;
      continue;
    }
    const double init = first_power.front().mean_power_w;  // max-power start
    const double final_power = r.mean_power_w;
    const double drop = 1.0 - final_power / init;
    worst_drop = std::min(worst_drop, drop);
    if (!(final_power < init) || drop < 0.20) pass = false;
  }
  if (applicable == 0) pass = false;  // the desk preset must exercise this
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d/10 seeds had unloaded BSs; smallest drop %.0f%%",
                applicable, worst_drop * 100.0);
  report(10, "mean transmit power falls >=20% whenever a BS is unloaded", pass, buf);
}

// --- C11: byte-identical reruns ----------------------------------------------

void criterion11(const CampaignConfig& desk) {
  CampaignConfig cfg = desk;
  const fs::path a = fs::temp_directory_path() / "ntnopt_acceptance_a";
  const fs::path b = fs::temp_directory_path() / "ntnopt_acceptance_b";
  fs::remove_all(a);
  fs::remove_all(b);

  cfg.output_dir = a.string();
  run_campaign(cfg, default_thread_count());
  cfg.output_dir = b.string();
  run_campaign(cfg, 1);

  bool pass = true;
  int compared = 0;
  std::string why;
  for (const auto& policy_entry : fs::recursive_directory_iterator(a)) {
    if (policy_entry.path().filename() != "per_ue.csv") continue;
    const fs::path rel = fs::relative(policy_entry.path(), a);
    std::ifstream fa(policy_entry.path()), fb(b / rel);
    if (!fb) {
      pass = false;
      why = "missing " + (b / rel).string();
      continue;
    }
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) {
      pass = false;
      why = "mismatch in " + rel.string();
    }
    ++compared;
  }
  if (compared == 0) {
    pass = false;
    why = "no per_ue.csv files found";
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d per-UE files byte-identical%s%s", compared,
                why.empty() ? "" : "; ", why.c_str());
  report(11, "identical config + seeds reproduce per_ue.csv byte for byte", pass, buf);
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <paper_desk.cfg>\n");
    return 99;
  }
  CampaignConfig desk;
  try {
    desk = load_campaign_config(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load desk config: %s\n", e.what());
    return 99;
  }

  criterion1();
  criterion2();
  criterion3(desk);
  criterion4();
  criterion5();
  criterion6();

  const DeskRun run = run_desk(desk);
  if (run.policy_baseline < 0 || run.policy_threegpp < 0 || run.policy_eps0 < 0 ||
      run.policy_opt < 0) {
    std::fprintf(stderr, "desk config must include baseline_tn_only, threegpp_split, "
                         "framework_fixed_epsilon(0) and framework_optimal\n");
    return 99;
  }
  criterion7(run, desk);
  criterion8(run);
  criterion9(run);
  criterion10(run);
  criterion11(desk);

  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures;
}
