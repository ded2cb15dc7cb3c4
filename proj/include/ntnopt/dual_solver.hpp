#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ntnopt/channel.hpp"
#include "ntnopt/common.hpp"
#include "ntnopt/linkmodel.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt {

// ---------------------------------------------------------------------------
// Stage 1: association + load + bandwidth split under fixed transmit power,
// solved through the Lagrangian dual with projected subgradient updates on
// the multipliers. lambda prices each UE's coverage constraint, mu prices
// each BS's load consistency, alpha the total-load constraint and rho the
// upper bound on the satellite bandwidth share.
// ---------------------------------------------------------------------------

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct StepSchedule {
  double initial = 0.1;
  // Diminishing steps: delta(t) = delta(1)/sqrt(t). The sum diverges while the
  // sum of squares converges, which is what the subgradient method needs.
  double at(int t) const { return initial / std::sqrt(double(t)); }
};

enum class RhoUpdate {
  kProportional,  // rho += delta4 * share (grows with any positive share)
  kSlackness      // rho -= delta4 * (1 - share), projected at zero
};

enum class LambdaUpdate {
  kDescent,  // lambda -= delta2 * coverage residual (dual minimization)
  kAscent    // sign-flipped variant
};

enum class LambdaResidualUnits {
  kDecibel,  // residual = rsrp_dbm - threshold_dbm
  kLinear    // residual = received power - threshold, linear watts
};

struct DualSolverOptions {
  int max_iterations = 200;
  int slt_window = 5;
  double slt_rel_tol = 1e-4;
  double delta1 = 0.1;   // mu steps
  double delta2 = 1e-2;  // lambda steps (decibel-normalized residual)
  double delta3 = 0.1;   // alpha steps; scaled by 1/K internally
  double delta4 = 0.1;   // rho steps
  double epsilon_min = 1e-6;
  RhoUpdate rho_update = RhoUpdate::kProportional;
  LambdaUpdate lambda_update = LambdaUpdate::kDescent;
  LambdaResidualUnits lambda_units = LambdaResidualUnits::kDecibel;
  ObjectiveVariant objective = ObjectiveVariant::kSplitWeighted;
  // Freeze the bandwidth split at this value instead of optimizing it.
  std::optional<double> fixed_sat_share;
};

struct DualState {
  std::vector<double> lambda;  // per UE, >= 0
  std::vector<double> mu;      // per BS, unconstrained
  double alpha = 0.0;
  double rho = 1.0;  // >= 0; starting at 1 keeps the split update away from
                     // its rho -> 0 limit branch on the first iteration
  int iteration = 0;
};

inline DualState make_dual_state(int ue_count, int bs_count) {
  DualState d;
  d.lambda.assign(std::size_t(ue_count), 0.0);
  d.mu.assign(std::size_t(bs_count), 0.0);
  return d;
}

/// Coverage residual of link (ue, bs) in the configured units. Positive means
/// the constraint is satisfied.
inline double coverage_residual(int ue, int bs, const ChannelState& chan,
                                const std::vector<double>& power_w,
                                const RadioConfig& radio, LambdaResidualUnits units) {
  const double received = chan.gain(ue, bs) * power_w[std::size_t(bs)];
  if (units == LambdaResidualUnits::kLinear)
    return received - radio.coverage_threshold_w();
  if (received <= 0.0) return -500.0;  // floor for powered-down BSs
  return watt_to_dbm(received) - radio.coverage_threshold_dbm;
}

// ---------------------------------------------------------------------------
// Per-link association score: the derivative of the Lagrangian in the binary
// association variable. log of the (split-weighted) rate, plus the coverage
// price times the link's received-power term, minus the BS's association
// price. The rate uses the load iterate from the previous iteration.
// ---------------------------------------------------------------------------

inline double association_score(int ue, int bs, const Topology& topo,
                                const ChannelState& chan, const DualState& dual,
                                double sat_share, const std::vector<double>& load_prev,
                                const std::vector<double>& power_w,
                                const RadioConfig& radio, const DualSolverOptions& opts) {
  const double load = std::max(1.0, load_prev[std::size_t(bs)]);
  const double g = sinr(ue, bs, topo, chan, power_w, radio);
  const double rate = link_rate_bps(topo, bs, g, sat_share, load, radio);
  const double weight = opts.objective == ObjectiveVariant::kSplitWeighted
                            ? split_share(topo, bs, sat_share)
                            : 1.0;
  const double weighted = weight * rate;
  if (!(weighted > 0.0)) return kNegInf;

  double lambda_term = 0.0;
  const double lambda_i = dual.lambda[std::size_t(ue)];
  if (lambda_i != 0.0) {
    if (opts.lambda_units == LambdaResidualUnits::kLinear) {
      lambda_term = lambda_i * chan.gain(ue, bs) * power_w[std::size_t(bs)];
    } else {
      lambda_term = lambda_i * coverage_residual(ue, bs, chan, power_w, radio,
                                                 LambdaResidualUnits::kDecibel);
    }
  }
  return std::log(weighted) + lambda_term - dual.mu[std::size_t(bs)];
}

/// Row argmax with deterministic lowest-index tie breaking. Returns -1 when
/// every entry is -inf.
inline int argmax_row(const Matrix<double>& m, std::size_t row) {
  int best = -1;
  double best_v = kNegInf;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double v = m(row, j);
    if (v > best_v) {
      best_v = v;
      best = int(j);
    }
  }
  return best;
}

struct AssociationResult {
  std::vector<int> serving;
  std::vector<int> infeasible_ues;  // all scores -inf; pinned to best RSRP
};

/// Per-UE argmax over the score matrix. UEs with no finite score are recorded
/// and pinned to their best-RSRP BS for this iteration.
inline AssociationResult optimal_association(const Matrix<double>& scores,
                                             const ChannelState& chan,
                                             const std::vector<double>& power_w) {
  AssociationResult out;
  out.serving.resize(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    int pick = argmax_row(scores, i);
    if (pick < 0) {
      out.infeasible_ues.push_back(int(i));
      double best_rsrp = -1.0;
      pick = 0;
      for (std::size_t j = 0; j < scores.cols(); ++j) {
        const double r = chan.gain(int(i), int(j)) * power_w[j];
        if (r > best_rsrp) {
          best_rsrp = r;
          pick = int(j);
        }
      }
    }
    out.serving[i] = pick;
  }
  return out;
}

/// Stationary load implied by the prices: exp(mu - alpha - 1), clamped to the
/// UE population size.
inline double optimal_load(double mu_j, double alpha, double ue_count) {
  const double arg = mu_j - alpha - 1.0;
  if (arg > 700.0) return ue_count;  // exp would overflow
  return std::clamp(std::exp(arg), 0.0, ue_count);
}

/// Optimal satellite bandwidth share given total load, satellite load and the
/// share price. Root of rho*e^2 - (K + rho)*e + K_S = 0 (the smaller root,
/// computed in its cancellation-free conjugate form); K_S -> 0 and K_S -> K
/// map to exactly 0 and 1, and rho -> 0 to the K_S/K limit.
inline double optimal_epsilon(double ue_count, double sat_count, double rho,
                              double epsilon_min = 1e-6) {
  if (!(ue_count > 0.0)) throw std::domain_error("empty network");
  if (sat_count <= 0.0) return 0.0;
  if (sat_count >= ue_count) return 1.0;
  double share;
  if (rho < 1e-9) {
    share = sat_count / ue_count;
  } else {
    const double b = ue_count + rho;
    share = 2.0 * sat_count / (b + std::sqrt(b * b - 4.0 * rho * sat_count));
  }
  return std::clamp(share, epsilon_min, 1.0 - epsilon_min);
}

// ---------------------------------------------------------------------------
// Projected subgradient step on all four multipliers:
//   mu_j    -= delta1(t) * (k*_j - served_j)
//   lambda_i-= delta2(t) * (coverage residual of the serving link)
//   alpha   -= delta3(t) * (K - sum_j k*_j)
//   rho     += delta4(t) * share   (or the slackness variant)
// followed by projection of lambda and rho onto the nonnegative orthant.
// ---------------------------------------------------------------------------

inline DualState dual_update(const DualState& dual, const std::vector<int>& serving,
                             const std::vector<double>& kstar, double sat_share,
                             const Topology& topo, const ChannelState& chan,
                             const std::vector<double>& power_w,
                             const RadioConfig& radio, const DualSolverOptions& opts) {
  DualState next = dual;
  next.iteration = dual.iteration + 1;
  const int t = next.iteration;
  const double K = double(topo.ue_count());
  const StepSchedule d1{opts.delta1}, d2{opts.delta2}, d4{opts.delta4};
  const StepSchedule d3{opts.delta3 / K};

  std::vector<double> served(std::size_t(topo.bs_count()), 0.0);
  for (int bs : serving) served[std::size_t(bs)] += 1.0;

  double kstar_total = 0.0;
  for (std::size_t j = 0; j < kstar.size(); ++j) {
    next.mu[j] -= d1.at(t) * (kstar[j] - served[j]);
    kstar_total += kstar[j];
  }

  const double lambda_sign = opts.lambda_update == LambdaUpdate::kDescent ? 1.0 : -1.0;
  for (int i = 0; i < topo.ue_count(); ++i) {
    const double res = coverage_residual(i, serving[std::size_t(i)], chan, power_w,
                                         radio, opts.lambda_units);
    double v = next.lambda[std::size_t(i)] - lambda_sign * d2.at(t) * res;
    next.lambda[std::size_t(i)] = std::max(v, 0.0);
  }

  next.alpha -= d3.at(t) * (K - kstar_total);

  if (opts.rho_update == RhoUpdate::kProportional) {
    next.rho += d4.at(t) * sat_share;
  } else {
    next.rho -= d4.at(t) * (1.0 - sat_share);
  }
  next.rho = std::max(next.rho, 0.0);
  return next;
}

// ---------------------------------------------------------------------------
// Dual function value. The load-coupled objective is rewritten with the load
// consistency constraint substituted (sum_i x_ij log k_j = k_j log k_j), which
// decouples the maximization: per-UE argmax over load-free link scores, a
// closed-form per-BS load part g(k) = (mu - alpha) k - k log k maximized over
// [0, K], and a one-dimensional search over the bandwidth share. The result
// upper-bounds every feasible primal objective for any multipliers with
// lambda, rho >= 0.
// ---------------------------------------------------------------------------

inline double dual_value_at_share(const DualState& dual, double share,
                                  const Topology& topo, const ChannelState& chan,
                                  const std::vector<double>& power_w,
                                  const RadioConfig& radio,
                                  const DualSolverOptions& opts) {
  const double K = double(topo.ue_count());
  double total = 0.0;

  for (int i = 0; i < topo.ue_count(); ++i) {
    double best = kNegInf;
    for (int j = 0; j < topo.bs_count(); ++j) {
      const double w = split_share(topo, j, share);
      const double bw = bs_bandwidth_hz(topo, j, share, radio);
      const double g = sinr(i, j, topo, chan, power_w, radio);
      const double eff = bw * std::log2(1.0 + g);
      const double weighted =
          (opts.objective == ObjectiveVariant::kSplitWeighted ? w : 1.0) * eff;
      double s;
      if (!(weighted > 0.0)) {
        s = kNegInf;
      } else {
        s = std::log(weighted) - dual.mu[std::size_t(j)];
        const double lambda_i = dual.lambda[std::size_t(i)];
        if (lambda_i != 0.0) {
          if (opts.lambda_units == LambdaResidualUnits::kLinear) {
            s += lambda_i * chan.gain(i, j) * power_w[std::size_t(j)];
          } else {
            s += lambda_i * coverage_residual(i, j, chan, power_w, radio,
                                              LambdaResidualUnits::kDecibel);
          }
        }
      }
      best = std::max(best, s);
    }
    total += best;
  }

  if (opts.lambda_units == LambdaResidualUnits::kLinear) {
    for (double l : dual.lambda) total -= l * radio.coverage_threshold_w();
  }

  for (std::size_t j = 0; j < dual.mu.size(); ++j) {
    const double k = optimal_load(dual.mu[j], dual.alpha, K);
    if (k > 0.0) total += (dual.mu[j] - dual.alpha) * k - k * std::log(k);
  }

  total += dual.alpha * K;
  total += dual.rho * (1.0 - share);
  return total;
}

inline double dual_value(const DualState& dual, const Topology& topo,
                         const ChannelState& chan, const std::vector<double>& power_w,
                         const RadioConfig& radio, const DualSolverOptions& opts,
                         const std::vector<double>& extra_share_candidates = {},
                         int grid_points = 512) {
  double best = kNegInf;
  for (int g = 0; g <= grid_points; ++g) {
    const double share = double(g) / double(grid_points);
    best = std::max(best, dual_value_at_share(dual, share, topo, chan, power_w, radio, opts));
  }
  for (double share : extra_share_candidates) {
    if (share >= 0.0 && share <= 1.0)
      best = std::max(best, dual_value_at_share(dual, share, topo, chan, power_w, radio, opts));
  }
  return best;
}

// ---------------------------------------------------------------------------
// The full stage-1 loop: score -> associate -> load -> split -> dual update,
// until the rounded-primal objective stabilizes. Returns the best rounded
// primal seen, the final dual state and the per-iteration trajectory.
// ---------------------------------------------------------------------------

struct DualTrajectoryRow {
  int t = 0;
  double slt = 0.0;
  double sat_share = 0.0;
  double sat_ue_fraction = 0.0;
  double lambda_norm = 0.0;
  double mu_norm = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
};

struct DualIterationView {
  int t;
  const std::vector<int>& serving;
  const std::vector<double>& kstar;
  double sat_share;
  double slt;
  const DualState& dual;  // state after this iteration's projected update
};

using DualObserver = std::function<void(const DualIterationView&)>;

struct DualSolveResult {
  AllocationState alloc;  // best rounded primal: integer loads
  DualState dual;
  std::vector<DualTrajectoryRow> trajectory;
  bool converged = false;
  int iterations = 0;
  int infeasible_score_events = 0;
  double slt = kNegInf;  // covered-UE objective of the returned primal
};

inline std::vector<int> max_rsrp_serving(const Topology& topo, const ChannelState& chan,
                                         const std::vector<double>& power_w,
                                         bool include_satellites = true) {
  std::vector<int> serving(std::size_t(topo.ue_count()), 0);
  const int limit = include_satellites ? topo.bs_count() : topo.macro_count();
  for (int i = 0; i < topo.ue_count(); ++i) {
    int pick = 0;
    double best = -1.0;
    for (int j = 0; j < limit; ++j) {
      const double r = chan.gain(i, j) * power_w[std::size_t(j)];
      if (r > best) {
        best = r;
        pick = j;
      }
    }
    serving[std::size_t(i)] = pick;
  }
  return serving;
}

inline DualSolveResult solve_association(const Topology& topo, const ChannelState& chan,
                                         const std::vector<double>& power_w,
                                         const RadioConfig& radio,
                                         const DualSolverOptions& opts,
                                         const DualObserver& observer = nullptr,
                                         const std::vector<int>* warm_serving = nullptr,
                                         const DualState* warm_dual = nullptr,
                                         std::optional<double> warm_share = std::nullopt,
                                         int threads = 1) {
  const int K = topo.ue_count();
  const int B = topo.bs_count();
  if (K == 0) throw std::domain_error("empty network");

  DualSolveResult result;
  std::vector<int> serving =
      warm_serving ? *warm_serving : max_rsrp_serving(topo, chan, power_w);
  DualState dual = warm_dual ? *warm_dual : make_dual_state(K, B);
  double share = opts.fixed_sat_share.value_or(warm_share.value_or(0.5));

  AllocationState state;
  state.power_w = power_w;

  auto rounded_slt = [&](const std::vector<int>& s, double sh) {
    AllocationState a;
    a.serving = s;
    a.load = AllocationState{s, {}, sh, power_w}.integer_loads(B);
    a.sat_share = sh;
    a.power_w = power_w;
    return network_slt_covered(a, topo, chan, radio, opts.objective);
  };
  auto sat_fraction = [&](const std::vector<int>& s) {
    int n = 0;
    for (int bs : s) n += topo.is_satellite(bs) ? 1 : 0;
    return double(n) / double(K);
  };
  auto push_row = [&](int t, double slt, double sh, const std::vector<int>& s,
                      const DualState& d) {
    DualTrajectoryRow row;
    row.t = t;
    row.slt = slt;
    row.sat_share = sh;
    row.sat_ue_fraction = sat_fraction(s);
    double l2 = 0.0, m2 = 0.0;
    for (double v : d.lambda) l2 += v * v;
    for (double v : d.mu) m2 += v * v;
    row.lambda_norm = std::sqrt(l2);
    row.mu_norm = std::sqrt(m2);
    row.alpha = d.alpha;
    row.rho = d.rho;
    result.trajectory.push_back(row);
  };

  // Load iterate used inside the scored rate: starts from the initial
  // association's counts, then follows the dual-implied loads.
  std::vector<double> load_prev =
      AllocationState{serving, {}, share, power_w}.integer_loads(B);

  auto track_best = [&](const std::vector<int>& s, double sh, double slt) {
    if (slt > result.slt) {
      result.slt = slt;
      result.alloc.serving = s;
      result.alloc.sat_share = sh;
    }
  };

  double init_slt = rounded_slt(serving, share);
  push_row(0, init_slt, share, serving, dual);
  track_best(serving, share, init_slt);

  Matrix<double> scores{std::size_t(K), std::size_t(B)};
  std::vector<double> slt_history{init_slt};

  for (int t = 1; t <= opts.max_iterations; ++t) {
    // Scores use the share clamped away from 0 and 1 so that a tier that lost
    // all load in one iteration stays reachable through its price terms.
    const double scoring_share =
        std::clamp(share, opts.epsilon_min, 1.0 - opts.epsilon_min);
    parallel_for(std::size_t(K), threads, [&](std::size_t i) {
      for (int j = 0; j < B; ++j)
        scores(i, std::size_t(j)) = association_score(
            int(i), j, topo, chan, dual, scoring_share, load_prev, power_w, radio, opts);
    });

    AssociationResult assoc = optimal_association(scores, chan, power_w);
    serving = assoc.serving;
    result.infeasible_score_events += int(assoc.infeasible_ues.size());

    std::vector<double> kstar(std::size_t(B), 0.0);
    for (int j = 0; j < B; ++j)
      kstar[std::size_t(j)] = optimal_load(dual.mu[std::size_t(j)], dual.alpha, double(K));

    double sat_served = 0.0;
    for (int bs : serving) sat_served += topo.is_satellite(bs) ? 1.0 : 0.0;
    share = opts.fixed_sat_share.value_or(
        optimal_epsilon(double(K), sat_served, dual.rho, opts.epsilon_min));

    dual = dual_update(dual, serving, kstar, share, topo, chan, power_w, radio, opts);
    load_prev = kstar;

    const double slt = rounded_slt(serving, share);
    slt_history.push_back(slt);
    push_row(t, slt, share, serving, dual);
    track_best(serving, share, slt);
    result.iterations = t;

    if (observer) observer(DualIterationView{t, serving, kstar, share, slt, dual});

    if (t >= opts.slt_window) {
      const double prev = slt_history[std::size_t(t - opts.slt_window)];
      if (std::isfinite(slt) && std::isfinite(prev) &&
          std::abs(slt - prev) < opts.slt_rel_tol * std::abs(slt)) {
        result.converged = true;
        break;
      }
    }
  }

  result.alloc.load = AllocationState{result.alloc.serving, {}, result.alloc.sat_share,
                                      power_w}
                          .integer_loads(B);
  result.alloc.power_w = power_w;
  result.dual = dual;
  return result;
}

}  // namespace ntnopt
