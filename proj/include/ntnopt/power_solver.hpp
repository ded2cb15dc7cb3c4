#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ntnopt/channel.hpp"
#include "ntnopt/common.hpp"
#include "ntnopt/linkmodel.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt {

// ---------------------------------------------------------------------------
// Stage 2: maximize the sum log-throughput over per-BS transmit powers with
// the association and bandwidth split held fixed. Diagonal-Hessian Newton
// steps, projected onto the per-BS box [tau_j, p_max_j], where tau_j is the
// smallest power that keeps every UE served by BS j above the coverage
// threshold.
// ---------------------------------------------------------------------------

struct PowerSolverOptions {
  int max_iterations = 100;
  double slt_rel_tol = 1e-6;
  double delta5 = 1.0;
  bool line_search = true;  // halve the step whenever it would decrease the
                            // objective; the fixed schedule is available for
                            // comparison runs
  int max_backtracks = 40;
};

struct PowerBox {
  std::vector<double> tau;    // per-BS lower bounds, linear watts
  std::vector<double> p_max;  // per-BS upper bounds
  struct InfeasibleBs {
    int bs;
    std::vector<int> ues;  // UEs whose coverage needs more than p_max
  };
  std::vector<InfeasibleBs> infeasible;
};

namespace detail {

// Per-link quantities reused by the derivative sums.
struct LinkTerms {
  int serving;
  double gamma;
  double rate_nats;  // log(1 + gamma)
};

inline std::vector<LinkTerms> link_terms(const std::vector<int>& serving,
                                         const Topology& topo, const ChannelState& chan,
                                         const std::vector<double>& power_w,
                                         const RadioConfig& radio) {
  std::vector<LinkTerms> terms(serving.size());
  for (std::size_t i = 0; i < serving.size(); ++i) {
    const int bs = serving[i];
    const double g = sinr(int(i), bs, topo, chan, power_w, radio);
    const double r = std::log1p(g);
    if (!(r > 0.0))
      throw std::domain_error("zero-rate served link in power derivatives");
    terms[i] = {bs, g, r};
  }
  return terms;
}

}  // namespace detail

/// First derivative of the sum log-throughput in each BS power: the own-signal
/// term of the served UEs minus the interference pressure this BS puts on UEs
/// served by same-tier neighbours.
inline std::vector<double> slt_gradient(const std::vector<double>& power_w,
                                        const std::vector<int>& serving,
                                        const Topology& topo, const ChannelState& chan,
                                        const RadioConfig& radio) {
  const auto terms = detail::link_terms(serving, topo, chan, power_w, radio);
  std::vector<double> grad(std::size_t(topo.bs_count()), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& lt = terms[i];
    const double p_serv = power_w[std::size_t(lt.serving)];
    grad[std::size_t(lt.serving)] +=
        lt.gamma / (lt.rate_nats * (1.0 + lt.gamma)) / p_serv;
    const bool sat_tier = topo.is_satellite(lt.serving);
    const double beta_serv = chan.gain(int(i), lt.serving);
    for (int j = 0; j < topo.bs_count(); ++j) {
      if (j == lt.serving || topo.is_satellite(j) != sat_tier) continue;
      grad[std::size_t(j)] -= chan.gain(int(i), j) * lt.gamma * lt.gamma /
                              (beta_serv * lt.rate_nats * (1.0 + lt.gamma)) / p_serv;
    }
  }
  return grad;
}

/// Diagonal of the Hessian: strictly negative own-link curvature plus the
/// positive curvature of the interference terms.
inline std::vector<double> slt_hessian_diag(const std::vector<double>& power_w,
                                            const std::vector<int>& serving,
                                            const Topology& topo,
                                            const ChannelState& chan,
                                            const RadioConfig& radio) {
  const auto terms = detail::link_terms(serving, topo, chan, power_w, radio);
  std::vector<double> hess(std::size_t(topo.bs_count()), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& lt = terms[i];
    const double p_serv = power_w[std::size_t(lt.serving)];
    const double r = lt.rate_nats, g = lt.gamma;
    hess[std::size_t(lt.serving)] -=
        (1.0 / (r * r) + 1.0 / r) * g * g / ((1.0 + g) * (1.0 + g)) / (p_serv * p_serv);
    const bool sat_tier = topo.is_satellite(lt.serving);
    const double beta_serv = chan.gain(int(i), lt.serving);
    for (int j = 0; j < topo.bs_count(); ++j) {
      if (j == lt.serving || topo.is_satellite(j) != sat_tier) continue;
      const double beta_j = chan.gain(int(i), j);
      hess[std::size_t(j)] += beta_j * beta_j * g * g * g *
                              (2.0 * r + g * (r - 1.0)) /
                              (beta_serv * beta_serv * r * r * (1.0 + g) * (1.0 + g)) /
                              (p_serv * p_serv);
    }
  }
  return hess;
}

/// Newton step per BS: gradient over the magnitude of the second derivative,
/// with a plain gradient step where the curvature vanishes.
inline std::vector<double> newton_step(const std::vector<double>& grad,
                                       const std::vector<double>& hess_diag,
                                       double gradient_fallback_step = 1.0) {
  std::vector<double> step(grad.size(), 0.0);
  for (std::size_t j = 0; j < grad.size(); ++j) {
    if (hess_diag[j] != 0.0) {
      step[j] = grad[j] / std::abs(hess_diag[j]);
    } else if (grad[j] != 0.0) {
      step[j] = gradient_fallback_step * grad[j];
    }
  }
  return step;
}

/// Per-BS feasible power box. tau_j is the largest of threshold/gain over the
/// served UEs (nudged up by ulps so that tau_j * gain >= threshold holds in
/// double arithmetic), zero for BSs with no UEs. BSs whose tau exceeds p_max
/// are recorded as coverage-infeasible and their tau clamped to p_max.
inline PowerBox coverage_lower_bounds(const std::vector<int>& serving,
                                      const Topology& topo, const ChannelState& chan,
                                      const RadioConfig& radio) {
  const int B = topo.bs_count();
  PowerBox box;
  box.tau.assign(std::size_t(B), 0.0);
  box.p_max.resize(std::size_t(B));
  for (int j = 0; j < B; ++j) box.p_max[std::size_t(j)] = topo.bs_max_power_w(j);

  const double threshold = radio.coverage_threshold_w();
  std::vector<std::vector<int>> served{std::size_t(B)};
  for (std::size_t i = 0; i < serving.size(); ++i)
    served[std::size_t(serving[i])].push_back(int(i));

  for (int j = 0; j < B; ++j) {
    double tau = 0.0;
    for (int i : served[std::size_t(j)]) {
      const double beta = chan.gain(i, j);
      double need = threshold / beta;
      while (need * beta < threshold)
        need = std::nextafter(need, std::numeric_limits<double>::infinity());
      tau = std::max(tau, need);
    }
    if (tau > box.p_max[std::size_t(j)]) {
      PowerBox::InfeasibleBs rec{j, {}};
      for (int i : served[std::size_t(j)]) {
        if (chan.gain(i, j) * box.p_max[std::size_t(j)] < threshold)
          rec.ues.push_back(i);
      }
      box.infeasible.push_back(std::move(rec));
      tau = box.p_max[std::size_t(j)];
    }
    box.tau[std::size_t(j)] = tau;
  }
  return box;
}

struct PowerTrajectoryRow {
  int t = 0;
  double slt = 0.0;
  double mean_power_w = 0.0;
  double tn_mean_power_w = 0.0;
  double ntn_mean_power_w = 0.0;
};

struct PowerSolveResult {
  std::vector<double> power_w;
  std::vector<PowerTrajectoryRow> trajectory;
  PowerBox box;
  bool coverage_infeasible = false;
  bool converged = false;
  int iterations = 0;
};

inline PowerSolveResult solve_power(const std::vector<double>& p0,
                                    const std::vector<int>& serving, double sat_share,
                                    const Topology& topo, const ChannelState& chan,
                                    const RadioConfig& radio,
                                    const PowerSolverOptions& opts,
                                    ObjectiveVariant variant = ObjectiveVariant::kSplitWeighted) {
  const int B = topo.bs_count();
  PowerSolveResult result;
  result.box = coverage_lower_bounds(serving, topo, chan, radio);
  result.coverage_infeasible = !result.box.infeasible.empty();

  std::vector<double> p = p0;
  for (int j = 0; j < B; ++j)
    p[std::size_t(j)] =
        std::clamp(p[std::size_t(j)], result.box.tau[std::size_t(j)],
                   result.box.p_max[std::size_t(j)]);

  AllocationState alloc;
  alloc.serving = serving;
  alloc.sat_share = sat_share;
  alloc.power_w = p;
  alloc.load = alloc.integer_loads(B);

  auto objective = [&](const std::vector<double>& power) {
    AllocationState a = alloc;
    a.power_w = power;
    return network_slt(a, topo, chan, radio, variant);
  };
  auto push_row = [&](int t, double slt, const std::vector<double>& power) {
    PowerTrajectoryRow row;
    row.t = t;
    row.slt = slt;
    double total = 0.0, tn = 0.0, ntn = 0.0;
    for (int j = 0; j < B; ++j) {
      total += power[std::size_t(j)];
      (topo.is_satellite(j) ? ntn : tn) += power[std::size_t(j)];
    }
    row.mean_power_w = total / double(B);
    row.tn_mean_power_w = topo.macro_count() ? tn / double(topo.macro_count()) : 0.0;
    row.ntn_mean_power_w =
        topo.satellite_count() ? ntn / double(topo.satellite_count()) : 0.0;
    result.trajectory.push_back(row);
  };

  double slt = objective(p);
  push_row(0, slt, p);

  for (int t = 1; t <= opts.max_iterations; ++t) {
    const auto grad = slt_gradient(p, serving, topo, chan, radio);
    const auto hess = slt_hessian_diag(p, serving, topo, chan, radio);
    const auto step = newton_step(grad, hess, opts.delta5);

    double scale = opts.delta5 / std::sqrt(double(t));
    std::vector<double> candidate(std::size_t(B), 0.0);
    double slt_new = slt;
    bool moved = false;
    for (int bt = 0;; ++bt) {
      for (int j = 0; j < B; ++j)
        candidate[std::size_t(j)] =
            std::clamp(p[std::size_t(j)] + scale * step[std::size_t(j)],
                       result.box.tau[std::size_t(j)], result.box.p_max[std::size_t(j)]);
      slt_new = objective(candidate);
      if (!opts.line_search || slt_new >= slt) {
        moved = true;
        break;
      }
      if (bt >= opts.max_backtracks) break;
      scale *= 0.5;
    }

    if (moved) {
      p = candidate;
      result.iterations = t;
      const double prev = slt;
      slt = slt_new;
      push_row(t, slt, p);
      if (std::isfinite(slt) && std::abs(slt - prev) < opts.slt_rel_tol * std::abs(slt)) {
        result.converged = true;
        break;
      }
    } else {
      // No admissible ascent step at this iterate.
      result.converged = true;
      result.iterations = t;
      break;
    }
  }

  result.power_w = p;
  return result;
}

}  // namespace ntnopt
