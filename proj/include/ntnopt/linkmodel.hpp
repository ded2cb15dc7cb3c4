#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ntnopt/channel.hpp"
#include "ntnopt/common.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt {

struct RadioConfig {
  double total_bandwidth_hz = 40e6;
  double subcarrier_spacing_hz = 15e3;
  double noise_density_dbm_per_hz = -174.0;
  double coverage_threshold_dbm = -120.0;
  double tn_max_power_per_re_dbm = 17.7;
  double ntn_max_power_per_re_dbm = 15.8;

  /// Noise power over one resource element (one subcarrier), linear watts.
  double noise_power_w() const {
    return dbm_to_watt(noise_density_dbm_per_hz) * subcarrier_spacing_hz;
  }
  double coverage_threshold_w() const { return dbm_to_watt(coverage_threshold_dbm); }

  void validate() const {
    if (!(total_bandwidth_hz > 0.0))
      throw std::invalid_argument("total_bandwidth_hz must be strictly positive");
    if (!(subcarrier_spacing_hz > 0.0))
      throw std::invalid_argument("subcarrier_spacing_hz must be strictly positive");
    if (!std::isfinite(noise_density_dbm_per_hz) ||
        !std::isfinite(coverage_threshold_dbm))
      throw std::invalid_argument("noise density and coverage threshold must be finite");
  }
};

// How the bandwidth-split factor enters the objective. `kSplitWeighted`
// multiplies each rate by its tier's split share inside the log (so the share
// appears twice, once in the per-BS bandwidth and once as an explicit factor);
// `kBandwidthOnly` scores the plain rate, whose bandwidth already carries the
// split.
enum class ObjectiveVariant { kSplitWeighted, kBandwidthOnly };

// ---------------------------------------------------------------------------
// Allocation: per-UE serving BS (each UE is associated with exactly one BS at
// all times), per-BS load (fractional during dual iterations, integer counts
// after rounding), the satellite bandwidth share, and per-BS transmit power
// per resource element.
// ---------------------------------------------------------------------------

struct AllocationState {
  std::vector<int> serving;     // per UE
  std::vector<double> load;     // per BS
  double sat_share = 0.5;       // fraction of bandwidth handed to satellites
  std::vector<double> power_w;  // per BS, per resource element

  int x(int ue, int bs) const { return serving[std::size_t(ue)] == bs ? 1 : 0; }

  std::vector<double> integer_loads(int bs_count) const {
    std::vector<double> counts(std::size_t(bs_count), 0.0);
    for (int bs : serving) counts[std::size_t(bs)] += 1.0;
    return counts;
  }
};

/// Bandwidth owned by BS `bs`: W*share for satellites, W*(1 - share) for
/// macros; the two tiers use orthogonal fractions of the band.
inline double bs_bandwidth_hz(const Topology& topo, int bs, double sat_share,
                              const RadioConfig& radio) {
  return topo.is_satellite(bs) ? radio.total_bandwidth_hz * sat_share
                               : radio.total_bandwidth_hz * (1.0 - sat_share);
}

inline double split_share(const Topology& topo, int bs, double sat_share) {
  return topo.is_satellite(bs) ? sat_share : 1.0 - sat_share;
}

/// SINR of UE `ue` served by BS `bs`. Interference comes from the other BSs of
/// the same tier only; the tiers occupy orthogonal bandwidth.
inline double sinr(int ue, int bs, const Topology& topo, const ChannelState& chan,
                   const std::vector<double>& power_w, const RadioConfig& radio) {
  const bool sat_tier = topo.is_satellite(bs);
  double interference = 0.0;
  for (int j = 0; j < topo.bs_count(); ++j) {
    if (j == bs || topo.is_satellite(j) != sat_tier) continue;
    interference += chan.gain(ue, j) * power_w[std::size_t(j)];
  }
  return chan.gain(ue, bs) * power_w[std::size_t(bs)] /
         (interference + radio.noise_power_w());
}

/// Shannon rate of a link whose BS shares its bandwidth equally among `load`
/// served UEs.
inline double link_rate_bps(const Topology& topo, int bs, double sinr_value,
                            double sat_share, double load, const RadioConfig& radio) {
  if (load == 0.0) throw std::domain_error("unloaded BS rate undefined");
  return bs_bandwidth_hz(topo, bs, sat_share, radio) / load * std::log2(1.0 + sinr_value);
}

/// Per-RE received power in dBm.
inline double rsrp_dbm(double beta, double power_w) {
  return watt_to_dbm(beta * power_w);
}

/// Coverage test, evaluated in linear watts so it agrees bit-for-bit with the
/// constraint residuals used by the solvers.
inline bool is_covered(double beta, double power_w, const RadioConfig& radio) {
  return beta * power_w >= radio.coverage_threshold_w();
}

// ---------------------------------------------------------------------------
// Network sum log-throughput. Natural log of each served link's (optionally
// split-weighted) rate. Any served rate <= 0 makes the whole objective -inf:
// that UE is effectively uncovered.
// ---------------------------------------------------------------------------

inline double network_slt(const AllocationState& alloc, const Topology& topo,
                          const ChannelState& chan, const RadioConfig& radio,
                          ObjectiveVariant variant = ObjectiveVariant::kSplitWeighted) {
  double total = 0.0;
  for (int i = 0; i < topo.ue_count(); ++i) {
    const int bs = alloc.serving[std::size_t(i)];
    const double g = sinr(i, bs, topo, chan, alloc.power_w, radio);
    const double rate = link_rate_bps(topo, bs, g, alloc.sat_share,
                                      alloc.load[std::size_t(bs)], radio);
    const double weight =
        variant == ObjectiveVariant::kSplitWeighted ? split_share(topo, bs, alloc.sat_share)
                                                    : 1.0;
    const double term = weight * rate;
    if (!(term > 0.0)) return -std::numeric_limits<double>::infinity();
    total += std::log(term);
  }
  return total;
}

/// Reporting variant: UEs whose serving RSRP falls below the coverage
/// threshold are excluded from the sum (their rate is reported as zero
/// elsewhere) so benchmark policies keep a finite objective.
inline double network_slt_covered(const AllocationState& alloc, const Topology& topo,
                                  const ChannelState& chan, const RadioConfig& radio,
                                  ObjectiveVariant variant = ObjectiveVariant::kSplitWeighted) {
  double total = 0.0;
  for (int i = 0; i < topo.ue_count(); ++i) {
    const int bs = alloc.serving[std::size_t(i)];
    if (!is_covered(chan.gain(i, bs), alloc.power_w[std::size_t(bs)], radio)) continue;
    const double g = sinr(i, bs, topo, chan, alloc.power_w, radio);
    const double rate = link_rate_bps(topo, bs, g, alloc.sat_share,
                                      alloc.load[std::size_t(bs)], radio);
    const double weight =
        variant == ObjectiveVariant::kSplitWeighted ? split_share(topo, bs, alloc.sat_share)
                                                    : 1.0;
    if (rate > 0.0) total += std::log(weight * rate);
  }
  return total;
}

}  // namespace ntnopt
