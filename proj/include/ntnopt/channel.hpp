#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntnopt/common.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt {

// ---------------------------------------------------------------------------
// Large-scale channel model. Terrestrial links compose transmit antenna gain,
// a log-distance path loss and log-normal shadow fading; satellite links
// additionally apply clutter loss (NLoS only) and a constant scintillation
// loss, with free-space path loss over the slant range. All coefficients are
// configurable so measured tables can be substituted later; the defaults are
// representative S-band rural values.
// ---------------------------------------------------------------------------

struct LogDistanceModel {
  double los_exponent = 2.2;
  double nlos_exponent = 3.7;
  double los_intercept_db = 38.47;   // loss at the 1 m reference distance
  double nlos_intercept_db = 28.0;
};

struct ChannelParams {
  double carrier_freq_ghz = 2.0;
  LogDistanceModel tn_pathloss;
  double tn_shadow_sigma_los_db = 4.0;
  double tn_shadow_sigma_nlos_db = 8.0;
  double ntn_shadow_sigma_los_db = 0.0;
  double ntn_shadow_sigma_nlos_db = 12.0;
  double clutter_loss_db = 19.5;        // NLoS satellite links only
  double scintillation_loss_db = 2.2;   // every satellite link
  double tn_antenna_gain_dbi = 14.0;
  double ntn_antenna_gain_dbi = 30.0;
  // LoS probability curves, two parameters per tier:
  //   terrestrial: P = exp(-(d - offset)/scale) for d > offset, else 1
  //   satellite:   P = 1 - amplitude * exp(-elevation/scale)
  double tn_los_offset_m = 10.0;
  double tn_los_scale_m = 1000.0;
  double ntn_los_amplitude = 0.3;
  double ntn_los_scale_deg = 30.0;
  // Distances below this are clamped before evaluating the path loss.
  double reference_distance_m = 10.0;

  double carrier_freq_hz() const { return carrier_freq_ghz * 1e9; }

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be nonnegative");
    };
    if (!(carrier_freq_ghz > 0.0))
      throw std::invalid_argument("carrier_freq_ghz must be strictly positive");
    nonneg(tn_shadow_sigma_los_db, "tn_shadow_sigma_los_db");
    nonneg(tn_shadow_sigma_nlos_db, "tn_shadow_sigma_nlos_db");
    nonneg(ntn_shadow_sigma_los_db, "ntn_shadow_sigma_los_db");
    nonneg(ntn_shadow_sigma_nlos_db, "ntn_shadow_sigma_nlos_db");
    nonneg(clutter_loss_db, "clutter_loss_db");
    nonneg(scintillation_loss_db, "scintillation_loss_db");
    if (!(tn_los_scale_m > 0.0))
      throw std::invalid_argument("tn_los_scale_m must be strictly positive");
    if (!(ntn_los_scale_deg > 0.0))
      throw std::invalid_argument("ntn_los_scale_deg must be strictly positive");
    if (!(ntn_los_amplitude >= 0.0 && ntn_los_amplitude <= 1.0))
      throw std::invalid_argument("ntn_los_amplitude must lie in [0, 1]");
    if (!(reference_distance_m > 0.0))
      throw std::invalid_argument("reference_distance_m must be strictly positive");
  }
};

inline double tn_los_probability(const ChannelParams& p, double distance_m) {
  if (distance_m <= p.tn_los_offset_m) return 1.0;
  return std::exp(-(distance_m - p.tn_los_offset_m) / p.tn_los_scale_m);
}

inline double ntn_los_probability(const ChannelParams& p, double elevation_deg) {
  double v = 1.0 - p.ntn_los_amplitude * std::exp(-elevation_deg / p.ntn_los_scale_deg);
  return std::clamp(v, 0.0, 1.0);
}

inline double tn_pathloss_db(const ChannelParams& p, double distance_m, bool los) {
  const auto& m = p.tn_pathloss;
  double exponent = los ? m.los_exponent : m.nlos_exponent;
  double intercept = los ? m.los_intercept_db : m.nlos_intercept_db;
  return intercept + 10.0 * exponent * std::log10(distance_m);
}

// Deterministic cores: gain in dB given the sampled LoS state and shadowing
// draw. The sampling wrappers below draw both from a per-link stream.

inline double terrestrial_gain_db(const ChannelParams& p, double antenna_gain_dbi,
                                  double distance_m, bool los, double shadow_db) {
  return antenna_gain_dbi - tn_pathloss_db(p, distance_m, los) + shadow_db;
}

inline double satellite_gain_db(const ChannelParams& p, double antenna_gain_dbi,
                                double slant_m, bool los, double shadow_db) {
  double gain = antenna_gain_dbi - fspl_db(slant_m, p.carrier_freq_hz()) + shadow_db;
  if (!los) gain -= p.clutter_loss_db;
  gain -= p.scintillation_loss_db;
  return gain;
}

/// Linear gain for a macro link. Zero distances are clamped to the reference
/// distance; `clamped` reports whether that happened.
inline double terrestrial_gain(const Ue& ue, const TerrestrialBs& bs,
                               const ChannelParams& p, Rng& rng,
                               bool* los_out = nullptr, bool* clamped = nullptr) {
  double d = distance(ue.pos, bs.pos);
  bool was_clamped = d < p.reference_distance_m;
  if (was_clamped) d = p.reference_distance_m;
  if (clamped) *clamped = was_clamped;
  bool los = rng.uniform() < tn_los_probability(p, d);
  if (los_out) *los_out = los;
  double sigma = los ? p.tn_shadow_sigma_los_db : p.tn_shadow_sigma_nlos_db;
  double shadow_db = rng.normal(sigma);
  return db_to_linear(terrestrial_gain_db(p, bs.antenna_gain_dbi, d, los, shadow_db));
}

/// Linear gain for a satellite link: free-space loss at the slant range plus
/// shadowing, clutter loss in NLoS and the constant scintillation loss.
inline double satellite_gain(const Ue& ue, const SatelliteBs& sat,
                             const ChannelParams& p, Rng& rng,
                             bool* los_out = nullptr) {
  double slant = slant_range_m(sat, ue.pos);
  bool los = rng.uniform() < ntn_los_probability(p, sat.elevation_deg);
  if (los_out) *los_out = los;
  double sigma = los ? p.ntn_shadow_sigma_los_db : p.ntn_shadow_sigma_nlos_db;
  double shadow_db = rng.normal(sigma);
  return db_to_linear(satellite_gain_db(p, sat.antenna_gain_dbi, slant, los, shadow_db));
}

// ---------------------------------------------------------------------------
// ChannelState: the frozen large-scale gain matrix for one optimization run.
// Rows are UEs, columns BSs (macros first, then satellites). Each entry draws
// from a stream derived from (seed, ue, bs), so the matrix is identical for
// any row evaluation order or thread count.
// ---------------------------------------------------------------------------

struct ChannelState {
  Matrix<double> beta;       // linear power gains, strictly positive
  Matrix<std::uint8_t> los;  // sampled LoS flags
  std::uint64_t seed = 0;
  int clamped_distances = 0;

  double gain(int ue, int bs) const { return beta(std::size_t(ue), std::size_t(bs)); }
};

inline ChannelState build_channel_state(const Topology& topo, const ChannelParams& params,
                                        std::uint64_t seed, int threads = 1) {
  params.validate();
  const std::size_t K = std::size_t(topo.ue_count());
  const std::size_t B = std::size_t(topo.bs_count());
  ChannelState state;
  state.seed = seed;
  state.beta = Matrix<double>(K, B);
  state.los = Matrix<std::uint8_t>(K, B);
  std::vector<int> clamped_per_ue(K, 0);

  parallel_for(K, threads, [&](std::size_t i) {
    const Ue& ue = topo.ues[i];
    for (std::size_t j = 0; j < B; ++j) {
      Rng rng = Rng::derive(seed, std::uint64_t(i), std::uint64_t(j));
      bool los = false;
      double gain;
      if (topo.is_satellite(int(j))) {
        gain = satellite_gain(ue, topo.satellite(int(j)), params, rng, &los);
      } else {
        bool clamped = false;
        gain = terrestrial_gain(ue, topo.macros[j], params, rng, &los, &clamped);
        if (clamped) ++clamped_per_ue[i];
      }
      state.beta(i, j) = gain;
      state.los(i, j) = los ? 1 : 0;
    }
  });
  for (int c : clamped_per_ue) state.clamped_distances += c;
  return state;
}

// CSV export/import of the gain matrix (row = UE, column = BS, linear gains at
// full double precision), used to pin regression tests.

inline void write_beta_csv(std::ostream& out, const ChannelState& state) {
  for (std::size_t i = 0; i < state.beta.rows(); ++i) {
    for (std::size_t j = 0; j < state.beta.cols(); ++j) {
      if (j) out << ",";
      out << format_double(state.beta(i, j));
    }
    out << "\n";
  }
}

inline Matrix<double> read_beta_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("beta csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Matrix<double> m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace ntnopt
