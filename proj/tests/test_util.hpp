#pragma once

#include <vector>

#include "ntnopt/channel.hpp"
#include "ntnopt/linkmodel.hpp"
#include "ntnopt/scenario.hpp"

namespace ntnopt::testutil {

// A small topology with hand-placed nodes; gains are filled by the caller.
inline Topology tiny_topology(int macro_count, int sat_count, int ue_count) {
  Topology topo;
  topo.area_side_m = 10e3;
  for (int j = 0; j < macro_count; ++j)
    topo.macros.push_back({j, {1000.0 * (j + 1), 1000.0}, 17.7, 14.0});
  for (int s = 0; s < sat_count; ++s)
    topo.satellites.push_back(
        {macro_count + s, {5000.0, 5000.0}, 600e3, 90.0, 15.8, 30.0});
  for (int i = 0; i < ue_count; ++i)
    topo.ues.push_back({i, {500.0 * (i + 1), 700.0 + 130.0 * i}, false});
  return topo;
}

inline ChannelState manual_channel(const Topology& topo,
                                   const std::vector<std::vector<double>>& beta) {
  ChannelState chan;
  chan.beta = Matrix<double>(beta.size(), beta.front().size());
  chan.los = Matrix<std::uint8_t>(beta.size(), beta.front().size(), 1);
  for (std::size_t i = 0; i < beta.size(); ++i)
    for (std::size_t j = 0; j < beta[i].size(); ++j) chan.beta(i, j) = beta[i][j];
  (void)topo;
  return chan;
}

// Random instance for solver tests: log-uniform gains, stronger toward the
// serving tier, every UE coverable at max power.
inline ChannelState random_channel(const Topology& topo, std::uint64_t seed,
                                   double min_db = -125.0, double max_db = -95.0) {
  ChannelState chan;
  const std::size_t K = std::size_t(topo.ue_count());
  const std::size_t B = std::size_t(topo.bs_count());
  chan.beta = Matrix<double>(K, B);
  chan.los = Matrix<std::uint8_t>(K, B, 1);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < B; ++j) {
      Rng rng = Rng::derive(seed, i, j);
      chan.beta(i, j) = db_to_linear(rng.uniform(min_db, max_db));
    }
  }
  return chan;
}

inline std::vector<double> max_powers(const Topology& topo) {
  std::vector<double> p(std::size_t(topo.bs_count()));
  for (int j = 0; j < topo.bs_count(); ++j) p[std::size_t(j)] = topo.bs_max_power_w(j);
  return p;
}

}  // namespace ntnopt::testutil
