#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntnopt/common.hpp"

namespace ntnopt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// ---------------------------------------------------------------------------
// Deployment description. One square study area, a hexagonal macro grid, one
// earth-fixed satellite beam covering the whole area, and an inhomogeneous
// (hot-spot + uniform) UE drop. Everything is deterministic given the config
// and seed.
// ---------------------------------------------------------------------------

struct ScenarioConfig {
  double area_side_km = 50.0;
  double inter_site_distance_m = 1732.0;
  double ue_density_per_km2 = 2.0;
  double hotspot_bs_fraction = 0.30;
  double hotspot_ue_fraction = 0.50;
  double hotspot_radius_m = 200.0;
  double satellite_altitude_km = 600.0;
  double satellite_elevation_deg = 90.0;
  // >= 0 selects a ring layout with that many hexagonal rings around the area
  // center (0 -> 1 site, 2 -> 19 sites); -1 fills the whole area with a
  // lattice clipped to it.
  int hex_rings = -1;
  std::uint64_t rng_seed = 1;

  double area_side_m() const { return area_side_km * 1000.0; }
  double area_km2() const { return area_side_km * area_side_km; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be strictly positive");
    };
    positive(area_side_km, "area_side_km");
    positive(inter_site_distance_m, "inter_site_distance_m");
    positive(ue_density_per_km2, "ue_density_per_km2");
    positive(hotspot_radius_m, "hotspot_radius_m");
    positive(satellite_altitude_km, "satellite_altitude_km");
    auto fraction = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    };
    fraction(hotspot_bs_fraction, "hotspot_bs_fraction");
    fraction(hotspot_ue_fraction, "hotspot_ue_fraction");
    if (!(satellite_elevation_deg > 0.0 && satellite_elevation_deg <= 90.0))
      throw std::invalid_argument("satellite_elevation_deg must lie in (0, 90]");
  }
};

struct TerrestrialBs {
  int id = 0;
  Vec2 pos;
  double max_power_dbm = 17.7;
  double antenna_gain_dbi = 14.0;
};

struct SatelliteBs {
  int id = 0;
  Vec2 beam_center;
  double altitude_m = 600e3;
  double elevation_deg = 90.0;
  double max_power_dbm = 15.8;
  double antenna_gain_dbi = 30.0;
};

struct Ue {
  int id = 0;
  Vec2 pos;
  bool hotspot = false;
};

struct TierAttributes {
  double max_power_dbm;
  double antenna_gain_dbi;
};

struct Topology {
  std::vector<TerrestrialBs> macros;
  std::vector<SatelliteBs> satellites;
  std::vector<Ue> ues;
  double area_side_m = 0.0;

  int macro_count() const { return int(macros.size()); }
  int satellite_count() const { return int(satellites.size()); }
  int bs_count() const { return macro_count() + satellite_count(); }
  int ue_count() const { return int(ues.size()); }

  // BS indices: macros first (0..M-1), then satellites (M..M+N-1). The two
  // tiers are disjoint by construction and ids are unique across both.
  bool is_satellite(int bs) const { return bs >= macro_count(); }
  const SatelliteBs& satellite(int bs) const { return satellites[bs - macro_count()]; }

  double bs_max_power_w(int bs) const {
    return dbm_to_watt(is_satellite(bs) ? satellite(bs).max_power_dbm
                                        : macros[bs].max_power_dbm);
  }
  double bs_antenna_gain_dbi(int bs) const {
    return is_satellite(bs) ? satellite(bs).antenna_gain_dbi
                            : macros[bs].antenna_gain_dbi;
  }
};

// 3D position of the satellite: offset from the beam center along +x by the
// ground projection of the slant path, flat-earth geometry. The spherical
// correction is below 1% at these scales and is intentionally omitted.
inline Vec2 satellite_ground_position(const SatelliteBs& sat) {
  double elev_rad = sat.elevation_deg * M_PI / 180.0;
  double horizontal = sat.altitude_m / std::tan(elev_rad);
  return {sat.beam_center.x + horizontal, sat.beam_center.y};
}

inline double slant_range_m(const SatelliteBs& sat, Vec2 ue_pos) {
  Vec2 ground = satellite_ground_position(sat);
  double d2 = distance(ground, ue_pos);
  return std::hypot(d2, sat.altitude_m);
}

// ---------------------------------------------------------------------------
// Hexagonal macro grid. The lattice is centered on the area center; a site is
// included iff its center lies inside the closed square (simplest
// deterministic clipping rule). Rows are spaced ISD*sqrt(3)/2 apart and odd
// rows are offset by ISD/2.
// ---------------------------------------------------------------------------

inline std::vector<Vec2> build_hex_grid(const ScenarioConfig& cfg) {
  cfg.validate();
  const double side = cfg.area_side_m();
  const double isd = cfg.inter_site_distance_m;
  const double cx = side / 2.0, cy = side / 2.0;
  std::vector<Vec2> sites;

  if (cfg.hex_rings >= 0) {
    // Ring layout in axial hex coordinates; ring n holds 1 + 3n(n+1) sites.
    const int n = cfg.hex_rings;
    const double ax = isd, bx = isd / 2.0, by = isd * std::sqrt(3.0) / 2.0;
    for (int q = -n; q <= n; ++q) {
      for (int r = std::max(-n, -q - n); r <= std::min(n, -q + n); ++r) {
        Vec2 p{cx + q * ax + r * bx, cy + r * by};
        if (p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side)
          sites.push_back(p);
      }
    }
  } else {
    const double row_spacing = isd * std::sqrt(3.0) / 2.0;
    const int r_max = int(std::ceil(side / row_spacing)) + 1;
    const int c_max = int(std::ceil(side / isd)) + 1;
    for (int r = -r_max; r <= r_max; ++r) {
      const double y = cy + r * row_spacing;
      if (y < 0.0 || y > side) continue;
      const double offset = (r % 2 != 0) ? 0.5 : 0.0;
      for (int c = -c_max; c <= c_max; ++c) {
        const double x = cx + (c + offset) * isd;
        if (x < 0.0 || x > side) continue;
        sites.push_back({x, y});
      }
    }
  }

  if (sites.empty()) throw std::runtime_error("empty grid");
  return sites;
}

// ---------------------------------------------------------------------------
// UE deployment. A fraction of macro sites is picked uniformly at random as
// hot-spots; hot-spot UEs are dropped uniformly on a disk around their anchor
// (resampled until inside the study area), the rest uniformly over the area.
// ---------------------------------------------------------------------------

inline std::vector<Ue> deploy_ues(const ScenarioConfig& cfg,
                                  const std::vector<TerrestrialBs>& grid,
                                  std::uint64_t seed) {
  cfg.validate();
  if (grid.empty()) throw std::invalid_argument("deploy_ues: empty grid");

  const double side = cfg.area_side_m();
  const long long total = std::llround(cfg.ue_density_per_km2 * cfg.area_km2());
  const long long n_hot = std::llround(cfg.hotspot_ue_fraction * double(total));

  Rng rng(seed);

  // Pick hot-spot anchors with a partial Fisher-Yates shuffle.
  std::vector<int> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  long long n_anchor = std::llround(cfg.hotspot_bs_fraction * double(grid.size()));
  if (n_hot > 0 && n_anchor == 0) n_anchor = 1;
  n_anchor = std::min<long long>(n_anchor, (long long)grid.size());
  for (long long i = 0; i < n_anchor; ++i) {
    std::size_t j = i + rng.uniform_index(order.size() - std::size_t(i));
    std::swap(order[std::size_t(i)], order[j]);
  }

  std::vector<Ue> ues;
  ues.reserve(std::size_t(total));
  for (long long i = 0; i < total; ++i) {
    Ue ue;
    ue.id = int(i);
    ue.hotspot = i < n_hot;
    if (ue.hotspot) {
      const Vec2 anchor = grid[std::size_t(order[rng.uniform_index(std::size_t(n_anchor))])].pos;
      for (;;) {
        double radius = cfg.hotspot_radius_m * std::sqrt(rng.uniform());
        double angle = 2.0 * M_PI * rng.uniform();
        ue.pos = {anchor.x + radius * std::cos(angle), anchor.y + radius * std::sin(angle)};
        if (ue.pos.x >= 0.0 && ue.pos.x <= side && ue.pos.y >= 0.0 && ue.pos.y <= side)
          break;
      }
    } else {
      ue.pos = {side * rng.uniform(), side * rng.uniform()};
    }
    ues.push_back(ue);
  }
  return ues;
}

/// One satellite whose earth-fixed beam covers the whole study area.
inline SatelliteBs place_satellite(const ScenarioConfig& cfg, int bs_id,
                                   TierAttributes attrs) {
  cfg.validate();
  SatelliteBs sat;
  sat.id = bs_id;
  sat.beam_center = {cfg.area_side_m() / 2.0, cfg.area_side_m() / 2.0};
  sat.altitude_m = cfg.satellite_altitude_km * 1000.0;
  sat.elevation_deg = cfg.satellite_elevation_deg;
  sat.max_power_dbm = attrs.max_power_dbm;
  sat.antenna_gain_dbi = attrs.antenna_gain_dbi;
  return sat;
}

inline Topology make_topology(const ScenarioConfig& cfg, TierAttributes tn,
                              TierAttributes ntn) {
  Topology topo;
  topo.area_side_m = cfg.area_side_m();
  const auto sites = build_hex_grid(cfg);
  topo.macros.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i)
    topo.macros.push_back({int(i), sites[i], tn.max_power_dbm, tn.antenna_gain_dbi});
  topo.satellites.push_back(place_satellite(cfg, int(sites.size()), ntn));
  topo.ues = deploy_ues(cfg, topo.macros, cfg.rng_seed);
  return topo;
}

// ---------------------------------------------------------------------------
// Plain-text topology records, one node per line, for inspection and replay:
//   bs <id> tn  <x> <y> <max_power_dbm> <antenna_gain_dbi>
//   bs <id> ntn <x> <y> <altitude_m> <elevation_deg> <max_power_dbm> <gain_dbi>
//   ue <id> <x> <y> <hotspot 0|1>
// ---------------------------------------------------------------------------

inline void serialize_topology(std::ostream& out, const Topology& topo) {
  out << "# ntnopt topology v1\n";
  out << "area " << format_double(topo.area_side_m) << "\n";
  for (const auto& bs : topo.macros) {
    out << "bs " << bs.id << " tn " << format_double(bs.pos.x) << " "
        << format_double(bs.pos.y) << " " << format_double(bs.max_power_dbm) << " "
        << format_double(bs.antenna_gain_dbi) << "\n";
  }
  for (const auto& sat : topo.satellites) {
    out << "bs " << sat.id << " ntn " << format_double(sat.beam_center.x) << " "
        << format_double(sat.beam_center.y) << " " << format_double(sat.altitude_m)
        << " " << format_double(sat.elevation_deg) << " "
        << format_double(sat.max_power_dbm) << " "
        << format_double(sat.antenna_gain_dbi) << "\n";
  }
  for (const auto& ue : topo.ues) {
    out << "ue " << ue.id << " " << format_double(ue.pos.x) << " "
        << format_double(ue.pos.y) << " " << (ue.hotspot ? 1 : 0) << "\n";
  }
}

inline std::string serialize_topology(const Topology& topo) {
  std::ostringstream oss;
  serialize_topology(oss, topo);
  return oss.str();
}

inline Topology parse_topology(std::istream& in) {
  Topology topo;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "area") {
      ls >> topo.area_side_m;
    } else if (kind == "bs") {
      int id;
      std::string tier;
      ls >> id >> tier;
      if (tier == "tn") {
        TerrestrialBs bs;
        bs.id = id;
        ls >> bs.pos.x >> bs.pos.y >> bs.max_power_dbm >> bs.antenna_gain_dbi;
        topo.macros.push_back(bs);
      } else if (tier == "ntn") {
        SatelliteBs sat;
        sat.id = id;
        ls >> sat.beam_center.x >> sat.beam_center.y >> sat.altitude_m >>
            sat.elevation_deg >> sat.max_power_dbm >> sat.antenna_gain_dbi;
        topo.satellites.push_back(sat);
      } else {
        throw std::runtime_error("topology parse: unknown tier '" + tier + "'");
      }
    } else if (kind == "ue") {
      Ue ue;
      int hot;
      ls >> ue.id >> ue.pos.x >> ue.pos.y >> hot;
      ue.hotspot = hot != 0;
      topo.ues.push_back(ue);
    } else {
      throw std::runtime_error("topology parse: unknown record '" + kind + "'");
    }
    if (ls.fail()) throw std::runtime_error("topology parse: malformed line: " + line);
  }
  return topo;
}

inline Topology parse_topology(const std::string& text) {
  std::istringstream iss(text);
  return parse_topology(iss);
}

}  // namespace ntnopt
