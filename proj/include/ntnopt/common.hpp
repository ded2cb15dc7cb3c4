#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ntnopt {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// ---------------------------------------------------------------------------
// dB / linear conversions. Convention: dB and dBm at interfaces, linear watts
// internally, conversion at the boundaries only.
// ---------------------------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

/// Free-space path loss in dB at distance `distance_m` and frequency `freq_hz`.
inline double fspl_db(double distance_m, double freq_hz) {
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(freq_hz) +
         20.0 * std::log10(4.0 * M_PI / kSpeedOfLight);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. A small splitmix64-based generator so that draws are
// reproducible across platforms and independent of the standard library's
// distribution implementations. Streams can be derived from (seed, key) pairs,
// which keeps results independent of evaluation order and thread count.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Warm up so that small consecutive seeds yield uncorrelated streams.
    splitmix64(state_);
    splitmix64(state_);
  }

  /// Derive an independent stream keyed by (a, b), e.g. a (ue, bs) pair.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = seed;
    s ^= splitmix64(a) + 0x9E3779B97F4A7C15ULL;
    s ^= splitmix64(b) + (s << 6) + (s >> 2);
    return Rng(s);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform double in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; two uniforms per draw, no cached state.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double sigma) { return sigma * normal(); }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    return std::size_t(uniform() * double(n)) % n;
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Small dense matrix, row major.
// ---------------------------------------------------------------------------

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// Index-based parallel for. Work is partitioned by index so results land in
// preassigned slots; output is identical for any thread count.
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(std::size_t(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline int default_thread_count() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

// ---------------------------------------------------------------------------
// Number formatting for text artifacts. %.17g round-trips doubles exactly, so
// reruns of an identical campaign produce byte-identical files.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_double(double v, int precision) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

/// Quantile with linear interpolation between order statistics (the common
/// "type 7" definition). q in [0, 1]; input need not be sorted.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  if (q <= 0.0) return values.front();
  if (q >= 1.0) return values.back();
  double pos = q * double(values.size() - 1);
  std::size_t lo = std::size_t(pos);
  double frac = pos - double(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / double(values.size());
}

}  // namespace ntnopt
