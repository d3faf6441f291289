#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "error.hpp"

namespace lteu {

struct MacParams {
  int wifi_stations = 6;
  int wifi_min_cw = 32;
  int wifi_backoff_stages = 5;
  int lteu_cw = 64;
  double slot_us = 9.0;
  double wifi_success_us = 540.72;
  double wifi_collision_us = 284.72;
  double difs_us = 34.0;
  double subframe_us = 1000.0;
  int burst_subframes = 3;

  void validate() const {
    require(wifi_stations >= 0, "mac.wifi_stations must be >= 0");
    require(wifi_min_cw >= 2, "mac.wifi_min_cw must be >= 2");
    require(wifi_backoff_stages >= 0, "mac.wifi_backoff_stages must be >= 0");
    require(lteu_cw >= 1, "mac.lteu_cw must be >= 1");
    require(slot_us > 0 && wifi_success_us > 0 && wifi_collision_us > 0 && difs_us > 0,
            "mac durations must be positive");
    require(wifi_success_us >= wifi_collision_us, "mac.wifi_success_us must be >= wifi_collision_us");
    require(subframe_us > 0, "mac.subframe_us must be positive");
    require(burst_subframes >= 1, "mac.burst_subframes must be >= 1");
  }
};

struct FixedPointSolution {
  double tau_w = 0.0;
  double tau_l = 0.0;
  double p_w = 0.0;
  double p_l = 0.0;
  double p_t = 0.0;
  double p_s_w = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

inline double wifi_tx_prob(double p, int w, int stages) {
  double geo = 0.0, t = 1.0;
  for (int i = 0; i < stages; ++i) {
    geo += t;
    t *= 2.0 * p;
  }
  return 2.0 / (w + 1.0 + p * w * geo);
}

inline FixedPointSolution solve_fixed_point(const MacParams& mp, int max_iter = 200) {
  mp.validate();
  FixedPointSolution fp;
  const int n = mp.wifi_stations;
  fp.tau_l = 2.0 / (mp.lteu_cw + 1.0);
  if (n == 0) {
    fp.p_t = fp.tau_l;
    return fp;
  }
  auto g = [&](double p) {
    double tw = wifi_tx_prob(p, mp.wifi_min_cw, mp.wifi_backoff_stages);
    return p - (1.0 - std::pow(1.0 - tw, n - 1) * (1.0 - fp.tau_l));
  };
  double lo = 0.0, hi = 1.0;
  int it = 0;
  while (hi - lo > 1e-16 && it < max_iter) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
    ++it;
  }
  double p = 0.5 * (lo + hi);
  double r = std::fabs(g(p));
  if (r > 1e-10) throw ConvergenceError("fixed point did not converge", r);
  fp.iterations = it;
  fp.residual = r;
  fp.p_w = p;
  fp.tau_w = wifi_tx_prob(p, mp.wifi_min_cw, mp.wifi_backoff_stages);
  const double q = std::pow(1.0 - fp.tau_w, n);
  fp.p_l = 1.0 - q;
  fp.p_t = 1.0 - q * (1.0 - fp.tau_l);
  fp.p_s_w = n * fp.tau_w * std::pow(1.0 - fp.tau_w, n - 1) * (1.0 - fp.tau_l) / fp.p_t;
  return fp;
}

// Outcome law of one LTE-U backoff decrement, durations on an integer lattice.
struct SlotLaw {
  double p_idle = 1.0;
  double p_success = 0.0;
  double p_collision = 0.0;
  std::int64_t idle = 0;
  std::int64_t success = 0;
  std::int64_t collision = 0;
  std::int64_t difs = 0;
};

inline SlotLaw slot_law(const MacParams& mp, const FixedPointSolution& fp, double grid_us = 1.0) {
  const double ratio = mp.slot_us / grid_us;
  require(std::fabs(ratio - std::round(ratio)) < 1e-9, "grid_us must divide the slot time");
  SlotLaw s;
  const int n = mp.wifi_stations;
  if (n > 0) {
    s.p_idle = std::pow(1.0 - fp.tau_w, n);
    s.p_success = n * fp.tau_w * std::pow(1.0 - fp.tau_w, n - 1);
    s.p_collision = std::max(0.0, 1.0 - s.p_idle - s.p_success);
  }
  s.idle = std::llround(ratio);
  s.success = std::llround((mp.slot_us + mp.wifi_success_us + mp.difs_us) / grid_us);
  s.collision = std::llround((mp.slot_us + mp.wifi_collision_us + mp.difs_us) / grid_us);
  s.difs = std::llround(mp.difs_us / grid_us);
  return s;
}

// Bianchi per-slot airtime share of successful Wi-Fi frames.
inline double slot_occupancy_ratio(const MacParams& mp, const FixedPointSolution& fp) {
  if (mp.wifi_stations == 0) return 0.0;
  const double ts = fp.p_t * fp.p_s_w * mp.wifi_success_us;
  const double den = (1.0 - fp.p_t) * mp.slot_us + ts + fp.p_t * (1.0 - fp.p_s_w) * mp.wifi_collision_us;
  return ts / den;
}

struct ContentionMeans {
  double contention_us = 0.0;   // E(t)
  double reservation_us = 0.0;  // E(t_r)
  double pretx_us() const { return contention_us + reservation_us; }
};

// Means of one contention computed on the 1 µs lattice modulo the subframe length.
inline ContentionMeans contention_means(const MacParams& mp, const FixedPointSolution& fp) {
  const SlotLaw s = slot_law(mp, fp, 1.0);
  const std::int64_t T = std::llround(mp.subframe_us);
  require(T >= 1, "subframe_us must be at least one microsecond");
  const int z = mp.lteu_cw;
  ContentionMeans m;
  const double step = s.p_idle * s.idle + s.p_success * s.success + s.p_collision * s.collision;
  m.contention_us = s.difs + 0.5 * (z - 1) * step;

  std::vector<double> cur(T, 0.0), next(T), acc(T, 0.0);
  cur[s.difs % T] = 1.0;
  const std::int64_t off[3] = {s.idle % T, s.success % T, s.collision % T};
  const double w[3] = {s.p_idle, s.p_success, s.p_collision};
  for (int b = 0; b < z; ++b) {
    for (std::int64_t i = 0; i < T; ++i) acc[i] += cur[i];
    if (b + 1 == z) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t i = 0; i < T; ++i) {
      if (cur[i] == 0.0) continue;
      for (int k = 0; k < 3; ++k)
        if (w[k] > 0.0) next[(i + off[k]) % T] += w[k] * cur[i];
    }
    cur.swap(next);
  }
  double r = 0.0;
  for (std::int64_t i = 1; i < T; ++i) r += acc[i] * static_cast<double>(T - i);
  m.reservation_us = r / z;
  return m;
}

// Long-run share of time carrying successful Wi-Fi frames over one LTE-U cycle
// (contention, reservation, burst).
inline double wifi_occupancy_ratio(const MacParams& mp, const FixedPointSolution& fp) {
  if (mp.wifi_stations == 0) return 0.0;
  const SlotLaw s = slot_law(mp, fp, 1.0);
  const ContentionMeans m = contention_means(mp, fp);
  const double busy = 0.5 * (mp.lteu_cw - 1) * s.p_success * mp.wifi_success_us;
  return busy / (m.pretx_us() + mp.burst_subframes * mp.subframe_us);
}

inline double occupancy_at(MacParams mp, int z) {
  mp.lteu_cw = z;
  return wifi_occupancy_ratio(mp, solve_fixed_point(mp));
}

inline int min_cw(const MacParams& mp, double d_th, int z_max = 1024) {
  require(d_th >= 0.0 && d_th < 1.0, "min_cw: d_th must lie in [0, 1)");
  require(z_max >= 1, "min_cw: z_max must be >= 1");
  std::map<int, double> memo;
  auto t = [&](int z) {
    auto it = memo.find(z);
    if (it != memo.end()) return it->second;
    return memo[z] = occupancy_at(mp, z);
  };
  const int linear_top = std::min(64, z_max);
  for (int z = 1; z <= linear_top; ++z)
    if (t(z) >= d_th) return z;
  if (z_max <= linear_top || t(z_max) < d_th)
    throw ModelError("min_cw: occupancy threshold " + std::to_string(d_th) +
                     " unreachable for Z <= " + std::to_string(z_max));
  int lo = linear_top, hi = z_max;
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    (t(mid) >= d_th ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace lteu
