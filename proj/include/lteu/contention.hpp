#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "error.hpp"
#include "mac.hpp"

namespace lteu {

enum class PmfMode { lattice, monte_carlo };

struct ContentionOptions {
  double grid_us = 1.0;
  double epsilon = 1e-6;
  std::int64_t mc_samples = 1000000;
  std::uint64_t seed = 1;
};

struct ContentionPmf {
  double grid_us = 1.0;
  std::int64_t first = 0;  // lattice index of mass[0]
  std::vector<double> mass;
  double truncation_tail = 0.0;

  double time_at(std::size_t i) const { return static_cast<double>(first + static_cast<std::int64_t>(i)) * grid_us; }
  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }
};

// pmf over a non-negative integer count of subframes.
struct SubframePmf {
  std::vector<double> mass;
  double tail = 0.0;

  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }
  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) s += i * mass[i];
    return s;
  }
  int min_support() const {
    for (std::size_t i = 0; i < mass.size(); ++i)
      if (mass[i] > 0.0) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline void trim(ContentionPmf& p, const std::vector<double>& dense, double eps) {
  std::size_t lo = 0, hi = dense.size();
  while (lo < hi && dense[lo] == 0.0) ++lo;
  double tail = 0.0;
  while (hi > lo && tail + dense[hi - 1] <= eps) tail += dense[--hi];
  p.first = static_cast<std::int64_t>(lo);
  p.mass.assign(dense.begin() + lo, dense.begin() + hi);
  p.truncation_tail = tail;
}

}  // namespace detail

inline ContentionPmf contention_pmf(const MacParams& mp, const FixedPointSolution& fp,
                                    PmfMode mode = PmfMode::lattice,
                                    const ContentionOptions& opt = {}) {
  mp.validate();
  require(opt.grid_us > 0.0, "contention: grid_us must be positive");
  require(opt.epsilon >= 0.0 && opt.epsilon < 1e-2, "contention: epsilon out of range");
  const SlotLaw s = slot_law(mp, fp, opt.grid_us);
  const int z = mp.lteu_cw;
  const std::size_t top = static_cast<std::size_t>(s.difs + static_cast<std::int64_t>(z - 1) *
                                                   std::max({s.idle, s.success, s.collision}));
  std::vector<double> dense(top + 1, 0.0);
  ContentionPmf out;
  out.grid_us = opt.grid_us;

  if (mode == PmfMode::lattice) {
    std::vector<double> cur(top + 1, 0.0), next(top + 1, 0.0);
    cur[s.difs] = 1.0;
    std::size_t lo = s.difs, hi = s.difs;
    const std::int64_t off[3] = {s.idle, s.success, s.collision};
    const double w[3] = {s.p_idle, s.p_success, s.p_collision};
    const double inv = 1.0 / z;
    for (int b = 0; b < z; ++b) {
      for (std::size_t i = lo; i <= hi; ++i) dense[i] += cur[i] * inv;
      if (b + 1 == z) break;
      std::size_t nlo = top, nhi = 0;
      for (int k = 0; k < 3; ++k) {
        if (w[k] <= 0.0) continue;
        nlo = std::min(nlo, lo + off[k]);
        nhi = std::max(nhi, hi + off[k]);
      }
      std::fill(next.begin() + nlo, next.begin() + nhi + 1, 0.0);
      for (std::size_t i = lo; i <= hi; ++i) {
        const double c = cur[i];
        if (c == 0.0) continue;
        for (int k = 0; k < 3; ++k)
          if (w[k] > 0.0) next[i + off[k]] += w[k] * c;
      }
      std::fill(cur.begin() + lo, cur.begin() + hi + 1, 0.0);
      cur.swap(next);
      lo = nlo;
      hi = nhi;
    }
  } else {
    require(opt.mc_samples >= 10000, "contention: Monte Carlo needs at least 1e4 samples");
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<int> counter(0, z - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double c1 = s.p_idle, c2 = s.p_idle + s.p_success;
    for (std::int64_t e = 0; e < opt.mc_samples; ++e) {
      std::int64_t t = s.difs;
      for (int b = counter(rng); b > 0; --b) {
        const double x = u(rng);
        t += x < c1 ? s.idle : (x < c2 ? s.success : s.collision);
      }
      dense[t] += 1.0;
    }
    for (double& d : dense) d /= static_cast<double>(opt.mc_samples);
  }
  detail::trim(out, dense, opt.epsilon);
  return out;
}

inline double total_variation(const ContentionPmf& a, const ContentionPmf& b) {
  require(a.grid_us == b.grid_us, "total_variation: lattices differ");
  const std::int64_t lo = std::min(a.first, b.first);
  const std::int64_t hi = std::max(a.first + static_cast<std::int64_t>(a.mass.size()),
                                   b.first + static_cast<std::int64_t>(b.mass.size()));
  auto at = [](const ContentionPmf& p, std::int64_t i) {
    const std::int64_t j = i - p.first;
    return j >= 0 && j < static_cast<std::int64_t>(p.mass.size()) ? p.mass[j] : 0.0;
  };
  double d = 0.0;
  for (std::int64_t i = lo; i < hi; ++i) d += std::fabs(at(a, i) - at(b, i));
  return 0.5 * d;
}

inline std::int64_t subframes_covering(double t_us, double t_sb_us) {
  return static_cast<std::int64_t>(std::ceil(t_us / t_sb_us - 1e-9));
}

inline SubframePmf pretx_pmf(const ContentionPmf& p, double t_sb_us) {
  require(t_sb_us > 0.0, "pretx_pmf: subframe length must be positive");
  SubframePmf out;
  out.tail = p.truncation_tail;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    if (p.mass[i] == 0.0) continue;
    const auto b = static_cast<std::size_t>(std::max<std::int64_t>(1, subframes_covering(p.time_at(i), t_sb_us)));
    if (out.mass.size() <= b) out.mass.resize(b + 1, 0.0);
    out.mass[b] += p.mass[i];
  }
  return out;
}

inline SubframePmf feedback_delay_pmf(const SubframePmf& pretx, int n_sb, int alpha) {
  require(n_sb >= 1 && alpha >= 1 && alpha <= n_sb, "feedback_delay_pmf: need 1 <= alpha <= n_sb");
  const std::size_t shift = static_cast<std::size_t>(n_sb + alpha - 1);
  const std::size_t n = pretx.mass.size();
  SubframePmf out;
  out.tail = pretx.tail * (2.0 - pretx.tail);
  if (n == 0) return out;
  out.mass.assign(2 * n - 1 + shift, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.mass[i + j + shift] += pretx.mass[i] * pretx.mass[j];
  return out;
}

inline double collision_prob_first(const ContentionPmf& p, double t_sb_us, double t_c_w_us, double p_l) {
  double short_res = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    const double t = p.time_at(i);
    const double b = static_cast<double>(std::max<std::int64_t>(1, subframes_covering(t, t_sb_us)));
    if (b * t_sb_us - t < t_c_w_us) short_res += p.mass[i];
  }
  return p_l * short_res;
}

inline double mean_contention(const ContentionPmf& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) s += p.time_at(i) * p.mass[i];
  return s;
}

inline double mean_pretx(const SubframePmf& pretx, double t_sb_us) { return pretx.mean() * t_sb_us; }

inline double mean_reservation(const ContentionPmf& p, double t_sb_us) {
  return mean_pretx(pretx_pmf(p, t_sb_us), t_sb_us) - mean_contention(p);
}

inline double mean_tx_duration(const SubframePmf& pretx, int n_sb, double t_sb_us) {
  return mean_pretx(pretx, t_sb_us) + n_sb * t_sb_us;
}

struct DelayModel {
  double subframe_us = 1000.0;
  int burst_subframes = 3;
  SubframePmf pretx;
  std::vector<SubframePmf> delay;  // delay[alpha - 1]
  double mean_contention_us = 0.0;
  double mean_pretx_us = 0.0;
  double mean_reservation_us = 0.0;
  double mean_tx_dl_us = 0.0;
  double mean_tx_ul_us = 0.0;
  double collision_first = 0.0;

  double collision(int alpha) const { return alpha == 1 ? collision_first : 0.0; }
  const SubframePmf& delay_pmf(int alpha) const { return delay.at(alpha - 1); }
};

inline DelayModel build_delay_model(const MacParams& mp, const FixedPointSolution& fp, const ContentionPmf& p) {
  DelayModel d;
  d.subframe_us = mp.subframe_us;
  d.burst_subframes = mp.burst_subframes;
  d.pretx = pretx_pmf(p, mp.subframe_us);
  for (int a = 1; a <= mp.burst_subframes; ++a) d.delay.push_back(feedback_delay_pmf(d.pretx, mp.burst_subframes, a));
  d.mean_contention_us = mean_contention(p);
  d.mean_pretx_us = mean_pretx(d.pretx, mp.subframe_us);
  d.mean_reservation_us = d.mean_pretx_us - d.mean_contention_us;
  d.mean_tx_dl_us = d.mean_tx_ul_us = mean_tx_duration(d.pretx, mp.burst_subframes, mp.subframe_us);
  d.collision_first = collision_prob_first(p, mp.subframe_us, mp.wifi_collision_us, fp.p_l);
  return d;
}

// Support points of a pmf sorted by index, dropping the smallest masses whose
// cumulative sum stays within eps.
inline std::vector<int> significant_support(const SubframePmf& p, double eps = 1e-6) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < p.mass.size(); ++i)
    if (p.mass[i] > 0.0) idx.push_back(static_cast<int>(i));
  std::vector<int> by_mass = idx;
  std::stable_sort(by_mass.begin(), by_mass.end(), [&](int a, int b) { return p.mass[a] < p.mass[b]; });
  double dropped = 0.0;
  std::vector<char> keep(p.mass.size(), 1);
  for (int i : by_mass) {
    if (dropped + p.mass[i] > eps) break;
    dropped += p.mass[i];
    keep[i] = 0;
  }
  std::vector<int> out;
  for (int i : idx)
    if (keep[i]) out.push_back(i);
  return out;
}

}  // namespace lteu
