#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include <json.hpp>

#include "energy.hpp"
#include "network.hpp"
#include "numeric.hpp"

namespace lteu {

template <class Rng>
std::pair<double, double> sample_correlated_pair(double mean, double rho, Rng& rng) {
  require(mean > 0.0 && rho >= 0.0 && rho <= 1.0, "sample_correlated_pair: invalid input");
  std::normal_distribution<double> n(0.0, 1.0);
  const double sd = std::sqrt(mean / 2.0);
  const std::complex<double> h(sd * n(rng), sd * n(rng));
  const double c = std::sqrt(rho), e = std::sqrt(1.0 - rho);
  const std::complex<double> w(sd * n(rng), sd * n(rng));
  const std::complex<double> hd = c * h + e * w;
  return {std::norm(h), rho == 1.0 ? std::norm(h) : std::norm(hd)};
}

struct RatioStat {
  std::int64_t n = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

  void add(double x, double y) {
    ++n;
    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
  }
  double ratio() const { return sy > 0 ? sx / sy : 0.0; }
  // Delta-method standard error of Σx/Σy.
  double std_error() const {
    if (n < 2 || sy <= 0) return 0.0;
    const double r = ratio(), my = sy / n;
    const double v = (sxx - 2 * r * sxy + r * r * syy) / n - std::pow((sx - r * sy) / n, 2);
    return std::sqrt(std::max(0.0, v) * n / (n - 1) / n) / my;
  }
};

struct SimResult {
  std::int64_t bursts = 0;
  std::int64_t subframes = 0;
  std::int64_t contentions = 0;
  std::int64_t slots = 0;
  double total_time_us = 0.0;
  double total_bits = 0.0;
  double throughput_bps = 0.0;
  double throughput_se = 0.0;
  double kappa_bits_per_j = 0.0;
  double kappa_se = 0.0;
  EEBreakdown energy;  // per-burst means
  double energy_total_j = 0.0;
  std::vector<std::vector<std::int64_t>> delay_hist;  // [alpha-1][a]
  double collision_first_rate = 0.0;
  double collision_first_se = 0.0;
  double wifi_occupancy = 0.0;
  double wifi_occupancy_se = 0.0;
  double wifi_tx_freq = 0.0;
  double wifi_tx_freq_se = 0.0;
  double wifi_collision_freq = 0.0;
  double lte_busy_freq = 0.0;
  std::vector<std::int64_t> served;
};

namespace detail {

struct Station {
  int stage = 0;
  int counter = 0;
};

struct ContentionOutcome {
  double t_us = 0.0;
  double pretx_us = 0.0;
  bool first_lost = false;
  bool wifi_at_start = false;
};

class CoexistenceSim {
 public:
  CoexistenceSim(const NetworkConfig& cfg, std::mt19937_64& rng) : cfg_(cfg), rng_(rng) {
    sta_.resize(cfg.mac.wifi_stations);
    for (auto& s : sta_) s.counter = draw_cw(0);
  }

  ContentionOutcome contend() {
    const MacParams& m = cfg_.mac;
    ContentionOutcome o;
    double t = m.difs_us;
    int b = std::uniform_int_distribution<int>(0, m.lteu_cw - 1)(rng_);
    for (;;) {
      ++slots;
      int ntx = 0;
      for (const auto& s : sta_) ntx += s.counter == 0;
      attempts += ntx;
      if (b == 0) {
        o.wifi_at_start = ntx > 0;
        collided += ntx;
        after_slot(false);
        break;
      }
      if (ntx == 0) {
        t += m.slot_us;
      } else if (ntx == 1) {
        t += m.slot_us + m.wifi_success_us + m.difs_us;
        success_us += m.wifi_success_us;
      } else {
        t += m.slot_us + m.wifi_collision_us + m.difs_us;
        collided += ntx;
      }
      after_slot(ntx == 1);
      --b;
    }
    o.t_us = t;
    const double ts = m.subframe_us;
    o.pretx_us = static_cast<double>(std::max<std::int64_t>(1, subframes_covering(t, ts))) * ts;
    o.first_lost = o.wifi_at_start && (o.pretx_us - t) < m.wifi_collision_us;
    ++lte_starts;
    if (o.wifi_at_start) ++lte_busy;
    return o;
  }

  std::int64_t slots = 0, attempts = 0, collided = 0, lte_starts = 0, lte_busy = 0;
  double success_us = 0.0;

 private:
  int draw_cw(int stage) {
    const int w = cfg_.mac.wifi_min_cw << stage;
    return std::uniform_int_distribution<int>(0, w - 1)(rng_);
  }

  void after_slot(bool success) {
    for (auto& s : sta_) {
      if (s.counter == 0) {
        s.stage = success ? 0 : std::min(s.stage + 1, cfg_.mac.wifi_backoff_stages);
        s.counter = draw_cw(s.stage);
      } else {
        --s.counter;
      }
    }
  }

  const NetworkConfig& cfg_;
  std::mt19937_64& rng_;
  std::vector<Station> sta_;
};

}  // namespace detail

// Slot-level simulation of `bursts` UL/DL pairs; `trace` receives one JSON
// record per pair when non-null.
inline SimResult run_sim(const NetworkConfig& cfg, std::int64_t bursts, std::ostream* trace = nullptr,
                         int warmup_contentions = 200) {
  cfg.validate();
  require(bursts >= 1, "run_sim: bursts must be >= 1");
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int K = cfg.users(), S = cfg.subchannels, nsb = cfg.burst_subframes();
  const double tsb = cfg.subframe_us();
  const PowerProfile& pw = cfg.power;
  const auto means = cfg.fading.user_means();
  const double base = cfg.fading.mean_gain_linear();
  const double sub_bits = cfg.bandwidth_hz / S * tsb * 1e-6;

  detail::CoexistenceSim mac(cfg, rng);
  for (int i = 0; i < warmup_contentions; ++i) mac.contend();
  mac.slots = mac.attempts = mac.collided = mac.lte_starts = mac.lte_busy = 0;
  mac.success_us = 0.0;

  auto draw_h = [&](double mean) {
    const double sd = std::sqrt(mean / 2.0);
    const double re = normal(rng), im = normal(rng);
    return std::complex<double>(sd * re, sd * im);
  };

  std::vector<std::complex<double>> est(static_cast<std::size_t>(K) * S), next(est.size());
  for (int k = 0; k < K; ++k)
    for (int s = 0; s < S; ++s) est[k * S + s] = draw_h(means[k]);

  SimResult res;
  res.delay_hist.assign(nsb, {});
  res.served.assign(K, 0);
  RatioStat thr, eff, occ;
  std::int64_t lost = 0;
  double e0_sum = 0, eu_sum = 0, ed_sum = 0;
  std::vector<double> gain(est.size());
  std::vector<char> rep(est.size());
  std::vector<int> sel(S), count(K);
  std::vector<double> order(S);

  for (std::int64_t burst = 0; burst < bursts; ++burst) {
    const double busy0 = mac.success_us;
    const detail::ContentionOutcome ul = mac.contend();
    const detail::ContentionOutcome dl = mac.contend();
    lost += ul.first_lost + dl.first_lost;

    // Feedback from the last estimate.
    for (std::size_t i = 0; i < est.size(); ++i) gain[i] = std::norm(est[i]);
    std::fill(count.begin(), count.end(), 0);
    for (int k = 0; k < K; ++k) {
      const double* g = &gain[k * S];
      if (cfg.scheme.is_threshold()) {
        for (int s = 0; s < S; ++s) {
          const bool r = cfg.scheduler == SchedulerKind::proportional_fair ? g[s] / means[k] >= cfg.scheme.lambda / base
                                                                           : g[s] >= cfg.scheme.lambda;
          rep[k * S + s] = r;
          count[k] += r;
        }
      } else {
        std::copy(g, g + S, order.begin());
        std::nth_element(order.begin(), order.begin() + (cfg.scheme.m - 1), order.end(), std::greater<double>());
        const double cut = order[cfg.scheme.m - 1];
        for (int s = 0; s < S; ++s) {
          rep[k * S + s] = g[s] >= cut;
          count[k] += rep[k * S + s];
        }
      }
    }

    // Scheduling per subchannel.
    int assigned = 0;
    for (int s = 0; s < S; ++s) {
      int pick = -1;
      const double u = unif(rng);
      if (cfg.scheduler == SchedulerKind::round_robin) {
        const int k = static_cast<int>((burst + s) % K);
        if (rep[k * S + s]) pick = k;
      } else {
        int nrep = 0;
        for (int k = 0; k < K; ++k) {
          if (!rep[k * S + s]) continue;
          ++nrep;
          if (pick < 0) { pick = k; continue; }
          const double a = gain[k * S + s], b = gain[pick * S + s];
          if (cfg.scheduler == SchedulerKind::greedy && a > b) pick = k;
          if (cfg.scheduler == SchedulerKind::proportional_fair && a / means[k] > b / means[pick]) pick = k;
        }
        if (cfg.scheduler == SchedulerKind::random && nrep > 0) {
          int target = std::min(nrep - 1, static_cast<int>(u * nrep));
          for (int k = 0; k < K; ++k)
            if (rep[k * S + s] && target-- == 0) { pick = k; break; }
        }
      }
      sel[s] = pick;
      if (pick >= 0) { ++assigned; ++res.served[pick]; }
    }

    // Data subframes.
    double bits = 0.0;
    const double lag0 = ul.pretx_us + nsb * tsb + dl.pretx_us;
    for (int alpha = 1; alpha <= nsb; ++alpha) {
      const double tau_us = lag0 + (alpha - 1) * tsb;
      const auto a = static_cast<std::size_t>(std::llround(tau_us / tsb));
      auto& h = res.delay_hist[alpha - 1];
      if (h.size() <= a) h.resize(a + 1, 0);
      ++h[a];
      const double c = amplitude_correlation(tau_us * 1e-6, cfg.fading.doppler_hz);
      const double e = std::sqrt(std::max(0.0, 1.0 - c * c));
      auto evolve = [&](int k, int s) { return c * est[k * S + s] + e * draw_h(means[k]); };
      if (alpha == nsb) {
        for (int k = 0; k < K; ++k)
          for (int s = 0; s < S; ++s) next[k * S + s] = evolve(k, s);
      }
      for (int s = 0; s < S; ++s) {
        const int k = sel[s];
        if (k < 0) continue;
        const std::complex<double> hd = alpha == nsb ? next[k * S + s] : evolve(k, s);
        if (alpha == 1 && dl.first_lost) continue;
        const int n = cfg.rates.region(gain[k * S + s]);
        if (n >= 1 && std::norm(hd) >= cfg.rates.threshold(n)) bits += cfg.rates.rate(n) * sub_bits;
      }
    }
    est.swap(next);

    // Energy per the expected-value accounting, realized per pair.
    const double t_ul = ul.pretx_us + nsb * tsb, t_dl = dl.pretx_us + nsb * tsb;
    const double e0 = K * pw.p_basic_w * (t_ul + t_dl) * 1e-6;
    double fb = 0.0;
    for (int k = 0; k < K; ++k)
      if (count[k] >= 1) fb += feedback_energy(count[k], pw.e0_joules, pw.feedback_index_base);
    const double eu = K * (pw.p_sense_w * ul.t_us + pw.p_reserve_w * (ul.pretx_us - ul.t_us)) * 1e-6 + fb;
    const double ed = K * pw.p_sense_w * dl.pretx_us * 1e-6 +
                      pw.p_receive_w * tsb * 1e-6 * nsb * static_cast<double>(assigned) / S +
                      K * pw.p_estimate_w * tsb * 1e-6;
    e0_sum += e0; eu_sum += eu; ed_sum += ed;
    res.total_bits += bits;
    res.total_time_us += t_ul + t_dl;
    thr.add(bits, (t_ul + t_dl) * 1e-6);
    eff.add(bits, e0 + eu + ed);
    occ.add(mac.success_us - busy0, t_ul + t_dl);

    if (trace) {
      nlohmann::json j;
      j["burst"] = burst;
      j["t_u_us"] = ul.t_us;
      j["t_d_us"] = dl.t_us;
      std::vector<std::int64_t> delays;
      for (int alpha = 1; alpha <= nsb; ++alpha)
        delays.push_back(std::llround((lag0 + (alpha - 1) * tsb) / tsb));
      j["delay_subframes"] = delays;
      j["first_subframe_lost"] = dl.first_lost;
      j["bits"] = bits;
      j["e_basic_j"] = e0;
      j["e_ul_j"] = eu;
      j["e_dl_j"] = ed;
      j["joules"] = e0 + eu + ed;
      *trace << j.dump() << '\n';
    }
  }

  const double n = static_cast<double>(bursts);
  res.bursts = bursts;
  res.subframes = bursts * nsb;
  res.contentions = mac.lte_starts;
  res.slots = mac.slots;
  res.throughput_bps = thr.ratio();
  res.throughput_se = thr.std_error();
  res.kappa_bits_per_j = eff.ratio();
  res.kappa_se = eff.std_error();
  res.energy = EEBreakdown{e0_sum / n, eu_sum / n, ed_sum / n, res.total_bits / n, res.kappa_bits_per_j};
  res.energy_total_j = e0_sum + eu_sum + ed_sum;
  const double pc = static_cast<double>(lost) / mac.lte_starts;
  res.collision_first_rate = pc;
  res.collision_first_se = std::sqrt(pc * (1 - pc) / mac.lte_starts);
  res.wifi_occupancy = occ.ratio();
  res.wifi_occupancy_se = occ.std_error();
  const int nw = cfg.wifi_stations();
  if (nw > 0) {
    const double trials = static_cast<double>(mac.slots) * nw;
    res.wifi_tx_freq = mac.attempts / trials;
    res.wifi_tx_freq_se = std::sqrt(res.wifi_tx_freq * (1 - res.wifi_tx_freq) / trials);
    res.wifi_collision_freq = mac.attempts ? static_cast<double>(mac.collided) / mac.attempts : 0.0;
  }
  res.lte_busy_freq = static_cast<double>(mac.lte_busy) / mac.lte_starts;
  return res;
}

}  // namespace lteu
