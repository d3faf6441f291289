#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "ratechan.hpp"
#include "throughput.hpp"

namespace lteu {

struct PowerProfile {
  double p_sense_w = 0.011;
  double p_reserve_w = 0.1;
  double p_estimate_w = 0.2;
  double p_receive_w = 0.2;
  double p_basic_w = 1e-4;
  double e0_joules = 2.28e-6;
  int feedback_index_base = 100;

  void validate() const {
    require(p_sense_w >= 0 && p_reserve_w >= 0 && p_estimate_w >= 0 && p_receive_w >= 0 && p_basic_w >= 0 &&
                e0_joules >= 0,
            "power constants must be >= 0");
    require(feedback_index_base >= 1, "power.feedback_index_base must be >= 1");
  }
};

struct EEBreakdown {
  double e_basic_j = 0.0;
  double e_ul_j = 0.0;
  double e_dl_j = 0.0;
  double bits_delivered = 0.0;
  double kappa = 0.0;  // bits per joule

  double total_j() const { return e_basic_j + e_ul_j + e_dl_j; }
};

// (4 + 2δ + ⌈log2 C(base, δ)⌉)·e0
inline double feedback_energy(int delta, double e0, int base = 100) {
  require(delta >= 0 && delta <= base, "feedback_energy: need 0 <= delta <= base");
  const double bits = log_binomial(base, delta) / std::log(2.0);
  return (4.0 + 2.0 * delta + std::ceil(bits - 1e-9)) * e0;
}

// Probability that user k (zero based) reports a given subchannel.
inline double report_probability(const FeedbackScheme& scheme, const FadingParams& fading, int k, int s,
                                  SchedulerKind scheduler = SchedulerKind::random) {
  if (!scheme.is_threshold()) return static_cast<double>(scheme.m) / s;
  if (scheduler == SchedulerKind::proportional_fair)
    return std::exp(-scheme.lambda / fading.mean_gain_linear());
  return std::exp(-scheme.lambda / fading.user_mean(k));
}

inline double expected_feedback_energy(const PowerProfile& pw, const FeedbackScheme& scheme,
                                       const FadingParams& fading, int k, int s,
                                       SchedulerKind scheduler = SchedulerKind::random) {
  if (!scheme.is_threshold()) return feedback_energy(scheme.m, pw.e0_joules, pw.feedback_index_base);
  const double q = report_probability(scheme, fading, k, s, scheduler);
  double e = 0.0;
  for (int d = 1; d <= s; ++d) e += binomial_pmf(s, d, q) * feedback_energy(d, pw.e0_joules, pw.feedback_index_base);
  return e;
}

// E(I(N_s >= 1)): at least one user reports the tagged subchannel.
inline double scheduled_indicator(const FeedbackScheme& scheme, const FadingParams& fading, int s,
                                  SchedulerKind scheduler = SchedulerKind::random) {
  if (!scheme.is_threshold())
    return 1.0 - std::pow(1.0 - static_cast<double>(scheme.m) / s, fading.user_count);
  double none = 1.0;
  for (int k = 0; k < fading.user_count; ++k) none *= 1.0 - report_probability(scheme, fading, k, s, scheduler);
  return 1.0 - none;
}

struct UlMeans {
  double contention_us = 0.0;
  double reservation_us = 0.0;
};

inline double ul_energy(const PowerProfile& pw, const FeedbackScheme& scheme, const FadingParams& fading, int s,
                        UlMeans means, SchedulerKind scheduler = SchedulerKind::random,
                        bool include_reservation = true) {
  const int users = fading.user_count;
  double e = users * (pw.p_sense_w * means.contention_us * 1e-6 +
                      (include_reservation ? pw.p_reserve_w * means.reservation_us * 1e-6 : 0.0));
  for (int k = 0; k < users; ++k) e += expected_feedback_energy(pw, scheme, fading, k, s, scheduler);
  return e;
}

inline double dl_energy(const PowerProfile& pw, const FeedbackScheme& scheme, const FadingParams& fading, int s,
                        int n_sb, double t_sb_us, double mean_dl_pretx_us,
                        SchedulerKind scheduler = SchedulerKind::random) {
  const int users = fading.user_count;
  const double rx = pw.p_receive_w * t_sb_us * 1e-6 * n_sb * scheduled_indicator(scheme, fading, s, scheduler);
  return users * pw.p_sense_w * mean_dl_pretx_us * 1e-6 + rx + users * pw.p_estimate_w * t_sb_us * 1e-6;
}

inline double basic_energy(const PowerProfile& pw, int users, double mean_tx_total_us) {
  return users * pw.p_basic_w * mean_tx_total_us * 1e-6;
}

inline EEBreakdown energy_efficiency(double bits, double e_basic, double e_ul, double e_dl) {
  EEBreakdown b{e_basic, e_ul, e_dl, bits, 0.0};
  const double tot = b.total_j();
  require(tot > 0.0, "energy_efficiency: total energy must be positive");
  b.kappa = bits / tot;
  return b;
}

// Full assembly from the delay model and the spectral sum shared with the
// throughput expression.
inline EEBreakdown energy_efficiency(SchedulerKind scheduler, const FeedbackScheme& scheme, const FadingParams& fading,
                                     const PowerProfile& pw, int s, double bandwidth_hz, const DelayModel& delay,
                                     double spectral, bool include_reservation = true) {
  const double bits = bits_per_burst(bandwidth_hz, delay, spectral);
  const double e0 = basic_energy(pw, fading.user_count, delay.mean_tx_dl_us + delay.mean_tx_ul_us);
  const double eu = ul_energy(pw, scheme, fading, s, {delay.mean_contention_us, delay.mean_reservation_us}, scheduler,
                              include_reservation);
  const double ed = dl_energy(pw, scheme, fading, s, delay.burst_subframes, delay.subframe_us, delay.mean_pretx_us,
                              scheduler);
  return energy_efficiency(bits, e0, eu, ed);
}

}  // namespace lteu
