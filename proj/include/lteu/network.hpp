#pragma once

#include <cstdint>

#include "energy.hpp"
#include "mac.hpp"
#include "ratechan.hpp"
#include "throughput.hpp"

namespace lteu {

struct NetworkConfig {
  double bandwidth_hz = 20e6;
  int subchannels = 20;
  MacParams mac;
  FadingParams fading;
  RateTable rates = default_rate_table();
  PowerProfile power;
  FeedbackScheme scheme = FeedbackScheme::threshold(0.0);
  SchedulerKind scheduler = SchedulerKind::greedy;
  std::uint64_t rng_seed = 1;

  int users() const { return fading.user_count; }
  int wifi_stations() const { return mac.wifi_stations; }
  double subframe_us() const { return mac.subframe_us; }
  int burst_subframes() const { return mac.burst_subframes; }

  void validate() const {
    require(bandwidth_hz > 0.0, "network.bandwidth_hz must be positive");
    require(subchannels >= 1, "network.subchannels must be >= 1");
    mac.validate();
    fading.validate();
    power.validate();
    scheme.validate(subchannels);
    require(rates.size() >= 1, "rate table is empty");
  }
};

// Threshold reaching a per-subchannel report probability at the base mean gain.
inline FeedbackScheme threshold_for_report_rate(const FadingParams& f, double rho_fb) {
  return FeedbackScheme::threshold(threshold_for_feedback_prob(rho_fb, f.mean_gain_linear()));
}

inline NetworkConfig paper_defaults() {
  NetworkConfig c;
  c.mac.wifi_stations = 6;
  c.mac.lteu_cw = 64;
  c.fading.mean_gain_db = 7.78;
  c.fading.user_count = 10;
  c.fading.doppler_hz = doppler_from_speed(3.0, 5.75e9);
  c.scheme = threshold_for_report_rate(c.fading, 0.2);
  c.scheduler = SchedulerKind::greedy;
  return c;
}

}  // namespace lteu
