#pragma once

#include "contention.hpp"
#include "energy.hpp"
#include "mac.hpp"
#include "network.hpp"
#include "throughput.hpp"

namespace lteu {

struct ModelOptions {
  PmfMode mode = PmfMode::lattice;
  ContentionOptions contention;
  RateSource source = RateSource::mc;
  McOptions mc;
  double support_epsilon = 1e-6;
  bool include_reservation_energy = true;
};

struct Evaluation {
  double spectral = 0.0;
  double throughput_bps = 0.0;
  EEBreakdown ee;
};

inline double network_throughput(SchedulerKind scheduler, const FeedbackScheme& scheme, const FadingParams& fading,
                                 const RateTable& rates, const NetworkConfig& cfg, const DelayModel& delay,
                                 RateSource source, McOptions mc = {}) {
  auto cond = make_cond_rate(scheduler, scheme, fading, rates, cfg.subchannels, source, mc);
  return assemble_throughput(cfg.bandwidth_hz, delay, spectral_sum(delay, cond));
}

// Fixed point, contention law and delay model for one scenario, reused
// across schedulers and feedback parameters.
class ScenarioModel {
 public:
  explicit ScenarioModel(NetworkConfig cfg, ModelOptions opt = {}) : cfg_(std::move(cfg)), opt_(opt) {
    cfg_.validate();
    fp_ = solve_fixed_point(cfg_.mac);
    pmf_ = contention_pmf(cfg_.mac, fp_, opt_.mode, opt_.contention);
    delay_ = build_delay_model(cfg_.mac, fp_, pmf_);
  }

  const NetworkConfig& config() const { return cfg_; }
  const ModelOptions& options() const { return opt_; }
  const FixedPointSolution& fixed_point() const { return fp_; }
  const ContentionPmf& pmf() const { return pmf_; }
  const DelayModel& delay() const { return delay_; }
  double occupancy() const { return wifi_occupancy_ratio(cfg_.mac, fp_); }

  double spectral(SchedulerKind sched, const FeedbackScheme& scheme) const {
    auto cond = make_cond_rate(sched, scheme, cfg_.fading, cfg_.rates, cfg_.subchannels, opt_.source, opt_.mc);
    return spectral_sum(delay_, cond, opt_.support_epsilon);
  }

  Evaluation evaluate(SchedulerKind sched, const FeedbackScheme& scheme) const {
    Evaluation e;
    e.spectral = spectral(sched, scheme);
    e.throughput_bps = assemble_throughput(cfg_.bandwidth_hz, delay_, e.spectral);
    e.ee = energy_efficiency(sched, scheme, cfg_.fading, cfg_.power, cfg_.subchannels, cfg_.bandwidth_hz, delay_,
                             e.spectral, opt_.include_reservation_energy);
    return e;
  }
  Evaluation evaluate() const { return evaluate(cfg_.scheduler, cfg_.scheme); }

  // Same delays and collisions, but the delayed gain equals the estimate.
  double perfect_csi_throughput(SchedulerKind sched, const FeedbackScheme& scheme) const {
    const double e = cond_rate_mc(sched, scheme, cfg_.fading, cfg_.rates, cfg_.subchannels, 1.0, opt_.mc.samples,
                                  opt_.mc.seed).rate_bps_per_hz;
    double spectral = 0.0;
    for (int a = 1; a <= delay_.burst_subframes; ++a) spectral += (1.0 - delay_.collision(a)) * e;
    return assemble_throughput(cfg_.bandwidth_hz, delay_, spectral);
  }

 private:
  NetworkConfig cfg_;
  ModelOptions opt_;
  FixedPointSolution fp_;
  ContentionPmf pmf_;
  DelayModel delay_;
};

}  // namespace lteu
