#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mac.hpp"
#include "model.hpp"
#include "numeric.hpp"

namespace lteu {

struct OptimizerConfig {
  double tolerance = 1e-3;
  double lambda_max_db = 20.0;
  int restarts = 3;
  double grid_step_db = 0.2;
  double fd_step_db = 0.1;
  int z_max = 1024;
  int max_iterations = 200;
  std::uint64_t seed = 0;
  double memo_quantum_db = 0.01;

  void validate() const {
    require(tolerance > 0.0, "optimizer.tolerance must be positive");
    require(lambda_max_db > 0.0, "optimizer.lambda_max_db must be positive");
    require(restarts >= 1, "optimizer.restarts must be >= 1");
    require(grid_step_db > 0.0, "optimizer.grid_step_db must be positive");
    require(fd_step_db > 0.0, "optimizer.fd_step_db must be positive");
    require(max_iterations >= 1, "optimizer.max_iterations must be >= 1");
  }
};

struct TracePoint {
  int iteration = 0;
  double x = 0.0;  // λ in dB or m
  double kappa = 0.0;
};

struct OptResult {
  double lambda_star_db = std::numeric_limits<double>::quiet_NaN();
  int m_star = 0;
  int z_star = 0;
  double kappa_star = 0.0;
  double occupancy = std::numeric_limits<double>::quiet_NaN();
  bool constraint_ok = true;
  std::vector<TracePoint> trace;
};

using ThresholdObjective = std::function<double(double)>;  // λ in dB
using BestMObjective = std::function<double(int)>;

inline int solve_z(const MacParams& mp, double d_th, int z_max = 1024) { return min_cw(mp, d_th, z_max); }

// Restart j start point on [0, λ_max]; the sequence is fixed, so fewer restarts use a prefix.
inline double restart_start(int j, std::uint64_t seed, double lambda_max) {
  const double phi = 0.6180339887498949;
  const double shift = static_cast<double>(seed % 1000003) * phi;
  double u = 0.5 + shift + j * phi;
  u -= std::floor(u);
  return u * lambda_max;
}

namespace detail {

class MemoObjective {
 public:
  MemoObjective(const ThresholdObjective& f, double quantum, double hi) : f_(f), q_(quantum), hi_(hi) {}
  double operator()(double x) {
    x = std::clamp(x, 0.0, hi_);
    const auto key = static_cast<std::int64_t>(std::llround(x / q_));
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double at = std::min(hi_, key * q_);
    double v;
    try {
      v = f_(at);
    } catch (const std::exception& e) {
      throw ModelError("objective failed at lambda = " + std::to_string(at) + " dB: " + e.what());
    }
    memo_.emplace(key, v);
    return v;
  }
  double snap(double x) const { return std::min(hi_, std::llround(std::clamp(x, 0.0, hi_) / q_) * q_); }

 private:
  const ThresholdObjective& f_;
  double q_, hi_;
  std::map<std::int64_t, double> memo_;
};

}  // namespace detail

inline OptResult threshold_search(const ThresholdObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  const double hi = cfg.lambda_max_db;
  detail::MemoObjective f(objective, cfg.memo_quantum_db, hi);
  OptResult best;
  best.kappa_star = -std::numeric_limits<double>::infinity();
  int step = 0;
  for (int j = 0; j < cfg.restarts; ++j) {
    double x = f.snap(restart_start(j, cfg.seed, hi));
    double fx = f(x);
    best.trace.push_back({step++, x, fx});
    for (int it = 0; it < cfg.max_iterations; ++it) {
      const double lo_x = std::max(0.0, x - cfg.fd_step_db), hi_x = std::min(hi, x + cfg.fd_step_db);
      const double g = (f(hi_x) - f(lo_x)) / (hi_x - lo_x);
      if (std::fabs(g) <= cfg.tolerance) break;
      const double vmax = g > 0.0 ? (hi - x) / g : x / -g;
      if (vmax * std::fabs(g) < cfg.memo_quantum_db) break;
      const double v = golden_max([&](double u) { return f(x + u * g); }, 0.0, vmax,
                                  1e-4 * hi / std::fabs(g));
      const double xn = f.snap(x + v * g);
      const double fn = f(xn);
      if (!(fn > fx)) break;
      x = xn;
      fx = fn;
      best.trace.push_back({step++, x, fx});
    }
    if (fx > best.kappa_star || (fx == best.kappa_star && x < best.lambda_star_db)) {
      best.kappa_star = fx;
      best.lambda_star_db = x;
    }
  }
  return best;
}

inline OptResult exhaustive_lambda(const ThresholdObjective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  OptResult r;
  r.kappa_star = -std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::floor(cfg.lambda_max_db / cfg.grid_step_db + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double x = i * cfg.grid_step_db;
    const double v = objective(x);
    r.trace.push_back({i, x, v});
    if (v > r.kappa_star) {
      r.kappa_star = v;
      r.lambda_star_db = x;
    }
  }
  return r;
}

inline OptResult best_m_search(const BestMObjective& objective, int s) {
  require(s >= 1, "best_m_search: S must be >= 1");
  OptResult r;
  r.kappa_star = -std::numeric_limits<double>::infinity();
  for (int m = 1; m <= s; ++m) {
    const double v = objective(m);
    r.trace.push_back({m - 1, static_cast<double>(m), v});
    if (v > r.kappa_star) {
      r.kappa_star = v;
      r.m_star = m;
    }
  }
  return r;
}

namespace detail {

inline ScenarioModel model_at_z(NetworkConfig cfg, double d_th, const OptimizerConfig& oc, const ModelOptions& mo,
                                OptResult& r) {
  r.z_star = solve_z(cfg.mac, d_th, oc.z_max);
  cfg.mac.lteu_cw = r.z_star;
  ScenarioModel model(std::move(cfg), mo);
  r.occupancy = model.occupancy();
  r.constraint_ok = r.occupancy >= d_th;
  return model;
}

inline void rescale(OptResult& r, double factor) {
  r.kappa_star *= factor;
  for (auto& t : r.trace) t.kappa *= factor;
}

}  // namespace detail

// Objectives are evaluated in Mbit/J so the gradient tolerance has a fixed
// scale; results are reported in bit/J.
inline OptResult optimize_th(const NetworkConfig& cfg, double d_th, const OptimizerConfig& oc = {},
                             const ModelOptions& mo = {}, bool exhaustive = false) {
  OptResult zr;
  ScenarioModel model = detail::model_at_z(cfg, d_th, oc, mo, zr);
  ThresholdObjective obj = [&](double db) {
    return model.evaluate(cfg.scheduler, FeedbackScheme::threshold_db(db)).ee.kappa * 1e-6;
  };
  OptResult r = exhaustive ? exhaustive_lambda(obj, oc) : threshold_search(obj, oc);
  detail::rescale(r, 1e6);
  r.z_star = zr.z_star;
  r.occupancy = zr.occupancy;
  r.constraint_ok = zr.constraint_ok;
  return r;
}

inline OptResult optimize_bm(const NetworkConfig& cfg, double d_th, const OptimizerConfig& oc = {},
                             const ModelOptions& mo = {}) {
  OptResult zr;
  ScenarioModel model = detail::model_at_z(cfg, d_th, oc, mo, zr);
  OptResult r = best_m_search(
      [&](int m) { return model.evaluate(cfg.scheduler, FeedbackScheme::best_m(m)).ee.kappa; }, cfg.subchannels);
  r.z_star = zr.z_star;
  r.occupancy = zr.occupancy;
  r.constraint_ok = zr.constraint_ok;
  return r;
}

}  // namespace lteu
