#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"

namespace lteu {

inline constexpr double kSpeedOfLight = 2.998e8;

struct FadingParams {
  double mean_gain_db = 7.78;
  double doppler_hz = 0.0;
  double niid_ratio = 1.0;
  int user_count = 10;

  double mean_gain_linear() const { return db_to_linear(mean_gain_db); }
  // k is zero based: Ω_k = Ω·μ^k.
  double user_mean(int k) const { return mean_gain_linear() * std::pow(niid_ratio, k); }
  std::vector<double> user_means() const {
    std::vector<double> out(user_count);
    for (int k = 0; k < user_count; ++k) out[k] = user_mean(k);
    return out;
  }
  bool iid() const { return niid_ratio == 1.0; }

  void validate() const {
    require(std::isfinite(mean_gain_db), "fading.mean_gain_db must be finite");
    require(doppler_hz >= 0.0, "fading.doppler_hz must be >= 0");
    require(niid_ratio > 0.0, "fading.niid_ratio must be > 0");
    require(user_count >= 1, "fading.user_count must be >= 1");
  }
};

inline double doppler_from_speed(double speed_kmh, double carrier_hz) {
  return speed_kmh / 3.6 * carrier_hz / kSpeedOfLight;
}

inline double correlation_coeff(double delay_s, double doppler_hz) {
  require(delay_s >= 0.0 && doppler_hz >= 0.0, "correlation_coeff: negative input");
  const double j = std::cyl_bessel_j(0.0, 2.0 * M_PI * doppler_hz * delay_s);
  return j * j;
}

// Signed amplitude correlation J0(2π φ z) of the complex channel.
inline double amplitude_correlation(double delay_s, double doppler_hz) {
  return std::cyl_bessel_j(0.0, 2.0 * M_PI * doppler_hz * delay_s);
}

inline double joint_gain_pdf(double x, double y, double mean, double rho) {
  require(rho >= 0.0 && rho < 1.0, "joint_gain_pdf: rho must lie in [0, 1)");
  require(mean > 0.0, "joint_gain_pdf: mean must be positive");
  if (x < 0.0 || y < 0.0) return 0.0;
  const double s = mean * (1.0 - rho);
  const double z = 2.0 * std::sqrt(rho * x * y) / s;
  return std::exp(-(x + y) / s + z - std::log(mean * s)) * bessel_i0e(z);
}

struct RateTable {
  std::vector<double> rates;
  double coding_loss = 0.398;
  std::vector<double> thresholds;  // L_0 .. L_{N+1}

  int size() const { return static_cast<int>(rates.size()); }
  // r_0 = 0 for the no-transmission region.
  double rate(int n) const { return n <= 0 ? 0.0 : rates[n - 1]; }
  double threshold(int n) const { return thresholds[n]; }
  double max_rate() const { return rates.empty() ? 0.0 : rates.back(); }

  // n with x in [L_n, L_{n+1}).
  int region(double x) const {
    int lo = 0, hi = size() + 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (x >= thresholds[mid]) lo = mid; else hi = mid;
    }
    return lo;
  }
};

inline RateTable rate_thresholds(const std::vector<double>& rates, double coding_loss) {
  require(coding_loss > 0.0, "rate_thresholds: coding_loss must be positive");
  require(!rates.empty(), "rate_thresholds: empty rate list");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    require(rates[i] > 0.0, "rate_thresholds: rates must be positive");
    require(i == 0 || rates[i] > rates[i - 1], "rate_thresholds: rates must be strictly increasing");
  }
  RateTable t;
  t.rates = rates;
  t.coding_loss = coding_loss;
  t.thresholds.push_back(0.0);
  for (double r : rates) t.thresholds.push_back((std::exp2(r) - 1.0) / coding_loss);
  t.thresholds.push_back(std::numeric_limits<double>::infinity());
  return t;
}

inline const std::vector<double>& cqi_efficiencies() {
  static const std::vector<double> v = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
                                        1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
                                        3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
  return v;
}

inline RateTable default_rate_table(double coding_loss = 0.398) {
  return rate_thresholds(cqi_efficiencies(), coding_loss);
}

inline std::vector<double> parse_rate_list(std::istream& in) {
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    if (!(ls >> v)) {
      std::string rest;
      if (std::istringstream(line) >> rest)
        throw std::invalid_argument("rate table line " + std::to_string(lineno) + ": not a number");
      continue;
    }
    std::string extra;
    if (ls >> extra)
      throw std::invalid_argument("rate table line " + std::to_string(lineno) + ": trailing text");
    out.push_back(v);
  }
  return out;
}

inline RateTable load_rate_table(const std::string& path, double coding_loss) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open rate table " + path);
  return rate_thresholds(parse_rate_list(in), coding_loss);
}

inline double feedback_prob(double threshold, double mean) {
  require(threshold >= 0.0 && mean > 0.0, "feedback_prob: invalid input");
  return std::exp(-threshold / mean);
}

inline double threshold_for_feedback_prob(double p, double mean) {
  require(p > 0.0 && p <= 1.0 && mean > 0.0, "threshold_for_feedback_prob: invalid input");
  return -mean * std::log(p);
}

}  // namespace lteu
