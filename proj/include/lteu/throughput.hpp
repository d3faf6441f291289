#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "contention.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "ratechan.hpp"

namespace lteu {

enum class SchedulerKind { round_robin, greedy, proportional_fair, random };

inline const char* to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::round_robin: return "round_robin";
    case SchedulerKind::greedy: return "greedy";
    case SchedulerKind::proportional_fair: return "proportional_fair";
    case SchedulerKind::random: return "random";
  }
  return "?";
}

inline SchedulerKind parse_scheduler(const std::string& s) {
  if (s == "round_robin" || s == "rr") return SchedulerKind::round_robin;
  if (s == "greedy") return SchedulerKind::greedy;
  if (s == "proportional_fair" || s == "pf") return SchedulerKind::proportional_fair;
  if (s == "random") return SchedulerKind::random;
  throw std::invalid_argument("unknown scheduler '" + s + "'");
}

struct FeedbackScheme {
  enum class Kind { threshold, best_m };
  Kind kind = Kind::threshold;
  double lambda = 0.0;  // linear gain
  int m = 1;

  static FeedbackScheme threshold(double lambda_linear) { return {Kind::threshold, lambda_linear, 0}; }
  static FeedbackScheme threshold_db(double db) { return threshold(db_to_linear(db)); }
  static FeedbackScheme best_m(int m) { return {Kind::best_m, 0.0, m}; }
  bool is_threshold() const { return kind == Kind::threshold; }

  void validate(int subchannels) const {
    if (is_threshold()) require(lambda >= 0.0, "feedback threshold must be >= 0");
    else require(m >= 1 && m <= subchannels, "best-m requires 1 <= m <= S");
  }
};

struct CondRateResult {
  double rate_bps_per_hz = 0.0;
  double quadrature_error_estimate = 0.0;
};

namespace detail {

inline constexpr double kInnerTol = 1e-9;
inline constexpr double kOuterTol = 1e-8;

inline void check_rho(double rho) {
  require(rho >= 0.0 && rho < 0.999, "analytic conditional rate needs 0 <= rho < 0.999");
}

// ∫_{lo}^{∞} f(x, y) dy with y = lo − Ω ln u.
inline Quadrature tail_in_y(double x, double lo, double mean, double rho) {
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double y = lo - mean * std::log(u);
    return joint_gain_pdf(x, y, mean, rho) * mean / u;
  };
  return integrate(g, 0.0, 1.0, kInnerTol);
}

// Σ_n r_n ∫_{max(L_n, floor)}^{L_{n+1}} w(x) ∫_{L_n}^∞ f dy dx
template <class W>
Quadrature rate_integral(double mean, const RateTable& rates, double rho, double floor, W&& weight) {
  Quadrature total;
  const int n_rates = rates.size();
  for (int n = std::max(1, rates.region(floor)); n <= n_rates; ++n) {
    const double ln = rates.threshold(n);
    const double a = std::max(ln, floor);
    const double b = rates.threshold(n + 1);
    if (!(b > a)) continue;
    double inner_err = 0.0;
    auto h = [&](double x) {
      Quadrature q = tail_in_y(x, ln, mean, rho);
      inner_err = std::max(inner_err, q.error);
      return weight(x) * q.value;
    };
    Quadrature q;
    if (std::isinf(b)) {
      auto hv = [&](double v) {
        if (v <= 0.0) return 0.0;
        return h(a - mean * std::log(v)) * mean / v;
      };
      q = integrate(hv, 0.0, 1.0, kOuterTol);
    } else {
      q = integrate(h, a, b, kOuterTol);
    }
    total.value += rates.rate(n) * q.value;
    total.error += rates.rate(n) * (q.error + inner_err * (std::isinf(b) ? 1.0 : b - a));
  }
  return total;
}

inline double best_m_weight(double x, double mean, int m, int s) {
  const double p = std::exp(-x / mean);
  double w = 0.0;
  for (int n = 0; n < m; ++n) w += binomial_pmf(s - 1, n, p);
  return std::min(w, 1.0);
}

// Σ_{δ=1}^{K} C(K,δ) p^{δ−1} (1−p)^{K−δ} = E[K/(1+Binomial(K−1,p))]
inline double selection_weight_iid(int k, double p) {
  double w = 0.0;
  for (int d = 1; d <= k; ++d) {
    double t;
    if (p <= 0.0) t = d == 1 ? k : 0.0;
    else if (p >= 1.0) t = d == k ? 1.0 : 0.0;
    else t = std::exp(log_binomial(k, d) + (d - 1) * std::log(p) + (k - d) * std::log1p(-p));
    if (t < 1e-300) continue;
    w += t;
  }
  return w;
}

// E[1/(1+J)] for J the number of reporters among users other than `self`.
inline double inverse_share(const std::vector<double>& p, int self) {
  std::vector<double> dist(1, 1.0);
  for (int j = 0; j < static_cast<int>(p.size()); ++j) {
    if (j == self) continue;
    std::vector<double> nd(dist.size() + 1, 0.0);
    for (std::size_t c = 0; c < dist.size(); ++c) {
      nd[c] += dist[c] * (1.0 - p[j]);
      nd[c + 1] += dist[c] * p[j];
    }
    dist.swap(nd);
  }
  double e = 0.0;
  for (std::size_t c = 0; c < dist.size(); ++c) e += dist[c] / (c + 1.0);
  return e;
}

}  // namespace detail

inline CondRateResult cond_rate_random_th_iid(const FadingParams& fading, const RateTable& rates,
                                              double lambda, double rho) {
  fading.validate();
  detail::check_rho(rho);
  require(lambda >= 0.0, "threshold must be >= 0");
  const double mean = fading.mean_gain_linear();
  const double q = std::exp(-lambda / mean);
  const double w = detail::selection_weight_iid(fading.user_count, q);
  if (std::isinf(lambda)) return {};
  const Quadrature in = detail::rate_integral(mean, rates, rho, lambda, [](double) { return 1.0; });
  return {w * in.value, w * in.error};
}

inline CondRateResult cond_rate_random_bm_iid(const FadingParams& fading, const RateTable& rates, int m,
                                              int s, double rho) {
  fading.validate();
  detail::check_rho(rho);
  require(s >= 1 && m >= 1 && m <= s, "best-m requires 1 <= m <= S");
  const double mean = fading.mean_gain_linear();
  const double w = detail::selection_weight_iid(fading.user_count, static_cast<double>(m) / s);
  const Quadrature in = detail::rate_integral(
      mean, rates, rho, 0.0, [&](double x) { return detail::best_m_weight(x, mean, m, s); });
  return {w * in.value, w * in.error};
}

inline CondRateResult cond_rate_random_th_niid(const FadingParams& fading, const RateTable& rates,
                                               double lambda, double rho) {
  fading.validate();
  detail::check_rho(rho);
  require(lambda >= 0.0, "threshold must be >= 0");
  require(fading.user_count <= 20, "non-i.i.d. threshold analysis limited to K <= 20");
  if (std::isinf(lambda)) return {};
  const auto means = fading.user_means();
  std::vector<double> q(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) q[k] = std::exp(-lambda / means[k]);
  CondRateResult out;
  std::map<double, Quadrature> cache;
  for (int k = 0; k < fading.user_count; ++k) {
    auto it = cache.find(means[k]);
    if (it == cache.end())
      it = cache.emplace(means[k], detail::rate_integral(means[k], rates, rho, lambda,
                                                         [](double) { return 1.0; })).first;
    const double w = detail::inverse_share(q, k);
    out.rate_bps_per_hz += w * it->second.value;
    out.quadrature_error_estimate += w * it->second.error;
  }
  return out;
}

inline CondRateResult cond_rate_random_bm_niid(const FadingParams& fading, const RateTable& rates, int m,
                                               int s, double rho) {
  fading.validate();
  detail::check_rho(rho);
  require(s >= 1 && m >= 1 && m <= s, "best-m requires 1 <= m <= S");
  require(fading.user_count <= 20, "non-i.i.d. best-m analysis limited to K <= 20");
  const auto means = fading.user_means();
  const std::vector<double> p(means.size(), static_cast<double>(m) / s);
  CondRateResult out;
  std::map<double, Quadrature> cache;
  for (int k = 0; k < fading.user_count; ++k) {
    auto it = cache.find(means[k]);
    if (it == cache.end()) {
      const double mk = means[k];
      it = cache.emplace(mk, detail::rate_integral(mk, rates, rho, 0.0, [&](double x) {
             return detail::best_m_weight(x, mk, m, s);
           })).first;
    }
    const double w = detail::inverse_share(p, k);
    out.rate_bps_per_hz += w * it->second.value;
    out.quadrature_error_estimate += w * it->second.error;
  }
  return out;
}

// Random scheduler, dispatching on scheme and on whether users are i.i.d.
inline CondRateResult cond_rate_analytic(const FeedbackScheme& scheme, const FadingParams& fading,
                                         const RateTable& rates, int s, double rho) {
  scheme.validate(s);
  if (scheme.is_threshold())
    return fading.iid() ? cond_rate_random_th_iid(fading, rates, scheme.lambda, rho)
                        : cond_rate_random_th_niid(fading, rates, scheme.lambda, rho);
  return fading.iid() ? cond_rate_random_bm_iid(fading, rates, scheme.m, s, rho)
                      : cond_rate_random_bm_niid(fading, rates, scheme.m, s, rho);
}

struct McResult {
  double rate_bps_per_hz = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Monte Carlo estimate of E(η|ρ) for one tagged subchannel. Every sample
// consumes the same number of variates, so estimates at different scheme
// parameters with one seed use common random numbers.
inline McResult cond_rate_mc(SchedulerKind scheduler, const FeedbackScheme& scheme, const FadingParams& fading,
                             const RateTable& rates, int s, double rho, std::int64_t samples,
                             std::uint64_t seed = 1) {
  fading.validate();
  scheme.validate(s);
  require(samples >= 10000, "cond_rate_mc needs at least 1e4 samples");
  require(rho >= 0.0 && rho <= 1.0, "cond_rate_mc: rho must lie in [0, 1]");
  const int users = fading.user_count;
  const auto means = fading.user_means();
  const double base = fading.mean_gain_linear();
  const double amp = std::sqrt(rho);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto unif = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  auto expo = [&unif] { return -std::log(unif()); };
  std::vector<double> g(users);
  std::vector<char> rep(users);
  std::vector<int> reporters;
  reporters.reserve(users);
  RunningStat stat;
  for (std::int64_t i = 0; i < samples; ++i) {
    reporters.clear();
    for (int k = 0; k < users; ++k) {
      g[k] = means[k] * expo();
      bool r;
      if (scheme.is_threshold()) {
        r = scheduler == SchedulerKind::proportional_fair ? g[k] / means[k] >= scheme.lambda / base
                                                          : g[k] >= scheme.lambda;
      } else {
        // another subchannel beats g[k] with probability exp(−g[k]/Ω_k)
        const double beat = std::exp(-g[k] / means[k]);
        int above = 0;
        for (int j = 1; j < s; ++j) above += unif() < beat;
        r = above <= scheme.m - 1;
      }
      rep[k] = r;
      if (r) reporters.push_back(k);
    }
    const double pick = unif();
    const double n1 = normal(rng), n2 = normal(rng);
    int sel = -1;
    switch (scheduler) {
      case SchedulerKind::greedy:
        for (int k : reporters)
          if (sel < 0 || g[k] > g[sel]) sel = k;
        break;
      case SchedulerKind::proportional_fair:
        for (int k : reporters)
          if (sel < 0 || g[k] / means[k] > g[sel] / means[sel]) sel = k;
        break;
      case SchedulerKind::random:
        if (!reporters.empty())
          sel = reporters[std::min<std::size_t>(reporters.size() - 1,
                                                static_cast<std::size_t>(pick * reporters.size()))];
        break;
      case SchedulerKind::round_robin: {
        const int k = static_cast<int>(i % users);
        if (rep[k]) sel = k;
        break;
      }
    }
    double r = 0.0;
    if (sel >= 0) {
      const int n = rates.region(g[sel]);
      if (n >= 1) {
        const double sd = std::sqrt((1.0 - rho) * means[sel] / 2.0);
        const double re = amp * std::sqrt(g[sel]) + sd * n1;
        const double im = sd * n2;
        if (re * re + im * im >= rates.threshold(n)) r = rates.rate(n);
      }
    }
    stat.add(r);
  }
  return {stat.mean, stat.std_error(), stat.n};
}

// τ in seconds -> E(η|τ)
using CondRateFn = std::function<double(double)>;

enum class RateSource { analytic, mc };

struct McOptions {
  std::int64_t samples = 200000;
  std::uint64_t seed = 1;
};

inline CondRateFn make_cond_rate(SchedulerKind scheduler, const FeedbackScheme& scheme, const FadingParams& fading,
                                 const RateTable& rates, int s, RateSource source, McOptions mc = {}) {
  scheme.validate(s);
  if (source == RateSource::analytic) {
    if (scheduler != SchedulerKind::random)
      throw std::invalid_argument(std::string("no closed form for scheduler ") + to_string(scheduler) +
                                  "; use the mc rate source");
    return [=](double tau) {
      return cond_rate_analytic(scheme, fading, rates, s, correlation_coeff(tau, fading.doppler_hz)).rate_bps_per_hz;
    };
  }
  return [=](double tau) {
    const auto key = static_cast<std::uint64_t>(std::llround(tau * 1e6));
    return cond_rate_mc(scheduler, scheme, fading, rates, s, correlation_coeff(tau, fading.doppler_hz), mc.samples,
                        mix_seed(mc.seed, key)).rate_bps_per_hz;
  };
}

// Σ_α p̄_{c,α} Σ_a E(η|τ_α = a T_sb) P{τ_α = a T_sb}
inline double spectral_sum(const DelayModel& delay, const CondRateFn& cond, double eps = 1e-6) {
  std::map<int, double> memo;
  double total = 0.0;
  for (int alpha = 1; alpha <= delay.burst_subframes; ++alpha) {
    const SubframePmf& p = delay.delay_pmf(alpha);
    double inner = 0.0;
    for (int a : significant_support(p, eps)) {
      auto it = memo.find(a);
      if (it == memo.end()) it = memo.emplace(a, cond(a * delay.subframe_us * 1e-6)).first;
      inner += it->second * p.mass[a];
    }
    total += (1.0 - delay.collision(alpha)) * inner;
  }
  return total;
}

inline double bits_per_burst(double bandwidth_hz, const DelayModel& delay, double spectral) {
  return delay.subframe_us * 1e-6 * bandwidth_hz * spectral;
}

inline double assemble_throughput(double bandwidth_hz, const DelayModel& delay, double spectral) {
  return bits_per_burst(bandwidth_hz, delay, spectral) / ((delay.mean_tx_dl_us + delay.mean_tx_ul_us) * 1e-6);
}

inline double normalized_decrease(double value, double baseline) {
  if (!(baseline > 0.0)) throw std::invalid_argument("normalized_decrease: baseline must be positive");
  return (baseline - value) / baseline;
}

}  // namespace lteu
