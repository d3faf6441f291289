#include <catch_amalgamated.hpp>

#include <cmath>

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include <lteu/model.hpp>
#include <lteu/throughput.hpp>

using namespace lteu;
using Catch::Approx;

namespace {
FadingParams fading(double mu = 1.0, int k = 10) {
  FadingParams f;
  f.mean_gain_db = 7.78;
  f.niid_ratio = mu;
  f.user_count = k;
  f.doppler_hz = doppler_from_speed(3.0, 5.75e9);
  return f;
}
const double kOmega = 5.997910762555095;
const double kLambda02 = 9.653264976652695;  // e^{−λ/Ω} = 0.2

// Q1(a, b) through the noncentral chi-square survival function.
double tail_marcum(double x, double lo, double om, double rho) {
  const double s = om * (1.0 - rho);
  boost::math::non_central_chi_squared d(2.0, 2.0 * rho * x / s);
  return std::exp(-x / om) / om * boost::math::cdf(boost::math::complement(d, 2.0 * lo / s));
}
}  // namespace

TEST_CASE("inner tail integral matches Marcum Q", "[throughput]") {
  for (double rho : {0.1, 0.5, 0.88, 0.98})
    for (double x : {0.2, 3.0, 12.0, 40.0})
      for (double lo : {0.28, 5.0, 30.0})
        CHECK(detail::tail_in_y(x, lo, kOmega, rho).value ==
              Approx(tail_marcum(x, lo, kOmega, rho)).margin(detail::kInnerTol));
}

// Reference values from an independent scipy evaluation (quad over x of the
// noncentral chi-square survival function).
TEST_CASE("random scheduler closed forms against frozen values", "[throughput]") {
  const RateTable t = default_rate_table();
  CHECK(cond_rate_random_th_iid(fading(), t, kLambda02, 0.5).rate_bps_per_hz ==
        Approx(0.747554579215).epsilon(1e-6));
  CHECK(cond_rate_random_th_iid(fading(), t, 0.0, 0.5).rate_bps_per_hz == Approx(0.593059762956).epsilon(1e-6));
  CHECK(cond_rate_random_bm_iid(fading(), t, 5, 20, 0.5).rate_bps_per_hz == Approx(0.778539255696).epsilon(1e-6));
  CHECK(cond_rate_random_bm_iid(fading(), t, 20, 20, 0.5).rate_bps_per_hz == Approx(0.593059762956).epsilon(1e-6));
}

TEST_CASE("degenerate limits of the closed forms", "[throughput]") {
  const RateTable t = default_rate_table();
  CHECK(cond_rate_random_th_iid(fading(), t, 1e4, 0.5).rate_bps_per_hz == Approx(0.0).margin(1e-12));
  CHECK(cond_rate_random_th_iid(fading(), t, INFINITY, 0.5).rate_bps_per_hz == 0.0);
  const double th0 = cond_rate_random_th_iid(fading(1.0, 1), t, 0.0, 0.7).rate_bps_per_hz;
  CHECK(cond_rate_random_bm_iid(fading(1.0, 1), t, 20, 20, 0.7).rate_bps_per_hz == Approx(th0).epsilon(1e-9));
  CHECK_THROWS(cond_rate_random_th_iid(fading(), t, 1.0, 0.999));
  CHECK_THROWS(cond_rate_random_bm_iid(fading(), t, 0, 20, 0.5));
  CHECK_THROWS(cond_rate_random_bm_iid(fading(), t, 21, 20, 0.5));
}

TEST_CASE("non-i.i.d. forms reduce to the i.i.d. ones", "[throughput]") {
  const RateTable t = default_rate_table();
  for (double rho : {0.2, 0.8}) {
    CHECK(cond_rate_random_th_niid(fading(), t, kLambda02, rho).rate_bps_per_hz ==
          Approx(cond_rate_random_th_iid(fading(), t, kLambda02, rho).rate_bps_per_hz).epsilon(1e-6));
    CHECK(cond_rate_random_bm_niid(fading(), t, 5, 20, rho).rate_bps_per_hz ==
          Approx(cond_rate_random_bm_iid(fading(), t, 5, 20, rho).rate_bps_per_hz).epsilon(1e-6));
  }
  CHECK_THROWS(cond_rate_random_th_niid(fading(1.1, 21), t, 1.0, 0.5));
}

TEST_CASE("selection weights match subset enumeration", "[throughput]") {
  const std::vector<double> p = {0.1, 0.35, 0.6, 0.8, 0.05};
  const int k = static_cast<int>(p.size());
  for (int self = 0; self < k; ++self) {
    double brute = 0.0;
    for (int mask = 0; mask < (1 << k); ++mask) {
      if (!(mask & (1 << self))) continue;
      double pr = 1.0;
      int size = 0;
      for (int j = 0; j < k; ++j) {
        if (j == self) continue;
        pr *= (mask & (1 << j)) ? p[j] : 1.0 - p[j];
      }
      for (int j = 0; j < k; ++j) size += (mask >> j) & 1;
      brute += pr / size;
    }
    CHECK(detail::inverse_share(p, self) == Approx(brute).epsilon(1e-14));
  }
  for (double q : {0.0, 0.2, 0.9, 1.0}) {
    const std::vector<double> same(7, q);
    CHECK(detail::selection_weight_iid(7, q) == Approx(7.0 * detail::inverse_share(same, 0)).epsilon(1e-13));
  }
}

TEST_CASE("Monte Carlo agrees with the closed forms", "[throughput]") {
  const RateTable t = default_rate_table();
  const double rho5 = correlation_coeff(5e-3, fading().doppler_hz);
  auto agree = [](double analytic, const McResult& mc) {
    CHECK(mc.rate_bps_per_hz == Approx(analytic).epsilon(0.02));
    CHECK(std::fabs(mc.rate_bps_per_hz - analytic) < 5.0 * mc.std_error + 1e-3);
  };
  agree(cond_rate_random_th_iid(fading(), t, kLambda02, rho5).rate_bps_per_hz,
        cond_rate_mc(SchedulerKind::random, FeedbackScheme::threshold(kLambda02), fading(), t, 20, rho5, 1000000, 3));
  agree(cond_rate_random_th_iid(fading(), t, 0.0, 0.5).rate_bps_per_hz,
        cond_rate_mc(SchedulerKind::random, FeedbackScheme::threshold(0.0), fading(), t, 20, 0.5, 1000000, 4));
  agree(cond_rate_random_bm_iid(fading(), t, 5, 20, 0.5).rate_bps_per_hz,
        cond_rate_mc(SchedulerKind::random, FeedbackScheme::best_m(5), fading(), t, 20, 0.5, 400000, 5));
  const double lam11 = db_to_linear(11.0);
  agree(cond_rate_random_th_niid(fading(1.1), t, lam11, 0.5).rate_bps_per_hz,
        cond_rate_mc(SchedulerKind::random, FeedbackScheme::threshold(lam11), fading(1.1), t, 20, 0.5, 1000000, 6));
  agree(cond_rate_random_bm_niid(fading(1.1), t, 5, 20, 0.5).rate_bps_per_hz,
        cond_rate_mc(SchedulerKind::random, FeedbackScheme::best_m(5), fading(1.1), t, 20, 0.5, 400000, 7));
  agree(cond_rate_random_th_niid(fading(1.0, 1), t, lam11, 0.5).rate_bps_per_hz,
        cond_rate_mc(SchedulerKind::random, FeedbackScheme::threshold(lam11), fading(1.0, 1), t, 20, 0.5, 400000, 8));
}

TEST_CASE("scheduler equivalences in Monte Carlo", "[throughput]") {
  const RateTable t = default_rate_table();
  const auto s = FeedbackScheme::threshold(kLambda02);
  const auto g = cond_rate_mc(SchedulerKind::greedy, s, fading(), t, 20, 0.6, 200000, 9);
  const auto pf = cond_rate_mc(SchedulerKind::proportional_fair, s, fading(), t, 20, 0.6, 200000, 9);
  CHECK(std::fabs(g.rate_bps_per_hz - pf.rate_bps_per_hz) <= std::hypot(g.std_error, pf.std_error));
  const auto one = fading(1.0, 1);
  const double base = cond_rate_mc(SchedulerKind::greedy, s, one, t, 20, 0.6, 50000, 2).rate_bps_per_hz;
  for (auto k : {SchedulerKind::random, SchedulerKind::round_robin, SchedulerKind::proportional_fair})
    CHECK(cond_rate_mc(k, s, one, t, 20, 0.6, 50000, 2).rate_bps_per_hz == base);
  CHECK_THROWS(cond_rate_mc(SchedulerKind::greedy, s, fading(), t, 20, 0.6, 9999, 1));
}

TEST_CASE("conditional rate decreases with delay and is bounded", "[throughput]") {
  const RateTable t = default_rate_table();
  const FadingParams f = fading();
  double prev = 1e9;
  for (int a = 5; a <= 12; ++a) {
    const double rho = correlation_coeff(a * 1e-3, f.doppler_hz);
    const double v = cond_rate_random_th_iid(f, t, kLambda02, rho).rate_bps_per_hz;
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    CHECK(v <= t.max_rate());
    prev = v;
  }
}

TEST_CASE("throughput assembly", "[throughput]") {
  NetworkConfig cfg = paper_defaults();
  cfg.mac.wifi_stations = 0;
  cfg.mac.lteu_cw = 64;
  const auto fp = solve_fixed_point(cfg.mac);
  const auto d = build_delay_model(cfg.mac, fp, contention_pmf(cfg.mac, fp));
  CHECK(spectral_sum(d, [](double) { return 0.0; }) == 0.0);
  CondRateFn f = [](double tau) { return 1.0 / (1.0 + 100.0 * tau); };
  const double hand = 1e-3 * 20e6 * (f(5e-3) + f(6e-3) + f(7e-3)) / 8e-3;
  CHECK(assemble_throughput(20e6, d, spectral_sum(d, f)) == Approx(hand).epsilon(1e-9));
  CHECK_THROWS_AS(network_throughput(SchedulerKind::greedy, cfg.scheme, cfg.fading, cfg.rates, cfg, d,
                                     RateSource::analytic),
                  std::invalid_argument);
  const double an = network_throughput(SchedulerKind::random, cfg.scheme, cfg.fading, cfg.rates, cfg, d,
                                       RateSource::analytic);
  const double hand2 = 1e-3 * 20e6 / 8e-3 *
                       (cond_rate_random_th_iid(cfg.fading, cfg.rates, cfg.scheme.lambda,
                                                correlation_coeff(5e-3, cfg.fading.doppler_hz)).rate_bps_per_hz +
                        cond_rate_random_th_iid(cfg.fading, cfg.rates, cfg.scheme.lambda,
                                                correlation_coeff(6e-3, cfg.fading.doppler_hz)).rate_bps_per_hz +
                        cond_rate_random_th_iid(cfg.fading, cfg.rates, cfg.scheme.lambda,
                                                correlation_coeff(7e-3, cfg.fading.doppler_hz)).rate_bps_per_hz);
  CHECK(an == Approx(hand2).epsilon(1e-9));
}

TEST_CASE("normalized decrease", "[throughput]") {
  CHECK(normalized_decrease(3.0, 3.0) == 0.0);
  CHECK(normalized_decrease(0.0, 3.0) == 1.0);
  CHECK_THROWS(normalized_decrease(1.0, 0.0));
}

TEST_CASE("larger report rate helps greedy throughput", "[throughput]") {
  NetworkConfig cfg = paper_defaults();
  cfg.mac.wifi_stations = 2;
  ModelOptions mo;
  mo.mc.samples = 100000;
  ScenarioModel m(cfg, mo);
  const double lo = m.evaluate(SchedulerKind::greedy, threshold_for_report_rate(cfg.fading, 0.2)).throughput_bps;
  const double hi = m.evaluate(SchedulerKind::greedy, threshold_for_report_rate(cfg.fading, 0.9)).throughput_bps;
  CHECK(hi > lo);
  const double perfect = m.perfect_csi_throughput(SchedulerKind::greedy, threshold_for_report_rate(cfg.fading, 0.9));
  CHECK(perfect > hi);
  const double nor = normalized_decrease(hi, perfect);
  CHECK(nor > 0.0);
  CHECK(nor < 1.0);
}
