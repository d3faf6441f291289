#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>
#include <lteu/model.hpp>
#include <lteu/simulator.hpp>

#include "stats.hpp"

using namespace lteu;
using Catch::Approx;

namespace {
NetworkConfig scenario(int nw, int z) {
  NetworkConfig cfg = paper_defaults();
  cfg.mac.wifi_stations = nw;
  cfg.mac.lteu_cw = z;
  return cfg;
}
}  // namespace

TEST_CASE("correlated pair: independence and identity", "[simulator]") {
  std::mt19937_64 rng(3);
  const int n = 1000000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = sample_correlated_pair(5.998, 0.0, rng);
    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double r = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  CHECK(std::fabs(r) < 0.01);
  CHECK(sx / n == Approx(5.998).epsilon(0.01));
  for (int i = 0; i < 100; ++i) {
    const auto [a, b] = sample_correlated_pair(2.0, 1.0, rng);
    CHECK(a == b);
  }
  CHECK_THROWS(sample_correlated_pair(1.0, 1.5, rng));
}

TEST_CASE("correlated pair follows the joint gain law", "[simulator]") {
  const double mean = 5.997910762555095, rho = 0.5;
  std::mt19937_64 rng(5);
  // Equiprobable marginal bins; the last one is open ended.
  const int nb = 20;
  std::vector<double> edge(nb + 1);
  for (int i = 0; i < nb; ++i) edge[i] = -mean * std::log(1.0 - static_cast<double>(i) / nb);
  edge[nb] = std::numeric_limits<double>::infinity();
  auto bin = [&](double x) { return std::min(nb - 1, static_cast<int>(std::upper_bound(edge.begin(), edge.end(), x) - edge.begin()) - 1); };
  const int n = 400000;
  std::vector<std::int64_t> counts(nb * nb, 0);
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = sample_correlated_pair(mean, rho, rng);
    ++counts[bin(x) * nb + bin(y)];
  }
  // Cell probabilities from the joint pdf by nested quadrature.
  std::vector<double> prob(nb * nb);
  double total = 0.0;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      auto inner = [&](double x) {
        return integrate([&](double y) { return joint_gain_pdf(x, y, mean, rho); }, edge[j], edge[j + 1], 1e-10).value;
      };
      prob[i * nb + j] = integrate(inner, edge[i], edge[i + 1], 1e-9).value;
      total += prob[i * nb + j];
    }
  CHECK(total == Approx(1.0).margin(1e-3));
  const auto cs = lteu::testing::chi_square(counts, prob);
  INFO("chi2 = " << cs.stat << " dof = " << cs.dof);
  CHECK(cs.p_value > 1e-3);
}

TEST_CASE("degenerate network delivers nothing", "[simulator]") {
  NetworkConfig cfg = scenario(0, 1);
  cfg.rates = rate_thresholds({100.0}, 0.398);
  const SimResult r = run_sim(cfg, 500);
  CHECK(r.throughput_bps == 0.0);
  CHECK(r.kappa_bits_per_j == 0.0);
  for (const auto& h : r.delay_hist) {
    int nonzero = 0;
    for (auto c : h) nonzero += c > 0;
    CHECK(nonzero == 1);
  }
  CHECK(r.collision_first_rate == 0.0);
  CHECK(r.wifi_occupancy == 0.0);
}

TEST_CASE("simulation is deterministic and counters are consistent", "[simulator]") {
  NetworkConfig cfg = scenario(6, 46);
  std::ostringstream t1, t2;
  const SimResult a = run_sim(cfg, 300, &t1);
  const SimResult b = run_sim(cfg, 300, &t2);
  CHECK(t1.str() == t2.str());
  CHECK(a.throughput_bps == b.throughput_bps);
  CHECK(a.kappa_bits_per_j == b.kappa_bits_per_j);
  CHECK(a.slots == b.slots);
  CHECK(a.subframes == a.bursts * cfg.burst_subframes());
  CHECK(a.contentions == 2 * a.bursts);
  for (const auto& h : a.delay_hist) {
    std::int64_t n = 0;
    for (auto c : h) n += c;
    CHECK(n == a.bursts);
  }
  CHECK(a.throughput_se > 0.0);
  CHECK(a.kappa_se > 0.0);
  cfg.rng_seed = 99;
  CHECK(run_sim(cfg, 300).throughput_bps != a.throughput_bps);
}

TEST_CASE("per-burst energy closes", "[simulator]") {
  NetworkConfig cfg = scenario(6, 46);
  std::ostringstream trace;
  const SimResult r = run_sim(cfg, 400, &trace);
  std::istringstream in(trace.str());
  std::string line;
  double sum = 0.0, bits = 0.0;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const double parts = j["e_basic_j"].get<double>() + j["e_ul_j"].get<double>() + j["e_dl_j"].get<double>();
    CHECK(j["joules"].get<double>() == parts);
    CHECK(j["e_basic_j"].get<double>() >= 0.0);
    CHECK(j["e_ul_j"].get<double>() >= 0.0);
    CHECK(j["e_dl_j"].get<double>() >= 0.0);
    CHECK(j["delay_subframes"].size() == 3);
    sum += j["joules"].get<double>();
    bits += j["bits"].get<double>();
    ++n;
  }
  CHECK(n == 400);
  CHECK(sum == Approx(r.energy_total_j).epsilon(1e-12));
  CHECK(r.energy.total_j() * n == Approx(r.energy_total_j).epsilon(1e-12));
  CHECK(bits == Approx(r.total_bits).epsilon(1e-12));
  CHECK(r.kappa_bits_per_j == Approx(bits / sum).epsilon(1e-12));
}

TEST_CASE("simulated occupancy matches the analytic ratio", "[simulator]") {
  for (int nw : {2, 6, 10})
    for (int z : {32, 46, 64}) {
      NetworkConfig cfg = scenario(nw, z);
      // About 10^6 backoff slots.
      const auto fp = solve_fixed_point(cfg.mac);
      const double slots_per_contention = (z + 1) / 2.0;
      const auto bursts = static_cast<std::int64_t>(std::ceil(1.05e6 / (2.0 * slots_per_contention)));
      const SimResult r = run_sim(cfg, bursts);
      const double an = wifi_occupancy_ratio(cfg.mac, fp);
      INFO("N_w = " << nw << " Z = " << z << " sim " << r.wifi_occupancy << " +- " << r.wifi_occupancy_se
                    << " analytic " << an << " slots " << r.slots);
      CHECK(r.slots >= 1000000);
      CHECK(std::fabs(r.wifi_occupancy - an) <= 3.0 * r.wifi_occupancy_se);
    }
}

TEST_CASE("simulated MAC statistics match the fixed point", "[simulator]") {
  NetworkConfig cfg = scenario(6, 46);
  const auto fp = solve_fixed_point(cfg.mac);
  const auto d = build_delay_model(cfg.mac, fp, contention_pmf(cfg.mac, fp));
  const SimResult r = run_sim(cfg, 20000);
  INFO("tau_w sim " << r.wifi_tx_freq << " analytic " << fp.tau_w);
  CHECK(r.wifi_tx_freq == Approx(fp.tau_w).epsilon(0.02));
  CHECK(r.wifi_collision_freq == Approx(fp.p_w).epsilon(0.03));
  INFO("p_c1 sim " << r.collision_first_rate << " +- " << r.collision_first_se << " analytic " << d.collision_first);
  CHECK(std::fabs(r.collision_first_rate - d.collision_first) <= 3.0 * r.collision_first_se);
}

TEST_CASE("simulated feedback delays follow the delay pmf", "[simulator]") {
  NetworkConfig cfg = scenario(6, 46);
  const auto fp = solve_fixed_point(cfg.mac);
  const auto d = build_delay_model(cfg.mac, fp, contention_pmf(cfg.mac, fp));
  const SimResult r = run_sim(cfg, 100000);
  for (int alpha = 1; alpha <= 3; ++alpha) {
    const auto cs = lteu::testing::chi_square(r.delay_hist[alpha - 1], d.delay_pmf(alpha).mass);
    INFO("alpha " << alpha << " chi2 " << cs.stat << " dof " << cs.dof << " p " << cs.p_value);
    CHECK(cs.p_value > 1e-3);
  }
}

TEST_CASE("simulated throughput tracks the analytic model", "[simulator]") {
  NetworkConfig cfg = scenario(6, 64);
  cfg.scheduler = SchedulerKind::random;
  ModelOptions mo;
  mo.source = RateSource::analytic;
  ScenarioModel model(cfg, mo);
  const double an = model.evaluate().throughput_bps;
  const SimResult r = run_sim(cfg, 5000);
  INFO("sim " << r.throughput_bps << " +- " << r.throughput_se << " analytic " << an);
  CHECK(r.throughput_bps == Approx(an).epsilon(0.05));
}
