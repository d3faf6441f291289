#include <catch_amalgamated.hpp>

#include <cmath>

#include <lteu/contention.hpp>
#include <lteu/mac.hpp>

using namespace lteu;
using Catch::Approx;

namespace {
MacParams params(int nw, int z) {
  MacParams m;
  m.wifi_stations = nw;
  m.lteu_cw = z;
  return m;
}

// Damped iteration on τ_w, independent of the bisection in the library.
double tau_by_iteration(const MacParams& m) {
  const double tl = 2.0 / (m.lteu_cw + 1.0);
  double tau = 0.05;
  for (int i = 0; i < 20000; ++i) {
    const double p = 1.0 - std::pow(1.0 - tau, m.wifi_stations - 1) * (1.0 - tl);
    const double bianchi = 2.0 * (1.0 - 2.0 * p) /
                           ((1.0 - 2.0 * p) * (m.wifi_min_cw + 1.0) +
                            p * m.wifi_min_cw * (1.0 - std::pow(2.0 * p, m.wifi_backoff_stages)));
    tau = 0.5 * tau + 0.5 * bianchi;
  }
  return tau;
}
}  // namespace

TEST_CASE("no Wi-Fi stations", "[mac]") {
  const auto fp = solve_fixed_point(params(0, 64));
  CHECK(fp.tau_w == 0.0);
  CHECK(fp.p_l == 0.0);
  CHECK(fp.tau_l == Approx(2.0 / 65.0).epsilon(1e-15));
  CHECK(fp.tau_l == Approx(0.030769).margin(1e-6));
  CHECK(wifi_occupancy_ratio(params(0, 64), fp) == 0.0);
}

TEST_CASE("collision-free limit", "[mac]") {
  const auto fp = solve_fixed_point(params(1, 10000000));
  CHECK(fp.tau_w == Approx(2.0 / 33.0).epsilon(1e-5));
}

TEST_CASE("single station follows the equations literally", "[mac]") {
  const auto fp = solve_fixed_point(params(1, 46));
  CHECK(fp.p_w == Approx(fp.tau_l).epsilon(1e-12));
}

TEST_CASE("fixed point residuals and independent oracle", "[mac]") {
  const MacParams m = params(6, 46);
  const auto fp = solve_fixed_point(m);
  const double tw = wifi_tx_prob(fp.p_w, m.wifi_min_cw, m.wifi_backoff_stages);
  CHECK(std::fabs(fp.tau_w - tw) <= 1e-10);
  CHECK(std::fabs(fp.tau_l - 2.0 / 47.0) <= 1e-15);
  CHECK(std::fabs(fp.p_w - (1.0 - std::pow(1.0 - fp.tau_w, 5) * (1.0 - fp.tau_l))) <= 1e-10);
  CHECK(std::fabs(fp.p_l - (1.0 - std::pow(1.0 - fp.tau_w, 6))) <= 1e-10);
  CHECK(fp.tau_w == Approx(tau_by_iteration(m)).epsilon(1e-9));
  for (double v : {fp.tau_w, fp.tau_l, fp.p_w, fp.p_l, fp.p_t, fp.p_s_w}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("transmit probability is finite at p = 1/2", "[mac]") {
  const double t = wifi_tx_prob(0.5, 32, 5);
  CHECK(t == Approx(2.0 / (33.0 + 16.0 * 5.0)));
}

TEST_CASE("occupancy grows with the LTE-U window", "[mac]") {
  const MacParams m = params(6, 46);
  CHECK(occupancy_at(m, 64) > occupancy_at(m, 32));
  for (int nw : {1, 2, 5, 10, 20}) {
    double prev = -1.0;
    for (int z : {1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 46, 64, 96, 128, 192, 256, 384, 512, 768, 1024}) {
      const double t = occupancy_at(params(nw, z), z);
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("contention means match the lattice pmf", "[mac]") {
  for (int nw : {0, 2, 6, 10})
    for (int z : {1, 32, 46}) {
      const MacParams m = params(nw, z);
      const auto fp = solve_fixed_point(m);
      const auto means = contention_means(m, fp);
      ContentionOptions o;
      o.epsilon = 0.0;
      const auto p = contention_pmf(m, fp, PmfMode::lattice, o);
      CHECK(means.contention_us == Approx(mean_contention(p)).epsilon(1e-9));
      CHECK(means.reservation_us == Approx(mean_reservation(p, m.subframe_us)).epsilon(1e-9).margin(1e-9));
    }
}

TEST_CASE("slot-based occupancy variant", "[mac]") {
  const MacParams m = params(6, 46);
  const auto fp = solve_fixed_point(m);
  const double s = slot_occupancy_ratio(m, fp);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  CHECK(slot_occupancy_ratio(params(0, 46), solve_fixed_point(params(0, 46))) == 0.0);
}

TEST_CASE("minimum contention window brackets the target", "[mac]") {
  for (int nw : {2, 4, 6, 8, 10}) {
    const MacParams m = params(nw, 1);
    const double d = nw / (10.0 + nw);
    const int z = min_cw(m, d);
    CHECK(occupancy_at(m, z) >= d);
    if (z > 1) CHECK(occupancy_at(m, z - 1) < d);
  }
  CHECK(min_cw(params(6, 1), 0.0) == 1);
  CHECK(min_cw(params(6, 1), 1e-12) == 2);
  CHECK_THROWS_AS(min_cw(params(6, 1), 0.95, 128), ModelError);
  CHECK_THROWS(min_cw(params(0, 1), 0.1));
  CHECK_THROWS(min_cw(params(6, 1), 1.0));
}

TEST_CASE("min_cw above the linear range uses bisection", "[mac]") {
  const MacParams m = params(20, 1);
  const double d = 0.6;
  const int z = min_cw(m, d);
  CHECK(z > 64);
  CHECK(occupancy_at(m, z) >= d);
  CHECK(occupancy_at(m, z - 1) < d);
}

TEST_CASE("invalid parameters are rejected", "[mac]") {
  MacParams m = params(6, 46);
  m.wifi_min_cw = 1;
  CHECK_THROWS(solve_fixed_point(m));
  m = params(6, 0);
  CHECK_THROWS(solve_fixed_point(m));
  m = params(6, 46);
  m.wifi_success_us = 100.0;
  CHECK_THROWS(solve_fixed_point(m));
}
