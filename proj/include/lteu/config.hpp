#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "model.hpp"
#include "network.hpp"
#include "optimize.hpp"

namespace lteu {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SweepSpec {
  std::string kind;  // fixed_point, throughput, ee, optimize, optimize_bm, simulate
  std::vector<int> wifi_stations;
  std::vector<double> report_prob;
  std::vector<double> threshold_db;
  std::vector<int> m;
  std::vector<double> speed_kmh;
  std::vector<double> niid_ratio;
  std::vector<SchedulerKind> schedulers;
  std::vector<int> lteu_cw;
  bool auto_cw = false;  // Z = min_cw(D_th) per point
};

struct RunConfig {
  NetworkConfig net = paper_defaults();
  ModelOptions model;
  OptimizerConfig optimizer;
  std::optional<double> d_th;
  bool exhaustive = false;
  std::int64_t sim_bursts = 5000;
  int sim_warmup = 200;
  double speed_kmh = 3.0;
  double carrier_hz = 5.75e9;
  std::optional<SweepSpec> sweep;

  // D_th defaults to N_w/(K + N_w).
  double occupancy_target() const {
    if (d_th) return *d_th;
    const double nw = net.wifi_stations();
    return nw / (net.users() + nw);
  }
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class Fields {
 public:
  Fields(const boost::property_tree::ptree& root) {
    for (const auto& sec : root) {
      if (sec.second.empty() && !sec.second.data().empty())
        throw ConfigError("config: key '" + sec.first + "' outside any section");
      for (const auto& kv : sec.second) values_[sec.first + "." + kv.first] = trim_copy(kv.second.data());
    }
  }

  bool has(const std::string& k) const { return values_.count(k) > 0; }
  std::string str(const std::string& k) const {
    used_.insert(k);
    return values_.at(k);
  }

  template <class T>
  void get(const std::string& k, T& out) const {
    if (!has(k)) return;
    out = parse<T>(k, str(k));
  }

  template <class T>
  std::vector<T> list(const std::string& k) const {
    std::vector<T> out;
    std::stringstream ss(str(k));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim_copy(item);
      if (!item.empty()) out.push_back(parse<T>(k, item));
    }
    if (out.empty()) throw ConfigError("config: " + k + ": sweep axis is empty");
    return out;
  }

  void check_all_used() const {
    for (const auto& kv : values_)
      if (!used_.count(kv.first)) throw ConfigError("config: unknown key " + kv.first);
  }

  template <class T>
  static T parse(const std::string& k, const std::string& v) {
    try {
      std::size_t pos = 0;
      T out;
      if constexpr (std::is_same_v<T, bool>) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw std::invalid_argument(v);
      } else if constexpr (std::is_same_v<T, std::string>) {
        return v;
      } else if constexpr (std::is_same_v<T, SchedulerKind>) {
        return parse_scheduler(v);
      } else if constexpr (std::is_floating_point_v<T>) {
        out = std::stod(v, &pos);
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        out = std::stoull(v, &pos);
      } else if constexpr (std::is_same_v<T, std::int64_t>) {
        out = std::stoll(v, &pos);
      } else {
        out = std::stoi(v, &pos);
      }
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config: " + k + ": cannot parse '" + v + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

inline PmfMode parse_mode(const std::string& s) {
  if (s == "lattice") return PmfMode::lattice;
  if (s == "mc" || s == "monte_carlo") return PmfMode::monte_carlo;
  throw ConfigError("unknown pmf mode '" + s + "' (lattice|mc)");
}

inline RateSource parse_source(const std::string& s) {
  if (s == "analytic") return RateSource::analytic;
  if (s == "mc") return RateSource::mc;
  throw ConfigError("unknown rate source '" + s + "' (analytic|mc)");
}

}  // namespace detail

using detail::parse_mode;
using detail::parse_source;

inline RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".") {
  boost::property_tree::ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  detail::Fields f(root);
  RunConfig rc;
  NetworkConfig& n = rc.net;

  f.get("network.bandwidth_hz", n.bandwidth_hz);
  f.get("network.subchannels", n.subchannels);
  f.get("network.users", n.fading.user_count);
  f.get("network.subframe_us", n.mac.subframe_us);
  f.get("network.burst_subframes", n.mac.burst_subframes);
  f.get("network.seed", n.rng_seed);

  f.get("mac.wifi_stations", n.mac.wifi_stations);
  f.get("mac.wifi_min_cw", n.mac.wifi_min_cw);
  f.get("mac.wifi_backoff_stages", n.mac.wifi_backoff_stages);
  f.get("mac.lteu_cw", n.mac.lteu_cw);
  f.get("mac.slot_us", n.mac.slot_us);
  f.get("mac.wifi_success_us", n.mac.wifi_success_us);
  f.get("mac.wifi_collision_us", n.mac.wifi_collision_us);
  f.get("mac.difs_us", n.mac.difs_us);

  f.get("fading.mean_gain_db", n.fading.mean_gain_db);
  f.get("fading.niid_ratio", n.fading.niid_ratio);
  f.get("fading.speed_kmh", rc.speed_kmh);
  f.get("fading.carrier_hz", rc.carrier_hz);
  n.fading.doppler_hz = doppler_from_speed(rc.speed_kmh, rc.carrier_hz);
  if (f.has("fading.doppler_hz")) {
    if (f.has("fading.speed_kmh")) throw ConfigError("config: give fading.doppler_hz or fading.speed_kmh, not both");
    f.get("fading.doppler_hz", n.fading.doppler_hz);
  }

  double coding_loss = 0.398;
  f.get("rates.coding_loss", coding_loss);
  if (f.has("rates.file")) {
    std::filesystem::path p = f.str("rates.file");
    if (p.is_relative()) p = base_dir / p;
    n.rates = load_rate_table(p.string(), coding_loss);
  } else {
    n.rates = default_rate_table(coding_loss);
  }

  f.get("power.p_sense_w", n.power.p_sense_w);
  f.get("power.p_reserve_w", n.power.p_reserve_w);
  f.get("power.p_estimate_w", n.power.p_estimate_w);
  f.get("power.p_receive_w", n.power.p_receive_w);
  f.get("power.p_basic_w", n.power.p_basic_w);
  f.get("power.e0_joules", n.power.e0_joules);
  f.get("power.feedback_index_base", n.power.feedback_index_base);

  std::string scheme = "threshold";
  f.get("feedback.scheme", scheme);
  if (scheme == "threshold") {
    if (f.has("feedback.threshold_db") && f.has("feedback.report_prob"))
      throw ConfigError("config: give feedback.threshold_db or feedback.report_prob, not both");
    double rp = 0.2;
    f.get("feedback.report_prob", rp);
    n.scheme = threshold_for_report_rate(n.fading, rp);
    if (f.has("feedback.threshold_db"))
      n.scheme = FeedbackScheme::threshold_db(detail::Fields::parse<double>("feedback.threshold_db",
                                                                            f.str("feedback.threshold_db")));
  } else if (scheme == "best_m") {
    int m = 5;
    f.get("feedback.m", m);
    n.scheme = FeedbackScheme::best_m(m);
  } else {
    throw ConfigError("config: feedback.scheme must be threshold or best_m");
  }
  f.get("scheduler.kind", n.scheduler);

  if (f.has("model.mode")) rc.model.mode = parse_mode(f.str("model.mode"));
  if (f.has("model.source")) rc.model.source = parse_source(f.str("model.source"));
  f.get("model.mc_samples", rc.model.mc.samples);
  f.get("model.grid_us", rc.model.contention.grid_us);
  f.get("model.epsilon", rc.model.contention.epsilon);
  f.get("model.contention_mc_samples", rc.model.contention.mc_samples);
  f.get("model.include_reservation_energy", rc.model.include_reservation_energy);

  OptimizerConfig& o = rc.optimizer;
  f.get("optimizer.tolerance", o.tolerance);
  f.get("optimizer.lambda_max_db", o.lambda_max_db);
  f.get("optimizer.restarts", o.restarts);
  f.get("optimizer.grid_step_db", o.grid_step_db);
  f.get("optimizer.fd_step_db", o.fd_step_db);
  f.get("optimizer.z_max", o.z_max);
  f.get("optimizer.max_iterations", o.max_iterations);
  f.get("optimizer.exhaustive", rc.exhaustive);
  if (f.has("optimizer.d_th")) rc.d_th = detail::Fields::parse<double>("optimizer.d_th", f.str("optimizer.d_th"));

  f.get("simulate.bursts", rc.sim_bursts);
  f.get("simulate.warmup", rc.sim_warmup);

  if (f.has("sweep.kind")) {
    SweepSpec s;
    s.kind = f.str("sweep.kind");
    static const std::set<std::string> kinds = {"fixed_point", "throughput", "ee", "optimize", "optimize_bm", "simulate"};
    if (!kinds.count(s.kind)) throw ConfigError("config: sweep.kind '" + s.kind + "' is not a sweepable experiment");
    if (f.has("sweep.wifi_stations")) s.wifi_stations = f.list<int>("sweep.wifi_stations");
    if (f.has("sweep.report_prob")) s.report_prob = f.list<double>("sweep.report_prob");
    if (f.has("sweep.threshold_db")) s.threshold_db = f.list<double>("sweep.threshold_db");
    if (f.has("sweep.m")) s.m = f.list<int>("sweep.m");
    if (f.has("sweep.speed_kmh")) s.speed_kmh = f.list<double>("sweep.speed_kmh");
    if (f.has("sweep.niid_ratio")) s.niid_ratio = f.list<double>("sweep.niid_ratio");
    if (f.has("sweep.schedulers")) s.schedulers = f.list<SchedulerKind>("sweep.schedulers");
    if (f.has("sweep.lteu_cw")) {
      if (f.str("sweep.lteu_cw") == "auto") s.auto_cw = true;
      else s.lteu_cw = f.list<int>("sweep.lteu_cw");
    }
    rc.sweep = s;
  }
  f.check_all_used();

  try {
    n.validate();
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  if (path.empty() || path == "paper_defaults") return RunConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, std::filesystem::path(path).parent_path());
}

}  // namespace lteu
