// Command line front end: single experiments and parameter sweeps, CSV out.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lteu/config.hpp>
#include <lteu/lteu.hpp>

namespace fs = std::filesystem;
using namespace lteu;

namespace {

// Files are written as <name>.part and renamed only when the command succeeds.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  ~OutputSet() {
    if (committed_) return;
    for (auto& f : files_) {
      f.stream.reset();
      std::error_code ec;
      fs::remove(f.part, ec);
    }
  }

  std::ostream& open(const std::string& name) {
    fs::create_directories(dir_);
    Entry e;
    e.final_path = dir_ / name;
    e.part = dir_ / (name + ".part");
    e.stream = std::make_unique<std::ofstream>(e.part, std::ios::binary);
    if (!*e.stream) throw std::runtime_error("cannot write " + e.part.string());
    files_.push_back(std::move(e));
    return *files_.back().stream;
  }

  void commit() {
    for (auto& f : files_) {
      f.stream->close();
      if (!*f.stream) throw std::runtime_error("write failed for " + f.final_path.string());
    }
    for (auto& f : files_) fs::rename(f.part, f.final_path);
    committed_ = true;
  }

 private:
  struct Entry {
    fs::path final_path, part;
    std::unique_ptr<std::ofstream> stream;
  };
  fs::path dir_;
  std::vector<Entry> files_;
  bool committed_ = false;
};

std::string scheme_name(const FeedbackScheme& s) { return s.is_threshold() ? "threshold" : "best_m"; }
double scheme_param(const FeedbackScheme& s) { return s.is_threshold() ? s.lambda : s.m; }

struct Point {
  NetworkConfig net;
  double speed_kmh = 0.0;
};

const std::vector<std::string> kAxisCols = {"wifi_stations", "lteu_cw", "speed_kmh", "niid_ratio",
                                            "scheduler",     "scheme",  "lambda_linear_or_m"};

void axis_cells(CsvWriter::Row& r, const Point& p) {
  r << p.net.wifi_stations() << p.net.mac.lteu_cw << p.speed_kmh << p.net.fading.niid_ratio
    << to_string(p.net.scheduler) << scheme_name(p.net.scheme) << scheme_param(p.net.scheme);
}

std::vector<std::string> with_axes(std::vector<std::string> cols) {
  std::vector<std::string> out = kAxisCols;
  out.insert(out.end(), cols.begin(), cols.end());
  return out;
}

const std::vector<std::string> kFixedPointCols = {"tau_w", "tau_l", "p_w", "p_l", "p_t", "p_s_w", "occupancy_ratio",
                                                  "slot_occupancy_ratio", "contention_mean_us", "reservation_mean_us"};
const std::vector<std::string> kThroughputCols = {"source", "throughput_bps", "spectral_sum", "collision_first",
                                                  "mean_tx_us"};
const std::vector<std::string> kEeCols = {"source", "throughput_bps", "e_basic_j", "e_ul_j", "e_dl_j", "bits_per_burst",
                                          "kappa_bits_per_j"};
const std::vector<std::string> kOptCols = {"d_th", "z_star", "lambda_star_db", "m_star", "kappa_star_bits_per_j",
                                           "kappa_star_mbit_per_j", "occupancy_ratio", "constraint_ok"};
const std::vector<std::string> kSimCols = {"bursts", "throughput_bps", "throughput_se", "kappa_bits_per_j", "kappa_se",
                                           "e_basic_j", "e_ul_j", "e_dl_j", "collision_first_rate",
                                           "collision_first_se", "wifi_occupancy", "wifi_occupancy_se",
                                           "wifi_tx_freq", "wifi_collision_freq", "slots"};

void fixed_point_row(CsvWriter& w, const Point& p) {
  const auto fp = solve_fixed_point(p.net.mac);
  const auto cm = contention_means(p.net.mac, fp);
  auto r = w.row();
  axis_cells(r, p);
  r << fp.tau_w << fp.tau_l << fp.p_w << fp.p_l << fp.p_t << fp.p_s_w << wifi_occupancy_ratio(p.net.mac, fp)
    << slot_occupancy_ratio(p.net.mac, fp) << cm.contention_us << cm.reservation_us;
  std::printf("fixed-point N_w=%d Z=%d tau_w=%.6f p_L=%.6f t_s^w=%.4f\n", p.net.wifi_stations(), p.net.mac.lteu_cw,
              fp.tau_w, fp.p_l, wifi_occupancy_ratio(p.net.mac, fp));
}

const char* source_name(RateSource s) { return s == RateSource::mc ? "mc" : "analytic"; }

void throughput_row(CsvWriter& w, const Point& p, const ModelOptions& mo) {
  ScenarioModel m(p.net, mo);
  const double sp = m.spectral(p.net.scheduler, p.net.scheme);
  const double thr = assemble_throughput(p.net.bandwidth_hz, m.delay(), sp);
  auto r = w.row();
  axis_cells(r, p);
  r << source_name(mo.source) << thr << sp << m.delay().collision_first << m.delay().mean_tx_dl_us;
  std::printf("throughput N_w=%d Z=%d %s: %.6g bit/s\n", p.net.wifi_stations(), p.net.mac.lteu_cw,
              to_string(p.net.scheduler), thr);
}

void ee_row(CsvWriter& w, const Point& p, const ModelOptions& mo) {
  ScenarioModel m(p.net, mo);
  const Evaluation e = m.evaluate();
  auto r = w.row();
  axis_cells(r, p);
  r << source_name(mo.source) << e.throughput_bps << e.ee.e_basic_j << e.ee.e_ul_j << e.ee.e_dl_j
    << e.ee.bits_delivered << e.ee.kappa;
  std::printf("ee N_w=%d Z=%d %s: kappa=%.6g bit/J\n", p.net.wifi_stations(), p.net.mac.lteu_cw,
              to_string(p.net.scheduler), e.ee.kappa);
}

OptResult optimize_row(CsvWriter& w, Point p, const RunConfig& rc, bool best_m) {
  RunConfig local = rc;
  local.net = p.net;
  const double d_th = local.occupancy_target();
  OptResult res = best_m ? optimize_bm(p.net, d_th, rc.optimizer, rc.model)
                         : optimize_th(p.net, d_th, rc.optimizer, rc.model, rc.exhaustive);
  p.net.mac.lteu_cw = res.z_star;
  if (best_m) p.net.scheme = FeedbackScheme::best_m(res.m_star);
  else p.net.scheme = FeedbackScheme::threshold_db(res.lambda_star_db);
  auto r = w.row();
  axis_cells(r, p);
  r << d_th << res.z_star;
  if (best_m) r << "" << res.m_star;
  else r << res.lambda_star_db << "";
  r << res.kappa_star
    << res.kappa_star * 1e-6 << res.occupancy << res.constraint_ok;
  if (best_m)
    std::printf("optimize N_w=%d: Z*=%d m*=%d kappa*=%.4f Mbit/J\n", p.net.wifi_stations(), res.z_star, res.m_star,
                res.kappa_star * 1e-6);
  else
    std::printf("optimize N_w=%d: Z*=%d lambda*=%.2f dB kappa*=%.4f Mbit/J\n", p.net.wifi_stations(), res.z_star,
                res.lambda_star_db, res.kappa_star * 1e-6);
  return res;
}

void simulate_row(CsvWriter& w, const Point& p, const RunConfig& rc, std::ostream* trace) {
  const SimResult s = run_sim(p.net, rc.sim_bursts, trace, rc.sim_warmup);
  auto r = w.row();
  axis_cells(r, p);
  r << s.bursts << s.throughput_bps << s.throughput_se << s.kappa_bits_per_j << s.kappa_se << s.energy.e_basic_j
    << s.energy.e_ul_j << s.energy.e_dl_j << s.collision_first_rate << s.collision_first_se << s.wifi_occupancy
    << s.wifi_occupancy_se << s.wifi_tx_freq << s.wifi_collision_freq << s.slots;
  std::printf("simulate N_w=%d Z=%d %s: %.6g bit/s (se %.3g), kappa=%.6g bit/J\n", p.net.wifi_stations(),
              p.net.mac.lteu_cw, to_string(p.net.scheduler), s.throughput_bps, s.throughput_se, s.kappa_bits_per_j);
}

std::vector<Point> expand(const RunConfig& rc) {
  const SweepSpec& s = *rc.sweep;
  std::vector<Point> pts{{rc.net, rc.speed_kmh}};
  auto cross = [&pts](auto values, auto apply) {
    if (values.empty()) return;
    std::vector<Point> out;
    for (const auto& p : pts)
      for (const auto& v : values) {
        Point q = p;
        apply(q, v);
        out.push_back(q);
      }
    pts.swap(out);
  };
  cross(s.wifi_stations, [](Point& p, int n) { p.net.mac.wifi_stations = n; });
  cross(s.speed_kmh, [&](Point& p, double v) {
    p.speed_kmh = v;
    p.net.fading.doppler_hz = doppler_from_speed(v, rc.carrier_hz);
  });
  cross(s.niid_ratio, [](Point& p, double v) { p.net.fading.niid_ratio = v; });
  cross(s.report_prob, [](Point& p, double v) { p.net.scheme = threshold_for_report_rate(p.net.fading, v); });
  cross(s.threshold_db, [](Point& p, double v) { p.net.scheme = FeedbackScheme::threshold_db(v); });
  cross(s.m, [](Point& p, int m) { p.net.scheme = FeedbackScheme::best_m(m); });
  cross(s.schedulers, [](Point& p, SchedulerKind k) { p.net.scheduler = k; });
  cross(s.lteu_cw, [](Point& p, int z) { p.net.mac.lteu_cw = z; });
  if (s.auto_cw) {
    for (auto& p : pts) {
      RunConfig local = rc;
      local.net = p.net;
      p.net.mac.lteu_cw = min_cw(p.net.mac, local.occupancy_target(), rc.optimizer.z_max);
    }
  }
  for (auto& p : pts) p.net.validate();
  return pts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTE-U / Wi-Fi coexistence analysis, optimization and simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path = "paper_defaults", out_dir = ".", mode, source;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "INI config file or 'paper_defaults'");
  app.add_option("--seed", seed, "random seed (overrides network.seed)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--mode", mode, "contention pmf construction")->check(CLI::IsMember({"lattice", "mc"}));
  app.add_option("--source", source, "conditional-rate source")->check(CLI::IsMember({"analytic", "mc"}));

  auto* c_fp = app.add_subcommand("fixed-point", "coexistence fixed point and occupancy ratio");
  auto* c_pmf = app.add_subcommand("pmf", "contention, pre-transmission and feedback-delay pmfs");
  auto* c_thr = app.add_subcommand("throughput", "network throughput");
  auto* c_ee = app.add_subcommand("ee", "users' energy efficiency breakdown");
  auto* c_opt = app.add_subcommand("optimize", "CW size and feedback parameter optimization");
  auto* c_sim = app.add_subcommand("simulate", "slot-level simulation");
  auto* c_sw = app.add_subcommand("sweep", "parameter sweep from the [sweep] config section");
  bool want_trace = false;
  c_sim->add_flag("--trace", want_trace, "also write a per-burst NDJSON trace");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc = load_config(config_path);
    if (seed) {
      rc.net.rng_seed = *seed;
      rc.model.mc.seed = *seed;
      rc.model.contention.seed = *seed;
      rc.optimizer.seed = *seed;
    } else {
      rc.model.mc.seed = rc.model.contention.seed = rc.net.rng_seed;
    }
    if (!mode.empty()) rc.model.mode = parse_mode(mode);
    if (!source.empty()) rc.model.source = parse_source(source);

    OutputSet out(out_dir);
    const Point base{rc.net, rc.speed_kmh};

    if (c_fp->parsed()) {
      CsvWriter w(out.open("fixed_point.csv"), with_axes(kFixedPointCols));
      fixed_point_row(w, base);
    } else if (c_pmf->parsed()) {
      ScenarioModel m(rc.net, rc.model);
      write_pmf_csv(out.open("contention_pmf.csv"), m.pmf());
      CsvWriter pw(out.open("pretx_pmf.csv"), {"subframes", "probability"});
      for (std::size_t b = 0; b < m.delay().pretx.mass.size(); ++b)
        if (m.delay().pretx.mass[b] > 0) pw.row() << static_cast<int>(b) << m.delay().pretx.mass[b];
      CsvWriter dw(out.open("delay_pmf.csv"), {"alpha", "a", "delay_ms", "probability"});
      for (int a = 1; a <= rc.net.burst_subframes(); ++a) {
        const auto& p = m.delay().delay_pmf(a);
        for (std::size_t i = 0; i < p.mass.size(); ++i)
          if (p.mass[i] > 0) dw.row() << a << static_cast<int>(i) << i * rc.net.subframe_us() * 1e-3 << p.mass[i];
      }
      std::printf("pmf N_w=%d Z=%d E(t)=%.2f us E(t_p)=%.2f us p_c1=%.5f\n", rc.net.wifi_stations(),
                  rc.net.mac.lteu_cw, m.delay().mean_contention_us, m.delay().mean_pretx_us,
                  m.delay().collision_first);
    } else if (c_thr->parsed()) {
      CsvWriter w(out.open("throughput.csv"), with_axes(kThroughputCols));
      throughput_row(w, base, rc.model);
    } else if (c_ee->parsed()) {
      CsvWriter w(out.open("ee.csv"), with_axes(kEeCols));
      ee_row(w, base, rc.model);
    } else if (c_opt->parsed()) {
      CsvWriter w(out.open("optimize.csv"), with_axes(kOptCols));
      const OptResult res = optimize_row(w, base, rc, !rc.net.scheme.is_threshold());
      CsvWriter tw(out.open("optimize_trace.csv"), {"iteration", "lambda_db_or_m", "kappa"});
      for (const auto& t : res.trace) tw.row() << t.iteration << t.x << t.kappa;
    } else if (c_sim->parsed()) {
      CsvWriter w(out.open("simulate.csv"), with_axes(kSimCols));
      simulate_row(w, base, rc, want_trace ? &out.open("simulate_trace.ndjson") : nullptr);
    } else if (c_sw->parsed()) {
      if (!rc.sweep) throw ConfigError("sweep needs a [sweep] section with kind and at least one axis");
      const std::string kind = rc.sweep->kind;
      const auto pts = expand(rc);
      std::ostream& os = out.open("sweep_" + kind + ".csv");
      if (kind == "fixed_point") {
        CsvWriter w(os, with_axes(kFixedPointCols));
        for (const auto& p : pts) fixed_point_row(w, p);
      } else if (kind == "throughput") {
        CsvWriter w(os, with_axes(kThroughputCols));
        for (const auto& p : pts) throughput_row(w, p, rc.model);
      } else if (kind == "ee") {
        CsvWriter w(os, with_axes(kEeCols));
        for (const auto& p : pts) ee_row(w, p, rc.model);
      } else if (kind == "optimize" || kind == "optimize_bm") {
        CsvWriter w(os, with_axes(kOptCols));
        for (const auto& p : pts) optimize_row(w, p, rc, kind == "optimize_bm");
      } else {
        CsvWriter w(os, with_axes(kSimCols));
        for (const auto& p : pts) simulate_row(w, p, rc, nullptr);
      }
    }
    out.commit();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
