#include "hdlab/cli_runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "hdlab/chaos_lab.hpp"
#include "hdlab/diffraction_probe.hpp"
#include "hdlab/errors.hpp"
#include "hdlab/event_dynamics.hpp"
#include "hdlab/model_core.hpp"
#include "hdlab/parallel.hpp"
#include "hdlab/pointer_overlap.hpp"
#include "hdlab/quantum_scatter.hpp"
#include "hdlab/reference_stepper.hpp"
#include "hdlab/semiclassics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hdlab {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"simulate",  "reverse", "divergence", "wavepacket", "phaseshift",
                                              "overlap",   "diffract", "expansion", "precision"};
  return names;
}

Verdict check_le(std::string name, double value, double threshold) {
  return {std::move(name), value <= threshold, value, "<=", threshold, std::nullopt};
}
Verdict check_ge(std::string name, double value, double threshold) {
  return {std::move(name), value >= threshold, value, ">=", threshold, std::nullopt};
}
Verdict check_eq(std::string name, double value, double expected) {
  return {std::move(name), value == expected, value, "==", expected, std::nullopt};
}
Verdict check_in(std::string name, double value, double lo, double hi) {
  return {std::move(name), value >= lo && value <= hi, value, "in", lo, hi};
}

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

json ExperimentReport::to_json(bool include_wall_clock) const {
  json j;
  j["experiment"] = experiment;
  j["spec"] = spec;
  j["metrics"] = json::object();
  for (const auto& [k, v] : metrics) j["metrics"][k] = v;
  j["series"] = json::object();
  for (const auto& [k, v] : series) j["series"][k] = v;
  j["verdicts"] = json::array();
  for (const auto& v : verdicts) {
    json e{{"name", v.name}, {"passed", v.passed}, {"value", v.value}, {"op", v.op}, {"threshold", v.threshold}};
    if (v.upper) e["upper"] = *v.upper;
    j["verdicts"].push_back(e);
  }
  j["passed"] = passed();
  if (include_wall_clock) j[kWallClockField] = wall_clock_seconds;
  return j;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tag(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return out;
}

// Config access restricted to a declared key set.
class Params {
 public:
  Params(KeyValueFile kv, std::vector<std::string> keys) : kv_(std::move(kv)) {
    keys.insert(keys.end(), {"seed", "ensemble", "verdicts"});
    for (const auto& k : kv_.unknown_keys(keys)) {
      throw ConfigError("unknown key '" + k + "'", kv_.line_of(k));
    }
    if (kv_.has("verdicts")) {
      for (const auto& v : split(kv_.get_string("verdicts", ""), ',')) {
        if (!v.empty()) selected_.push_back(v);
      }
    }
  }

  const KeyValueFile& kv() const { return kv_; }
  bool has(const std::string& k) const { return kv_.has(k); }
  double number(const std::string& k, double fallback) const { return kv_.get_double(k, fallback); }
  std::vector<double> list(const std::string& k, std::vector<double> fallback) const {
    return kv_.get_doubles(k, std::move(fallback));
  }
  std::uint64_t seed() const { return kv_.get_uint("seed", 1); }

  std::size_t count(const std::string& k, std::size_t fallback, std::size_t minimum = 0) const {
    const auto v = static_cast<std::size_t>(kv_.get_uint(k, fallback));
    if (v < minimum) fail(k, "must be at least " + std::to_string(minimum));
    return v;
  }

  double positive(const std::string& k, double fallback) const {
    const double v = number(k, fallback);
    if (!(v > 0.0)) fail(k, "must be positive");
    return v;
  }

  bool flag(const std::string& k, bool fallback) const {
    if (!kv_.has(k)) return fallback;
    const std::string v = kv_.get_string(k, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(k, "expected true or false, got '" + v + "'");
  }

  std::size_t ensemble(std::size_t fallback) const { return count("ensemble", fallback, 1); }

  bool wants(const std::string& verdict) const {
    return selected_.empty() || std::find(selected_.begin(), selected_.end(), verdict) != selected_.end();
  }

  SystemConfig system() const { return config_from_keys(kv_); }

  [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
    throw ConfigError(k + ": " + msg, kv_.has(k) ? kv_.line_of(k) : 0);
  }

 private:
  KeyValueFile kv_;
  std::vector<std::string> selected_;
};

std::vector<std::string> with_system(std::vector<std::string> extra) {
  auto keys = system_config_keys();
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

class Context {
 public:
  Context(fs::path out, ExperimentReport& report) : out_(std::move(out)), report_(report) {}

  ExperimentReport& report() { return report_; }

  // Writes a CSV series and registers it under `name`.
  void series(const std::string& name, const std::string& header, const std::vector<std::vector<std::string>>& rows) {
    const std::string file = name + ".csv";
    std::ofstream out(out_ / file, std::ios::binary);
    if (!out) throw LabError("cannot write " + (out_ / file).string());
    out << header << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    report_.series[name] = file;
  }

  template <typename Writer>
  void series_with(const std::string& name, Writer&& write) {
    const std::string file = name + ".csv";
    std::ofstream out(out_ / file, std::ios::binary);
    if (!out) throw LabError("cannot write " + (out_ / file).string());
    write(out);
    report_.series[name] = file;
  }

  void plot(std::string name, std::string series, std::string x, std::string y, bool log_y) {
    report_.plots.push_back({std::move(name), std::move(series), std::move(x), std::move(y), log_y});
  }

  void metric(const std::string& name, double value) { report_.metrics[name] = value; }
  void verdict(Verdict v) { report_.verdicts.push_back(std::move(v)); }

 private:
  fs::path out_;
  ExperimentReport& report_;
};

// ---------------------------------------------------------------------------
// simulate

void run_simulate(const Params& p, Context& ctx) {
  const SystemConfig cfg = p.system();
  const double t_end = p.number("t_end", std::numeric_limits<double>::infinity());
  const std::size_t max_events = p.count("max_events", 0);
  const double oracle_dt = p.number("oracle_dt", 0.0);
  const bool write_events = p.flag("write_events", true);
  if (!std::isfinite(t_end) && max_events == 0) p.fail("t_end", "set t_end or max_events");

  const SystemState initial = sample_initial_configuration(cfg, cfg.region);
  const EnclosureGeometry geom = EnclosureGeometry::of(cfg);
  EventEngine engine(initial, geom);
  double max_pair_change = 0.0;
  std::size_t executed = 0;
  while (max_events == 0 || executed < max_events) {
    const SystemState before = engine.state();
    const auto rec = engine.step(t_end);
    if (!rec) break;
    ++executed;
    if (!rec->is_wall()) {
      const auto& a0 = before.discs[rec->id_a];
      const auto& b0 = before.discs[rec->id_b];
      const auto& a1 = engine.state().discs[rec->id_a];
      const auto& b1 = engine.state().discs[rec->id_b];
      const double scale = norm(a0.velocity) + norm(b0.velocity);
      const Vec2 change = (a1.velocity + b1.velocity) - (a0.velocity + b0.velocity);
      if (scale > 0.0) max_pair_change = std::max(max_pair_change, norm(change) / scale);
    }
  }
  const SystemState& final_state = engine.state();
  const EventLog& log = engine.log();
  const double e0 = initial.kinetic_energy(cfg.disc_mass);
  const double drift = std::abs(final_state.kinetic_energy(cfg.disc_mass) - e0) / e0;

  ctx.metric("events", static_cast<double>(log.records.size()));
  ctx.metric("disc_disc_events", static_cast<double>(log.disc_disc_count()));
  ctx.metric("wall_events", static_cast<double>(log.wall_count()));
  ctx.metric("final_time", final_state.time);
  ctx.metric("energy_relative_drift", drift);
  ctx.metric("max_pair_momentum_change", max_pair_change);
  ctx.metric("mean_free_path_nominal", mean_free_path_nominal(cfg));
  if (log.disc_disc_count() >= 100) ctx.metric("mean_free_path_measured", measure_mean_free_path(log));

  if (p.wants("conservation")) {
    ctx.verdict(check_le("energy_relative_drift", drift, 1e-9));
    ctx.verdict(check_le("pair_momentum_change", max_pair_change, 1e-12));
  }
  if (p.wants("state_valid")) {
    bool valid = true;
    try {
      check_state(final_state, cfg.enclosure_radius, cfg.disc_radius, kPenetrationTolerance * cfg.disc_radius);
    } catch (const ContractViolation&) {
      valid = false;
    }
    ctx.verdict(check_eq("state_valid", valid ? 1.0 : 0.0, 1.0));
  }
  if (oracle_dt > 0.0) {
    const SteppedRun ref = step_naively(initial, geom, final_state.time, oracle_dt * cfg.disc_radius / cfg.speed);
    double dev = 0.0;
    for (std::size_t i = 0; i < final_state.discs.size(); ++i) {
      dev = std::max(dev, norm(final_state.discs[i].position - ref.state.discs[i].position));
    }
    ctx.metric("oracle_max_position_deviation", dev);
    ctx.metric("oracle_events", static_cast<double>(ref.disc_disc_events + ref.wall_events));
    if (p.wants("oracle")) {
      ctx.verdict(check_le("oracle_max_position_deviation", dev, 1e-4 * cfg.disc_radius));
      ctx.verdict(check_eq("oracle_event_count", static_cast<double>(ref.disc_disc_events + ref.wall_events),
                           static_cast<double>(log.records.size())));
    }
  }

  if (write_events) {
    ctx.series_with("events", [&](std::ostream& out) { log.write_csv(out); });
    ctx.plot("free_path", "events", "time", "free_path", false);
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& d : final_state.discs) {
    rows.push_back({std::to_string(d.id), num(d.position.x), num(d.position.y), num(d.velocity.x), num(d.velocity.y)});
  }
  ctx.series("final_state", "id,x,y,vx,vy", rows);
  ctx.plot("final_positions", "final_state", "x", "y", false);
}

// ---------------------------------------------------------------------------
// reverse

void run_reverse(const Params& p, Context& ctx) {
  const SystemConfig base = p.system();
  const auto t_list = p.list("t_rev", {});
  if (t_list.empty()) p.fail("t_rev", "at least one reversal time is required");
  std::set<int> exclude;
  for (double id : p.list("exclude", {})) {
    if (id < 0 || id >= static_cast<double>(base.n_discs) || id != std::floor(id)) p.fail("exclude", "bad disc id");
    exclude.insert(static_cast<int>(id));
  }
  const std::size_t members = p.ensemble(20);
  const double echo_tolerance = p.number("echo_tolerance", 1e-6) * base.disc_radius;
  const double wavelength = p.positive("wavelength", 1e-3 * base.disc_radius);
  const double R = base.enclosure_radius;

  std::vector<std::vector<std::string>> rows;
  std::vector<double> med_rms;
  std::vector<double> med_cpd;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    const double t_rev = t_list[ti];
    if (!(t_rev > 0.0)) p.fail("t_rev", "reversal times must be positive");
    const auto reports = parallel_map(members, [&](std::size_t i) {
      SystemConfig c = base;
      c.seed = member_seed(base.seed, i);
      return run_reversal(c, t_rev, exclude);
    });
    std::vector<double> maxe, rms, cpd, margins;
    std::size_t above = 0, forward = 0;
    double worst = 0.0;
    for (const auto& r : reports) {
      maxe.push_back(r.max_error);
      rms.push_back(r.rms_error);
      cpd.push_back(r.collisions_per_disc);
      margins.push_back(interference_verdict(r.return_errors, base.n_discs, wavelength).margin);
      if (r.rms_error >= 0.1 * R) ++above;
      forward += r.collisions_forward;
      worst = std::max(worst, r.max_error);
    }
    const double frac_above = static_cast<double>(above) / static_cast<double>(members);
    med_rms.push_back(median(rms));
    med_cpd.push_back(median(cpd));
    const std::string t = "@" + tag(t_rev);
    ctx.metric("median_collisions_per_disc" + t, med_cpd.back());
    ctx.metric("median_max_error" + t, median(maxe));
    ctx.metric("median_rms_error" + t, med_rms.back());
    ctx.metric("worst_max_error" + t, worst);
    ctx.metric("fraction_rms_above_0.1R" + t, frac_above);
    ctx.metric("median_interference_margin" + t, median(margins));
    rows.push_back({num(t_rev), num(med_cpd.back()), num(median(maxe)), num(med_rms.back()), num(worst),
                    num(frac_above)});

    if (p.wants("ballistic") && forward == 0) {
      ctx.verdict(check_le("ballistic_max_error" + t, worst, 1e-12 * base.disc_radius));
    }
    if (p.wants("echo")) {
      ctx.verdict(check_le("echo_collisions_per_disc" + t, med_cpd.back(), 5.0));
      ctx.verdict(check_le("echo_median_max_error" + t, median(maxe), echo_tolerance));
    }
    if (p.wants("no_regathering")) {
      ctx.verdict(check_ge("collisions_per_disc" + t, med_cpd.back(), 10.0));
      ctx.verdict(check_ge("fraction_rms_above_0.1R" + t, frac_above, 0.9));
    }
    if (p.wants("interference") && !exclude.empty()) {
      ctx.verdict(check_le("median_interference_margin" + t, median(margins), 1.0));
    }
  }
  ctx.metric("enclosure_radius", R);

  if (p.wants("growth") && t_list.size() > 1) {
    double violations = 0.0;
    for (std::size_t i = 0; i + 1 < med_rms.size(); ++i) {
      if (med_rms[i] < 0.1 * R && med_rms[i + 1] < med_rms[i]) violations += 1.0;
    }
    ctx.verdict(check_le("growth_violations", violations, 0.0));
  }
  if (p.wants("saturation") && t_list.size() > 1) {
    ctx.verdict(check_in("saturated_median_rms_error", med_rms.back(), 0.1 * R, 2.0 * R));
  }

  ctx.series("reversal",
             "t_rev,median_collisions_per_disc,median_max_error,median_rms_error,worst_max_error,"
             "fraction_rms_above_0.1R",
             rows);
  ctx.plot("return_error", "reversal", "median_collisions_per_disc", "median_rms_error", true);
}

// ---------------------------------------------------------------------------
// divergence

FrozenSceneSpec scene_spec(const SystemConfig& cfg) {
  if (cfg.n_discs < 2) throw ConfigError("n_discs: the frozen scene needs at least two discs");
  FrozenSceneSpec s;
  s.n_scatterers = cfg.n_discs - 1;
  s.contact_radius = 2.0 * cfg.disc_radius;
  s.mean_separation = cfg.mean_separation;
  s.seed = cfg.seed;
  return s;
}

void run_divergence(const Params& p, Context& ctx) {
  const SystemConfig cfg = p.system();
  const FrozenSceneSpec spec = scene_spec(cfg);
  const auto deltas = p.list("delta_b0", {1e-12});
  const std::size_t n_max = p.count("n_max", 20, 3);
  const std::size_t members = p.ensemble(100);
  const double ratio_la = cfg.mean_separation / cfg.disc_radius;
  const double c = ratio_la * ratio_la;

  std::vector<std::vector<std::string>> summary;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double db0 = deltas[di] * cfg.disc_radius;
    if (!(db0 >= 0.0)) p.fail("delta_b0", "must be non-negative");
    const DivergenceEnsemble ens = divergence_ensemble(spec, db0, n_max, members);
    const std::string t = "@" + tag(deltas[di]);
    const double predicted = std::log(spec.contact_radius / db0) / std::log(c);
    ctx.metric("slopes_fitted" + t, static_cast<double>(ens.slopes.size()));
    ctx.metric("predicted_n_miss" + t, predicted);
    if (ens.median_slope) ctx.metric("median_slope" + t, *ens.median_slope);
    if (ens.median_ratio) ctx.metric("median_ratio" + t, *ens.median_ratio);
    if (ens.median_n_miss) ctx.metric("median_n_miss" + t, *ens.median_n_miss);
    summary.push_back({num(deltas[di]), num(ens.median_slope.value_or(std::nan(""))),
                       num(ens.median_ratio.value_or(std::nan(""))), num(ens.median_n_miss.value_or(std::nan(""))),
                       num(predicted)});

    if (p.wants("slope")) {
      ctx.verdict(check_in("median_slope" + t, ens.median_slope.value_or(std::nan("")), 1.5 * std::log(ratio_la),
                           3.0 * std::log(ratio_la)));
    }
    if (p.wants("ratio")) {
      ctx.verdict(check_in("median_ratio" + t, ens.median_ratio.value_or(std::nan("")), c / 2.0, 2.0 * c));
    }
    if (p.wants("n_miss")) {
      ctx.verdict(check_in("median_n_miss" + t, ens.median_n_miss.value_or(std::nan("")), predicted - 2.0,
                           predicted + 2.0));
    }

    const std::string name = "divergence_" + std::to_string(di);
    std::vector<std::vector<std::string>> rows;
    const auto& m0 = ens.members.front();
    for (std::size_t k = 0; k < m0.n.size(); ++k) rows.push_back({std::to_string(m0.n[k]), num(m0.separation[k])});
    ctx.series(name, "n,separation", rows);
    ctx.plot(name, name, "n", "separation", true);
  }
  ctx.metric("amplification_target", c);
  ctx.series("divergence_summary", "delta_b0,median_slope,median_ratio,median_n_miss,predicted_n_miss", summary);
}

// ---------------------------------------------------------------------------
// wavepacket

bool onset_halt(HaltReason r) {
  return r == HaltReason::Delocalized || r == HaltReason::PacketSplit || r == HaltReason::Grazing;
}

void run_wavepacket(const Params& p, Context& ctx) {
  const SystemConfig cfg = p.system();
  const FrozenSceneSpec base = scene_spec(cfg);
  const double a_eff = base.contact_radius;
  const double width0 = p.positive("width0", 1e-6) * a_eff;
  const double momentum = p.positive("momentum", 1e16);
  const double spread = p.number("angular_spread", 0.0);
  const bool diffusion = p.flag("quantum_diffusion", true);
  const std::size_t n_max = p.count("n_max", 50, 1);
  const std::size_t scenes = p.ensemble(10);
  const double strictness = p.positive("strictness", 0.1);
  const std::size_t amp_samples = p.count("amplification_samples", 100);
  const double l_mfp = mean_free_path_nominal(cfg.mean_separation, a_eff);
  const double c = l_mfp / a_eff;
  const std::size_t n_crit = predict_n_crit(width0, a_eff, c);

  struct SceneRun {
    SpreadLog log;
    std::vector<WkbCheck> wkb;
  };
  const auto runs = parallel_map(scenes, [&](std::size_t i) {
    FrozenSceneSpec s = base;
    s.seed = member_seed(base.seed, i);
    const FrozenScene scene = make_frozen_scene(s);
    const RayPacket packet = RayPacket::make(scene.start, scene.direction, width0, spread, momentum, diffusion);
    return SceneRun{propagate_packet(packet, scene, n_max), validate_wkb(packet, a_eff, l_mfp, strictness)};
  });

  std::vector<std::vector<std::string>> rows;
  std::vector<double> slopes;
  std::size_t hits = 0;
  bool wkb_ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SpreadLog& log = runs[i].log;
    wkb_ok = wkb_ok && wkb_satisfied(runs[i].wkb);
    const auto slope = log.log_width_slope();
    if (slope) slopes.push_back(*slope);
    const double completed = static_cast<double>(log.collisions_completed);
    const bool hit = onset_halt(log.halt) && std::abs(completed - static_cast<double>(n_crit)) <= 1.0;
    if (hit) ++hits;
    rows.push_back({std::to_string(i), to_string(log.halt), std::to_string(log.collisions_completed),
                    std::to_string(n_crit), num(slope.value_or(std::nan("")))});
    const std::string name = "spread_" + std::to_string(i);
    ctx.series_with(name, [&](std::ostream& out) { log.write_csv(out); });
    if (i == 0) ctx.plot("spread_0", name, "n", "delta", true);
  }
  for (const auto& w : runs.front().wkb) ctx.metric("wkb_margin_" + w.constraint, w.margin);
  const double fraction = static_cast<double>(hits) / static_cast<double>(scenes);
  const double ln_c = std::log(c);
  const double med_slope = slopes.empty() ? std::nan("") : median(slopes);
  ctx.metric("predicted_n_crit", static_cast<double>(n_crit));
  ctx.metric("amplification_c", c);
  ctx.metric("n_crit_hit_fraction", fraction);
  ctx.metric("median_log_width_slope", med_slope);
  ctx.metric("slope_relative_error", std::abs(med_slope - ln_c) / ln_c);
  ctx.series("wavepacket", "scene,halt_reason,collisions_completed,predicted_n_crit,log_width_slope", rows);

  if (p.wants("wkb")) ctx.verdict(check_eq("wkb_valid", wkb_ok ? 1.0 : 0.0, 1.0));
  if (p.wants("n_crit")) ctx.verdict(check_ge("n_crit_hit_fraction", fraction, 0.8));

  if (amp_samples > 0) {
    std::mt19937_64 rng(member_seed(cfg.seed, 0xA3F));
    std::uniform_real_distribution<double> ub(-0.9 * a_eff, 0.9 * a_eff);
    std::uniform_real_distribution<double> ur(20.0 * a_eff, 200.0 * a_eff);
    std::vector<std::vector<std::string>> amp_rows;
    double worst = 0.0;
    for (std::size_t i = 0; i < amp_samples; ++i) {
      const double b = ub(rng);
      const double r0 = ur(rng);
      const double closed = amplification_factor(b, r0, a_eff);
      const double rays = two_ray_amplification(b, r0, a_eff, 1e-6 * a_eff);
      const double err = std::abs(closed - rays) / rays;
      worst = std::max(worst, err);
      amp_rows.push_back({num(b / a_eff), num(r0 / a_eff), num(closed), num(rays), num(err)});
    }
    ctx.metric("amplification_max_relative_error", worst);
    ctx.series("amplification", "b_over_a_eff,r0_over_a_eff,closed_form,two_ray,relative_error", amp_rows);
    if (p.wants("amplification")) ctx.verdict(check_le("amplification_max_relative_error", worst, 0.05));
  }
}

// ---------------------------------------------------------------------------
// phaseshift

struct OracleRow {
  int m;
  double x, j, y;
};

std::vector<OracleRow> load_oracle(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read oracle grid " + path.string());
  std::vector<OracleRow> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ConfigError("malformed oracle row: " + line);
    rows.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
  }
  return rows;
}

void run_phaseshift(const Params& p, Context& ctx, const fs::path& config_dir) {
  const double ka = p.positive("ka", 200.0);
  const double k = p.positive("k", 1.0);
  const double a = ka / k;
  const int m_conv = converged_order(ka);
  const int m_max = static_cast<int>(p.count("m_max", static_cast<std::size_t>(m_conv + 20), 2));
  const auto b_list = p.list("b_fractions", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  const double deflection_limit = p.number("deflection_limit", 0.7);

  const PhaseShiftTable table = make_phase_shift_table(ka, m_max);
  ctx.series_with("phase_shifts", [&](std::ostream& out) { table.write_csv(out); });
  ctx.plot("phase_shifts", "phase_shifts", "m", "delta_m", false);

  double forbidden = 0.0;
  for (int m = m_conv + 1; m <= m_max; ++m) forbidden = std::max(forbidden, std::abs(table.delta[m]));
  ctx.metric("max_abs_delta_beyond_converged_order", forbidden);
  ctx.metric("converged_order", m_conv);
  if (p.wants("forbidden") && m_max > m_conv) ctx.verdict(check_le("forbidden_region_delta", forbidden, 1e-8));

  const CrossSectionReport cs = total_cross_section(table, k);
  ctx.metric("sigma_total", cs.sigma_total);
  ctx.metric("sigma_over_2a", cs.sigma_total / (2.0 * a));
  ctx.metric("tail_fraction", cs.tail_fraction);
  if (p.wants("tail")) ctx.verdict(check_eq("tail_converged", cs.converged ? 1.0 : 0.0, 1.0));
  if (p.wants("cross_section")) ctx.verdict(check_in("sigma_over_2a", cs.sigma_total / (2.0 * a), 1.8, 2.2));

  std::vector<std::vector<std::string>> rows;
  for (double f : b_list) {
    const DeflectionCheck d = semiclassical_deflection_check(table, k, f * a);
    rows.push_back({num(f), std::to_string(d.m), num(d.quantum), num(d.classical), num(d.relative_error)});
    ctx.metric("deflection_relative_error@" + tag(f), d.relative_error);
    if (p.wants("deflection") && std::abs(f) <= deflection_limit) {
      ctx.verdict(check_le("deflection_relative_error@" + tag(f), d.relative_error, 0.05));
    }
  }
  ctx.series("deflection", "b_over_a,m,quantum,classical,relative_error", rows);
  ctx.plot("deflection", "deflection", "b_over_a", "relative_error", false);

  // Wronskian over every order at this argument.
  const BesselSequence seq = bessel_sequence(kBesselMaxOrder, ka);
  double wr = 0.0;
  for (int m = 0; m < kBesselMaxOrder; ++m) {
    const double w = seq.J[m + 1] * seq.Y[m] - seq.J[m] * seq.Y[m + 1];
    if (std::isfinite(w)) wr = std::max(wr, std::abs(w * units::pi * ka / 2.0 - 1.0));
  }

  if (p.has("oracle_grid")) {
    fs::path grid = p.kv().get_string("oracle_grid", "");
    if (grid.is_relative()) grid = config_dir / grid;
    double worst = 0.0;
    std::vector<std::vector<std::string>> orows;
    for (const auto& o : load_oracle(grid)) {
      const double j = bessel_J(o.m, o.x);
      const double y = bessel_Y(o.m, o.x);
      const double ej = std::abs(j - o.j) / std::max(1.0, std::abs(o.j));
      double ey = 0.0;
      if (std::isinf(o.y)) {
        ey = std::isinf(y) && std::signbit(y) == std::signbit(o.y) ? 0.0 : 1.0;
      } else {
        ey = std::abs(y - o.y) / std::max(1.0, std::abs(o.y));
      }
      worst = std::max({worst, ej, ey});
      orows.push_back({std::to_string(o.m), num(o.x), num(ej), num(ey)});
      const BesselSequence s = bessel_sequence(std::min(o.m + 1, kSequenceMaxOrder), o.x);
      const double w = s.J[o.m + 1] * s.Y[o.m] - s.J[o.m] * s.Y[o.m + 1];
      if (std::isfinite(w) && std::isfinite(s.Y[o.m + 1])) {
        wr = std::max(wr, std::abs(w * units::pi * o.x / 2.0 - 1.0));
      }
    }
    ctx.metric("bessel_oracle_max_error", worst);
    ctx.series("bessel_oracle", "m,x,error_J,error_Y", orows);
    if (p.wants("bessel")) ctx.verdict(check_le("bessel_oracle_max_error", worst, 1e-10));
  }
  ctx.metric("wronskian_max_relative_error", wr);
  if (p.wants("wronskian")) ctx.verdict(check_le("wronskian_max_relative_error", wr, 1e-10));

  if (p.flag("continuity_check", false)) {
    const PhaseShiftTable next = make_phase_shift_table(ka + 1e-3, m_max);
    double jump = 0.0;
    for (int m = 0; m <= m_max; ++m) {
      jump = std::max(jump, std::abs(next.delta_continuous[m] - table.delta_continuous[m]));
    }
    const double ds = std::abs(total_cross_section(next, k * (ka + 1e-3) / ka).sigma_total - cs.sigma_total);
    ctx.metric("max_delta_change_per_1e-3_ka", jump);
    ctx.metric("sigma_change_per_1e-3_ka", ds);
    if (p.wants("continuity")) ctx.verdict(check_le("max_delta_change_per_1e-3_ka", jump, 1e-2));
  }
}

// ---------------------------------------------------------------------------
// overlap

void run_overlap(const Params& p, Context& ctx) {
  const std::size_t n = p.count("n_discs", 100, 1);
  const double delta = p.number("delta", 0.01);
  const double width = p.positive("width", 1.0);
  const double wavelength = p.positive("wavelength", 1e-3);
  const std::size_t draws = p.count("draws", 1000);
  const std::size_t max_n = p.count("max_n", 100, 1);
  const double max_delta = p.number("max_delta", 0.01);
  const std::size_t superball_k = p.count("superball_k", 10, 1);
  if (!(delta >= 0.0 && delta < 1.0)) p.fail("delta", "must lie in [0, 1)");
  if (!(max_delta >= 0.0 && max_delta < 1.0)) p.fail("max_delta", "must lie in [0, 1)");

  PointerPair uniform;
  uniform.width = width;
  uniform.wavelength = wavelength;
  uniform.displacements.assign(n, displacement_for_overlap(1.0 - delta, width));
  const OverlapResult u = pointer_overlap(uniform);
  const double target = std::exp(-static_cast<double>(n) * delta);
  ctx.metric("overlap_exact", u.exact);
  ctx.metric("overlap_approx", u.approx);
  ctx.metric("uniform_exact_vs_target", std::abs(u.exact - target) / target);
  if (p.wants("uniform")) {
    ctx.verdict(check_le("uniform_exact_vs_target", std::abs(u.exact - target) / target, 0.01));
    ctx.verdict(check_le("uniform_approx_vs_target", std::abs(u.approx - target) / target, 1e-12));
  }

  std::mt19937_64 rng(p.seed());
  std::uniform_int_distribution<std::size_t> un(1, max_n);
  std::uniform_real_distribution<double> ud(0.0, max_delta);
  std::vector<std::vector<std::string>> rows;
  double worst = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    PointerPair pair;
    pair.width = width;
    pair.wavelength = wavelength;
    const std::size_t m = un(rng);
    double sum_delta = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double d = ud(rng);
      sum_delta += d;
      pair.displacements.push_back(displacement_for_overlap(1.0 - d, width));
    }
    const OverlapResult r = pointer_overlap(pair);
    worst = std::max(worst, r.relative_difference);
    rows.push_back({std::to_string(i), std::to_string(m), num(sum_delta), num(r.exact), num(r.approx),
                    num(r.relative_difference)});
  }
  ctx.metric("draws_max_relative_difference", worst);
  if (draws > 0) {
    ctx.series("overlap_draws", "draw,n,sum_delta,exact,approx,relative_difference", rows);
    ctx.plot("overlap_draws", "overlap_draws", "sum_delta", "relative_difference", false);
    if (p.wants("draws")) ctx.verdict(check_le("draws_max_relative_difference", worst, 0.01));
  }

  const double threshold = interference_precision(n, wavelength);
  ctx.metric("interference_threshold", threshold);
  ctx.metric("interference_threshold_delta", interference_precision_delta(delta > 0.0 ? delta : 1.0, wavelength));
  double superball = std::nan("");
  if (n % superball_k == 0) {
    const double scaled = interference_precision(n / superball_k, wavelength / static_cast<double>(superball_k));
    superball = std::abs(scaled - threshold) / threshold;
    ctx.metric("superball_relative_difference", superball);
    if (p.wants("superball")) ctx.verdict(check_le("superball_relative_difference", superball, 1e-15));
  }

  std::vector<std::vector<std::string>> curve;
  for (int i = 0; i <= 100; ++i) {
    const double d = 0.05 * i * width;
    curve.push_back({num(d / width), num(gaussian_overlap(d, width))});
  }
  ctx.series("gaussian_overlap", "d_over_width,overlap", curve);
  ctx.plot("gaussian_overlap", "gaussian_overlap", "d_over_width", "overlap", false);
}

// ---------------------------------------------------------------------------
// diffract

void run_diffract(const Params& p, Context& ctx) {
  const SystemConfig cfg = p.system();
  const std::size_t per_disc = p.count("equilibrate_collisions", 20);
  const std::size_t samples = p.count("n_samples", 200, 100);
  const std::size_t directions = p.count("directions", kMinDirections, kMinDirections);
  const std::size_t q_points = p.count("q_points", kDefaultQPoints, 2);
  const std::size_t trials = p.count("uniform_trials", 50, 1);
  const double R = cfg.enclosure_radius;
  const double inner = R - cfg.disc_radius;
  const auto q = probe_q_grid(R, cfg.mean_separation, q_points);

  EventEngine engine(sample_initial_configuration(cfg, cfg.region), EnclosureGeometry::of(cfg));
  const std::size_t target = per_disc * cfg.n_discs / 2;
  while (engine.log().disc_disc_count() < target) {
    if (engine.advance_events(1, std::numeric_limits<double>::infinity()) == 0) break;
  }
  std::vector<Vec2> positions;
  for (const auto& d : engine.state().discs) positions.push_back(d.position);
  ctx.metric("equilibration_collisions_per_disc",
             2.0 * static_cast<double>(engine.log().disc_disc_count()) / static_cast<double>(cfg.n_discs));
  ctx.metric("packing_fraction", cfg.packing_fraction());

  const StructureFactorCurve ref = smeared_reference(cfg.n_discs, inner, q, samples, member_seed(cfg.seed, 1), directions);
  const StructureFactorCurve snap = structure_factor(positions, q, directions);
  const SnapshotVerdict sv = classify_snapshot(snap, ref);
  ctx.metric("snapshot_max_z", sv.max_z);
  ctx.metric("snapshot_q_at_max", sv.q_at_max);

  const auto uniform = parallel_map(trials, [&](std::size_t i) {
    return classify_snapshot(
        structure_factor(uniform_snapshot(cfg.n_discs, inner, member_seed(cfg.seed, 1000 + i)), q, directions), ref);
  });
  std::size_t quiet = 0;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < uniform.size(); ++i) {
    if (!uniform[i].distinguishable) ++quiet;
    rows.push_back({std::to_string(i), num(uniform[i].max_z), num(uniform[i].q_at_max),
                    uniform[i].distinguishable ? "1" : "0"});
  }
  const double frac = static_cast<double>(quiet) / static_cast<double>(trials);
  ctx.metric("uniform_indistinguishable_fraction", frac);
  if (p.wants("snapshot")) ctx.verdict(check_ge("snapshot_max_z", sv.max_z, kDistinguishableZ));
  if (p.wants("uniform")) ctx.verdict(check_ge("uniform_indistinguishable_fraction", frac, 0.95));

  ctx.series_with("reference", [&](std::ostream& out) { ref.write_csv(out); });
  ctx.series_with("snapshot", [&](std::ostream& out) { snap.write_csv(out); });
  ctx.series("uniform_trials", "trial,max_z,q_at_max,distinguishable", rows);
  ctx.plot("reference", "reference", "q", "S_mean", false);
  ctx.plot("snapshot", "snapshot", "q", "S_mean", false);
}

// ---------------------------------------------------------------------------
// expansion

void run_expansion_experiment(const Params& p, Context& ctx) {
  SystemConfig cfg = p.system();
  if (!p.has("region")) cfg.region = Region::inner_circle(0.5);
  const double factor = p.positive("t_end_factor", 10.0);
  const std::size_t samples = p.count("n_samples", 50, 1);
  const std::size_t members = p.ensemble(1);
  const double R = cfg.enclosure_radius;
  const double t_end = factor * R / cfg.speed;

  const auto reports = parallel_map(members, [&](std::size_t i) {
    SystemConfig c = cfg;
    c.seed = member_seed(cfg.seed, i);
    return run_expansion(c, t_end, samples);
  });
  double kbar = 0.0, mfp = 0.0, outer = 0.0;
  std::size_t mfp_members = 0;
  std::vector<double> occupancy(reports.front().outer_fraction.size(), 0.0);
  for (const auto& r : reports) {
    kbar += r.mean_collisions_per_disc;
    outer += r.outer_fraction.back();
    if (r.measured_mean_free_path) {
      mfp += *r.measured_mean_free_path;
      ++mfp_members;
    }
    for (std::size_t i = 0; i < occupancy.size(); ++i) occupancy[i] += r.outer_fraction[i];
  }
  const double m = static_cast<double>(members);
  kbar /= m;
  outer /= m;
  for (double& o : occupancy) o /= m;
  const double nominal = mean_free_path_nominal(cfg);
  ctx.metric("t_end", t_end);
  ctx.metric("mean_collisions_per_disc", kbar);
  ctx.metric("final_outer_fraction", outer);
  ctx.metric("nominal_mean_free_path", nominal);
  ctx.metric("R_over_nominal_mean_free_path", R / nominal);
  if (mfp_members > 0) {
    mfp /= static_cast<double>(mfp_members);
    const double ratio = R / mfp;
    ctx.metric("measured_mean_free_path", mfp);
    ctx.metric("R_over_measured_mean_free_path", ratio);
    if (p.wants("collision_bounds")) ctx.verdict(check_in("mean_collisions_per_disc", kbar, ratio, ratio * ratio));
  } else if (p.wants("collision_bounds")) {
    ctx.verdict(check_in("mean_collisions_per_disc", kbar, R / nominal, (R / nominal) * (R / nominal)));
  }
  if (p.wants("occupancy")) ctx.verdict(check_in("final_outer_fraction", outer, 0.70, 0.80));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < occupancy.size(); ++i) {
    rows.push_back({num(reports.front().times[i]), num(occupancy[i])});
  }
  ctx.series("occupancy", "time,outer_fraction", rows);
  ctx.plot("occupancy", "occupancy", "time", "outer_fraction", false);
}

// ---------------------------------------------------------------------------
// precision

void run_precision(const Params& p, Context& ctx) {
  const double k = p.number("k", 100.0);
  const double c = p.number("c", 100.0);
  if (!(k >= 0.0)) p.fail("k", "must be non-negative");
  if (!(c > 1.0)) p.fail("c", "must exceed 1");
  const double value = required_initial_precision(k, c);
  ctx.metric("log10_required_precision", value);
  if (p.has("expected") && p.wants("expected")) {
    ctx.verdict(check_eq("log10_required_precision", value, p.number("expected", 0.0)));
  }
  std::vector<std::vector<std::string>> rows;
  const int steps = static_cast<int>(std::ceil(k));
  for (int i = 0; i <= steps; ++i) rows.push_back({std::to_string(i), num(required_initial_precision(i, c))});
  ctx.series("precision", "k,log10_required_precision", rows);
  ctx.plot("precision", "precision", "k", "log10_required_precision", false);
}

std::vector<std::string> keys_for(const std::string& experiment) {
  if (experiment == "simulate") return with_system({"t_end", "max_events", "oracle_dt", "write_events"});
  if (experiment == "reverse") return with_system({"t_rev", "exclude", "echo_tolerance", "wavelength"});
  if (experiment == "divergence") return with_system({"delta_b0", "n_max"});
  if (experiment == "wavepacket") {
    return with_system({"width0", "momentum", "angular_spread", "quantum_diffusion", "n_max", "strictness",
                        "amplification_samples"});
  }
  if (experiment == "phaseshift") {
    return {"ka", "k", "m_max", "b_fractions", "deflection_limit", "oracle_grid", "continuity_check"};
  }
  if (experiment == "overlap") {
    return {"n_discs", "delta", "width", "wavelength", "draws", "max_n", "max_delta", "superball_k"};
  }
  if (experiment == "diffract") {
    return with_system({"equilibrate_collisions", "n_samples", "directions", "q_points", "uniform_trials"});
  }
  if (experiment == "expansion") return with_system({"t_end_factor", "n_samples"});
  if (experiment == "precision") return {"k", "c", "expected"};
  throw ConfigError("unknown experiment '" + experiment + "'");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_csv_row(const std::string& line) { return split(line, ','); }

}  // namespace

ExperimentReport run(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  KeyValueFile kv = KeyValueFile::load(spec.config_path);
  if (spec.seed) kv.set("seed", std::to_string(*spec.seed));
  if (spec.ensemble) {
    if (*spec.ensemble < 1) throw ConfigError("ensemble must be at least 1");
    kv.set("ensemble", std::to_string(*spec.ensemble));
  }
  const Params params(kv, keys_for(spec.experiment));

  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw LabError("cannot create output directory " + spec.out_dir.string() + ": " + ec.message());

  ExperimentReport report;
  report.experiment = spec.experiment;
  json config = json::object();
  for (const auto& [k, v] : kv.entries()) config[k] = v.first;
  report.spec = {{"experiment", spec.experiment},
                 {"config_path", spec.config_path.generic_string()},
                 {"config", config},
                 {"seed", kv.get_uint("seed", 1)}};
  if (kv.has("ensemble")) report.spec["ensemble"] = kv.get_uint("ensemble", 1);

  Context ctx(spec.out_dir, report);
  const std::string& e = spec.experiment;
  if (e == "simulate") run_simulate(params, ctx);
  else if (e == "reverse") run_reverse(params, ctx);
  else if (e == "divergence") run_divergence(params, ctx);
  else if (e == "wavepacket") run_wavepacket(params, ctx);
  else if (e == "phaseshift") run_phaseshift(params, ctx, spec.config_path.parent_path());
  else if (e == "overlap") run_overlap(params, ctx);
  else if (e == "diffract") run_diffract(params, ctx);
  else if (e == "expansion") run_expansion_experiment(params, ctx);
  else if (e == "precision") run_precision(params, ctx);

  emit_plot_data(report, spec.out_dir);
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream out(spec.out_dir / "report.json", std::ios::binary);
  if (!out) throw LabError("cannot write report.json in " + spec.out_dir.string());
  out << report.to_json().dump(2) << '\n';
  return report;
}

void emit_plot_data(const ExperimentReport& report, const fs::path& out_dir) {
  if (report.series.empty()) throw LabError("emit_plot_data: report has no series");
  const fs::path plot_dir = out_dir / "plot";
  fs::create_directories(plot_dir);
  std::ofstream script(plot_dir / "plot.gp", std::ios::binary);
  script << "# gnuplot script; run from this directory\n";
  script << "set terminal pngcairo size 800,600\n";
  for (const auto& ps : report.plots) {
    const auto it = report.series.find(ps.series);
    if (it == report.series.end()) throw LabError("emit_plot_data: missing series '" + ps.series + "'");
    std::ifstream in(out_dir / it->second);
    if (!in) throw LabError("emit_plot_data: cannot read " + it->second);
    std::string line;
    std::getline(in, line);
    const auto header = read_csv_row(line);
    const auto col = [&](const std::string& name) {
      const auto pos = std::find(header.begin(), header.end(), name);
      if (pos == header.end()) throw LabError("emit_plot_data: no column '" + name + "' in " + it->second);
      return static_cast<std::size_t>(pos - header.begin());
    };
    const std::size_t cx = col(ps.x_column), cy = col(ps.y_column);
    std::ofstream dat(plot_dir / (ps.name + ".dat"), std::ios::binary);
    const std::string ylabel = ps.log_y ? "ln|" + ps.y_column + "|" : ps.y_column;
    dat << "# " << ps.x_column << ' ' << ylabel << '\n';
    while (std::getline(in, line)) {
      const auto f = read_csv_row(line);
      if (f.size() <= std::max(cx, cy)) continue;
      double y = std::strtod(f[cy].c_str(), nullptr);
      if (ps.log_y) {
        if (!(std::abs(y) > 0.0)) continue;
        y = std::log(std::abs(y));
      }
      if (!std::isfinite(y)) continue;
      dat << f[cx] << ' ' << num(y) << '\n';
    }
    script << "set output '" << ps.name << ".png'\n";
    script << "set xlabel '" << ps.x_column << "'\nset ylabel '" << ylabel << "'\n";
    script << "plot '" << ps.name << ".dat' using 1:2 with linespoints title '" << ps.name << "'\n";
  }
}

std::vector<SuiteEntry> load_suite(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read suite " + path.string());
  std::vector<SuiteEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string s; words >> s;) w.push_back(s);
    if (w.empty()) continue;
    if (w.size() < 3) throw ConfigError("expected: name experiment config [options]", line_no);
    SuiteEntry e;
    e.name = w[0];
    e.experiment = w[1];
    if (std::find(experiment_names().begin(), experiment_names().end(), e.experiment) == experiment_names().end()) {
      throw ConfigError("unknown experiment '" + e.experiment + "'", line_no);
    }
    e.config = w[2];
    if (e.config.is_relative()) e.config = path.parent_path() / e.config;
    for (std::size_t i = 3; i < w.size(); ++i) {
      const auto eq = w[i].find('=');
      if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + w[i] + "'", line_no);
      const std::string key = w[i].substr(0, eq);
      const std::string value = w[i].substr(eq + 1);
      try {
        if (key == "seed") e.seed = std::stoull(value);
        else if (key == "ensemble") e.ensemble = std::stoull(value);
        else if (key == "repeat") e.repeat = std::max<std::size_t>(1, std::stoull(value));
        else throw ConfigError("unknown option '" + key + "'", line_no);
      } catch (const std::logic_error&) {
        throw ConfigError("bad value for '" + key + "'", line_no);
      }
    }
    for (const auto& prev : entries) {
      if (prev.name == e.name) throw ConfigError("duplicate entry name '" + e.name + "'", line_no);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string compare_runs(const fs::path& a, const fs::path& b) {
  auto strip = [](const fs::path& p) {
    json j = json::parse(slurp(p / "report.json"));
    j.erase(kWallClockField);
    return j.dump();
  };
  if (strip(a) != strip(b)) return "report.json differs";
  std::vector<fs::path> files_a, files_b;
  for (const auto& f : fs::recursive_directory_iterator(a)) {
    if (f.is_regular_file()) files_a.push_back(fs::relative(f.path(), a));
  }
  for (const auto& f : fs::recursive_directory_iterator(b)) {
    if (f.is_regular_file()) files_b.push_back(fs::relative(f.path(), b));
  }
  std::sort(files_a.begin(), files_a.end());
  std::sort(files_b.begin(), files_b.end());
  if (files_a != files_b) return "file sets differ";
  for (const auto& f : files_a) {
    if (f == "report.json") continue;
    if (slurp(a / f) != slurp(b / f)) return f.generic_string() + " differs";
  }
  return {};
}

std::vector<SuiteOutcome> run_suite(const fs::path& suite, const fs::path& out_dir) {
  const auto entries = load_suite(suite);
  std::vector<SuiteOutcome> outcomes;
  for (const auto& e : entries) {
    SuiteOutcome o;
    o.name = e.name;
    std::vector<fs::path> dirs;
    try {
      for (std::size_t r = 0; r < e.repeat; ++r) {
        const fs::path dir = e.repeat == 1 ? out_dir / e.name : out_dir / e.name / ("run" + std::to_string(r + 1));
        fs::remove_all(dir);
        const ExperimentReport rep = run({e.experiment, e.config, dir, e.seed, e.ensemble});
        o.exit_code = std::max(o.exit_code, rep.exit_code());
        dirs.push_back(dir);
      }
      for (std::size_t r = 1; r < dirs.size(); ++r) {
        const std::string diff = compare_runs(dirs.front(), dirs[r]);
        if (!diff.empty()) {
          o.deterministic = false;
          o.message = "repeat " + std::to_string(r + 1) + ": " + diff;
          o.exit_code = std::max(o.exit_code, 2);
        }
      }
    } catch (const std::exception& ex) {
      o.exit_code = 1;
      o.message = ex.what();
    }
    outcomes.push_back(o);
  }
  return outcomes;
}

int aggregate_exit_code(const std::vector<SuiteOutcome>& outcomes) {
  int code = 0;
  for (const auto& o : outcomes) {
    if (o.exit_code == 1) return 1;
    code = std::max(code, o.exit_code);
  }
  return code;
}

}  // namespace hdlab
