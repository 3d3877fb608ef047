// Acceptance criteria, one pass/fail line each.
//
//   acceptance            run every criterion
//   acceptance 3 5        run the listed criteria
//
// Exit status is 0 iff every selected criterion passed.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hdlab/chaos_lab.hpp"
#include "hdlab/cli_runner.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using hdlab::ExperimentReport;

namespace {

const fs::path kConfigs = fs::path(HDLAB_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what, double value, const std::string& bound) {
    std::ostringstream os;
    os.precision(4);
    os << what << "=" << value << " " << bound;
    if (!detail.empty()) detail += "; ";
    detail += os.str() + (ok ? "" : " [violated]");
    pass = pass && ok;
  }
  void le(const std::string& what, double v, double hi) {
    check(v <= hi, what, v, "<= " + num(hi));
  }
  void ge(const std::string& what, double v, double lo) {
    check(v >= lo, what, v, ">= " + num(lo));
  }
  void in(const std::string& what, double v, double lo, double hi) {
    check(v >= lo && v <= hi, what, v, "in [" + num(lo) + ", " + num(hi) + "]");
  }
  static std::string num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
  }
};

class Runs {
 public:
  Runs() : dir_("acceptance") {}

  const ExperimentReport& get(const std::string& experiment, const std::string& config) {
    auto it = cache_.find(config);
    if (it == cache_.end()) {
      const fs::path out = dir_.path() / config;
      it = cache_.emplace(config, hdlab::run({experiment, kConfigs / (config + ".cfg"), out, {}, {}})).first;
    }
    return it->second;
  }

  fs::path scratch(const std::string& name) const { return dir_.path() / name; }

 private:
  hdlab::testing::TempDir dir_;
  std::map<std::string, ExperimentReport> cache_;
};

double metric(const ExperimentReport& r, const std::string& name) {
  const auto it = r.metrics.find(name);
  if (it == r.metrics.end()) throw std::runtime_error("report " + r.experiment + " lacks metric " + name);
  return it->second;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome(Runs&)> run;
};

const std::vector<std::pair<std::string, std::string>> kSuite{
    {"simulate", "conservation"}, {"simulate", "oracle"},          {"reverse", "ballistic"},
    {"reverse", "echo"},          {"reverse", "echo_growth"},      {"reverse", "single_disc"},
    {"divergence", "divergence"}, {"divergence", "missing_partner"}, {"wavepacket", "wavepacket"},
    {"precision", "precision"},   {"phaseshift", "phaseshift"},    {"overlap", "overlap"},
    {"expansion", "expansion"},   {"diffract", "diffract"},
};

std::vector<Criterion> criteria() {
  return {
      {1, "conservation",
       [](Runs& runs) {
         const auto& r = runs.get("simulate", "conservation");
         Outcome o;
         o.ge("events", metric(r, "events"), 1e5);
         o.le("energy_drift", metric(r, "energy_relative_drift"), 1e-9);
         o.le("pair_momentum_change", metric(r, "max_pair_momentum_change"), 1e-12);
         return o;
       }},
      {2, "oracle_equivalence",
       [](Runs& runs) {
         const auto& r = runs.get("simulate", "oracle");
         Outcome o;
         o.in("events", metric(r, "events"), 20, 20);
         o.in("oracle_events", metric(r, "oracle_events"), 20, 20);
         o.le("max_deviation/a", metric(r, "oracle_max_position_deviation"), 1e-4);
         return o;
       }},
      {3, "echo_success_then_failure",
       [](Runs& runs) {
         Outcome o;
         const auto& echo = runs.get("reverse", "echo");
         o.le("collisions_per_disc", metric(echo, "median_collisions_per_disc@200"), 5.0);
         o.le("median_max_error/a", metric(echo, "median_max_error@200"), 1e-6);
         const auto& growth = runs.get("reverse", "echo_growth");
         const double R = metric(growth, "enclosure_radius");
         std::vector<double> rms;
         for (double t = 5; t <= 640; t *= 2) rms.push_back(metric(growth, "median_rms_error@" + Outcome::num(t)));
         double drops = 0;
         for (std::size_t i = 0; i + 1 < rms.size(); ++i) {
           if (rms[i] < 0.1 * R && rms[i + 1] < rms[i]) drops += 1;
         }
         o.le("growth_violations", drops, 0);
         o.in("saturated_rms/R", rms.back() / R, 0.1, 2.0);
         return o;
       }},
      {4, "single_disc_non_reversal",
       [](Runs& runs) {
         const auto& r = runs.get("reverse", "single_disc");
         Outcome o;
         o.ge("collisions_per_disc", metric(r, "median_collisions_per_disc@700"), 10.0);
         o.ge("fraction_rms>=0.1R", metric(r, "fraction_rms_above_0.1R@700"), 0.9);
         o.in("seeds", r.spec["ensemble"].get<double>(), 50, 50);
         return o;
       }},
      {5, "amplification_law",
       [](Runs& runs) {
         const auto& r = runs.get("divergence", "divergence");
         const double ln = std::log(10.0);
         Outcome o;
         o.in("median_ratio", metric(r, "median_ratio@1e-12"), 50.0, 200.0);
         o.in("median_slope/ln(l/a)", metric(r, "median_slope@1e-12") / ln, 1.5, 3.0);
         o.in("seeds", r.spec["ensemble"].get<double>(), 100, 100);
         return o;
       }},
      {6, "missing_partners",
       [](Runs& runs) {
         const auto& r = runs.get("divergence", "missing_partner");
         Outcome o;
         for (const char* d : {"0.0001", "1e-06", "1e-08"}) {
           const double pred = metric(r, std::string("predicted_n_miss@") + d);
           o.in(std::string("n_miss@") + d, metric(r, std::string("median_n_miss@") + d), pred - 2, pred + 2);
         }
         return o;
       }},
      {7, "required_precision",
       [](Runs&) {
         Outcome o;
         const double v = hdlab::required_initial_precision(100, 100);
         o.check(v == -200.0, "log10(db0/a)", v, "== -200");
         return o;
       }},
      {8, "n_crit",
       [](Runs& runs) {
         const auto& r = runs.get("wavepacket", "wavepacket");
         Outcome o;
         o.in("predicted_n_crit", metric(r, "predicted_n_crit"), 3, 3);
         o.ge("hit_fraction", metric(r, "n_crit_hit_fraction"), 0.8);
         o.in("scenes", r.spec["ensemble"].get<double>(), 10, 10);
         return o;
       }},
      {9, "amplification_form",
       [](Runs& runs) {
         const auto& r = runs.get("wavepacket", "wavepacket");
         Outcome o;
         o.le("max_rel_error", metric(r, "amplification_max_relative_error"), 0.05);
         return o;
       }},
      {10, "phase_shifts",
       [](Runs& runs) {
         const auto& r = runs.get("phaseshift", "phaseshift");
         Outcome o;
         o.le("bessel_oracle_error", metric(r, "bessel_oracle_max_error"), 1e-10);
         o.le("wronskian_error", metric(r, "wronskian_max_relative_error"), 1e-10);
         o.le("max|delta_m| beyond m_conv", metric(r, "max_abs_delta_beyond_converged_order"), 1e-8);
         return o;
       }},
      {11, "semiclassical_correspondence",
       [](Runs& runs) {
         const auto& r = runs.get("phaseshift", "phaseshift");
         Outcome o;
         double worst = 0.0;
         for (const char* f : {"0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7"}) {
           worst = std::max(worst, metric(r, std::string("deflection_relative_error@") + f));
         }
         o.le("max_rel_error(|b|<=0.7a)", worst, 0.05);
         return o;
       }},
      {12, "overlap_arithmetic",
       [](Runs& runs) {
         const auto& r = runs.get("overlap", "overlap");
         Outcome o;
         o.le("draws_max_rel_diff", metric(r, "draws_max_relative_difference"), 0.01);
         o.le("N100_exact_vs_e^-1", metric(r, "uniform_exact_vs_target"), 0.01);
         return o;
       }},
      {13, "expansion_collision_counts",
       [](Runs& runs) {
         const auto& r = runs.get("expansion", "expansion");
         const double ratio = metric(r, "R_over_measured_mean_free_path");
         Outcome o;
         o.in("k_bar", metric(r, "mean_collisions_per_disc"), ratio, ratio * ratio);
         return o;
       }},
      {14, "diffraction_probe",
       [](Runs& runs) {
         const auto& r = runs.get("diffract", "diffract");
         Outcome o;
         o.ge("snapshot_max_z", metric(r, "snapshot_max_z"), 3.0);
         o.ge("uniform_indistinguishable", metric(r, "uniform_indistinguishable_fraction"), 0.95);
         return o;
       }},
      {15, "determinism",
       [](Runs& runs) {
         Outcome o;
         double differing = 0;
         std::string first;
         for (const auto& [experiment, config] : kSuite) {
           std::string diff;
           for (int rep = 0; rep < 2; ++rep) {
             const fs::path out = runs.scratch("det_" + config + std::to_string(rep));
             hdlab::run({experiment, kConfigs / (config + ".cfg"), out, {}, {}});
           }
           diff = hdlab::compare_runs(runs.scratch("det_" + config + "0"), runs.scratch("det_" + config + "1"));
           if (!diff.empty()) {
             differing += 1;
             if (first.empty()) first = config + ": " + diff;
           }
         }
         o.le("suites_differing", differing, 0);
         if (!first.empty()) o.detail += " (" + first + ")";
         return o;
       }},
  };
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  Runs runs;
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run(runs);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    std::printf("[%s] %02d %-30s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
