#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hdlab {

const std::vector<std::string>& experiment_names();

struct ExperimentSpec {
  std::string experiment;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> ensemble;
};

/// A pass/fail check against a named threshold. `op` is one of <=, >=, ==, in.
struct Verdict {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string op;
  double threshold = 0.0;
  std::optional<double> upper;  // upper bound for op "in"
};

Verdict check_le(std::string name, double value, double threshold);
Verdict check_ge(std::string name, double value, double threshold);
Verdict check_eq(std::string name, double value, double expected);
Verdict check_in(std::string name, double value, double lo, double hi);

/// Line plot of column y against column x of a CSV series.
struct PlotSpec {
  std::string name;
  std::string series;  // key into ExperimentReport::series
  std::string x_column;
  std::string y_column;
  bool log_y = false;  // plot ln|y|
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json spec;                          // echo: config entries, seed, ensemble
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> series;   // name -> file relative to the output directory
  std::vector<Verdict> verdicts;
  std::vector<PlotSpec> plots;
  double wall_clock_seconds = 0.0;

  bool passed() const;
  int exit_code() const { return passed() ? 0 : 2; }
  nlohmann::json to_json(bool include_wall_clock = true) const;
};

/// Name of the report field excluded from determinism comparisons.
inline constexpr const char* kWallClockField = "wall_clock_seconds";

/// Runs the experiment, writes report.json, CSV series and plot data into spec.out_dir.
ExperimentReport run(const ExperimentSpec& spec);

/// Writes plot/<name>.dat files and plot/plot.gp under out_dir.
void emit_plot_data(const ExperimentReport& report, const std::filesystem::path& out_dir);

/// One line of a verify suite: name experiment config [seed=N] [ensemble=K] [repeat=R].
struct SuiteEntry {
  std::string name;
  std::string experiment;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> ensemble;
  std::size_t repeat = 1;
};

std::vector<SuiteEntry> load_suite(const std::filesystem::path& path);

struct SuiteOutcome {
  std::string name;
  int exit_code = 0;
  bool deterministic = true;  // only meaningful when repeat > 1
  std::string message;
};

/// Runs every entry under out_dir/<name>; repeats are compared byte for byte
/// (report.json without the wall-clock field, every series file).
std::vector<SuiteOutcome> run_suite(const std::filesystem::path& suite, const std::filesystem::path& out_dir);

/// Aggregate exit code: 1 if any entry errored, else 2 if any verdict failed or
/// a repeat differed, else 0.
int aggregate_exit_code(const std::vector<SuiteOutcome>& outcomes);

/// Compares two run directories. Returns an empty string when identical.
std::string compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace hdlab
