// lab: run one experiment or a verification suite.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "hdlab/cli_runner.hpp"
#include "hdlab/errors.hpp"

namespace {

void print_report(const hdlab::ExperimentReport& r) {
  for (const auto& v : r.verdicts) {
    if (v.upper) {
      std::printf("%-4s %-44s %.6g in [%.6g, %.6g]\n", v.passed ? "PASS" : "FAIL", v.name.c_str(), v.value,
                  v.threshold, *v.upper);
    } else {
      std::printf("%-4s %-44s %.6g %s %.6g\n", v.passed ? "PASS" : "FAIL", v.name.c_str(), v.value, v.op.c_str(),
                  v.threshold);
    }
  }
  std::printf("%s: %s (%.2f s)\n", r.experiment.c_str(), r.passed() ? "passed" : "failed", r.wall_clock_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-disc irreversibility lab"};
  app.require_subcommand(1);

  hdlab::ExperimentSpec spec;
  std::uint64_t seed = 0;
  std::size_t ensemble = 0;
  for (const auto& name : hdlab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", spec.config_path, "key=value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", spec.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--ensemble", ensemble, "override the ensemble size")->check(CLI::PositiveNumber);
  }
  std::filesystem::path suite;
  std::filesystem::path suite_out = "lab_verify";
  auto* verify = app.add_subcommand("verify", "run every entry of a suite file");
  verify->add_option("--suite", suite, "suite file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", suite_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (verify->parsed()) {
      const auto outcomes = hdlab::run_suite(suite, suite_out);
      for (const auto& o : outcomes) {
        const char* status = o.exit_code == 0 ? "PASS" : o.exit_code == 2 ? "FAIL" : "ERROR";
        std::printf("%-5s %s%s%s\n", status, o.name.c_str(), o.message.empty() ? "" : ": ", o.message.c_str());
      }
      return hdlab::aggregate_exit_code(outcomes);
    }
    for (const auto* sub : app.get_subcommands()) spec.experiment = sub->get_name();
    const auto* sub = app.get_subcommand(spec.experiment);
    if (sub->count("--seed") > 0) spec.seed = seed;
    if (sub->count("--ensemble") > 0) spec.ensemble = ensemble;
    const hdlab::ExperimentReport report = hdlab::run(spec);
    print_report(report);
    return report.exit_code();
  } catch (const hdlab::LabError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
