#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "exclusim/checks.hpp"
#include "exclusim/error.hpp"
#include "exclusim/experiment.hpp"
#include "exclusim/io.hpp"

namespace {

constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo experiments for the tagged symmetric exclusion process"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment file or re-run a JSON sidecar");
  std::string file;
  std::optional<int> workers;
  std::optional<std::string> out;
  run->add_option("file", file, "Experiment JSON or sidecar")->required();
  run->add_option("--workers", workers, "Worker threads (overrides the file)")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory (overrides the file)");

  auto* checks = app.add_subcommand("checks", "Run the property suite");
  bool quick = false;
  std::uint64_t seed = 1;
  checks->add_flag("--quick", quick, "Smaller statistical and exhaustive checks");
  checks->add_option("--seed", seed, "Master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (*run) {
      exclusim::RunOptions opts;
      opts.workers = workers;
      if (out) opts.out_dir = *out;
      const auto r = exclusim::run_experiment_file(file, opts);
      std::cout << r.message << "\n" << r.csv.string() << "\n" << r.sidecar.string() << "\n";
      if (r.exit_code != 0) std::cerr << "exclusim: experiment checks failed\n";
      return r.exit_code;
    }
    std::size_t failed = 0;
    const auto results = exclusim::run_checks(quick, seed);
    for (const auto& c : results) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << exclusim::format_double(c.value);
      if (!c.detail.empty()) std::cout << "  " << c.detail;
      std::cout << "\n";
      if (!c.passed) ++failed;
    }
    std::cout << (results.size() - failed) << "/" << results.size() << " checks passed\n";
    return failed ? exit_failure : 0;
  } catch (const exclusim::ParseError& e) {
    std::cerr << "exclusim: " << e.what() << "\n";
    return exit_usage;
  } catch (const exclusim::Error& e) {
    std::cerr << "exclusim: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "exclusim: " << e.what() << "\n";
    return exit_usage;
  }
}
