// ringmix: decentralized-SGD mixing simulator and spectral bound checker.
//
//   ringmix run --config sweep.yaml [--out DIR] [--seed N] [--trials N] [--quiet]
//   ringmix verify-bounds [--learners 3-64] [--kmax 30] [--trials 1000] [--seed N] [--out DIR]
//   ringmix spectral --learners 4,8,16,32
//
// Exit codes: 0 success, 1 invalid configuration, 2 divergence in a sweep
// cell, 3 bound-verification failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ringmix/bounds.hpp"
#include "ringmix/config.hpp"
#include "ringmix/spectral.hpp"
#include "ringmix/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitBoundFailure = 3;

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string learners = "3-64";
  std::size_t k_max = 30;
  std::optional<double> sigmas;
  bool quiet = false;
};

int cmd_run(const Options& opts) {
  ringmix::ExperimentConfig config = ringmix::parse_config_file(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.trials) config.trials = *opts.trials;
  if (opts.out) config.output = *opts.out;
  ringmix::validate_config(config);

  const ringmix::SweepResult result =
      ringmix::run_sweep(config, config.output, opts.quiet ? nullptr : &std::cerr);
  if (!opts.quiet) {
    std::cout << "strategy,learners,runs,failed,median_final_loss,iqr_final_loss,median_total_time_s\n";
    for (const auto& c : result.cells) {
      std::cout << ringmix::to_string(c.strategy) << ',' << c.learners << ',' << c.runs << ','
                << c.failed << ',' << ringmix::format_double(c.median_final_loss) << ','
                << ringmix::format_double(c.iqr_final_loss) << ','
                << ringmix::format_double(c.median_total_time_s) << '\n';
    }
  }
  return result.any_diverged() ? kExitDivergence : kExitOk;
}

int cmd_verify_bounds(const Options& opts) {
  const auto learners = ringmix::parse_learner_list(opts.learners);
  for (std::size_t l : learners) {
    if (l < 3) throw ringmix::ConfigError("learners", 0, "bound verification needs L >= 3");
  }
  const ringmix::BoundReport report = ringmix::verify_bounds(
      learners, opts.k_max, opts.trials.value_or(1000), opts.seed.value_or(1), opts.sigmas);
  if (!opts.quiet) {
    std::cout << "# frobenius threshold: " << ringmix::format_double(report.frobenius_sigmas)
              << " standard errors\n";
    ringmix::write_bound_report(std::cout, report);
  }
  if (opts.out) {
    std::filesystem::create_directories(*opts.out);
    std::ofstream file(std::filesystem::path(*opts.out) / "bounds.csv", std::ios::binary);
    ringmix::write_bound_report(file, report);
  }
  if (!report.passed()) {
    std::cerr << "bound verification FAILED\n";
    return kExitBoundFailure;
  }
  return kExitOk;
}

int cmd_spectral(const Options& opts) {
  std::cout << "L,rho,spectral_gap\n";
  for (std::size_t l : ringmix::parse_learner_list(opts.learners)) {
    const auto report = ringmix::spectral_rho(ringmix::build_ring_matrix(l));
    std::cout << l << ',' << ringmix::format_double(report.rho) << ','
              << ringmix::format_double(report.spectral_gap) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized SGD mixing simulator"};
  app.require_subcommand(1);
  Options opts;

  auto* run = app.add_subcommand("run", "Run a training sweep from a config file");
  run->add_option("--config", opts.config, "Sweep configuration (YAML)")->required();
  run->add_option("--out", opts.out, "Output directory (overrides config)");
  run->add_option("--seed", opts.seed, "Master seed (overrides config)");
  run->add_option("--trials", opts.trials, "Seeds per cell (overrides config)");
  run->add_flag("--quiet", opts.quiet, "Suppress progress and summary output");

  auto* bounds = app.add_subcommand("verify-bounds", "Check consensus-rate bounds");
  bounds->add_option("--learners", opts.learners, "Learner counts, e.g. 3-64 or 4,8,16");
  bounds->add_option("--kmax", opts.k_max, "Largest step count");
  bounds->add_option("--trials", opts.trials, "Monte-Carlo trials per L (default 1000)");
  bounds->add_option("--seed", opts.seed, "Master seed");
  bounds->add_option("--out", opts.out, "Directory for bounds.csv");
  bounds->add_option("--sigmas", opts.sigmas,
                     "Per-comparison z threshold for the Frobenius check "
                     "(default: Bonferroni-corrected 3 sigma over all L x k comparisons)");
  bounds->add_flag("--quiet", opts.quiet, "Only report failures");

  auto* spectral = app.add_subcommand("spectral", "Print rho and spectral gap of the ring");
  spectral->add_option("--learners", opts.learners, "Learner counts, e.g. 3-64 or 4,8,16")->required();
  spectral->add_flag("--quiet", opts.quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  try {
    if (*run) return cmd_run(opts);
    if (*bounds) return cmd_verify_bounds(opts);
    return cmd_spectral(opts);
  } catch (const ringmix::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
}
