#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ringmix/config.hpp"
#include "ringmix/simkit.hpp"

namespace ringmix {

inline constexpr std::string_view kTraceHeader =
    "iter,sim_time_s,mean_loss,avg_model_loss,consensus_dist,rho";

// Shortest representation that round-trips; identical across runs.
std::string format_double(double v);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);

std::string trace_filename(Strategy strategy, std::size_t learners, std::size_t trial);

struct RunSummary {
  Strategy strategy = Strategy::SPSGD;
  std::size_t learners = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  double final_loss = 0.0;  // mean_loss of the last record
  double total_time_s = 0.0;
  std::string file;
};

struct CellSummary {
  Strategy strategy = Strategy::SPSGD;
  std::size_t learners = 0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double median_final_loss = 0.0;
  double iqr_final_loss = 0.0;
  double median_total_time_s = 0.0;
};

struct SweepResult {
  std::vector<RunSummary> runs;    // ordered by (strategy, L, trial)
  std::vector<CellSummary> cells;  // ordered by (strategy, L)
  bool any_diverged() const;
  const CellSummary* cell(Strategy strategy, std::size_t learners) const;
};

/// Runs every (strategy, L, trial) combination and writes into `out_dir`:
///   config.yaml   resolved configuration
///   <STRATEGY>_L<L>_t<trial>.csv   one trace per run
///   runs.csv      one row per run, naming its trace file
///   summary.csv   median / IQR of final loss per (strategy, L)
SweepResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      std::ostream* progress = nullptr);

// Linear-interpolation quantile of a non-empty sample.
double quantile(std::vector<double> values, double q);

}  // namespace ringmix
