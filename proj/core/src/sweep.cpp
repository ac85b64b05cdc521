#include "ringmix/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace ringmix {
namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : records) {
    out << r.iteration << ',' << format_double(r.sim_time_s) << ',' << format_double(r.mean_loss)
        << ',' << format_double(r.avg_model_loss) << ',' << format_double(r.consensus_dist) << ','
        << format_double(r.rho) << '\n';
  }
}

std::string trace_filename(Strategy strategy, std::size_t learners, std::size_t trial) {
  char trial_buf[16];
  std::snprintf(trial_buf, sizeof(trial_buf), "%03zu", trial);
  return std::string(to_string(strategy)) + "_L" + std::to_string(learners) + "_t" + trial_buf + ".csv";
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

bool SweepResult::any_diverged() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunSummary& r) { return r.diverged; });
}

const CellSummary* SweepResult::cell(Strategy strategy, std::size_t learners) const {
  for (const CellSummary& c : cells) {
    if (c.strategy == strategy && c.learners == learners) return &c;
  }
  return nullptr;
}

SweepResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      std::ostream* progress) {
  validate_config(config);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "config.yaml", echo_config(config));

  const auto oracle = make_oracle(config.oracle, config.seed);
  SweepResult result;

  for (Strategy strategy : config.strategies) {
    for (std::size_t learners : config.learners) {
      CellSummary cell;
      cell.strategy = strategy;
      cell.learners = learners;
      std::vector<double> losses, times;
      for (std::size_t trial = 0; trial < config.trials; ++trial) {
        const TrainingConfig tc = training_config(config, learners, trial);
        const TrainingResult run = run_training(strategy, *oracle, tc);

        RunSummary summary;
        summary.strategy = strategy;
        summary.learners = learners;
        summary.trial = trial;
        summary.seed = tc.seed;
        summary.diverged = run.diverged;
        summary.final_loss = run.diverged ? std::nan("") : run.records.back().mean_loss;
        summary.total_time_s = run.total_time_s;
        summary.file = trace_filename(strategy, learners, trial);

        std::ofstream out(out_dir / summary.file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (out_dir / summary.file).string());
        write_trace_csv(out, run.records);

        ++cell.runs;
        if (run.diverged) {
          ++cell.failed;
        } else {
          losses.push_back(summary.final_loss);
          times.push_back(summary.total_time_s);
        }
        if (progress) {
          *progress << summary.file << (run.diverged ? " diverged" : " final_loss=")
                    << (run.diverged ? "" : format_double(summary.final_loss)) << '\n';
        }
        result.runs.push_back(std::move(summary));
      }
      cell.median_final_loss = quantile(losses, 0.5);
      cell.iqr_final_loss = quantile(losses, 0.75) - quantile(losses, 0.25);
      cell.median_total_time_s = quantile(times, 0.5);
      result.cells.push_back(cell);
    }
  }

  std::ofstream runs(out_dir / "runs.csv", std::ios::binary);
  runs << "strategy,learners,trial,seed,status,final_loss,total_time_s,file\n";
  for (const RunSummary& r : result.runs) {
    runs << to_string(r.strategy) << ',' << r.learners << ',' << r.trial << ',' << r.seed << ','
         << (r.diverged ? "diverged" : "ok") << ',' << format_double(r.final_loss) << ','
         << format_double(r.total_time_s) << ',' << r.file << '\n';
  }
  std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
  summary << "strategy,learners,runs,failed,median_final_loss,iqr_final_loss,median_total_time_s\n";
  for (const CellSummary& c : result.cells) {
    summary << to_string(c.strategy) << ',' << c.learners << ',' << c.runs << ',' << c.failed << ','
            << format_double(c.median_final_loss) << ',' << format_double(c.iqr_final_loss) << ','
            << format_double(c.median_total_time_s) << '\n';
  }
  return result;
}

}  // namespace ringmix
