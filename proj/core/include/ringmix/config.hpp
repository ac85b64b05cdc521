#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ringmix/cost_model.hpp"
#include "ringmix/objectives.hpp"
#include "ringmix/simkit.hpp"

namespace ringmix {

// Invalid configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class BatchMode { PerLearnerFixed, TotalFixed };
enum class DataMode { Shared, Sharded };

struct OracleSpec {
  ObjectiveKind kind = ObjectiveKind::Quadratic;
  std::size_t dimension = 10;
  double condition_number = 10.0;  // quadratic
  double noise_scale = 1.0;        // quadratic
  std::size_t samples = 1000;      // logistic
  double separation = 2.0;         // logistic

  bool operator==(const OracleSpec&) const = default;
};

struct StragglerSpec {
  std::size_t learner = 0;
  double slowdown = 1.0;
  bool operator==(const StragglerSpec&) const = default;
};

struct SlowLinkSpec {
  std::size_t learner = 0;
  double bandwidth_bytes_per_s = 1.0;
  bool operator==(const SlowLinkSpec&) const = default;
};

struct CostSpec {
  double message_size_bytes = 165e6;
  double bandwidth_bytes_per_s = 25e9;
  double compute_log_mean = -2.302585092994046;  // log(0.1 s)
  double compute_log_sigma = 0.1;
  std::vector<StragglerSpec> stragglers;
  std::vector<SlowLinkSpec> slow_links;

  CostModel model(std::size_t learners) const;
  bool operator==(const CostSpec&) const = default;
};

struct ExperimentConfig {
  std::vector<Strategy> strategies;
  std::vector<std::size_t> learners;
  std::size_t iterations = 0;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  double lr = 0.05;
  std::size_t warmup_iterations = 0;
  std::size_t log_interval = 10;
  Staleness staleness = Staleness::Async;
  DataMode data = DataMode::Shared;
  BatchMode batch_mode = BatchMode::PerLearnerFixed;
  std::size_t batch_size = 32;
  OracleSpec oracle;
  double init_scale = 1.0;
  double init_spread = 0.0;
  CostSpec cost;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// YAML text with every default resolved; parse_config_text(echo_config(c)) == c.
std::string echo_config(const ExperimentConfig& config);

// Re-checks every range constraint (used after CLI overrides).
void validate_config(const ExperimentConfig& config);

std::size_t per_learner_batch(const ExperimentConfig& config, std::size_t learners);

std::unique_ptr<GradientOracle> make_oracle(const OracleSpec& spec, std::uint64_t master_seed);

// Seeds: gradient/clock/permutation streams keyed by (master, L, trial);
// initial weights keyed by (master, trial) so every L and strategy of one
// trial starts from the same point.
TrainingConfig training_config(const ExperimentConfig& config, std::size_t learners,
                               std::size_t trial);

// "3-64", "4,8,16" or a mix such as "3-6,16". Throws std::invalid_argument.
std::vector<std::size_t> parse_learner_list(std::string_view text);

std::string_view to_string(BatchMode mode);
std::string_view to_string(DataMode mode);

}  // namespace ringmix
