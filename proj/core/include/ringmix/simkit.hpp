#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ringmix/cost_model.hpp"
#include "ringmix/mixing.hpp"
#include "ringmix/objectives.hpp"

namespace ringmix {

enum class Strategy {
  SPSGD,         // gradient allreduce, one shared model
  DPSGD_FIXED,   // fixed ring, gradients at current weights
  ADPSGD_FIXED,  // fixed ring, gradients one step stale
  RAND_PSGD,     // ring re-drawn from a shared-seed permutation every iteration
  D1D,           // model allreduce overlapped with one-step-stale gradients
};

enum class Staleness { Sync, Async };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view to_string(Staleness s);
std::optional<Staleness> parse_staleness(std::string_view name);

// Whether the strategy synchronises every learner on a global barrier.
bool uses_global_barrier(Strategy s);
// Second-largest eigenvalue magnitude of the strategy's per-iteration mixing matrix.
double mixing_rho(Strategy s, std::size_t learners);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

inline constexpr double kDivergenceThreshold = 1e12;

struct LearnerState {
  std::uint64_t stream_id = 0;
  double compute_time_s = 0.0;  // accumulated simulated compute
};

/// State of all L learners at iteration k.
///
/// `weights` is W_k; `previous` is W_{k-1}, the gradient-evaluation point of
/// the stale strategies. At k == 0 both hold W_0.
struct ClusterState {
  WeightsMatrix weights;
  WeightsMatrix previous;
  std::vector<LearnerState> learners;
  std::uint64_t iteration = 0;
  double sim_time_s = 0.0;

  static ClusterState initial(WeightsMatrix w0, std::uint64_t seed);

  std::size_t learner_count() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t dimension() const { return static_cast<std::size_t>(weights.rows()); }
};

struct StepContext {
  const GradientOracle& oracle;
  double lr = 0.0;
  std::size_t batch_size = 1;   // per learner
  std::uint64_t seed = 0;       // gradient streams
  bool sharded_data = false;    // learner l samples only shard l of the dataset
};

struct StepInfo {
  double post_mix_consensus = 0.0;  // consensus distance of W_k T
  Eigen::VectorXd mean_gradient;    // (1/L) sum_l g_l
};

// Minibatch of learner l at iteration k.
BatchDescriptor learner_batch(const StepContext& ctx, std::size_t learner, std::uint64_t iteration,
                              std::size_t learners);

StepInfo step_spsgd(ClusterState& state, const StepContext& ctx);
StepInfo step_dpsgd_fixed(ClusterState& state, const StepContext& ctx);
StepInfo step_adpsgd_fixed(ClusterState& state, const StepContext& ctx);
StepInfo step_rand_psgd(ClusterState& state, const StepContext& ctx, std::uint64_t shared_seed,
                        Staleness staleness);
StepInfo step_d1d(ClusterState& state, const StepContext& ctx);

// Mixing matrix RAND_PSGD uses at iteration k; every learner derives the same one.
MixingMatrix rand_psgd_mixing(std::size_t learners, std::uint64_t shared_seed, std::uint64_t iteration);

/// Samples per-learner compute times for the current iteration and returns
/// the iteration duration. Barrier strategies (S-PSGD, D1D) wait for the
/// slowest learner and then run an allreduce bounded by the slowest link;
/// ring strategies overlap each learner's compute with its own exchange and
/// report the mean per-learner duration.
double advance_clock(ClusterState& state, Strategy strategy, const CostModel& cost,
                     std::uint64_t seed);

// Same model evaluated at mean compute times (deterministic closed form).
double expected_iteration_duration(Strategy strategy, const CostModel& cost, std::size_t learners);

struct TraceRecord {
  std::uint64_t iteration = 0;
  double sim_time_s = 0.0;
  double mean_loss = 0.0;       // mean over learners of loss at own weights
  double avg_model_loss = 0.0;  // loss at the column mean
  double consensus_dist = 0.0;
  double rho = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct TrainingConfig {
  std::size_t learners = 1;
  std::size_t iterations = 100;
  double lr = 0.05;
  std::size_t warmup_iterations = 0;  // linear ramp to lr
  std::size_t batch_size = 32;        // per learner
  std::uint64_t seed = 0;             // gradient, clock and permutation streams
  std::uint64_t init_seed = 0;        // initial weights
  Staleness staleness = Staleness::Async;  // RAND_PSGD only
  bool sharded_data = false;
  std::size_t log_interval = 1;
  double init_scale = 1.0;   // shared starting point ~ init_scale * N(0, I)
  double init_spread = 0.0;  // per-learner offset ~ init_spread * N(0, I)
  CostModel cost;
};

struct TrainingResult {
  std::vector<TraceRecord> records;
  bool diverged = false;
  std::string failure;
  std::size_t completed_iterations = 0;
  double total_time_s = 0.0;
  double max_mass_drift = 0.0;           // max |mean(W_{k+1}) - (mean(W_k) - lr * g_bar)|
  double max_post_mix_consensus = 0.0;   // max consensus distance right after mixing
};

double learning_rate(const TrainingConfig& config, std::uint64_t iteration);

WeightsMatrix initial_weights(std::size_t dimension, const TrainingConfig& config);

TrainingResult run_training(Strategy strategy, const GradientOracle& oracle,
                            const TrainingConfig& config);
TrainingResult run_training(Strategy strategy, const GradientOracle& oracle,
                            const TrainingConfig& config, WeightsMatrix w0);

TraceRecord measure(const ClusterState& state, const GradientOracle& oracle, double rho);

}  // namespace ringmix
