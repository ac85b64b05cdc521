#include "ringmix/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ringmix/seeding.hpp"
#include "ringmix/spectral.hpp"

namespace ringmix {
namespace {

bool needs_ring(Strategy s) {
  return s == Strategy::DPSGD_FIXED || s == Strategy::ADPSGD_FIXED || s == Strategy::RAND_PSGD;
}

void require_ring_learners(const ClusterState& state, std::string_view who) {
  if (state.learner_count() < 3) {
    throw DegenerateTopologyError(std::string(who) + " requires at least 3 learners");
  }
}

WeightsMatrix compute_gradients(const WeightsMatrix& eval_points, const StepContext& ctx,
                                std::uint64_t iteration) {
  const std::size_t learners = static_cast<std::size_t>(eval_points.cols());
  WeightsMatrix grads(eval_points.rows(), eval_points.cols());
  for (std::size_t l = 0; l < learners; ++l) {
    const auto col = static_cast<Eigen::Index>(l);
    grads.col(col) = ctx.oracle.stochastic_gradient(eval_points.col(col),
                                                    learner_batch(ctx, l, iteration, learners));
  }
  return grads;
}

void check_finite(const WeightsMatrix& w, std::uint64_t iteration) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double v = w.data()[i];
    if (!std::isfinite(v) || std::abs(v) > kDivergenceThreshold) {
      throw DivergenceError(iteration, "weights diverged at iteration " + std::to_string(iteration));
    }
  }
}

WeightsMatrix broadcast(const Eigen::VectorXd& column, Eigen::Index learners) {
  return column.replicate(1, learners);
}

// W_{k+1} = mixed - lr * g(Phi_k), Phi_k = W_{k-1} when stale else W_k.
StepInfo mixing_step(ClusterState& state, const StepContext& ctx, WeightsMatrix mixed, bool stale) {
  const WeightsMatrix& eval = stale ? state.previous : state.weights;
  const WeightsMatrix grads = compute_gradients(eval, ctx, state.iteration);
  StepInfo info;
  info.post_mix_consensus = consensus_distance(mixed);
  info.mean_gradient = grads.rowwise().mean();
  WeightsMatrix next = std::move(mixed);
  next -= ctx.lr * grads;
  check_finite(next, state.iteration);
  state.previous = std::move(state.weights);
  state.weights = std::move(next);
  ++state.iteration;
  return info;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::SPSGD: return "SPSGD";
    case Strategy::DPSGD_FIXED: return "DPSGD_FIXED";
    case Strategy::ADPSGD_FIXED: return "ADPSGD_FIXED";
    case Strategy::RAND_PSGD: return "RAND_PSGD";
    case Strategy::D1D: return "D1D";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::SPSGD, Strategy::DPSGD_FIXED, Strategy::ADPSGD_FIXED,
                     Strategy::RAND_PSGD, Strategy::D1D}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(Staleness s) { return s == Staleness::Sync ? "sync" : "async"; }

std::optional<Staleness> parse_staleness(std::string_view name) {
  if (name == "sync") return Staleness::Sync;
  if (name == "async") return Staleness::Async;
  return std::nullopt;
}

bool uses_global_barrier(Strategy s) { return s == Strategy::SPSGD || s == Strategy::D1D; }

double mixing_rho(Strategy s, std::size_t learners) {
  // Conjugation preserves the spectrum, so RAND_PSGD shares the ring's rho.
  if (needs_ring(s) && learners >= 3) return second_eigenvalue_ring(learners);
  return 0.0;
}

ClusterState ClusterState::initial(WeightsMatrix w0, std::uint64_t seed) {
  ClusterState state;
  state.previous = w0;
  state.weights = std::move(w0);
  state.learners.resize(state.learner_count());
  for (std::size_t l = 0; l < state.learners.size(); ++l) {
    state.learners[l].stream_id = derive_seed(seed, {stream_tag::kGradient, l});
  }
  return state;
}

BatchDescriptor learner_batch(const StepContext& ctx, std::size_t learner, std::uint64_t iteration,
                              std::size_t learners) {
  BatchDescriptor batch;
  batch.batch_size = ctx.batch_size;
  batch.sample_seed = derive_seed(ctx.seed, {stream_tag::kGradient, learner, iteration});
  if (ctx.sharded_data) {
    batch.shard_index = learner;
    batch.shard_count = learners;
  }
  return batch;
}

StepInfo step_spsgd(ClusterState& state, const StepContext& ctx) {
  const auto learners = static_cast<Eigen::Index>(state.learner_count());
  // Every learner starts the step from the same model.
  const Eigen::VectorXd shared = uniform_average(state.weights);
  WeightsMatrix eval = broadcast(shared, learners);
  const WeightsMatrix grads = compute_gradients(eval, ctx, state.iteration);
  StepInfo info;
  info.post_mix_consensus = 0.0;
  info.mean_gradient = grads.rowwise().mean();
  const Eigen::VectorXd next = shared - ctx.lr * info.mean_gradient;
  WeightsMatrix next_weights = broadcast(next, learners);
  check_finite(next_weights, state.iteration);
  state.previous = std::move(state.weights);
  state.weights = std::move(next_weights);
  ++state.iteration;
  return info;
}

StepInfo step_dpsgd_fixed(ClusterState& state, const StepContext& ctx) {
  require_ring_learners(state, "DPSGD_FIXED");
  WeightsMatrix mixed = apply_mixing(state.weights, build_ring_matrix(state.learner_count()));
  return mixing_step(state, ctx, std::move(mixed), false);
}

StepInfo step_adpsgd_fixed(ClusterState& state, const StepContext& ctx) {
  require_ring_learners(state, "ADPSGD_FIXED");
  WeightsMatrix mixed = apply_mixing(state.weights, build_ring_matrix(state.learner_count()));
  return mixing_step(state, ctx, std::move(mixed), true);
}

MixingMatrix rand_psgd_mixing(std::size_t learners, std::uint64_t shared_seed,
                              std::uint64_t iteration) {
  return conjugate_by_permutation(build_ring_matrix(learners),
                                  sample_permutation(learners, shared_seed, iteration));
}

StepInfo step_rand_psgd(ClusterState& state, const StepContext& ctx, std::uint64_t shared_seed,
                        Staleness staleness) {
  require_ring_learners(state, "RAND_PSGD");
  const MixingMatrix t = rand_psgd_mixing(state.learner_count(), shared_seed, state.iteration);
  WeightsMatrix mixed = apply_mixing(state.weights, t);
  return mixing_step(state, ctx, std::move(mixed), staleness == Staleness::Async);
}

StepInfo step_d1d(ClusterState& state, const StepContext& ctx) {
  WeightsMatrix mixed = broadcast(uniform_average(state.weights),
                                  static_cast<Eigen::Index>(state.learner_count()));
  return mixing_step(state, ctx, std::move(mixed), true);
}

double advance_clock(ClusterState& state, Strategy strategy, const CostModel& cost,
                     std::uint64_t seed) {
  const std::size_t learners = state.learner_count();
  std::vector<double> compute(learners);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < learners; ++l) {
    auto rng = make_stream(derive_seed(seed, {stream_tag::kClock, state.iteration, l}));
    const double z = normal(rng);
    compute[l] = cost.slowdown(l) * std::exp(cost.compute_log_mean + cost.compute_log_sigma * z);
    state.learners[l].compute_time_s += compute[l];
  }

  double duration = 0.0;
  if (uses_global_barrier(strategy)) {
    const double comm =
        learners > 1 ? communication_time(cost.message_size_bytes, cost.min_bandwidth(learners)) : 0.0;
    duration = *std::max_element(compute.begin(), compute.end()) + comm;
  } else {
    for (std::size_t l = 0; l < learners; ++l) {
      duration += std::max(compute[l], communication_time(cost.message_size_bytes, cost.bandwidth(l)));
    }
    duration /= static_cast<double>(learners);
  }
  state.sim_time_s += duration;
  return duration;
}

double expected_iteration_duration(Strategy strategy, const CostModel& cost, std::size_t learners) {
  if (uses_global_barrier(strategy)) {
    double slowest = 0.0;
    for (std::size_t l = 0; l < learners; ++l) slowest = std::max(slowest, cost.mean_compute_time(l));
    const double comm =
        learners > 1 ? communication_time(cost.message_size_bytes, cost.min_bandwidth(learners)) : 0.0;
    return slowest + comm;
  }
  double total = 0.0;
  for (std::size_t l = 0; l < learners; ++l) {
    total += std::max(cost.mean_compute_time(l),
                      communication_time(cost.message_size_bytes, cost.bandwidth(l)));
  }
  return total / static_cast<double>(learners);
}

double learning_rate(const TrainingConfig& config, std::uint64_t iteration) {
  if (config.warmup_iterations == 0 || iteration >= config.warmup_iterations) return config.lr;
  return config.lr * static_cast<double>(iteration + 1) / static_cast<double>(config.warmup_iterations);
}

WeightsMatrix initial_weights(std::size_t dimension, const TrainingConfig& config) {
  const auto d = static_cast<Eigen::Index>(dimension);
  const auto learners = static_cast<Eigen::Index>(config.learners);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto rng = make_stream(derive_seed(config.init_seed, {stream_tag::kInit}));
  Eigen::VectorXd start(d);
  for (Eigen::Index i = 0; i < d; ++i) start[i] = config.init_scale * normal(rng);
  WeightsMatrix w = start.replicate(1, learners);
  if (config.init_spread > 0.0) {
    for (Eigen::Index l = 0; l < learners; ++l) {
      auto lrng = make_stream(derive_seed(config.init_seed, {stream_tag::kInit, static_cast<std::uint64_t>(l) + 1}));
      for (Eigen::Index i = 0; i < d; ++i) w(i, l) += config.init_spread * normal(lrng);
    }
  }
  return w;
}

TraceRecord measure(const ClusterState& state, const GradientOracle& oracle, double rho) {
  TraceRecord r;
  r.iteration = state.iteration;
  r.sim_time_s = state.sim_time_s;
  double total = 0.0;
  for (Eigen::Index l = 0; l < state.weights.cols(); ++l) total += oracle.loss(state.weights.col(l));
  r.mean_loss = total / static_cast<double>(state.weights.cols());
  r.avg_model_loss = oracle.loss(column_mean(state.weights));
  r.consensus_dist = consensus_distance(state.weights);
  r.rho = rho;
  return r;
}

TrainingResult run_training(Strategy strategy, const GradientOracle& oracle,
                            const TrainingConfig& config) {
  return run_training(strategy, oracle, config, initial_weights(oracle.dimension(), config));
}

TrainingResult run_training(Strategy strategy, const GradientOracle& oracle,
                            const TrainingConfig& config, WeightsMatrix w0) {
  if (config.learners == 0) throw std::invalid_argument("need at least one learner");
  if (needs_ring(strategy) && config.learners < 3) {
    throw DegenerateTopologyError(std::string(to_string(strategy)) + " requires at least 3 learners");
  }
  if (!(config.lr >= 0.0) || !std::isfinite(config.lr)) {
    throw std::invalid_argument("learning rate must be finite and >= 0");
  }
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (config.log_interval == 0) throw std::invalid_argument("log interval must be >= 1");
  if (static_cast<std::size_t>(w0.rows()) != oracle.dimension() ||
      static_cast<std::size_t>(w0.cols()) != config.learners) {
    throw SizeMismatchError("initial weights must be dimension x learners");
  }
  config.cost.validate(config.learners);

  const double rho = mixing_rho(strategy, config.learners);
  const std::uint64_t shared_seed = derive_seed(config.seed, {stream_tag::kPermutation});
  ClusterState state = ClusterState::initial(std::move(w0), config.seed);

  TrainingResult result;
  result.records.push_back(measure(state, oracle, rho));

  for (std::size_t k = 0; k < config.iterations; ++k) {
    const StepContext ctx{oracle, learning_rate(config, k), config.batch_size, config.seed,
                          config.sharded_data};
    const Eigen::VectorXd mean_before = column_mean(state.weights);
    advance_clock(state, strategy, config.cost, config.seed);
    StepInfo info;
    try {
      switch (strategy) {
        case Strategy::SPSGD: info = step_spsgd(state, ctx); break;
        case Strategy::DPSGD_FIXED: info = step_dpsgd_fixed(state, ctx); break;
        case Strategy::ADPSGD_FIXED: info = step_adpsgd_fixed(state, ctx); break;
        case Strategy::RAND_PSGD: info = step_rand_psgd(state, ctx, shared_seed, config.staleness); break;
        case Strategy::D1D: info = step_d1d(state, ctx); break;
      }
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.failure = e.what();
      break;
    }
    const Eigen::VectorXd expected = mean_before - ctx.lr * info.mean_gradient;
    result.max_mass_drift =
        std::max(result.max_mass_drift, (column_mean(state.weights) - expected).cwiseAbs().maxCoeff());
    result.max_post_mix_consensus = std::max(result.max_post_mix_consensus, info.post_mix_consensus);
    result.completed_iterations = k + 1;
    if ((k + 1) % config.log_interval == 0 || k + 1 == config.iterations) {
      result.records.push_back(measure(state, oracle, rho));
    }
  }
  result.total_time_s = state.sim_time_s;
  return result;
}

}  // namespace ringmix
