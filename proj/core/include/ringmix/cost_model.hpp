#pragma once

#include <cstddef>
#include <vector>

namespace ringmix {

/// Communication and compute-time model for one training iteration.
///
/// Each learner sends and receives one message of `message_size_bytes` to
/// each of two peers per iteration over its own bidirectional link, so the
/// communication term is 2|M|/|B|. Compute time per gradient step is
/// lognormal(log_mean, log_sigma) scaled by a per-learner slowdown factor.
struct CostModel {
  double message_size_bytes = 165e6;
  std::vector<double> link_bandwidth{25e9};  // bytes/s; one entry means homogeneous
  double compute_log_mean = -2.302585092994046;  // log(0.1 s)
  double compute_log_sigma = 0.1;
  std::vector<double> compute_slowdown;  // empty means 1 for every learner

  // Throws std::invalid_argument when a field is out of range for `learners`.
  void validate(std::size_t learners) const;

  double bandwidth(std::size_t learner) const;
  double slowdown(std::size_t learner) const;
  double min_bandwidth(std::size_t learners) const;
  double mean_compute_time(std::size_t learner) const;

  bool operator==(const CostModel&) const = default;
};

// 2 |M| / |B|
double communication_time(double message_size_bytes, double bandwidth);

}  // namespace ringmix
