#include "ringmix/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ringmix {

void CostModel::validate(std::size_t learners) const {
  if (!(message_size_bytes > 0.0) || !std::isfinite(message_size_bytes)) {
    throw std::invalid_argument("cost model: message size must be positive");
  }
  if (link_bandwidth.empty() || (link_bandwidth.size() != 1 && link_bandwidth.size() != learners)) {
    throw std::invalid_argument("cost model: need one bandwidth or one per learner (" +
                                std::to_string(learners) + ")");
  }
  for (double b : link_bandwidth) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("cost model: bandwidths must be positive");
    }
  }
  if (!std::isfinite(compute_log_mean) || !(compute_log_sigma >= 0.0) ||
      !std::isfinite(compute_log_sigma)) {
    throw std::invalid_argument("cost model: invalid compute-time distribution");
  }
  if (!compute_slowdown.empty() && compute_slowdown.size() != learners) {
    throw std::invalid_argument("cost model: need one slowdown per learner (" +
                                std::to_string(learners) + ")");
  }
  for (double s : compute_slowdown) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("cost model: slowdowns must be positive");
    }
  }
}

double CostModel::bandwidth(std::size_t learner) const {
  return link_bandwidth.size() == 1 ? link_bandwidth.front() : link_bandwidth.at(learner);
}

double CostModel::slowdown(std::size_t learner) const {
  return compute_slowdown.empty() ? 1.0 : compute_slowdown.at(learner);
}

double CostModel::min_bandwidth(std::size_t learners) const {
  double lowest = bandwidth(0);
  for (std::size_t l = 1; l < learners; ++l) lowest = std::min(lowest, bandwidth(l));
  return lowest;
}

double CostModel::mean_compute_time(std::size_t learner) const {
  return slowdown(learner) *
         std::exp(compute_log_mean + 0.5 * compute_log_sigma * compute_log_sigma);
}

double communication_time(double message_size_bytes, double bandwidth) {
  return 2.0 * message_size_bytes / bandwidth;
}

}  // namespace ringmix
