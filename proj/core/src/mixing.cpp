#include "ringmix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ringmix/seeding.hpp"

namespace ringmix {

StochasticityReport verify_doubly_stochastic(const DenseMatrix& m, double tol) {
  StochasticityReport report;
  if (m.rows() != m.cols() || m.rows() == 0) {
    report.square = false;
    report.max_row_deviation = report.max_column_deviation = INFINITY;
    return report;
  }
  report.max_row_deviation = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
  report.max_column_deviation = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
  report.min_entry = m.minCoeff();
  // NaN compares false everywhere, so a non-finite matrix fails here too.
  report.passed = report.max_row_deviation <= tol && report.max_column_deviation <= tol &&
                  report.min_entry >= -tol;
  return report;
}

MixingMatrix MixingMatrix::from_dense(DenseMatrix m, double tol) {
  const StochasticityReport report = verify_doubly_stochastic(m, tol);
  if (!report.passed) {
    throw std::invalid_argument(
        "matrix is not doubly stochastic: row deviation " + std::to_string(report.max_row_deviation) +
        ", column deviation " + std::to_string(report.max_column_deviation) + ", min entry " +
        std::to_string(report.min_entry));
  }
  return MixingMatrix(std::move(m));
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size(), false);
  for (std::size_t v : mapping_) {
    if (v >= mapping_.size() || seen[v]) {
      throw std::invalid_argument("permutation mapping is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> mapping(n);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  return Permutation(std::move(mapping));
}

DenseMatrix Permutation::matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  DenseMatrix p = DenseMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p(static_cast<Eigen::Index>(mapping_[static_cast<std::size_t>(i)]), i) = 1.0;
  }
  return p;
}

MixingMatrix build_ring_matrix(std::size_t learners) {
  if (learners == 0) {
    throw DegenerateTopologyError("ring needs at least one learner");
  }
  if (learners == 2) {
    throw DegenerateTopologyError("ring of 2 learners has coinciding left and right neighbours");
  }
  const auto n = static_cast<Eigen::Index>(learners);
  if (n == 1) {
    return MixingMatrix(DenseMatrix::Ones(1, 1));
  }
  DenseMatrix t = DenseMatrix::Zero(n, n);
  constexpr double third = 1.0 / 3.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i, (i + n - 1) % n) = third;
    t(i, i) = third;
    t(i, (i + 1) % n) = third;
  }
  return MixingMatrix(std::move(t));
}

MixingMatrix build_uniform_matrix(std::size_t learners) {
  if (learners == 0) {
    throw DegenerateTopologyError("uniform averaging needs at least one learner");
  }
  const auto n = static_cast<Eigen::Index>(learners);
  return MixingMatrix(DenseMatrix::Constant(n, n, 1.0 / static_cast<double>(learners)));
}

Permutation sample_permutation(std::size_t learners, std::mt19937_64& rng) {
  std::vector<std::size_t> mapping(learners);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  // Fisher-Yates, one bounded draw per position.
  for (std::size_t i = learners; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(mapping[i - 1], mapping[pick(rng)]);
  }
  return Permutation(std::move(mapping));
}

Permutation sample_permutation(std::size_t learners, std::uint64_t seed, std::uint64_t draw_index) {
  auto rng = make_stream(derive_seed(seed, {stream_tag::kPermutation, draw_index}));
  return sample_permutation(learners, rng);
}

MixingMatrix conjugate_by_permutation(const MixingMatrix& base, const Permutation& perm) {
  if (perm.size() != base.size()) {
    throw SizeMismatchError("permutation size " + std::to_string(perm.size()) +
                            " does not match mixing matrix size " + std::to_string(base.size()));
  }
  const auto n = static_cast<Eigen::Index>(base.size());
  DenseMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = base.dense()(pi, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
    }
  }
  return MixingMatrix(std::move(out));
}

WeightsMatrix apply_mixing(const WeightsMatrix& weights, const MixingMatrix& mixing) {
  if (static_cast<std::size_t>(weights.cols()) != mixing.size()) {
    throw SizeMismatchError("weights have " + std::to_string(weights.cols()) +
                            " learner columns but mixing matrix is " +
                            std::to_string(mixing.size()) + "x" + std::to_string(mixing.size()));
  }
  // Fixed accumulation order over source learners, so identical weights give
  // identical bits regardless of which matrix holds them.
  const Eigen::Index n = weights.cols();
  const DenseMatrix& t = mixing.dense();
  WeightsMatrix out = WeightsMatrix::Zero(weights.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = t(i, j);
      if (w != 0.0) out.col(j) += w * weights.col(i);
    }
  }
  return out;
}

Eigen::VectorXd uniform_average(const WeightsMatrix& weights) {
  const Eigen::Index n = weights.cols();
  const double w = 1.0 / static_cast<double>(n);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(weights.rows());
  for (Eigen::Index i = 0; i < n; ++i) out += w * weights.col(i);
  return out;
}

Eigen::VectorXd column_mean(const WeightsMatrix& weights) { return weights.rowwise().mean(); }

double consensus_distance(const WeightsMatrix& weights) {
  if (weights.cols() == 0) {
    return 0.0;
  }
  const Eigen::VectorXd mean = column_mean(weights);
  return (weights.colwise() - mean).colwise().norm().maxCoeff();
}

}  // namespace ringmix
