#include "ringmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ringmix/seeding.hpp"

namespace ringmix {
namespace {

void require_ring_size(std::size_t learners, const char* what) {
  if (learners < 3) {
    throw DegenerateTopologyError(std::string(what) + " requires at least 3 learners, got " +
                                  std::to_string(learners));
  }
}

// Running mean/variance (Welford), aggregated in a fixed order.
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

constexpr double kNormal95 = 1.959963984540054;

double norm_of(const DenseMatrix& d, NormKind norm) {
  return norm == NormKind::Spectral ? spectral_norm(d) : frobenius_norm(d);
}

std::vector<Permutation> all_permutations(std::size_t learners) {
  std::vector<std::size_t> mapping(learners);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  std::vector<Permutation> out;
  do {
    out.emplace_back(mapping);
  } while (std::next_permutation(mapping.begin(), mapping.end()));
  return out;
}

}  // namespace

double second_eigenvalue_ring(std::size_t learners) {
  require_ring_size(learners, "second_eigenvalue_ring");
  return 1.0 / 3.0 +
         (2.0 / 3.0) * std::cos(2.0 * std::numbers::pi / static_cast<double>(learners));
}

SpectralReport spectral_rho(const MixingMatrix& mixing) {
  SpectralReport report;
  DenseMatrix m = mixing.dense();
  const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > kEigenTol) {
    m = 0.5 * (m + m.transpose()).eval();
    report.symmetrized = true;
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigen-solver did not converge");
  }
  const Eigen::VectorXd& ascending = solver.eigenvalues();
  report.eigenvalues.assign(ascending.data(), ascending.data() + ascending.size());
  std::reverse(report.eigenvalues.begin(), report.eigenvalues.end());
  const std::size_t n = report.eigenvalues.size();
  if (n >= 2) {
    report.rho = std::max(std::abs(report.eigenvalues[1]), std::abs(report.eigenvalues[n - 1]));
  }
  report.spectral_gap = 1.0 - report.rho;
  return report;
}

double spectral_norm(const DenseMatrix& d) {
  if (d.size() == 0) return 0.0;
  const DenseMatrix gram = d.transpose() * d;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigen-solver did not converge");
  }
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double frobenius_norm(const DenseMatrix& d) { return d.norm(); }

double fixed_mixing_consensus_bound(std::size_t learners, std::size_t steps) {
  const double rho = second_eigenvalue_ring(learners);
  return std::pow(rho, static_cast<double>(steps));
}

MixingMatrix expected_gram(std::size_t learners) {
  require_ring_size(learners, "expected_gram");
  const auto n = static_cast<Eigen::Index>(learners);
  DenseMatrix g = DenseMatrix::Constant(n, n, 2.0 / (3.0 * static_cast<double>(learners - 1)));
  g.diagonal().setConstant(1.0 / 3.0);
  return MixingMatrix::from_dense(std::move(g));
}

MixingMatrix expected_gram_by_enumeration(std::size_t learners) {
  require_ring_size(learners, "expected_gram_by_enumeration");
  if (learners > 8) {
    throw std::invalid_argument("permutation enumeration is limited to L <= 8");
  }
  const MixingMatrix ring = build_ring_matrix(learners);
  const auto n = static_cast<Eigen::Index>(learners);
  DenseMatrix sum = DenseMatrix::Zero(n, n);
  std::size_t count = 0;
  for (const Permutation& p : all_permutations(learners)) {
    const DenseMatrix t = conjugate_by_permutation(ring, p).dense();
    sum.noalias() += t.transpose() * t;
    ++count;
  }
  return MixingMatrix::from_dense(sum / static_cast<double>(count));
}

double randomized_frobenius_expectation(std::size_t learners, std::size_t steps) {
  require_ring_size(learners, "randomized_frobenius_expectation");
  const double l1 = static_cast<double>(learners - 1);
  // 1/3 - 2/(3(L-1)) == (L-3) / (3(L-1)); the second form is exact at L == 3.
  const double contraction = (l1 - 2.0) / (3.0 * l1);
  return l1 * std::pow(contraction, static_cast<double>(steps));
}

double randomized_consensus_bound(std::size_t learners, std::size_t steps) {
  require_ring_size(learners, "randomized_consensus_bound");
  return std::sqrt(static_cast<double>(learners - 1)) /
         std::pow(std::sqrt(3.0), static_cast<double>(steps));
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return derive_seed(seed, {stream_tag::kTrial, trial});
}

std::vector<double> randomized_product_path(std::size_t learners, std::size_t steps,
                                            std::uint64_t path_seed, NormKind norm) {
  require_ring_size(learners, "randomized_product_path");
  const MixingMatrix ring = build_ring_matrix(learners);
  const DenseMatrix uniform = build_uniform_matrix(learners).dense();
  const auto n = static_cast<Eigen::Index>(learners);
  DenseMatrix product = DenseMatrix::Identity(n, n);
  std::vector<double> out;
  out.reserve(steps);
  for (std::size_t j = 1; j <= steps; ++j) {
    const MixingMatrix t = conjugate_by_permutation(ring, sample_permutation(learners, path_seed, j));
    product = (product * t.dense()).eval();
    out.push_back(norm_of(product - uniform, norm));
  }
  return out;
}

ConsensusCurve monte_carlo_consensus(std::size_t learners, std::size_t steps, std::size_t trials,
                                     std::uint64_t seed, NormKind norm, SamplingMode mode) {
  require_ring_size(learners, "monte_carlo_consensus");
  ConsensusCurve curve;
  curve.norm = norm;
  std::vector<Moments> dist(steps), sq(steps);

  if (mode == SamplingMode::Sample) {
    if (trials == 0) {
      throw std::invalid_argument("monte_carlo_consensus needs at least one trial");
    }
    for (std::size_t t = 0; t < trials; ++t) {
      const std::vector<double> path =
          randomized_product_path(learners, steps, trial_seed(seed, t), norm);
      for (std::size_t j = 0; j < steps; ++j) {
        dist[j].add(path[j]);
        sq[j].add(path[j] * path[j]);
      }
    }
    curve.samples = trials;
  } else {
    constexpr double kMaxSequences = 1e6;
    if (learners > 6) {
      throw std::invalid_argument("exact enumeration is limited to L <= 6");
    }
    const std::vector<Permutation> perms = all_permutations(learners);
    if (std::pow(static_cast<double>(perms.size()), static_cast<double>(steps)) > kMaxSequences) {
      throw std::invalid_argument("exact enumeration would exceed 1e6 permutation sequences");
    }
    const MixingMatrix ring = build_ring_matrix(learners);
    const DenseMatrix uniform = build_uniform_matrix(learners).dense();
    std::vector<DenseMatrix> factors;
    factors.reserve(perms.size());
    for (const Permutation& p : perms) {
      factors.push_back(conjugate_by_permutation(ring, p).dense());
    }
    // Depth-first over every sequence; each depth-j prefix is one equally likely outcome at step j.
    std::function<void(const DenseMatrix&, std::size_t)> descend = [&](const DenseMatrix& prefix,
                                                                       std::size_t depth) {
      if (depth == steps) return;
      for (const DenseMatrix& f : factors) {
        const DenseMatrix product = prefix * f;
        const double d = norm_of(product - uniform, norm);
        dist[depth].add(d);
        sq[depth].add(d * d);
        descend(product, depth + 1);
      }
    };
    const auto n = static_cast<Eigen::Index>(learners);
    descend(DenseMatrix::Identity(n, n), 0);
    curve.samples = perms.size();
    curve.exact = true;
  }

  curve.points.reserve(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    ConsensusPoint p;
    p.k = j + 1;
    p.distance = dist[j].mean;
    p.squared = sq[j].mean;
    if (!curve.exact) {
      p.distance_std_error = dist[j].std_error();
      p.squared_std_error = sq[j].std_error();
      p.distance_half_width = kNormal95 * p.distance_std_error;
      p.squared_half_width = kNormal95 * p.squared_std_error;
    }
    curve.points.push_back(p);
  }
  return curve;
}

ConsensusCurve fixed_consensus_curve(std::size_t learners, std::size_t k_max) {
  require_ring_size(learners, "fixed_consensus_curve");
  const DenseMatrix ring = build_ring_matrix(learners).dense();
  const DenseMatrix uniform = build_uniform_matrix(learners).dense();
  ConsensusCurve curve;
  curve.norm = NormKind::Spectral;
  curve.exact = true;
  DenseMatrix power = ring;
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) power = (power * ring).eval();
    ConsensusPoint p;
    p.k = k;
    p.distance = spectral_norm(power - uniform);
    p.squared = p.distance * p.distance;
    curve.points.push_back(p);
  }
  return curve;
}

}  // namespace ringmix
