#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ringmix {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// d x L, column l holds learner l's parameters.
using WeightsMatrix = Eigen::MatrixXd;

inline constexpr double kExactTol = 1e-12;
inline constexpr double kEigenTol = 1e-10;

class DegenerateTopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SizeMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StochasticityReport {
  double max_row_deviation = 0.0;
  double max_column_deviation = 0.0;
  double min_entry = 0.0;
  bool square = true;
  bool passed = false;
};

// Reports how far `m` is from being doubly stochastic. Never throws.
StochasticityReport verify_doubly_stochastic(const DenseMatrix& m, double tol);

class Permutation;

/// Dense L x L doubly stochastic averaging matrix.
///
/// Instances can only be obtained through the builders below or through
/// `from_dense`, which validates non-negativity and unit row/column sums.
class MixingMatrix {
 public:
  static MixingMatrix from_dense(DenseMatrix m, double tol = kExactTol);

  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  const DenseMatrix& dense() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  bool operator==(const MixingMatrix& other) const { return m_ == other.m_; }

 private:
  explicit MixingMatrix(DenseMatrix m) : m_(std::move(m)) {}
  friend MixingMatrix build_ring_matrix(std::size_t);
  friend MixingMatrix build_uniform_matrix(std::size_t);
  friend MixingMatrix conjugate_by_permutation(const MixingMatrix&, const Permutation&);

  DenseMatrix m_;
};

/// Bijection on {0..L-1}. Entry i is the ring position assigned to learner i.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> mapping);
  static Permutation identity(std::size_t n);

  std::size_t size() const { return mapping_.size(); }
  std::size_t operator[](std::size_t i) const { return mapping_[i]; }
  std::span<const std::size_t> mapping() const { return mapping_; }

  // Permutation matrix P with P(mapping[i], i) = 1, so (P^T A P)(i,j) = A(mapping[i], mapping[j]).
  DenseMatrix matrix() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::size_t> mapping_;
};

// Circulant ring: 1/3 on the diagonal and on both neighbours (with wrap-around).
// L == 1 yields [[1]]; L == 2 is rejected because the left and right neighbour coincide.
MixingMatrix build_ring_matrix(std::size_t learners);

MixingMatrix build_uniform_matrix(std::size_t learners);

// Uniform draw from the L! permutations; a pure function of (seed, draw_index).
Permutation sample_permutation(std::size_t learners, std::uint64_t seed, std::uint64_t draw_index);
Permutation sample_permutation(std::size_t learners, std::mt19937_64& rng);

// Returns P^T * T0 * P, i.e. entry (i,j) = T0(P[i], P[j]).
MixingMatrix conjugate_by_permutation(const MixingMatrix& base, const Permutation& perm);

// Returns W * T: column l becomes the T(:,l)-weighted average of the input columns.
WeightsMatrix apply_mixing(const WeightsMatrix& weights, const MixingMatrix& mixing);

// The column every learner holds after W * T_u, accumulated in the same
// order and with the same 1/L weights apply_mixing would use.
Eigen::VectorXd uniform_average(const WeightsMatrix& weights);

Eigen::VectorXd column_mean(const WeightsMatrix& weights);

// max over learners of || w_l - mean(w) ||_2
double consensus_distance(const WeightsMatrix& weights);

}  // namespace ringmix
