#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ringmix/mixing.hpp"

namespace ringmix {

struct SpectralReport {
  double rho = 0.0;           // max(|lambda_2|, |lambda_L|)
  double spectral_gap = 0.0;  // 1 - rho
  std::vector<double> eigenvalues;  // descending
  bool symmetrized = false;   // input asymmetry exceeded kEigenTol
};

enum class NormKind { Spectral, Frobenius };

enum class SamplingMode {
  Sample,     // i.i.d. permutations per step and trial
  Enumerate,  // every sequence of k permutations, weighted equally
};

// Statistics of ||T_1 ... T_k - T_u|| at step k. `distance_*` refer to the
// norm itself, `squared_*` to its square. Half-widths are 95% normal intervals.
struct ConsensusPoint {
  std::size_t k = 0;
  double distance = 0.0;
  double distance_std_error = 0.0;
  double distance_half_width = 0.0;
  double squared = 0.0;
  double squared_std_error = 0.0;
  double squared_half_width = 0.0;
};

struct ConsensusCurve {
  NormKind norm = NormKind::Spectral;
  std::size_t samples = 1;
  bool exact = false;
  std::vector<ConsensusPoint> points;
};

// 1/3 + (2/3) cos(2 pi / L)
double second_eigenvalue_ring(std::size_t learners);

SpectralReport spectral_rho(const MixingMatrix& mixing);

// Operator 2-norm: sqrt of the largest eigenvalue of D^T D.
double spectral_norm(const DenseMatrix& d);
double frobenius_norm(const DenseMatrix& d);

// rho^k, the bound on ||T0^k - T_u||_2 for the fixed ring.
double fixed_mixing_consensus_bound(std::size_t learners, std::size_t steps);

// E[T_tau^T T_tau] over uniform permutations: 1/3 on the diagonal, 2/(3(L-1)) elsewhere.
MixingMatrix expected_gram(std::size_t learners);

// Same matrix, obtained by averaging P^T T0^T T0 P over all L! permutations.
// Limited to L <= 8.
MixingMatrix expected_gram_by_enumeration(std::size_t learners);

// (L-1) (1/3 - 2/(3(L-1)))^k == E||T_1...T_k - T_u||_F^2
double randomized_frobenius_expectation(std::size_t learners, std::size_t steps);

// sqrt(L-1) / 3^(k/2)
double randomized_consensus_bound(std::size_t learners, std::size_t steps);

// One independent path of randomized rings: entry j-1 holds ||T_1...T_j - T_u||
// in the requested norm. Step j uses sample_permutation(L, path_seed, j).
std::vector<double> randomized_product_path(std::size_t learners, std::size_t steps,
                                            std::uint64_t path_seed, NormKind norm);

ConsensusCurve monte_carlo_consensus(std::size_t learners, std::size_t steps, std::size_t trials,
                                     std::uint64_t seed, NormKind norm,
                                     SamplingMode mode = SamplingMode::Sample);

// Powers the ring explicitly; records ||T0^k - T_u||_2 for k = 1..k_max.
ConsensusCurve fixed_consensus_curve(std::size_t learners, std::size_t k_max);

// Seed of trial t inside monte_carlo_consensus.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

}  // namespace ringmix
