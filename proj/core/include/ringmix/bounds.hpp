#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ringmix {

// Per-comparison z threshold for Monte-Carlo vs exact Frobenius expectation.
inline constexpr double kFrobeniusSigmas = 3.0;

// z threshold that keeps the family-wise two-sided error of `comparisons`
// independent z tests at the level of a single 3-sigma test (Bonferroni).
double family_wise_sigmas(std::size_t comparisons);

struct BoundRow {
  std::size_t learners = 0;
  double rho_closed_form = 0.0;
  double rho_eigen = 0.0;
  double rho_error = 0.0;            // |closed form - eigendecomposition|
  double max_fixed_excess = 0.0;     // max_k ||T0^k - T_u||_2 - rho^k
  double max_frobenius_sigmas = 0.0; // max_k |MC mean - exact| / SE (0 when both agree exactly)
  double max_spectral_excess = 0.0;  // max_k MC mean spectral distance - sqrt(L-1)/3^(k/2)
  bool rho_ok = false;
  bool fixed_ok = false;
  bool frobenius_ok = false;
  bool spectral_ok = false;

  bool passed() const { return rho_ok && fixed_ok && frobenius_ok && spectral_ok; }
};

struct BoundReport {
  std::size_t k_max = 0;
  double frobenius_sigmas = kFrobeniusSigmas;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<BoundRow> rows;
  bool passed() const;
};

/// For each L: closed-form rho vs eigendecomposition (1e-12), the fixed-ring
/// bound ||T0^k - T_u||_2 <= rho^k (+1e-10) for k <= k_max by explicit
/// powering, and Monte-Carlo randomized products against the exact Frobenius
/// expectation (within `frobenius_sigmas` standard errors; defaults to
/// family_wise_sigmas over all L x k comparisons) and the sqrt(L-1)/3^(k/2) bound.
BoundReport verify_bounds(std::span<const std::size_t> learner_counts, std::size_t k_max,
                          std::size_t trials, std::uint64_t seed,
                          std::optional<double> frobenius_sigmas = std::nullopt);

void write_bound_report(std::ostream& out, const BoundReport& report);

}  // namespace ringmix
