#include "ringmix/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ringmix/mixing.hpp"
#include "ringmix/seeding.hpp"
#include "ringmix/spectral.hpp"
#include "ringmix/sweep.hpp"

namespace ringmix {

double family_wise_sigmas(std::size_t comparisons) {
  if (comparisons <= 1) return kFrobeniusSigmas;
  const double family_alpha = std::erfc(kFrobeniusSigmas / std::sqrt(2.0));
  const double target = family_alpha / static_cast<double>(comparisons);
  // Solve erfc(z / sqrt 2) == target by bisection; erfc is decreasing.
  double lo = kFrobeniusSigmas, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool BoundReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.passed(); });
}

BoundReport verify_bounds(std::span<const std::size_t> learner_counts, std::size_t k_max,
                          std::size_t trials, std::uint64_t seed,
                          std::optional<double> frobenius_sigmas) {
  BoundReport report;
  report.k_max = k_max;
  report.frobenius_sigmas =
      frobenius_sigmas.value_or(family_wise_sigmas(learner_counts.size() * k_max));
  report.trials = trials;
  report.seed = seed;

  for (std::size_t learners : learner_counts) {
    BoundRow row;
    row.learners = learners;
    row.rho_closed_form = second_eigenvalue_ring(learners);
    row.rho_eigen = spectral_rho(build_ring_matrix(learners)).rho;
    row.rho_error = std::abs(row.rho_closed_form - row.rho_eigen);
    row.rho_ok = row.rho_error <= kExactTol;

    row.max_fixed_excess = -INFINITY;
    for (const ConsensusPoint& p : fixed_consensus_curve(learners, k_max).points) {
      row.max_fixed_excess =
          std::max(row.max_fixed_excess, p.distance - fixed_mixing_consensus_bound(learners, p.k));
    }
    row.fixed_ok = k_max == 0 || row.max_fixed_excess <= kEigenTol;

    const ConsensusCurve frob = monte_carlo_consensus(
        learners, k_max, trials, derive_seed(seed, {learners, 0}), NormKind::Frobenius);
    const ConsensusCurve spec = monte_carlo_consensus(
        learners, k_max, trials, derive_seed(seed, {learners, 1}), NormKind::Spectral);
    row.frobenius_ok = true;
    for (const ConsensusPoint& p : frob.points) {
      const double gap = std::abs(p.squared - randomized_frobenius_expectation(learners, p.k));
      if (gap <= kExactTol) continue;
      const double sigmas = p.squared_std_error > 0.0 ? gap / p.squared_std_error : INFINITY;
      row.max_frobenius_sigmas = std::max(row.max_frobenius_sigmas, sigmas);
      if (gap > report.frobenius_sigmas * p.squared_std_error + kExactTol) row.frobenius_ok = false;
    }
    row.max_spectral_excess = -INFINITY;
    for (const ConsensusPoint& p : spec.points) {
      row.max_spectral_excess =
          std::max(row.max_spectral_excess, p.distance - randomized_consensus_bound(learners, p.k));
    }
    row.spectral_ok = k_max == 0 || row.max_spectral_excess <= 0.0;
    report.rows.push_back(row);
  }
  return report;
}

void write_bound_report(std::ostream& out, const BoundReport& report) {
  out << "L,rho_closed_form,rho_eigen,rho_error,max_fixed_excess,max_frobenius_sigmas,"
         "max_spectral_excess,status\n";
  for (const BoundRow& r : report.rows) {
    out << r.learners << ',' << format_double(r.rho_closed_form) << ',' << format_double(r.rho_eigen)
        << ',' << format_double(r.rho_error) << ',' << format_double(r.max_fixed_excess) << ','
        << format_double(r.max_frobenius_sigmas) << ',' << format_double(r.max_spectral_excess) << ','
        << (r.passed() ? "pass" : "FAIL") << '\n';
  }
}

}  // namespace ringmix
