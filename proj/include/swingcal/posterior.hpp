#pragma once

// Exact posterior recalibration: p*_i = P(W_i = 1 | sum_j W_j = D) for
// independent W_j ~ Bern(p_j).
//
//   p*_i  = p_i * xi_i,   xi_i  = P(S_{-i} = D - 1) / P(S = D)
//   phi_i = P(S_{-i} = D) / P(S_{-i} = D - 1),   p*_i = f(p_i, phi_i)
//
// phi_i is the per-unit odds shift that the logit shift replaces with a
// single alpha. Every phi_i, and alpha itself, lies between
// P(S = D + 1) / P(S = D) and P(S = D) / P(S = D - 1).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swingcal/logit_shift.hpp"
#include "swingcal/poisson_binomial.hpp"

namespace swingcal {

struct PosteriorResult {
  std::vector<double> p_star;
  std::vector<double> xi;
  std::vector<double> phi;
  std::int64_t target = 0;
};

/// Outer and inner bounds on the swing multiplier, plus the spread diagnostics.
struct BoundReport {
  double lower = 0.0;    // P(S = D + 1) / P(S = D)
  double phi_min = 0.0;
  double alpha = 0.0;
  double phi_max = 0.0;
  double upper = 0.0;    // P(S = D) / P(S = D - 1)
  double sigma2 = 0.0;   // sum_j p_j (1 - p_j)
  double gap = 0.0;      // upper / lower - 1
};

struct PosteriorOptions {
  /// Worker threads for the per-unit leave-one-out loop; 0 uses all cores.
  /// Results do not depend on this value.
  unsigned threads = 0;
  PmfOptions pmf;
};

inline constexpr std::size_t kMaxEnumerationUnits = 20;
/// Relative slack allowed in the bound chain.
inline constexpr double kBoundSlack = 1e-9;

/// Converts a real total to a count, throwing TargetError unless it is an
/// integer strictly between 0 and `units`.
std::int64_t checked_count(double target, std::size_t units);

/// One full PMF plus one leave-one-out deconvolution per unit, O(N^2).
/// Throws TargetError unless 0 < target < N.
PosteriorResult exact_posterior(const ScoreSet& scores, std::int64_t target,
                                const PosteriorOptions& options = {});

/// Literal evaluation of the conditional probabilities by summing over all
/// 2^N outcome vectors. Throws SizeError for N > kMaxEnumerationUnits.
PosteriorResult enumeration_oracle(const ScoreSet& scores, std::int64_t target);

/// Throws BoundViolationError if lower <= phi_min <= alpha <= phi_max <= upper
/// fails beyond kBoundSlack, DomainError if the inputs do not belong together.
BoundReport bound_report(const ScoreSet& scores, std::int64_t target, const ShiftResult& shift,
                         const PosteriorResult& post, const PmfOptions& options = {});

/// 1 / sum_j p_j (1 - p_j): the scale of the logit-shift error. No constant
/// is attached; compare values, not absolute magnitudes.
double error_estimate(const ScoreSet& scores);

}  // namespace swingcal
