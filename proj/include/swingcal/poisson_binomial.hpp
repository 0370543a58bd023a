#pragma once

// Exact Poisson-Binomial distributions: the law of a sum of independent,
// non-identically distributed Bernoulli trials.
//
// The full PMF is built by direct iterative convolution. Every Pmf carries
// both linear and natural-log probabilities; ratios are always taken in log
// space so that tail counts far from the mean stay usable.
//
// Removing one trial from a known PMF ("leave one out") uses the two-term
// recursion
//
//   P(S = d) = p_i * P(S_{-i} = d - 1) + (1 - p_i) * P(S_{-i} = d)
//
// run forward from d = 0 while the subtraction is well conditioned and
// backward from d = n - 1 for the rest. The identity is re-checked at every
// d afterwards; on failure the caller may fall back to reconvolution.

#include <cstddef>
#include <span>
#include <vector>

namespace swingcal {

/// Success probabilities of independent Bernoulli trials, each strictly inside (0, 1).
class BernoulliVector {
 public:
  /// Throws DomainError if any entry is outside (0, 1) or not finite,
  /// SizeError if empty.
  explicit BernoulliVector(std::vector<double> p);

  std::span<const double> p() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }

 private:
  std::vector<double> p_;
};

/// Probability mass function over {0, ..., n}. Immutable after construction.
class Pmf {
 public:
  /// Both vectors must have the same length n + 1. Zero entries in `probs`
  /// may have finite log values when the linear value underflowed.
  Pmf(std::vector<double> probs, std::vector<double> log_probs);

  /// Builds log values from linear ones; zero probabilities map to -infinity.
  static Pmf from_probs(std::vector<double> probs);
  /// Builds linear values from log ones.
  static Pmf from_log_probs(std::vector<double> log_probs);

  std::size_t trials() const noexcept { return probs_.size() - 1; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  std::span<const double> log_probs() const noexcept { return log_probs_; }
  double operator[](std::size_t d) const noexcept { return probs_[d]; }

 private:
  std::vector<double> probs_;
  std::vector<double> log_probs_;
};

/// Normal approximation N(mu, sigma2) to a Poisson-Binomial sum.
struct NormalApprox {
  double mu = 0.0;
  double sigma2 = 0.0;

  double density(double d) const;
};

struct PmfOptions {
  /// Largest number of trials accepted by pmf(); the convolution is O(n^2).
  std::size_t max_trials = 100'000;
};

/// Exact distribution of the number of successes. Throws SizeError above
/// `options.max_trials`.
Pmf pmf(const BernoulliVector& probs, const PmfOptions& options = {});

/// PMF of the sum with one trial of probability `p_i` removed, by
/// deconvolution only. Throws DomainError if p_i is outside (0, 1) or the
/// PMF has no trials, and InstabilityError if the result fails validation.
Pmf leave_one_out_pmf(const Pmf& full, double p_i);

/// As above for trial `index` of `probs` (whose PMF is `full`), falling back
/// to exact reconvolution of the remaining trials when deconvolution fails
/// validation. InstabilityError here indicates a logic bug.
Pmf leave_one_out_pmf(const Pmf& full, const BernoulliVector& probs, std::size_t index);

/// probs[d_num] / probs[d_den] computed in log space. Throws DivisionError
/// when the denominator has zero probability and DomainError for counts
/// outside the support.
double pmf_ratio(const Pmf& pmf, std::size_t d_num, std::size_t d_den);

NormalApprox normal_approx(const BernoulliVector& probs);

/// max_d |density(d) - probs[d]| over the support of `pmf`.
double max_normal_deviation(const Pmf& pmf, const NormalApprox& approx);

/// Largest relative violation of full[d] = p_i * reduced[d-1] + (1-p_i) * reduced[d]
/// over d = 0..n, measured in log space. Returns +inf if the supports disagree.
double recursion_residual(const Pmf& full, const Pmf& reduced, double p_i);

/// Largest value of log(probs[d-1]) + log(probs[d+1]) - 2 log(probs[d]) over
/// interior d with all three entries positive. Non-positive for a log-concave PMF.
double log_concavity_excess(const Pmf& pmf);

namespace detail {

/// Relative tolerance for the post-deconvolution recursion check.
inline constexpr double kRecursionTolerance = 1e-9;

/// Linear-space deconvolution of trial p from `full` (n + 1 entries) into
/// `out` (n entries). Returns false if validation fails. Entries below
/// ~1e-290 are not validated.
bool deconvolve_linear(std::span<const double> full, double p, std::span<double> out);

/// Log-space counterpart of deconvolve_linear.
bool deconvolve_log(std::span<const double> full_log, double p, std::span<double> out_log);

/// Log-space convolution of the given trials; exact in range where the
/// linear convolution underflows.
std::vector<double> convolve_log(std::span<const double> p);

/// Linear-space convolution of the given trials.
std::vector<double> convolve_linear(std::span<const double> p);

double log_add_exp(double a, double b) noexcept;

}  // namespace detail

}  // namespace swingcal
