#pragma once

// Logit-shift ("uniform swing") recalibration.
//
// Every score moves by the same amount on the log-odds scale:
//
//   f(p, alpha) = 1 / (1 + alpha * (1 - p) / p)
//
// and alpha is chosen so that the shifted scores sum to the observed total.
// The same scores minimise the summed Bernoulli KL divergence to the priors
// subject to the sum constraint, and for logistic-regression scores they
// equal the model with its intercept lowered by log(alpha).

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace swingcal {

/// Prior scores for a set of units, with optional unit ids and group labels.
class ScoreSet {
 public:
  /// Throws DomainError for scores outside (0, 1) and SizeError if empty.
  explicit ScoreSet(std::vector<double> scores);
  /// Empty `ids` or `groups` mean "absent". Throws DomainError on duplicate
  /// ids and SizeError on length mismatches.
  ScoreSet(std::vector<double> scores, std::vector<std::string> ids,
           std::vector<std::string> groups);

  std::span<const double> scores() const noexcept { return scores_; }
  std::size_t size() const noexcept { return scores_.size(); }
  double operator[](std::size_t i) const noexcept { return scores_[i]; }

  const std::optional<std::vector<std::string>>& ids() const noexcept { return ids_; }
  const std::optional<std::vector<std::string>>& groups() const noexcept { return groups_; }

  /// The scores of the given units, without ids or groups.
  ScoreSet subset(std::span<const std::size_t> members) const;

 private:
  std::vector<double> scores_;
  std::optional<std::vector<std::string>> ids_;
  std::optional<std::vector<std::string>> groups_;
};

struct ShiftResult {
  double alpha = 1.0;
  std::vector<double> recalibrated;
  int iterations = 0;
  /// |h(alpha) - target| at the returned alpha.
  double residual = 0.0;
};

/// Scores of a fitted logistic model: p_i = logistic(intercept + linear_terms[i]).
struct LogisticScore {
  double intercept = 0.0;
  std::vector<double> linear_terms;

  std::vector<double> probabilities() const;
};

struct SolverOptions {
  /// Stop once |h(alpha) - target| <= tolerance.
  double tolerance = 1e-10;
  /// Bracket expansions on log(alpha) before giving up.
  int max_doublings = 200;
};

/// f(p, s): the score p after a multiplicative odds shift by 1/s.
double shift_probability(double p, double s) noexcept;

/// h(alpha) = sum_i f(p_i, alpha). Strictly decreasing in alpha, h(1) = sum p_i.
double swing_total(double alpha, const ScoreSet& scores);

/// Finds alpha with h(alpha) = target by bisection on log(alpha).
/// `target` may be non-integer. Throws TargetError unless 0 < target < N,
/// DomainError for a non-positive tolerance and ConvergenceError if no
/// bracket or no root within tolerance can be found.
ShiftResult solve_alpha(const ScoreSet& scores, double target, const SolverOptions& options = {});

/// sum_i KL(Bern(x_i) || Bern(p_i)). Throws DomainError on entries outside
/// (0, 1) and SizeError on length mismatch.
double kl_objective(std::span<const double> candidate, const ScoreSet& scores);

/// The same model with intercept - log(alpha). Throws DomainError unless alpha > 0.
LogisticScore intercept_shift(const LogisticScore& logistic, double alpha);

/// Label used for every unit when a ScoreSet carries no group column.
inline const std::string kAllUnits;

/// Unit indices per group label, ascending within each group.
std::map<std::string, std::vector<std::size_t>> group_members(const ScoreSet& scores);

/// Solves each group independently; result vectors follow group_members()
/// order. Throws MissingTargetError if a group has no target and
/// TargetError for targets naming unknown groups, groups with fewer than two
/// units, or non-interior targets.
std::map<std::string, ShiftResult> recalibrate_groups(
    const ScoreSet& scores, const std::map<std::string, double>& targets,
    const SolverOptions& options = {});

}  // namespace swingcal
