#include "swingcal/logit_shift.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "swingcal/errors.hpp"

namespace swingcal {

namespace {

void check_scores(std::span<const double> scores) {
  if (scores.empty()) throw SizeError("score set is empty");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = scores[i];
    if (!(std::isfinite(p) && p > 0.0 && p < 1.0)) {
      throw DomainError(fmt::format("score at index {} is {}, expected a value in (0, 1)", i, p));
    }
  }
}

}  // namespace

ScoreSet::ScoreSet(std::vector<double> scores) : scores_(std::move(scores)) {
  check_scores(scores_);
}

ScoreSet::ScoreSet(std::vector<double> scores, std::vector<std::string> ids,
                   std::vector<std::string> groups)
    : ScoreSet(std::move(scores)) {
  if (!ids.empty()) {
    if (ids.size() != scores_.size()) throw SizeError("id column length differs from scores");
    std::set<std::string> seen;
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw DomainError(fmt::format("duplicate unit id '{}'", id));
    }
    ids_ = std::move(ids);
  }
  if (!groups.empty()) {
    if (groups.size() != scores_.size()) throw SizeError("group column length differs from scores");
    groups_ = std::move(groups);
  }
}

ScoreSet ScoreSet::subset(std::span<const std::size_t> members) const {
  std::vector<double> out;
  out.reserve(members.size());
  for (std::size_t i : members) out.push_back(scores_.at(i));
  return ScoreSet(std::move(out));
}

std::vector<double> LogisticScore::probabilities() const {
  std::vector<double> out;
  out.reserve(linear_terms.size());
  for (double t : linear_terms) out.push_back(1.0 / (1.0 + std::exp(-(intercept + t))));
  return out;
}

double shift_probability(double p, double s) noexcept { return p / (p + (1.0 - p) * s); }

double swing_total(double alpha, const ScoreSet& scores) {
  double total = 0.0;
  for (double p : scores.scores()) total += shift_probability(p, alpha);
  return total;
}

ShiftResult solve_alpha(const ScoreSet& scores, double target, const SolverOptions& options) {
  const auto n = static_cast<double>(scores.size());
  if (!std::isfinite(target) || target <= 0.0 || target >= n) {
    throw TargetError(
        fmt::format("target {} has no interior solution for {} units", target, scores.size()));
  }
  if (!(options.tolerance > 0.0)) throw DomainError("solver tolerance must be positive");

  auto finish = [&](double alpha, int iterations) {
    ShiftResult result;
    result.alpha = alpha;
    result.iterations = iterations;
    result.recalibrated.reserve(scores.size());
    double total = 0.0;
    for (double p : scores.scores()) {
      result.recalibrated.push_back(shift_probability(p, alpha));
      total += result.recalibrated.back();
    }
    result.residual = std::abs(total - target);
    return result;
  };

  const double prior_total = swing_total(1.0, scores);
  if (std::abs(prior_total - target) <= options.tolerance) return finish(1.0, 0);

  // h is decreasing in alpha: h(exp(lo)) >= target >= h(exp(hi)).
  double lo = -1.0;
  double hi = 1.0;
  int doublings = 0;
  while (swing_total(std::exp(lo), scores) < target) {
    if (++doublings > options.max_doublings) {
      throw ConvergenceError(fmt::format("could not bracket target {}", target));
    }
    lo *= 2.0;
  }
  while (swing_total(std::exp(hi), scores) > target) {
    if (++doublings > options.max_doublings) {
      throw ConvergenceError(fmt::format("could not bracket target {}", target));
    }
    hi *= 2.0;
  }

  double best_log_alpha = 0.0;
  double best_residual = std::abs(prior_total - target);
  int iterations = 0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++iterations;
    const double gap = swing_total(std::exp(mid), scores) - target;
    if (std::abs(gap) < best_residual) {
      best_residual = std::abs(gap);
      best_log_alpha = mid;
    }
    if (std::abs(gap) <= options.tolerance) return finish(std::exp(mid), iterations);
    if (gap > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  ShiftResult result = finish(std::exp(best_log_alpha), iterations);
  if (result.residual > options.tolerance) {
    throw ConvergenceError(fmt::format(
        "bisection exhausted with residual {:.3g} above tolerance {:.3g}", result.residual,
        options.tolerance));
  }
  return result;
}

double kl_objective(std::span<const double> candidate, const ScoreSet& scores) {
  if (candidate.size() != scores.size()) {
    throw SizeError("candidate and scores differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const double x = candidate[i];
    if (!(std::isfinite(x) && x > 0.0 && x < 1.0)) {
      throw DomainError(fmt::format("candidate entry {} is {}, expected (0, 1)", i, x));
    }
    const double p = scores[i];
    total += x * (std::log(x) - std::log(p)) + (1.0 - x) * (std::log1p(-x) - std::log1p(-p));
  }
  return total;
}

LogisticScore intercept_shift(const LogisticScore& logistic, double alpha) {
  if (!(std::isfinite(alpha) && alpha > 0.0)) {
    throw DomainError(fmt::format("swing multiplier must be positive, got {}", alpha));
  }
  return LogisticScore{logistic.intercept - std::log(alpha), logistic.linear_terms};
}

std::map<std::string, std::vector<std::size_t>> group_members(const ScoreSet& scores) {
  std::map<std::string, std::vector<std::size_t>> members;
  const auto& groups = scores.groups();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    members[groups ? (*groups)[i] : kAllUnits].push_back(i);
  }
  return members;
}

std::map<std::string, ShiftResult> recalibrate_groups(
    const ScoreSet& scores, const std::map<std::string, double>& targets,
    const SolverOptions& options) {
  const auto members = group_members(scores);
  for (const auto& [group, target] : targets) {
    if (!members.contains(group)) {
      throw TargetError(fmt::format("target given for unknown group '{}'", group));
    }
  }
  std::map<std::string, ShiftResult> results;
  for (const auto& [group, indices] : members) {
    const auto it = targets.find(group);
    if (it == targets.end()) {
      throw MissingTargetError(fmt::format("no target for group '{}'", group));
    }
    if (indices.size() < 2) {
      throw TargetError(fmt::format("group '{}' has a single unit; no interior target exists",
                                    group));
    }
    try {
      results.emplace(group, solve_alpha(scores.subset(indices), it->second, options));
    } catch (const TargetError& e) {
      throw TargetError(fmt::format("group '{}': {}", group, e.what()));
    }
  }
  return results;
}

}  // namespace swingcal
