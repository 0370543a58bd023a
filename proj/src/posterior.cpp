#include "swingcal/posterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "swingcal/errors.hpp"
#include "swingcal/parallel.hpp"

namespace swingcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Linear leave-one-out values below this are redone in log space.
constexpr double kLinearSafe = 1e-280;

void check_target(std::int64_t target, std::size_t units) {
  if (target <= 0 || target >= static_cast<std::int64_t>(units)) {
    throw TargetError(fmt::format("target {} is not strictly between 0 and {}", target, units));
  }
}

struct Neighbourhood {
  double log_below = kNegInf;  // log P(S_{-i} = D - 1)
  double log_at = kNegInf;     // log P(S_{-i} = D)
};

Neighbourhood leave_one_out_at(const Pmf& full, const ScoreSet& scores, std::size_t i,
                               std::size_t d, std::vector<double>& buffer) {
  const double p = scores[i];
  const std::size_t n = full.trials();
  buffer.resize(n);

  if (full[d] >= kLinearSafe && detail::deconvolve_linear(full.probs(), p, buffer) &&
      buffer[d - 1] >= kLinearSafe && buffer[d] >= kLinearSafe) {
    return {std::log(buffer[d - 1]), std::log(buffer[d])};
  }
  if (detail::deconvolve_log(full.log_probs(), p, buffer)) return {buffer[d - 1], buffer[d]};

  std::vector<double> rest;
  rest.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) rest.push_back(scores[j]);
  }
  const auto reduced = detail::convolve_log(rest);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double recon = detail::log_add_exp(lp + reduced[d - 1], lq + reduced[d]);
  if (!(std::abs(recon - full.log_probs()[d]) <= detail::kRecursionTolerance)) {
    throw InstabilityError(fmt::format("leave-one-out PMF for unit {} failed validation", i));
  }
  return {reduced[d - 1], reduced[d]};
}

}  // namespace

std::int64_t checked_count(double target, std::size_t units) {
  if (!std::isfinite(target) || std::trunc(target) != target) {
    throw TargetError(fmt::format("target {} is not an integer count", target));
  }
  const auto count = static_cast<std::int64_t>(target);
  check_target(count, units);
  return count;
}

PosteriorResult exact_posterior(const ScoreSet& scores, std::int64_t target,
                                const PosteriorOptions& options) {
  const std::size_t n = scores.size();
  check_target(target, n);
  const auto d = static_cast<std::size_t>(target);

  const Pmf full = pmf(BernoulliVector({scores.scores().begin(), scores.scores().end()}),
                       options.pmf);
  const double log_total = full.log_probs()[d];
  if (log_total == kNegInf) {
    const auto logs = full.log_probs();
    const auto first = std::find_if(logs.begin(), logs.end(), [](double v) { return v > kNegInf; });
    const auto last = std::find_if(logs.rbegin(), logs.rend(), [](double v) { return v > kNegInf; });
    throw TargetError(fmt::format("P(S = {}) is zero; feasible targets are {}..{}", target,
                                  first - logs.begin(), logs.rend() - last - 1));
  }

  PosteriorResult result;
  result.target = target;
  result.p_star.resize(n);
  result.xi.resize(n);
  result.phi.resize(n);

  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    thread_local std::vector<double> buffer;
    const Neighbourhood loo = leave_one_out_at(full, scores, i, d, buffer);
    result.xi[i] = std::exp(loo.log_below - log_total);
    // Near 1 the complement (1 - p) P(S_{-i} = D) / P(S = D) keeps the precision.
    const double on = scores[i] * result.xi[i];
    result.p_star[i] =
        on <= 0.5 ? on : 1.0 - (1.0 - scores[i]) * std::exp(loo.log_at - log_total);
    result.phi[i] = std::exp(loo.log_at - loo.log_below);
  });
  return result;
}

PosteriorResult enumeration_oracle(const ScoreSet& scores, std::int64_t target) {
  const std::size_t n = scores.size();
  if (n > kMaxEnumerationUnits) {
    throw SizeError(fmt::format("enumeration is limited to {} units, got {}",
                                kMaxEnumerationUnits, n));
  }
  check_target(target, n);

  double total = 0.0;
  std::vector<double> with_unit(n, 0.0);
  std::vector<double> without_unit(n, 0.0);
  const std::uint32_t outcomes = std::uint32_t{1} << n;
  for (std::uint32_t mask = 0; mask < outcomes; ++mask) {
    if (std::popcount(mask) != target) continue;
    double prob = 1.0;
    for (std::size_t i = 0; i < n; ++i) prob *= (mask >> i) & 1u ? scores[i] : 1.0 - scores[i];
    total += prob;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? with_unit : without_unit)[i] += prob;
  }
  if (!(total > 0.0)) throw TargetError(fmt::format("P(S = {}) is zero", target));

  PosteriorResult result;
  result.target = target;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = scores[i];
    result.p_star.push_back(with_unit[i] / total);
    result.xi.push_back(result.p_star.back() / p);
    // P(W_i = 1, S = D) = p P(S_{-i} = D - 1), P(W_i = 0, S = D) = (1 - p) P(S_{-i} = D)
    result.phi.push_back((without_unit[i] / (1.0 - p)) / (with_unit[i] / p));
  }
  return result;
}

BoundReport bound_report(const ScoreSet& scores, std::int64_t target, const ShiftResult& shift,
                         const PosteriorResult& post, const PmfOptions& options) {
  const std::size_t n = scores.size();
  check_target(target, n);
  if (post.target != target || post.phi.size() != n || shift.recalibrated.size() != n) {
    throw DomainError("shift and posterior were not computed on these scores and target");
  }
  const auto d = static_cast<std::size_t>(target);
  const Pmf full = pmf(BernoulliVector({scores.scores().begin(), scores.scores().end()}), options);

  BoundReport report;
  report.lower = pmf_ratio(full, d + 1, d);
  report.upper = pmf_ratio(full, d, d - 1);
  const auto [lo, hi] = std::minmax_element(post.phi.begin(), post.phi.end());
  report.phi_min = *lo;
  report.phi_max = *hi;
  report.alpha = shift.alpha;
  report.sigma2 = normal_approx(BernoulliVector({scores.scores().begin(), scores.scores().end()}))
                      .sigma2;
  report.gap = report.upper / report.lower - 1.0;

  const double chain[] = {report.lower, report.phi_min, report.alpha, report.phi_max,
                          report.upper};
  const char* names[] = {"lower", "phi_min", "alpha", "phi_max", "upper"};
  for (std::size_t k = 0; k + 1 < std::size(chain); ++k) {
    if (!(chain[k] <= chain[k + 1] * (1.0 + kBoundSlack))) {
      throw BoundViolationError(fmt::format("{} = {:.17g} exceeds {} = {:.17g}", names[k],
                                            chain[k], names[k + 1], chain[k + 1]));
    }
  }
  return report;
}

double error_estimate(const ScoreSet& scores) {
  double sigma2 = 0.0;
  for (double p : scores.scores()) sigma2 += p * (1.0 - p);
  return 1.0 / sigma2;
}

}  // namespace swingcal
