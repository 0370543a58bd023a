#include "swingcal/poisson_binomial.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "swingcal/errors.hpp"

namespace swingcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Linear entries below this carry too few significant bits to validate.
constexpr double kLinearFloor = 1e-290;
// Forward recursion continues while the carried term is at most half of P(S = d).
const double kLogHalf = -std::numbers::ln2;

bool interior_probability(double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; }

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

BernoulliVector::BernoulliVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw SizeError("Bernoulli vector must contain at least one trial");
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!interior_probability(p_[i])) {
      throw DomainError(
          fmt::format("probability at index {} is {}, expected a value in (0, 1)", i, p_[i]));
    }
  }
}

Pmf::Pmf(std::vector<double> probs, std::vector<double> log_probs)
    : probs_(std::move(probs)), log_probs_(std::move(log_probs)) {
  if (probs_.empty()) throw SizeError("PMF must have at least one support point");
  if (probs_.size() != log_probs_.size()) {
    throw SizeError("PMF linear and log representations differ in length");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < probs_.size(); ++d) {
    if (!std::isfinite(probs_[d]) || probs_[d] < 0.0 || std::isnan(log_probs_[d]) ||
        log_probs_[d] > 1e-12) {
      throw DomainError(fmt::format("invalid PMF entry at count {}", d));
    }
    total += probs_[d];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError(fmt::format("PMF sums to {:.17g}, expected 1", total));
  }
}

Pmf Pmf::from_probs(std::vector<double> probs) {
  std::vector<double> logs(probs.size());
  std::transform(probs.begin(), probs.end(), logs.begin(),
                 [](double v) { return v > 0.0 ? std::log(v) : kNegInf; });
  return Pmf(std::move(probs), std::move(logs));
}

Pmf Pmf::from_log_probs(std::vector<double> log_probs) {
  std::vector<double> probs(log_probs.size());
  std::transform(log_probs.begin(), log_probs.end(), probs.begin(),
                 [](double v) { return std::exp(v); });
  return Pmf(std::move(probs), std::move(log_probs));
}

double NormalApprox::density(double d) const {
  const double z = d - mu;
  return std::exp(-z * z / (2.0 * sigma2)) / std::sqrt(2.0 * std::numbers::pi * sigma2);
}

namespace detail {

double log_add_exp(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

std::vector<double> convolve_linear(std::span<const double> p) {
  std::vector<double> out(p.size() + 1, 0.0);
  out[0] = 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double on = p[k];
    const double off = 1.0 - on;
    for (std::size_t d = k + 1; d > 0; --d) out[d] = out[d] * off + out[d - 1] * on;
    out[0] *= off;
  }
  return out;
}

std::vector<double> convolve_log(std::span<const double> p) {
  std::vector<double> out(p.size() + 1, kNegInf);
  out[0] = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double lon = std::log(p[k]);
    const double loff = std::log1p(-p[k]);
    for (std::size_t d = k + 1; d > 0; --d) {
      out[d] = log_add_exp(out[d] + loff, out[d - 1] + lon);
    }
    out[0] += loff;
  }
  return out;
}

bool deconvolve_linear(std::span<const double> full, double p, std::span<double> out) {
  const std::size_t n = full.size() - 1;
  if (n == 0 || out.size() != n) return false;
  const double q = 1.0 - p;

  // Forward while the subtraction loses at most one bit, backward for the rest.
  std::size_t split = n;
  out[0] = full[0] / q;
  for (std::size_t d = 1; d < n; ++d) {
    const double carried = p * out[d - 1];
    const bool tiny = full[d] < kLinearFloor;
    if (!tiny && carried > 0.5 * full[d]) {
      split = d;
      break;
    }
    out[d] = (full[d] - carried) / q;
    if (tiny) out[d] = std::max(out[d], 0.0);
  }
  if (split < n) {
    out[n - 1] = full[n] / p;
    for (std::size_t d = n - 1; d > split; --d) {
      out[d - 1] = (full[d] - q * out[d]) / p;
      if (full[d] < kLinearFloor) out[d - 1] = std::max(out[d - 1], 0.0);
    }
  }

  double total = 0.0;
  for (std::size_t d = 0; d <= n; ++d) {
    if (d < n && (!std::isfinite(out[d]) || out[d] < 0.0)) return false;
    const double recon = (d > 0 ? p * out[d - 1] : 0.0) + (d < n ? q * out[d] : 0.0);
    if (std::abs(recon - full[d]) > kRecursionTolerance * full[d] + kLinearFloor) return false;
    if (d < n) total += out[d];
  }
  return std::abs(total - 1.0) <= kRecursionTolerance;
}

bool deconvolve_log(std::span<const double> full_log, double p, std::span<double> out_log) {
  const std::size_t n = full_log.size() - 1;
  if (n == 0 || out_log.size() != n) return false;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const auto& L = full_log;
  auto& out = out_log;

  std::size_t split = n;
  out[0] = L[0] - lq;
  for (std::size_t d = 1; d < n; ++d) {
    const double carried = lp + out[d - 1];
    if (L[d] == kNegInf) {
      if (carried != kNegInf) {
        split = d;
        break;
      }
      out[d] = kNegInf;
      continue;
    }
    const double t = carried - L[d];
    if (t > kLogHalf) {
      split = d;
      break;
    }
    out[d] = L[d] + std::log1p(-std::exp(t)) - lq;
  }
  if (split < n) {
    out[n - 1] = L[n] - lp;
    for (std::size_t d = n - 1; d > split; --d) {
      const double carried = lq + out[d];
      if (L[d] == kNegInf) {
        if (carried != kNegInf) return false;
        out[d - 1] = kNegInf;
        continue;
      }
      const double t = carried - L[d];
      if (!(t < 0.0)) return false;
      out[d - 1] = L[d] + std::log1p(-std::exp(t)) - lp;
    }
  }

  for (std::size_t d = 0; d <= n; ++d) {
    if (d < n && (std::isnan(out[d]) || out[d] == std::numeric_limits<double>::infinity())) {
      return false;
    }
    const double recon =
        log_add_exp(d > 0 ? lp + out[d - 1] : kNegInf, d < n ? lq + out[d] : kNegInf);
    if (recon == kNegInf && L[d] == kNegInf) continue;
    if (!(std::abs(recon - L[d]) <= kRecursionTolerance)) return false;
  }
  return std::abs(log_sum_exp(out)) <= kRecursionTolerance;
}

}  // namespace detail

Pmf pmf(const BernoulliVector& probs, const PmfOptions& options) {
  if (probs.size() > options.max_trials) {
    throw SizeError(fmt::format("{} trials exceeds the configured cap of {}", probs.size(),
                                options.max_trials));
  }
  std::vector<double> linear = detail::convolve_linear(probs.p());
  const bool underflow =
      std::any_of(linear.begin(), linear.end(), [](double v) { return v < DBL_MIN; });
  if (!underflow) return Pmf::from_probs(std::move(linear));
  return Pmf(std::move(linear), detail::convolve_log(probs.p()));
}

Pmf leave_one_out_pmf(const Pmf& full, double p_i) {
  if (!interior_probability(p_i)) {
    throw DomainError(fmt::format("removed probability {} is outside (0, 1)", p_i));
  }
  if (full.trials() == 0) throw DomainError("cannot remove a trial from a PMF with no trials");

  const std::size_t n = full.trials();
  const auto linear = full.probs();
  const bool underflow =
      std::any_of(linear.begin(), linear.end(), [](double v) { return v < DBL_MIN; });
  if (!underflow) {
    std::vector<double> out(n);
    if (detail::deconvolve_linear(linear, p_i, out) &&
        std::all_of(out.begin(), out.end(), [](double v) { return v >= DBL_MIN; })) {
      return Pmf::from_probs(std::move(out));
    }
  }
  std::vector<double> out_log(n);
  if (detail::deconvolve_log(full.log_probs(), p_i, out_log)) {
    return Pmf::from_log_probs(std::move(out_log));
  }
  throw InstabilityError(
      fmt::format("leave-one-out recursion failed validation for p = {:.17g}", p_i));
}

Pmf leave_one_out_pmf(const Pmf& full, const BernoulliVector& probs, std::size_t index) {
  if (probs.size() != full.trials()) {
    throw DomainError("PMF and probability vector describe different numbers of trials");
  }
  if (index >= probs.size()) throw DomainError(fmt::format("trial index {} out of range", index));
  if (probs.size() == 1) return Pmf::from_probs({1.0});

  try {
    return leave_one_out_pmf(full, probs[index]);
  } catch (const InstabilityError&) {
  }

  std::vector<double> rest;
  rest.reserve(probs.size() - 1);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (j != index) rest.push_back(probs[j]);
  }
  Pmf reduced = pmf(BernoulliVector(std::move(rest)), PmfOptions{probs.size()});
  if (recursion_residual(full, reduced, probs[index]) > detail::kRecursionTolerance) {
    throw InstabilityError(
        fmt::format("reconvolved PMF without trial {} does not satisfy the recursion", index));
  }
  return reduced;
}

double pmf_ratio(const Pmf& pmf, std::size_t d_num, std::size_t d_den) {
  if (d_num > pmf.trials() || d_den > pmf.trials()) {
    throw DomainError(fmt::format("count outside the support {{0..{}}}", pmf.trials()));
  }
  const auto logs = pmf.log_probs();
  if (logs[d_den] == kNegInf) {
    throw DivisionError(fmt::format("P(S = {}) is zero", d_den));
  }
  if (d_num == d_den) return 1.0;
  return std::exp(logs[d_num] - logs[d_den]);
}

NormalApprox normal_approx(const BernoulliVector& probs) {
  NormalApprox approx;
  for (double p : probs.p()) {
    approx.mu += p;
    approx.sigma2 += p * (1.0 - p);
  }
  return approx;
}

double max_normal_deviation(const Pmf& pmf, const NormalApprox& approx) {
  double worst = 0.0;
  for (std::size_t d = 0; d < pmf.size(); ++d) {
    worst = std::max(worst, std::abs(approx.density(static_cast<double>(d)) - pmf[d]));
  }
  return worst;
}

double recursion_residual(const Pmf& full, const Pmf& reduced, double p_i) {
  if (full.trials() != reduced.trials() + 1) return std::numeric_limits<double>::infinity();
  const std::size_t n = full.trials();
  const double lp = std::log(p_i);
  const double lq = std::log1p(-p_i);
  const auto L = full.log_probs();
  const auto l = reduced.log_probs();
  double worst = 0.0;
  for (std::size_t d = 0; d <= n; ++d) {
    const double recon =
        detail::log_add_exp(d > 0 ? lp + l[d - 1] : kNegInf, d < n ? lq + l[d] : kNegInf);
    if (recon == kNegInf && L[d] == kNegInf) continue;
    const double err = std::abs(recon - L[d]);
    if (std::isnan(err)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, err);
  }
  return worst;
}

double log_concavity_excess(const Pmf& pmf) {
  const auto l = pmf.log_probs();
  double worst = kNegInf;
  for (std::size_t d = 1; d + 1 < l.size(); ++d) {
    if (l[d - 1] == kNegInf || l[d] == kNegInf || l[d + 1] == kNegInf) continue;
    worst = std::max(worst, l[d - 1] + l[d + 1] - 2.0 * l[d]);
  }
  return worst;
}

}  // namespace swingcal
