#include "swingcal/posterior.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "swingcal/errors.hpp"

using namespace swingcal;

namespace {

std::vector<double> uniform_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  for (double& v : p) {
    do v = u(rng); while (v == 0.0);
  }
  return p;
}

std::vector<double> beta_scores(std::size_t n, double a, double b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  std::vector<double> p;
  while (p.size() < n) {
    const double x = ga(rng), y = gb(rng);
    const double v = x / (x + y);
    if (v > 0.0 && v < 1.0) p.push_back(v);
  }
  return p;
}

void check_close(std::span<const double> actual, const std::vector<double>& expected, double tol) {
  REQUIRE(actual.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(actual[i] - expected[i]) < tol);
}

}  // namespace

TEST_CASE("posterior of two units") {
  const PosteriorResult r = exact_posterior(ScoreSet({0.2, 0.8}), 1);
  check_close(r.p_star, {0.04 / 0.68, 0.64 / 0.68}, 1e-15);
  check_close(r.phi, {4.0, 0.25}, 1e-14);
  check_close(r.xi, {0.2 / 0.68, 0.8 / 0.68}, 1e-14);
  check_close(enumeration_oracle(ScoreSet({0.2, 0.8}), 1).p_star, {0.04 / 0.68, 0.64 / 0.68}, 1e-15);
}

TEST_CASE("posterior under exchangeability") {
  check_close(exact_posterior(ScoreSet({0.5, 0.5, 0.5}), 2).p_star, {2.0 / 3, 2.0 / 3, 2.0 / 3},
              1e-15);
  const ScoreSet ten(std::vector<double>(10, 0.71));
  check_close(enumeration_oracle(ten, 4).p_star, std::vector<double>(10, 0.4), 1e-14);
  check_close(exact_posterior(ten, 4).p_star, std::vector<double>(10, 0.4), 1e-14);
}

TEST_CASE("posterior against independently computed values") {
  const ScoreSet three({0.1, 0.5, 0.9});
  const PosteriorResult r = exact_posterior(three, 2);
  check_close(r.p_star, {0.10989010989010989, 0.90109890109890110, 0.98901098901098901}, 1e-15);
  check_close(r.phi, {0.9, 0.10975609756097561, 0.1}, 1e-14);
  check_close(enumeration_oracle(three, 2).p_star, {r.p_star.begin(), r.p_star.end()}, 1e-12);

  const ScoreSet five({0.15, 0.35, 0.55, 0.75, 0.95});
  const PosteriorResult s = exact_posterior(five, 2);
  check_close(s.p_star,
              {0.041686243539631921, 0.12525866464066858, 0.27600891705737107,
               0.62445393020303300, 0.93259224455929543},
              1e-14);
  check_close(s.phi,
              {4.0568345323741007, 3.7603351955307263, 3.2059760956175299, 1.8041974834309865,
               1.3733197556008147},
              1e-13);
}

TEST_CASE("posterior matches enumeration for 12 uniform units") {
  const auto p = uniform_scores(12, 2021);
  check_close(exact_posterior(ScoreSet(p), 7).p_star, oracle::enumerate_posterior(p, 7), 1e-10);
}

TEST_CASE("enumeration oracle agrees with the extended-precision oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = uniform_scores(2 + seed % 14, seed);
    const int d = 1 + static_cast<int>(seed % (p.size() - 1));
    check_close(enumeration_oracle(ScoreSet(p), d).p_star, oracle::enumerate_posterior(p, d),
                1e-12);
  }
}

TEST_CASE("posterior invariants on larger instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = seed % 2 ? uniform_scores(400, seed) : beta_scores(400, 0.1, 3.0, seed);
    const double mu = std::accumulate(p.begin(), p.end(), 0.0);
    const auto d = std::max<std::int64_t>(1, std::llround((seed % 4 < 2 ? 0.8 : 1.2) * mu));
    const PosteriorResult r = exact_posterior(ScoreSet(p), d);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      total += r.p_star[i];
      CHECK(r.p_star[i] > 0.0);
      CHECK(r.p_star[i] < 1.0);
      CHECK(std::abs(r.p_star[i] - p[i] * r.xi[i]) <= 1e-12);
      CHECK(std::abs(r.p_star[i] - p[i] / (p[i] + (1.0 - p[i]) * r.phi[i])) <= 1e-9);
    }
    CHECK(std::abs(total - static_cast<double>(d)) <= 1e-9);
  }
}

TEST_CASE("posterior is independent of the thread count") {
  const ScoreSet set(uniform_scores(300, 6));
  const auto one = exact_posterior(set, 140, {1, {}});
  const auto four = exact_posterior(set, 140, {4, {}});
  CHECK(one.p_star == four.p_star);
  CHECK(one.phi == four.phi);
}

TEST_CASE("posterior targets far from the mean use log-space values") {
  // P(S = 1) for 2000 scores near 0.9 is around 1e-2000.
  const auto p = beta_scores(2000, 30.0, 3.0, 17);
  const PosteriorResult r = exact_posterior(ScoreSet(p), 1);
  const double total = std::accumulate(r.p_star.begin(), r.p_star.end(), 0.0);
  CHECK(std::abs(total - 1.0) <= 1e-9);
  // With one success the posterior is proportional to the prior odds.
  double odds = 0.0;
  for (double v : p) odds += v / (1.0 - v);
  for (std::size_t i = 0; i < p.size(); i += 97) {
    CHECK(r.p_star[i] == doctest::Approx(p[i] / (1.0 - p[i]) / odds).epsilon(1e-9));
  }
}

TEST_CASE("posterior errors") {
  const ScoreSet set({0.3, 0.6, 0.9});
  CHECK_THROWS_AS(exact_posterior(set, 0), TargetError);
  CHECK_THROWS_AS(exact_posterior(set, 3), TargetError);
  CHECK_THROWS_AS(checked_count(1.5, 3), TargetError);
  CHECK_THROWS_AS(checked_count(std::nan(""), 3), TargetError);
  CHECK(checked_count(2.0, 3) == 2);
  CHECK_THROWS_AS(enumeration_oracle(ScoreSet(std::vector<double>(21, 0.5)), 3), SizeError);
  CHECK_THROWS_AS(enumeration_oracle(set, 3), TargetError);
}

TEST_CASE("bound chain on small instances") {
  {
    const ScoreSet set({0.5, 0.5, 0.5});
    const BoundReport b = bound_report(set, 2, solve_alpha(set, 2.0), exact_posterior(set, 2));
    CHECK(b.lower == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(b.upper == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.phi_min == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b.phi_max == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b.alpha == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(b.gap == doctest::Approx(2.0).epsilon(1e-13));
  }
  {
    const ScoreSet set({0.2, 0.8});
    const BoundReport b = bound_report(set, 1, solve_alpha(set, 1.0), exact_posterior(set, 1));
    CHECK(b.phi_min == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(b.phi_max == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(b.phi_min < b.alpha);
    CHECK(b.alpha < b.phi_max);
    CHECK(b.sigma2 == doctest::Approx(0.32).epsilon(1e-15));
  }
  {
    const ScoreSet set({0.15, 0.35, 0.55, 0.75, 0.95});
    const BoundReport b = bound_report(set, 2, solve_alpha(set, 2.0), exact_posterior(set, 2));
    CHECK(b.lower == doctest::Approx(1.3107974368458409).epsilon(1e-13));
    CHECK(b.upper == doctest::Approx(4.2020961542500683).epsilon(1e-13));
    CHECK(b.alpha == doctest::Approx(2.5021938815103840).epsilon(1e-9));
  }
}

TEST_CASE("bound gap shrinks like 1 / sigma2 for Beta(3, 3) scores") {
  const auto p = beta_scores(1000, 3.0, 3.0, 99);
  const ScoreSet set(p);
  const auto d = std::llround(1.2 * std::accumulate(p.begin(), p.end(), 0.0));
  const BoundReport b = bound_report(set, d, solve_alpha(set, static_cast<double>(d)),
                                     exact_posterior(set, d));
  CHECK(b.gap <= 2.0 / b.sigma2);
  CHECK(b.gap > 0.0);
}

TEST_CASE("bound_report rejects mismatched inputs and detects violations") {
  const ScoreSet set({0.2, 0.5, 0.8});
  const auto post = exact_posterior(set, 1);
  const auto shift = solve_alpha(set, 1.0);
  CHECK_THROWS_AS(bound_report(set, 2, shift, post), DomainError);
  CHECK_THROWS_AS(bound_report(ScoreSet({0.2, 0.8}), 1, shift, post), DomainError);
  ShiftResult wrong = shift;
  wrong.alpha *= 1e3;
  CHECK_THROWS_AS(bound_report(set, 1, wrong, post), BoundViolationError);
}

TEST_CASE("error estimate") {
  CHECK(error_estimate(ScoreSet(std::vector<double>(1000, 0.5))) ==
        doctest::Approx(0.004).epsilon(1e-14));
  CHECK(error_estimate(ScoreSet({0.2, 0.8})) == doctest::Approx(3.125).epsilon(1e-14));

  // Beta(0.1, 3) scores carry less variance per unit than Beta(3, 3) scores.
  CHECK(oracle::beta_mean_pq(0.1, 3.0) < oracle::beta_mean_pq(3.0, 3.0));
  CHECK(oracle::beta_mean_pq(3.0, 3.0) == doctest::Approx(0.25 - 1.0 / 28.0).epsilon(1e-8));
  CHECK(error_estimate(ScoreSet(beta_scores(1000, 0.1, 3.0, 1))) >
        error_estimate(ScoreSet(beta_scores(1000, 3.0, 3.0, 1))));
}
