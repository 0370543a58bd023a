#include "swingcal/logit_shift.hpp"

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

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("ScoreSet validation") {
  CHECK_THROWS_AS(ScoreSet({}), SizeError);
  CHECK_THROWS_AS(ScoreSet({0.2, 1.0}), DomainError);
  CHECK_THROWS_AS(ScoreSet({0.2, 0.3}, {"a", "a"}, {}), DomainError);
  CHECK_THROWS_AS(ScoreSet({0.2, 0.3}, {"a"}, {}), SizeError);
  CHECK_THROWS_AS(ScoreSet({0.2, 0.3}, {}, {"g"}), SizeError);

  const ScoreSet set({0.2, 0.3, 0.4}, {"a", "b", "c"}, {"x", "y", "x"});
  REQUIRE(set.ids().has_value());
  CHECK((*set.groups())[2] == "x");
  const std::vector<std::size_t> members{0, 2};
  const ScoreSet sub = set.subset(members);
  CHECK(sub.size() == 2);
  CHECK(sub[1] == 0.4);
  CHECK_FALSE(sub.groups().has_value());
}

TEST_CASE("h at fixed points and limits") {
  CHECK(swing_total(1.0, ScoreSet({0.2, 0.8})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(swing_total(0.5, ScoreSet({0.5, 0.5, 0.5})) == doctest::Approx(2.0).epsilon(1e-15));
  const ScoreSet set(uniform_scores(10, 1));
  CHECK(swing_total(1e-12, set) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(swing_total(1e12, set) < 1e-9);
  CHECK(shift_probability(0.5, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("h is strictly decreasing") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ScoreSet set(uniform_scores(5 + seed * 10, seed));
    double previous = swing_total(std::exp(-6.0), set);
    for (int k = 1; k <= 120; ++k) {
      const double current = swing_total(std::exp(-6.0 + 0.1 * k), set);
      CHECK(current < previous);
      previous = current;
    }
  }
}

TEST_CASE("solve_alpha on hand-solved instances") {
  const ShiftResult fixed = solve_alpha(ScoreSet({0.2, 0.8}), 1.0);
  CHECK(fixed.alpha == 1.0);
  CHECK(fixed.iterations == 0);
  CHECK(fixed.recalibrated[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(fixed.recalibrated[1] == doctest::Approx(0.8).epsilon(1e-15));

  const ShiftResult half = solve_alpha(ScoreSet({0.5, 0.5, 0.5}), 2.0);
  CHECK(half.alpha == doctest::Approx(0.5).epsilon(1e-9));
  for (double v : half.recalibrated) CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(half.residual <= 1e-10);
}

TEST_CASE("solve_alpha matches an independent root") {
  // 0.1, 0.5, 0.9 with D = 2; root computed separately to 17 digits.
  const ShiftResult r = solve_alpha(ScoreSet({0.1, 0.5, 0.9}), 2.0, {1e-14, 200});
  CHECK(r.alpha == doctest::Approx(0.30539648977215368).epsilon(1e-12));
  CHECK(r.recalibrated[0] == doctest::Approx(0.26676850764664049).epsilon(1e-12));
  CHECK(r.recalibrated[1] == doctest::Approx(0.76605078061343787).epsilon(1e-12));
  CHECK(r.recalibrated[2] == doctest::Approx(0.96718071173992163).epsilon(1e-12));
}

TEST_CASE("solve_alpha sum constraint and rank preservation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = uniform_scores(1000, seed);
    const double target = std::round(0.8 * sum(p));
    const ShiftResult r = solve_alpha(ScoreSet(p), target);
    CHECK(std::abs(sum(r.recalibrated) - target) <= 1e-8);
    CHECK(r.residual <= 1e-10);
    CHECK(r.alpha > 0.0);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      if (p[i] < p[i + 1]) CHECK(r.recalibrated[i] < r.recalibrated[i + 1]);
      if (p[i] > p[i + 1]) CHECK(r.recalibrated[i] > r.recalibrated[i + 1]);
    }
  }
}

TEST_CASE("solve_alpha accepts real-valued targets and respects tolerance") {
  const auto p = uniform_scores(50, 9);
  const ShiftResult r = solve_alpha(ScoreSet(p), 20.37, {1e-13, 200});
  CHECK(std::abs(sum(r.recalibrated) - 20.37) <= 1e-12);
  const ShiftResult at_sum = solve_alpha(ScoreSet(p), sum(p));
  CHECK(at_sum.alpha == 1.0);
}

TEST_CASE("solve_alpha errors") {
  const ScoreSet set({0.3, 0.6, 0.9});
  CHECK_THROWS_AS(solve_alpha(set, 0.0), TargetError);
  CHECK_THROWS_AS(solve_alpha(set, 3.0), TargetError);
  CHECK_THROWS_AS(solve_alpha(set, -1.0), TargetError);
  CHECK_THROWS_AS(solve_alpha(set, std::nan("")), TargetError);
  CHECK_THROWS_AS(solve_alpha(set, 1.0, {0.0, 200}), DomainError);
  CHECK_THROWS_AS(solve_alpha(set, 2.999999, {1e-10, 0}), ConvergenceError);
}

TEST_CASE("equal scores give D / N") {
  for (int d = 1; d < 10; ++d) {
    const ShiftResult r = solve_alpha(ScoreSet(std::vector<double>(10, 0.37)), d);
    for (double v : r.recalibrated) CHECK(v == doctest::Approx(d / 10.0).epsilon(1e-10));
  }
}

TEST_CASE("kl_objective") {
  const ScoreSet half({0.5});
  CHECK(kl_objective(std::vector<double>{0.75}, half) ==
        doctest::Approx(0.13081203594113696).epsilon(1e-14));
  const auto p = uniform_scores(20, 4);
  CHECK(kl_objective(p, ScoreSet(p)) == 0.0);
  CHECK_THROWS_AS(kl_objective(std::vector<double>{1.0}, half), DomainError);
  CHECK_THROWS_AS(kl_objective(std::vector<double>{0.5, 0.5}, half), SizeError);
}

TEST_CASE("logit shift minimises KL under the sum constraint") {
  std::mt19937_64 rng(77);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = uniform_scores(40, seed + 50);
    const ShiftResult r = solve_alpha(ScoreSet(p), std::round(1.2 * sum(p)));
    for (int k = 0; k < 200; ++k) {
      const auto at = oracle::complemented(r.recalibrated);
      const auto delta = oracle::sum_preserving_perturbation(at, rng);
      CHECK(oracle::kl_change(at, delta, p) >= 0.0L);
    }
  }
}

TEST_CASE("intercept shift") {
  const LogisticScore zero{0.0, {0.0}};
  const LogisticScore same = intercept_shift(zero, 1.0);
  CHECK(same.intercept == 0.0);
  CHECK(intercept_shift(zero, 0.5).probabilities()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(intercept_shift(zero, 0.0), DomainError);
  CHECK_THROWS_AS(intercept_shift(zero, -1.0), DomainError);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 2.0);
  LogisticScore model{normal(rng), {}};
  for (int i = 0; i < 100; ++i) model.linear_terms.push_back(normal(rng));
  const double alpha = 3.7;
  const auto shifted = intercept_shift(model, alpha).probabilities();
  const auto original = model.probabilities();
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double eta = model.intercept + model.linear_terms[i];
    CHECK(original[i] == doctest::Approx(1.0 / (1.0 + std::exp(-eta))).epsilon(1e-14));
    CHECK(std::abs(shifted[i] - original[i] / (original[i] + (1.0 - original[i]) * alpha)) < 1e-12);
  }
}

TEST_CASE("group recalibration") {
  const auto p = uniform_scores(30, 12);
  const ScoreSet flat(p);
  const auto members = group_members(flat);
  REQUIRE(members.size() == 1);
  CHECK(members.begin()->first == kAllUnits);
  const auto single = recalibrate_groups(flat, {{kAllUnits, 12.0}});
  CHECK(single.at(kAllUnits).alpha == solve_alpha(flat, 12.0).alpha);

  std::vector<std::string> groups(30);
  for (std::size_t i = 0; i < 30; ++i) groups[i] = i % 3 == 0 ? "north" : "south";
  const ScoreSet grouped(p, {}, groups);
  const auto split = group_members(grouped);
  REQUIRE(split.size() == 2);
  std::map<std::string, double> targets;
  for (const auto& [g, idx] : split) {
    double s = 0.0;
    for (std::size_t i : idx) s += p[i];
    targets[g] = std::round(s);
  }
  const auto solved = recalibrate_groups(grouped, targets);
  for (const auto& [g, idx] : split) {
    const ShiftResult& r = solved.at(g);
    CHECK(r.recalibrated.size() == idx.size());
    CHECK(std::abs(sum(r.recalibrated) - targets[g]) <= 1e-8);
    // Rounding moves the total by at most 0.5, so alpha stays near 1.
    CHECK(std::abs(std::log(r.alpha)) < 0.5);
  }

  CHECK_THROWS_AS(recalibrate_groups(grouped, {{"north", 3.0}}), MissingTargetError);
  auto extra = targets;
  extra["west"] = 1.0;
  CHECK_THROWS_AS(recalibrate_groups(grouped, extra), TargetError);
  auto bad = targets;
  bad["north"] = 0.0;
  CHECK_THROWS_WITH_AS(recalibrate_groups(grouped, bad), doctest::Contains("north"), TargetError);

  const ScoreSet lonely({0.2, 0.4, 0.6}, {}, {"a", "a", "b"});
  CHECK_THROWS_AS(recalibrate_groups(lonely, {{"a", 1.0}, {"b", 0.5}}), TargetError);
}
