#pragma once

// Monte Carlo comparison of logit-shift and exact-posterior scores.
//
// Each row draws n prior scores from one of six sampling distributions, sets
// the observed total 20% above or below their expectation, and measures how
// far the logit-shift scores land from the exact posterior ones.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "swingcal/posterior.hpp"

namespace swingcal {

using Rng = std::mt19937_64;

enum class Setting { Uniform, CloseToZero, CloseToOne, Extremal, Central, Bimodal };

inline constexpr std::array kAllSettings = {Setting::Uniform,  Setting::CloseToZero,
                                            Setting::CloseToOne, Setting::Extremal,
                                            Setting::Central,  Setting::Bimodal};
inline constexpr std::array kOffsets = {-0.20, 0.20};

struct ScoreSampler {
  std::string name;
  std::string distribution;
  std::function<double(Rng&)> draw;
};

ScoreSampler sampler_for(Setting setting);

struct SimSetting {
  ScoreSampler sampler;
  double offset = -0.20;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

struct SimRow {
  std::string setting;
  std::string distribution;
  double offset = 0.0;
  std::int64_t target = 0;
  bool feasible = false;
  std::optional<double> rmse;
  /// Absent when the row is infeasible or the posterior scores have no spread.
  std::optional<double> one_minus_r2;
  std::optional<double> max_abs_error;
  std::uint64_t seed = 0;
  std::size_t n = 0;
};

struct SimReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<SimRow> rows;
};

/// Median metrics over independent replicates of one setting and offset.
struct SimSummary {
  std::string setting;
  double offset = 0.0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::size_t feasible = 0;
  std::optional<double> median_rmse;
  std::optional<double> median_one_minus_r2;
  std::optional<double> median_max_abs_error;
};

/// Discrepancy between logit-shift and exact posterior scores.
struct ApproximationError {
  double rmse = 0.0;
  /// Residual over centred total sum of squares of the posterior scores;
  /// absent when the posterior scores have no spread.
  std::optional<double> one_minus_r2;
  double max_abs = 0.0;
};

/// Throws SizeError when the vectors differ in length or are empty.
ApproximationError approximation_error(std::span<const double> shifted,
                                       std::span<const double> posterior);

/// Draws n scores, rejecting draws that round to exactly 0 or 1.
std::vector<double> draw_scores(const ScoreSampler& sampler, std::size_t n, Rng& rng);

/// Seed for row `index` of a table run with `master` seed.
std::uint64_t row_seed(std::uint64_t master, std::uint64_t index);

/// Throws DomainError unless n >= 2 and offset is -0.20 or +0.20.
SimRow run_setting(const SimSetting& setting, const PosteriorOptions& options = {});

/// All 12 setting x offset rows, in table order.
SimReport run_table(std::size_t n, std::uint64_t seed, const PosteriorOptions& options = {});

SimSummary replicate(Setting setting, double offset, std::size_t n, std::uint64_t seed,
                     std::size_t replicates, const PosteriorOptions& options = {});

nlohmann::json to_json(const SimReport& report);
std::string format_table(const SimReport& report);

}  // namespace swingcal
