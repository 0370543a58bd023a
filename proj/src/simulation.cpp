#include "swingcal/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "swingcal/errors.hpp"
#include "swingcal/format.hpp"
#include "swingcal/logit_shift.hpp"

namespace swingcal {

namespace {

double beta_draw(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  return x / (x + y);
}

double mixture_draw(Rng& rng, double a1, double b1, double a2, double b2) {
  return std::bernoulli_distribution(0.5)(rng) ? beta_draw(rng, a1, b1) : beta_draw(rng, a2, b2);
}

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

ScoreSampler sampler_for(Setting setting) {
  switch (setting) {
    case Setting::Uniform:
      return {"Uniform", "Uniform(0, 1)",
              [](Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }};
    case Setting::CloseToZero:
      return {"CloseToZero", "Beta(0.1, 3)", [](Rng& rng) { return beta_draw(rng, 0.1, 3.0); }};
    case Setting::CloseToOne:
      return {"CloseToOne", "Beta(3, 0.1)", [](Rng& rng) { return beta_draw(rng, 3.0, 0.1); }};
    case Setting::Extremal:
      return {"Extremal", "0.5*Beta(0.1, 3) + 0.5*Beta(3, 0.1)",
              [](Rng& rng) { return mixture_draw(rng, 0.1, 3.0, 3.0, 0.1); }};
    case Setting::Central:
      return {"Central", "Beta(3, 3)", [](Rng& rng) { return beta_draw(rng, 3.0, 3.0); }};
    case Setting::Bimodal:
      return {"Bimodal", "0.5*Beta(3, 10) + 0.5*Beta(10, 3)",
              [](Rng& rng) { return mixture_draw(rng, 3.0, 10.0, 10.0, 3.0); }};
  }
  throw DomainError("unknown setting");
}

ApproximationError approximation_error(std::span<const double> shifted,
                                       std::span<const double> posterior) {
  if (shifted.empty() || shifted.size() != posterior.size()) {
    throw SizeError("score vectors must be non-empty and of equal length");
  }
  const auto n = static_cast<double>(shifted.size());
  const double mean_star = std::accumulate(posterior.begin(), posterior.end(), 0.0) / n;
  double residual_ss = 0.0;
  double total_ss = 0.0;
  ApproximationError error;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    const double diff = shifted[i] - posterior[i];
    residual_ss += diff * diff;
    total_ss += (posterior[i] - mean_star) * (posterior[i] - mean_star);
    error.max_abs = std::max(error.max_abs, std::abs(diff));
  }
  error.rmse = std::sqrt(residual_ss / n);
  const auto [lo, hi] = std::minmax_element(posterior.begin(), posterior.end());
  if (*hi - *lo > 1e-12) error.one_minus_r2 = residual_ss / total_ss;
  return error;
}

std::vector<double> draw_scores(const ScoreSampler& sampler, std::size_t n, Rng& rng) {
  std::vector<double> scores;
  scores.reserve(n);
  while (scores.size() < n) {
    const double p = sampler.draw(rng);
    if (p > 0.0 && p < 1.0) scores.push_back(p);
  }
  return scores;
}

std::uint64_t row_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (std::uint64_t{words[0]} << 32) | words[1];
}

SimRow run_setting(const SimSetting& setting, const PosteriorOptions& options) {
  if (setting.n < 2) throw DomainError("simulation needs at least two units");
  if (std::abs(std::abs(setting.offset) - 0.20) > 1e-12) {
    throw DomainError(fmt::format("offset must be -0.20 or +0.20, got {}", setting.offset));
  }

  SimRow row;
  row.setting = setting.sampler.name;
  row.distribution = setting.sampler.distribution;
  row.offset = setting.offset;
  row.seed = setting.seed;
  row.n = setting.n;

  Rng rng(setting.seed);
  const std::vector<double> priors = draw_scores(setting.sampler, setting.n, rng);
  const double expected = std::accumulate(priors.begin(), priors.end(), 0.0);
  row.target = std::llround((1.0 + setting.offset) * expected);
  row.feasible = row.target > 0 && row.target < static_cast<std::int64_t>(setting.n);
  if (!row.feasible) return row;

  const ScoreSet scores(priors);
  const ShiftResult shift = solve_alpha(scores, static_cast<double>(row.target));
  const PosteriorResult post = exact_posterior(scores, row.target, options);

  const ApproximationError error = approximation_error(shift.recalibrated, post.p_star);
  row.rmse = error.rmse;
  row.one_minus_r2 = error.one_minus_r2;
  row.max_abs_error = error.max_abs;
  return row;
}

SimReport run_table(std::size_t n, std::uint64_t seed, const PosteriorOptions& options) {
  SimReport report;
  report.n = n;
  report.seed = seed;
  std::uint64_t index = 0;
  for (Setting setting : kAllSettings) {
    for (double offset : kOffsets) {
      report.rows.push_back(
          run_setting({sampler_for(setting), offset, n, row_seed(seed, index++)}, options));
    }
  }
  return report;
}

SimSummary replicate(Setting setting, double offset, std::size_t n, std::uint64_t seed,
                     std::size_t replicates, const PosteriorOptions& options) {
  SimSummary summary;
  summary.setting = sampler_for(setting).name;
  summary.offset = offset;
  summary.n = n;
  summary.replicates = replicates;
  std::vector<double> rmse, r2, worst;
  for (std::size_t r = 0; r < replicates; ++r) {
    const SimRow row = run_setting({sampler_for(setting), offset, n, row_seed(seed, r)}, options);
    if (!row.feasible) continue;
    ++summary.feasible;
    rmse.push_back(*row.rmse);
    worst.push_back(*row.max_abs_error);
    if (row.one_minus_r2) r2.push_back(*row.one_minus_r2);
  }
  summary.median_rmse = median(std::move(rmse));
  summary.median_one_minus_r2 = median(std::move(r2));
  summary.median_max_abs_error = median(std::move(worst));
  return summary;
}

nlohmann::json to_json(const SimReport& report) {
  auto number = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(round_output(*v)) : nlohmann::json(nullptr);
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const SimRow& row : report.rows) {
    rows.push_back({{"setting", row.setting},
                    {"distribution", row.distribution},
                    {"offset", row.offset},
                    {"D", row.target},
                    {"feasible", row.feasible},
                    {"rmse", number(row.rmse)},
                    {"one_minus_r2", number(row.one_minus_r2)},
                    {"max_abs_error", number(row.max_abs_error)},
                    {"seed", row.seed},
                    {"n", row.n}});
  }
  return {{"n", report.n}, {"seed", report.seed}, {"rows", std::move(rows)}};
}

std::string format_table(const SimReport& report) {
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("--"); };
  std::string out = fmt::format("{:<12} {:<36} {:>10} {:>6} {:>18} {:>18}\n", "Setting",
                                "Sampling Distribution", "Observed D", "D", "RMSE", "1 - R^2");
  for (const SimRow& row : report.rows) {
    out += fmt::format("{:<12} {:<36} {:>10} {:>6} {:>18} {:>18}\n", row.setting,
                       row.distribution, fmt::format("{:+.0f}%", row.offset * 100.0), row.target,
                       cell(row.rmse), cell(row.one_minus_r2));
  }
  out += fmt::format("n = {}, seed = {}\n", report.n, report.seed);
  return out;
}

}  // namespace swingcal
