#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "swingcal/simulation.hpp"
#include "swingcal/verify.hpp"

namespace swingcal {

enum class Method { LogitShift, ExactPosterior, Both };

/// Parses "logit-shift", "exact-posterior" or "both"; throws UsageError otherwise.
Method parse_method(const std::string& text);

struct RecalibrateConfig {
  std::filesystem::path input;
  /// Exactly one of total / targets is set.
  std::optional<double> total;
  std::optional<std::filesystem::path> targets;
  Method method = Method::LogitShift;
  double tolerance = 1e-10;
  std::optional<double> clamp_epsilon;
  std::filesystem::path output;
  std::filesystem::path diagnostics;
  unsigned threads = 0;
};

/// Writes the score file with `recalibrated` and/or `posterior` columns and
/// a per-group diagnostics CSV.
void cmd_recalibrate(const RecalibrateConfig& config);

struct SimulateConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path output;
  /// Defaults to `output` with a .txt extension (.table.txt if output is .txt).
  std::optional<std::filesystem::path> table;
  unsigned threads = 0;
};

SimReport cmd_simulate(const SimulateConfig& config, std::ostream& out);

/// Prints one line per property; returns 0 when all pass, 3 otherwise.
int cmd_verify(const VerifyOptions& options, std::ostream& out);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swingcal
