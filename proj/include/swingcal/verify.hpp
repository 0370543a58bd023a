#pragma once

// Small-scale self-checks of the recalibration identities, runnable from the CLI.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace swingcal {

struct VerifyOptions {
  /// Largest instance size; enumeration checks need max_n <= 20.
  std::size_t max_n = 15;
  /// Random instances per property.
  std::size_t seeds = 100;
  std::uint64_t seed = 20211;
  unsigned threads = 0;
};

struct PropertyCheck {
  std::string name;
  bool passed = false;
  /// Worst observed value of the checked quantity.
  double worst = 0.0;
  /// The property holds when worst <= threshold.
  double threshold = 0.0;
};

/// Throws UsageError if max_n is outside [2, 20] or seeds is zero.
std::vector<PropertyCheck> run_verification(const VerifyOptions& options);

}  // namespace swingcal
