#pragma once

// Delimiter-separated score files.
//
// The first line is a header. A `score` column is required; `id` and
// `group` are optional. Any other columns are carried through unchanged.
// The delimiter is a tab if the header contains one, otherwise a comma.
// Quoted fields are not supported.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swingcal/logit_shift.hpp"

namespace swingcal {

struct ScoreTable {
  char delimiter = ',';
  std::vector<std::string> header;
  /// Raw field text, one vector per data row.
  std::vector<std::vector<std::string>> rows;
  /// 1-based file line of each data row.
  std::vector<std::size_t> lines;
  std::size_t score_column = 0;
  std::optional<std::size_t> id_column;
  std::optional<std::size_t> group_column;
  /// Parsed (and possibly clamped) scores.
  std::vector<double> scores;
};

struct ParseOptions {
  /// When set, scores in [0, 1] are clamped to [eps, 1 - eps] instead of rejected.
  std::optional<double> clamp_epsilon;
};

/// Throws ParseError (with the 1-based line) on malformed input, scores
/// outside (0, 1), or groups with fewer than two rows.
ScoreTable parse_score_file(std::istream& in, const ParseOptions& options = {});
ScoreTable read_score_file(const std::filesystem::path& path, const ParseOptions& options = {});

/// Writes the original columns followed by `extra` columns, values formatted
/// to 10 significant digits.
void write_score_file(std::ostream& out, const ScoreTable& table,
                      const std::vector<std::pair<std::string, std::vector<double>>>& extra = {});

/// Scores with ids and groups attached when the table has those columns.
ScoreSet to_score_set(const ScoreTable& table, bool with_groups);

/// Per-group totals from a `group,total` file (header required).
std::map<std::string, double> parse_targets(std::istream& in);
std::map<std::string, double> read_targets(const std::filesystem::path& path);

}  // namespace swingcal
