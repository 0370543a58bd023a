#include "swingcal/score_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "swingcal/errors.hpp"
#include "swingcal/format.hpp"

namespace swingcal {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

bool blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

ScoreTable parse_score_file(std::istream& in, const ParseOptions& options) {
  if (options.clamp_epsilon) {
    const double eps = *options.clamp_epsilon;
    if (!(eps > 0.0 && eps < 0.5)) throw DomainError("clamp epsilon must lie in (0, 0.5)");
  }

  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (blank(line)) throw ParseError("missing header", line_no == 0 ? 1 : line_no);

  table.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
  table.header = split(line, table.delimiter);
  std::optional<std::size_t> score_column;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    auto claim = [&](std::optional<std::size_t>& slot) {
      if (slot) throw ParseError(fmt::format("duplicate column '{}'", name), line_no);
      slot = c;
    };
    if (name == "score") claim(score_column);
    if (name == "id") claim(table.id_column);
    if (name == "group") claim(table.group_column);
  }
  if (!score_column) throw ParseError("header has no 'score' column", line_no);
  table.score_column = *score_column;

  std::map<std::string, std::pair<std::size_t, std::size_t>> group_rows;  // count, first line
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto fields = split(line, table.delimiter);
    if (fields.size() != table.header.size()) {
      throw ParseError(fmt::format("expected {} fields, found {}", table.header.size(),
                                   fields.size()),
                       line_no);
    }
    const auto& text = fields[table.score_column];
    const auto value = parse_double(text);
    if (!value || !std::isfinite(*value)) {
      throw ParseError(fmt::format("score '{}' is not a number", text), line_no);
    }
    double score = *value;
    if (!(score > 0.0 && score < 1.0)) {
      if (!options.clamp_epsilon || score < 0.0 || score > 1.0) {
        throw ParseError(fmt::format("score {} is outside (0, 1)", text), line_no);
      }
    }
    if (options.clamp_epsilon) {
      score = std::clamp(score, *options.clamp_epsilon, 1.0 - *options.clamp_epsilon);
    }
    const std::string group = table.group_column ? fields[*table.group_column] : kAllUnits;
    auto& entry = group_rows.try_emplace(group, 0, line_no).first->second;
    ++entry.first;

    table.scores.push_back(score);
    table.rows.push_back(std::move(fields));
    table.lines.push_back(line_no);
  }

  if (table.rows.empty()) throw ParseError("no data rows", line_no);
  for (const auto& [group, entry] : group_rows) {
    if (entry.first < 2) {
      throw ParseError(
          table.group_column ? fmt::format("group '{}' has fewer than two rows", group)
                             : std::string("file has fewer than two rows"),
          entry.second);
    }
  }
  if (table.id_column) {
    std::map<std::string, std::size_t> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& id = table.rows[r][*table.id_column];
      if (!seen.emplace(id, r).second) {
        throw ParseError(fmt::format("duplicate id '{}'", id), table.lines[r]);
      }
    }
  }
  return table;
}

ScoreTable read_score_file(const std::filesystem::path& path, const ParseOptions& options) {
  auto in = open(path);
  return parse_score_file(in, options);
}

void write_score_file(std::ostream& out, const ScoreTable& table,
                      const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
  const char delim = table.delimiter;
  auto write_row = [&](const std::vector<std::string>& fields, auto&& tail) {
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c > 0) out << delim;
      out << fields[c];
    }
    tail();
    out << '\n';
  };
  write_row(table.header, [&] {
    for (const auto& [name, values] : extra) out << delim << name;
  });
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    write_row(table.rows[r], [&] {
      for (const auto& [name, values] : extra) out << delim << format_number(values.at(r));
    });
  }
}

ScoreSet to_score_set(const ScoreTable& table, bool with_groups) {
  std::vector<std::string> ids;
  std::vector<std::string> groups;
  for (const auto& row : table.rows) {
    if (table.id_column) ids.push_back(row[*table.id_column]);
    if (with_groups && table.group_column) groups.push_back(row[*table.group_column]);
  }
  return ScoreSet(table.scores, std::move(ids), std::move(groups));
}

std::map<std::string, double> parse_targets(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> group_col;
  std::optional<std::size_t> total_col;
  char delim = ',';
  std::size_t columns = 0;
  std::map<std::string, double> targets;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (!group_col) {
      delim = line.find('\t') != std::string::npos ? '\t' : ',';
      const auto header = split(line, delim);
      columns = header.size();
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "group") group_col = c;
        if (header[c] == "total") total_col = c;
      }
      if (!group_col || !total_col) {
        throw ParseError("targets header must name 'group' and 'total' columns", line_no);
      }
      continue;
    }
    const auto fields = split(line, delim);
    if (fields.size() != columns) {
      throw ParseError(fmt::format("expected {} fields, found {}", columns, fields.size()),
                       line_no);
    }
    const auto total = parse_double(fields[*total_col]);
    if (!total || !std::isfinite(*total)) {
      throw ParseError(fmt::format("total '{}' is not a number", fields[*total_col]), line_no);
    }
    if (!targets.emplace(fields[*group_col], *total).second) {
      throw ParseError(fmt::format("group '{}' listed twice", fields[*group_col]), line_no);
    }
  }
  if (!group_col) throw ParseError("missing header", line_no == 0 ? 1 : line_no);
  return targets;
}

std::map<std::string, double> read_targets(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_targets(in);
}

}  // namespace swingcal
