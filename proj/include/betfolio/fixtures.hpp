#pragma once

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "betfolio/error.hpp"
#include "betfolio/market.hpp"

namespace betfolio {

inline constexpr const char* kFixtureHeader =
    "season,matchweek,date,home,away,odds_home,odds_draw,odds_away,"
    "prob_home,prob_draw,prob_away,result";

inline constexpr std::array<const char*, 3> kOutcomeLabels = {"H", "D", "A"};

// One fixture CSV row: a three-outcome match with best decimal odds, model
// probabilities, and the result once played.
struct FixtureRow {
  std::string season;
  int matchweek = 0;
  std::string date;
  std::string home;
  std::string away;
  std::array<double, 3> odds{};
  std::array<double, 3> probs{};
  std::optional<std::size_t> result;  // 0 = H, 1 = D, 2 = A
  int row_number = 0;                 // 1-based source line; the header is line 1
};

// Parsed fixture file: the raw rows plus the same data grouped into
// Matchweek values, ascending by week id, file order within a week.
struct FixtureSet {
  std::vector<FixtureRow> rows;
  std::vector<Matchweek> weeks;
};

inline std::string match_name(const std::string& home, const std::string& away) {
  return home + " vs " + away;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::string row_prefix(int row) { return "row " + std::to_string(row) + ": "; }

inline double parse_double_field(std::string_view text, int row, const char* column) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size())
    fail(ErrorCode::BadField,
         row_prefix(row) + "cannot parse " + column + " value '" + std::string(text) + "'");
  return value;
}

inline int parse_int_field(std::string_view text, int row, const char* column) {
  int value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size())
    fail(ErrorCode::BadField,
         row_prefix(row) + "cannot parse " + column + " value '" + std::string(text) + "'");
  return value;
}

}  // namespace detail

// Parse fixture CSV content. Header and every row are validated; all errors
// carry the 1-based line number of the offending row.
inline FixtureSet parse_fixtures_text(const std::string& text) {
  FixtureSet set;
  std::istringstream stream(text);
  std::string line;
  int row_number = 0;
  bool saw_header = false;

  while (std::getline(stream, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kFixtureHeader)
        fail(ErrorCode::MissingColumn,
             "row 1: header must be exactly '" + std::string(kFixtureHeader) + "'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 12)
      fail(ErrorCode::MissingColumn, detail::row_prefix(row_number) + "expected 12 fields, got " +
                                         std::to_string(fields.size()));

    FixtureRow row;
    row.row_number = row_number;
    row.season = std::string(fields[0]);
    row.matchweek = detail::parse_int_field(fields[1], row_number, "matchweek");
    row.date = std::string(fields[2]);
    row.home = std::string(fields[3]);
    row.away = std::string(fields[4]);
    static constexpr std::array<const char*, 3> odds_cols = {"odds_home", "odds_draw", "odds_away"};
    static constexpr std::array<const char*, 3> prob_cols = {"prob_home", "prob_draw", "prob_away"};
    double prob_total = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      row.odds[j] = detail::parse_double_field(fields[5 + j], row_number, odds_cols[j]);
      if (!(row.odds[j] > 1.0))
        fail(ErrorCode::BadOdds, detail::row_prefix(row_number) + odds_cols[j] + " is " +
                                     std::string(fields[5 + j]) +
                                     ", decimal odds must exceed 1");
      row.probs[j] = detail::parse_double_field(fields[8 + j], row_number, prob_cols[j]);
      if (!(row.probs[j] >= 0.0 && row.probs[j] <= 1.0))
        fail(ErrorCode::BadField,
             detail::row_prefix(row_number) + prob_cols[j] + " is outside [0, 1]");
      prob_total += row.probs[j];
    }
    if (std::abs(prob_total - 1.0) > 1e-6)
      fail(ErrorCode::BadProbabilitySum, detail::row_prefix(row_number) +
                                             "probabilities sum to " + std::to_string(prob_total) +
                                             ", expected 1");
    const std::string_view result = fields[11];
    if (result == "H")
      row.result = 0;
    else if (result == "D")
      row.result = 1;
    else if (result == "A")
      row.result = 2;
    else if (!result.empty())
      fail(ErrorCode::BadResultCode, detail::row_prefix(row_number) + "result must be H, D, A or empty, got '" +
                                         std::string(result) + "'");
    set.rows.push_back(std::move(row));
  }
  if (!saw_header)
    fail(ErrorCode::MissingColumn, "row 1: file is empty, expected the fixture header");

  // Group into matchweeks, ascending by week id.
  std::map<int, std::vector<const FixtureRow*>> by_week;
  std::map<int, std::set<std::pair<std::string, std::string>>> seen;
  for (const FixtureRow& row : set.rows) {
    if (!seen[row.matchweek].insert({row.home, row.away}).second)
      fail(ErrorCode::DuplicateMatch, detail::row_prefix(row.row_number) + match_name(row.home, row.away) +
                                          " appears twice in matchweek " +
                                          std::to_string(row.matchweek));
    by_week[row.matchweek].push_back(&row);
  }
  for (const auto& [week_id, rows] : by_week) {
    std::vector<MatchMarket> matches;
    matches.reserve(rows.size());
    for (const FixtureRow* row : rows) {
      matches.emplace_back(match_name(row->home, row->away),
                           std::vector<std::string>{kOutcomeLabels[0], kOutcomeLabels[1],
                                                    kOutcomeLabels[2]},
                           std::vector<double>(row->odds.begin(), row->odds.end()),
                           std::vector<double>(row->probs.begin(), row->probs.end()), row->result);
    }
    set.weeks.emplace_back(week_id, std::move(matches));
  }
  return set;
}

inline FixtureSet parse_fixtures(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open fixture file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_fixtures_text(buffer.str());
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

// Serialize rows back to the canonical CSV shape; parsing the output
// reproduces the numeric values exactly.
inline std::string write_fixtures(const FixtureSet& set) {
  std::string out = kFixtureHeader;
  out += '\n';
  for (const FixtureRow& row : set.rows) {
    out += row.season;
    out += ',';
    out += std::to_string(row.matchweek);
    out += ',';
    out += row.date;
    out += ',';
    out += row.home;
    out += ',';
    out += row.away;
    for (double o : row.odds) {
      out += ',';
      out += format_double(o);
    }
    for (double p : row.probs) {
      out += ',';
      out += format_double(p);
    }
    out += ',';
    if (row.result) out += kOutcomeLabels[*row.result];
    out += '\n';
  }
  return out;
}

// Restrict a fixture set to an inclusive matchweek range.
inline FixtureSet slice_weeks(const FixtureSet& set, int from_week, int to_week) {
  if (from_week > to_week)
    fail(ErrorCode::BadArgument, "from-week exceeds to-week");
  FixtureSet out;
  for (const FixtureRow& row : set.rows)
    if (row.matchweek >= from_week && row.matchweek <= to_week) out.rows.push_back(row);
  for (const Matchweek& week : set.weeks)
    if (week.week_id >= from_week && week.week_id <= to_week) out.weeks.push_back(week);
  if (out.weeks.empty())
    fail(ErrorCode::BadArgument, "no matchweeks inside the requested range");
  return out;
}

}  // namespace betfolio
