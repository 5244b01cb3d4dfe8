#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dca/error.hpp"
#include "dca/util/csv.hpp"
#include "dca/util/number.hpp"

namespace dca::analytics {

// Closed defect-nature taxonomy used by the inspection checklist.
enum class Nature { ambiguity, extraneous_information, inconsistent_information, incorrect_fact, omission };

inline constexpr std::array<Nature, 5> kNatures{Nature::ambiguity, Nature::extraneous_information,
                                                Nature::inconsistent_information, Nature::incorrect_fact,
                                                Nature::omission};

inline std::string_view nature_name(Nature n) {
  switch (n) {
    case Nature::ambiguity: return "ambiguity";
    case Nature::extraneous_information: return "extraneous information";
    case Nature::inconsistent_information: return "inconsistent information";
    case Nature::incorrect_fact: return "incorrect fact";
    case Nature::omission: return "omission";
  }
  return "?";
}

// Case-insensitive; '_' and '-' read as spaces.
inline Nature parse_nature(std::string_view text) {
  std::string s;
  for (char c : text) s += (c == '_' || c == '-') ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto n : kNatures)
    if (nature_name(n) == s) return n;
  throw Error(Errc::invalid_argument, "unknown defect nature '" + std::string(text) + "'");
}

struct DefectRecord {
  std::string id;
  std::string iteration_id;
  std::string unit_id;
  Nature nature = Nature::omission;
  std::string description;
  std::string detail_tag;  // empty when untagged
  std::string systematic_error_id;

  friend bool operator==(const DefectRecord&, const DefectRecord&) = default;
};

struct UnitSize {
  std::string unit_id;
  double size_fp = 0.0;
  std::optional<double> hours;  // per-unit inspection effort, when recorded

  friend bool operator==(const UnitSize&, const UnitSize&) = default;
};

struct IterationStats {
  std::string iteration_id;
  std::vector<UnitSize> units;
  double inspection_effort_hours = 0.0;

  const UnitSize* unit(const std::string& id) const {
    for (const auto& u : units)
      if (u.unit_id == id) return &u;
    return nullptr;
  }
  double total_fp() const {
    double t = 0.0;
    for (const auto& u : units) t += u.size_fp;
    return t;
  }

  friend bool operator==(const IterationStats&, const IterationStats&) = default;
};

inline void check_stats(const IterationStats& s) {
  std::set<std::string> seen;
  for (const auto& u : s.units) {
    if (!seen.insert(u.unit_id).second)
      throw Error(Errc::duplicate_id, "unit '" + u.unit_id + "' listed twice in " + s.iteration_id);
    if (!(u.size_fp > 0.0))
      throw Error(Errc::invalid_argument, "unit '" + u.unit_id + "' must have a positive size");
    if (u.hours && !(*u.hours > 0.0))
      throw Error(Errc::invalid_argument, "unit '" + u.unit_id + "' must have positive hours");
  }
}

inline std::vector<DefectRecord> defects_of(const std::vector<DefectRecord>& defects, const std::string& iteration) {
  std::vector<DefectRecord> out;
  for (const auto& d : defects)
    if (d.iteration_id == iteration) out.push_back(d);
  return out;
}

namespace detail {

inline std::map<std::string, std::size_t> header_index(const util::CsvRow& header,
                                                       std::initializer_list<const char*> required,
                                                       const char* what) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
  for (const char* r : required)
    if (!idx.count(r)) throw Error(Errc::parse_error, std::string(what) + " file lacks a '" + r + "' column");
  return idx;
}

inline double parse_positive(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(Errc::parse_error, what + " is not a number: '" + s + "'");
  if (!(v > 0.0)) throw Error(Errc::invalid_argument, what + " must be positive");
  return v;
}

}  // namespace detail

// Columns: id, iteration, unit, nature, detail_tag, description.
inline std::vector<DefectRecord> parse_defects_csv(const std::string& text) {
  auto rows = util::parse_csv(text);
  if (rows.empty()) throw Error(Errc::parse_error, "defect file has no header row");
  auto col = detail::header_index(rows[0], {"id", "iteration", "unit", "nature"}, "defect");
  auto get = [&](const util::CsvRow& r, const char* key) -> std::string {
    auto it = col.find(key);
    return it == col.end() ? std::string{} : r[it->second];
  };
  std::vector<DefectRecord> out;
  std::set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw Error(Errc::parse_error, "defect row " + std::to_string(i) + " has the wrong width");
    DefectRecord d{get(rows[i], "id"), get(rows[i], "iteration"), get(rows[i], "unit"),
                   parse_nature(get(rows[i], "nature")), get(rows[i], "description"), get(rows[i], "detail_tag"), {}};
    if (d.id.empty() || d.iteration_id.empty() || d.unit_id.empty())
      throw Error(Errc::parse_error, "defect row " + std::to_string(i) + " lacks id, iteration or unit");
    if (!ids.insert(d.id).second) throw Error(Errc::duplicate_id, "defect '" + d.id + "' listed twice");
    out.push_back(std::move(d));
  }
  return out;
}

inline std::string format_defects_csv(const std::vector<DefectRecord>& defects) {
  std::vector<util::CsvRow> rows{{"id", "iteration", "unit", "nature", "detail_tag", "description"}};
  for (const auto& d : defects)
    rows.push_back({d.id, d.iteration_id, d.unit_id, std::string(nature_name(d.nature)), d.detail_tag, d.description});
  return util::format_csv(rows);
}

// Units file (iteration, unit, size_fp[, hours]) and hours file (iteration,
// hours) merged into per-iteration stats, ordered by iteration id.
inline std::vector<IterationStats> parse_stats_csv(const std::string& units_text, const std::string& hours_text) {
  std::map<std::string, IterationStats> by_iteration;
  auto units = util::parse_csv(units_text);
  if (units.empty()) throw Error(Errc::parse_error, "units file has no header row");
  auto ucol = detail::header_index(units[0], {"iteration", "unit", "size_fp"}, "units");
  const bool has_hours = ucol.count("hours") > 0;
  for (std::size_t i = 1; i < units.size(); ++i) {
    const auto& r = units[i];
    if (r.size() != units[0].size())
      throw Error(Errc::parse_error, "units row " + std::to_string(i) + " has the wrong width");
    auto& s = by_iteration[r[ucol["iteration"]]];
    s.iteration_id = r[ucol["iteration"]];
    UnitSize u{r[ucol["unit"]], detail::parse_positive(r[ucol["size_fp"]], "size_fp"), std::nullopt};
    if (has_hours && !r[ucol["hours"]].empty()) u.hours = detail::parse_positive(r[ucol["hours"]], "unit hours");
    s.units.push_back(std::move(u));
  }
  auto hours = util::parse_csv(hours_text);
  if (hours.empty()) throw Error(Errc::parse_error, "hours file has no header row");
  auto hcol = detail::header_index(hours[0], {"iteration", "hours"}, "hours");
  for (std::size_t i = 1; i < hours.size(); ++i) {
    const auto& r = hours[i];
    if (r.size() != hours[0].size())
      throw Error(Errc::parse_error, "hours row " + std::to_string(i) + " has the wrong width");
    auto it = by_iteration.find(r[hcol["iteration"]]);
    if (it == by_iteration.end())
      throw Error(Errc::unknown_id, "hours given for iteration '" + r[hcol["iteration"]] + "' without units");
    it->second.inspection_effort_hours = detail::parse_positive(r[hcol["hours"]], "hours");
  }
  std::vector<IterationStats> out;
  for (auto& [id, s] : by_iteration) {
    if (!(s.inspection_effort_hours > 0.0))
      throw Error(Errc::invalid_argument, "iteration '" + id + "' has no inspection hours");
    check_stats(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string format_units_csv(const std::vector<IterationStats>& stats) {
  bool any_hours = false;
  for (const auto& s : stats)
    for (const auto& u : s.units) any_hours = any_hours || u.hours.has_value();
  util::CsvRow header{"iteration", "unit", "size_fp"};
  if (any_hours) header.push_back("hours");
  std::vector<util::CsvRow> rows{header};
  using util::format_number;
  for (const auto& s : stats)
    for (const auto& u : s.units) {
      util::CsvRow r{s.iteration_id, u.unit_id, format_number(u.size_fp)};
      if (any_hours) r.push_back(u.hours ? format_number(*u.hours) : "");
      rows.push_back(std::move(r));
    }
  return util::format_csv(rows);
}

}  // namespace dca::analytics
