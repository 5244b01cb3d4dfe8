#pragma once

#include <string>

#include "dca/bn/records.hpp"
#include "dca/util/csv.hpp"

namespace dca::bn {

// Record files: a header row of variable ids, then one row per record whose
// cells are state labels, empty where missing. An optional first column
// headed "@provenance" tags each row.
inline constexpr const char* kProvenanceColumn = "@provenance";

inline RecordSet parse_records_csv(const std::string& text) {
  auto rows = util::parse_csv(text);
  if (rows.empty()) throw Error(Errc::parse_error, "record file has no header row");
  RecordSet out;
  bool tagged = !rows[0].empty() && rows[0][0] == kProvenanceColumn;
  out.columns.assign(rows[0].begin() + (tagged ? 1 : 0), rows[0].end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() != rows[0].size())
      throw Error(Errc::parse_error, "record row " + std::to_string(r) + " has " +
                                         std::to_string(row.size()) + " cells, expected " +
                                         std::to_string(rows[0].size()));
    Provenance p = tagged ? parse_provenance(row[0]) : Provenance::cross_company;
    out.add(std::vector<std::string>(row.begin() + (tagged ? 1 : 0), row.end()), p);
  }
  return out;
}

inline std::string format_records_csv(const RecordSet& records) {
  bool tagged = false;
  for (const auto& r : records.rows)
    if (r.provenance != Provenance::cross_company) tagged = true;
  std::vector<util::CsvRow> rows;
  util::CsvRow header;
  if (tagged) header.push_back(kProvenanceColumn);
  header.insert(header.end(), records.columns.begin(), records.columns.end());
  rows.push_back(std::move(header));
  for (const auto& r : records.rows) {
    util::CsvRow row;
    if (tagged) row.emplace_back(provenance_name(r.provenance));
    row.insert(row.end(), r.cells.begin(), r.cells.end());
    rows.push_back(std::move(row));
  }
  return util::format_csv(rows);
}

}  // namespace dca::bn
