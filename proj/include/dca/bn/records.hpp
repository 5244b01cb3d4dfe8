#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "dca/bn/network.hpp"
#include "dca/error.hpp"

namespace dca::bn {

enum class Provenance { cross_company, within_company, synthetic };

inline std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::cross_company: return "cross-company";
    case Provenance::within_company: return "within-company";
    case Provenance::synthetic: return "synthetic";
  }
  return "cross-company";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "cross-company" || s.empty()) return Provenance::cross_company;
  if (s == "within-company") return Provenance::within_company;
  if (s == "synthetic") return Provenance::synthetic;
  throw Error(Errc::parse_error, "unknown provenance '" + std::string(s) + "'");
}

// Partial assignments over a fixed column list. An empty cell is missing
// (unobserved), never a state.
struct RecordSet {
  struct Row {
    std::vector<std::string> cells;
    Provenance provenance = Provenance::cross_company;
    friend bool operator==(const Row&, const Row&) = default;
  };

  std::vector<std::string> columns;
  std::vector<Row> rows;

  std::size_t size() const noexcept { return rows.size(); }

  void add(std::vector<std::string> cells, Provenance p = Provenance::cross_company) {
    if (cells.size() != columns.size())
      throw Error(Errc::invalid_argument, "record width differs from column count");
    rows.push_back({std::move(cells), p});
  }

  EvidenceSet evidence(std::size_t i) const {
    EvidenceSet e;
    const auto& cells = rows.at(i).cells;
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (!cells[c].empty()) e.set(columns[c], cells[c]);
    return e;
  }

  bool complete() const {
    for (const auto& r : rows)
      for (const auto& c : r.cells)
        if (c.empty()) return false;
    return true;
  }

  // Rows of `other` appended; columns must match exactly.
  RecordSet concatenated(const RecordSet& other) const {
    if (other.columns != columns)
      throw Error(Errc::invalid_argument, "record sets have different columns");
    RecordSet out = *this;
    out.rows.insert(out.rows.end(), other.rows.begin(), other.rows.end());
    return out;
  }

  // FNV-1a over a canonical rendering; stable across platforms.
  std::string fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
      for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
      }
      h ^= 0x1f;
      h *= 1099511628211ULL;
    };
    for (const auto& c : columns) mix(c);
    for (const auto& r : rows) {
      mix(provenance_name(r.provenance));
      for (const auto& c : r.cells) mix(c);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  // Checks every column and non-empty cell against the network.
  void check_against(const Network& net) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const Variable& v = net.variable(columns[c]);
      for (const auto& r : rows)
        if (!r.cells[c].empty() && !v.state_index(r.cells[c]))
          throw Error(Errc::invalid_evidence,
                      "state '" + r.cells[c] + "' is not a state of '" + v.id + "'");
    }
  }
};

}  // namespace dca::bn
