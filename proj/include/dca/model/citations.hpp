#pragma once

#include <set>
#include <string>
#include <vector>

#include "dca/bn/records.hpp"
#include "dca/model/compile.hpp"
#include "dca/util/csv.hpp"

namespace dca::model {

// One respondent's report: a problem with the causes and effects marked.
// Records from DCA sessions carry no effect information (effects_observed
// is false) and leave the effect columns missing.
struct CitationRecord {
  std::string problem_id;
  std::set<std::string> cited_causes;
  std::set<std::string> cited_effects;
  bn::Provenance source = bn::Provenance::cross_company;
  bool effects_observed = true;

  friend bool operator==(const CitationRecord&, const CitationRecord&) = default;
};

inline void check_citation(const CauseEffectModel& model, const CitationRecord& r) {
  if (!model.problem(r.problem_id)) throw Error(Errc::unknown_id, "unknown problem '" + r.problem_id + "'");
  for (const auto& c : r.cited_causes)
    if (!model.cause(c)) throw Error(Errc::unknown_id, "unknown cause '" + c + "'");
  for (const auto& e : r.cited_effects)
    if (!model.effect(e)) throw Error(Errc::unknown_id, "unknown effect '" + e + "'");
  if (!r.effects_observed && !r.cited_effects.empty())
    throw Error(Errc::invalid_argument, "record cites effects but marks them unobserved");
}

// Learning rows over every network variable. The cited problem is true and
// other problems are missing; causes and effects are true when cited and
// false otherwise; category variables are always missing.
inline bn::RecordSet records_to_assignments(const CauseEffectModel& model, const CompiledModel& compiled,
                                            const std::vector<CitationRecord>& records) {
  bn::RecordSet out;
  for (const auto& v : compiled.network.variables()) out.columns.push_back(v.id);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < out.columns.size(); ++i) column[out.columns[i]] = i;

  for (const auto& r : records) {
    check_citation(model, r);
    std::vector<std::string> cells(out.columns.size());
    cells[column.at(compiled.node(r.problem_id))] = "true";
    for (const auto& c : model.causes)
      cells[column.at(compiled.node(c.id))] = r.cited_causes.count(c.id) ? "true" : "false";
    if (r.effects_observed)
      for (const auto& e : model.effects)
        cells[column.at(compiled.node(e.id))] = r.cited_effects.count(e.id) ? "true" : "false";
    out.add(std::move(cells), r.source);
  }
  return out;
}

// Inverse of records_to_assignments.
inline std::vector<CitationRecord> assignments_to_records(const CauseEffectModel& model,
                                                          const CompiledModel& compiled,
                                                          const bn::RecordSet& records) {
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < records.columns.size(); ++i) column[records.columns[i]] = i;
  auto cell = [&](const bn::RecordSet::Row& row, const std::string& model_id) -> const std::string& {
    auto it = column.find(compiled.node(model_id));
    if (it == column.end()) throw Error(Errc::unknown_id, "records lack column '" + model_id + "'");
    return row.cells[it->second];
  };
  std::vector<CitationRecord> out;
  for (const auto& row : records.rows) {
    CitationRecord r;
    r.source = row.provenance;
    for (const auto& p : model.problems)
      if (cell(row, p.id) == "true") {
        if (!r.problem_id.empty()) throw Error(Errc::invalid_argument, "record cites two problems");
        r.problem_id = p.id;
      }
    if (r.problem_id.empty()) throw Error(Errc::invalid_argument, "record cites no problem");
    for (const auto& c : model.causes)
      if (cell(row, c.id) == "true") r.cited_causes.insert(c.id);
    r.effects_observed = model.effects.empty() || !cell(row, model.effects.front().id).empty();
    for (const auto& e : model.effects)
      if (cell(row, e.id) == "true") r.cited_effects.insert(e.id);
    out.push_back(std::move(r));
  }
  return out;
}

// Citation files: a "problem" column, one 0/1 column per cause and effect id
// and an optional "source" column. Empty effect cells mean effects unobserved.
inline std::vector<CitationRecord> parse_citations_csv(const CauseEffectModel& model, const std::string& text) {
  auto rows = util::parse_csv(text);
  if (rows.empty()) throw Error(Errc::parse_error, "citation file has no header row");
  const auto& header = rows[0];
  std::size_t problem_col = header.size(), source_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "problem") problem_col = i;
    if (header[i] == "source") source_col = i;
  }
  if (problem_col == header.size()) throw Error(Errc::parse_error, "citation file lacks a 'problem' column");
  std::vector<CitationRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw Error(Errc::parse_error, "citation row " + std::to_string(r) + " has the wrong width");
    CitationRecord rec;
    rec.problem_id = row[problem_col];
    if (source_col < header.size()) rec.source = bn::parse_provenance(row[source_col]);
    bool saw_effect_cell = false, saw_empty_effect = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == problem_col || i == source_col) continue;
      const auto& id = header[i];
      const auto& v = row[i];
      const bool is_cause = model.cause(id) != nullptr;
      const bool is_effect = model.effect(id) != nullptr;
      if (!is_cause && !is_effect) throw Error(Errc::unknown_id, "citation column '" + id + "' is not in the model");
      if (is_effect) {
        if (v.empty()) {
          saw_empty_effect = true;
          continue;
        }
        saw_effect_cell = true;
      }
      if (v != "0" && v != "1")
        throw Error(Errc::parse_error, "citation cell must be 0 or 1, got '" + v + "'");
      if (v == "1") (is_cause ? rec.cited_causes : rec.cited_effects).insert(id);
    }
    if (saw_effect_cell && saw_empty_effect)
      throw Error(Errc::parse_error, "citation row " + std::to_string(r) + " mixes empty and 0/1 effect cells");
    rec.effects_observed = !saw_empty_effect;
    check_citation(model, rec);
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::string format_citations_csv(const CauseEffectModel& model, const std::vector<CitationRecord>& records) {
  std::vector<util::CsvRow> rows;
  util::CsvRow header{"problem"};
  for (const auto& c : model.causes) header.push_back(c.id);
  for (const auto& e : model.effects) header.push_back(e.id);
  header.push_back("source");
  rows.push_back(header);
  for (const auto& r : records) {
    util::CsvRow row{r.problem_id};
    for (const auto& c : model.causes) row.push_back(r.cited_causes.count(c.id) ? "1" : "0");
    for (const auto& e : model.effects)
      row.push_back(!r.effects_observed ? "" : r.cited_effects.count(e.id) ? "1" : "0");
    row.emplace_back(bn::provenance_name(r.source));
    rows.push_back(std::move(row));
  }
  return util::format_csv(rows);
}

}  // namespace dca::model
