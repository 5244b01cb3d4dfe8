#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dca/analytics/defects.hpp"

namespace dca::analytics {

struct ParetoEntry {
  std::string category;
  std::size_t count = 0;
  double share = 0.0;
  double cumulative_share = 0.0;
};

struct ParetoResult {
  std::vector<ParetoEntry> entries;
  std::size_t total = 0;
};

// Counts per label, descending; ties alphabetical. The last cumulative share
// is set to exactly 1.
inline ParetoResult pareto_of(const std::map<std::string, std::size_t>& counts) {
  ParetoResult r;
  for (const auto& [label, n] : counts) {
    if (n == 0) continue;
    r.entries.push_back({label, n, 0.0, 0.0});
    r.total += n;
  }
  if (r.total == 0) throw Error(Errc::invalid_argument, "pareto needs at least one defect");
  std::stable_sort(r.entries.begin(), r.entries.end(), [](const ParetoEntry& a, const ParetoEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.category < b.category;
  });
  std::size_t running = 0;
  for (auto& e : r.entries) {
    running += e.count;
    e.share = static_cast<double>(e.count) / static_cast<double>(r.total);
    e.cumulative_share = static_cast<double>(running) / static_cast<double>(r.total);
  }
  r.entries.back().cumulative_share = 1.0;
  return r;
}

inline ParetoResult pareto(const std::vector<DefectRecord>& defects) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : defects) ++counts[std::string(nature_name(d.nature))];
  return pareto_of(counts);
}

enum class UChartBasis { function_points, hours };

inline const char* basis_name(UChartBasis b) { return b == UChartBasis::hours ? "hours" : "function_points"; }

inline UChartBasis parse_basis(const std::string& s) {
  if (s == "function_points" || s == "fp") return UChartBasis::function_points;
  if (s == "hours") return UChartBasis::hours;
  throw Error(Errc::invalid_argument, "unknown u-chart basis '" + s + "'");
}

struct UChartPoint {
  std::string unit_id;
  double n = 0.0;         // unit size in the chart basis
  std::size_t defects = 0;
  double u = 0.0;
  double ucl = 0.0;
  double lcl = 0.0;
  bool flagged = false;
};

struct UChartResult {
  std::string iteration_id;
  UChartBasis basis = UChartBasis::function_points;
  double center_line = 0.0;
  std::vector<UChartPoint> points;  // in the order of the stats' units
};

inline double u_chart_ucl(double ubar, double n) { return ubar + 3.0 * std::sqrt(ubar / n); }
inline double u_chart_lcl(double ubar, double n) { return std::max(0.0, ubar - 3.0 * std::sqrt(ubar / n)); }

namespace detail {

// Defect counts per unit of one iteration; defects of other iterations are
// ignored, defects naming an unknown unit are rejected.
inline std::map<std::string, std::size_t> count_by_unit(const IterationStats& stats,
                                                        const std::vector<DefectRecord>& defects) {
  std::map<std::string, std::size_t> out;
  for (const auto& d : defects) {
    if (d.iteration_id != stats.iteration_id) continue;
    if (!stats.unit(d.unit_id))
      throw Error(Errc::unknown_unit, "defect '" + d.id + "' names unknown unit '" + d.unit_id + "' in " +
                                          stats.iteration_id);
    ++out[d.unit_id];
  }
  return out;
}

inline std::size_t total(const std::map<std::string, std::size_t>& counts) {
  std::size_t t = 0;
  for (const auto& [_, n] : counts) t += n;
  return t;
}

}  // namespace detail

// Per-unit u-chart for one iteration. Points strictly outside the limits are
// flagged; a point on a limit is in control.
inline UChartResult u_chart(const IterationStats& stats, const std::vector<DefectRecord>& defects,
                            UChartBasis basis = UChartBasis::function_points) {
  check_stats(stats);
  if (stats.units.empty()) throw Error(Errc::invalid_argument, "iteration '" + stats.iteration_id + "' has no units");
  auto counts = detail::count_by_unit(stats, defects);
  UChartResult r{stats.iteration_id, basis, 0.0, {}};
  double size_total = 0.0;
  for (const auto& u : stats.units) {
    double n = u.size_fp;
    if (basis == UChartBasis::hours) {
      if (!u.hours)
        throw Error(Errc::invalid_argument, "unit '" + u.unit_id + "' has no inspection hours for an hours chart");
      n = *u.hours;
    }
    size_total += n;
    auto it = counts.find(u.unit_id);
    std::size_t k = it == counts.end() ? 0 : it->second;
    r.points.push_back({u.unit_id, n, k, static_cast<double>(k) / n, 0.0, 0.0, false});
  }
  r.center_line = static_cast<double>(detail::total(counts)) / size_total;
  for (auto& p : r.points) {
    p.ucl = u_chart_ucl(r.center_line, p.n);
    p.lcl = u_chart_lcl(r.center_line, p.n);
    p.flagged = p.u > p.ucl || p.u < p.lcl;
  }
  return r;
}

// Defects per function point of the iteration.
inline double defect_density(const IterationStats& stats, const std::vector<DefectRecord>& defects) {
  check_stats(stats);
  const double fp = stats.total_fp();
  if (!(fp > 0.0)) throw Error(Errc::invalid_argument, "iteration '" + stats.iteration_id + "' has no size");
  return static_cast<double>(detail::total(detail::count_by_unit(stats, defects))) / fp;
}

// Defects found per inspection hour of the iteration.
inline double inspection_efficiency(const IterationStats& stats, const std::vector<DefectRecord>& defects) {
  check_stats(stats);
  if (!(stats.inspection_effort_hours > 0.0))
    throw Error(Errc::invalid_argument, "iteration '" + stats.iteration_id + "' has no inspection hours");
  return static_cast<double>(detail::total(detail::count_by_unit(stats, defects))) / stats.inspection_effort_hours;
}

struct SystematicError {
  std::string id;
  std::string label;
  Nature defect_category = Nature::omission;
  std::vector<std::string> members;  // defect ids
  std::string iteration_id;

  std::size_t count() const { return members.size(); }
  friend bool operator==(const SystematicError&, const SystematicError&) = default;
};

struct GroupResult {
  SystematicError error;
  std::vector<std::string> warnings;
};

// Validates a candidate grouping against the defect list. Members must exist
// and share the error's iteration; a member of another nature only warns.
inline GroupResult group_defects(const std::vector<DefectRecord>& defects, const SystematicError& candidate) {
  if (candidate.id.empty()) throw Error(Errc::invalid_argument, "systematic error needs an id");
  std::map<std::string, const DefectRecord*> by_id;
  for (const auto& d : defects) by_id[d.id] = &d;
  GroupResult r{candidate, {}};
  std::set<std::string> seen;
  for (const auto& m : candidate.members) {
    auto it = by_id.find(m);
    if (it == by_id.end()) throw Error(Errc::unknown_defect, "unknown defect '" + m + "'");
    if (!seen.insert(m).second) throw Error(Errc::duplicate_id, "defect '" + m + "' listed twice in a group");
    const auto& d = *it->second;
    if (r.error.iteration_id.empty()) r.error.iteration_id = d.iteration_id;
    if (d.iteration_id != r.error.iteration_id)
      throw Error(Errc::cross_iteration_member, "defect '" + m + "' belongs to " + d.iteration_id + ", not " +
                                                    r.error.iteration_id);
    if (d.nature != candidate.defect_category)
      r.warnings.push_back("defect '" + m + "' is " + std::string(nature_name(d.nature)) + ", not " +
                           std::string(nature_name(candidate.defect_category)));
  }
  if (candidate.members.empty()) r.warnings.push_back("systematic error '" + candidate.id + "' has no members");
  return r;
}

// Rows (error, iteration, nature, label, defect), one per member; errors come
// out in first-appearance order.
inline std::vector<SystematicError> parse_systematic_errors_csv(const std::string& text) {
  auto rows = util::parse_csv(text);
  if (rows.empty()) throw Error(Errc::parse_error, "systematic error file has no header row");
  auto col = detail::header_index(rows[0], {"error", "iteration", "nature", "label", "defect"}, "systematic error");
  std::vector<SystematicError> out;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != rows[0].size())
      throw Error(Errc::parse_error, "systematic error row " + std::to_string(i) + " has the wrong width");
    const auto& id = r[col["error"]];
    auto [it, inserted] = pos.emplace(id, out.size());
    if (inserted) out.push_back({id, r[col["label"]], parse_nature(r[col["nature"]]), {}, r[col["iteration"]]});
    if (!r[col["defect"]].empty()) out[it->second].members.push_back(r[col["defect"]]);
  }
  return out;
}

struct TagCount {
  std::string detail_tag;
  std::size_t count = 0;
};

// Tagged defects counted per detail tag, descending (ties alphabetical),
// keeping tags with count >= min_count. Untagged defects are not counted.
inline std::vector<TagCount> detail_histogram(const std::vector<DefectRecord>& defects,
                                              std::optional<Nature> nature = std::nullopt,
                                              std::size_t min_count = 0) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : defects)
    if (!d.detail_tag.empty() && (!nature || d.nature == *nature)) ++counts[d.detail_tag];
  std::vector<TagCount> out;
  for (const auto& [tag, n] : counts)
    if (n >= min_count) out.push_back({tag, n});
  std::stable_sort(out.begin(), out.end(), [](const TagCount& a, const TagCount& b) { return a.count > b.count; });
  return out;
}

}  // namespace dca::analytics
