#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/analytics/charts.hpp"
#include "dca/model/diagnose.hpp"
#include "dca/session/version.hpp"

// Computations shared by the CLI and the HTTP API. Both print the JSON these
// return through `body`, so identical inputs give identical bytes.
namespace dca::service {

inline std::string body(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json diagnose_json(const session::ModelVersion& v, const std::string& problem,
                                    const bn::EvidenceSet& evidence) {
  auto j = model::diagnosis_to_json(model::diagnose(v.compiled, v.network(), problem, evidence));
  j["model_version"] = v.id;
  return j;
}

inline const analytics::IterationStats& stats_for(const std::vector<analytics::IterationStats>& stats,
                                                  const std::string& iteration) {
  for (const auto& s : stats)
    if (s.iteration_id == iteration) return s;
  throw Error(Errc::not_found, "no statistics for iteration '" + iteration + "'");
}

inline std::vector<analytics::DefectRecord> iteration_defects(const std::vector<analytics::DefectRecord>& all,
                                                              const std::string& iteration) {
  auto out = analytics::defects_of(all, iteration);
  if (out.empty()) throw Error(Errc::not_found, "no defects for iteration '" + iteration + "'");
  return out;
}

inline nlohmann::json pareto_json(const std::vector<analytics::DefectRecord>& all, const std::string& iteration) {
  auto j = analytics::pareto_to_json(analytics::pareto(iteration_defects(all, iteration)));
  j["iteration"] = iteration;
  return j;
}

inline nlohmann::json u_chart_json(const std::vector<analytics::IterationStats>& stats,
                                   const std::vector<analytics::DefectRecord>& all, const std::string& iteration,
                                   analytics::UChartBasis basis) {
  return analytics::u_chart_to_json(analytics::u_chart(stats_for(stats, iteration), all, basis));
}

// Density and efficiency for every iteration with statistics, or one.
inline nlohmann::json metrics_json(const std::vector<analytics::IterationStats>& stats,
                                   const std::vector<analytics::DefectRecord>& all,
                                   const std::optional<std::string>& iteration = std::nullopt) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : stats) {
    if (iteration && s.iteration_id != *iteration) continue;
    auto d = analytics::defects_of(all, s.iteration_id);
    rows.push_back({{"iteration", s.iteration_id},
                    {"defects", d.size()},
                    {"size_fp", s.total_fp()},
                    {"hours", s.inspection_effort_hours},
                    {"density", analytics::defect_density(s, d)},
                    {"efficiency", analytics::inspection_efficiency(s, d)}});
  }
  if (iteration && rows.empty()) throw Error(Errc::not_found, "no statistics for iteration '" + *iteration + "'");
  return {{"iterations", rows}};
}

inline nlohmann::json histogram_json(const std::vector<analytics::DefectRecord>& all, const std::string& iteration,
                                     std::optional<analytics::Nature> nature, std::size_t min_count) {
  auto j = analytics::histogram_to_json(analytics::detail_histogram(iteration_defects(all, iteration), nature, min_count));
  j["iteration"] = iteration;
  return j;
}

}  // namespace dca::service
