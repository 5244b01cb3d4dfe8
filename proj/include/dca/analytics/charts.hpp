#pragma once

#include <algorithm>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dca/analytics/spc.hpp"
#include "dca/util/number.hpp"

namespace dca::analytics {

// Plain-data chart descriptions shared by the CLI renderer and HTTP clients.

inline nlohmann::json pareto_to_json(const ParetoResult& r) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& e : r.entries)
    series.push_back({{"category", e.category},
                      {"count", e.count},
                      {"share", e.share},
                      {"cumulative_share", e.cumulative_share}});
  return {{"chart", "pareto"}, {"total", r.total}, {"series", std::move(series)}};
}

inline nlohmann::json u_chart_to_json(const UChartResult& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points)
    points.push_back({{"unit", p.unit_id},
                      {"n", p.n},
                      {"defects", p.defects},
                      {"u", p.u},
                      {"ucl", p.ucl},
                      {"lcl", p.lcl},
                      {"flagged", p.flagged}});
  return {{"chart", "u-chart"},
          {"iteration", r.iteration_id},
          {"basis", basis_name(r.basis)},
          {"center_line", r.center_line},
          {"points", std::move(points)}};
}

inline nlohmann::json histogram_to_json(const std::vector<TagCount>& h) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& t : h) series.push_back({{"detail_tag", t.detail_tag}, {"count", t.count}});
  return {{"chart", "detail-histogram"}, {"series", std::move(series)}};
}

inline nlohmann::json systematic_error_to_json(const SystematicError& e) {
  return {{"id", e.id},
          {"label", e.label},
          {"defect_category", std::string(nature_name(e.defect_category))},
          {"iteration", e.iteration_id},
          {"members", e.members},
          {"count", e.count()}};
}

inline SystematicError systematic_error_from_json(const nlohmann::json& j) {
  try {
    return {j.at("id").get<std::string>(), j.value("label", j.at("id").get<std::string>()),
            parse_nature(j.at("defect_category").get<std::string>()),
            j.value("members", std::vector<std::string>{}), j.value("iteration", std::string{})};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed systematic error: ") + e.what());
  }
}

inline nlohmann::json defect_to_json(const DefectRecord& d) {
  return {{"id", d.id},
          {"iteration", d.iteration_id},
          {"unit", d.unit_id},
          {"nature", std::string(nature_name(d.nature))},
          {"detail_tag", d.detail_tag},
          {"description", d.description},
          {"systematic_error", d.systematic_error_id}};
}

inline DefectRecord defect_from_json(const nlohmann::json& j) {
  try {
    return {j.at("id").get<std::string>(),
            j.at("iteration").get<std::string>(),
            j.at("unit").get<std::string>(),
            parse_nature(j.at("nature").get<std::string>()),
            j.value("description", std::string{}),
            j.value("detail_tag", std::string{}),
            j.value("systematic_error", std::string{})};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed defect: ") + e.what());
  }
}

inline nlohmann::json stats_to_json(const IterationStats& s) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : s.units) {
    nlohmann::json x{{"unit", u.unit_id}, {"size_fp", u.size_fp}};
    if (u.hours) x["hours"] = *u.hours;
    units.push_back(std::move(x));
  }
  return {{"iteration", s.iteration_id}, {"hours", s.inspection_effort_hours}, {"units", std::move(units)}};
}

inline IterationStats stats_from_json(const nlohmann::json& j) {
  try {
    IterationStats s;
    s.iteration_id = j.at("iteration").get<std::string>();
    s.inspection_effort_hours = j.at("hours").get<double>();
    for (const auto& u : j.at("units")) {
      UnitSize x{u.at("unit").get<std::string>(), u.at("size_fp").get<double>(), std::nullopt};
      if (u.contains("hours")) x.hours = u.at("hours").get<double>();
      s.units.push_back(std::move(x));
    }
    check_stats(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed iteration stats: ") + e.what());
  }
}

namespace detail {

inline std::string pad(const std::string& s, std::size_t width, bool right = true) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

// Text rendering: one row per unit with limits and a bar scaled to the
// largest of u and ucl; flagged units are marked with '*'.
inline std::string render_u_chart(const UChartResult& r, int width = 40) {
  using detail::pad;
  using util::format_fixed;
  std::ostringstream out;
  out << "U-chart " << r.iteration_id << " (defects per "
      << (r.basis == UChartBasis::hours ? "inspection hour" : "function point") << ")\n";
  out << "center line " << format_fixed(r.center_line, 3) << "\n";
  double top = r.center_line;
  std::size_t label_width = 4;
  for (const auto& p : r.points) {
    top = std::max({top, p.u, p.ucl});
    label_width = std::max(label_width, p.unit_id.size());
  }
  auto col = [&](double v) { return static_cast<int>(std::lround(v / top * width)); };
  out << pad("unit", label_width, false) << pad("n", 8) << pad("u", 7) << pad("lcl", 7) << pad("ucl", 7) << "\n";
  for (const auto& p : r.points) {
    std::string bar(static_cast<std::size_t>(width) + 1, ' ');
    for (int i = 0; i < col(p.u); ++i) bar[static_cast<std::size_t>(i)] = '#';
    bar[static_cast<std::size_t>(col(r.center_line))] = '|';
    bar[static_cast<std::size_t>(col(p.ucl))] = '>';
    bar[static_cast<std::size_t>(col(p.lcl))] = '<';
    while (!bar.empty() && bar.back() == ' ') bar.pop_back();
    out << pad(p.unit_id, label_width, false) << pad(util::format_number(p.n), 8) << pad(format_fixed(p.u, 3), 7)
        << pad(format_fixed(p.lcl, 3), 7) << pad(format_fixed(p.ucl, 3), 7)
        << (p.flagged ? " * " : "   ") << bar << "\n";
  }
  std::size_t flagged = 0;
  for (const auto& p : r.points) flagged += p.flagged ? 1 : 0;
  out << flagged << " of " << r.points.size() << " units outside the control limits\n";
  return out.str();
}

inline std::string render_pareto(const ParetoResult& r, int width = 40) {
  using util::format_fixed;
  std::ostringstream out;
  out << "Pareto (" << r.total << " defects)\n";
  std::size_t label_width = 8;
  for (const auto& e : r.entries) label_width = std::max(label_width, e.category.size());
  const std::size_t top = r.entries.empty() ? 1 : r.entries.front().count;
  for (const auto& e : r.entries) {
    auto len = static_cast<std::size_t>(std::lround(static_cast<double>(e.count) / static_cast<double>(top) * width));
    out << e.category << std::string(label_width - e.category.size(), ' ') << ' ' << e.count << ' '
        << format_fixed(e.share, 4) << ' ' << format_fixed(e.cumulative_share, 4) << ' ' << std::string(len, '#')
        << "\n";
  }
  return out.str();
}

}  // namespace dca::analytics
