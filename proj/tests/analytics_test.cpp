#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dca/analytics/charts.hpp"
#include "dca/util/random.hpp"

using namespace dca;
using namespace dca::analytics;

namespace {

std::string case_file(const std::string& name) { return util::read_file(std::string(DCA_DATA_DIR) + "/case_study/" + name); }

struct CaseStudy {
  std::vector<DefectRecord> defects;
  std::map<std::string, IterationStats> stats;
};

const CaseStudy& case_study() {
  static const CaseStudy cs = [] {
    CaseStudy c;
    c.defects = parse_defects_csv(case_file("defects.csv"));
    for (auto& s : parse_stats_csv(case_file("units.csv"), case_file("hours.csv"))) c.stats[s.iteration_id] = s;
    return c;
  }();
  return cs;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Raw line scan of the fixture, independent of the CSV reader: defects per
// (iteration, column value).
std::map<std::string, int> raw_counts(std::size_t column) {
  std::istringstream in(case_file("defects.csv"));
  std::string line;
  std::getline(in, line);
  std::map<std::string, int> out;
  while (std::getline(in, line)) {
    auto cells = split(line);
    ++out[cells[1] + "/" + cells[column]];
  }
  return out;
}

DefectRecord defect(const std::string& id, const std::string& unit, Nature n, const std::string& tag = "",
                    const std::string& iteration = "I1") {
  return {id, iteration, unit, n, "", tag, ""};
}

}  // namespace

TEST(Fixture, MatchesTableSeven) {
  const auto& cs = case_study();
  struct Row {
    const char* it;
    std::size_t units;
    double fp, hours;
    std::size_t defects;
  };
  for (const Row& r : {Row{"EL1", 8, 69, 29, 69}, Row{"EL2", 25, 292, 88, 181}, Row{"EL3", 35, 416, 77, 214}}) {
    const auto& s = cs.stats.at(r.it);
    EXPECT_EQ(s.units.size(), r.units) << r.it;
    EXPECT_DOUBLE_EQ(s.total_fp(), r.fp) << r.it;
    EXPECT_DOUBLE_EQ(s.inspection_effort_hours, r.hours) << r.it;
    EXPECT_EQ(defects_of(cs.defects, r.it).size(), r.defects) << r.it;
    double unit_hours = 0.0;
    for (const auto& u : s.units) unit_hours += *u.hours;
    EXPECT_NEAR(unit_hours, r.hours, 1e-9) << r.it;
  }
  auto natures = raw_counts(3);
  EXPECT_EQ(natures["EL3/omission"], 76);
  EXPECT_EQ(natures["EL3/incorrect fact"], 46);
}

TEST(Fixture, ParsedMatchesRawScan) {
  auto raw = raw_counts(3);
  std::map<std::string, int> parsed;
  for (const auto& d : case_study().defects) ++parsed[d.iteration_id + "/" + std::string(nature_name(d.nature))];
  EXPECT_EQ(parsed, raw);
}

TEST(Metrics, DensityPerIteration) {
  const auto& cs = case_study();
  // defects / FP per iteration.
  EXPECT_NEAR(defect_density(cs.stats.at("EL1"), cs.defects), 69.0 / 69.0, 1e-12);
  EXPECT_NEAR(defect_density(cs.stats.at("EL2"), cs.defects), 181.0 / 292.0, 1e-12);
  EXPECT_NEAR(defect_density(cs.stats.at("EL3"), cs.defects), 214.0 / 416.0, 1e-12);
  EXPECT_NEAR(defect_density(cs.stats.at("EL1"), cs.defects), 1.000, 0.001);
  EXPECT_NEAR(defect_density(cs.stats.at("EL2"), cs.defects), 0.620, 0.001);
  EXPECT_NEAR(defect_density(cs.stats.at("EL3"), cs.defects), 0.514, 0.001);
}

TEST(Metrics, EfficiencyPerIteration) {
  const auto& cs = case_study();
  EXPECT_NEAR(inspection_efficiency(cs.stats.at("EL1"), cs.defects), 2.379, 0.001);
  EXPECT_NEAR(inspection_efficiency(cs.stats.at("EL2"), cs.defects), 2.057, 0.001);
  EXPECT_NEAR(inspection_efficiency(cs.stats.at("EL3"), cs.defects), 2.779, 0.001);
}

TEST(Metrics, ScaleConsistent) {
  IterationStats s{"I1", {{"a", 3, std::nullopt}, {"b", 5, std::nullopt}}, 2.0};
  std::vector<DefectRecord> d{defect("1", "a", Nature::omission), defect("2", "b", Nature::omission),
                              defect("3", "b", Nature::ambiguity)};
  IterationStats s2{"I1", {{"a", 6, std::nullopt}, {"b", 10, std::nullopt}}, 4.0};
  auto d2 = d;
  for (const auto& x : d) d2.push_back({x.id + "'", x.iteration_id, x.unit_id, x.nature, "", "", ""});
  EXPECT_DOUBLE_EQ(defect_density(s, d), defect_density(s2, d2));
  EXPECT_DOUBLE_EQ(inspection_efficiency(s, d), inspection_efficiency(s2, d2));
}

TEST(Metrics, UnknownUnit) {
  IterationStats s{"I1", {{"a", 3, std::nullopt}}, 2.0};
  try {
    defect_density(s, {defect("1", "zz", Nature::omission)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_unit);
  }
  EXPECT_THROW(u_chart(s, {defect("1", "zz", Nature::omission)}), Error);
}

TEST(Pareto, El3TopTwo) {
  auto r = pareto(defects_of(case_study().defects, "EL3"));
  ASSERT_GE(r.entries.size(), 2u);
  EXPECT_EQ(r.total, 214u);
  EXPECT_EQ(r.entries[0].category, "omission");
  EXPECT_EQ(r.entries[0].count, 76u);
  EXPECT_EQ(r.entries[1].category, "incorrect fact");
  EXPECT_EQ(r.entries[1].count, 46u);
  EXPECT_NEAR(r.entries[0].share, 76.0 / 214.0, 1e-12);
  EXPECT_NEAR(r.entries[1].cumulative_share, 122.0 / 214.0, 1e-12);
  EXPECT_NEAR(r.entries[1].cumulative_share, 0.5701, 0.0001);
  EXPECT_DOUBLE_EQ(r.entries.back().cumulative_share, 1.0);
}

TEST(Pareto, SingleCategoryAndTies) {
  auto one = pareto({defect("1", "a", Nature::ambiguity), defect("2", "a", Nature::ambiguity)});
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(one.entries[0].cumulative_share, 1.0);

  auto tie = pareto({defect("1", "a", Nature::omission), defect("2", "a", Nature::ambiguity)});
  ASSERT_EQ(tie.entries.size(), 2u);
  EXPECT_EQ(tie.entries[0].category, "ambiguity");
  EXPECT_EQ(tie.entries[1].category, "omission");
  EXPECT_THROW(pareto({}), Error);
}

TEST(Pareto, RandomSetsConserveAndOrder) {
  util::Rng rng(5);
  for (int c = 0; c < 200; ++c) {
    std::vector<DefectRecord> d;
    std::size_t n = 1 + rng.below(60);
    std::map<std::string, std::size_t> oracle;
    for (std::size_t i = 0; i < n; ++i) {
      auto nat = kNatures[rng.below(kNatures.size())];
      d.push_back(defect(std::to_string(i), "a", nat));
      ++oracle[std::string(nature_name(nat))];
    }
    auto r = pareto(d);
    std::size_t sum = 0;
    double shares = 0.0;
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& e = r.entries[i];
      EXPECT_EQ(e.count, oracle.at(e.category));
      sum += e.count;
      shares += e.share;
      if (i > 0) {
        const auto& p = r.entries[i - 1];
        EXPECT_TRUE(p.count > e.count || (p.count == e.count && p.category < e.category));
        EXPECT_GE(e.cumulative_share, p.cumulative_share);
      }
    }
    EXPECT_EQ(sum, n);
    EXPECT_EQ(r.entries.size(), oracle.size());
    EXPECT_NEAR(shares, 1.0, 1e-9);
    EXPECT_NEAR(r.entries.back().cumulative_share, 1.0, 1e-9);
  }
}

TEST(UChart, El3CenterLineAndHandLimits) {
  const auto& cs = case_study();
  auto r = u_chart(cs.stats.at("EL3"), cs.defects);
  EXPECT_NEAR(r.center_line, 214.0 / 416.0, 1e-12);
  EXPECT_NEAR(r.center_line, 0.5144, 0.0005);
  EXPECT_EQ(r.points.size(), 35u);

  // Hand arithmetic with ubar = 214/416 = 0.514423...
  //   n = 9:  sqrt(0.514423/9)  = 0.239078 -> ucl 1.231657, lcl 0
  //   n = 16: sqrt(0.514423/16) = 0.179308 -> ucl 1.052348, lcl 0
  //   n = 25: sqrt(0.514423/25) = 0.143447 -> ucl 0.944763, lcl 0.084083
  std::map<double, std::pair<double, double>> hand{
      {9, {1.231657, 0.0}}, {16, {1.052348, 0.0}}, {25, {0.944763, 0.084083}}};
  std::set<double> seen;
  for (const auto& p : r.points) {
    auto it = hand.find(p.n);
    if (it == hand.end()) continue;
    seen.insert(p.n);
    EXPECT_NEAR(p.ucl, it->second.first, 2e-6) << p.n;
    EXPECT_NEAR(p.lcl, it->second.second, 2e-6) << p.n;
  }
  EXPECT_EQ(seen.size(), 3u);
  std::size_t flagged = 0;
  for (const auto& p : r.points) flagged += p.flagged;
  EXPECT_GT(flagged, 0u);
}

TEST(UChart, BoundaryPointsNotFlagged) {
  // ubar = 168/168 = 1. Unit a: n=4, ucl = 1 + 3*0.5 = 2.5 = 10/4.
  // Unit b: n=64, lcl = 1 - 3*0.125 = 0.625 = 40/64.
  IterationStats s{"I1", {{"a", 4, std::nullopt}, {"b", 64, std::nullopt}, {"c", 100, std::nullopt}}, 1.0};
  std::vector<DefectRecord> d;
  auto add = [&](const std::string& unit, int k) {
    for (int i = 0; i < k; ++i) d.push_back(defect(unit + std::to_string(i), unit, Nature::omission));
  };
  add("a", 10);
  add("b", 40);
  add("c", 118);
  auto r = u_chart(s, d);
  ASSERT_DOUBLE_EQ(r.center_line, 1.0);
  EXPECT_DOUBLE_EQ(r.points[0].u, r.points[0].ucl);
  EXPECT_FALSE(r.points[0].flagged);
  EXPECT_DOUBLE_EQ(r.points[1].u, r.points[1].lcl);
  EXPECT_FALSE(r.points[1].flagged);
  EXPECT_FALSE(r.points[2].flagged);
}

TEST(UChart, HoursBasis) {
  const auto& cs = case_study();
  auto r = u_chart(cs.stats.at("EL3"), cs.defects, UChartBasis::hours);
  EXPECT_NEAR(r.center_line, 214.0 / 77.0, 1e-9);
  IterationStats no_hours{"I1", {{"a", 3, std::nullopt}}, 2.0};
  EXPECT_THROW(u_chart(no_hours, {}, UChartBasis::hours), Error);
}

TEST(UChart, RandomPropertiesAgainstDefinition) {
  util::Rng rng(11);
  for (int c = 0; c < 200; ++c) {
    IterationStats s{"I1", {}, 1.0};
    std::vector<DefectRecord> d;
    std::size_t units = 1 + rng.below(12);
    double size = 0.0;
    std::size_t total = 0;
    for (std::size_t i = 0; i < units; ++i) {
      double n = 1.0 + static_cast<double>(rng.below(30));
      s.units.push_back({"u" + std::to_string(i), n, std::nullopt});
      size += n;
      std::size_t k = rng.below(20);
      total += k;
      for (std::size_t j = 0; j < k; ++j)
        d.push_back(defect(std::to_string(i) + "-" + std::to_string(j), "u" + std::to_string(i), Nature::omission));
    }
    auto r = u_chart(s, d);
    const double ubar = static_cast<double>(total) / size;
    EXPECT_DOUBLE_EQ(r.center_line, ubar);
    for (const auto& p : r.points) {
      EXPECT_GE(p.lcl, 0.0);
      EXPECT_NEAR(p.ucl, ubar + 3.0 * std::sqrt(ubar / p.n), 1e-12);
      EXPECT_EQ(p.flagged, p.u > p.ucl || p.u < p.lcl);
    }
    if (ubar > 0.0)
      for (double n = 1.0; n < 60.0; n += 1.0) {
        EXPECT_GT(u_chart_ucl(ubar, n), u_chart_ucl(ubar, n + 1.0));
        EXPECT_GE(u_chart_lcl(ubar, n), 0.0);
      }
  }
}

TEST(Grouping, TableTenCounts) {
  const auto& cs = case_study();
  auto errors = parse_systematic_errors_csv(case_file("systematic_errors.csv"));
  std::map<std::string, std::size_t> expected{
      {"EL1/Underspecifying Reqs.", 7},
      {"EL1/Omitting links to between use cases", 5},
      {"EL2/Omitting links to Business Rules", 21},
      {"EL2/Omitting details of Business Rules", 7},
      {"EL2/Linking Business Rules incorrectly", 7},
      {"EL3/Omitting details of Business Rules", 11},
      {"EL3/Omitting links to Business Rules", 10},
      {"EL3/Incorrect facts due to comm. prob.", 19},
      {"EL3/Linking Business Rules incorrectly", 6},
  };
  ASSERT_EQ(errors.size(), expected.size());
  for (const auto& e : errors) {
    auto g = group_defects(cs.defects, e);
    EXPECT_TRUE(g.warnings.empty()) << e.id;
    EXPECT_EQ(g.error.count(), expected.at(g.error.iteration_id + "/" + g.error.label)) << e.id;
  }
}

TEST(Grouping, EdgeCases) {
  std::vector<DefectRecord> d{defect("1", "a", Nature::omission), defect("2", "a", Nature::ambiguity),
                              defect("3", "a", Nature::omission, "", "I2")};
  auto empty = group_defects(d, {"e0", "nothing", Nature::omission, {}, "I1"});
  EXPECT_EQ(empty.error.count(), 0u);
  EXPECT_EQ(empty.warnings.size(), 1u);

  auto mixed = group_defects(d, {"e1", "x", Nature::omission, {"1", "2"}, ""});
  EXPECT_EQ(mixed.error.iteration_id, "I1");
  EXPECT_EQ(mixed.warnings.size(), 1u);

  auto code_of = [&](const SystematicError& e) {
    try {
      group_defects(d, e);
    } catch (const Error& err) {
      return err.code();
    }
    return Errc::invalid_argument;
  };
  EXPECT_EQ(code_of({"e2", "x", Nature::omission, {"1", "3"}, ""}), Errc::cross_iteration_member);
  EXPECT_EQ(code_of({"e3", "x", Nature::omission, {"1"}, "I2"}), Errc::cross_iteration_member);
  EXPECT_EQ(code_of({"e4", "x", Nature::omission, {"nope"}, ""}), Errc::unknown_defect);
}

TEST(Histogram, TableNine) {
  auto el3 = defects_of(case_study().defects, "EL3");
  auto omissions = detail_histogram(el3, Nature::omission);
  ASSERT_FALSE(omissions.empty());
  EXPECT_EQ(omissions[0].detail_tag, "Business rules");
  EXPECT_EQ(omissions[0].count, 11u);

  // Only tags seen at least 5 times are listed.
  std::map<std::string, std::size_t> table_nine{{"Business rules", 11},
                                                {"Link to business rules", 10},
                                                {"Actor", 10},
                                                {"Details in the prototype", 10},
                                                {"Field of a form", 7},
                                                {"Identification of mandatory fields", 5},
                                                {"Wrong understanding (comm. problem)", 19},
                                                {"Linking the wrong business rule", 6},
                                                {"Wrong the wrong use case flow", 6},
                                                {"Prototype is wrong", 5}};
  std::map<std::string, std::size_t> got;
  for (auto n : {Nature::omission, Nature::incorrect_fact})
    for (const auto& t : detail_histogram(el3, n, 5)) got[t.detail_tag] = t.count;
  EXPECT_EQ(got, table_nine);

  for (const auto& t : detail_histogram(el3, std::nullopt, 6)) EXPECT_GT(t.count, 5u);
  for (std::size_t i = 1; i < omissions.size(); ++i) EXPECT_GE(omissions[i - 1].count, omissions[i].count);
}

TEST(Histogram, ConservesTaggedTotalsAndEmpty) {
  const auto& all = case_study().defects;
  auto raw = raw_counts(4);
  for (auto n : kNatures) {
    std::size_t tagged = 0;
    for (const auto& d : all) tagged += d.nature == n && !d.detail_tag.empty();
    std::size_t sum = 0;
    for (const auto& t : detail_histogram(all, n)) sum += t.count;
    EXPECT_EQ(sum, tagged);
  }
  int raw_tagged = 0;
  for (const auto& [key, c] : raw)
    if (key.back() != '/') raw_tagged += c;
  std::size_t hist_total = 0;
  for (const auto& t : detail_histogram(all)) hist_total += t.count;
  EXPECT_EQ(hist_total, static_cast<std::size_t>(raw_tagged));
  EXPECT_TRUE(detail_histogram({defect("1", "a", Nature::omission)}).empty());
}

TEST(Formats, RoundTripsAndErrors) {
  const auto& cs = case_study();
  EXPECT_EQ(format_defects_csv(cs.defects), case_file("defects.csv"));
  EXPECT_EQ(parse_defects_csv(format_defects_csv(cs.defects)), cs.defects);
  std::vector<IterationStats> stats;
  for (const auto& [_, s] : cs.stats) stats.push_back(s);
  EXPECT_EQ(format_units_csv(stats), case_file("units.csv"));
  for (const auto& s : stats) EXPECT_EQ(stats_from_json(stats_to_json(s)), s);
  for (const auto& d : cs.defects) EXPECT_EQ(defect_from_json(defect_to_json(d)), d);

  EXPECT_EQ(parse_nature("Incorrect_Fact"), Nature::incorrect_fact);
  EXPECT_THROW(parse_nature("typo"), Error);
  EXPECT_THROW(parse_defects_csv("id,iteration,unit,nature\n1,I,a,bogus\n"), Error);
  EXPECT_THROW(parse_defects_csv("id,iteration,unit,nature\n1,I,a,omission\n1,I,a,omission\n"), Error);
  EXPECT_THROW(parse_defects_csv("id,iteration,nature\n1,I,omission\n"), Error);
  EXPECT_THROW(parse_stats_csv("iteration,unit,size_fp\nI,a,0\n", "iteration,hours\nI,3\n"), Error);
  EXPECT_THROW(parse_stats_csv("iteration,unit,size_fp\nI,a,2\nI,a,3\n", "iteration,hours\nI,3\n"), Error);
  EXPECT_THROW(parse_stats_csv("iteration,unit,size_fp\nI,a,2\n", "iteration,hours\n"), Error);
}

TEST(Charts, DescriptionsAndText) {
  const auto& cs = case_study();
  auto r = u_chart(cs.stats.at("EL3"), cs.defects);
  auto j = u_chart_to_json(r);
  EXPECT_EQ(j["chart"], "u-chart");
  EXPECT_EQ(j["points"].size(), 35u);
  auto text = render_u_chart(r);
  EXPECT_NE(text.find("center line 0.514"), std::string::npos);
  auto p = pareto_to_json(pareto(defects_of(cs.defects, "EL3")));
  EXPECT_EQ(p["series"][0]["category"], "omission");
  EXPECT_EQ(render_pareto(pareto(defects_of(cs.defects, "EL3"))).rfind("Pareto (214 defects)", 0), 0u);
}
