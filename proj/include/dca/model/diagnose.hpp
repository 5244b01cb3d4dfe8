#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/bn/inference.hpp"
#include "dca/model/compile.hpp"

namespace dca::model {

struct RankedCause {
  std::string id;
  std::string label;
  double probability = 0.0;
};

struct RankedCategory {
  std::string id;
  std::string label;
  double probability = 0.0;
  std::vector<RankedCause> causes;
};

struct DiagnosisView {
  std::string problem_id;
  bn::EvidenceSet evidence;  // caller evidence on causes; the problem is implied true
  std::vector<RankedCategory> categories;
};

namespace detail {

template <typename T>
void rank(std::vector<T>& xs) {
  std::stable_sort(xs.begin(), xs.end(), [](const T& a, const T& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.label < b.label;
  });
}

}  // namespace detail

// Cause categories and, within each, causes ranked by posterior given the
// problem occurred plus any cause evidence. Ties rank alphabetically by label.
inline DiagnosisView diagnose(const CompiledModel& compiled, const bn::InferenceEngine& trained,
                              const std::string& problem_id, const bn::EvidenceSet& evidence) {
  const auto& model = compiled.model;
  if (!model.problem(problem_id)) throw Error(Errc::unknown_id, "unknown problem '" + problem_id + "'");
  bn::EvidenceSet full;
  for (const auto& [id, state] : evidence.assignments) {
    if (!model.cause(id)) throw Error(Errc::invalid_evidence, "evidence may only name causes; '" + id + "' is not one");
    full.set(compiled.node(id), state);
  }
  full.set(compiled.node(problem_id), true);

  std::vector<std::string> targets;
  for (const auto& cat : model.cause_categories) {
    targets.push_back(compiled.node(cat.id));
    for (const auto& m : cat.members) targets.push_back(compiled.node(m));
  }
  auto post = trained.posterior(full, targets);

  DiagnosisView view{problem_id, evidence, {}};
  for (const auto& cat : model.cause_categories) {
    RankedCategory rc{cat.id, cat.label, post.at(compiled.node(cat.id))[1], {}};
    for (const auto& m : cat.members)
      rc.causes.push_back({m, model.cause(m)->label, post.at(compiled.node(m))[1]});
    detail::rank(rc.causes);
    view.categories.push_back(std::move(rc));
  }
  detail::rank(view.categories);
  return view;
}

inline DiagnosisView diagnose(const CompiledModel& compiled, const bn::Network& trained,
                              const std::string& problem_id, const bn::EvidenceSet& evidence) {
  return diagnose(compiled, bn::InferenceEngine(trained), problem_id, evidence);
}

inline nlohmann::json evidence_to_json(const bn::EvidenceSet& e) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, state] : e.assignments) j[id] = state;
  return j;
}

inline bn::EvidenceSet evidence_from_json(const nlohmann::json& j) {
  bn::EvidenceSet e;
  if (j.is_null()) return e;
  if (!j.is_object()) throw Error(Errc::invalid_evidence, "evidence must be an object");
  for (const auto& [id, v] : j.items()) {
    if (v.is_boolean())
      e.set(id, v.get<bool>());
    else if (v.is_string())
      e.set(id, v.get<std::string>());
    else
      throw Error(Errc::invalid_evidence, "evidence for '" + id + "' must be a boolean or state label");
  }
  return e;
}

inline nlohmann::json diagnosis_to_json(const DiagnosisView& v) {
  using nlohmann::json;
  json cats = json::array();
  for (const auto& c : v.categories) {
    json causes = json::array();
    for (const auto& x : c.causes) causes.push_back({{"id", x.id}, {"label", x.label}, {"probability", x.probability}});
    cats.push_back({{"id", c.id}, {"label", c.label}, {"probability", c.probability}, {"causes", std::move(causes)}});
  }
  return json{{"problem", v.problem_id}, {"evidence", evidence_to_json(v.evidence)}, {"categories", std::move(cats)}};
}

inline DiagnosisView diagnosis_from_json(const nlohmann::json& j) {
  DiagnosisView v;
  v.problem_id = j.at("problem").get<std::string>();
  v.evidence = evidence_from_json(j.at("evidence"));
  for (const auto& c : j.at("categories")) {
    RankedCategory rc{c.at("id").get<std::string>(), c.at("label").get<std::string>(),
                      c.at("probability").get<double>(), {}};
    for (const auto& x : c.at("causes"))
      rc.causes.push_back({x.at("id").get<std::string>(), x.at("label").get<std::string>(),
                           x.at("probability").get<double>()});
    v.categories.push_back(std::move(rc));
  }
  return v;
}

}  // namespace dca::model
