#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/model/citations.hpp"
#include "dca/util/random.hpp"

namespace dca::model {

// Per-problem citation counts and independent cause/effect citation rates,
// used to produce reproducible stand-in training sets.
struct SyntheticProfile {
  struct ProblemRates {
    int count = 0;
    std::map<std::string, double> causes;
    std::map<std::string, double> effects;
  };
  std::map<std::string, ProblemRates> problems;
};

inline SyntheticProfile synthetic_profile_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != "dca-synthetic-profile")
      throw Error(Errc::parse_error, "not a dca-synthetic-profile document");
    SyntheticProfile p;
    for (const auto& [id, v] : j.at("problems").items()) {
      SyntheticProfile::ProblemRates r;
      r.count = v.at("count").get<int>();
      r.causes = v.value("causes", std::map<std::string, double>{});
      r.effects = v.value("effects", std::map<std::string, double>{});
      p.problems[id] = std::move(r);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed synthetic profile: ") + e.what());
  }
}

// Records are emitted in model problem order; every draw comes from one
// seeded stream so the output is a pure function of (model, profile, seed).
inline std::vector<CitationRecord> synthetic_citations(const CauseEffectModel& model, const SyntheticProfile& profile,
                                                       std::uint64_t seed) {
  util::Rng rng(seed);
  std::vector<CitationRecord> out;
  for (const auto& p : model.problems) {
    auto it = profile.problems.find(p.id);
    if (it == profile.problems.end()) continue;
    const auto& rates = it->second;
    for (const auto& [id, _] : rates.causes)
      if (!model.cause(id)) throw Error(Errc::unknown_id, "profile names unknown cause '" + id + "'");
    for (const auto& [id, _] : rates.effects)
      if (!model.effect(id)) throw Error(Errc::unknown_id, "profile names unknown effect '" + id + "'");
    for (int i = 0; i < rates.count; ++i) {
      CitationRecord r;
      r.problem_id = p.id;
      r.source = bn::Provenance::synthetic;
      for (const auto& c : model.causes) {
        auto rate = rates.causes.find(c.id);
        if (rng.bernoulli(rate == rates.causes.end() ? 0.0 : rate->second)) r.cited_causes.insert(c.id);
      }
      for (const auto& e : model.effects) {
        auto rate = rates.effects.find(e.id);
        if (rng.bernoulli(rate == rates.effects.end() ? 0.0 : rate->second)) r.cited_effects.insert(e.id);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace dca::model
