#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dca/session/session.hpp"

namespace dca::session {

inline constexpr int kDefaultRetrainRestarts = 5;

// Within-company citation records from a completed session: one per
// systematic error that has determined causes, citing the error's linked
// problem and its model causes. Effects were not discussed, so they stay
// unobserved.
inline std::vector<model::CitationRecord> session_citations(const Session& s, const model::CauseEffectModel& model) {
  if (s.step != Step::document)
    throw Error(Errc::wrong_step, "session '" + s.id + "' has not reached the document step");
  std::vector<model::CitationRecord> out;
  for (const auto& e : s.systematic_errors) {
    model::CitationRecord r;
    r.source = bn::Provenance::within_company;
    r.effects_observed = false;
    r.problem_id = e.problem_id;
    bool any = false;
    for (const auto& c : s.causes) {
      if (c.systematic_error_id != e.error.id) continue;
      any = true;
      if (!c.mapped())
        throw Error(Errc::unmapped_free_text_cause, "session '" + s.id + "' cause '" + c.free_text +
                                                        "' is not in the model; promote it first");
      if (!model.cause(c.cause_id))
        throw Error(Errc::bad_reference, "cause '" + c.cause_id + "' is not in the model being retrained");
      r.cited_causes.insert(c.cause_id);
    }
    if (!any) continue;
    if (e.problem_id.empty())
      throw Error(Errc::invalid_argument, "systematic error '" + e.error.id + "' has causes but no linked problem");
    out.push_back(std::move(r));
  }
  return out;
}

// Child version trained on the parent's records plus `extra`.
inline ModelVersion retrain(const ModelVersion& parent, const std::vector<model::CitationRecord>& extra,
                            const learn::LearnConfig& config, int restarts = kDefaultRetrainRestarts) {
  auto added = model::records_to_assignments(parent.model(), parent.compiled, extra);
  auto records = parent.records.concatenated(added);
  model::CompiledModel structure = model::compile(parent.model(), parent.compiled.params);
  return train_version(structure, records, config, restarts, parent.id);
}

inline std::shared_ptr<const ModelVersion> contribute_and_retrain(VersionRegistry& registry,
                                                                 const std::string& parent_id,
                                                                 const std::vector<Session>& sessions,
                                                                 const learn::LearnConfig& config,
                                                                 int restarts = kDefaultRetrainRestarts) {
  auto parent = registry.get(parent_id);
  std::vector<model::CitationRecord> extra;
  for (const auto& s : sessions)
    for (auto& r : session_citations(s, parent->model())) extra.push_back(std::move(r));
  return registry.add(retrain(*parent, extra, config, restarts));
}

}  // namespace dca::session
