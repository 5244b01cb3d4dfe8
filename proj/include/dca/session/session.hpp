#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/analytics/charts.hpp"
#include "dca/model/diagnose.hpp"
#include "dca/session/version.hpp"

namespace dca::session {

using analytics::DefectRecord;
using analytics::IterationStats;
using analytics::SystematicError;

// Card's six DCA steps, in order.
enum class Step { select_sample, classify, identify_systematic_errors, determine_causes, develop_actions, document };

inline constexpr std::array<Step, 6> kSteps{Step::select_sample, Step::classify, Step::identify_systematic_errors,
                                            Step::determine_causes, Step::develop_actions, Step::document};

inline const char* step_name(Step s) {
  switch (s) {
    case Step::select_sample: return "select_sample";
    case Step::classify: return "classify";
    case Step::identify_systematic_errors: return "identify_systematic_errors";
    case Step::determine_causes: return "determine_causes";
    case Step::develop_actions: return "develop_actions";
    case Step::document: return "document";
  }
  return "?";
}

inline Step parse_step(const std::string& s) {
  for (auto st : kSteps)
    if (s == step_name(st)) return st;
  throw Error(Errc::invalid_argument, "unknown step '" + s + "'");
}

enum class ActionStatus { proposed, in_progress, done };

inline const char* status_name(ActionStatus s) {
  switch (s) {
    case ActionStatus::proposed: return "proposed";
    case ActionStatus::in_progress: return "in_progress";
    case ActionStatus::done: return "done";
  }
  return "?";
}

inline ActionStatus parse_status(const std::string& s) {
  for (auto st : {ActionStatus::proposed, ActionStatus::in_progress, ActionStatus::done})
    if (s == status_name(st)) return st;
  throw Error(Errc::invalid_argument, "unknown action status '" + s + "'");
}

// One diagnosis as it was shown to the team. Never edited once appended.
struct DiagnosticQuery {
  std::size_t sequence = 0;
  std::string model_version_id;
  std::string problem_id;
  bn::EvidenceSet evidence;
  model::DiagnosisView result;
  std::string timestamp;
};

struct SessionError {
  SystematicError error;
  std::string problem_id;  // RE problem the error is an instance of; may be empty
};

// Either a model cause (cause_id) or a novel cause in free text. Promotion
// fills cause_id and keeps the original text.
struct DeterminedCause {
  std::string id;
  std::string systematic_error_id;
  std::string cause_id;
  std::string free_text;
  std::string category;
  std::string rationale;

  bool mapped() const { return !cause_id.empty(); }
};

struct ActionProposal {
  std::string id;
  std::vector<std::string> linked_causes;  // DeterminedCause ids
  std::string description;
  std::string owner;
  ActionStatus status = ActionStatus::proposed;
};

struct Session {
  std::string id;
  std::string created_at;
  std::string model_version_id;
  Step step = Step::select_sample;
  std::uint64_t revision = 0;  // bumped by every successful change
  std::vector<DefectRecord> sample;
  std::vector<IterationStats> stats;  // one per iteration present in the sample
  std::vector<SessionError> systematic_errors;
  std::vector<DiagnosticQuery> queries;
  std::vector<DeterminedCause> causes;
  std::vector<ActionProposal> actions;
  std::optional<nlohmann::json> report;

  const DefectRecord* defect(const std::string& defect_id) const {
    for (const auto& d : sample)
      if (d.id == defect_id) return &d;
    return nullptr;
  }
  const SessionError* systematic_error(const std::string& error_id) const {
    for (const auto& e : systematic_errors)
      if (e.error.id == error_id) return &e;
    return nullptr;
  }
  const DeterminedCause* cause(const std::string& cause_id) const {
    for (const auto& c : causes)
      if (c.id == cause_id) return &c;
    return nullptr;
  }
  const ActionProposal* action(const std::string& action_id) const {
    for (const auto& a : actions)
      if (a.id == action_id) return &a;
    return nullptr;
  }
};

inline Session create_session(const ModelVersion& version, std::string id, std::string created_at) {
  Session s;
  s.id = std::move(id);
  s.created_at = std::move(created_at);
  s.model_version_id = version.id;
  return s;
}

inline Session create_session(const VersionRegistry& registry, const std::string& version_id, std::string id,
                              std::string created_at) {
  return create_session(*registry.get(version_id), std::move(id), std::move(created_at));
}

namespace detail {

inline void require_step(const Session& s, Step expected, const char* what) {
  if (s.step != expected)
    throw Error(Errc::wrong_step, std::string(what) + " is only allowed in step " + step_name(expected) +
                                      " (session is in " + step_name(s.step) + ")");
}

inline std::string next_id(const char* prefix, std::size_t n) { return std::string(prefix) + std::to_string(n + 1); }

}  // namespace detail

// Why the session may not enter `to` from the step before it, or empty.
inline std::string gate_violation(const Session& s, Step to) {
  switch (to) {
    case Step::classify:
      if (s.sample.empty()) return "the sample is empty";
      break;
    case Step::determine_causes:
      if (s.systematic_errors.empty()) return "no systematic error has been identified";
      break;
    case Step::develop_actions:
      if (s.causes.empty()) return "no cause has been determined";
      break;
    default:
      break;
  }
  return {};
}

// Moves to the next step (gate permitting) or back to any earlier step.
inline void advance(Session& s, Step to) {
  const auto from = static_cast<int>(s.step), target = static_cast<int>(to);
  if (target == from) throw Error(Errc::wrong_step, std::string("session is already in step ") + step_name(to));
  if (target > from + 1)
    throw Error(Errc::step_skip, std::string("cannot skip from ") + step_name(s.step) + " to " + step_name(to));
  if (target == from + 1) {
    auto why = gate_violation(s, to);
    if (!why.empty()) throw Error(Errc::gate_unsatisfied, std::string("cannot enter ") + step_name(to) + ": " + why);
  }
  s.step = to;
  ++s.revision;
}

// Replaces the sample. Defects already grouped into a systematic error must
// stay in it; every sampled defect needs its iteration's stats and unit.
inline void set_sample(Session& s, std::vector<DefectRecord> defects, const std::vector<IterationStats>& stats) {
  detail::require_step(s, Step::select_sample, "changing the sample");
  std::set<std::string> ids, iterations;
  for (const auto& d : defects) {
    if (!ids.insert(d.id).second) throw Error(Errc::duplicate_id, "defect '" + d.id + "' sampled twice");
    iterations.insert(d.iteration_id);
  }
  std::vector<IterationStats> kept;
  for (const auto& it : iterations) {
    auto st = std::find_if(stats.begin(), stats.end(), [&](const IterationStats& x) { return x.iteration_id == it; });
    if (st == stats.end()) throw Error(Errc::bad_reference, "no iteration stats for '" + it + "'");
    analytics::check_stats(*st);
    kept.push_back(*st);
  }
  for (const auto& d : defects) {
    const auto& st = *std::find_if(kept.begin(), kept.end(),
                                   [&](const IterationStats& x) { return x.iteration_id == d.iteration_id; });
    if (!st.unit(d.unit_id))
      throw Error(Errc::unknown_unit, "defect '" + d.id + "' names unknown unit '" + d.unit_id + "'");
  }
  for (const auto& e : s.systematic_errors)
    for (const auto& m : e.error.members)
      if (!ids.count(m))
        throw Error(Errc::bad_reference, "defect '" + m + "' belongs to systematic error '" + e.error.id +
                                             "' and cannot leave the sample");
  s.sample = std::move(defects);
  s.stats = std::move(kept);
  ++s.revision;
}

// Corrects the classification of a sampled defect.
inline void classify_defect(Session& s, const std::string& defect_id, analytics::Nature nature,
                            const std::string& detail_tag) {
  detail::require_step(s, Step::classify, "classifying defects");
  auto it = std::find_if(s.sample.begin(), s.sample.end(), [&](const DefectRecord& d) { return d.id == defect_id; });
  if (it == s.sample.end()) throw Error(Errc::bad_reference, "defect '" + defect_id + "' is not in the sample");
  it->nature = nature;
  it->detail_tag = detail_tag;
  ++s.revision;
}

// Adds a systematic error over sampled defects; returns grouping warnings.
inline std::vector<std::string> add_systematic_error(Session& s, const SystematicError& candidate) {
  detail::require_step(s, Step::identify_systematic_errors, "adding systematic errors");
  if (s.systematic_error(candidate.id))
    throw Error(Errc::duplicate_id, "systematic error '" + candidate.id + "' already exists");
  for (const auto& m : candidate.members)
    if (!s.defect(m)) throw Error(Errc::bad_reference, "defect '" + m + "' is not in the sample");
  auto g = analytics::group_defects(s.sample, candidate);
  s.systematic_errors.push_back({g.error, {}});
  ++s.revision;
  return g.warnings;
}

// Links a systematic error to the RE problem it instantiates.
inline void link_problem(Session& s, const model::CauseEffectModel& model, const std::string& error_id,
                         const std::string& problem_id) {
  if (s.step != Step::identify_systematic_errors && s.step != Step::determine_causes)
    throw Error(Errc::wrong_step, "problems are linked while identifying errors or determining causes");
  auto it = std::find_if(s.systematic_errors.begin(), s.systematic_errors.end(),
                         [&](const SessionError& e) { return e.error.id == error_id; });
  if (it == s.systematic_errors.end()) throw Error(Errc::bad_reference, "unknown systematic error '" + error_id + "'");
  if (!model.problem(problem_id)) throw Error(Errc::bad_reference, "unknown problem '" + problem_id + "'");
  it->problem_id = problem_id;
  ++s.revision;
}

// Runs a diagnosis against the session's model version and appends the
// snapshot to the evidence ledger.
inline const DiagnosticQuery& run_diagnosis(Session& s, const ModelVersion& version, const std::string& problem_id,
                                            const bn::EvidenceSet& evidence, std::string timestamp) {
  detail::require_step(s, Step::determine_causes, "diagnosis");
  if (version.id != s.model_version_id)
    throw Error(Errc::bad_reference, "session uses model version '" + s.model_version_id + "', not '" + version.id + "'");
  auto view = model::diagnose(version.compiled, version.network(), problem_id, evidence);
  s.queries.push_back({s.queries.size() + 1, version.id, problem_id, evidence, std::move(view), std::move(timestamp)});
  ++s.revision;
  return s.queries.back();
}

// Recomputes a stored query against its model version.
inline model::DiagnosisView replay(const DiagnosticQuery& q, const ModelVersion& version) {
  if (version.id != q.model_version_id)
    throw Error(Errc::bad_reference, "query was run against '" + q.model_version_id + "'");
  return model::diagnose(version.compiled, version.network(), q.problem_id, q.evidence);
}

// Stores a determined cause and returns its id. Model causes take their
// category from the model when none is given.
inline std::string record_cause(Session& s, const model::CauseEffectModel& model, DeterminedCause c) {
  detail::require_step(s, Step::determine_causes, "recording causes");
  const auto* err = s.systematic_error(c.systematic_error_id);
  if (!err) throw Error(Errc::bad_reference, "unknown systematic error '" + c.systematic_error_id + "'");
  if (err->error.members.empty())
    throw Error(Errc::bad_reference, "systematic error '" + c.systematic_error_id + "' has no member defects");
  if (c.mapped() && !c.free_text.empty())
    throw Error(Errc::invalid_argument, "a cause is either a model cause or free text, not both");
  if (!c.mapped() && c.free_text.empty()) throw Error(Errc::invalid_argument, "a cause needs a model id or text");
  if (c.mapped()) {
    if (!model.cause(c.cause_id)) throw Error(Errc::bad_reference, "unknown model cause '" + c.cause_id + "'");
    const auto& owner = model.category_of_cause(c.cause_id)->id;
    if (c.category.empty()) c.category = owner;
    if (c.category != owner)
      throw Error(Errc::invalid_argument, "cause '" + c.cause_id + "' belongs to category '" + owner + "'");
  }
  if (!model.cause_category(c.category)) throw Error(Errc::bad_reference, "unknown cause category '" + c.category + "'");
  c.id = detail::next_id("cause-", s.causes.size());
  s.causes.push_back(c);
  ++s.revision;
  return c.id;
}

// Maps a free-text cause onto a model cause after the model was extended.
inline void promote_cause(Session& s, const model::CauseEffectModel& model, const std::string& cause_record_id,
                          const std::string& model_cause_id) {
  auto it = std::find_if(s.causes.begin(), s.causes.end(),
                         [&](const DeterminedCause& c) { return c.id == cause_record_id; });
  if (it == s.causes.end()) throw Error(Errc::bad_reference, "unknown determined cause '" + cause_record_id + "'");
  if (it->mapped()) throw Error(Errc::invalid_argument, "cause '" + cause_record_id + "' is already a model cause");
  if (!model.cause(model_cause_id)) throw Error(Errc::bad_reference, "unknown model cause '" + model_cause_id + "'");
  if (model.category_of_cause(model_cause_id)->id != it->category)
    throw Error(Errc::invalid_argument, "model cause '" + model_cause_id + "' is not in category '" + it->category + "'");
  it->cause_id = model_cause_id;
  ++s.revision;
}

inline std::string propose_action(Session& s, ActionProposal a) {
  detail::require_step(s, Step::develop_actions, "proposing actions");
  if (a.linked_causes.empty()) throw Error(Errc::invalid_argument, "an action must address at least one cause");
  for (const auto& c : a.linked_causes)
    if (!s.cause(c)) throw Error(Errc::bad_reference, "unknown determined cause '" + c + "'");
  a.id = detail::next_id("action-", s.actions.size());
  a.status = ActionStatus::proposed;
  s.actions.push_back(a);
  ++s.revision;
  return a.id;
}

// proposed -> in_progress -> done, one step at a time.
inline void set_action_status(Session& s, const std::string& action_id, ActionStatus to) {
  if (s.step != Step::develop_actions && s.step != Step::document)
    throw Error(Errc::wrong_step, "action status changes once actions are being developed");
  auto it = std::find_if(s.actions.begin(), s.actions.end(), [&](const ActionProposal& a) { return a.id == action_id; });
  if (it == s.actions.end()) throw Error(Errc::bad_reference, "unknown action '" + action_id + "'");
  if (static_cast<int>(to) != static_cast<int>(it->status) + 1)
    throw Error(Errc::illegal_status_transition,
                std::string("cannot move action from ") + status_name(it->status) + " to " + status_name(to));
  it->status = to;
  ++s.revision;
}

// ---- serialization ----

inline nlohmann::json query_to_json(const DiagnosticQuery& q) {
  return {{"sequence", q.sequence},
          {"model_version", q.model_version_id},
          {"problem", q.problem_id},
          {"evidence", model::evidence_to_json(q.evidence)},
          {"result", model::diagnosis_to_json(q.result)},
          {"timestamp", q.timestamp}};
}

inline DiagnosticQuery query_from_json(const nlohmann::json& j) {
  return {j.at("sequence").get<std::size_t>(), j.at("model_version").get<std::string>(),
          j.at("problem").get<std::string>(), model::evidence_from_json(j.at("evidence")),
          model::diagnosis_from_json(j.at("result")), j.at("timestamp").get<std::string>()};
}

inline nlohmann::json cause_to_json(const DeterminedCause& c) {
  return {{"id", c.id},         {"systematic_error", c.systematic_error_id},
          {"cause", c.cause_id}, {"free_text", c.free_text},
          {"category", c.category}, {"rationale", c.rationale}};
}

inline DeterminedCause cause_from_json(const nlohmann::json& j) {
  return {j.value("id", std::string{}),        j.at("systematic_error").get<std::string>(),
          j.value("cause", std::string{}),     j.value("free_text", std::string{}),
          j.value("category", std::string{}), j.value("rationale", std::string{})};
}

inline nlohmann::json action_to_json(const ActionProposal& a) {
  return {{"id", a.id},
          {"linked_causes", a.linked_causes},
          {"description", a.description},
          {"owner", a.owner},
          {"status", status_name(a.status)}};
}

inline ActionProposal action_from_json(const nlohmann::json& j) {
  return {j.value("id", std::string{}), j.at("linked_causes").get<std::vector<std::string>>(),
          j.value("description", std::string{}), j.value("owner", std::string{}),
          parse_status(j.value("status", std::string("proposed")))};
}

inline nlohmann::json session_to_json(const Session& s) {
  using nlohmann::json;
  json sample = json::array(), stats = json::array(), errors = json::array(), queries = json::array(),
       causes = json::array(), actions = json::array();
  for (const auto& d : s.sample) sample.push_back(analytics::defect_to_json(d));
  for (const auto& st : s.stats) stats.push_back(analytics::stats_to_json(st));
  for (const auto& e : s.systematic_errors) {
    auto j = analytics::systematic_error_to_json(e.error);
    j["problem"] = e.problem_id;
    errors.push_back(std::move(j));
  }
  for (const auto& q : s.queries) queries.push_back(query_to_json(q));
  for (const auto& c : s.causes) causes.push_back(cause_to_json(c));
  for (const auto& a : s.actions) actions.push_back(action_to_json(a));
  return {{"id", s.id},
          {"created_at", s.created_at},
          {"model_version", s.model_version_id},
          {"step", step_name(s.step)},
          {"revision", s.revision},
          {"sample", std::move(sample)},
          {"stats", std::move(stats)},
          {"systematic_errors", std::move(errors)},
          {"queries", std::move(queries)},
          {"causes", std::move(causes)},
          {"actions", std::move(actions)},
          {"report", s.report ? *s.report : json(nullptr)}};
}

inline Session session_from_json(const nlohmann::json& j) {
  try {
    Session s;
    s.id = j.at("id").get<std::string>();
    s.created_at = j.at("created_at").get<std::string>();
    s.model_version_id = j.at("model_version").get<std::string>();
    s.step = parse_step(j.at("step").get<std::string>());
    s.revision = j.at("revision").get<std::uint64_t>();
    for (const auto& d : j.at("sample")) s.sample.push_back(analytics::defect_from_json(d));
    for (const auto& st : j.at("stats")) s.stats.push_back(analytics::stats_from_json(st));
    for (const auto& e : j.at("systematic_errors"))
      s.systematic_errors.push_back({analytics::systematic_error_from_json(e), e.value("problem", std::string{})});
    for (const auto& q : j.at("queries")) s.queries.push_back(query_from_json(q));
    for (const auto& c : j.at("causes")) s.causes.push_back(cause_from_json(c));
    for (const auto& a : j.at("actions")) s.actions.push_back(action_from_json(a));
    if (!j.at("report").is_null()) s.report = j.at("report");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed session: ") + e.what());
  }
}

// ---- report ----

struct Report {
  nlohmann::json document;
  std::string text;
};

namespace detail {

inline std::string cause_text(const model::CauseEffectModel& m, const DeterminedCause& c) {
  if (c.mapped() && m.cause(c.cause_id)) return m.cause(c.cause_id)->label;
  return c.free_text;
}

inline std::string render_report(const nlohmann::json& doc) {
  using util::format_fixed;
  std::ostringstream out;
  const auto& sec = doc.at("sections");
  const auto& head = sec.at(0);
  out << "DCA session report " << head.at("session").get<std::string>() << "\n";
  out << "model version " << head.at("model_version").get<std::string>() << ", created "
      << head.at("created_at").get<std::string>() << "\n";

  const auto& sample = sec.at(1);
  out << "\n1. Sample\n";
  out << sample.at("defects").get<std::size_t>() << " defects\n";
  if (!sample.at("pareto").is_null())
    for (const auto& e : sample.at("pareto").at("series"))
      out << "  " << e.at("category").get<std::string>() << ": " << e.at("count").get<std::size_t>() << " ("
          << format_fixed(e.at("cumulative_share").get<double>(), 4) << " cumulative)\n";
  for (const auto& u : sample.at("u_charts")) {
    std::size_t flagged = 0;
    for (const auto& p : u.at("points")) flagged += p.at("flagged").get<bool>() ? 1 : 0;
    out << "  U-chart " << u.at("iteration").get<std::string>() << ": center line "
        << format_fixed(u.at("center_line").get<double>(), 4) << ", " << flagged << " of " << u.at("points").size()
        << " units flagged\n";
  }

  out << "\n2. Systematic errors\n";
  for (const auto& e : sec.at(2).at("errors"))
    out << "  " << e.at("iteration").get<std::string>() << "  " << e.at("defect_category").get<std::string>() << "  "
        << e.at("label").get<std::string>() << " (" << e.at("count").get<std::size_t>() << ")\n";

  out << "\n3. Causes\n";
  for (const auto& sub : sec.at(3).at("errors")) {
    out << "  " << sub.at("label").get<std::string>() << "\n";
    for (const auto& c : sub.at("causes"))
      out << "    - " << c.at("text").get<std::string>() << " [" << c.at("category").get<std::string>() << "]"
          << (c.at("model_cause").is_null() ? " (not in model)" : "") << "\n";
  }

  out << "\n4. Actions\n";
  for (const auto& a : sec.at(4).at("actions"))
    out << "  " << a.at("id").get<std::string>() << " [" << a.at("status").get<std::string>() << "] "
        << a.at("description").get<std::string>()
        << (a.at("owner").get<std::string>().empty() ? "" : " (owner " + a.at("owner").get<std::string>() + ")")
        << "\n";

  out << "\n5. Evidence ledger\n";
  for (const auto& q : sec.at(5).at("queries")) {
    out << "  #" << q.at("sequence").get<std::size_t>() << " " << q.at("timestamp").get<std::string>() << " problem "
        << q.at("problem").get<std::string>();
    const auto& ev = q.at("evidence");
    if (ev.empty()) out << ", no evidence";
    for (const auto& [k, v] : ev.items()) out << ", " << k << "=" << v.get<std::string>();
    out << "\n";
    const auto& cats = q.at("result").at("categories");
    if (!cats.empty()) {
      const auto& top = cats.at(0);
      out << "     top category " << top.at("label").get<std::string>() << " "
          << format_fixed(top.at("probability").get<double>(), 4);
      if (!top.at("causes").empty())
        out << ", top cause " << top.at("causes").at(0).at("label").get<std::string>() << " "
            << format_fixed(top.at("causes").at(0).at("probability").get<double>(), 4);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace detail

// Report of a session in the document step: session header, sample summary
// with Pareto and U-chart data, systematic errors, causes per error, actions
// and the evidence ledger. Depends only on the session and model.
inline Report build_report(const Session& s, const model::CauseEffectModel& model) {
  using nlohmann::json;
  detail::require_step(s, Step::document, "report generation");
  json sections = json::array();
  sections.push_back({{"name", "session"},
                      {"session", s.id},
                      {"model_version", s.model_version_id},
                      {"created_at", s.created_at}});

  json u_charts = json::array();
  for (const auto& st : s.stats) u_charts.push_back(analytics::u_chart_to_json(analytics::u_chart(st, s.sample)));
  json per_iteration = json::object();
  for (const auto& d : s.sample) per_iteration[d.iteration_id] = per_iteration.value(d.iteration_id, 0) + 1;
  sections.push_back({{"name", "sample"},
                      {"defects", s.sample.size()},
                      {"per_iteration", per_iteration},
                      {"pareto", s.sample.empty() ? json(nullptr) : analytics::pareto_to_json(analytics::pareto(s.sample))},
                      {"u_charts", std::move(u_charts)}});

  json errors = json::array(), cause_sections = json::array();
  for (const auto& e : s.systematic_errors) {
    auto j = analytics::systematic_error_to_json(e.error);
    j.erase("members");
    j["problem"] = e.problem_id.empty() ? json(nullptr) : json(e.problem_id);
    errors.push_back(std::move(j));
    json causes = json::array();
    for (const auto& c : s.causes)
      if (c.systematic_error_id == e.error.id)
        causes.push_back({{"id", c.id},
                          {"text", detail::cause_text(model, c)},
                          {"model_cause", c.mapped() ? json(c.cause_id) : json(nullptr)},
                          {"category", c.category},
                          {"rationale", c.rationale}});
    cause_sections.push_back(
        {{"systematic_error", e.error.id}, {"label", e.error.label}, {"causes", std::move(causes)}});
  }
  sections.push_back({{"name", "systematic_errors"}, {"errors", std::move(errors)}});
  sections.push_back({{"name", "causes"}, {"errors", std::move(cause_sections)}});

  json actions = json::array();
  for (const auto& a : s.actions) actions.push_back(action_to_json(a));
  sections.push_back({{"name", "actions"}, {"actions", std::move(actions)}});

  json ledger = json::array();
  for (const auto& q : s.queries) ledger.push_back(query_to_json(q));
  sections.push_back({{"name", "evidence_ledger"}, {"queries", std::move(ledger)}});

  json doc{{"format", "dca-report"}, {"version", 1}, {"sections", std::move(sections)}};
  auto text = detail::render_report(doc);
  return {std::move(doc), std::move(text)};
}

// Builds the report and keeps it on the session.
inline Report generate_report(Session& s, const model::CauseEffectModel& model) {
  auto r = build_report(s, model);
  if (!s.report || *s.report != r.document) {
    s.report = r.document;
    ++s.revision;
  }
  return r;
}

}  // namespace dca::session
