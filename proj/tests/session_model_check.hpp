#pragma once

#include <deque>
#include <functional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "dca/session/session.hpp"

namespace dca::testing {

struct ModelCheckResult {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t rejected = 0;
  std::set<int> steps_reached;
  std::vector<std::string> violations;
};

// Breadth-first exploration of every session state reachable from a fresh
// session through a bounded operation alphabet (at most two causes and one
// action). After each successful operation the gates of every step up to
// the current one must hold and all references must resolve; a rejected
// operation must leave the session byte-identical, revision included.
inline ModelCheckResult explore_sessions(const session::ModelVersion& v, std::size_t max_states = 200000) {
  using namespace session;
  using analytics::Nature;
  const auto& m = v.model();
  std::vector<analytics::DefectRecord> pool{{"d1", "I", "a", Nature::omission, "", "", ""},
                                            {"d2", "I", "a", Nature::ambiguity, "", "", ""},
                                            {"d3", "I", "b", Nature::omission, "", "", ""}};
  std::vector<analytics::IterationStats> stats{{"I", {{"a", 5, std::nullopt}, {"b", 3, std::nullopt}}, 2.0}};

  std::vector<std::function<void(Session&)>> ops;
  for (auto st : kSteps) ops.push_back([st](Session& s) { advance(s, st); });
  for (unsigned mask = 0; mask < 8; ++mask)
    ops.push_back([mask, &pool, &stats](Session& s) {
      std::vector<analytics::DefectRecord> pick;
      for (unsigned i = 0; i < 3; ++i)
        if (mask & (1U << i)) pick.push_back(pool[i]);
      set_sample(s, pick, stats);
    });
  ops.push_back([](Session& s) { classify_defect(s, "d1", Nature::incorrect_fact, ""); });
  ops.push_back([](Session& s) { add_systematic_error(s, {"e1", "one", Nature::omission, {"d1"}, ""}); });
  ops.push_back([](Session& s) { add_systematic_error(s, {"e2", "two", Nature::omission, {}, "I"}); });
  ops.push_back([](Session& s) { add_systematic_error(s, {"e3", "three", Nature::omission, {"d2", "d3"}, ""}); });
  ops.push_back([&m](Session& s) { link_problem(s, m, "e1", "p_comm_team"); });
  ops.push_back([&m](Session& s) {
    if (s.causes.size() < 2) record_cause(s, m, {"", "e1", "c_experience", "", "", ""});
  });
  ops.push_back([&m](Session& s) {
    if (s.causes.size() < 2) record_cause(s, m, {"", "e2", "", "Oversight", "people", ""});
  });
  ops.push_back([&m](Session& s) {
    if (s.causes.size() < 2) record_cause(s, m, {"", "e3", "", "Oversight", "people", ""});
  });
  ops.push_back([&m](Session& s) { promote_cause(s, m, "cause-2", "c_qualification"); });
  ops.push_back([](Session& s) {
    if (s.actions.empty()) propose_action(s, {"", {"cause-1"}, "act", "", {}});
  });
  for (auto st : {ActionStatus::proposed, ActionStatus::in_progress, ActionStatus::done})
    ops.push_back([st](Session& s) { set_action_status(s, "action-1", st); });

  auto key = [](const Session& s) {
    auto j = session_to_json(s);
    j.erase("revision");
    return j.dump();
  };

  ModelCheckResult out;
  auto violation = [&](const Session& s, const std::string& what) {
    if (out.violations.size() < 20) out.violations.push_back(what + " in " + key(s));
  };
  auto check = [&](const Session& s) {
    for (auto st : kSteps)
      if (st != Step::select_sample && static_cast<int>(st) <= static_cast<int>(s.step))
        if (auto g = gate_violation(s, st); !g.empty()) violation(s, std::string("gate ") + step_name(st) + ": " + g);
    for (const auto& e : s.systematic_errors)
      for (const auto& mem : e.error.members)
        if (!s.defect(mem)) violation(s, "dangling member " + mem);
    for (const auto& c : s.causes) {
      const auto* e = s.systematic_error(c.systematic_error_id);
      if (!e || e->error.members.empty()) violation(s, "cause on missing or empty error");
      if (c.mapped() && !m.cause(c.cause_id)) violation(s, "cause not in model");
    }
    for (const auto& a : s.actions) {
      if (a.linked_causes.empty()) violation(s, "action without causes");
      for (const auto& l : a.linked_causes)
        if (!s.cause(l)) violation(s, "action links missing cause " + l);
    }
  };

  std::unordered_set<std::string> seen;
  std::deque<Session> frontier;
  Session start = create_session(v, "s", "t");
  seen.insert(key(start));
  frontier.push_back(start);
  while (!frontier.empty() && seen.size() < max_states) {
    Session cur = std::move(frontier.front());
    frontier.pop_front();
    out.steps_reached.insert(static_cast<int>(cur.step));
    for (const auto& op : ops) {
      Session next = cur;
      const auto before = session_to_json(next).dump();
      try {
        op(next);
      } catch (const Error&) {
        ++out.rejected;
        if (session_to_json(next).dump() != before) violation(cur, "rejected operation changed the session");
        continue;
      }
      ++out.transitions;
      check(next);
      if (seen.insert(key(next)).second) frontier.push_back(std::move(next));
    }
  }
  if (!frontier.empty()) out.violations.push_back("state bound reached before exhaustion");
  out.states = seen.size();
  return out;
}

}  // namespace dca::testing
