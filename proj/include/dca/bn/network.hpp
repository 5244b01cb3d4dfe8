#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dca/error.hpp"

namespace dca::bn {

inline constexpr double kRowSumTolerance = 1e-9;

struct Variable {
  std::string id;
  std::string name;
  std::vector<std::string> states;

  std::size_t cardinality() const noexcept { return states.size(); }

  std::optional<std::size_t> state_index(const std::string& label) const {
    auto it = std::find(states.begin(), states.end(), label);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
  }

  bool is_binary() const noexcept {
    return states.size() == 2 && states[0] == "false" && states[1] == "true";
  }

  static Variable binary(std::string id, std::string name = {}) {
    if (name.empty()) name = id;
    return Variable{std::move(id), std::move(name), {"false", "true"}};
  }
};

// Conditional probability table. Rows are ordered row-major over the parent
// list (the last parent varies fastest); each row is a distribution over the
// child's states. A fixed table is structural (e.g. a deterministic OR) and is
// never touched by parameter learning.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::vector<std::vector<double>> rows;
  bool fixed = false;
};

// P(child=true | active parent set S) = 1 - (1-leak) * prod_{i in S} (1-link_i)
struct NoisyOrCpd {
  std::string child;
  std::vector<std::string> parents;
  std::vector<double> link_probs;
  double leak = 0.0;
};

using Cpd = std::variant<Cpt, NoisyOrCpd>;

inline const std::string& cpd_child(const Cpd& cpd) {
  return std::visit([](const auto& c) -> const std::string& { return c.child; }, cpd);
}

inline const std::vector<std::string>& cpd_parents(const Cpd& cpd) {
  return std::visit(
      [](const auto& c) -> const std::vector<std::string>& { return c.parents; }, cpd);
}

// Observed states keyed by variable id; values are state labels.
struct EvidenceSet {
  std::map<std::string, std::string> assignments;

  EvidenceSet& set(const std::string& id, std::string state) {
    assignments[id] = std::move(state);
    return *this;
  }
  EvidenceSet& set(const std::string& id, const char* state) { return set(id, std::string(state)); }
  EvidenceSet& set(const std::string& id, bool value) {
    return set(id, std::string(value ? "true" : "false"));
  }
  bool contains(const std::string& id) const { return assignments.count(id) > 0; }
  bool empty() const noexcept { return assignments.empty(); }
  std::size_t size() const noexcept { return assignments.size(); }

  friend bool operator==(const EvidenceSet&, const EvidenceSet&) = default;
};

// A discrete Bayesian network. Construction never rejects a structure, so that
// validate_network can report on it; inference entry points refuse networks
// that do not validate.
class Network {
 public:
  Network() = default;
  Network(std::string name, std::vector<Variable> variables, std::vector<Cpd> cpds)
      : name_(std::move(name)), variables_(std::move(variables)), cpds_(std::move(cpds)) {
    reindex();
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Cpd>& cpds() const noexcept { return cpds_; }
  std::size_t size() const noexcept { return variables_.size(); }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = var_index_.find(id);
    if (it == var_index_.end()) return std::nullopt;
    return it->second;
  }

  const Variable& variable(const std::string& id) const {
    auto i = index_of(id);
    if (!i) throw Error(Errc::unknown_variable, "unknown variable '" + id + "'");
    return variables_[*i];
  }

  // CPD governing the given variable, if any.
  const Cpd* cpd_for(const std::string& id) const {
    auto it = cpd_index_.find(id);
    return it == cpd_index_.end() ? nullptr : &cpds_[it->second];
  }

  // Copy with the CPD of `cpd`'s child replaced (or appended if absent).
  Network with_cpd(Cpd cpd) const {
    Network out = *this;
    auto it = out.cpd_index_.find(cpd_child(cpd));
    if (it == out.cpd_index_.end()) {
      out.cpds_.push_back(std::move(cpd));
    } else {
      out.cpds_[it->second] = std::move(cpd);
    }
    out.reindex();
    return out;
  }

  Network with_cpds(std::vector<Cpd> cpds) const {
    return Network(name_, variables_, std::move(cpds));
  }

  Network renamed(std::string name) const {
    Network out = *this;
    out.name_ = std::move(name);
    return out;
  }

  // Network restricted to the given variables; every parent of a retained
  // variable must also be retained.
  Network subnetwork(const std::set<std::string>& ids) const {
    std::vector<Variable> vars;
    std::vector<Cpd> cpds;
    for (const auto& v : variables_)
      if (ids.count(v.id)) vars.push_back(v);
    for (const auto& c : cpds_) {
      if (!ids.count(cpd_child(c))) continue;
      for (const auto& p : cpd_parents(c))
        if (!ids.count(p))
          throw Error(Errc::invalid_argument,
                      "subnetwork drops parent '" + p + "' of '" + cpd_child(c) + "'");
      cpds.push_back(c);
    }
    return Network(name_, std::move(vars), std::move(cpds));
  }

  // Ids of `ids` plus all their ancestors. Unobserved variables outside this
  // set are barren for queries over `ids`, so the ancestral subnetwork yields
  // the same posteriors as the full network.
  std::set<std::string> ancestral_closure(const std::set<std::string>& ids) const {
    std::set<std::string> out;
    std::vector<std::string> stack(ids.begin(), ids.end());
    while (!stack.empty()) {
      std::string id = std::move(stack.back());
      stack.pop_back();
      if (!out.insert(id).second) continue;
      if (const Cpd* c = cpd_for(id))
        for (const auto& p : cpd_parents(*c)) stack.push_back(p);
    }
    return out;
  }

 private:
  void reindex() {
    var_index_.clear();
    cpd_index_.clear();
    for (std::size_t i = 0; i < variables_.size(); ++i) var_index_.emplace(variables_[i].id, i);
    for (std::size_t i = 0; i < cpds_.size(); ++i) cpd_index_.emplace(cpd_child(cpds_[i]), i);
  }

  std::string name_;
  std::vector<Variable> variables_;
  std::vector<Cpd> cpds_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::unordered_map<std::string, std::size_t> cpd_index_;
};

// ---------------------------------------------------------------------------
// Validation

enum class FindingKind {
  cycle,
  row_sum,
  shape,
  dangling_reference,
  duplicate_id,
  missing_cpd,
  duplicate_cpd,
  bad_states,
  out_of_range,
  non_binary,
};

inline std::string_view finding_kind_name(FindingKind k) {
  switch (k) {
    case FindingKind::cycle: return "cycle";
    case FindingKind::row_sum: return "row-sum";
    case FindingKind::shape: return "shape";
    case FindingKind::dangling_reference: return "dangling-reference";
    case FindingKind::duplicate_id: return "duplicate-id";
    case FindingKind::missing_cpd: return "missing-cpd";
    case FindingKind::duplicate_cpd: return "duplicate-cpd";
    case FindingKind::bad_states: return "bad-states";
    case FindingKind::out_of_range: return "out-of-range";
    case FindingKind::non_binary: return "non-binary";
  }
  return "unknown";
}

struct Finding {
  std::string variable;
  FindingKind kind;
  std::string message;
  double deviation = 0.0;  // row-sum findings: |sum - 1|
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const noexcept { return findings.empty(); }
  bool has(FindingKind k) const {
    return std::any_of(findings.begin(), findings.end(),
                       [k](const Finding& f) { return f.kind == k; });
  }
  std::string summary() const {
    std::string out;
    for (const auto& f : findings) {
      if (!out.empty()) out += "; ";
      out += f.variable + ": " + std::string(finding_kind_name(f.kind)) + " (" + f.message + ")";
    }
    return out;
  }
};

namespace detail {

inline void check_probability(ValidationReport& report, const std::string& var, double p,
                              const char* what) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    report.findings.push_back(
        {var, FindingKind::out_of_range, std::string(what) + " outside [0,1]", 0.0});
}

inline void find_cycles(const Network& net, ValidationReport& report) {
  // Kahn's algorithm; whatever cannot be ordered lies on or behind a cycle.
  const auto& vars = net.variables();
  std::vector<std::size_t> indegree(vars.size(), 0);
  std::vector<std::vector<std::size_t>> children(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const Cpd* c = net.cpd_for(vars[i].id);
    if (!c) continue;
    for (const auto& p : cpd_parents(*c)) {
      auto pi = net.index_of(p);
      if (!pi) continue;
      children[*pi].push_back(i);
      ++indegree[i];
    }
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto i = ready.back();
    ready.pop_back();
    ++seen;
    for (auto ch : children[i])
      if (--indegree[ch] == 0) ready.push_back(ch);
  }
  if (seen == vars.size()) return;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (indegree[i] > 0)
      report.findings.push_back({vars[i].id, FindingKind::cycle, "variable lies on a directed cycle"});
}

}  // namespace detail

// Reports every violated network invariant. Never throws.
inline ValidationReport validate_network(const Network& net) {
  ValidationReport report;
  const auto& vars = net.variables();

  std::set<std::string> ids;
  for (const auto& v : vars) {
    if (!ids.insert(v.id).second)
      report.findings.push_back({v.id, FindingKind::duplicate_id, "variable id used twice"});
    std::set<std::string> labels(v.states.begin(), v.states.end());
    if (v.states.size() < 2)
      report.findings.push_back({v.id, FindingKind::bad_states, "fewer than two states"});
    else if (labels.size() != v.states.size())
      report.findings.push_back({v.id, FindingKind::bad_states, "duplicate state label"});
  }

  std::map<std::string, int> cpd_count;
  for (const auto& cpd : net.cpds()) {
    const std::string& child = cpd_child(cpd);
    ++cpd_count[child];
    auto ci = net.index_of(child);
    if (!ci) {
      report.findings.push_back({child, FindingKind::dangling_reference, "CPD for unknown variable"});
      continue;
    }
    bool parents_ok = true;
    std::size_t rows_expected = 1;
    std::set<std::string> seen_parents;
    for (const auto& p : cpd_parents(cpd)) {
      auto pi = net.index_of(p);
      if (!pi) {
        report.findings.push_back(
            {child, FindingKind::dangling_reference, "unknown parent '" + p + "'"});
        parents_ok = false;
        continue;
      }
      if (!seen_parents.insert(p).second) {
        report.findings.push_back({child, FindingKind::shape, "parent '" + p + "' listed twice"});
        parents_ok = false;
      }
      rows_expected *= vars[*pi].cardinality();
    }
    const Variable& cv = vars[*ci];

    if (const auto* cpt = std::get_if<Cpt>(&cpd)) {
      if (!parents_ok) continue;
      if (cpt->rows.size() != rows_expected) {
        report.findings.push_back({child, FindingKind::shape,
                                   "expected " + std::to_string(rows_expected) + " rows, got " +
                                       std::to_string(cpt->rows.size())});
        continue;
      }
      for (std::size_t r = 0; r < cpt->rows.size(); ++r) {
        const auto& row = cpt->rows[r];
        if (row.size() != cv.cardinality()) {
          report.findings.push_back({child, FindingKind::shape,
                                     "row " + std::to_string(r) + " has " +
                                         std::to_string(row.size()) + " entries"});
          continue;
        }
        double sum = 0.0;
        bool in_range = true;
        for (double p : row) {
          sum += p;
          if (!std::isfinite(p) || p < 0.0 || p > 1.0) in_range = false;
        }
        if (!in_range)
          report.findings.push_back(
              {child, FindingKind::out_of_range, "row " + std::to_string(r) + " entry outside [0,1]"});
        double dev = std::abs(sum - 1.0);
        if (!(dev <= kRowSumTolerance))
          report.findings.push_back(
              {child, FindingKind::row_sum, "row " + std::to_string(r) + " does not sum to 1", dev});
      }
    } else {
      const auto& nor = std::get<NoisyOrCpd>(cpd);
      if (!cv.is_binary())
        report.findings.push_back({child, FindingKind::non_binary, "noisy-OR child must be binary"});
      for (const auto& p : nor.parents) {
        auto pi = net.index_of(p);
        if (pi && !vars[*pi].is_binary())
          report.findings.push_back(
              {child, FindingKind::non_binary, "noisy-OR parent '" + p + "' must be binary"});
      }
      if (nor.link_probs.size() != nor.parents.size())
        report.findings.push_back({child, FindingKind::shape, "link count differs from parent count"});
      for (double l : nor.link_probs) detail::check_probability(report, child, l, "link probability");
      detail::check_probability(report, child, nor.leak, "leak");
    }
  }

  for (const auto& v : vars) {
    auto it = cpd_count.find(v.id);
    if (it == cpd_count.end())
      report.findings.push_back({v.id, FindingKind::missing_cpd, "variable has no CPD"});
    else if (it->second > 1)
      report.findings.push_back({v.id, FindingKind::duplicate_cpd, "variable has several CPDs"});
  }

  detail::find_cycles(net, report);
  return report;
}

inline void require_valid(const Network& net) {
  auto report = validate_network(net);
  if (!report.ok()) throw Error(Errc::invalid_network, "invalid network: " + report.summary());
}

}  // namespace dca::bn
