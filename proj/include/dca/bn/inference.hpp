#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dca/bn/factor.hpp"
#include "dca/bn/network.hpp"
#include "dca/bn/records.hpp"
#include "dca/error.hpp"

namespace dca::bn {

inline constexpr std::size_t kMaxNoisyOrParents = 16;
inline constexpr std::size_t kMaxEnumerationStates = std::size_t{1} << 20;

// Row-major CPT entries implied by a noisy-OR: row r encodes the parent states
// with the last parent as the least significant bit.
inline std::vector<std::vector<double>> noisy_or_rows(const std::vector<double>& links, double leak) {
  const std::size_t k = links.size();
  std::vector<std::vector<double>> rows(std::size_t{1} << k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double p_false = 1.0 - leak;
    for (std::size_t i = 0; i < k; ++i)
      if ((r >> (k - 1 - i)) & 1U) p_false *= 1.0 - links[i];
    rows[r] = {p_false, 1.0 - p_false};
  }
  return rows;
}

inline Cpt expand_noisy_or(const NoisyOrCpd& cpd) {
  if (cpd.parents.size() > kMaxNoisyOrParents)
    throw Error(Errc::too_many_parents, "noisy-OR '" + cpd.child + "' has " +
                                            std::to_string(cpd.parents.size()) +
                                            " parents; at most 16 can be expanded");
  if (cpd.link_probs.size() != cpd.parents.size())
    throw Error(Errc::invalid_network, "noisy-OR '" + cpd.child + "' link count mismatch");
  return Cpt{cpd.child, cpd.parents, noisy_or_rows(cpd.link_probs, cpd.leak), false};
}

struct EliminationStep {
  std::string variable;
  std::vector<std::string> factor_scope;  // scope of the product before summing out
};

struct EliminationTrace {
  std::vector<EliminationStep> steps;

  std::size_t max_factor_variables() const {
    std::size_t m = 0;
    for (const auto& s : steps) m = std::max(m, s.factor_scope.size());
    return m;
  }
};

namespace detail {

struct IndexedFamily {
  std::size_t child = 0;
  std::vector<std::size_t> parents;
  bool noisy_or = false;
  bool fixed = false;
  std::vector<double> table;  // CPT, scope parents..., child
  std::vector<double> links;
  double leak = 0.0;
};

// Index-based view of a validated network used by all inference routines.
class IndexedNetwork {
 public:
  explicit IndexedNetwork(const Network& net) {
    require_valid(net);
    const auto& vars = net.variables();
    ids_.reserve(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
      ids_.push_back(vars[i].id);
      cards_.push_back(vars[i].cardinality());
      states_.push_back(vars[i].states);
      lookup_.emplace(vars[i].id, i);
    }
    families_.resize(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const Cpd& cpd = *net.cpd_for(vars[i].id);
      IndexedFamily& fam = families_[i];
      fam.child = i;
      for (const auto& p : cpd_parents(cpd)) fam.parents.push_back(*net.index_of(p));
      if (const auto* cpt = std::get_if<Cpt>(&cpd)) {
        fam.fixed = cpt->fixed;
        for (const auto& row : cpt->rows) fam.table.insert(fam.table.end(), row.begin(), row.end());
      } else {
        const auto& nor = std::get<NoisyOrCpd>(cpd);
        fam.noisy_or = true;
        fam.links = nor.link_probs;
        fam.leak = nor.leak;
      }
    }
    children_.resize(vars.size());
    for (const auto& f : families_)
      for (auto p : f.parents) children_[p].push_back(f.child);
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t card(std::size_t i) const { return cards_[i]; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  const IndexedFamily& family(std::size_t i) const { return families_[i]; }
  const std::vector<IndexedFamily>& families() const noexcept { return families_; }

  // P(child state | parent states) read from an assignment over all variables.
  double family_value(const IndexedFamily& fam, const std::vector<std::size_t>& assignment) const {
    if (fam.noisy_or) {
      double p_false = 1.0 - fam.leak;
      for (std::size_t i = 0; i < fam.parents.size(); ++i)
        if (assignment[fam.parents[i]] == 1) p_false *= 1.0 - fam.links[i];
      return assignment[fam.child] == 1 ? 1.0 - p_false : p_false;
    }
    std::size_t row = 0;
    for (auto p : fam.parents) row = row * cards_[p] + assignment[p];
    return fam.table[row * cards_[fam.child] + assignment[fam.child]];
  }

  // Family factors with evidence applied. A noisy-OR whose child is observed
  // false decomposes into one unary factor per parent.
  void append_family_factors(const IndexedFamily& fam, const std::vector<int>& observed,
                             std::vector<Factor>& out) const {
    auto apply_evidence = [&](Factor f) {
      for (std::size_t j = f.scope.size(); j-- > 0;) {
        auto v = f.scope[j];
        if (observed[v] >= 0) f = reduce(f, v, static_cast<std::size_t>(observed[v]));
      }
      out.push_back(std::move(f));
    };
    if (fam.noisy_or && observed[fam.child] == 0) {
      out.push_back(Factor::scalar(1.0 - fam.leak));
      for (std::size_t i = 0; i < fam.parents.size(); ++i)
        apply_evidence(Factor{{fam.parents[i]}, {2}, {1.0, 1.0 - fam.links[i]}});
      return;
    }
    Factor f;
    f.scope = fam.parents;
    f.scope.push_back(fam.child);
    for (auto v : f.scope) f.cards.push_back(cards_[v]);
    if (fam.noisy_or) {
      for (const auto& row : noisy_or_rows(fam.links, fam.leak))
        f.values.insert(f.values.end(), row.begin(), row.end());
    } else {
      f.values = fam.table;
    }
    apply_evidence(std::move(f));
  }

  // Evidence as a per-variable state index, -1 where unobserved.
  std::vector<int> index_evidence(const EvidenceSet& evidence) const {
    std::vector<int> observed(ids_.size(), -1);
    for (const auto& [id, label] : evidence.assignments) {
      auto it = lookup_.find(id);
      if (it == lookup_.end()) throw Error(Errc::unknown_variable, "evidence on unknown variable '" + id + "'");
      auto i = it->second;
      const auto& states = states_of(i);
      auto s = std::find(states.begin(), states.end(), label);
      if (s == states.end())
        throw Error(Errc::invalid_evidence, "'" + label + "' is not a state of '" + id + "'");
      observed[i] = static_cast<int>(s - states.begin());
    }
    return observed;
  }

  const std::vector<std::string>& states_of(std::size_t i) const { return states_[i]; }

  std::size_t index(const std::string& id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) throw Error(Errc::unknown_variable, "unknown variable '" + id + "'");
    return it->second;
  }

  // Mask of `seeds` plus their ancestors.
  std::vector<bool> ancestral_mask(const std::vector<std::size_t>& seeds) const {
    std::vector<bool> mask(size(), false);
    std::vector<std::size_t> stack(seeds);
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      if (mask[v]) continue;
      mask[v] = true;
      for (auto p : families_[v].parents) stack.push_back(p);
    }
    return mask;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::size_t> cards_;
  std::vector<IndexedFamily> families_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::string>> states_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Greedy min-degree order over the moral graph of active, unobserved
// variables; ties go to the lexicographically lowest id.
inline std::vector<std::size_t> min_degree_order(const IndexedNetwork& idx,
                                                 const std::vector<bool>& active,
                                                 const std::vector<int>& observed,
                                                 const std::vector<bool>& keep) {
  const std::size_t n = idx.size();
  std::vector<std::set<std::size_t>> adj(n);
  auto hidden = [&](std::size_t v) { return active[v] && observed[v] < 0; };
  for (const auto& fam : idx.families()) {
    if (!active[fam.child]) continue;
    std::vector<std::size_t> members;
    if (hidden(fam.child)) members.push_back(fam.child);
    for (auto p : fam.parents)
      if (hidden(p)) members.push_back(p);
    for (auto a : members)
      for (auto b : members)
        if (a != b) adj[a].insert(b);
  }
  std::vector<bool> remaining(n, false);
  std::size_t count = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (hidden(v) && !keep[v]) {
      remaining[v] = true;
      ++count;
    }
  std::vector<std::size_t> order;
  order.reserve(count);
  while (count-- > 0) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!remaining[v]) continue;
      if (best == n || adj[v].size() < adj[best].size() ||
          (adj[v].size() == adj[best].size() && idx.id(v) < idx.id(best)))
        best = v;
    }
    remaining[best] = false;
    order.push_back(best);
    std::vector<std::size_t> nbrs(adj[best].begin(), adj[best].end());
    for (auto a : nbrs) {
      adj[a].erase(best);
      for (auto b : nbrs)
        if (a != b) adj[a].insert(b);
    }
    adj[best].clear();
  }
  return order;
}

// Sums every variable in `order` out of the product of active family factors.
// The result ranges over the active unobserved variables not in `order` and
// equals P(those variables, evidence) restricted to the active subnetwork.
inline Factor eliminate(const IndexedNetwork& idx, const std::vector<int>& observed,
                        const std::vector<bool>& active, const std::vector<std::size_t>& order,
                        EliminationTrace* trace = nullptr) {
  std::vector<Factor> pool;
  for (const auto& fam : idx.families())
    if (active[fam.child]) idx.append_family_factors(fam, observed, pool);

  for (auto v : order) {
    Factor product = Factor::scalar(1.0);
    std::vector<Factor> rest;
    rest.reserve(pool.size());
    bool touched = false;
    for (auto& f : pool) {
      if (f.contains(v)) {
        product = multiply(product, f);
        touched = true;
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (trace) {
      EliminationStep step{idx.id(v), {}};
      for (auto s : product.scope) step.factor_scope.push_back(idx.id(s));
      trace->steps.push_back(std::move(step));
    }
    if (touched) rest.push_back(sum_out(product, v));
    pool = std::move(rest);
  }

  Factor result = Factor::scalar(1.0);
  // Scalars first keeps the multiplication sequence independent of order.
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Factor& a, const Factor& b) { return a.scope.size() < b.scope.size(); });
  for (const auto& f : pool) result = multiply(result, f);
  return result;
}

inline std::vector<double> normalized(const Factor& f, const std::string& what) {
  double z = f.total();
  if (!(z > 0.0) || !std::isfinite(z))
    throw Error(Errc::evidence_inconsistent, "evidence has probability zero (" + what + ")");
  std::vector<double> out(f.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(f.values[i] / z, 0.0, 1.0);
  return out;
}

}  // namespace detail

// Reusable inference over one immutable network. All methods are const and
// safe to call concurrently.
class InferenceEngine {
 public:
  explicit InferenceEngine(const Network& net)
      : idx_(std::make_shared<const detail::IndexedNetwork>(net)) {}

  const detail::IndexedNetwork& indexed() const noexcept { return *idx_; }

  // Marginal posterior of every target, each by variable elimination over the
  // ancestral subnetwork of the target and the evidence.
  std::map<std::string, std::vector<double>> posterior(const EvidenceSet& evidence,
                                                       const std::vector<std::string>& targets) const {
    std::map<std::string, std::vector<double>> out;
    if (targets.empty()) return out;
    auto observed = idx_->index_evidence(evidence);
    for (const auto& t : targets) out[t] = posterior_one(observed, idx_->index(t), nullptr);
    return out;
  }

  std::vector<double> posterior(const EvidenceSet& evidence, const std::string& target,
                                EliminationTrace* trace = nullptr) const {
    auto observed = idx_->index_evidence(evidence);
    return posterior_one(observed, idx_->index(target), trace);
  }

  // Posterior of `target` using a caller-supplied elimination order over the
  // whole network. The order must list every unobserved variable except the
  // target exactly once.
  std::vector<double> posterior_with_order(const EvidenceSet& evidence, const std::string& target,
                                           const std::vector<std::string>& order) const {
    auto observed = idx_->index_evidence(evidence);
    const auto t = idx_->index(target);
    std::vector<bool> listed(idx_->size(), false);
    std::vector<std::size_t> order_idx;
    for (const auto& id : order) {
      auto v = idx_->index(id);
      if (listed[v] || v == t || observed[v] >= 0)
        throw Error(Errc::invalid_argument, "invalid elimination order entry '" + id + "'");
      listed[v] = true;
      order_idx.push_back(v);
    }
    for (std::size_t v = 0; v < idx_->size(); ++v)
      if (v != t && observed[v] < 0 && !listed[v])
        throw Error(Errc::invalid_argument, "elimination order misses '" + idx_->id(v) + "'");
    std::vector<bool> all(idx_->size(), true);
    return finish(detail::eliminate(*idx_, observed, all, order_idx), observed, t);
  }

  // P(evidence); 1 for empty evidence.
  double probability_of_evidence(const EvidenceSet& evidence) const {
    return probability_of_evidence(idx_->index_evidence(evidence));
  }

  double probability_of_evidence(const std::vector<int>& observed) const {
    std::vector<std::size_t> seeds;
    for (std::size_t v = 0; v < observed.size(); ++v)
      if (observed[v] >= 0) seeds.push_back(v);
    if (seeds.empty()) return 1.0;
    auto active = idx_->ancestral_mask(seeds);
    std::vector<bool> keep(idx_->size(), false);
    auto order = detail::min_degree_order(*idx_, active, observed, keep);
    return detail::eliminate(*idx_, observed, active, order).total();
  }

  // Unnormalized joint P(vars, evidence) over the unobserved members of
  // `vars`, scoped in the order given.
  Factor joint(const std::vector<int>& observed, const std::vector<std::size_t>& vars) const {
    std::vector<std::size_t> seeds(vars);
    std::vector<bool> keep(idx_->size(), false);
    std::vector<std::size_t> hidden_vars;
    for (auto v : vars) {
      keep[v] = true;
      if (observed[v] < 0) hidden_vars.push_back(v);
    }
    for (std::size_t v = 0; v < observed.size(); ++v)
      if (observed[v] >= 0) seeds.push_back(v);
    auto active = idx_->ancestral_mask(seeds);
    auto order = detail::min_degree_order(*idx_, active, observed, keep);
    Factor f = detail::eliminate(*idx_, observed, active, order);
    return permute(f, hidden_vars);
  }

 private:
  std::vector<double> posterior_one(const std::vector<int>& observed, std::size_t target,
                                    EliminationTrace* trace) const {
    std::vector<std::size_t> seeds{target};
    for (std::size_t v = 0; v < observed.size(); ++v)
      if (observed[v] >= 0) seeds.push_back(v);
    auto active = idx_->ancestral_mask(seeds);
    std::vector<bool> keep(idx_->size(), false);
    keep[target] = true;
    auto order = detail::min_degree_order(*idx_, active, observed, keep);
    return finish(detail::eliminate(*idx_, observed, active, order, trace), observed, target);
  }

  std::vector<double> finish(const Factor& f, const std::vector<int>& observed,
                             std::size_t target) const {
    if (observed[target] >= 0) {
      if (!(f.total() > 0.0))
        throw Error(Errc::evidence_inconsistent, "evidence has probability zero");
      std::vector<double> out(idx_->card(target), 0.0);
      out[static_cast<std::size_t>(observed[target])] = 1.0;
      return out;
    }
    return detail::normalized(f, idx_->id(target));
  }

  std::shared_ptr<const detail::IndexedNetwork> idx_;
};

inline std::map<std::string, std::vector<double>> posterior(const Network& net,
                                                            const EvidenceSet& evidence,
                                                            const std::vector<std::string>& targets) {
  return InferenceEngine(net).posterior(evidence, targets);
}

// Elimination order for the whole network: every unobserved variable outside
// `keep`, chosen greedily by minimum degree on the moral graph.
inline std::vector<std::string> min_degree_order(const Network& net, const std::set<std::string>& keep,
                                                 const EvidenceSet& evidence = {}) {
  detail::IndexedNetwork idx(net);
  auto observed = idx.index_evidence(evidence);
  std::vector<bool> keep_mask(idx.size(), false);
  for (const auto& k : keep) keep_mask[idx.index(k)] = true;
  std::vector<bool> all(idx.size(), true);
  std::vector<std::string> out;
  for (auto v : detail::min_degree_order(idx, all, observed, keep_mask)) out.push_back(idx.id(v));
  return out;
}

// Brute-force posterior by summing the full joint. Used as the reference for
// verifying variable elimination.
inline std::vector<double> enumerate_posterior(const Network& net, const EvidenceSet& evidence,
                                               const std::string& target) {
  detail::IndexedNetwork idx(net);
  double states = 1.0;
  for (auto c : idx.cards()) states *= static_cast<double>(c);
  if (states > static_cast<double>(kMaxEnumerationStates))
    throw Error(Errc::state_space_too_large, "joint state space exceeds 2^20 configurations");
  auto observed = idx.index_evidence(evidence);
  const auto t = idx.index(target);

  const std::size_t n = idx.size();
  std::vector<std::size_t> assignment(n, 0);
  std::vector<std::size_t> free_vars;
  for (std::size_t v = 0; v < n; ++v) {
    if (observed[v] >= 0)
      assignment[v] = static_cast<std::size_t>(observed[v]);
    else
      free_vars.push_back(v);
  }
  std::vector<double> acc(idx.card(t), 0.0);
  while (true) {
    double p = 1.0;
    for (const auto& fam : idx.families()) p *= idx.family_value(fam, assignment);
    acc[assignment[t]] += p;
    std::size_t d = free_vars.size();
    while (d > 0) {
      auto v = free_vars[d - 1];
      if (++assignment[v] < idx.card(v)) break;
      assignment[v] = 0;
      --d;
    }
    if (d == 0) break;
  }
  double z = 0.0;
  for (double a : acc) z += a;
  if (!(z > 0.0)) throw Error(Errc::evidence_inconsistent, "evidence has probability zero");
  for (double& a : acc) a /= z;
  return acc;
}

// Sum over records of log P(observed cells). Returns -infinity when any record
// is impossible under the network.
inline double log_likelihood(const Network& net, const RecordSet& records) {
  InferenceEngine engine(net);
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    double p = engine.probability_of_evidence(records.evidence(i));
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
  }
  return total;
}

}  // namespace dca::bn
