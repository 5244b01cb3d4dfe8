#pragma once

#include <string>
#include <vector>

#include "dca/bn/network.hpp"
#include "dca/util/random.hpp"

namespace dca::testing {

using bn::Cpd;
using bn::Cpt;
using bn::EvidenceSet;
using bn::Network;
using bn::NoisyOrCpd;
using bn::Variable;

inline Network root_network(double p_true) {
  return Network("root", {Variable::binary("A")}, {Cpt{"A", {}, {{1.0 - p_true, p_true}}}});
}

// A -> B with P(A=t)=0.5, P(B=t|A=t)=0.9, P(B=t|A=f)=0.2.
inline Network chain_ab() {
  return Network("chain", {Variable::binary("A"), Variable::binary("B")},
                 {Cpt{"A", {}, {{0.5, 0.5}}}, Cpt{"B", {"A"}, {{0.8, 0.2}, {0.1, 0.9}}}});
}

struct RandomNetOptions {
  std::size_t nodes = 8;
  std::size_t max_parents = 3;
  double noisy_or_share = 0.0;  // fraction of eligible nodes given a noisy-OR
  bool multistate = false;      // allow three-state variables
};

// Random DAG over v0..v{n-1}; parents always precede children in index order.
inline Network random_network(util::Rng& rng, const RandomNetOptions& opt) {
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < opt.nodes; ++i) {
    std::string id = "v" + std::to_string(i);
    if (opt.multistate && rng.bernoulli(0.3))
      vars.push_back(Variable{id, id, {"lo", "mid", "hi"}});
    else
      vars.push_back(Variable::binary(id));
  }
  std::vector<Cpd> cpds;
  for (std::size_t i = 0; i < opt.nodes; ++i) {
    std::vector<std::string> parents;
    std::size_t rows = 1;
    bool all_binary = vars[i].is_binary();
    for (std::size_t j = 0; j < i; ++j) {
      if (parents.size() >= opt.max_parents) break;
      if (rng.bernoulli(0.35)) {
        parents.push_back(vars[j].id);
        rows *= vars[j].cardinality();
        all_binary = all_binary && vars[j].is_binary();
      }
    }
    if (all_binary && !parents.empty() && rng.bernoulli(opt.noisy_or_share)) {
      NoisyOrCpd n{vars[i].id, parents, {}, 0.02 + 0.3 * rng.uniform()};
      for (std::size_t k = 0; k < parents.size(); ++k) n.link_probs.push_back(0.05 + 0.9 * rng.uniform());
      cpds.emplace_back(std::move(n));
      continue;
    }
    Cpt t{vars[i].id, parents, {}};
    for (std::size_t r = 0; r < rows; ++r) t.rows.push_back(rng.dirichlet_ones(vars[i].cardinality()));
    cpds.emplace_back(std::move(t));
  }
  return Network("random", std::move(vars), std::move(cpds));
}

inline EvidenceSet random_evidence(util::Rng& rng, const Network& net, double observe_prob) {
  EvidenceSet e;
  for (const auto& v : net.variables())
    if (rng.bernoulli(observe_prob)) e.set(v.id, v.states[rng.below(v.cardinality())]);
  return e;
}

}  // namespace dca::testing
