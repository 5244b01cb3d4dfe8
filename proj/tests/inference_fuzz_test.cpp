#include <gtest/gtest.h>

#include <algorithm>

#include "dca/bn/inference.hpp"
#include "test_networks.hpp"

using namespace dca;
using namespace dca::bn;
using dca::testing::RandomNetOptions;

namespace {

std::vector<std::string> all_ids(const Network& net) {
  std::vector<std::string> ids;
  for (const auto& v : net.variables()) ids.push_back(v.id);
  return ids;
}

// Random permutation of the unobserved non-target variables: a valid order.
std::vector<std::string> random_order(util::Rng& rng, const Network& net, const EvidenceSet& e,
                                      const std::string& target) {
  std::vector<std::string> order;
  for (const auto& v : net.variables())
    if (v.id != target && !e.contains(v.id)) order.push_back(v.id);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

}  // namespace

TEST(InferenceFuzz, EliminationMatchesEnumerationUpTo12Nodes) {
  util::Rng rng(7);
  for (int c = 0; c < 120; ++c) {
    RandomNetOptions opt;
    opt.nodes = 2 + rng.below(11);
    opt.noisy_or_share = 0.25;
    Network net = dca::testing::random_network(rng, opt);
    auto evidence = c % 5 == 0 ? EvidenceSet{} : dca::testing::random_evidence(rng, net, 0.3);
    auto ids = all_ids(net);
    auto post = posterior(net, evidence, ids);
    for (const auto& id : ids) {
      auto oracle = enumerate_posterior(net, evidence, id);
      ASSERT_EQ(post[id].size(), oracle.size());
      double sum = 0.0;
      for (std::size_t s = 0; s < oracle.size(); ++s) {
        EXPECT_NEAR(post[id][s], oracle[s], 1e-9) << "case " << c << " var " << id;
        EXPECT_GE(post[id][s], -1e-12);
        EXPECT_LE(post[id][s], 1.0 + 1e-12);
        sum += post[id][s];
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(InferenceFuzz, MultiStateVariables) {
  util::Rng rng(99);
  for (int c = 0; c < 40; ++c) {
    RandomNetOptions opt;
    opt.nodes = 6;
    opt.multistate = true;
    Network net = dca::testing::random_network(rng, opt);
    auto evidence = dca::testing::random_evidence(rng, net, 0.3);
    for (const auto& id : all_ids(net)) {
      auto ve = posterior(net, evidence, {id})[id];
      auto en = enumerate_posterior(net, evidence, id);
      for (std::size_t s = 0; s < en.size(); ++s) EXPECT_NEAR(ve[s], en[s], 1e-9);
    }
  }
}

TEST(InferenceFuzz, PosteriorInvariantUnderEliminationOrder) {
  util::Rng rng(31);
  for (int c = 0; c < 50; ++c) {
    RandomNetOptions opt;
    opt.nodes = 3 + rng.below(8);
    Network net = dca::testing::random_network(rng, opt);
    auto evidence = dca::testing::random_evidence(rng, net, 0.3);
    InferenceEngine engine(net);
    for (const auto& target : all_ids(net)) {
      auto reference = engine.posterior(evidence, target);
      for (int k = 0; k < 3; ++k) {
        auto alt = engine.posterior_with_order(evidence, target, random_order(rng, net, evidence, target));
        for (std::size_t s = 0; s < alt.size(); ++s) EXPECT_NEAR(alt[s], reference[s], 1e-9);
      }
    }
  }
}

TEST(InferenceFuzz, ObservedVariableHasCertainPosterior) {
  util::Rng rng(5);
  for (int c = 0; c < 30; ++c) {
    RandomNetOptions opt;
    opt.nodes = 6;
    Network net = dca::testing::random_network(rng, opt);
    auto evidence = dca::testing::random_evidence(rng, net, 0.5);
    for (const auto& [id, state] : evidence.assignments) {
      auto p = posterior(net, evidence, {id})[id];
      auto s = *net.variable(id).state_index(state);
      EXPECT_EQ(p[s], 1.0);
    }
  }
}

TEST(InferenceFuzz, InvalidOrdersAreRejected) {
  auto net = dca::testing::chain_ab();
  InferenceEngine engine(net);
  EXPECT_THROW(engine.posterior_with_order({}, "A", {}), Error);
  EXPECT_THROW(engine.posterior_with_order({}, "A", {"B", "B"}), Error);
  EXPECT_THROW(engine.posterior_with_order({}, "A", {"A", "B"}), Error);
}
