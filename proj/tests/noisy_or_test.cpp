#include <gtest/gtest.h>

#include "dca/bn/inference.hpp"
#include "test_networks.hpp"

using namespace dca;
using namespace dca::bn;

TEST(ExpandNoisyOr, TwoParentsBothActive) {
  Cpt t = expand_noisy_or(NoisyOrCpd{"C", {"A", "B"}, {0.8, 0.6}, 0.0});
  ASSERT_EQ(t.rows.size(), 4u);
  // rows: (A=f,B=f), (A=f,B=t), (A=t,B=f), (A=t,B=t)
  EXPECT_DOUBLE_EQ(t.rows[3][1], 1.0 - 0.2 * 0.4);
  EXPECT_NEAR(t.rows[3][1], 0.92, 1e-15);
  EXPECT_DOUBLE_EQ(t.rows[2][1], 0.8);
  EXPECT_DOUBLE_EQ(t.rows[1][1], 0.6);
}

TEST(ExpandNoisyOr, NoActiveParentWithoutLeak) {
  Cpt t = expand_noisy_or(NoisyOrCpd{"C", {"A", "B"}, {0.8, 0.6}, 0.0});
  EXPECT_EQ(t.rows[0][1], 0.0);
  EXPECT_EQ(t.rows[0][0], 1.0);
}

TEST(ExpandNoisyOr, LeakOnlyRow) {
  Cpt t = expand_noisy_or(NoisyOrCpd{"C", {"A"}, {0.5}, 0.1});
  EXPECT_NEAR(t.rows[0][1], 0.1, 1e-15);
  EXPECT_NEAR(t.rows[1][1], 1.0 - 0.9 * 0.5, 1e-15);
}

TEST(ExpandNoisyOr, EveryRowFollowsFormula) {
  util::Rng rng(11);
  std::vector<double> links;
  std::vector<std::string> parents;
  for (int i = 0; i < 6; ++i) {
    links.push_back(rng.uniform());
    parents.push_back("p" + std::to_string(i));
  }
  const double leak = 0.07;
  Cpt t = expand_noisy_or(NoisyOrCpd{"C", parents, links, leak});
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double fail = 1.0 - leak;
    for (int i = 0; i < 6; ++i)
      if (r & (1u << (5 - i))) fail *= 1.0 - links[i];
    EXPECT_NEAR(t.rows[r][1], 1.0 - fail, 1e-15);
    EXPECT_NEAR(t.rows[r][0] + t.rows[r][1], 1.0, 1e-15);
  }
}

TEST(ExpandNoisyOr, TooManyParents) {
  NoisyOrCpd n{"C", {}, {}, 0.0};
  for (int i = 0; i < 17; ++i) {
    n.parents.push_back("p" + std::to_string(i));
    n.link_probs.push_back(0.5);
  }
  try {
    expand_noisy_or(n);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_many_parents);
  }
}

TEST(NoisyOrInference, NativeMatchesExpandedOnFuzzCases) {
  util::Rng rng(2024);
  int compared = 0;
  for (int c = 0; c < 60; ++c) {
    dca::testing::RandomNetOptions opt;
    opt.nodes = 7;
    opt.noisy_or_share = 0.8;
    Network native = dca::testing::random_network(rng, opt);
    std::vector<Cpd> expanded_cpds;
    for (const auto& cpd : native.cpds()) {
      if (const auto* n = std::get_if<NoisyOrCpd>(&cpd))
        expanded_cpds.emplace_back(expand_noisy_or(*n));
      else
        expanded_cpds.push_back(cpd);
    }
    Network expanded = native.with_cpds(expanded_cpds);
    auto evidence = dca::testing::random_evidence(rng, native, 0.4);
    std::vector<std::string> targets;
    for (const auto& v : native.variables()) targets.push_back(v.id);
    auto a = posterior(native, evidence, targets);
    auto b = posterior(expanded, evidence, targets);
    for (const auto& t : targets)
      for (std::size_t s = 0; s < a[t].size(); ++s) {
        EXPECT_NEAR(a[t][s], b[t][s], 1e-9);
        ++compared;
      }
  }
  EXPECT_GT(compared, 0);
}

TEST(NoisyOrInference, ChildObservedFalseUsesFactorizedForm) {
  // P(A=t | C=f) with C = noisy-OR(A, B): enumeration and elimination agree.
  Network net("nor", {Variable::binary("A"), Variable::binary("B"), Variable::binary("C")},
              {Cpt{"A", {}, {{0.7, 0.3}}}, Cpt{"B", {}, {{0.4, 0.6}}},
               NoisyOrCpd{"C", {"A", "B"}, {0.8, 0.6}, 0.05}});
  EvidenceSet e;
  e.set("C", false);
  auto ve = posterior(net, e, {"A"})["A"];
  auto en = enumerate_posterior(net, e, "A");
  EXPECT_NEAR(ve[1], en[1], 1e-12);
  // hand: P(A=t,C=f) = 0.3 * 0.95 * 0.2 * (0.4 + 0.6*0.4)
  const double at = 0.3 * 0.95 * 0.2 * (0.4 + 0.6 * 0.4);
  const double af = 0.7 * 0.95 * (0.4 + 0.6 * 0.4);
  EXPECT_NEAR(ve[1], at / (at + af), 1e-12);
}
