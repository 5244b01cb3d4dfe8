#include <gtest/gtest.h>

#include <cmath>

#include "dca/bn/inference.hpp"
#include "dca/learn/em.hpp"
#include "test_networks.hpp"

using namespace dca;
using namespace dca::bn;
using namespace dca::learn;

namespace {

RecordSet coin_records() {
  RecordSet r;
  r.columns = {"A"};
  for (const char* cell : {"true", "true", "false", ""}) r.add({cell});
  return r;
}

// Draws complete samples from `net` by ancestral sampling, then blanks cells
// with probability `missing`.
RecordSet sample_records(util::Rng& rng, const Network& net, std::size_t n, double missing) {
  RecordSet r;
  for (const auto& v : net.variables()) r.columns.push_back(v.id);
  InferenceEngine engine(net);
  const auto& idx = engine.indexed();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> a(idx.size(), 0);
    for (std::size_t v = 0; v < idx.size(); ++v) {  // parents precede children in random_network
      double u = rng.uniform(), acc = 0.0;
      for (std::size_t s = 0; s < idx.card(v); ++s) {
        a[v] = s;
        acc += idx.family_value(idx.family(v), a);
        if (u < acc) break;
      }
    }
    std::vector<std::string> cells;
    for (std::size_t v = 0; v < idx.size(); ++v)
      cells.push_back(rng.bernoulli(missing) ? "" : net.variables()[v].states[a[v]]);
    r.add(cells);
  }
  return r;
}

double max_abs_param_diff(const Network& a, const Network& b) {
  double m = 0.0;
  for (const auto& cpd : a.cpds()) {
    const auto& other = *b.cpd_for(cpd_child(cpd));
    if (const auto* ta = std::get_if<Cpt>(&cpd)) {
      const auto& tb = std::get<Cpt>(other);
      for (std::size_t r = 0; r < ta->rows.size(); ++r)
        for (std::size_t s = 0; s < ta->rows[r].size(); ++s)
          m = std::max(m, std::abs(ta->rows[r][s] - tb.rows[r][s]));
    } else {
      const auto& na = std::get<NoisyOrCpd>(cpd);
      const auto& nb = std::get<NoisyOrCpd>(other);
      for (std::size_t i = 0; i < na.link_probs.size(); ++i)
        m = std::max(m, std::abs(na.link_probs[i] - nb.link_probs[i]));
      m = std::max(m, std::abs(na.leak - nb.leak));
    }
  }
  return m;
}

}  // namespace

TEST(MlCounting, RootFrequencies) {
  RecordSet r;
  r.columns = {"A"};
  for (const char* cell : {"true", "true", "true", "false"}) r.add({cell});
  auto net = ml_counting(dca::testing::root_network(0.5), r, 0.0);
  const auto& t = std::get<Cpt>(*net.cpd_for("A"));
  EXPECT_DOUBLE_EQ(t.rows[0][0], 0.25);
  EXPECT_DOUBLE_EQ(t.rows[0][1], 0.75);
}

TEST(MlCounting, UncoveredParentRowIsPureSmoothing) {
  RecordSet r;
  r.columns = {"A", "B"};
  for (int i = 0; i < 3; ++i) r.add({"true", "true"});
  r.add({"true", "false"});
  auto net = ml_counting(dca::testing::chain_ab(), r, 1.0);
  const auto& b = std::get<Cpt>(*net.cpd_for("B"));
  EXPECT_DOUBLE_EQ(b.rows[0][0], 0.5);  // A=false never observed
  EXPECT_DOUBLE_EQ(b.rows[0][1], 0.5);
}

TEST(MlCounting, ChildConditionalFrequency) {
  RecordSet r;
  r.columns = {"A", "B"};
  for (int i = 0; i < 3; ++i) r.add({"true", "true"});
  r.add({"true", "false"});
  auto net = ml_counting(dca::testing::chain_ab(), r, 0.0);
  EXPECT_DOUBLE_EQ(std::get<Cpt>(*net.cpd_for("B")).rows[1][1], 0.75);
}

TEST(MlCounting, RejectsIncompleteRecords) {
  auto r = coin_records();
  try {
    ml_counting(dca::testing::root_network(0.5), r, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::incomplete_record);
  }
}

TEST(EmLearn, CoinConvergesToFixedPoint) {
  // Oracle: maximize L(theta) = theta^2 (1 - theta) on a fine grid.
  double best_theta = 0.0, best_ll = -1e300;
  for (int i = 1; i < 1000000; ++i) {
    double th = i * 1e-6;
    double ll = 2 * std::log(th) + std::log(1 - th);
    if (ll > best_ll) {
      best_ll = ll;
      best_theta = th;
    }
  }
  ASSERT_NEAR(best_theta, 2.0 / 3.0, 1e-6);

  LearnConfig cfg;
  cfg.pseudo_count = 0.0;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 500;
  auto res = em_learn(dca::testing::root_network(0.5), coin_records(), cfg);
  EXPECT_TRUE(res.converged);
  const double theta = std::get<Cpt>(*res.network.cpd_for("A")).rows[0][1];
  EXPECT_NEAR(theta, best_theta, 2e-6);
  EXPECT_NEAR(theta, 2.0 / 3.0, 1e-6);
}

TEST(EmLearn, CompleteDataEqualsCounting) {
  util::Rng rng(3);
  for (int c = 0; c < 10; ++c) {
    dca::testing::RandomNetOptions opt;
    opt.nodes = 5;
    auto truth = dca::testing::random_network(rng, opt);
    auto records = sample_records(rng, truth, 60, 0.0);
    for (double alpha : {0.0, 1.0}) {
      LearnConfig cfg;
      cfg.pseudo_count = alpha;
      auto em = em_learn(truth, records, cfg);
      auto ml = ml_counting(truth, records, alpha);
      EXPECT_LT(max_abs_param_diff(em.network, ml), 1e-9);
    }
  }
}

TEST(EmLearn, AllMissingLeavesParametersUnchanged) {
  RecordSet r;
  r.columns = {"A", "B"};
  r.add({"", ""});
  r.add({"", ""});
  auto start = dca::testing::chain_ab();
  auto res = em_learn(start, r, LearnConfig{});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_EQ(max_abs_param_diff(res.network, start), 0.0);
}

TEST(EmLearn, ObjectiveNeverDecreases) {
  util::Rng rng(17);
  for (int c = 0; c < 60; ++c) {
    dca::testing::RandomNetOptions opt;
    opt.nodes = 3 + rng.below(5);
    opt.noisy_or_share = c % 3 == 0 ? 0.6 : 0.0;
    auto truth = dca::testing::random_network(rng, opt);
    auto records = sample_records(rng, truth, 40, 0.35);
    LearnConfig cfg;
    cfg.pseudo_count = c % 2 == 0 ? 0.0 : 1.0;
    cfg.random_init = true;
    cfg.seed = static_cast<std::uint64_t>(c);
    cfg.max_iterations = 60;
    auto res = em_learn(truth, records, cfg);
    for (std::size_t i = 1; i < res.loglik_trace.size(); ++i)
      EXPECT_GE(res.loglik_trace[i], res.loglik_trace[i - 1] - 1e-9) << "case " << c << " iter " << i;
  }
}

TEST(EStep, EnumerationMatchesElimination) {
  util::Rng rng(23);
  for (int c = 0; c < 40; ++c) {
    dca::testing::RandomNetOptions opt;
    opt.nodes = 3 + rng.below(7);
    opt.noisy_or_share = c % 3 == 0 ? 0.5 : 0.0;
    opt.multistate = c % 4 == 1;
    auto net = dca::testing::random_network(rng, opt);
    auto records = sample_records(rng, net, 30, 0.4);
    InferenceEngine engine(net);
    auto patterns = learn::detail::collapse_records(engine.indexed(), records);
    auto fast = learn::detail::e_step(engine, patterns);
    auto slow = learn::detail::e_step(engine, patterns, 0);
    EXPECT_NEAR(fast.loglik, slow.loglik, 1e-9) << "case " << c;
    ASSERT_EQ(fast.counts.size(), slow.counts.size());
    for (std::size_t v = 0; v < fast.counts.size(); ++v) {
      ASSERT_EQ(fast.counts[v].cells.size(), slow.counts[v].cells.size());
      for (std::size_t k = 0; k < fast.counts[v].cells.size(); ++k)
        EXPECT_NEAR(fast.counts[v].cells[k], slow.counts[v].cells[k], 1e-9) << "case " << c;
    }
  }
}

TEST(EmLearn, SmoothingKeepsProbabilitiesInterior) {
  util::Rng rng(8);
  dca::testing::RandomNetOptions opt;
  opt.nodes = 6;
  auto truth = dca::testing::random_network(rng, opt);
  auto records = sample_records(rng, truth, 15, 0.3);
  auto res = em_learn(truth, records, LearnConfig{});
  for (const auto& cpd : res.network.cpds())
    for (const auto& row : std::get<Cpt>(cpd).rows)
      for (double p : row) {
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
      }
}

TEST(EmLearn, DeterministicGivenSeed) {
  util::Rng rng(21);
  dca::testing::RandomNetOptions opt;
  opt.nodes = 6;
  opt.noisy_or_share = 0.5;
  auto truth = dca::testing::random_network(rng, opt);
  auto records = sample_records(rng, truth, 50, 0.3);
  LearnConfig cfg;
  cfg.random_init = true;
  cfg.seed = 5;
  auto a = em_learn(truth, records, cfg);
  auto b = em_learn(truth, records, cfg);
  EXPECT_EQ(max_abs_param_diff(a.network, b.network), 0.0);
  EXPECT_EQ(a.loglik_trace, b.loglik_trace);
}

TEST(EmLearn, RejectsInvalidStructure) {
  Network bad("bad", {Variable::binary("A")}, {Cpt{"A", {}, {{0.6, 0.5}}}});
  try {
    em_learn(bad, coin_records(), LearnConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_structure);
  }
}

TEST(EmLearn, NoisyOrRefitRecoversLinks) {
  // Complete data from a known noisy-OR; the projected M-step should land
  // close to the generating parameters.
  Network truth("nor", {Variable::binary("A"), Variable::binary("B"), Variable::binary("C")},
                {Cpt{"A", {}, {{0.5, 0.5}}}, Cpt{"B", {}, {{0.5, 0.5}}},
                 NoisyOrCpd{"C", {"A", "B"}, {0.7, 0.4}, 0.1}});
  util::Rng rng(4);
  auto records = sample_records(rng, truth, 20000, 0.0);
  LearnConfig cfg;
  cfg.pseudo_count = 0.0;
  auto res = em_learn(truth, records, cfg);
  const auto& n = std::get<NoisyOrCpd>(*res.network.cpd_for("C"));
  EXPECT_NEAR(n.link_probs[0], 0.7, 0.03);
  EXPECT_NEAR(n.link_probs[1], 0.4, 0.03);
  EXPECT_NEAR(n.leak, 0.1, 0.03);
}

TEST(InitializeParameters, DeterministicNormalizedAndSeedSensitive) {
  util::Rng rng(1);
  dca::testing::RandomNetOptions opt;
  opt.nodes = 8;
  opt.noisy_or_share = 0.4;
  auto structure = dca::testing::random_network(rng, opt);
  auto a = initialize_parameters(structure, 42);
  auto b = initialize_parameters(structure, 42);
  auto c = initialize_parameters(structure, 43);
  EXPECT_EQ(max_abs_param_diff(a, b), 0.0);
  EXPECT_GT(max_abs_param_diff(a, c), 0.0);
  for (const auto& cpd : a.cpds()) {
    if (const auto* t = std::get_if<Cpt>(&cpd)) {
      for (const auto& row : t->rows) {
        double sum = 0.0;
        for (double p : row) sum += p;
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    } else {
      for (double l : std::get<NoisyOrCpd>(cpd).link_probs) {
        EXPECT_GT(l, 0.05);
        EXPECT_LT(l, 0.95);
      }
    }
  }
}

TEST(InitializeParameters, FixedTablesUntouched) {
  Network net("fixed", {Variable::binary("A"), Variable::binary("B")},
              {Cpt{"A", {}, {{0.5, 0.5}}}, Cpt{"B", {"A"}, {{1.0, 0.0}, {0.0, 1.0}}, true}});
  auto init = initialize_parameters(net, 9);
  EXPECT_EQ(std::get<Cpt>(*init.cpd_for("B")).rows, std::get<Cpt>(*net.cpd_for("B")).rows);
}
