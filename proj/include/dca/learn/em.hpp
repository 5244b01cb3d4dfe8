#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dca/bn/inference.hpp"
#include "dca/bn/network.hpp"
#include "dca/bn/records.hpp"
#include "dca/error.hpp"
#include "dca/util/parallel.hpp"
#include "dca/util/random.hpp"

namespace dca::learn {

using bn::Cpd;
using bn::Cpt;
using bn::Network;
using bn::NoisyOrCpd;
using bn::RecordSet;

struct LearnConfig {
  int max_iterations = 200;
  double tolerance = 1e-6;    // on the change of the traced objective
  double pseudo_count = 1.0;  // Dirichlet/Laplace alpha added to every cell
  std::uint64_t seed = 0;
  bool random_init = false;  // start from initialize_parameters(seed) instead of the given CPDs

  void check() const {
    if (max_iterations <= 0) throw Error(Errc::invalid_argument, "max_iterations must be positive");
    if (!(tolerance > 0.0)) throw Error(Errc::invalid_argument, "tolerance must be positive");
    if (!(pseudo_count >= 0.0) || !std::isfinite(pseudo_count))
      throw Error(Errc::invalid_argument, "pseudo_count must be nonnegative");
  }
};

// `loglik_trace[i]` is the objective at the parameters entering iteration i:
// the log-likelihood of the records plus the Dirichlet smoothing term
// alpha * sum(log theta) over learned cells. With alpha = 0 it is the plain
// log-likelihood. EM never decreases it.
struct LearnResult {
  Network network;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  double final_loglik = 0.0;  // plain log-likelihood of `network`
  LearnConfig config;
};

inline constexpr double kNoisyOrBound = 1e-9;
inline constexpr int kNoisyOrSweeps = 100;

namespace detail {

// Expected (or observed) counts for one family, shaped like its CPT.
struct FamilyCounts {
  std::size_t rows = 0;
  std::size_t card = 0;
  std::vector<double> cells;
};

inline bool learnable(const bn::detail::IndexedFamily& fam) { return !fam.fixed; }

inline std::vector<std::vector<double>> normalize_counts(const FamilyCounts& c, double alpha) {
  std::vector<std::vector<double>> rows(c.rows, std::vector<double>(c.card));
  for (std::size_t r = 0; r < c.rows; ++r) {
    double total = 0.0;
    for (std::size_t s = 0; s < c.card; ++s) total += c.cells[r * c.card + s];
    const double denom = total + alpha * static_cast<double>(c.card);
    for (std::size_t s = 0; s < c.card; ++s)
      rows[r][s] = denom > 0.0 ? (c.cells[r * c.card + s] + alpha) / denom
                               : 1.0 / static_cast<double>(c.card);
  }
  return rows;
}

// Weighted log-likelihood of a noisy-OR against expanded counts:
// sum_r sum_s (n_rs + alpha) log P(s | r).
inline double noisy_or_objective(const FamilyCounts& c, double alpha, const std::vector<double>& links,
                                 double leak) {
  const std::size_t k = links.size();
  double total = 0.0;
  for (std::size_t r = 0; r < c.rows; ++r) {
    double p_false = 1.0 - leak;
    for (std::size_t i = 0; i < k; ++i)
      if ((r >> (k - 1 - i)) & 1U) p_false *= 1.0 - links[i];
    const double w_false = c.cells[r * 2] + alpha;
    const double w_true = c.cells[r * 2 + 1] + alpha;
    if (w_false > 0.0) total += w_false * std::log(p_false);
    if (w_true > 0.0) total += w_true * std::log(1.0 - p_false);
  }
  return total;
}

// Fits link probabilities and leak to expected counts by coordinate ascent.
// Each coordinate objective is concave, so a golden-section search finds its
// maximum; a move is kept only if it improves the objective, so the result is
// never worse than the starting point.
inline NoisyOrCpd refit_noisy_or(const NoisyOrCpd& start, const FamilyCounts& c, double alpha) {
  NoisyOrCpd cur = start;
  for (auto& l : cur.link_probs) l = std::clamp(l, kNoisyOrBound, 1.0 - kNoisyOrBound);
  cur.leak = std::clamp(cur.leak, kNoisyOrBound, 1.0 - kNoisyOrBound);
  double best = noisy_or_objective(c, alpha, cur.link_probs, cur.leak);
  const std::size_t k = cur.link_probs.size();

  auto eval_coord = [&](std::size_t coord, double v) {
    if (coord == k) return noisy_or_objective(c, alpha, cur.link_probs, v);
    double saved = cur.link_probs[coord];
    cur.link_probs[coord] = v;
    double f = noisy_or_objective(c, alpha, cur.link_probs, cur.leak);
    cur.link_probs[coord] = saved;
    return f;
  };

  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < kNoisyOrSweeps; ++sweep) {
    const double before = best;
    for (std::size_t coord = 0; coord <= k; ++coord) {
      double lo = kNoisyOrBound, hi = 1.0 - kNoisyOrBound;
      double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      double f1 = eval_coord(coord, x1), f2 = eval_coord(coord, x2);
      for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = eval_coord(coord, x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = eval_coord(coord, x1);
        }
      }
      const double x = f1 > f2 ? x1 : x2;
      const double fx = std::max(f1, f2);
      if (fx > best) {
        best = fx;
        if (coord == k)
          cur.leak = x;
        else
          cur.link_probs[coord] = x;
      }
    }
    if (best - before < 1e-12) break;
  }
  return cur;
}

// Smoothing term alpha * sum(log theta) over every learned cell.
inline double smoothing_term(const bn::detail::IndexedNetwork& idx, double alpha) {
  if (alpha == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& fam : idx.families()) {
    if (!learnable(fam)) continue;
    if (fam.noisy_or) {
      for (const auto& row : bn::noisy_or_rows(fam.links, fam.leak))
        for (double p : row) total += alpha * std::log(p);
    } else {
      for (double p : fam.table) total += alpha * std::log(p);
    }
  }
  return total;
}

struct EStepResult {
  std::vector<FamilyCounts> counts;  // indexed by child variable
  double loglik = 0.0;
};

// Rows with identical observations collapse into one weighted pattern.
struct Pattern {
  std::vector<int> observed;
  double weight = 0.0;
};

inline std::vector<Pattern> collapse_records(const bn::detail::IndexedNetwork& idx, const RecordSet& records) {
  std::map<std::vector<int>, std::size_t> seen;
  std::vector<Pattern> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto observed = idx.index_evidence(records.evidence(i));
    auto [it, inserted] = seen.emplace(observed, out.size());
    if (inserted)
      out.push_back({std::move(observed), 1.0});
    else
      out[it->second].weight += 1.0;
  }
  return out;
}

inline FamilyCounts empty_counts(const bn::detail::IndexedNetwork& idx, const bn::detail::IndexedFamily& fam) {
  FamilyCounts c;
  c.card = idx.card(fam.child);
  c.rows = 1;
  for (auto p : fam.parents) c.rows *= idx.card(p);
  c.cells.assign(c.rows * c.card, 0.0);
  return c;
}

// Factor product over a small hidden set, enumerated state by state.
struct HiddenJoint {
  std::vector<std::size_t> hidden;  // variable indices
  std::vector<double> values;       // P(hidden state, evidence), row-major over `hidden`
  std::vector<int> observed;        // evidence after determinism propagation
};

// Evidence plus every hidden variable pinned by a unary factor with a single
// nonzero entry (e.g. a deterministic OR whose inputs are all observed). Any
// other state of such a variable has probability zero, so pinning it is exact.
inline std::vector<int> propagate_determinism(const bn::detail::IndexedNetwork& idx, std::vector<int> observed,
                                              std::vector<bn::Factor>& pool) {
  for (bool changed = true; changed;) {
    changed = false;
    pool.clear();
    for (const auto& fam : idx.families()) idx.append_family_factors(fam, observed, pool);
    for (const auto& f : pool) {
      if (f.scope.size() != 1 || observed[f.scope[0]] >= 0) continue;
      int nonzero = -1, count = 0;
      for (std::size_t s = 0; s < f.values.size(); ++s)
        if (f.values[s] != 0.0) {
          nonzero = static_cast<int>(s);
          ++count;
        }
      if (count == 1) {
        observed[f.scope[0]] = nonzero;
        changed = true;
      }
    }
  }
  return observed;
}

// Returns false when the hidden state space exceeds `max_states`.
inline bool enumerate_hidden(const bn::detail::IndexedNetwork& idx, const std::vector<int>& observed,
                             std::size_t max_states, HiddenJoint& out) {
  std::vector<bn::Factor> pool;
  out.observed = propagate_determinism(idx, observed, pool);
  out.hidden.clear();
  std::size_t states = 1;
  for (std::size_t v = 0; v < idx.size(); ++v)
    if (out.observed[v] < 0) {
      out.hidden.push_back(v);
      states *= idx.card(v);
      if (states > max_states) return false;
    }
  // Stride of each factor variable within the hidden odometer.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> plan(pool.size());
  double constant = 1.0;
  for (std::size_t f = 0; f < pool.size(); ++f) {
    if (pool[f].scope.empty()) {
      constant *= pool[f].values[0];
      continue;
    }
    auto strides = pool[f].strides();
    for (std::size_t j = 0; j < pool[f].scope.size(); ++j) {
      auto pos = static_cast<std::size_t>(std::find(out.hidden.begin(), out.hidden.end(), pool[f].scope[j]) -
                                          out.hidden.begin());
      plan[f].emplace_back(pos, strides[j]);
    }
  }
  out.values.assign(states, constant);
  std::vector<std::size_t> state(out.hidden.size(), 0);
  for (std::size_t i = 0; i < states; ++i) {
    double p = constant;
    for (std::size_t f = 0; f < pool.size() && p != 0.0; ++f) {
      if (plan[f].empty()) continue;
      std::size_t off = 0;
      for (const auto& [pos, stride] : plan[f]) off += state[pos] * stride;
      p *= pool[f].values[off];
    }
    out.values[i] = p;
    for (std::size_t d = out.hidden.size(); d-- > 0;) {
      if (++state[d] < idx.card(out.hidden[d])) break;
      state[d] = 0;
    }
  }
  return true;
}

// Hidden joints up to this size are enumerated; larger ones fall back to one
// elimination per family.
inline constexpr std::size_t kEnumerateHiddenLimit = std::size_t{1} << 12;

// Expected family counts for one pattern, with P(pattern) returned through `prob`.
inline std::vector<FamilyCounts> pattern_counts(const bn::InferenceEngine& engine, const Pattern& pat,
                                                double& prob,
                                                std::size_t enumerate_limit = kEnumerateHiddenLimit) {
  const auto& idx = engine.indexed();
  std::vector<FamilyCounts> out(idx.size());

  HiddenJoint joint;
  if (enumerate_limit > 0 && enumerate_hidden(idx, pat.observed, enumerate_limit, joint)) {
    prob = 0.0;
    for (double v : joint.values) prob += v;
    if (!(prob > 0.0)) return out;
    std::vector<int> position(idx.size(), -1);
    for (std::size_t h = 0; h < joint.hidden.size(); ++h) position[joint.hidden[h]] = static_cast<int>(h);
    std::vector<const bn::detail::IndexedFamily*> fams;
    for (const auto& fam : idx.families())
      if (learnable(fam)) {
        out[fam.child] = empty_counts(idx, fam);
        fams.push_back(&fam);
      }
    std::vector<std::size_t> state(joint.hidden.size(), 0);
    auto value_of = [&](std::size_t v) {
      return position[v] >= 0 ? state[static_cast<std::size_t>(position[v])]
                              : static_cast<std::size_t>(joint.observed[v]);
    };
    for (std::size_t i = 0; i < joint.values.size(); ++i) {
      const double w = pat.weight * joint.values[i] / prob;
      if (w != 0.0)
        for (const auto* fam : fams) {
          std::size_t cell = 0;
          for (auto p : fam->parents) cell = cell * idx.card(p) + value_of(p);
          cell = cell * idx.card(fam->child) + value_of(fam->child);
          out[fam->child].cells[cell] += w;
        }
      for (std::size_t d = joint.hidden.size(); d-- > 0;) {
        if (++state[d] < idx.card(joint.hidden[d])) break;
        state[d] = 0;
      }
    }
    return out;
  }

  prob = engine.probability_of_evidence(pat.observed);
  if (!(prob > 0.0)) return out;
  for (const auto& fam : idx.families()) {
    if (!learnable(fam)) continue;
    FamilyCounts c = empty_counts(idx, fam);
    std::vector<std::size_t> vars = fam.parents;
    vars.push_back(fam.child);
    std::vector<std::size_t> hidden;
    for (auto v : vars)
      if (pat.observed[v] < 0) hidden.push_back(v);

    if (hidden.empty()) {
      std::size_t cell = 0;
      for (auto v : vars) cell = cell * idx.card(v) + static_cast<std::size_t>(pat.observed[v]);
      c.cells[cell] += pat.weight;
    } else {
      bn::Factor fj = engine.joint(pat.observed, vars);
      std::vector<std::size_t> state(hidden.size(), 0);
      for (std::size_t h = 0; h < fj.values.size(); ++h) {
        std::size_t cell = 0;
        for (auto v : vars) {
          std::size_t s;
          if (pat.observed[v] >= 0) {
            s = static_cast<std::size_t>(pat.observed[v]);
          } else {
            auto pos = static_cast<std::size_t>(std::find(hidden.begin(), hidden.end(), v) - hidden.begin());
            s = state[pos];
          }
          cell = cell * idx.card(v) + s;
        }
        c.cells[cell] += pat.weight * fj.values[h] / prob;
        for (std::size_t d = hidden.size(); d-- > 0;) {
          if (++state[d] < idx.card(hidden[d])) break;
          state[d] = 0;
        }
      }
    }
    out[fam.child] = std::move(c);
  }
  return out;
}

inline EStepResult e_step(const bn::InferenceEngine& engine, const std::vector<Pattern>& patterns,
                          std::size_t enumerate_limit = kEnumerateHiddenLimit) {
  const auto& idx = engine.indexed();
  std::vector<std::vector<FamilyCounts>> per_pattern(patterns.size());
  std::vector<double> probs(patterns.size(), 0.0);
  util::parallel_for(patterns.size(), [&](std::size_t i) {
    per_pattern[i] = pattern_counts(engine, patterns[i], probs[i], enumerate_limit);
  });

  EStepResult res;
  res.counts.resize(idx.size());
  for (const auto& fam : idx.families())
    if (learnable(fam)) res.counts[fam.child] = empty_counts(idx, fam);
  // Fixed-order reduction keeps the result independent of scheduling.
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (!(probs[i] > 0.0)) {
      res.loglik = -std::numeric_limits<double>::infinity();
      continue;
    }
    res.loglik += patterns[i].weight * std::log(probs[i]);
    for (const auto& fam : idx.families()) {
      if (!learnable(fam)) continue;
      auto& dst = res.counts[fam.child].cells;
      const auto& src = per_pattern[i][fam.child].cells;
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return res;
}

inline Network m_step(const Network& current, const std::vector<FamilyCounts>& counts, double alpha) {
  std::vector<Cpd> cpds;
  cpds.reserve(current.cpds().size());
  for (const auto& cpd : current.cpds()) {
    const auto child = *current.index_of(bn::cpd_child(cpd));
    if (const auto* t = std::get_if<Cpt>(&cpd)) {
      if (t->fixed) {
        cpds.push_back(cpd);
        continue;
      }
      cpds.emplace_back(Cpt{t->child, t->parents, normalize_counts(counts[child], alpha), false});
    } else {
      cpds.emplace_back(refit_noisy_or(std::get<NoisyOrCpd>(cpd), counts[child], alpha));
    }
  }
  return current.with_cpds(std::move(cpds));
}

inline Network require_structure(const Network& structure) {
  auto report = bn::validate_network(structure);
  if (!report.ok()) throw Error(Errc::invalid_structure, "invalid structure: " + report.summary());
  return structure;
}

}  // namespace detail

// Every learnable CPT row drawn from a symmetric Dirichlet(1); noisy-OR links
// drawn uniformly from (0.05, 0.95). Fixed tables are left as they are.
inline Network initialize_parameters(const Network& structure, std::uint64_t seed) {
  detail::require_structure(structure);
  util::Rng rng(seed);
  std::vector<Cpd> cpds;
  for (const auto& cpd : structure.cpds()) {
    if (const auto* t = std::get_if<Cpt>(&cpd)) {
      if (t->fixed) {
        cpds.push_back(cpd);
        continue;
      }
      Cpt out = *t;
      for (auto& row : out.rows) row = rng.dirichlet_ones(row.size());
      cpds.emplace_back(std::move(out));
    } else {
      NoisyOrCpd out = std::get<NoisyOrCpd>(cpd);
      for (auto& l : out.link_probs) l = 0.05 + 0.9 * rng.uniform_open();
      cpds.emplace_back(std::move(out));
    }
  }
  return structure.with_cpds(std::move(cpds));
}

// Maximum-likelihood (smoothed) parameters from complete records.
inline Network ml_counting(const Network& structure, const RecordSet& records, double pseudo_count) {
  detail::require_structure(structure);
  if (!(pseudo_count >= 0.0)) throw Error(Errc::invalid_argument, "pseudo_count must be nonnegative");
  records.check_against(structure);
  for (const auto& v : structure.variables())
    if (std::find(records.columns.begin(), records.columns.end(), v.id) == records.columns.end())
      throw Error(Errc::incomplete_record, "records lack a column for '" + v.id + "'");
  if (!records.complete()) throw Error(Errc::incomplete_record, "ml_counting needs complete records");

  bn::InferenceEngine engine(structure);
  const auto& idx = engine.indexed();
  std::vector<detail::FamilyCounts> counts(idx.size());
  for (const auto& fam : idx.families())
    if (detail::learnable(fam)) counts[fam.child] = detail::empty_counts(idx, fam);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto observed = idx.index_evidence(records.evidence(i));
    for (const auto& fam : idx.families()) {
      if (!detail::learnable(fam)) continue;
      std::size_t cell = 0;
      for (auto p : fam.parents) cell = cell * idx.card(p) + static_cast<std::size_t>(observed[p]);
      cell = cell * idx.card(fam.child) + static_cast<std::size_t>(observed[fam.child]);
      counts[fam.child].cells[cell] += 1.0;
    }
  }
  return detail::m_step(structure, counts, pseudo_count);
}

inline LearnResult em_learn(const Network& structure, const RecordSet& records, const LearnConfig& config) {
  config.check();
  detail::require_structure(structure);
  records.check_against(structure);

  LearnResult result;
  result.config = config;
  Network current = config.random_init ? initialize_parameters(structure, config.seed) : structure;

  bool any_observation = false;
  for (const auto& row : records.rows)
    for (const auto& cell : row.cells)
      if (!cell.empty()) any_observation = true;

  bn::InferenceEngine engine(current);
  auto patterns = detail::collapse_records(engine.indexed(), records);

  if (!any_observation) {
    // Nothing observed: the data carry no information about any parameter.
    double smooth = detail::smoothing_term(engine.indexed(), config.pseudo_count);
    result.network = current;
    result.loglik_trace = {smooth};
    result.iterations = 1;
    result.converged = true;
    result.final_loglik = 0.0;
    return result;
  }

  for (int it = 1; it <= config.max_iterations; ++it) {
    auto stats = detail::e_step(engine, patterns);
    if (!std::isfinite(stats.loglik))
      throw Error(Errc::learn_failure, "a record has probability zero under the current parameters");
    const double objective = stats.loglik + detail::smoothing_term(engine.indexed(), config.pseudo_count);
    result.loglik_trace.push_back(objective);
    result.iterations = it;
    result.final_loglik = stats.loglik;
    if (it > 1 && std::abs(objective - result.loglik_trace[it - 2]) < config.tolerance) {
      result.converged = true;
      break;
    }
    if (it == config.max_iterations) break;
    current = detail::m_step(current, stats.counts, config.pseudo_count);
    engine = bn::InferenceEngine(current);
  }
  result.network = current;
  return result;
}

// Runs em_learn from `restarts` random initializations (seeds seed, seed+1,
// ...) and keeps the highest final log-likelihood; ties go to the lowest seed.
inline LearnResult em_learn_best_of(const Network& structure, const RecordSet& records,
                                    LearnConfig config, int restarts) {
  if (restarts <= 0) throw Error(Errc::invalid_argument, "restarts must be positive");
  config.random_init = true;
  const std::uint64_t base = config.seed;
  LearnResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    config.seed = base + static_cast<std::uint64_t>(r);
    LearnResult res = em_learn(structure, records, config);
    if (!have || res.final_loglik > best.final_loglik) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

}  // namespace dca::learn
