#pragma once

#include <map>
#include <string>
#include <vector>

#include "dca/bn/network.hpp"
#include "dca/model/schema.hpp"

namespace dca::model {

struct CompileParams {
  double initial_prior = 0.5;  // P(true) for every learnable row before training
};

// A model laid out as a layered binary network:
//   causes -> cause categories (deterministic OR) -> problems
//          -> effect categories -> effects
struct CompiledModel {
  CauseEffectModel model;
  bn::Network network;
  std::map<std::string, std::string> node_map;  // model id -> variable id
  CompileParams params;
  std::vector<std::string> warnings;

  const std::string& node(const std::string& model_id) const {
    auto it = node_map.find(model_id);
    if (it == node_map.end()) throw Error(Errc::unknown_id, "unknown model id '" + model_id + "'");
    return it->second;
  }
};

namespace detail {

inline bn::Cpt uniform_row_cpt(const std::string& child, std::vector<std::string> parents, double p_true) {
  std::size_t rows = std::size_t{1} << parents.size();
  return bn::Cpt{child, std::move(parents),
                 std::vector<std::vector<double>>(rows, {1.0 - p_true, p_true}), false};
}

inline bn::Cpt deterministic_or(const std::string& child, std::vector<std::string> parents) {
  std::size_t rows = std::size_t{1} << parents.size();
  std::vector<std::vector<double>> table(rows);
  for (std::size_t r = 0; r < rows; ++r) table[r] = r == 0 ? std::vector<double>{1.0, 0.0}
                                                          : std::vector<double>{0.0, 1.0};
  return bn::Cpt{child, std::move(parents), std::move(table), true};
}

}  // namespace detail

inline constexpr std::size_t kMaxCategoryMembers = 16;

inline CompiledModel compile(const CauseEffectModel& model, const CompileParams& params = {}) {
  check_model(model);
  CompiledModel out;
  out.model = model;
  out.params = params;
  std::vector<bn::Variable> vars;
  std::vector<bn::Cpd> cpds;
  auto add = [&](const Entity& e) {
    vars.push_back(bn::Variable::binary(e.id, e.label));
    out.node_map[e.id] = e.id;
  };

  for (const auto& c : model.causes) {
    add(c);
    cpds.emplace_back(detail::uniform_row_cpt(c.id, {}, params.initial_prior));
  }
  std::vector<std::string> cause_categories;
  for (const auto& cat : model.cause_categories) {
    add({cat.id, cat.label});
    cause_categories.push_back(cat.id);
    if (cat.members.empty()) {
      out.warnings.push_back("cause category '" + cat.id + "' has no member causes; compiled as a root");
      cpds.emplace_back(detail::uniform_row_cpt(cat.id, {}, params.initial_prior));
    } else {
      if (cat.members.size() > kMaxCategoryMembers)
        throw Error(Errc::invalid_argument, "cause category '" + cat.id + "' has more than 16 members");
      cpds.emplace_back(detail::deterministic_or(cat.id, cat.members));
    }
  }
  std::vector<std::string> problems;
  for (const auto& p : model.problems) {
    add(p);
    problems.push_back(p.id);
    cpds.emplace_back(detail::uniform_row_cpt(p.id, cause_categories, params.initial_prior));
  }
  for (const auto& cat : model.effect_categories) {
    add({cat.id, cat.label});
    if (cat.members.empty())
      out.warnings.push_back("effect category '" + cat.id + "' has no member effects");
    cpds.emplace_back(detail::uniform_row_cpt(cat.id, problems, params.initial_prior));
  }
  for (const auto& cat : model.effect_categories)
    for (const auto& m : cat.members) {
      add(*model.effect(m));
      cpds.emplace_back(detail::uniform_row_cpt(m, {cat.id}, params.initial_prior));
    }

  out.network = bn::Network(model.name.empty() ? "cause-effect" : model.name, std::move(vars), std::move(cpds));
  auto report = bn::validate_network(out.network);
  if (!report.ok()) throw Error(Errc::invalid_network, "compiled network invalid: " + report.summary());
  return out;
}

}  // namespace dca::model
