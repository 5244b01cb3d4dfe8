#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/error.hpp"

namespace dca::model {

struct Entity {
  std::string id;
  std::string label;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Category {
  std::string id;
  std::string label;
  std::vector<std::string> members;
  friend bool operator==(const Category&, const Category&) = default;
};

// Cross-company cause-effect domain: problems, causes grouped in cause
// categories, effects grouped in effect categories.
struct CauseEffectModel {
  std::string version;
  std::string name;
  std::vector<Entity> problems;
  std::vector<Category> cause_categories;
  std::vector<Entity> causes;
  std::vector<Category> effect_categories;
  std::vector<Entity> effects;

  const Entity* problem(const std::string& id) const { return find(problems, id); }
  const Entity* cause(const std::string& id) const { return find(causes, id); }
  const Entity* effect(const std::string& id) const { return find(effects, id); }
  const Category* cause_category(const std::string& id) const { return find(cause_categories, id); }

  // Category holding the cause, or nullptr.
  const Category* category_of_cause(const std::string& cause_id) const {
    for (const auto& c : cause_categories)
      for (const auto& m : c.members)
        if (m == cause_id) return &c;
    return nullptr;
  }

  friend bool operator==(const CauseEffectModel&, const CauseEffectModel&) = default;

 private:
  template <typename T>
  static const T* find(const std::vector<T>& xs, const std::string& id) {
    for (const auto& x : xs)
      if (x.id == id) return &x;
    return nullptr;
  }
};

inline constexpr const char* kModelFormat = "dca-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline void check_memberships(const std::vector<Category>& categories, const std::vector<Entity>& members,
                              const char* what) {
  std::set<std::string> known;
  for (const auto& m : members) known.insert(m.id);
  std::map<std::string, std::string> owner;
  for (const auto& cat : categories) {
    for (const auto& m : cat.members) {
      if (!known.count(m))
        throw Error(Errc::orphan_member_reference,
                    "category '" + cat.id + "' lists unknown " + what + " '" + m + "'");
      auto [it, inserted] = owner.emplace(m, cat.id);
      if (!inserted)
        throw Error(Errc::cause_in_multiple_categories, std::string(what) + " '" + m +
                                                            "' belongs to both '" + it->second +
                                                            "' and '" + cat.id + "'");
    }
  }
  for (const auto& m : members)
    if (!owner.count(m.id))
      throw Error(Errc::orphan_member_reference,
                  std::string(what) + " '" + m.id + "' belongs to no category");
}

}  // namespace detail

// Throws on the first violated model invariant.
inline void check_model(const CauseEffectModel& m) {
  if (m.problems.empty()) throw Error(Errc::no_problems, "model defines no problems");
  std::set<std::string> ids;
  auto claim = [&ids](const std::string& id) {
    if (id.empty()) throw Error(Errc::invalid_argument, "empty id in model");
    if (!ids.insert(id).second) throw Error(Errc::duplicate_id, "id '" + id + "' is used more than once");
  };
  for (const auto& x : m.problems) claim(x.id);
  for (const auto& x : m.cause_categories) claim(x.id);
  for (const auto& x : m.causes) claim(x.id);
  for (const auto& x : m.effect_categories) claim(x.id);
  for (const auto& x : m.effects) claim(x.id);
  detail::check_memberships(m.cause_categories, m.causes, "cause");
  detail::check_memberships(m.effect_categories, m.effects, "effect");
}

inline nlohmann::json model_to_json(const CauseEffectModel& m) {
  using nlohmann::json;
  auto entities = [](const std::vector<Entity>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back({{"id", x.id}, {"label", x.label}});
    return a;
  };
  auto categories = [](const std::vector<Category>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back({{"id", x.id}, {"label", x.label}, {"members", x.members}});
    return a;
  };
  return json{{"format", kModelFormat},
              {"version", kModelFormatVersion},
              {"model_version", m.version},
              {"name", m.name},
              {"problems", entities(m.problems)},
              {"cause_categories", categories(m.cause_categories)},
              {"causes", entities(m.causes)},
              {"effect_categories", categories(m.effect_categories)},
              {"effects", entities(m.effects)}};
}

inline CauseEffectModel model_from_json(const nlohmann::json& j) {
  CauseEffectModel m;
  try {
    if (j.value("format", std::string{}) != kModelFormat)
      throw Error(Errc::parse_error, "not a dca-model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(Errc::parse_error, "unsupported dca-model version");
    auto entities = [&j](const char* key) {
      std::vector<Entity> out;
      if (!j.contains(key)) return out;
      for (const auto& x : j.at(key))
        out.push_back({x.at("id").get<std::string>(), x.value("label", x.at("id").get<std::string>())});
      return out;
    };
    auto categories = [&j](const char* key) {
      std::vector<Category> out;
      if (!j.contains(key)) return out;
      for (const auto& x : j.at(key))
        out.push_back({x.at("id").get<std::string>(), x.value("label", x.at("id").get<std::string>()),
                       x.value("members", std::vector<std::string>{})});
      return out;
    };
    m.version = j.value("model_version", std::string("1"));
    m.name = j.value("name", std::string{});
    m.problems = entities("problems");
    m.cause_categories = categories("cause_categories");
    m.causes = entities("causes");
    m.effect_categories = categories("effect_categories");
    m.effects = entities("effects");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed model document: ") + e.what());
  }
  check_model(m);
  return m;
}

inline CauseEffectModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("model document is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline std::string serialize_model(const CauseEffectModel& m) { return model_to_json(m).dump(2) + "\n"; }

}  // namespace dca::model
