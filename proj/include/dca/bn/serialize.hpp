#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dca/bn/network.hpp"
#include "dca/error.hpp"

namespace dca::bn {

inline constexpr const char* kNetworkFormat = "dca-network";
inline constexpr int kNetworkFormatVersion = 1;

inline nlohmann::json network_to_json(const Network& net) {
  using nlohmann::json;
  json vars = json::array();
  for (const auto& v : net.variables())
    vars.push_back({{"id", v.id}, {"name", v.name}, {"states", v.states}});
  json cpds = json::array();
  for (const auto& cpd : net.cpds()) {
    if (const auto* t = std::get_if<Cpt>(&cpd)) {
      json j{{"type", "table"}, {"child", t->child}, {"parents", t->parents}, {"rows", t->rows}};
      if (t->fixed) j["fixed"] = true;
      cpds.push_back(std::move(j));
    } else {
      const auto& n = std::get<NoisyOrCpd>(cpd);
      cpds.push_back({{"type", "noisy-or"},
                      {"child", n.child},
                      {"parents", n.parents},
                      {"link_probs", n.link_probs},
                      {"leak", n.leak}});
    }
  }
  return json{{"format", kNetworkFormat},
              {"version", kNetworkFormatVersion},
              {"name", net.name()},
              {"variables", std::move(vars)},
              {"cpds", std::move(cpds)}};
}

// Parses the structure only; call validate_network for semantic checks.
inline Network network_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != kNetworkFormat)
      throw Error(Errc::parse_error, "not a dca-network document");
    if (j.at("version").get<int>() != kNetworkFormatVersion)
      throw Error(Errc::parse_error, "unsupported dca-network version");
    std::vector<Variable> vars;
    for (const auto& v : j.at("variables")) {
      Variable var{v.at("id").get<std::string>(), v.value("name", std::string{}),
                   v.at("states").get<std::vector<std::string>>()};
      if (var.name.empty()) var.name = var.id;
      vars.push_back(std::move(var));
    }
    std::vector<Cpd> cpds;
    for (const auto& c : j.at("cpds")) {
      const auto type = c.at("type").get<std::string>();
      if (type == "table") {
        cpds.emplace_back(Cpt{c.at("child").get<std::string>(),
                              c.value("parents", std::vector<std::string>{}),
                              c.at("rows").get<std::vector<std::vector<double>>>(),
                              c.value("fixed", false)});
      } else if (type == "noisy-or") {
        cpds.emplace_back(NoisyOrCpd{c.at("child").get<std::string>(),
                                     c.value("parents", std::vector<std::string>{}),
                                     c.at("link_probs").get<std::vector<double>>(),
                                     c.value("leak", 0.0)});
      } else {
        throw Error(Errc::parse_error, "unknown CPD type '" + type + "'");
      }
    }
    return Network(j.value("name", std::string{}), std::move(vars), std::move(cpds));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed network document: ") + e.what());
  }
}

inline std::string serialize_network(const Network& net) { return network_to_json(net).dump(2) + "\n"; }

inline Network parse_network(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("network document is not valid JSON: ") + e.what());
  }
  return network_from_json(j);
}

}  // namespace dca::bn
