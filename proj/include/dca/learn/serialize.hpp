#pragma once

#include <nlohmann/json.hpp>

#include "dca/learn/em.hpp"

namespace dca::learn {

inline nlohmann::json config_to_json(const LearnConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"pseudo_count", c.pseudo_count},
          {"seed", c.seed},
          {"random_init", c.random_init}};
}

// Missing keys keep their defaults.
inline LearnConfig config_from_json(const nlohmann::json& j) {
  LearnConfig c;
  if (j.is_null()) return c;
  try {
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.pseudo_count = j.value("pseudo_count", c.pseudo_count);
    c.seed = j.value("seed", c.seed);
    c.random_init = j.value("random_init", c.random_init);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed learn config: ") + e.what());
  }
  c.check();
  return c;
}

// Trace values may be -inf for impossible data; JSON has no infinity, so
// those are written as null.
inline nlohmann::json trace_to_json(const std::vector<double>& trace) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : trace) {
    if (std::isfinite(v))
      a.push_back(v);
    else
      a.push_back(nullptr);
  }
  return a;
}

inline std::vector<double> trace_from_json(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
  return out;
}

}  // namespace dca::learn
