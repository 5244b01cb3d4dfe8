#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/bn/records_io.hpp"
#include "dca/bn/serialize.hpp"
#include "dca/learn/serialize.hpp"
#include "dca/model/compile.hpp"
#include "dca/model/train.hpp"

namespace dca::session {

struct LearnMetadata {
  learn::LearnConfig config;
  int restarts = 1;
  int iterations = 0;
  bool converged = false;
  double final_loglik = 0.0;
  std::vector<double> loglik_trace;
};

// A trained model. Never modified after it enters a registry.
struct ModelVersion {
  std::string id;
  std::string parent_id;  // empty for a root version
  model::CompiledModel compiled;  // network holds the trained parameters
  bn::RecordSet records;
  std::string records_fingerprint;
  LearnMetadata learn;

  const model::CauseEffectModel& model() const { return compiled.model; }
  const bn::Network& network() const { return compiled.network; }
};

inline nlohmann::json learn_metadata_to_json(const LearnMetadata& m) {
  return {{"config", learn::config_to_json(m.config)},
          {"restarts", m.restarts},
          {"iterations", m.iterations},
          {"converged", m.converged},
          {"final_loglik", m.final_loglik},
          {"loglik_trace", learn::trace_to_json(m.loglik_trace)}};
}

inline LearnMetadata learn_metadata_from_json(const nlohmann::json& j) {
  LearnMetadata m;
  m.config = learn::config_from_json(j.at("config"));
  m.restarts = j.at("restarts").get<int>();
  m.iterations = j.at("iterations").get<int>();
  m.converged = j.at("converged").get<bool>();
  m.final_loglik = j.at("final_loglik").is_null() ? -std::numeric_limits<double>::infinity()
                                                   : j.at("final_loglik").get<double>();
  m.loglik_trace = learn::trace_from_json(j.at("loglik_trace"));
  return m;
}

// Summary without the network and records.
inline nlohmann::json version_summary_json(const ModelVersion& v) {
  return {{"id", v.id},
          {"parent", v.parent_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(v.parent_id)},
          {"model_name", v.model().name},
          {"model_version", v.model().version},
          {"records", v.records.size()},
          {"records_fingerprint", v.records_fingerprint},
          {"learn", learn_metadata_to_json(v.learn)}};
}

inline nlohmann::json version_to_json(const ModelVersion& v) {
  auto j = version_summary_json(v);
  j["model"] = model::model_to_json(v.model());
  j["initial_prior"] = v.compiled.params.initial_prior;
  j["network"] = bn::network_to_json(v.network());
  j["records_csv"] = bn::format_records_csv(v.records);
  return j;
}

inline ModelVersion version_from_json(const nlohmann::json& j) {
  try {
    ModelVersion v;
    v.id = j.at("id").get<std::string>();
    v.parent_id = j.at("parent").is_null() ? std::string{} : j.at("parent").get<std::string>();
    model::CompileParams params{j.value("initial_prior", 0.5)};
    v.compiled = model::compile(model::model_from_json(j.at("model")), params);
    v.compiled.network = bn::network_from_json(j.at("network"));
    v.records = bn::parse_records_csv(j.at("records_csv").get<std::string>());
    v.records_fingerprint = j.at("records_fingerprint").get<std::string>();
    v.learn = learn_metadata_from_json(j.at("learn"));
    if (v.records.fingerprint() != v.records_fingerprint)
      throw Error(Errc::parse_error, "version '" + v.id + "' records do not match their fingerprint");
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed model version: ") + e.what());
  }
}

// Trains `compiled` on `records` and packages the result (id left empty).
inline ModelVersion train_version(const model::CompiledModel& compiled, const bn::RecordSet& records,
                                  const learn::LearnConfig& config, int restarts, std::string parent_id = {}) {
  auto res = model::train(compiled, records, config, restarts);
  ModelVersion v;
  v.parent_id = std::move(parent_id);
  v.compiled = compiled;
  v.compiled.network = res.network;
  v.records = records;
  v.records_fingerprint = records.fingerprint();
  v.learn = {res.config, restarts, res.iterations, res.converged, res.final_loglik, res.loglik_trace};
  return v;
}

// Append-only set of model versions forming a lineage tree. Ids are assigned
// on insertion (v1, v2, ...); a version's parent must already be present.
class VersionRegistry {
 public:
  std::shared_ptr<const ModelVersion> add(ModelVersion v) {
    std::lock_guard lock(mu_);
    if (!v.parent_id.empty() && !versions_.count(v.parent_id))
      throw Error(Errc::unknown_version, "parent version '" + v.parent_id + "' does not exist");
    if (v.id.empty()) {
      do v.id = "v" + std::to_string(++counter_);
      while (versions_.count(v.id));
    } else if (versions_.count(v.id)) {
      throw Error(Errc::duplicate_id, "version '" + v.id + "' already exists");
    }
    auto p = std::make_shared<const ModelVersion>(std::move(v));
    versions_.emplace(p->id, p);
    order_.push_back(p->id);
    return p;
  }

  std::shared_ptr<const ModelVersion> get(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = versions_.find(id);
    if (it == versions_.end()) throw Error(Errc::unknown_version, "unknown model version '" + id + "'");
    return it->second;
  }

  bool contains(const std::string& id) const {
    std::lock_guard lock(mu_);
    return versions_.count(id) > 0;
  }

  // Insertion order.
  std::vector<std::shared_ptr<const ModelVersion>> list() const {
    std::lock_guard lock(mu_);
    std::vector<std::shared_ptr<const ModelVersion>> out;
    for (const auto& id : order_) out.push_back(versions_.at(id));
    return out;
  }

  // The version and its ancestors, nearest first.
  std::vector<std::string> lineage(const std::string& id) const {
    std::vector<std::string> out;
    for (auto v = get(id);; v = get(v->parent_id)) {
      out.push_back(v->id);
      if (v->parent_id.empty()) break;
    }
    return out;
  }

  std::vector<std::string> children(const std::string& id) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& vid : order_)
      if (versions_.at(vid)->parent_id == id) out.push_back(vid);
    return out;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ModelVersion>> versions_;
  std::vector<std::string> order_;
  std::size_t counter_ = 0;
};

}  // namespace dca::session
