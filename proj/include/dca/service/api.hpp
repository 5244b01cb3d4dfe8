#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dca/service/core.hpp"
#include "dca/service/store.hpp"
#include "dca/session/retrain.hpp"

namespace dca::service {

using nlohmann::json;

struct Request {
  std::string method;
  std::string path;  // may carry a query string
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline int http_status(Errc c) {
  switch (c) {
    case Errc::not_found:
    case Errc::unknown_id:
    case Errc::unknown_version:
    case Errc::unknown_session:
      return 404;
    case Errc::conflict:
    case Errc::duplicate_id:
      return 409;
    case Errc::invalid_evidence:
    case Errc::evidence_inconsistent:
      return 422;
    default:
      return is_input_error(c) ? 400 : 500;
  }
}

inline Response error_response(const Error& e) {
  return {http_status(e.code()),
          body({{"error", {{"code", std::string(e.code_name())}, {"message", e.what()}, {"detail", e.detail()}}}})};
}

namespace detail {

inline std::string url_decode(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

inline std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

struct Call {
  std::map<std::string, std::string> params;  // path parameters
  std::map<std::string, std::string> query;
  json body;  // null when the request had none

  const std::string& param(const std::string& k) const { return params.at(k); }

  std::optional<std::string> q(const std::string& k) const {
    auto it = query.find(k);
    if (it == query.end()) return std::nullopt;
    return it->second;
  }

  const json& field(const std::string& k) const {
    if (!body.is_object() || !body.contains(k)) throw Error(Errc::invalid_argument, "missing field '" + k + "'");
    return body.at(k);
  }

  std::string str(const std::string& k) const {
    const auto& v = field(k);
    if (!v.is_string()) throw Error(Errc::invalid_argument, "field '" + k + "' must be a string");
    return v.get<std::string>();
  }

  std::string str_or(const std::string& k, const std::string& fallback) const {
    if (!body.is_object() || !body.contains(k)) return fallback;
    return str(k);
  }

  std::uint64_t revision() const {
    const auto& v = field("revision");
    if (!v.is_number_unsigned()) throw Error(Errc::invalid_argument, "'revision' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
};

struct TrainingJob {
  std::string id;
  std::string kind;  // "train" or "retrain"
  std::string status = "queued";  // queued, running, succeeded, failed
  std::string parent_version;
  std::string version;
  std::optional<json> error;
  std::vector<double> loglik_trace;
};

inline json job_to_json(const TrainingJob& j) {
  return {{"id", j.id},
          {"kind", j.kind},
          {"status", j.status},
          {"parent_version", j.parent_version.empty() ? json(nullptr) : json(j.parent_version)},
          {"version", j.version.empty() ? json(nullptr) : json(j.version)},
          {"error", j.error ? *j.error : json(nullptr)}};
}

// Transport-independent HTTP API over a Store. Model versions live in an
// in-memory registry mirrored to the store; training runs on background
// threads polled through /api/training-jobs.
class Api {
 public:
  using Handler = std::function<Response(const Call&)>;

  struct Route {
    std::string method;
    std::string pattern;
    std::string summary;
    Handler handler;
  };

  std::function<std::string()> clock = detail::utc_now;

  explicit Api(Store& store) : store_(store) {
    for (auto& v : store_.load_versions()) registry_.add(std::move(v));
    std::size_t n = 0;
    for (const auto& id : store_.session_ids())
      if (id.rfind("session-", 0) == 0) n = std::max(n, static_cast<std::size_t>(std::stoul("0" + id.substr(8))));
    session_counter_ = n;
    install_routes();
  }

  ~Api() { wait_for_jobs(); }

  Api(const Api&) = delete;
  Api& operator=(const Api&) = delete;

  const std::vector<Route>& routes() const { return routes_; }
  const session::VersionRegistry& registry() const { return registry_; }

  void wait_for_jobs() {
    std::vector<std::thread> ts;
    {
      std::lock_guard lock(jobs_mu_);
      ts.swap(threads_);
    }
    for (auto& t : ts) t.join();
  }

  Response handle(const Request& req) {
    try {
      auto qpos = req.path.find('?');
      std::string path = req.path.substr(0, qpos);
      Call call;
      if (qpos != std::string::npos)
        for (const auto& kv : detail::split(req.path.substr(qpos + 1), '&')) {
          if (kv.empty()) continue;
          auto eq = kv.find('=');
          call.query[detail::url_decode(kv.substr(0, eq))] =
              eq == std::string::npos ? "" : detail::url_decode(kv.substr(eq + 1));
        }
      bool path_known = false;
      for (const auto& r : routes_) {
        if (!match(r.pattern, path, call.params)) continue;
        path_known = true;
        if (r.method != req.method) continue;
        if (!req.body.empty()) {
          try {
            call.body = json::parse(req.body);
          } catch (const json::exception& e) {
            throw Error(Errc::parse_error, std::string("request body is not JSON: ") + e.what());
          }
        }
        return r.handler(call);
      }
      if (path_known) return {405, body({{"error", {{"code", "method-not-allowed"}, {"message", req.method + " " + path}, {"detail", ""}}}})};
      throw Error(Errc::not_found, "no route for " + req.method + " " + path);
    } catch (const Error& e) {
      return error_response(e);
    } catch (const json::exception& e) {
      return error_response(Error(Errc::invalid_argument, std::string("malformed request: ") + e.what()));
    } catch (const std::exception& e) {
      return {500, body({{"error", {{"code", "internal"}, {"message", e.what()}, {"detail", ""}}}})};
    }
  }

  Response handle(const std::string& method, const std::string& path, const std::string& request_body = {}) {
    return handle(Request{method, path, request_body});
  }

 private:
  Store& store_;
  session::VersionRegistry registry_;
  std::mutex versions_mu_;
  std::vector<Route> routes_;
  std::mutex jobs_mu_;
  std::map<std::string, TrainingJob> jobs_;
  std::vector<std::thread> threads_;
  std::size_t job_counter_ = 0;
  std::atomic<std::size_t> session_counter_{0};
  std::atomic<std::size_t> record_counter_{0};

  static bool match(const std::string& pattern, const std::string& path, std::map<std::string, std::string>& params) {
    auto ps = detail::split(pattern, '/'), xs = detail::split(path, '/');
    if (ps.size() != xs.size()) return false;
    std::map<std::string, std::string> found;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (!ps[i].empty() && ps[i][0] == ':') {
        if (xs[i].empty()) return false;
        found[ps[i].substr(1)] = detail::url_decode(xs[i]);
      } else if (ps[i] != xs[i]) {
        return false;
      }
    }
    params = std::move(found);
    return true;
  }

  static Response ok(const json& j, int status = 200) { return {status, body(j)}; }

  void on(std::string method, std::string pattern, std::string summary, Handler h) {
    routes_.push_back({std::move(method), std::move(pattern), std::move(summary), std::move(h)});
  }

  json description() const {
    json routes = json::array();
    for (const auto& r : routes_)
      routes.push_back({{"method", r.method},
                        {"path", r.pattern},
                        {"summary", r.summary},
                        {"mutating", r.method != "GET"},
                        {"requires_revision", r.pattern.rfind("/api/sessions/:id/", 0) == 0 && r.method == "POST"}});
    return {{"format", "dca-api"},
            {"version", 1},
            {"content_type", "application/json"},
            {"error_shape", {{"error", {{"code", "string"}, {"message", "string"}, {"detail", "string"}}}}},
            {"status_codes", {{"400", "validation"}, {"404", "missing"}, {"409", "write conflict or duplicate"},
                              {"422", "inconsistent evidence"}}},
            {"routes", routes}};
  }

  // --- jobs ---------------------------------------------------------------

  std::string start_job(std::string kind, std::string parent, std::function<session::ModelVersion()> work) {
    std::lock_guard lock(jobs_mu_);
    std::string id = "job-" + std::to_string(++job_counter_);
    TrainingJob job;
    job.id = id;
    job.kind = std::move(kind);
    job.parent_version = std::move(parent);
    jobs_[id] = job;
    threads_.emplace_back([this, id, work = std::move(work)] {
      set_job(id, [](TrainingJob& j) { j.status = "running"; });
      try {
        auto v = work();
        std::shared_ptr<const session::ModelVersion> added;
        {
          std::lock_guard vlock(versions_mu_);
          added = registry_.add(std::move(v));
          store_.put_version(*added);
        }
        set_job(id, [&](TrainingJob& j) {
          j.status = "succeeded";
          j.version = added->id;
          j.loglik_trace = added->learn.loglik_trace;
        });
      } catch (const Error& e) {
        auto err = json{{"code", std::string(e.code_name())}, {"message", e.what()}};
        set_job(id, [&](TrainingJob& j) {
          j.status = "failed";
          j.error = err;
        });
      } catch (const std::exception& e) {
        auto err = json{{"code", "internal"}, {"message", e.what()}};
        set_job(id, [&](TrainingJob& j) {
          j.status = "failed";
          j.error = err;
        });
      }
    });
    return id;
  }

  void set_job(const std::string& id, const std::function<void(TrainingJob&)>& fn) {
    std::lock_guard lock(jobs_mu_);
    fn(jobs_.at(id));
  }

  TrainingJob job(const std::string& id) {
    std::lock_guard lock(jobs_mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error(Errc::not_found, "unknown training job '" + id + "'");
    return it->second;
  }

  static learn::LearnConfig config_of(const Call& c) {
    return learn::config_from_json(c.body.is_object() && c.body.contains("config") ? c.body.at("config") : json(nullptr));
  }

  static int restarts_of(const Call& c, int fallback) {
    if (!c.body.is_object() || !c.body.contains("restarts")) return fallback;
    const auto& v = c.body.at("restarts");
    if (!v.is_number_integer() || v.get<int>() < 1) throw Error(Errc::invalid_argument, "'restarts' must be a positive integer");
    return v.get<int>();
  }

  // --- sessions -------------------------------------------------------------

  Response session_op(const Call& c, const std::function<json(session::Session&)>& fn) {
    json extra;
    auto s = store_.update_session(c.param("id"), c.revision(), [&](session::Session& s) { extra = fn(s); });
    auto j = session::session_to_json(s);
    if (!extra.is_null()) j["result"] = extra;
    return ok(j);
  }

  std::shared_ptr<const session::ModelVersion> session_version(const std::string& session_id) {
    return registry_.get(store_.get_session(session_id).model_version_id);
  }

  void install_routes() {
    on("GET", "/api/description", "Machine-readable description of this API", [this](const Call&) {
      return ok(description());
    });
    on("GET", "/api/health", "Liveness and store schema", [](const Call&) {
      return ok({{"status", "ok"}, {"schema_version", kStoreSchemaVersion}});
    });

    // Model documents.
    on("POST", "/api/models/validate", "Validate a model document (the body)", [](const Call& c) {
      auto m = model::model_from_json(c.body);
      auto compiled = model::compile(m);
      return ok({{"valid", true},
                 {"problems", m.problems.size()},
                 {"causes", m.causes.size()},
                 {"effects", m.effects.size()},
                 {"warnings", compiled.warnings}});
    });
    on("POST", "/api/models", "Store a model document: {id, model}", [this](const Call& c) {
      auto m = model::model_from_json(c.field("model"));
      auto id = c.str("id");
      store_.put_model(id, m);
      return ok({{"id", id}, {"model", model::model_to_json(m)}}, 201);
    });
    on("GET", "/api/models", "List stored model ids", [this](const Call&) { return ok({{"models", store_.model_ids()}}); });
    on("GET", "/api/models/:id", "Fetch a model document", [this](const Call& c) {
      return ok(model::model_to_json(store_.get_model(c.param("id"))));
    });
    on("POST", "/api/models/:id/compile", "Compile a stored model to its layered network", [this](const Call& c) {
      model::CompileParams p;
      if (c.body.is_object()) p.initial_prior = c.body.value("initial_prior", p.initial_prior);
      auto compiled = model::compile(store_.get_model(c.param("id")), p);
      return ok({{"network", bn::network_to_json(compiled.network)},
                 {"node_map", compiled.node_map},
                 {"warnings", compiled.warnings}});
    });

    // Record sets.
    on("POST", "/api/record-sets",
       "Store training records: {id?, model, citations_csv} or {id?, records_csv}", [this](const Call& c) {
         bn::RecordSet r;
         if (c.body.contains("citations_csv")) {
           auto m = store_.get_model(c.str("model"));
           auto compiled = model::compile(m);
           r = model::records_to_assignments(m, compiled, model::parse_citations_csv(m, c.str("citations_csv")));
         } else {
           r = bn::parse_records_csv(c.str("records_csv"));
         }
         auto id = c.str_or("id", "");
         if (id.empty()) {
           auto existing = store_.record_set_ids();
           do id = "records-" + std::to_string(++record_counter_);
           while (std::find(existing.begin(), existing.end(), id) != existing.end());
         }
         store_.put_records(id, r);
         return ok({{"id", id}, {"rows", r.size()}, {"columns", r.columns}, {"fingerprint", r.fingerprint()}}, 201);
       });
    on("GET", "/api/record-sets", "List stored record sets", [this](const Call&) {
      return ok({{"record_sets", store_.record_set_ids()}});
    });
    on("GET", "/api/record-sets/:id", "Fetch a record set", [this](const Call& c) {
      auto r = store_.get_records(c.param("id"));
      return ok({{"id", c.param("id")}, {"rows", r.size()}, {"fingerprint", r.fingerprint()},
                 {"records_csv", bn::format_records_csv(r)}});
    });

    // Training.
    on("POST", "/api/training-jobs",
       "Train a root version: {model, record_set, config?, restarts?, initial_prior?}; poll the returned job",
       [this](const Call& c) {
         auto m = store_.get_model(c.str("model"));
         auto records = store_.get_records(c.str("record_set"));
         auto cfg = config_of(c);
         int restarts = restarts_of(c, 1);
         model::CompileParams p;
         p.initial_prior = c.body.value("initial_prior", p.initial_prior);
         auto compiled = model::compile(m, p);
         for (const auto& col : records.columns)
           if (!compiled.network.index_of(col) && col != bn::kProvenanceColumn)
             throw Error(Errc::unknown_variable, "record column '" + col + "' is not a network variable");
         auto id = start_job("train", "", [=] { return session::train_version(compiled, records, cfg, restarts); });
         return ok(job_to_json(job(id)), 202);
       });
    on("GET", "/api/training-jobs/:id", "Poll a training job", [this](const Call& c) {
      return ok(job_to_json(job(c.param("id"))));
    });
    on("GET", "/api/training-jobs/:id/trace", "Log-likelihood trace of a finished job", [this](const Call& c) {
      auto j = job(c.param("id"));
      if (j.status != "succeeded") throw Error(Errc::not_found, "job '" + j.id + "' has no trace (status " + j.status + ")");
      return ok({{"job", j.id}, {"version", j.version}, {"loglik_trace", learn::trace_to_json(j.loglik_trace)}});
    });

    // Model versions.
    on("GET", "/api/versions", "List model versions", [this](const Call&) {
      json a = json::array();
      for (const auto& v : registry_.list()) a.push_back(session::version_summary_json(*v));
      return ok({{"versions", a}});
    });
    on("GET", "/api/versions/:id", "Inspect a model version with its trained network", [this](const Call& c) {
      auto v = registry_.get(c.param("id"));
      auto j = session::version_summary_json(*v);
      j["model"] = model::model_to_json(v->model());
      j["network"] = bn::network_to_json(v->network());
      return ok(j);
    });
    on("GET", "/api/versions/:id/export", "Full version document (network, records, learn metadata)",
       [this](const Call& c) { return ok(session::version_to_json(*registry_.get(c.param("id")))); });
    on("GET", "/api/versions/:id/lineage", "Ancestors of a version, nearest first", [this](const Call& c) {
      return ok({{"lineage", registry_.lineage(c.param("id"))}, {"children", registry_.children(c.param("id"))}});
    });
    on("POST", "/api/versions/:id/diagnose", "Ranked cause posteriors: {problem, evidence?}", [this](const Call& c) {
      auto v = registry_.get(c.param("id"));
      auto ev = model::evidence_from_json(c.body.is_object() && c.body.contains("evidence") ? c.body.at("evidence") : json(nullptr));
      return ok(diagnose_json(*v, c.str("problem"), ev));
    });
    on("POST", "/api/versions/:id/retrain",
       "Retrain from completed sessions: {sessions, config?, restarts?}; poll the returned job", [this](const Call& c) {
         auto parent = registry_.get(c.param("id"));
         std::vector<model::CitationRecord> extra;
         for (const auto& sid : c.field("sessions")) {
           auto s = store_.get_session(sid.get<std::string>());
           for (auto& r : session::session_citations(s, parent->model())) extra.push_back(std::move(r));
         }
         auto cfg = config_of(c);
         int restarts = restarts_of(c, session::kDefaultRetrainRestarts);
         auto id = start_job("retrain", parent->id, [=] { return session::retrain(*parent, extra, cfg, restarts); });
         return ok(job_to_json(job(id)), 202);
       });

    // Sessions.
    on("POST", "/api/sessions", "Create a session: {model_version, id?}", [this](const Call& c) {
      auto v = registry_.get(c.str("model_version"));
      auto id = c.str_or("id", "");
      if (id.empty()) {
        auto existing = store_.session_ids();
        do id = "session-" + std::to_string(++session_counter_);
        while (std::find(existing.begin(), existing.end(), id) != existing.end());
      }
      auto s = session::create_session(*v, id, clock());
      store_.create_session(s);
      return ok(session::session_to_json(s), 201);
    });
    on("GET", "/api/sessions", "List session ids", [this](const Call&) { return ok({{"sessions", store_.session_ids()}}); });
    on("GET", "/api/sessions/:id", "Fetch a session", [this](const Call& c) {
      return ok(session::session_to_json(store_.get_session(c.param("id"))));
    });
    on("POST", "/api/sessions/:id/advance", "Move to a step: {revision, step}", [this](const Call& c) {
      auto to = session::parse_step(c.str("step"));
      return session_op(c, [&](session::Session& s) {
        session::advance(s, to);
        return json();
      });
    });
    on("POST", "/api/sessions/:id/sample",
       "Select the sample from stored defects: {revision, iterations} or {revision, defects}", [this](const Call& c) {
         auto all = store_.defects().defects;
         std::vector<analytics::DefectRecord> pick;
         if (c.body.contains("iterations")) {
           for (const auto& it : c.field("iterations")) {
             auto d = iteration_defects(all, it.get<std::string>());
             pick.insert(pick.end(), d.begin(), d.end());
           }
         } else {
           std::map<std::string, const analytics::DefectRecord*> by_id;
           for (const auto& d : all) by_id[d.id] = &d;
           for (const auto& id : c.field("defects")) {
             auto it = by_id.find(id.get<std::string>());
             if (it == by_id.end()) throw Error(Errc::unknown_defect, "unknown defect '" + id.get<std::string>() + "'");
             pick.push_back(*it->second);
           }
         }
         auto stats = store_.stats();
         return session_op(c, [&](session::Session& s) {
           session::set_sample(s, pick, stats);
           return json();
         });
       });
    on("POST", "/api/sessions/:id/classify", "Reclassify a sampled defect: {revision, defect, nature, detail_tag?}",
       [this](const Call& c) {
         auto nature = analytics::parse_nature(c.str("nature"));
         return session_op(c, [&](session::Session& s) {
           session::classify_defect(s, c.str("defect"), nature, c.str_or("detail_tag", ""));
           return json();
         });
       });
    on("POST", "/api/sessions/:id/systematic-errors", "Group defects: {revision, error}", [this](const Call& c) {
      auto e = analytics::systematic_error_from_json(c.field("error"));
      return session_op(c, [&](session::Session& s) { return json{{"warnings", session::add_systematic_error(s, e)}}; });
    });
    on("POST", "/api/sessions/:id/problem-links", "Link an error to a model problem: {revision, error, problem}",
       [this](const Call& c) {
         auto v = session_version(c.param("id"));
         return session_op(c, [&](session::Session& s) {
           session::link_problem(s, v->model(), c.str("error"), c.str("problem"));
           return json();
         });
       });
    on("POST", "/api/sessions/:id/diagnose", "Run and record a diagnosis: {revision, problem, evidence?}",
       [this](const Call& c) {
         auto v = session_version(c.param("id"));
         auto ev = model::evidence_from_json(c.body.contains("evidence") ? c.body.at("evidence") : json(nullptr));
         auto now = clock();
         return session_op(c, [&](session::Session& s) {
           return session::query_to_json(session::run_diagnosis(s, *v, c.str("problem"), ev, now));
         });
       });
    on("POST", "/api/sessions/:id/causes",
       "Record a cause: {revision, systematic_error, cause | free_text, category?, rationale?}", [this](const Call& c) {
         auto v = session_version(c.param("id"));
         session::DeterminedCause dc{"", c.str("systematic_error"), c.str_or("cause", ""), c.str_or("free_text", ""),
                                     c.str_or("category", ""), c.str_or("rationale", "")};
         return session_op(c, [&](session::Session& s) { return json{{"id", session::record_cause(s, v->model(), dc)}}; });
       });
    on("POST", "/api/sessions/:id/causes/:cause/promote", "Map a free-text cause to a model cause: {revision, cause}",
       [this](const Call& c) {
         auto v = session_version(c.param("id"));
         return session_op(c, [&](session::Session& s) {
           session::promote_cause(s, v->model(), c.param("cause"), c.str("cause"));
           return json();
         });
       });
    on("POST", "/api/sessions/:id/actions", "Propose an action: {revision, causes, description, owner?}",
       [this](const Call& c) {
         session::ActionProposal a;
         a.linked_causes = c.field("causes").get<std::vector<std::string>>();
         a.description = c.str("description");
         a.owner = c.str_or("owner", "");
         return session_op(c, [&](session::Session& s) { return json{{"id", session::propose_action(s, a)}}; });
       });
    on("POST", "/api/sessions/:id/actions/:action/status", "Advance an action's status: {revision, status}",
       [this](const Call& c) {
         auto to = session::parse_status(c.str("status"));
         return session_op(c, [&](session::Session& s) {
           session::set_action_status(s, c.param("action"), to);
           return json();
         });
       });
    on("POST", "/api/sessions/:id/report", "Generate and store the report: {revision}", [this](const Call& c) {
      auto v = session_version(c.param("id"));
      return session_op(c, [&](session::Session& s) {
        auto r = session::generate_report(s, v->model());
        return json{{"text", r.text}};
      });
    });
    on("GET", "/api/sessions/:id/report", "The stored report document", [this](const Call& c) {
      auto s = store_.get_session(c.param("id"));
      if (!s.report) throw Error(Errc::not_found, "session '" + s.id + "' has no report yet");
      return ok(*s.report);
    });
    on("GET", "/api/sessions/:id/report.txt", "The stored report as plain text", [this](const Call& c) {
      auto s = store_.get_session(c.param("id"));
      if (!s.report) throw Error(Errc::not_found, "session '" + s.id + "' has no report yet");
      return Response{200, session::detail::render_report(*s.report), "text/plain; charset=utf-8"};
    });

    // Defects and iteration statistics.
    on("POST", "/api/defects", "Bulk upload defects: {revision, csv}", [this](const Call& c) {
      auto incoming = analytics::parse_defects_csv(c.str("csv"));
      auto r = store_.update_defects(c.revision(), [&](std::vector<analytics::DefectRecord>& all) {
        all.insert(all.end(), incoming.begin(), incoming.end());
      });
      return ok({{"revision", r.revision}, {"added", incoming.size()}, {"total", r.defects.size()}}, 201);
    });
    on("GET", "/api/defects", "List defects (?iteration=)", [this](const Call& c) {
      auto set = store_.defects();
      json a = json::array();
      auto it = c.q("iteration");
      for (const auto& d : set.defects)
        if (!it || d.iteration_id == *it) a.push_back(analytics::defect_to_json(d));
      return ok({{"revision", set.revision}, {"defects", a}});
    });
    on("PATCH", "/api/defects/:id", "Tag or reclassify a defect: {revision, detail_tag?, nature?}", [this](const Call& c) {
      json out;
      auto r = store_.update_defects(c.revision(), [&](std::vector<analytics::DefectRecord>& all) {
        for (auto& d : all)
          if (d.id == c.param("id")) {
            if (c.body.contains("detail_tag")) d.detail_tag = c.str("detail_tag");
            if (c.body.contains("nature")) d.nature = analytics::parse_nature(c.str("nature"));
            out = analytics::defect_to_json(d);
            return;
          }
        throw Error(Errc::not_found, "unknown defect '" + c.param("id") + "'");
      });
      return ok({{"revision", r.revision}, {"defect", out}});
    });
    on("PUT", "/api/stats", "Replace iteration statistics: {units_csv, hours_csv}", [this](const Call& c) {
      auto merged = store_.merge_stats(analytics::parse_stats_csv(c.str("units_csv"), c.str("hours_csv")));
      json a = json::array();
      for (const auto& s : merged) a.push_back(analytics::stats_to_json(s));
      return ok({{"iterations", a}});
    });
    on("GET", "/api/stats", "Iteration statistics", [this](const Call&) {
      json a = json::array();
      for (const auto& s : store_.stats()) a.push_back(analytics::stats_to_json(s));
      return ok({{"iterations", a}});
    });

    // Analytics.
    auto iteration_of = [](const Call& c) {
      auto it = c.q("iteration");
      if (!it || it->empty()) throw Error(Errc::invalid_argument, "query parameter 'iteration' is required");
      return *it;
    };
    on("GET", "/api/analytics/pareto", "Pareto chart by defect nature (?iteration=)", [this, iteration_of](const Call& c) {
      return ok(pareto_json(store_.defects().defects, iteration_of(c)));
    });
    on("GET", "/api/analytics/u-chart", "U-chart (?iteration=&basis=function_points|hours)",
       [this, iteration_of](const Call& c) {
         auto basis = analytics::parse_basis(c.q("basis").value_or("function_points"));
         return ok(u_chart_json(store_.stats(), store_.defects().defects, iteration_of(c), basis));
       });
    on("GET", "/api/analytics/density", "Defects per function point (?iteration= optional)", [this](const Call& c) {
      auto m = metrics_json(store_.stats(), store_.defects().defects, c.q("iteration"));
      for (auto& r : m["iterations"]) r.erase("efficiency");
      return ok(m);
    });
    on("GET", "/api/analytics/efficiency", "Defects per inspection hour (?iteration= optional)", [this](const Call& c) {
      auto m = metrics_json(store_.stats(), store_.defects().defects, c.q("iteration"));
      for (auto& r : m["iterations"]) r.erase("density");
      return ok(m);
    });
    on("GET", "/api/analytics/histogram", "Detail-tag histogram (?iteration=&nature=&min=)",
       [this, iteration_of](const Call& c) {
         std::optional<analytics::Nature> nature;
         if (auto n = c.q("nature"); n && !n->empty()) nature = analytics::parse_nature(*n);
         std::size_t min = 0;
         if (auto m = c.q("min"); m && !m->empty()) {
           try {
             min = std::stoul(*m);
           } catch (const std::exception&) {
             throw Error(Errc::invalid_argument, "'min' must be a nonnegative integer");
           }
         }
         return ok(histogram_json(store_.defects().defects, iteration_of(c), nature, min));
       });
  }
};

}  // namespace dca::service
