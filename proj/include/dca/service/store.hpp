#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "dca/analytics/charts.hpp"
#include "dca/session/session.hpp"
#include "dca/util/csv.hpp"

namespace dca::service {

inline constexpr int kStoreSchemaVersion = 1;
inline constexpr const char* kStoreFormat = "dca-store";

// Directory-backed document store.
//
//   <root>/manifest.json        {"format": "dca-store", "schema_version": 1}
//   <root>/models/<id>.json     model documents (write-once)
//   <root>/records/<id>.csv     record sets (write-once)
//   <root>/versions/<id>.json   trained model versions (write-once)
//   <root>/sessions/<id>.json   sessions, guarded by their revision
//   <root>/defects.json         defect records with a revision counter
//   <root>/stats.json           iteration statistics
//
// Every file is written to a temporary sibling, flushed, then renamed over
// the target, so a reader sees either the old or the new document.
class Store {
 public:
  // Called with the temporary path after it is written and before the
  // rename. Tests throw from it to simulate a crash.
  std::function<void(const std::filesystem::path&)> before_rename;

  explicit Store(std::filesystem::path root) : root_(std::move(root)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create store at '" + root_.string() + "': " + ec.message());
    const auto manifest = root_ / "manifest.json";
    if (fs::exists(manifest)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(util::read_file(manifest.string()));
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::schema_mismatch, std::string("unreadable store manifest: ") + e.what());
      }
      if (j.value("format", "") != kStoreFormat || j.value("schema_version", -1) != kStoreSchemaVersion)
        throw Error(Errc::schema_mismatch, "store at '" + root_.string() + "' has schema " + j.dump() +
                                               ", expected version " + std::to_string(kStoreSchemaVersion));
    } else {
      write_file(manifest, nlohmann::json{{"format", kStoreFormat}, {"schema_version", kStoreSchemaVersion}}.dump(2));
    }
    for (const char* d : {"models", "records", "versions", "sessions"}) fs::create_directories(root_ / d);
    // Leftovers from an interrupted write.
    for (const auto& e : fs::recursive_directory_iterator(root_))
      if (e.is_regular_file() && e.path().extension() == ".tmp") fs::remove(e.path(), ec);
  }

  const std::filesystem::path& root() const { return root_; }

  // --- model documents -----------------------------------------------------

  void put_model(const std::string& id, const model::CauseEffectModel& m) {
    std::lock_guard lock(mu_);
    check_id(id);
    auto p = root_ / "models" / (id + ".json");
    if (std::filesystem::exists(p)) throw Error(Errc::duplicate_id, "model '" + id + "' already exists");
    write_file(p, model::serialize_model(m));
  }

  model::CauseEffectModel get_model(const std::string& id) const {
    auto p = root_ / "models" / (id + ".json");
    if (!valid_id(id) || !std::filesystem::exists(p)) throw Error(Errc::not_found, "unknown model '" + id + "'");
    return model::parse_model(util::read_file(p.string()));
  }

  std::vector<std::string> model_ids() const { return ids_in("models", ".json"); }

  // --- record sets ----------------------------------------------------------

  void put_records(const std::string& id, const bn::RecordSet& r) {
    std::lock_guard lock(mu_);
    check_id(id);
    auto p = root_ / "records" / (id + ".csv");
    if (std::filesystem::exists(p)) throw Error(Errc::duplicate_id, "record set '" + id + "' already exists");
    write_file(p, bn::format_records_csv(r));
  }

  bn::RecordSet get_records(const std::string& id) const {
    auto p = root_ / "records" / (id + ".csv");
    if (!valid_id(id) || !std::filesystem::exists(p)) throw Error(Errc::not_found, "unknown record set '" + id + "'");
    return bn::parse_records_csv(util::read_file(p.string()));
  }

  std::vector<std::string> record_set_ids() const { return ids_in("records", ".csv"); }

  // --- model versions -------------------------------------------------------

  void put_version(const session::ModelVersion& v) {
    std::lock_guard lock(mu_);
    check_id(v.id);
    if (!v.parent_id.empty() && !std::filesystem::exists(root_ / "versions" / (v.parent_id + ".json")))
      throw Error(Errc::unknown_version, "parent version '" + v.parent_id + "' is not stored");
    auto p = root_ / "versions" / (v.id + ".json");
    if (std::filesystem::exists(p)) throw Error(Errc::duplicate_id, "version '" + v.id + "' already exists");
    write_file(p, session::version_to_json(v).dump());
  }

  // Parents before children: ids sort by their numeric suffix.
  std::vector<session::ModelVersion> load_versions() const {
    auto ids = ids_in("versions", ".json");
    std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
      return std::make_pair(a.size(), a) < std::make_pair(b.size(), b);
    });
    std::vector<session::ModelVersion> out;
    for (const auto& id : ids)
      out.push_back(session::version_from_json(
          nlohmann::json::parse(util::read_file((root_ / "versions" / (id + ".json")).string()))));
    return out;
  }

  // --- sessions -------------------------------------------------------------

  void create_session(const session::Session& s) {
    check_id(s.id);
    std::lock_guard lock(resource_mutex("session:" + s.id));
    auto p = session_path(s.id);
    if (std::filesystem::exists(p)) throw Error(Errc::duplicate_id, "session '" + s.id + "' already exists");
    if (!std::filesystem::exists(root_ / "versions" / (s.model_version_id + ".json")))
      throw Error(Errc::unknown_version, "session references unknown version '" + s.model_version_id + "'");
    write_file(p, session::session_to_json(s).dump());
  }

  session::Session get_session(const std::string& id) const {
    auto p = session_path(id);
    if (!valid_id(id) || !std::filesystem::exists(p)) throw Error(Errc::unknown_session, "unknown session '" + id + "'");
    return session::session_from_json(nlohmann::json::parse(util::read_file(p.string())));
  }

  std::vector<std::string> session_ids() const { return ids_in("sessions", ".json"); }

  // Applies `fn` to the stored session if its revision equals `expected`.
  // One writer per session at a time; a stale revision is a conflict and a
  // throwing `fn` leaves the stored copy untouched.
  session::Session update_session(const std::string& id, std::uint64_t expected,
                                  const std::function<void(session::Session&)>& fn) {
    std::lock_guard lock(resource_mutex("session:" + id));
    auto s = get_session(id);
    if (s.revision != expected)
      throw Error(Errc::conflict, "session '" + id + "' is at revision " + std::to_string(s.revision) +
                                      ", request was based on " + std::to_string(expected));
    fn(s);
    if (s.revision != expected) write_file(session_path(id), session::session_to_json(s).dump());
    return s;
  }

  // --- defects and iteration statistics --------------------------------------

  struct DefectSet {
    std::uint64_t revision = 0;
    std::vector<analytics::DefectRecord> defects;
  };

  DefectSet defects() const {
    auto p = root_ / "defects.json";
    if (!std::filesystem::exists(p)) return {};
    auto j = nlohmann::json::parse(util::read_file(p.string()));
    DefectSet out;
    out.revision = j.at("revision").get<std::uint64_t>();
    for (const auto& d : j.at("defects")) out.defects.push_back(analytics::defect_from_json(d));
    return out;
  }

  // Compare-and-swap on the defect collection.
  DefectSet update_defects(std::uint64_t expected, const std::function<void(std::vector<analytics::DefectRecord>&)>& fn) {
    std::lock_guard lock(resource_mutex("defects"));
    auto cur = defects();
    if (cur.revision != expected)
      throw Error(Errc::conflict, "defects are at revision " + std::to_string(cur.revision) +
                                      ", request was based on " + std::to_string(expected));
    fn(cur.defects);
    std::map<std::string, int> seen;
    for (const auto& d : cur.defects)
      if (seen[d.id]++) throw Error(Errc::duplicate_id, "defect id '" + d.id + "' appears twice");
    ++cur.revision;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : cur.defects) arr.push_back(analytics::defect_to_json(d));
    write_file(root_ / "defects.json", nlohmann::json{{"revision", cur.revision}, {"defects", arr}}.dump());
    return cur;
  }

  std::vector<analytics::IterationStats> stats() const {
    auto p = root_ / "stats.json";
    if (!std::filesystem::exists(p)) return {};
    std::vector<analytics::IterationStats> out;
    auto j = nlohmann::json::parse(util::read_file(p.string()));
    for (const auto& s : j.at("iterations")) out.push_back(analytics::stats_from_json(s));
    return out;
  }

  // Replaces the statistics of every iteration present in `incoming`.
  std::vector<analytics::IterationStats> merge_stats(const std::vector<analytics::IterationStats>& incoming) {
    std::lock_guard lock(resource_mutex("stats"));
    std::map<std::string, analytics::IterationStats> by_id;
    for (auto& s : stats()) by_id[s.iteration_id] = s;
    for (const auto& s : incoming) {
      analytics::check_stats(s);
      by_id[s.iteration_id] = s;
    }
    std::vector<analytics::IterationStats> out;
    nlohmann::json arr = nlohmann::json::array();
    for (auto& [id, s] : by_id) {
      arr.push_back(analytics::stats_to_json(s));
      out.push_back(s);
    }
    write_file(root_ / "stats.json", nlohmann::json{{"iterations", arr}}.dump());
    return out;
  }

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;

  static bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id[0] == '.') return false;
    return std::all_of(id.begin(), id.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'; });
  }

  static void check_id(const std::string& id) {
    if (!valid_id(id)) throw Error(Errc::invalid_argument, "'" + id + "' is not a valid identifier");
  }

  std::filesystem::path session_path(const std::string& id) const { return root_ / "sessions" / (id + ".json"); }

  std::mutex& resource_mutex(const std::string& key) {
    std::lock_guard lock(mu_);
    auto& m = locks_[key];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  std::vector<std::string> ids_in(const char* dir, const char* ext) const {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(root_ / dir))
      if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  void write_file(const std::filesystem::path& target, const std::string& content) {
    auto tmp = target;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw Error(Errc::io_error, "cannot write '" + tmp.string() + "'");
    std::size_t off = 0;
    while (off < content.size()) {
      auto n = ::write(fd, content.data() + off, content.size() - off);
      if (n <= 0) {
        ::close(fd);
        throw Error(Errc::io_error, "short write to '" + tmp.string() + "'");
      }
      off += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
    if (before_rename) before_rename(tmp);
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw Error(Errc::io_error, "cannot replace '" + target.string() + "': " + ec.message());
  }
};

}  // namespace dca::service
