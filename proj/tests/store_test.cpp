#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "dca/service/store.hpp"
#include "dca/util/random.hpp"
#include "sample_fixture.hpp"
#include "temp_dir.hpp"

using namespace dca;
using namespace dca::service;
using dca::testing::TempDir;

namespace {

struct Crash {};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::io_error;
}

session::Session sampled_session(const std::string& id) {
  auto s = session::create_session(dca::testing::trained_sample_version(), id, "t");
  session::set_sample(s, analytics::defects_of(dca::testing::case_defects(), "EL1"), dca::testing::case_stats());
  return s;
}

std::size_t tmp_files(const std::filesystem::path& root) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) n += e.path().extension() == ".tmp";
  return n;
}

}  // namespace

TEST(Store, ManifestAndSchemaCheck) {
  TempDir dir;
  { Store s(dir.path()); }
  auto manifest = nlohmann::json::parse(util::read_file((dir.path() / "manifest.json").string()));
  EXPECT_EQ(manifest.at("schema_version"), kStoreSchemaVersion);
  { Store again(dir.path()); }

  std::ofstream(dir.path() / "manifest.json") << R"({"format": "dca-store", "schema_version": 99})";
  EXPECT_EQ(code_of([&] { Store s(dir.path()); }), Errc::schema_mismatch);
  std::ofstream(dir.path() / "manifest.json") << "{not json";
  EXPECT_EQ(code_of([&] { Store s(dir.path()); }), Errc::schema_mismatch);
}

TEST(Store, DocumentsRoundTrip) {
  TempDir dir;
  Store st(dir.path());
  auto m = dca::testing::sample_model();
  st.put_model("sample", m);
  EXPECT_EQ(st.get_model("sample"), m);
  EXPECT_EQ(code_of([&] { st.put_model("sample", m); }), Errc::duplicate_id);
  EXPECT_EQ(code_of([&] { st.get_model("missing"); }), Errc::not_found);
  EXPECT_EQ(code_of([&] { st.put_model("../escape", m); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { st.get_model("../manifest"); }), Errc::not_found);

  const auto& v = dca::testing::trained_sample_version();
  st.put_records("r1", v.records);
  EXPECT_EQ(st.get_records("r1").fingerprint(), v.records.fingerprint());

  st.put_version(v);
  auto child = v;
  child.id = "v2";
  child.parent_id = "v1";
  st.put_version(child);
  auto orphan = v;
  orphan.id = "v3";
  orphan.parent_id = "v9";
  EXPECT_EQ(code_of([&] { st.put_version(orphan); }), Errc::unknown_version);
  auto loaded = st.load_versions();
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].id, "v1");
  EXPECT_EQ(bn::serialize_network(loaded[1].network()), bn::serialize_network(v.network()));

  auto s = sampled_session("s1");
  st.create_session(s);
  EXPECT_EQ(session::session_to_json(st.get_session("s1")), session::session_to_json(s));
  EXPECT_EQ(code_of([&] { st.create_session(s); }), Errc::duplicate_id);
  auto bad = s;
  bad.id = "s2";
  bad.model_version_id = "v404";
  EXPECT_EQ(code_of([&] { st.create_session(bad); }), Errc::unknown_version);
  EXPECT_EQ(code_of([&] { st.get_session("nope"); }), Errc::unknown_session);
}

TEST(Store, RevisionConflictsAndFailedUpdates) {
  TempDir dir;
  Store st(dir.path());
  st.put_version(dca::testing::trained_sample_version());
  st.create_session(sampled_session("s1"));
  const auto base = st.get_session("s1").revision;
  auto s = st.update_session("s1", base, [](session::Session& x) { session::advance(x, session::Step::classify); });
  EXPECT_EQ(s.revision, base + 1);
  EXPECT_EQ(code_of([&] {
              st.update_session("s1", base, [](session::Session& x) { session::advance(x, session::Step::select_sample); });
            }),
            Errc::conflict);
  auto before = session::session_to_json(st.get_session("s1")).dump();
  EXPECT_EQ(code_of([&] {
              st.update_session("s1", base + 1,
                                [](session::Session& x) { session::advance(x, session::Step::document); });
            }),
            Errc::step_skip);
  EXPECT_EQ(session::session_to_json(st.get_session("s1")).dump(), before);

  auto d = st.update_defects(0, [](auto& all) { all = dca::testing::case_defects(); });
  EXPECT_EQ(d.revision, 1u);
  EXPECT_EQ(st.defects().defects.size(), 464u);
  EXPECT_EQ(code_of([&] { st.update_defects(0, [](auto&) {}); }), Errc::conflict);
  EXPECT_EQ(code_of([&] { st.update_defects(1, [](auto& all) { all.push_back(all.front()); }); }), Errc::duplicate_id);
  EXPECT_EQ(st.defects().revision, 1u);
}

TEST(Store, ConcurrentWritersSameRevision) {
  TempDir dir;
  Store st(dir.path());
  st.put_version(dca::testing::trained_sample_version());
  for (int round = 0; round < 20; ++round) {
    auto id = "s" + std::to_string(round);
    st.create_session(sampled_session(id));
    const auto base = st.get_session(id).revision;
    std::atomic<int> ok{0}, conflicts{0};
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
      ts.emplace_back([&] {
        try {
          st.update_session(id, base, [](session::Session& x) { session::advance(x, session::Step::classify); });
          ++ok;
        } catch (const Error& e) {
          if (e.code() == Errc::conflict) ++conflicts;
        }
      });
    for (auto& t : ts) t.join();
    EXPECT_EQ(ok, 1);
    EXPECT_EQ(conflicts, 3);
    EXPECT_EQ(st.get_session(id).revision, base + 1);
  }
}

// A crash between writing the temporary file and renaming it must leave
// the previous document readable and intact after reopening.
TEST(Store, CrashBetweenWriteAndRename) {
  TempDir dir;
  util::Rng rng(7);
  nlohmann::json committed_session, committed_defects;
  {
    Store st(dir.path());
    st.put_version(dca::testing::trained_sample_version());
    st.create_session(sampled_session("s1"));
    committed_session = session::session_to_json(st.get_session("s1"));
    committed_defects = nlohmann::json::array();
  }
  auto all = dca::testing::case_defects();
  int crashes = 0;
  for (int op = 0; op < 60; ++op) {
    Store st(dir.path());
    EXPECT_EQ(tmp_files(dir.path()), 0u);
    EXPECT_EQ(session::session_to_json(st.get_session("s1")), committed_session);
    nlohmann::json got = nlohmann::json::array();
    for (const auto& d : st.defects().defects) got.push_back(analytics::defect_to_json(d));
    EXPECT_EQ(got, committed_defects);

    const bool crash = rng.bernoulli(0.5);
    if (crash)
      st.before_rename = [](const std::filesystem::path& tmp) {
        // Half-written garbage at the temporary path, then the process dies.
        std::ofstream(tmp, std::ios::app) << "{\"truncated";
        throw Crash{};
      };
    try {
      if (op % 2 == 0) {
        auto cur = st.get_session("s1");
        st.update_session("s1", cur.revision, [&](session::Session& s) {
          session::advance(s, s.step == session::Step::select_sample ? session::Step::classify : session::Step::select_sample);
        });
        committed_session = session::session_to_json(st.get_session("s1"));
      } else {
        auto set = st.defects();
        auto next = all[static_cast<std::size_t>(op)];
        st.update_defects(set.revision, [&](auto& ds) { ds.push_back(next); });
        committed_defects.push_back(analytics::defect_to_json(next));
      }
      EXPECT_FALSE(crash);
    } catch (const Crash&) {
      ++crashes;
      EXPECT_GT(tmp_files(dir.path()), 0u);
    }
  }
  EXPECT_GT(crashes, 10);
}
