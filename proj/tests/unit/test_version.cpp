#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sysgraph/frontend.hpp"
#include "sysgraph/version.hpp"

using namespace sysgraph;
namespace fs = std::filesystem;

namespace {

SystemGraph fixture(const std::string& name) {
  auto r = load_model(std::string(SYSGRAPH_FIXTURES) + "/" + name);
  REQUIRE(r.ok());
  return r.value->components.front();
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("sysgraph-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::size_t count_records(const fs::path& root) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(root / "objects")) n += e.path().extension() == ".json";
  return n;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  SystemGraph g = fixture("txclient.sg");
  CHECK(graph_digest(g) == sha256_hex(canonical_text(g)));
}

TEST_CASE("archive is content addressed and idempotent") {
  TempDir tmp;
  VersionStore store(tmp.path / ".sgv");
  SystemGraph g = fixture("txclient.sg");
  VersionRecord a = store.archive(g, {.timestamp = "2026-01-01T00:00:00Z"});
  CHECK(a.id == graph_digest(g));
  CHECK(a.parents.empty());
  CHECK(a.kind == RecordKind::origin);

  // Whitespace and comments do not change the identity.
  auto reparsed = parse_source({"x.sg", print_graph(g)});
  REQUIRE(reparsed.ok());
  VersionRecord b = store.archive(*reparsed.value, {.labels = {{"G !Notified", false}}});
  CHECK(b.id == a.id);
  CHECK(b.timestamp == a.timestamp);
  CHECK(b.labels.size() == 1);
  CHECK(count_records(store.root()) == 1);
  // Labels survive a fresh store handle, and repeated labels are not duplicated.
  store.archive(g, {.labels = {{"G !Notified", false}}});
  CHECK(VersionStore(tmp.path / ".sgv").get(a.id)->labels.size() == 1);
  CHECK(store.graph(a.id) == *reparsed.value);
}

TEST_CASE("edits create new records linked to their parent") {
  TempDir tmp;
  VersionStore store(tmp.path / ".sgv");
  SystemGraph v1 = fixture("txclient.sg");
  SystemGraph v2 = fixture("txclient_noaccel.sg");
  v2.name = v1.name;
  VersionRecord r1 = store.archive(v1, {.labels = {{"F Notified", false}}});
  VersionRecord r2 = store.archive(v2, {.kind = RecordKind::refinement,
                                        .labels = {{"F Notified", false}, {"G (PaidGas -> F Notified)", false}},
                                        .refinement = RefinementInfo{"simulation", true}});
  CHECK(r2.id != r1.id);
  CHECK(r2.parents == std::vector<std::string>{r1.id});
  CHECK(store.head("txclient") == r2.id);
  auto log = store.log("txclient");
  REQUIRE(log.size() == 2);
  CHECK(log[0].id == r2.id);
  CHECK(log[1].id == r1.id);

  CHECK(store.with_property("F Notified").size() == 2);
  CHECK(store.with_property("G (PaidGas -> F Notified)").size() == 1);
  CHECK(store.with_property("G true").empty());

  CHECK(store.resolve(r2.id.substr(0, 12)) == r2.id);
  CHECK_FALSE(store.resolve("zz").has_value());
  CHECK(store.verify().empty());

  // Round trip of the record format.
  auto back = read_record_json(render_record_json(*store.get(r2.id)));
  CHECK(back == *store.get(r2.id));
}

TEST_CASE("archive errors") {
  TempDir tmp;
  VersionStore store(tmp.path / ".sgv");
  SystemGraph g = fixture("chain.sg");
  try {
    store.archive(g, {.parents = {std::string(64, 'a')}});
    FAIL("expected dangling-parent");
  } catch (const ModelError& e) {
    CHECK(e.code() == "dangling-parent");
  }
  try {
    store.archive(g, {.kind = RecordKind::refinement});
    FAIL("expected refinement");
  } catch (const ModelError& e) {
    CHECK(e.code() == "refinement");
  }
  CHECK_THROWS_AS(record_kind_from_string("merge"), ModelError);
  CHECK(record_kind_from_string(to_string(RecordKind::vertical_increment)) == RecordKind::vertical_increment);
}

TEST_CASE("dependency drives the next move") {
  TempDir tmp;
  VersionStore store(tmp.path / ".sgv");
  SystemGraph chain = fixture("chain.sg");
  SystemGraph tx = fixture("txclient.sg");
  chain.refinable = false;
  tx.refinable = false;
  VersionRecord c = store.archive(chain, {});
  CHECK(store.next_move(chain) == NextMove::deliver);
  store.archive(tx, {.kind = RecordKind::horizontal_increment, .parents = {c.id}});
  CHECK(store.is_dependent("chain"));
  CHECK_FALSE(store.is_dependent("txclient"));
  CHECK(store.next_move(chain) == NextMove::integrate);
  CHECK(store.next_move(tx) == NextMove::deliver);
  tx.refinable = true;
  CHECK(store.next_move(tx) == NextMove::iterate);
}

TEST_CASE("verify reports corruption") {
  TempDir tmp;
  VersionStore store(tmp.path / ".sgv");
  VersionRecord r = store.archive(fixture("counter.sg"), {});
  {
    std::ofstream out(store.root() / "objects" / (r.id + ".sg"), std::ios::app);
    out << "\n// tampered\nsystem {";
  }
  auto problems = store.verify();
  for (const auto& p : problems) MESSAGE(p);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].rfind(r.id, 0) == 0);
  CHECK_THROWS_AS(store.get(r.id), ModelError);
}
