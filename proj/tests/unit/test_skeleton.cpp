#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "support/random_models.hpp"
#include "sysgraph/elaboration.hpp"
#include "sysgraph/equivalence.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/skeleton.hpp"

using namespace sysgraph;

namespace {

std::string fixture_path(const std::string& name) { return std::string(SYSGRAPH_FIXTURES) + "/" + name; }

SystemGraph load_graph_fixture(const std::string& name) {
  auto r = load_model(fixture_path(name));
  REQUIRE(r.ok());
  return r.value->components.front();
}

// Named actions counted straight from the fixture text.
std::set<std::string> named_actions_in_source(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::regex on(R"(\bon\s+([A-Za-z_][A-Za-z0-9_]*)\s*;)");
  std::set<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), on); it != std::sregex_iterator(); ++it)
    out.insert((*it)[1]);
  return out;
}

std::size_t count_in_source(const std::string& name, const std::string& pattern) {
  std::ifstream in(fixture_path(name));
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::regex re(pattern);
  return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
}

SkeletonOptions forced() {
  SkeletonOptions o;
  o.force = true;
  return o;
}

}  // namespace

TEST_CASE("skeleton: txclient bundle shape") {
  SystemGraph g = load_graph_fixture("txclient.sg");
  SkeletonOptions o;
  o.evidence = verify_properties(g, {"F PaidGas"});
  REQUIRE(o.evidence.size() == 1);
  REQUIRE(o.evidence[0].satisfied);
  SkeletonBundle b = generate_skeleton(g, o);

  CHECK(b.variables.size() == 3);
  CHECK(b.control_flow.size() == count_in_source("txclient.sg", R"(\btrans\s)"));
  CHECK(b.control_flow.size() == 7);
  std::set<std::string> hooks;
  for (const auto& h : b.effect_hooks) hooks.insert(h.action);
  CHECK(hooks == named_actions_in_source("txclient.sg"));
  CHECK(b.effect_hooks.size() == 6);
  REQUIRE(b.divergence_interfaces.size() == 1);
  CHECK(b.divergence_interfaces[0].declarator == "pending");
  CHECK(b.divergence_interfaces[0].name == "choose_pending_cancel_accelerate");
  REQUIRE(b.channels.size() == 1);
  CHECK(b.channels[0].operations == std::vector<std::string>{"receive"});
  CHECK(b.entry_declarator == "init");
}

TEST_CASE("skeleton: stage gate") {
  SystemGraph g = load_graph_fixture("txclient.sg");
  try {
    generate_skeleton(g);
    FAIL("expected unverified");
  } catch (const ModelError& e) {
    CHECK(e.code() == "unverified");
  }
  SkeletonOptions failing;
  failing.evidence = verify_properties(g, {"G (PaidGas -> F Notified)"});
  CHECK_FALSE(failing.evidence[0].satisfied);
  CHECK_THROWS_AS(generate_skeleton(g, failing), ModelError);
  failing.force = true;
  SkeletonBundle b = generate_skeleton(g, failing);
  CHECK(b.forced);
  CHECK(render_bundle_json(b).find("\"forced\": true") != std::string::npos);
}

TEST_CASE("skeleton: no named actions gives no hooks") {
  auto r = parse_source({"t.sg", R"(system s {
    vars { x: int[0..2]; }
    chan c: int[0..2] cap 1 = [1];
    state a {} init;
    state b {};
    trans a -> b on c?x;
    trans b -> a on c!x;
  })"});
  REQUIRE(r.ok());
  SkeletonBundle b = generate_skeleton(*r.value, forced());
  CHECK(b.effect_hooks.empty());
  CHECK(b.channels[0].operations == std::vector<std::string>{"send", "receive"});
}

TEST_CASE("skeleton: external channels become adapter requirements") {
  SystemGraph g = load_graph_fixture("txclient.sg");
  SkeletonOptions o = forced();
  o.external_channels = {"c"};
  SkeletonBundle b = generate_skeleton(g, o);
  CHECK(b.channels[0].external);
  CHECK(b.channels[0].adapter == "CAdapter");
  std::string text = render_reference_text(b);
  CHECK(text.find("interface CAdapter") != std::string::npos);
  CHECK(text.find("interface TxclientSignals") != std::string::npos);
  CHECK(text.find("choose_pending_cancel_accelerate") != std::string::npos);
  CHECK(text.find("final class Txclient extends System") != std::string::npos);
  o.external_channels = {"nope"};
  CHECK_THROWS_AS(generate_skeleton(g, o), ModelError);
}

TEST_CASE("skeleton: canonical JSON") {
  SystemGraph g = load_graph_fixture("txclient.sg");
  std::string a = render_bundle_json(generate_skeleton(g, forced()));
  std::string b = render_bundle_json(generate_skeleton(load_graph_fixture("txclient.sg"), forced()));
  CHECK(a == b);
  CHECK(a.find("\"schema_version\": 1") != std::string::npos);
  // Keys are sorted at every level.
  CHECK(a.find("\"channel_descriptors\"") < a.find("\"control_flow\""));
  CHECK(a.find("\"control_flow\"") < a.find("\"declarators\""));
  CHECK(render_bundle_json(read_bundle_json(a)) == a);
  CHECK_THROWS_AS(read_bundle_json("{"), ModelError);
  std::string v2 = a;
  v2.replace(v2.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  try {
    read_bundle_json(v2);
    FAIL("expected schema error");
  } catch (const ModelError& e) {
    CHECK(e.code() == "schema");
  }
}

TEST_CASE("skeleton: reconstruction is faithful on fixtures and random graphs") {
  for (const char* name : {"txclient.sg", "txclient_noaccel.sg", "chain.sg", "pending_module.sg"}) {
    SystemGraph g = load_graph_fixture(name);
    SystemGraph back = bundle_to_graph(read_bundle_json(render_bundle_json(generate_skeleton(g, forced()))));
    CHECK(back == g);
    CHECK(bisim_equiv(elaborate(g), elaborate(back)).holds);
  }
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    testgen::Generator gen(seed);
    SystemGraph g = gen.graph();
    SkeletonBundle b = generate_skeleton(g, forced());
    std::set<std::size_t> rows;
    for (const auto& r : b.control_flow) rows.insert(r.index);
    CHECK(rows.size() == g.transitions.size());
    SystemGraph back = bundle_to_graph(read_bundle_json(render_bundle_json(b)));
    CHECK(back == g);
    TransitionSystem ta, tb;
    try {
      ta = elaborate(g);
    } catch (const ModelError& e) {
      CHECK(e.code() == "initial-guard");
      CHECK_THROWS_AS(elaborate(back), ModelError);
      continue;
    }
    tb = elaborate(back);
    CHECK(bisim_equiv(ta, tb).holds);
    ++compared;
  }
  CHECK(compared > 100);
}
