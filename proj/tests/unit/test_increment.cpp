#include <doctest.h>

#include "oracles/embed_oracle.hpp"
#include "support/random_models.hpp"
#include "sysgraph/elaboration.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/increment.hpp"

using namespace sysgraph;

namespace {

SystemGraph fixture(const std::string& name) {
  auto r = load_model(std::string(SYSGRAPH_FIXTURES) + "/" + name);
  REQUIRE(r.ok());
  return r.value->components.front();
}

SystemGraph graph(const std::string& text) {
  auto r = parse_source({"t.sg", text});
  if (!r.ok())
    for (const auto& d : r.diagnostics) MESSAGE(d.format("t.sg"));
  REQUIRE(r.ok());
  return *r.value;
}

std::set<oracle::Edge> edge_set(const SystemGraph& g) {
  std::set<oracle::Edge> out;
  for (const auto& t : g.transitions) out.insert({t.source, t.guard.str(), t.action.str(), t.target});
  return out;
}

std::set<std::string> names(const std::vector<StateDeclarator>& ds) {
  std::set<std::string> out;
  for (const auto& d : ds) out.insert(d.name);
  return out;
}

const char* kOuter = R"(system outer {
  vars { k: int[0..3] = 0; }
  state a {k=0} init;
  state b {k=1};
  state c {k=2};
  trans a -> b on enter;
  trans b -> c when k > 0 on leave;
  terminal c;
})";

const char* kInner = R"(system inner {
  vars { k: int[0..3] = 0; }
  state x {k=1} init when k == 0;
  state y {k=3};
  trans x -> y on work;
  terminal y;
})";

}  // namespace

TEST_CASE("embed: linear inner at a middle declarator") {
  SystemGraph outer = graph(kOuter), inner = graph(kInner);
  EmbedResult r = embed(inner, outer, "b");
  CHECK_FALSE(r.module);
  CHECK(r.renames.empty());
  CHECK(names(r.graph.declarators) == std::set<std::string>{"a", "c", "x", "y"});
  CHECK(edge_set(r.graph) == std::set<oracle::Edge>{{"a", "k == 0", "enter", "x"},
                                                    {"x", "true", "work", "y"},
                                                    {"y", "k > 0", "leave", "c"}});
  CHECK(r.graph.initial == "a");
  CHECK(r.graph.terminals == std::vector<std::string>{"c"});
  CHECK(validate_graph(r.graph).empty());
  // The printed result parses back to the same graph.
  CHECK(graph(print_graph(r.graph)) == r.graph);
}

TEST_CASE("embed: at the initial and at a terminal declarator") {
  SystemGraph outer = graph(kOuter), inner = graph(kInner);
  EmbedResult r = embed(inner, outer, "a");
  CHECK(r.graph.initial == "x");
  CHECK(r.graph.initial_guard.str() == "k == 0");

  EmbedResult t = embed(inner, outer, "c");
  CHECK(std::set<std::string>(t.graph.terminals.begin(), t.graph.terminals.end()) == std::set<std::string>{"y"});
  CHECK(t.graph.initial == "a");
  CHECK(t.graph.initial_guard.is_true());
}

TEST_CASE("embed: collisions are renamed unless the inner graph is a module") {
  SystemGraph outer = graph(kOuter);
  SystemGraph inner = graph(R"(system inner {
    vars { k: int[0..3] = 0; }
    state a {k=3} init;
    state z {};
    trans a -> z on work;
    terminal z;
  })");
  EmbedResult r = embed(inner, outer, "b");
  CHECK(r.renames == std::map<std::string, std::string>{{"a", "a_inner"}});
  CHECK(names(r.graph.declarators) == std::set<std::string>{"a", "a_inner", "c", "z"});
  CHECK(validate_graph(r.graph).empty());

  SystemGraph tx = fixture("txclient.sg"), pending = fixture("pending_module.sg");
  REQUIRE(is_module(pending, tx));
  EmbedResult m = embed(pending, tx, "pending");
  CHECK(m.module);
  CHECK(m.renames.empty());
  CHECK(names(m.graph.declarators) == names(tx.declarators));
  CHECK(validate_graph(m.graph).empty());
}

TEST_CASE("embed: errors") {
  SystemGraph outer = graph(kOuter), inner = graph(kInner);
  try {
    embed(inner, outer, "nope");
    FAIL("expected an error");
  } catch (const ModelError& e) {
    CHECK(e.code() == "unresolved-name");
  }
  SystemGraph open = inner;
  open.terminals.clear();
  try {
    embed(open, outer, "b");
    FAIL("expected an error");
  } catch (const ModelError& e) {
    CHECK(e.code() == "nonterminal-inner");
  }
  // With no outbound edges at `at` a nonterminal inner is fine.
  CHECK_NOTHROW(embed(open, outer, "c"));
  SystemGraph other = inner;
  other.signatures.front().type = VarType::integer(0, 9);
  try {
    embed(other, outer, "b");
    FAIL("expected an error");
  } catch (const ModelError& e) {
    CHECK(e.code() == "signature-mismatch");
  }
}

TEST_CASE("embed: associative on chains") {
  SystemGraph outer = graph(kOuter), inner = graph(kInner);
  SystemGraph deeper = graph(R"(system deeper {
    vars { k: int[0..3] = 0; }
    state u {k=2} init;
    state v {k=3};
    trans u -> v on deep;
    terminal v;
  })");
  SystemGraph left = embed(deeper, embed(inner, outer, "b").graph, "x").graph;
  SystemGraph right = embed(embed(deeper, inner, "x").graph, outer, "b").graph;
  CHECK(edge_set(left) == edge_set(right));
  CHECK(names(left.declarators) == names(right.declarators));
}

TEST_CASE("embed: random triples agree with the set equations") {
  std::size_t checked = 0, modules = 0, renamed = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testgen::Generator gen(seed * 7919 + 3);
    auto t = testgen::random_triple(gen);
    REQUIRE(validate_graph(t.outer).empty());
    REQUIRE(validate_graph(t.inner).empty());
    bool module = is_module(t.inner, t.outer);
    bool at_out = false;
    for (const auto& tr : t.outer.transitions) at_out = at_out || tr.source == t.at;
    if (t.inner.terminals.empty() && at_out) {
      CHECK_THROWS_AS(embed(t.inner, t.outer, t.at), ModelError);
      ++rejected;
      continue;
    }
    EmbedResult r = embed(t.inner, t.outer, t.at);
    oracle::EmbedSets expect = oracle::literal_embed(t.inner, t.outer, t.at, module);
    CHECK(r.module == module);
    CHECK(edge_set(r.graph) == expect.edges);
    CHECK(names(r.graph.declarators) == expect.declarators);
    CHECK(r.graph.initial == expect.initial);
    CHECK(r.graph.initial_guard.str() == expect.initial_guard);
    CHECK(std::set<std::string>(r.graph.terminals.begin(), r.graph.terminals.end()) == expect.terminals);
    std::set<std::string> props;
    for (const auto& p : r.graph.propositions) props.insert(p.name);
    CHECK(props == expect.propositions);
    auto diags = validate_graph(r.graph);
    for (const auto& d : diags) MESSAGE(d.format("embed"));
    CHECK_FALSE(has_errors(diags));
    if (module) {
      ++modules;
      CHECK(r.renames.empty());
    }
    if (!r.renames.empty()) ++renamed;
    ++checked;
  }
  CHECK(checked > 120);
  CHECK(modules > 20);
  CHECK(renamed > 20);
  CHECK(rejected > 0);
}

TEST_CASE("is_module") {
  SystemGraph tx = fixture("txclient.sg");
  CHECK(is_module(fixture("pending_module.sg"), tx));
  CHECK(is_module(tx, tx));
  SystemGraph disjoint = graph(R"(system d {
    vars { status: int[0..4] = 0; paid: bool = false; tx: int[0..7]; }
    chan c: int[0..7] cap 1 = [5];
    state elsewhere {} init;
  })");
  CHECK_FALSE(is_module(disjoint, tx));
  SystemGraph relabelled = fixture("pending_module.sg");
  relabelled.propositions[1].formula = parse_guard("status == 3", relabelled);
  CHECK_FALSE(is_module(relabelled, tx));
}

TEST_CASE("compose_vertical") {
  SystemGraph client = fixture("txclient.sg");
  SystemGraph server = graph(R"(system server {
    vars { fee: int[0..7] = 3; }
    chan c: int[0..7] cap 1 = [5];
    state idle {} init;
    state sent {};
    trans idle -> sent on c!fee;
  })");
  ChannelSystem cs = compose_vertical({client, server}, client.channels);
  CHECK(cs.components.size() == 2);
  CHECK(cs.channels.size() == 1);
  CHECK(explore(cs).states.size() > elaborate(client).states.size());

  SystemGraph chain = fixture("chain.sg");
  TransitionSystem alone = elaborate(chain);
  TransitionSystem composed = explore(compose_vertical({chain}, {}));
  CHECK(write_ts(alone) == write_ts(composed));

  SystemGraph clash = server;
  clash.signatures.push_back({"tx", VarType::integer(0, 7), TypedValue(0), {}});
  try {
    compose_vertical({client, clash}, client.channels);
    FAIL("expected overlap");
  } catch (const ModelError& e) {
    CHECK(e.code() == "overlap");
  }
  try {
    compose_vertical({client, server}, {});
    FAIL("expected channel mismatch");
  } catch (const ModelError& e) {
    CHECK(e.code() == "channel-mismatch");
  }
}

TEST_CASE("classify_next_move") {
  CHECK(classify_next_move(false, false) == NextMove::deliver);
  CHECK(classify_next_move(false, true) == NextMove::integrate);
  CHECK(classify_next_move(true, false) == NextMove::iterate);
  CHECK(classify_next_move(true, true) == NextMove::iterate);
  CHECK(to_string(NextMove::integrate) == "integrate");
}
