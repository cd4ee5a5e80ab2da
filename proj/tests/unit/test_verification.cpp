#include <doctest.h>

#include <random>
#include <regex>

#include "oracles/ctl_oracle.hpp"
#include "oracles/ltl_oracle.hpp"
#include "support/random_formulas.hpp"
#include "support/random_ts.hpp"
#include "sysgraph/elaboration.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/verification.hpp"

using namespace sysgraph;
using Op = Formula::Op;

namespace {

SystemGraph fixture(const std::string& name) {
  auto r = load_graph(std::string(SYSGRAPH_FIXTURES) + "/" + name);
  REQUIRE(r.ok());
  return *r.value;
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ModelError& e) {
    return e.code();
  }
  return "";
}

// Acceptance of an ultimately periodic word by a transition-based automaton:
// an accepting edge on a cycle of the (position, state) graph that stays in
// the periodic part.
bool accepts(const BuchiAutomaton& a, const std::vector<std::set<std::string>>& word, std::size_t cycle_start) {
  const std::size_t n = word.size(), q = a.states.size();
  auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : cycle_start; };
  auto id = [&](std::size_t i, std::size_t s) { return i * q + s; };
  std::vector<std::vector<std::pair<std::size_t, bool>>> out(n * q);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : a.edges)
      if (a.enabled(e, word[i])) out[id(i, e.source)].emplace_back(id(succ(i), e.target), e.accepting);
  std::vector<bool> reach(n * q, false);
  std::vector<std::size_t> work{id(0, a.initial)};
  reach[work[0]] = true;
  while (!work.empty()) {
    auto v = work.back();
    work.pop_back();
    for (auto [w, acc] : out[v])
      if (!reach[w]) reach[w] = true, work.push_back(w);
  }
  // Does an accepting edge v -> w lie on a cycle (w reaches v)?
  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(n * q, false);
    std::vector<std::size_t> st{from};
    seen[from] = true;
    while (!st.empty()) {
      auto v = st.back();
      st.pop_back();
      if (v == to) return true;
      for (auto [w, acc] : out[v])
        if (!seen[w]) seen[w] = true, st.push_back(w);
    }
    return false;
  };
  for (std::size_t v = 0; v < n * q; ++v)
    if (reach[v])
      for (auto [w, acc] : out[v])
        if (acc && reaches(w, v)) return true;
  return false;
}

TransitionSystem chain_ts(const std::vector<std::set<std::string>>& labels, bool loop_last) {
  TransitionSystem ts;
  for (std::size_t i = 0; i < labels.size(); ++i) ts.add_state({"s" + std::to_string(i), labels[i], {}});
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) ts.add_transition(i, "a", i + 1);
  if (loop_last) ts.add_transition(labels.size() - 1, "a", labels.size() - 1);
  ts.initials = {0};
  ts.atomic_propositions = {"p", "q"};
  return ts;
}

void check_against_oracle(const TransitionSystem& ts, const Formula& f, bool stutter) {
  CheckOptions opts;
  opts.stutter = stutter;
  auto v = check_ltl(ts, f, opts);
  auto o = oracle::check_ltl(ts, f, stutter);
  INFO("formula: " << f.str());
  INFO("system:\n" << write_ts(ts));
  REQUIRE(v.satisfied == o.satisfied);
  if (!o.satisfied) {
    REQUIRE(oracle::is_path(ts, o.states, o.cycle_start, stutter));
    CHECK_FALSE(oracle::holds_on_lasso(f, oracle::word_of(ts, o.states), o.cycle_start));
    REQUIRE(v.counterexample);
    const auto& l = *v.counterexample;
    REQUIRE(l.states.size() == l.actions.size());
    REQUIRE(oracle::is_path(ts, l.states, l.cycle_start, stutter));
    CHECK_FALSE(oracle::holds_on_lasso(f, oracle::word_of(ts, l.states), l.cycle_start));
  } else {
    CHECK_FALSE(v.counterexample);
    CHECK_FALSE(oracle::bounded_violation(ts, f, 5, stutter));
  }
}

}  // namespace

TEST_CASE("compile_property parses LTL and CTL") {
  auto tx = fixture("txclient.sg");
  auto f = compile_property("G (PaidGas -> F Notified)", tx);
  CHECK(f.logic() == Logic::ltl);
  CHECK(f.op == Op::always);
  CHECK(f.args[0].op == Op::implication);
  CHECK(f.args[0].args[1] == Formula::unary(Op::eventually, Formula::atom("Notified")));
  CHECK(f.str() == "G (PaidGas -> F Notified)");
  CHECK(compile_property(f.str(), tx) == f);

  auto c = compile_property("AG (ForkFree)", std::set<std::string>{"ForkFree"});
  CHECK(c.logic() == Logic::ctl);
  CHECK(c == Formula::unary(Op::ag, Formula::atom("ForkFree")));
  CHECK(compile_property("A G ForkFree", std::set<std::string>{"ForkFree"}) == c);

  auto u = compile_property("A[PaidGas U Notified]", tx);
  CHECK(u.op == Op::au);
  CHECK(compile_property(u.str(), tx) == u);
  CHECK(compile_property("E(PaidGas U Notified)", tx).op == Op::eu);
  CHECK(compile_property("[] <> Notified", tx) == compile_property("G F Notified", tx));
  CHECK(compile_property("PaidGas U Notified U PaidGas", tx).args[1].op == Op::until);
  CHECK(compile_property("!PaidGas && Notified || PaidGas", tx).op == Op::disjunction);
  CHECK(compile_property("true R false", tx).op == Op::release);
}

TEST_CASE("compile_property errors") {
  auto tx = fixture("txclient.sg");
  CHECK(error_code([&] { compile_property("G (Unknown)", tx); }) == "unknown-proposition");
  CHECK(error_code([&] { compile_property("G (", tx); }) == "syntax");
  CHECK(error_code([&] { compile_property("PaidGas U", tx); }) == "syntax");
  CHECK(error_code([&] { compile_property("PaidGas Notified", tx); }) == "syntax");
  CHECK(error_code([&] { compile_property("A PaidGas", tx); }) == "syntax");
  CHECK(error_code([&] { compile_property("A[PaidGas]", tx); }) == "syntax");
  CHECK(error_code([&] { compile_property("G # x", tx); }) == "syntax");
  CHECK(error_code([&] { compile_property("AG F PaidGas", tx); }) == "mixed-logic");
  CHECK(error_code([&] { compile_property("EF PaidGas && G Notified", tx); }) == "mixed-logic");
  try {
    compile_property("G (PaidGas -> F Nope)", tx);
    FAIL("expected an error");
  } catch (const ModelError& e) {
    CHECK(e.diagnostics()[0].span.column == 17);
    CHECK(e.diagnostics()[0].span.length == 4);
  }
}

TEST_CASE("ltl_nnf pushes negations to atoms") {
  std::set<std::string> ap{"p", "q"};
  auto f = ltl_nnf(compile_property("!(p U q) && !G p && !(p -> X q)", ap));
  std::function<void(const Formula&)> only_literals = [&](const Formula& g) {
    if (g.op == Op::negation) CHECK(g.args[0].op == Op::atom);
    CHECK(g.op != Op::implication);
    for (const auto& a : g.args) only_literals(a);
  };
  only_literals(f);
}

TEST_CASE("ltl_to_buchi sizes and spot checks") {
  std::set<std::string> ap{"p", "q"};
  auto ev = ltl_to_buchi(compile_property("F p", ap));
  CHECK(ev.states.size() == 2);
  auto al = ltl_to_buchi(compile_property("G p", ap));
  REQUIRE(al.states.size() == 1);
  REQUIRE(al.edges.size() == 1);
  CHECK(al.edges[0].positive == std::set<std::string>{"p"});
  CHECK(al.edges[0].negative.empty());
  CHECK(al.edges[0].accepting);
  CHECK(al.edges[0].target == 0);

  auto resp = compile_property("G (p -> F q)", ap);
  auto a = ltl_to_buchi(resp);
  CHECK(a.states.size() >= 2);
  using W = std::vector<std::set<std::string>>;
  std::vector<std::pair<W, std::size_t>> words = {
      {{{}}, 0},                          // never p
      {{{"p"}}, 0},                       // p forever, no q
      {{{"p"}, {"q"}}, 0},                // answered every time
      {{{"p", "q"}}, 0},                  // p and q together
      {{{"p"}, {}, {"q"}, {}}, 1},        // answered once, then never asked
      {{{"q"}, {"p"}, {}}, 1},            // asked forever, answered only before
  };
  std::vector<bool> expected = {true, false, true, true, true, false};
  for (std::size_t i = 0; i < words.size(); ++i) {
    INFO("word " << i);
    CHECK(oracle::holds_on_lasso(resp, words[i].first, words[i].second) == expected[i]);
    CHECK(accepts(a, words[i].first, words[i].second) == expected[i]);
  }
}

TEST_CASE("ltl_to_buchi language matches the semantics on random words") {
  std::mt19937_64 rng(77);
  std::vector<std::string> atoms{"p", "q"};
  auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  for (int round = 0; round < 300; ++round) {
    auto f = testgen::random_ltl(rng, 3, atoms);
    auto a = ltl_to_buchi(f);
    for (int w = 0; w < 8; ++w) {
      std::size_t n = 1 + below(5);
      std::vector<std::set<std::string>> word(n);
      for (auto& l : word)
        for (const auto& x : atoms)
          if (below(2)) l.insert(x);
      std::size_t k = below(n);
      INFO(f.str());
      CHECK(accepts(a, word, k) == oracle::holds_on_lasso(f, word, k));
    }
  }
}

TEST_CASE("check_ltl examples") {
  auto tautology = Formula::unary(Op::always, Formula::truth());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) CHECK(check_ltl(testgen::random_ts(rng, 8, 2), tautology).satisfied);

  // p-state leading to a ¬p sink.
  TransitionSystem ts = chain_ts({{"p"}, {}}, false);
  auto v = check_ltl(ts, compile_property("G p", std::set<std::string>{"p"}));
  CHECK_FALSE(v.satisfied);
  REQUIRE(v.counterexample);
  CHECK(v.counterexample->states == std::vector<std::size_t>{0, 1});
  CHECK(v.counterexample->cycle_start == 1);
  CHECK(v.counterexample->actions == std::vector<std::string>{"a", "-"});
  auto text = format_lasso(ts, *v.counterexample);
  CHECK(text.find("trans 1 - 1\n") != std::string::npos);
  CHECK(text.find("cycle-at 1\n") != std::string::npos);

  // Without stutter the finite run is not a counterexample.
  CheckOptions no_stutter;
  no_stutter.stutter = false;
  CHECK(check_ltl(ts, compile_property("G p", std::set<std::string>{"p"}), no_stutter).satisfied);

  auto tx = fixture("txclient.sg");
  auto txts = elaborate(tx);
  auto resp = compile_property("G (PaidGas -> F Notified)", tx);
  auto r = check_ltl(txts, resp);
  CHECK(r.satisfied == oracle::check_ltl(txts, resp).satisfied);
  CHECK_FALSE(r.satisfied);  // pending -> dropped -> resubmit cycles without notification
  REQUIRE(r.counterexample);
  CHECK(oracle::is_path(txts, r.counterexample->states, r.counterexample->cycle_start, true));
  CHECK(check_ltl(txts, compile_property("F PaidGas", tx)).satisfied);
}

TEST_CASE("check_ltl agrees with the tableau oracle on random systems") {
  std::mt19937_64 rng(4242);
  std::vector<std::string> atoms{"p", "q"};
  for (int round = 0; round < 250; ++round) {
    auto ts = testgen::random_ts(rng, 10, 2);
    auto f = testgen::random_ltl(rng, 3, atoms);
    check_against_oracle(ts, f, round % 5 != 0);
  }
}

TEST_CASE("duality on deterministic systems") {
  std::mt19937_64 rng(99);
  std::vector<std::string> atoms{"p", "q"};
  for (int round = 0; round < 100; ++round) {
    TransitionSystem ts;
    auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    std::size_t n = 1 + below(8);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::string> l;
      for (const auto& a : atoms)
        if (below(2)) l.insert(a);
      ts.add_state({"s" + std::to_string(i), l, {}});
    }
    for (std::size_t i = 0; i < n; ++i) ts.add_transition(i, "a", below(n));
    ts.initials = {0};
    auto f = testgen::random_ltl(rng, 3, atoms);
    bool pos = check_ltl(ts, f).satisfied;
    bool neg = check_ltl(ts, Formula::unary(Op::negation, f)).satisfied;
    CHECK(pos != neg);  // a single run decides every formula
  }
}

TEST_CASE("check_ctl examples") {
  auto tx = fixture("txclient.sg");
  auto ts = elaborate(tx);
  CHECK(check_ctl(ts, compile_property("AG true", tx)).satisfied);
  CHECK(check_ctl(ts, compile_property("EF Notified", tx)).satisfied);
  auto af = check_ctl(ts, compile_property("AF Notified", tx));
  CHECK_FALSE(af.satisfied);
  REQUIRE(af.failing_state);
  CHECK(*af.failing_state == ts.initials[0]);
  CHECK(af.failing_subformula == "AF Notified");
  auto conj = check_ctl(ts, compile_property("EF Notified && AF Notified", tx));
  CHECK(conj.failing_subformula == "AF Notified");
  CHECK(check(ts, compile_property("EF Notified", tx)).logic == Logic::ctl);
  CHECK(error_code([&] { check_ltl(ts, compile_property("EF Notified", tx)); }) == "unsupported");
}

TEST_CASE("ctl_states agrees with Kleene iteration") {
  std::mt19937_64 rng(31337);
  std::vector<std::string> atoms{"p", "q"};
  for (int round = 0; round < 300; ++round) {
    auto ts = testgen::random_ts(rng, 12, 2);
    auto f = testgen::random_ctl(rng, 3, atoms);
    INFO(f.str());
    CHECK(ctl_states(ts, f) == oracle::ctl_sat(ts, f));
  }
}

TEST_CASE("CTL and LTL agree on the universal fragment") {
  std::mt19937_64 rng(8);
  std::vector<TransitionSystem> systems;
  for (const char* name : {"txclient.sg", "txclient_noaccel.sg", "txclient_retarget.sg", "pending_module.sg",
                           "chain.sg"})
    systems.push_back(elaborate(fixture(name)));
  for (int i = 0; i < 100; ++i) systems.push_back(testgen::random_ts(rng, 10, 2));
  for (const auto& ts : systems) {
    for (const auto& p : ts.atomic_propositions) {
      auto a = Formula::atom(p);
      CHECK(check_ctl(ts, Formula::unary(Op::ag, a)).satisfied == check_ltl(ts, Formula::unary(Op::always, a)).satisfied);
      CHECK(check_ctl(ts, Formula::unary(Op::af, a)).satisfied ==
            check_ltl(ts, Formula::unary(Op::eventually, a)).satisfied);
    }
  }
}

TEST_CASE("emit_promela") {
  auto tx = fixture("txclient.sg");
  auto prop = compile_property("G (PaidGas -> F Notified)", tx);
  auto text = emit_promela(tx, {prop});
  auto count = [&](const std::string& pattern) {
    std::regex re(pattern);
    return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
  };
  CHECK(count("#define at_txclient_") == 6);
  CHECK(count("inline enter_txclient_") == 6);
  CHECK(count("chan c = \\[1\\] of") == 1);
  CHECK(count("\\nltl ") == 1);
  CHECK(text.find("ltl p0 { [] (prop_PaidGas -> <> prop_Notified) }") != std::string::npos);
  CHECK(text.find("c!5;") != std::string::npos);
  CHECK(text == emit_promela(tx, {prop}));

  auto chain = fixture("chain.sg");
  chain.propositions.clear();
  chain.labeling.clear();
  auto bare = emit_promela(chain, {});
  CHECK(bare.find("ltl") == std::string::npos);
  CHECK(bare.find("run chain()") != std::string::npos);

  CHECK(error_code([&] { emit_promela(tx, {compile_property("AG PaidGas", tx)}); }) == "unsupported");

  SystemGraph wide = chain;
  std::vector<std::string> names;
  for (int i = 0; i < 300; ++i) names.push_back("v" + std::to_string(i));
  wide.signatures.push_back({"mode", VarType::symbol(names), TypedValue::symbol("v0"), {}});
  CHECK(error_code([&] { emit_promela(wide, {}); }) == "unsupported");

  auto sync = load_model(std::string(SYSGRAPH_FIXTURES) + "/prodcons_sync.sg");
  REQUIRE(sync.ok());
  auto ptext = emit_promela(*sync.value, {});
  CHECK(ptext.find("chan q = [0] of") != std::string::npos);
  CHECK(ptext.find("proctype producer()") != std::string::npos);
  CHECK(ptext.find("proctype consumer()") != std::string::npos);
}
