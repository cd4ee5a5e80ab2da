// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

#include "oracles/ctl_oracle.hpp"
#include "oracles/embed_oracle.hpp"
#include "oracles/explore_oracle.hpp"
#include "oracles/ltl_oracle.hpp"
#include "oracles/relation_oracle.hpp"
#include "support/random_formulas.hpp"
#include "support/random_models.hpp"
#include "support/random_ts.hpp"
#include "sysgraph/elaboration.hpp"
#include "sysgraph/equivalence.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/increment.hpp"
#include "sysgraph/runtime.hpp"
#include "sysgraph/skeleton.hpp"
#include "sysgraph/verification.hpp"
#include "sysgraph/version.hpp"

using namespace sysgraph;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Report {
  Outcome outcome = Outcome::pass;
  std::string summary;
  std::vector<std::string> problems;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    outcome = Outcome::fail;
    if (problems.size() < 5) problems.push_back(what);
  }
};

std::string fixture_path(const std::string& name) { return std::string(SYSGRAPH_FIXTURES) + "/" + name; }

Model fixture_model(const std::string& name) {
  auto r = load_model(fixture_path(name));
  if (!r.ok()) throw ModelError(r.diagnostics);
  return *r.value;
}

SystemGraph fixture_graph(const std::string& name) { return fixture_model(name).components.front(); }

std::vector<std::string> corpus() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(SYSGRAPH_FIXTURES))
    if (e.path().extension() == ".sg") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

// 1 -------------------------------------------------------------------------

bool same_as_enumerator(const Model& m, std::string& why) {
  oracle::OResult expect = oracle::enumerate(m);
  TransitionSystem ts;
  try {
    ts = elaborate(m);
  } catch (const ModelError& e) {
    why = e.code();
    return e.code() == "initial-guard" && expect.initials.empty();
  }
  std::set<std::string> states, initials;
  std::set<std::tuple<std::string, std::string, std::string>> trans;
  for (const auto& s : ts.states) {
    states.insert(s.key);
    if (s.labels != expect.labels[s.key]) {
      why = "labels of " + s.key;
      return false;
    }
  }
  for (auto i : ts.initials) initials.insert(ts.states[i].key);
  for (const auto& t : ts.transitions) trans.insert({ts.states[t.source].key, t.action, ts.states[t.target].key});
  why = "state or transition sets differ";
  return states == expect.states && initials == expect.initials && trans == expect.transitions &&
         trans.size() == ts.transitions.size();
}

Report elaboration_oracle() {
  Report r;
  std::string why;
  r.expect(same_as_enumerator(fixture_model("txclient.sg"), why), "txclient: " + why);
  std::size_t empty = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testgen::Generator gen(1000 + seed);
    Model m = gen.model();
    bool ok = same_as_enumerator(m, why);
    if (ok && why == "initial-guard") ++empty;
    r.expect(ok, "random model seed " + std::to_string(1000 + seed) + ": " + why);
    why.clear();
  }
  r.summary = "txclient + 200 random models (" + std::to_string(empty) + " with an unsatisfiable initial guard)";
  return r;
}

// 2 -------------------------------------------------------------------------

Report equivalence_oracle() {
  Report r;
  std::mt19937_64 rng(20261017);
  std::size_t bisim_holds = 0, sim_holds = 0;
  for (int i = 0; i < 300; ++i) {
    TransitionSystem a = testgen::random_ts(rng, 25, 3);
    TransitionSystem b;
    switch (i % 3) {
      case 0: b = testgen::random_ts(rng, 25, 3); break;
      case 1: b = testgen::shuffled_copy(rng, a); break;
      default: b = testgen::mutated(rng, a); break;
    }
    for (bool by_name : {true, false}) {
      ActionMatching m = by_name ? ActionMatching::by_name : ActionMatching::ignore;
      std::string tag = "pair " + std::to_string(i) + (by_name ? " by name" : " ignoring actions");
      RefinementReport bi = bisim_equiv(a, b, m);
      r.expect(bi.holds == oracle::bisimilar(a, b, by_name), tag + ": bisimulation verdict");
      if (bi.holds) {
        ++bisim_holds;
        r.expect(oracle::valid_witness(a, b, bi.relation, by_name, true), tag + ": bisimulation witness");
      }
      RefinementReport si = simulates(a, b, m);
      r.expect(si.holds == oracle::simulated(a, b, by_name), tag + ": simulation verdict");
      if (si.holds) {
        ++sim_holds;
        r.expect(oracle::valid_witness(a, b, si.relation, by_name, false), tag + ": simulation witness");
      }
    }
  }
  r.summary = "300 pairs x 2 matching modes, " + std::to_string(bisim_holds) + " bisimilar, " +
              std::to_string(sim_holds) + " simulated; witnesses validated";
  return r;
}

// 3 -------------------------------------------------------------------------

Report example_claims() {
  Report r;
  SystemGraph tx = fixture_graph("txclient.sg");
  SystemGraph noaccel = fixture_graph("txclient_noaccel.sg");
  RefinementReport bi = refine_check(noaccel, tx, RefinementMode::bisimulation);
  r.expect(bi.holds, "txclient without accelerate is not bisimilar to txclient: " + bi.explanation);
  r.expect(oracle::bisimilar(elaborate(noaccel), elaborate(tx), false), "relation oracle disagrees on (a)");

  auto divs = detect_divergences(tx);
  bool exact = divs.size() == 1 && divs[0].declarator == "pending";
  if (exact) {
    const auto& e1 = tx.transitions[divs[0].first];
    const auto& e2 = tx.transitions[divs[0].second];
    exact = e1.target == "dropped" && e2.target == "dropped" && e1.action.str() == "cancel" &&
            e2.action.str() == "accelerate";
  }
  r.expect(exact, "detect_divergences(txclient) is not exactly the pending -> dropped pair");

  r.expect(is_module(fixture_graph("pending_module.sg"), tx), "pending is not a module of txclient");
  r.summary = "(a) noaccel ~ txclient, (b) one divergence pending->dropped cancel/accelerate, (c) pending module";
  return r;
}

// 4 -------------------------------------------------------------------------

Report ltl_ctl() {
  Report r;
  std::mt19937_64 rng(5005);
  std::vector<std::string> atoms{"p", "q"};
  std::size_t violated = 0;
  for (int i = 0; i < 500; ++i) {
    TransitionSystem ts = testgen::random_ts(rng, 20, 2);
    Formula f = testgen::random_ltl(rng, 3, atoms);
    bool stutter = i % 5 != 0;
    CheckOptions opts;
    opts.stutter = stutter;
    Verdict v = check_ltl(ts, f, opts);
    oracle::LtlResult o = oracle::check_ltl(ts, f, stutter);
    std::string tag = "case " + std::to_string(i) + " " + f.str();
    r.expect(v.satisfied == o.satisfied, tag + ": verdict differs from the lasso oracle");
    if (!v.satisfied) {
      ++violated;
      bool replay = v.counterexample && v.counterexample->states.size() == v.counterexample->actions.size() &&
                    oracle::is_path(ts, v.counterexample->states, v.counterexample->cycle_start, stutter) &&
                    !oracle::holds_on_lasso(f, oracle::word_of(ts, v.counterexample->states),
                                            v.counterexample->cycle_start);
      r.expect(replay, tag + ": counterexample does not replay to a violation");
    }
    for (const auto& p : ts.atomic_propositions) {
      Formula a = Formula::atom(p);
      using Op = Formula::Op;
      r.expect(check_ctl(ts, Formula::unary(Op::ag, a)).satisfied ==
                   check_ltl(ts, Formula::unary(Op::always, a)).satisfied,
               tag + ": AG/G disagree");
      r.expect(check_ctl(ts, Formula::unary(Op::af, a)).satisfied ==
                   check_ltl(ts, Formula::unary(Op::eventually, a)).satisfied,
               tag + ": AF/F disagree");
    }
    Formula c = testgen::random_ctl(rng, 3, atoms);
    r.expect(ctl_states(ts, c) == oracle::ctl_sat(ts, c), tag + ": CTL " + c.str() + " differs from Kleene oracle");
  }
  r.summary = "500 cases (" + std::to_string(violated) + " violated, all counterexamples replayed), CTL fragment agrees";
  return r;
}

// 5 -------------------------------------------------------------------------

Report embedding() {
  Report r;
  std::size_t checked = 0, at_initial = 0, at_terminal = 0, modules = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testgen::Generator gen(seed * 7919 + 3);
    auto t = testgen::random_triple(gen);
    std::string tag = "triple " + std::to_string(seed);
    bool module = is_module(t.inner, t.outer);
    bool at_out = std::any_of(t.outer.transitions.begin(), t.outer.transitions.end(),
                              [&](const Transition& e) { return e.source == t.at; });
    if (t.inner.terminals.empty() && at_out) {
      bool threw = false;
      try {
        embed(t.inner, t.outer, t.at);
      } catch (const ModelError& e) {
        threw = e.code() == "nonterminal-inner";
      }
      r.expect(threw, tag + ": nonterminal inner was not rejected");
      ++rejected;
      continue;
    }
    EmbedResult got = embed(t.inner, t.outer, t.at);
    oracle::EmbedSets want = oracle::literal_embed(t.inner, t.outer, t.at, module);
    std::set<oracle::Edge> edges;
    for (const auto& e : got.graph.transitions) edges.insert({e.source, e.guard.str(), e.action.str(), e.target});
    std::set<std::string> decls, props;
    for (const auto& d : got.graph.declarators) decls.insert(d.name);
    for (const auto& p : got.graph.propositions) props.insert(p.name);
    r.expect(edges == want.edges, tag + ": transition set");
    r.expect(decls == want.declarators, tag + ": declarators");
    r.expect(got.graph.initial == want.initial && got.graph.initial_guard.str() == want.initial_guard,
             tag + ": initial case split");
    r.expect(std::set<std::string>(got.graph.terminals.begin(), got.graph.terminals.end()) == want.terminals,
             tag + ": terminal case split");
    r.expect(props == want.propositions, tag + ": propositions");
    r.expect(!has_errors(validate_graph(got.graph)), tag + ": result is not well formed");
    at_initial += t.at == t.outer.initial;
    at_terminal += t.outer.is_terminal(t.at);
    modules += module;
    ++checked;
  }
  r.expect(at_initial > 0 && at_terminal > 0, "initial and terminal case splits not both exercised");
  r.summary = std::to_string(checked) + " triples equal to the set equations (" + std::to_string(at_initial) +
              " at the initial, " + std::to_string(at_terminal) + " at a terminal, " + std::to_string(modules) +
              " modules), " + std::to_string(rejected) + " rejected as nonterminal";
  return r;
}

// 6 -------------------------------------------------------------------------

Report runtime_soundness() {
  Report r;
  const std::vector<std::string> fixtures{"txclient.sg", "chain.sg", "counter.sg", "prodcons.sg", "prodcons_sync.sg"};
  std::size_t runs = 0, steps = 0;
  for (const auto& name : fixtures) {
    Model m = fixture_model(name);
    TransitionSystem ts = elaborate(m);
    // Handlers that observe and mutate their own copies only.
    EffectRegistry effects;
    std::size_t calls = 0;
    for (const auto& g : m.components)
      for (const auto& t : g.transitions)
        effects.on(t.action.str(), [&calls](const Evaluation& v, const EffectContext& c) {
          Evaluation copy = v;
          for (const auto& [k, _] : v) copy.set(k, TypedValue(0));
          calls += c.step + copy.size();
        });
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      std::string tag = name + " seed " + std::to_string(seed);
      auto once = [&](const EffectRegistry* fx) {
        DivergenceResolver resolver = DivergenceResolver::random(seed);
        RunOptions o;
        o.step_limit = 60;
        o.effects = fx;
        o.resolver = &resolver;
        return m.components.size() == 1 ? run(m.components.front(), o) : run_parallel(m, seed, o);
      };
      Trace plain = once(nullptr);
      Trace observed = once(&effects);
      r.expect(trace_conformance(plain, ts), tag + ": trace does not conform");
      r.expect(plain == observed, tag + ": effects changed the trace");
      bool same_states = plain.steps.size() == observed.steps.size();
      for (std::size_t i = 0; same_states && i < plain.steps.size(); ++i)
        same_states = plain.steps[i].state == observed.steps[i].state;
      r.expect(same_states, tag + ": effects changed the state sequence");
      ++runs;
      steps += plain.steps.size() - 1;
    }
    r.expect(calls > 0, name + ": effect handlers never ran");
  }
  r.summary = std::to_string(runs) + " seeded runs over 5 fixtures (" + std::to_string(steps) +
              " steps) conform; effects never changed a trace";
  return r;
}

// 7 -------------------------------------------------------------------------

Report round_trips() {
  Report r;
  auto files = corpus();
  for (const auto& name : files) {
    Model first = fixture_model(name);
    std::string printed = print_model(first);
    auto second = parse_model({"printed.sg", printed});
    r.expect(second.ok() && *second.value == first, name + ": parse/print/parse differs");
    if (second.ok()) r.expect(print_model(*second.value) == printed, name + ": printing is not stable");

    std::vector<Formula> props;
    if (!first.components.front().propositions.empty())
      props.push_back(compile_property("G (" + first.components.front().propositions.front().name + " -> F true)",
                                       first));
    r.expect(emit_promela(first, props) == emit_promela(fixture_model(name), props), name + ": Promela differs");
    for (const auto& g : first.components) {
      SkeletonOptions forced;
      forced.force = true;
      r.expect(render_bundle_json(generate_skeleton(g, forced)) == render_bundle_json(generate_skeleton(g, forced)),
               name + ": skeleton JSON differs");
    }
  }

  fs::path dir = fs::temp_directory_path() / ("sysgraph-acceptance-" + std::to_string(std::random_device{}()));
  {
    VersionStore store(dir / ".sgv");
    SystemGraph tx = fixture_graph("txclient.sg");
    VersionRecord a = store.archive(tx, {});
    VersionRecord b = store.archive(tx, {});
    std::size_t records = 0;
    for (const auto& e : fs::directory_iterator(dir / ".sgv" / "objects")) records += e.path().extension() == ".json";
    r.expect(a.id == b.id && a.id == graph_digest(tx) && records == 1, "archive is not idempotent");
    r.expect(store.verify().empty(), "archive does not verify");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  r.summary = std::to_string(files.size()) + " fixtures round-trip; Promela and skeleton JSON byte-identical; archive "
              "idempotent";
  return r;
}

// 8 -------------------------------------------------------------------------

Report skeleton_fidelity() {
  Report r;
  std::size_t graphs = 0;
  for (const auto& name : corpus()) {
    for (const auto& g : fixture_model(name).components) {
      SkeletonOptions forced;
      forced.force = true;
      SystemGraph back = bundle_to_graph(read_bundle_json(render_bundle_json(generate_skeleton(g, forced))));
      TransitionSystem a = elaborate(g), b = elaborate(back);
      r.expect(bisim_equiv(a, b, ActionMatching::by_name).holds, name + "/" + g.name + ": not bisimilar");
      r.expect(oracle::bisimilar(a, b, true), name + "/" + g.name + ": relation oracle disagrees");
      ++graphs;
    }
  }
  r.summary = std::to_string(graphs) + " fixture graphs rebuilt from their bundles are bisimilar to the source";
  return r;
}

// 9 -------------------------------------------------------------------------

std::string find_on_path(const std::string& exe) {
  const char* path = std::getenv("PATH");
  if (!path) return {};
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    fs::path p = fs::path(dir) / exe;
    if (!dir.empty() && fs::exists(p)) return p.string();
  }
  return {};
}

Report spin_cross_check() {
  Report r;
  std::string spin = find_on_path("spin");
  if (spin.empty()) {
    r.outcome = Outcome::skip;
    r.summary = "spin not found on PATH";
    return r;
  }
  std::string cc = find_on_path("cc");
  if (cc.empty()) cc = find_on_path("gcc");
  SystemGraph tx = fixture_graph("txclient.sg");
  Formula f = compile_property("G (PaidGas -> F Notified)", tx);
  bool ours = check_ltl(elaborate(tx), f).satisfied;

  fs::path dir = fs::temp_directory_path() / ("sysgraph-spin-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  std::ofstream(dir / "model.pml") << emit_promela(tx, {f});
  std::string cd = "cd '" + dir.string() + "' && ";
  int gen = std::system((cd + "'" + spin + "' -a model.pml > spin.log 2>&1").c_str());
  int build = gen == 0 ? std::system((cd + "'" + cc + "' -O2 -DNFAIR=3 -o pan pan.c >> spin.log 2>&1").c_str()) : -1;
  int verify = build == 0 ? std::system((cd + "./pan -a -f -m100000 > pan.log 2>&1").c_str()) : -1;
  std::ifstream log(dir / "pan.log");
  std::string text((std::istreambuf_iterator<char>(log)), std::istreambuf_iterator<char>());
  std::smatch m;
  bool parsed = std::regex_search(text, m, std::regex("errors: (\\d+)"));
  r.expect(gen == 0 && build == 0 && verify == 0 && parsed, "spin pipeline failed, see " + dir.string());
  if (parsed) {
    bool spin_holds = m[1] == "0";
    r.expect(spin_holds == ours, std::string("spin says ") + (spin_holds ? "holds" : "fails") + ", check_ltl says " +
                                     (ours ? "holds" : "fails"));
    r.summary = std::string("spin and check_ltl agree: ") + (ours ? "holds" : "fails");
  }
  if (r.outcome == Outcome::pass) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
      {"elaboration matches the brute-force enumerator", elaboration_oracle},
      {"equivalence checkers match the fixpoint oracles", equivalence_oracle},
      {"example claims hold on the fixtures", example_claims},
      {"LTL checker matches the lasso oracle; CTL agrees", ltl_ctl},
      {"embedding matches the set-equation oracle", embedding},
      {"runtime traces conform; effects are isolated", runtime_soundness},
      {"determinism and round-trips", round_trips},
      {"skeleton reconstruction is bisimilar", skeleton_fidelity},
      {"Promela cross-check with spin", spin_cross_check},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Report rep;
    try {
      rep = criteria[i].second();
    } catch (const std::exception& e) {
      rep.outcome = Outcome::fail;
      rep.problems.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = rep.outcome == Outcome::pass ? "PASS" : rep.outcome == Outcome::skip ? "SKIP" : "FAIL";
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << tag << ' ' << i + 1 << ": " << criteria[i].first << " - " << rep.summary << " [" << timing << "]\n";
    for (const auto& p : rep.problems) std::cout << "    " << p << '\n';
    failures += rep.outcome == Outcome::fail;
  }
  std::cout.flush();
  return failures == 0 ? 0 : 1;
}
