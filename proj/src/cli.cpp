#include "sysgraph/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sysgraph/elaboration.hpp"
#include "sysgraph/equivalence.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/increment.hpp"
#include "sysgraph/runtime.hpp"
#include "sysgraph/skeleton.hpp"
#include "sysgraph/verification.hpp"
#include "sysgraph/version.hpp"

namespace sysgraph::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kEnvelopeSchemaVersion = 1;

// Unwinds a verb after its diagnostics have been recorded.
struct Failure {
  int code;
};

struct Ctx {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  bool machine = false;
  std::string verb;
  json result = json::object();
  json diagnostics = json::array();

  void say(const std::string& line) {
    if (!machine) out << line << '\n';
  }

  void report(const Diagnostic& d, const std::string& file) {
    json j = {{"severity", d.severity == Severity::error ? "error" : "warning"},
              {"code", d.code},
              {"message", d.message},
              {"file", file}};
    if (d.span.valid()) {
      j["line"] = d.span.line;
      j["column"] = d.span.column;
    }
    diagnostics.push_back(std::move(j));
    if (!machine) err << d.format(file.empty() ? "sysgraph" : file) << '\n';
  }

  [[noreturn]] void fail(int code, const std::string& diag_code, const std::string& message,
                         const std::string& file = {}) {
    report({Severity::error, {}, diag_code, message}, file);
    throw Failure{code};
  }
};

std::string status_of(int code) {
  switch (code) {
    case kExitOk: return "ok";
    case kExitUsage: return "usage";
    case kExitNegative: return "negative";
    default: return "error";
  }
}

// ---------------------------------------------------------------------------
// Input and output helpers

Model load(Ctx& c, const std::string& path) {
  auto r = load_model(path);
  for (const auto& d : r.diagnostics) c.report(d, path);
  if (!r.ok()) throw Failure{kExitInput};
  return std::move(*r.value);
}

SystemGraph load_single(Ctx& c, const std::string& path) {
  Model m = load(c, path);
  if (m.components.size() != 1)
    c.fail(kExitInput, "unsupported", "'" + c.verb + "' needs a single-system model, '" + path + "' has " +
                                          std::to_string(m.components.size()) + " components",
           path);
  return std::move(m.components.front());
}

void write_output(Ctx& c, const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    c.out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << content) || !f.flush()) c.fail(kExitInput, "io", "cannot write '" + path + "'", path);
}

ExplorationConfig exploration(std::size_t max_states) {
  ExplorationConfig cfg;
  cfg.max_states = max_states;
  return cfg;
}

json record_json(const VersionRecord& r) { return json::parse(render_record_json(r)); }

std::string short_id(const std::string& id) { return id.substr(0, 12); }

VersionStore store_for(const std::string& store, const std::string& model_path) {
  if (!store.empty()) return VersionStore(store);
  if (!model_path.empty()) return VersionStore::beside(model_path);
  return VersionStore(".sgv");
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
  std::string model;
  std::string dump;
  std::size_t max_states = ExplorationConfig{}.max_states;
};

int cmd_check(Ctx& c, const CheckArgs& a) {
  Model m = load(c, a.model);
  TransitionSystem ts = elaborate(m, exploration(a.max_states));
  c.result["model"] = m.name;
  c.result["components"] = m.components.size();
  c.result["states"] = ts.states.size();
  c.result["transitions"] = ts.transitions.size();
  c.result["initial_states"] = ts.initials.size();
  json divs = json::array();
  for (const auto& g : m.components)
    for (const auto& d : detect_divergences(g))
      divs.push_back({{"system", g.name},
                      {"declarator", d.declarator},
                      {"first", g.transitions[d.first].action.str()},
                      {"second", g.transitions[d.second].action.str()},
                      {"edges", {d.first, d.second}}});
  c.result["divergences"] = divs;

  std::size_t n = m.components.size();
  c.say(m.name + ": " + std::to_string(n) + (n == 1 ? " component, " : " components, ") +
        std::to_string(ts.states.size()) + " states, " + std::to_string(ts.transitions.size()) + " transitions");
  for (const auto& d : divs)
    c.say("divergence in " + d["system"].get<std::string>() + " at " + d["declarator"].get<std::string>() + ": " +
          d["first"].get<std::string>() + " / " + d["second"].get<std::string>());
  if (!a.dump.empty()) {
    write_output(c, a.dump, write_ts(ts));
    c.result["dump"] = a.dump;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string model;
  std::vector<std::string> props;
  bool no_stutter = false;
  std::string cex;
  std::size_t max_states = ExplorationConfig{}.max_states;
};

int cmd_verify(Ctx& c, const VerifyArgs& a) {
  Model m = load(c, a.model);
  TransitionSystem ts = elaborate(m, exploration(a.max_states));
  CheckOptions opts;
  opts.stutter = !a.no_stutter;
  bool all_hold = true;
  std::string cex_text;
  json props = json::array();
  for (const auto& text : a.props) {
    Formula f = compile_property(text, m);
    Verdict v = check(ts, f, opts);
    json p = {{"formula", text}, {"logic", to_string(v.logic)}, {"holds", v.satisfied}};
    c.say(std::string(v.satisfied ? "holds " : "fails ") + text);
    if (!v.satisfied) {
      all_hold = false;
      if (v.counterexample) {
        std::string lasso = format_lasso(ts, *v.counterexample);
        p["counterexample"] = lasso;
        cex_text += "# " + text + "\n" + lasso;
        if (a.cex.empty()) c.say(lasso.substr(0, lasso.size() - 1));
      }
      if (v.failing_state) {
        p["failing_state"] = ts.states[*v.failing_state].key;
        p["failing_subformula"] = v.failing_subformula;
        c.say("  initial state " + ts.states[*v.failing_state].key + " violates " + v.failing_subformula);
      }
    }
    props.push_back(std::move(p));
  }
  c.result["model"] = m.name;
  c.result["states"] = ts.states.size();
  c.result["properties"] = props;
  if (!a.cex.empty() && !cex_text.empty()) {
    write_output(c, a.cex, cex_text);
    c.result["counterexample_file"] = a.cex;
  }
  return all_hold ? kExitOk : kExitNegative;
}

// ---------------------------------------------------------------------------
// refine

struct RefineArgs {
  std::string mode = "bisim";
  std::string old_model, new_model;
  bool match_actions = false;
  std::size_t max_states = ExplorationConfig{}.max_states;
};

int cmd_refine(Ctx& c, const RefineArgs& a) {
  Model old_m = load(c, a.old_model);
  Model new_m = load(c, a.new_model);
  ExplorationConfig cfg = exploration(a.max_states);
  TransitionSystem old_ts = elaborate(old_m, cfg), new_ts = elaborate(new_m, cfg);
  ActionMatching matching = a.match_actions ? ActionMatching::by_name : ActionMatching::ignore;
  bool bisim = a.mode == "bisim";
  // Simulation: the new system must be simulated by the old one.
  const TransitionSystem& left = bisim ? old_ts : new_ts;
  const TransitionSystem& right = bisim ? new_ts : old_ts;
  RefinementReport r = bisim ? bisim_equiv(left, right, matching) : simulates(left, right, matching);

  c.result["mode"] = to_string(r.mode);
  c.result["holds"] = r.holds;
  c.result["old"] = old_m.name;
  c.result["new"] = new_m.name;
  const char* rel = bisim ? " ~ " : " <= ";
  if (r.holds) {
    json pairs = json::array();
    for (const auto& [l, rr] : r.relation) pairs.push_back({left.states[l].key, right.states[rr].key});
    c.result["relation"] = pairs;
    c.say(to_string(r.mode) + " holds: " + std::to_string(r.relation.size()) + " related pairs");
    for (const auto& [l, rr] : r.relation) c.say("  " + left.states[l].key + rel + right.states[rr].key);
    return kExitOk;
  }
  c.result["explanation"] = r.explanation;
  c.say(to_string(r.mode) + " fails: " + r.explanation);
  if (r.distinguishing) {
    const auto& [l, rr] = *r.distinguishing;
    c.result["distinguishing"] = {left.states[l].key, right.states[rr].key};
    c.say("  " + left.states[l].key + " vs " + right.states[rr].key);
  }
  if (r.move) {
    const TransitionSystem& mover = r.move->from_left ? left : right;
    c.result["unmatched_move"] = {{"side", r.move->from_left == bisim ? "old" : "new"},
                                  {"source", mover.states[r.move->source].key},
                                  {"action", r.move->action},
                                  {"target", mover.states[r.move->target].key}};
    c.say("  unmatched move " + mover.states[r.move->source].key + " --" + r.move->action + "--> " +
          mover.states[r.move->target].key);
  }
  return kExitNegative;
}

// ---------------------------------------------------------------------------
// sim

struct SimArgs {
  std::string model;
  std::uint64_t seed = 0;
  std::string resolve;
  std::vector<std::string> feeds;
  std::vector<std::string> joins;
  std::size_t steps = RunOptions{}.step_limit;
  std::string trace;
};

const ChannelDecl* find_channel(const Model& m, const std::string& name) {
  for (const auto& g : m.components)
    if (const ChannelDecl* ch = g.find_channel(name)) return ch;
  return nullptr;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

ChannelEndpoint parse_feed(Ctx& c, const Model& m, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) c.fail(kExitUsage, "usage", "--feed expects CHANNEL=@FILE or CHANNEL=v1,v2,...");
  std::string name = spec.substr(0, eq), source = spec.substr(eq + 1);
  const ChannelDecl* ch = find_channel(m, name);
  if (!ch) c.fail(kExitInput, "unresolved-name", "model '" + m.name + "' has no channel '" + name + "'");
  if (source == "@-") {
    std::shared_ptr<std::istream> in(&c.in, [](std::istream*) {});
    return ChannelEndpoint::external(name, stream_feed(in));
  }
  if (!source.empty() && source.front() == '@') {
    std::string path = source.substr(1);
    if (!fs::exists(path)) c.fail(kExitInput, "io", "cannot read feed file '" + path + "'", path);
    return ChannelEndpoint::external(name, file_feed(path));
  }
  std::vector<TypedValue> values;
  for (const auto& v : split(source, ',')) values.push_back(parse_message(v, ch->domain));
  return ChannelEndpoint::external(name, std::move(values));
}

Evaluation parse_join(Ctx& c, const Model& m, const std::string& spec) {
  Evaluation e;
  for (const auto& item : split(spec, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) c.fail(kExitUsage, "usage", "--join expects VAR=VALUE,...");
    std::string var = item.substr(0, eq);
    const VarSignature* sig = nullptr;
    for (const auto& g : m.components)
      if (!sig) sig = g.find_signature(var);
    if (!sig) c.fail(kExitInput, "unresolved-name", "model '" + m.name + "' has no variable '" + var + "'");
    e.set(var, parse_message(item.substr(eq + 1), sig->type));
  }
  return e;
}

int cmd_sim(Ctx& c, const SimArgs& a) {
  Model m = load(c, a.model);
  RunOptions opts;
  opts.step_limit = a.steps;
  opts.seed = a.seed;
  for (const auto& f : a.feeds) opts.endpoints.push_back(parse_feed(c, m, f));
  for (const auto& j : a.joins) opts.confluence.push_back(parse_join(c, m, j));

  std::optional<DivergenceResolver> resolver;
  if (a.resolve == "policy") {
    resolver = DivergenceResolver::policy();
  } else if (a.resolve == "random") {
    resolver = DivergenceResolver::random(a.seed);
  } else if (a.resolve == "prompt") {
    resolver = DivergenceResolver::prompt(c.in, c.machine ? c.err : c.out);
  } else if (a.resolve.rfind("scripted:", 0) == 0) {
    resolver = DivergenceResolver::scripted(split(a.resolve.substr(9), ','));
  } else if (!a.resolve.empty()) {
    c.fail(kExitUsage, "usage", "--resolve expects scripted:a,b | policy | random | prompt");
  }
  if (resolver) opts.resolver = &*resolver;

  Trace t = m.components.size() == 1 ? run(m.components.front(), opts) : run_parallel(m, a.seed, opts);

  json steps = json::array();
  for (const auto& s : t.steps) {
    json j = {{"key", s.key}, {"labels", s.labels}, {"timestamp", s.timestamp}};
    if (!s.action.empty()) {
      j["action"] = s.action;
      j["components"] = s.components;
    }
    steps.push_back(std::move(j));
  }
  c.result["model"] = t.model;
  c.result["steps"] = steps;
  c.result["stop"] = to_string(t.stop);
  c.result["terminal"] = t.terminal;
  c.result["confluences"] = t.confluences;
  if (!a.trace.empty()) {
    write_output(c, a.trace, write_trace(t));
    c.result["trace_file"] = a.trace;
  }
  if (!c.machine) {
    if (a.trace.empty() || a.trace == "-") {
      if (a.trace.empty()) c.out << write_trace(t);
    } else {
      c.say(t.model + ": " + std::to_string(t.steps.size() - 1) + " steps, stop " + to_string(t.stop));
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string model;
  std::string output;
  std::string backend = "json";
  bool force = false;
  std::vector<std::string> props;
  std::vector<std::string> external;
  std::string store;
};

int cmd_gen(Ctx& c, const GenArgs& a) {
  SystemGraph g = load_single(c, a.model);
  SkeletonOptions opts;
  opts.force = a.force;
  opts.external_channels = {a.external.begin(), a.external.end()};
  opts.evidence = verify_properties(g, a.props);
  // Properties already verified for this exact content count as evidence.
  VersionStore store = store_for(a.store, a.model);
  if (auto rec = store.get(graph_digest(g)))
    for (const auto& l : rec->labels)
      if (std::none_of(opts.evidence.begin(), opts.evidence.end(),
                       [&](const PropertyEvidence& e) { return e.formula == l.formula; }))
        opts.evidence.push_back({l.formula, l.holds});

  SkeletonBundle b = generate_skeleton(g, opts);
  std::string text = a.backend == "text" ? render_reference_text(b) : render_bundle_json(b);
  write_output(c, a.output, text);

  json ev = json::array();
  for (const auto& e : b.verification) ev.push_back({{"formula", e.formula}, {"satisfied", e.satisfied}});
  c.result["system"] = b.system;
  c.result["backend"] = a.backend;
  c.result["effect_hooks"] = b.effect_hooks.size();
  c.result["divergence_interfaces"] = b.divergence_interfaces.size();
  c.result["channels"] = b.channels.size();
  c.result["verification"] = ev;
  c.result["forced"] = b.forced;
  if (!a.output.empty() && a.output != "-") {
    c.result["output"] = a.output;
    c.say("wrote " + a.output + ": " + std::to_string(b.effect_hooks.size()) + " effect hooks, " +
          std::to_string(b.divergence_interfaces.size()) + " divergence interfaces, " +
          std::to_string(b.channels.size()) + " channels" + (b.forced ? " (forced)" : ""));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// promela

struct PromelaArgs {
  std::string model;
  std::string output;
  std::vector<std::string> props;
};

int cmd_promela(Ctx& c, const PromelaArgs& a) {
  Model m = load(c, a.model);
  std::vector<Formula> fs;
  for (const auto& p : a.props) fs.push_back(compile_property(p, m));
  std::string text = emit_promela(m, fs);
  write_output(c, a.output, text);
  c.result["model"] = m.name;
  c.result["properties"] = a.props;
  c.result["bytes"] = text.size();
  if (!a.output.empty() && a.output != "-") {
    c.result["output"] = a.output;
    c.say("wrote " + a.output);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// embed

struct EmbedArgs {
  std::string outer, inner, at, output;
  bool archive = false;
  std::string store;
};

int cmd_embed(Ctx& c, const EmbedArgs& a) {
  SystemGraph outer = load_single(c, a.outer);
  SystemGraph inner = load_single(c, a.inner);
  EmbedResult r = embed(inner, outer, a.at);
  write_output(c, a.output, print_graph(r.graph));

  c.result["graph"] = r.graph.name;
  c.result["module"] = r.module;
  c.result["renames"] = r.renames;
  c.result["declarators"] = r.graph.declarators.size();
  c.result["transitions"] = r.graph.transitions.size();
  c.result["digest"] = graph_digest(r.graph);
  if (!a.output.empty() && a.output != "-") {
    c.result["output"] = a.output;
    c.say("wrote " + a.output + ": " + std::to_string(r.graph.declarators.size()) + " declarators, " +
          std::to_string(r.graph.transitions.size()) + " transitions" + (r.module ? " (module)" : ""));
    for (const auto& [from, to] : r.renames) c.say("  renamed " + from + " -> " + to);
  }
  if (a.archive) {
    VersionStore store = store_for(a.store, a.output.empty() || a.output == "-" ? a.outer : a.output);
    VersionRecord o = store.archive(outer, {});
    VersionRecord i = store.archive(inner, {});
    ArchiveRequest req;
    req.kind = RecordKind::horizontal_increment;
    req.parents = {o.id, i.id};
    req.metadata["at"] = a.at;
    for (const auto& [from, to] : r.renames) req.metadata["rename:" + from] = to;
    VersionRecord rec = store.archive(r.graph, req);
    c.result["record"] = record_json(rec);
    c.say("archived " + short_id(rec.id) + " (" + to_string(rec.kind) + ")");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// version

struct VersionArgs {
  std::string model;
  std::string id;
  std::string kind = "origin";
  std::vector<std::string> parents;
  std::vector<std::string> props;
  std::string refines;
  std::string mode = "bisim";
  bool refinable = false;
  bool with_graph = false;
  std::string store;
};

std::string resolve_id(Ctx& c, const VersionStore& s, const std::string& prefix) {
  auto id = s.resolve(prefix);
  if (!id) c.fail(kExitInput, "unresolved-name", "no record with id '" + prefix + "' in " + s.root().string());
  return *id;
}

void say_record(Ctx& c, const VersionRecord& r) {
  std::string line = short_id(r.id) + "  " + to_string(r.kind) + "  " + r.timestamp;
  for (const auto& l : r.labels) line += "  [" + std::string(l.holds ? "holds" : "fails") + "] " + l.formula;
  c.say(line);
}

int cmd_version_archive(Ctx& c, const VersionArgs& a) {
  SystemGraph g = load_single(c, a.model);
  if (a.refinable) g.refinable = true;
  VersionStore store = store_for(a.store, a.model);
  ArchiveRequest req;
  req.kind = record_kind_from_string(a.kind);
  for (const auto& p : a.parents) req.parents.push_back(resolve_id(c, store, p));
  for (const auto& e : verify_properties(g, a.props)) req.labels.push_back({e.formula, e.satisfied});
  bool negative = std::any_of(req.labels.begin(), req.labels.end(), [](const PropertyLabel& l) { return !l.holds; });
  if (!a.refines.empty()) {
    SystemGraph old = load_single(c, a.refines);
    RefinementMode mode = a.mode == "bisim" ? RefinementMode::bisimulation : RefinementMode::simulation;
    RefinementReport rep = refine_check(old, g, mode);
    req.refinement = RefinementInfo{to_string(mode), rep.holds};
    negative = negative || !rep.holds;
    if (req.parents.empty() && store.get(graph_digest(old))) req.parents.push_back(graph_digest(old));
  }
  VersionRecord rec = store.archive(g, req);
  c.result["record"] = record_json(rec);
  c.result["store"] = store.root().string();
  c.say("archived " + short_id(rec.id) + " (" + to_string(rec.kind) + ") in " + store.root().string());
  for (const auto& l : rec.labels) c.say("  [" + std::string(l.holds ? "holds" : "fails") + "] " + l.formula);
  if (rec.refinement)
    c.say("  " + rec.refinement->mode + (rec.refinement->holds ? " holds" : " fails"));
  return negative ? kExitNegative : kExitOk;
}

int cmd_version_log(Ctx& c, const VersionArgs& a) {
  SystemGraph g = load_single(c, a.model);
  VersionStore store = store_for(a.store, a.model);
  json records = json::array();
  for (const auto& r : store.log(g.name)) {
    records.push_back(record_json(r));
    say_record(c, r);
  }
  c.result["lineage"] = g.name;
  c.result["records"] = records;
  return kExitOk;
}

int cmd_version_show(Ctx& c, const VersionArgs& a) {
  VersionStore store = store_for(a.store, {});
  std::string id = resolve_id(c, store, a.id);
  VersionRecord r = *store.get(id);
  c.result["record"] = record_json(r);
  if (!c.machine) c.out << render_record_json(r);
  if (a.with_graph) {
    std::string text = print_graph(store.graph(id));
    c.result["graph"] = text;
    if (!c.machine) c.out << text;
  }
  return kExitOk;
}

int cmd_version_find(Ctx& c, const VersionArgs& a) {
  VersionStore store = store_for(a.store, {});
  json records = json::array();
  for (const auto& p : a.props)
    for (const auto& r : store.with_property(p)) {
      records.push_back(record_json(r));
      say_record(c, r);
    }
  c.result["records"] = records;
  return kExitOk;
}

int cmd_version_next(Ctx& c, const VersionArgs& a) {
  SystemGraph g = load_single(c, a.model);
  if (a.refinable) g.refinable = true;
  VersionStore store = store_for(a.store, a.model);
  NextMove move = store.next_move(g);
  c.result["lineage"] = g.name;
  c.result["refinable"] = g.refinable;
  c.result["dependent"] = store.is_dependent(g.name);
  c.result["next_move"] = to_string(move);
  c.say(to_string(move));
  return kExitOk;
}

int cmd_version_verify(Ctx& c, const VersionArgs& a) {
  VersionStore store = store_for(a.store, {});
  auto problems = store.verify();
  c.result["store"] = store.root().string();
  c.result["problems"] = problems;
  for (const auto& p : problems) c.report({Severity::error, {}, "corrupt", p}, store.root().string());
  if (problems.empty()) c.say(store.root().string() + ": ok");
  return problems.empty() ? kExitOk : kExitInput;
}

// ---------------------------------------------------------------------------

std::string version_text() {
  return std::string("sysgraph ") + kToolVersion + "\nskeleton schema " + std::to_string(SkeletonBundle::kSchemaVersion) +
         "\nversion record schema " + std::to_string(kRecordSchemaVersion) + "\ncli envelope schema " +
         std::to_string(kEnvelopeSchemaVersion) + "\ntrace format ts v1\n";
}

json envelope(const Ctx& c, int code) {
  return {{"tool", "sysgraph"},
          {"tool_version", kToolVersion},
          {"schema_version", kEnvelopeSchemaVersion},
          {"verb", c.verb},
          {"exit_code", code},
          {"status", status_of(code)},
          {"result", c.result},
          {"diagnostics", c.diagnostics}};
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Ctx c{in, out, err, false, {}, json::object(), json::array()};
  CLI::App app{"Formalism-driven modelling toolchain for system graphs", "sysgraph"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--json", c.machine, "Print one machine-readable JSON envelope");
  app.add_flag("--version", show_version, "Print tool and schema versions");

  auto positive = CLI::PositiveNumber;
  std::function<int()> action;

  CheckArgs check_a;
  auto* check = app.add_subcommand("check", "Parse, validate and elaborate a model");
  check->add_option("model", check_a.model, "Model file")->required();
  check->add_option("--dump", check_a.dump, "Write the transition system (ts v1) to FILE, '-' for stdout");
  check->add_option("--max-states", check_a.max_states, "Exploration state limit")->check(positive);
  check->callback([&] { action = [&] { return cmd_check(c, check_a); }; });

  VerifyArgs verify_a;
  auto* verify = app.add_subcommand("verify", "Check LTL or CTL properties");
  verify->add_option("model", verify_a.model, "Model file")->required();
  verify->add_option("--prop", verify_a.props, "Property text (repeatable)")->required();
  verify->add_flag("--no-stutter", verify_a.no_stutter, "Do not extend finite paths with a self-loop");
  verify->add_option("--cex", verify_a.cex, "Write counterexamples to FILE");
  verify->add_option("--max-states", verify_a.max_states, "Exploration state limit")->check(positive);
  verify->callback([&] { action = [&] { return cmd_verify(c, verify_a); }; });

  RefineArgs refine_a;
  auto* refine = app.add_subcommand("refine", "Check a refinement between two models");
  refine->add_option("--mode", refine_a.mode, "bisim or sim")->check(CLI::IsMember({"bisim", "sim"}));
  refine->add_option("old", refine_a.old_model, "Earlier model")->required();
  refine->add_option("new", refine_a.new_model, "Refined model")->required();
  refine->add_flag("--match-actions", refine_a.match_actions, "Require equal action names");
  refine->add_option("--max-states", refine_a.max_states, "Exploration state limit")->check(positive);
  refine->callback([&] { action = [&] { return cmd_refine(c, refine_a); }; });

  SimArgs sim_a;
  auto* sim = app.add_subcommand("sim", "Execute a model");
  sim->add_option("model", sim_a.model, "Model file")->required();
  sim->add_option("--seed", sim_a.seed, "Scheduler and random resolver seed");
  sim->add_option("--resolve", sim_a.resolve, "scripted:a,b | policy | random | prompt");
  sim->add_option("--feed", sim_a.feeds, "CHANNEL=@FILE, CHANNEL=@- or CHANNEL=v1,v2 (repeatable)");
  sim->add_option("--join", sim_a.joins, "Confluence evaluation VAR=VALUE,... (repeatable)");
  sim->add_option("--steps", sim_a.steps, "Step limit")->check(positive);
  sim->add_option("--trace", sim_a.trace, "Write the trace to FILE");
  sim->callback([&] { action = [&] { return cmd_sim(c, sim_a); }; });

  GenArgs gen_a;
  auto* gen = app.add_subcommand("gen", "Generate a skeleton bundle");
  gen->add_option("model", gen_a.model, "Model file")->required();
  gen->add_option("-o,--output", gen_a.output, "Output file, stdout when omitted");
  gen->add_option("--backend", gen_a.backend, "json or text")->check(CLI::IsMember({"json", "text"}));
  gen->add_flag("--force", gen_a.force, "Generate without passing verification evidence");
  gen->add_option("--prop", gen_a.props, "Property to verify first (repeatable)");
  gen->add_option("--external", gen_a.external, "Channel to expose as external (repeatable)");
  gen->add_option("--store", gen_a.store, "Version store directory");
  gen->callback([&] { action = [&] { return cmd_gen(c, gen_a); }; });

  PromelaArgs promela_a;
  auto* promela = app.add_subcommand("promela", "Emit Promela");
  promela->add_option("model", promela_a.model, "Model file")->required();
  promela->add_option("-o,--output", promela_a.output, "Output file, stdout when omitted");
  promela->add_option("--prop", promela_a.props, "LTL property to embed (repeatable)");
  promela->callback([&] { action = [&] { return cmd_promela(c, promela_a); }; });

  EmbedArgs embed_a;
  auto* emb = app.add_subcommand("embed", "Embed one graph at a declarator of another");
  emb->add_option("outer", embed_a.outer, "Outer model")->required();
  emb->add_option("inner", embed_a.inner, "Inner model")->required();
  emb->add_option("--at", embed_a.at, "Declarator of the outer graph")->required();
  emb->add_option("-o,--output", embed_a.output, "Output file, stdout when omitted");
  emb->add_flag("--archive", embed_a.archive, "Archive outer, inner and the result");
  emb->add_option("--store", embed_a.store, "Version store directory");
  emb->callback([&] { action = [&] { return cmd_embed(c, embed_a); }; });

  VersionArgs ver_a;
  auto* ver = app.add_subcommand("version", "Archive and query graph versions");
  ver->require_subcommand(1);
  ver->add_option("--store", ver_a.store, "Version store directory");
  auto* archive = ver->add_subcommand("archive", "Archive a model");
  archive->add_option("model", ver_a.model, "Model file")->required();
  archive->add_option("--kind", ver_a.kind, "Record kind")
      ->check(CLI::IsMember({"origin", "refinement", "horizontal-increment", "vertical-increment"}));
  archive->add_option("--parent", ver_a.parents, "Parent id or prefix (repeatable)");
  archive->add_option("--prop", ver_a.props, "Property to verify and label (repeatable)");
  archive->add_option("--refines", ver_a.refines, "Earlier model this one refines");
  archive->add_option("--mode", ver_a.mode, "bisim or sim")->check(CLI::IsMember({"bisim", "sim"}));
  archive->add_flag("--refinable", ver_a.refinable, "Mark the graph refinable");
  archive->add_option("--store", ver_a.store, "Version store directory");
  archive->callback([&] { action = [&] { return cmd_version_archive(c, ver_a); }; });
  auto* log = ver->add_subcommand("log", "History of a model's lineage");
  log->add_option("model", ver_a.model, "Model file")->required();
  log->add_option("--store", ver_a.store, "Version store directory");
  log->callback([&] { action = [&] { return cmd_version_log(c, ver_a); }; });
  auto* show = ver->add_subcommand("show", "Print a record");
  show->add_option("id", ver_a.id, "Record id or unique prefix")->required();
  show->add_flag("--graph", ver_a.with_graph, "Also print the archived graph");
  show->add_option("--store", ver_a.store, "Version store directory");
  show->callback([&] { action = [&] { return cmd_version_show(c, ver_a); }; });
  auto* find = ver->add_subcommand("find", "Records labelled with a property");
  find->add_option("--prop", ver_a.props, "Formula text (repeatable)")->required();
  find->add_option("--store", ver_a.store, "Version store directory");
  find->callback([&] { action = [&] { return cmd_version_find(c, ver_a); }; });
  auto* next = ver->add_subcommand("next", "Classify the next move");
  next->add_option("model", ver_a.model, "Model file")->required();
  next->add_flag("--refinable", ver_a.refinable, "Treat the graph as refinable");
  next->add_option("--store", ver_a.store, "Version store directory");
  next->callback([&] { action = [&] { return cmd_version_next(c, ver_a); }; });
  auto* vverify = ver->add_subcommand("verify", "Check digests and parent links");
  vverify->add_option("--store", ver_a.store, "Version store directory");
  vverify->callback([&] { action = [&] { return cmd_version_verify(c, ver_a); }; });

  int code = kExitOk;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    for (const auto* sub : app.get_subcommands()) {
      c.verb = sub->get_name();
      for (const auto* leaf : sub->get_subcommands()) c.verb += " " + leaf->get_name();
    }
    if (show_version && !action) {
      c.verb = "version-info";
      c.result = {{"tool_version", kToolVersion},
                  {"skeleton_schema", SkeletonBundle::kSchemaVersion},
                  {"record_schema", kRecordSchemaVersion},
                  {"envelope_schema", kEnvelopeSchemaVersion},
                  {"trace_format", "ts v1"}};
      if (!c.machine) out << version_text();
    } else if (!action) {
      if (!c.machine) out << app.help();
      c.fail(kExitUsage, "usage", "a verb is required");
    } else {
      code = action();
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    code = kExitUsage;
    c.diagnostics.push_back({{"severity", "error"}, {"code", "usage"}, {"message", e.what()}, {"file", ""}});
    if (!c.machine) err << "sysgraph: " << e.what() << "\nRun with --help for usage.\n";
  } catch (const Failure& f) {
    code = f.code;
  } catch (const ModelError& e) {
    code = e.code() == "usage" ? kExitUsage : kExitInput;
    for (const auto& d : e.diagnostics()) c.report(d, "");
  } catch (const std::exception& e) {
    code = kExitInput;
    c.report({Severity::error, {}, "internal", e.what()}, "");
  }
  if (c.machine) out << envelope(c, code).dump(2) << '\n';
  return code;
}

}  // namespace sysgraph::cli
