#include "sysgraph/runtime.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "sysgraph/frontend.hpp"

namespace sysgraph {

// ---------------------------------------------------------------------------
// Divergences

std::vector<Divergence> detect_divergences(const SystemGraph& g) {
  if (auto diags = validate_graph(g); has_errors(diags)) throw ModelError(diags);
  ConditionalTS cts;
  try {
    cts = interpret_graph(g);
  } catch (const ModelError& e) {
    if (e.code() != "initial-guard") throw;
    return {};  // nothing is reachable
  }
  std::map<std::string, std::vector<Evaluation>> reachable;
  for (const auto& s : cts.states) reachable[s.declarators.front()].push_back(s.local);

  std::vector<Divergence> out;
  for (const auto& d : g.declarators) {
    const auto& evals = reachable[d.name];
    if (evals.empty()) continue;
    std::vector<std::size_t> edges;
    for (std::size_t i = 0; i < g.transitions.size(); ++i)
      if (g.transitions[i].source == d.name) edges.push_back(i);
    std::vector<std::vector<bool>> truth;
    for (auto e : edges) {
      std::vector<bool> row;
      for (const auto& v : evals) row.push_back(guard_sat(v, g.transitions[e].guard));
      truth.push_back(std::move(row));
    }
    // a ⟹ b over the reachable evaluations, with a satisfiable somewhere.
    auto implies = [&](std::size_t a, std::size_t b) {
      bool sat = false;
      for (std::size_t k = 0; k < evals.size(); ++k) {
        if (truth[a][k] && !truth[b][k]) return false;
        sat = sat || truth[a][k];
      }
      return sat;
    };
    for (std::size_t i = 0; i < edges.size(); ++i)
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        if (g.transitions[edges[i]].action.str() == g.transitions[edges[j]].action.str()) continue;
        if (implies(i, j) || implies(j, i)) out.push_back({d.name, edges[i], edges[j]});
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Effects

void EffectRegistry::on(const std::string& action, EffectHandler handler) { handlers_[action] = std::move(handler); }

const EffectHandler* EffectRegistry::find(const std::string& action) const {
  if (auto it = handlers_.find(action); it != handlers_.end()) return &it->second;
  if (auto it = handlers_.find(action_match_key(action)); it != handlers_.end()) return &it->second;
  return nullptr;
}

std::vector<std::string> EffectRegistry::actions() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : handlers_) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------
// Resolvers

DivergenceResolver DivergenceResolver::scripted(std::vector<std::string> choices) {
  DivergenceResolver r(Strategy::scripted);
  r.script_ = std::move(choices);
  return r;
}

DivergenceResolver DivergenceResolver::policy() { return DivergenceResolver(Strategy::policy); }

DivergenceResolver DivergenceResolver::random(std::uint64_t seed) {
  DivergenceResolver r(Strategy::random);
  r.rng_.seed(seed);
  return r;
}

DivergenceResolver DivergenceResolver::prompt(std::istream& in, std::ostream& out) {
  DivergenceResolver r(Strategy::prompt);
  r.in_ = &in;
  r.out_ = &out;
  return r;
}

namespace {

std::optional<std::size_t> match_choice(const std::string& entry, const std::vector<Choice>& options) {
  for (std::size_t i = 0; i < options.size(); ++i)
    if (options[i].action == entry) return i;
  if (!entry.empty() && std::all_of(entry.begin(), entry.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::size_t i = std::stoul(entry);
    if (i < options.size()) return i;
  }
  return std::nullopt;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string describe(const std::vector<Choice>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) out += (i ? ", " : "") + options[i].action;
  return out;
}

}  // namespace

std::size_t DivergenceResolver::choose(const std::string& where, const std::vector<Choice>& options) {
  if (options.empty()) throw ModelError("divergence", "no alternatives at " + where);
  switch (strategy_) {
    case Strategy::scripted: {
      if (cursor_ >= script_.size())
        throw ModelError("divergence", "script exhausted at " + where + " (choices: " + describe(options) + ")");
      const std::string& entry = script_[cursor_++];
      if (auto i = match_choice(entry, options)) return *i;
      throw ModelError("divergence",
                       "scripted choice '" + entry + "' is not enabled at " + where + " (choices: " + describe(options) + ")");
    }
    case Strategy::policy: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < options.size(); ++i)
        if (std::tie(options[i].component, options[i].edge) < std::tie(options[best].component, options[best].edge)) best = i;
      return best;
    }
    case Strategy::random: return std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng_);
    case Strategy::prompt: {
      *out_ << "divergence at " << where << ":\n";
      for (std::size_t i = 0; i < options.size(); ++i)
        *out_ << "  [" << i << "] " << options[i].action << " -> " << options[i].target << '\n';
      *out_ << "> " << std::flush;
      std::string line;
      while (std::getline(*in_, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (auto i = match_choice(line, options)) return *i;
        *out_ << "not an option: " << line << "\n> " << std::flush;
      }
      throw ModelError("divergence", "input ended before a choice was made at " + where);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Feeds and endpoints

TypedValue parse_message(const std::string& raw, const VarType& domain) {
  std::string text = trim(raw);
  std::optional<TypedValue> v;
  switch (domain.kind) {
    case ValueKind::boolean:
      if (text == "true") v = TypedValue(true);
      if (text == "false") v = TypedValue(false);
      break;
    case ValueKind::integer: {
      std::istringstream is(text);
      std::int64_t i;
      if (is >> i && is.peek() == std::char_traits<char>::eof()) v = TypedValue(i);
      break;
    }
    case ValueKind::symbol: v = TypedValue::symbol(text); break;
  }
  if (!v || !domain.contains(*v)) throw ModelError("range", "message '" + text + "' is not a value of " + domain.str());
  return *v;
}

namespace {

class ValuesFeed : public MessageFeed {
 public:
  explicit ValuesFeed(std::vector<TypedValue> v) : values_(std::move(v)) {}
  std::optional<TypedValue> next(const VarType&) override {
    if (pos_ >= values_.size()) return std::nullopt;
    return values_[pos_++];
  }

 private:
  std::vector<TypedValue> values_;
  std::size_t pos_ = 0;
};

class StreamFeed : public MessageFeed {
 public:
  explicit StreamFeed(std::shared_ptr<std::istream> in) : in_(std::move(in)) {}
  std::optional<TypedValue> next(const VarType& domain) override {
    std::string line;
    while (std::getline(*in_, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (trim(line).empty()) continue;
      return parse_message(line, domain);
    }
    in_->clear();  // a loopback stream may be written to again later
    return std::nullopt;
  }

 private:
  std::shared_ptr<std::istream> in_;
};

}  // namespace

std::shared_ptr<MessageFeed> values_feed(std::vector<TypedValue> values) {
  return std::make_shared<ValuesFeed>(std::move(values));
}

std::shared_ptr<MessageFeed> stream_feed(std::shared_ptr<std::istream> in) {
  return std::make_shared<StreamFeed>(std::move(in));
}

std::shared_ptr<MessageFeed> file_feed(const std::string& path) {
  auto in = std::make_shared<std::ifstream>(path);
  if (!*in) throw ModelError("io", "cannot open feed file '" + path + "'");
  return stream_feed(std::move(in));
}

ChannelEndpoint ChannelEndpoint::internal(std::string channel) { return {std::move(channel), Mode::internal, nullptr}; }

ChannelEndpoint ChannelEndpoint::external(std::string channel, std::shared_ptr<MessageFeed> feed) {
  return {std::move(channel), Mode::external, std::move(feed)};
}

ChannelEndpoint ChannelEndpoint::external(std::string channel, std::vector<TypedValue> values) {
  return external(std::move(channel), values_feed(std::move(values)));
}

// ---------------------------------------------------------------------------
// Engine

std::string to_string(Trace::Stop stop) {
  switch (stop) {
    case Trace::Stop::terminal: return "terminal";
    case Trace::Stop::deadlock: return "deadlock";
    case Trace::Stop::step_limit: return "step-limit";
  }
  return "";
}

namespace {

class Engine {
 public:
  Engine(const Model& m, const RunOptions& opts, bool parallel, std::uint64_t seed)
      : model_(m), opts_(opts), parallel_(parallel), cs_(channel_system(m)), rng_(seed) {
    for (const auto& e : opts.endpoints) {
      const ChannelDecl* decl = nullptr;
      for (const auto& c : cs_.channels)
        if (c.name == e.channel) decl = &c;
      if (!decl) throw ModelError("unresolved-name", "endpoint names unknown channel '" + e.channel + "'");
      if (e.mode != ChannelEndpoint::Mode::external) continue;
      if (decl->synchronous())
        throw ModelError("capacity", "external channel '" + e.channel + "' needs a buffer (capacity >= 1)");
      if (!e.feed) throw ModelError("unresolved-name", "external channel '" + e.channel + "' has no feed");
      external_[e.channel] = {decl, e.feed};
    }
    for (const auto& p : opts.confluence) {
      Join j{p, {}, false};
      for (std::size_t k = 0; k < m.components.size(); ++k) {
        const auto& g = m.components[k];
        for (const auto& [x, _] : p)
          if (g.find_signature(x)) j.participants.insert(k);
      }
      for (const auto& [x, _] : p) {
        bool known = std::any_of(m.components.begin(), m.components.end(),
                                 [&](const SystemGraph& g) { return g.find_signature(x) != nullptr; });
        if (!known) throw ModelError("unresolved-name", "confluence point names unknown variable '" + x + "'");
      }
      joins_.push_back(std::move(j));
    }
    std::size_t offset = 0;
    for (const auto& c : cs_.components) {
      offsets_.push_back(offset);
      offset += c.parts.size();
    }
  }

  Trace go() {
    trace_.model = model_.name;
    cur_ = initial_states(cs_).front();
    for (const auto& [name, _] : external_) cur_.channels[name].clear();
    top_up();
    record("", "", {});
    for (;;) {
      update_joins();
      if (all_terminal()) {
        trace_.terminal = true;
        trace_.stop = Trace::Stop::terminal;
        break;
      }
      if (tick_ >= opts_.step_limit) {
        trace_.stop = Trace::Stop::step_limit;
        break;
      }
      auto steps = successors(cs_, cur_);
      auto eligible = filter(steps);
      if (eligible.empty() && !steps.empty()) {
        release_stuck_joins();
        eligible = filter(steps);
      }
      if (eligible.empty()) {
        if (auto ch = waiting_on()) {
          if (++tick_ >= opts_.step_limit)
            throw ModelError("waiting", "step limit of " + std::to_string(opts_.step_limit) +
                                            " reached while waiting on channel '" + *ch + "'");
          // Deliveries from outside are recorded as environment steps.
          if (auto fed = top_up(); !fed.empty()) {
            std::string action = "feed:";
            for (std::size_t i = 0; i < fed.size(); ++i) action += (i ? "," : "") + fed[i];
            record(action, "", {});
          }
          continue;
        }
        trace_.stop = Trace::Stop::deadlock;
        break;
      }
      fire(*eligible[pick(eligible)]);
    }
    return std::move(trace_);
  }

 private:
  struct External {
    const ChannelDecl* decl = nullptr;
    std::shared_ptr<MessageFeed> feed;
  };
  struct Join {
    Evaluation point;
    std::set<std::size_t> participants;
    bool released = false;
  };

  const Model& model_;
  const RunOptions& opts_;
  bool parallel_;
  ChannelSystem cs_;
  std::mt19937_64 rng_;
  std::map<std::string, External> external_;
  std::vector<Join> joins_;
  std::vector<std::size_t> offsets_;
  GlobalState cur_;
  std::uint64_t tick_ = 0;
  Trace trace_;

  std::vector<std::string> top_up() {
    std::vector<std::string> fed;
    for (auto& [name, ext] : external_) {
      auto& q = cur_.channels[name];
      std::size_t before = q.size();
      while (q.size() < ext.decl->capacity) {
        auto v = ext.feed->next(ext.decl->domain);
        if (!v) break;
        if (!ext.decl->domain.contains(*v))
          throw ModelError("range", "fed value " + v->str() + " is not in the domain of channel '" + name + "'");
        q.push_back(*v);
      }
      if (q.size() != before) fed.push_back(name);
    }
    return fed;
  }

  bool all_terminal() const {
    for (std::size_t k = 0; k < cs_.components.size(); ++k) {
      const SystemGraph& g = model_.components[k];
      for (std::size_t p = 0; p < cs_.components[k].parts.size(); ++p)
        if (!g.is_terminal(cur_.declarators[offsets_[k] + p])) return false;
    }
    return true;
  }

  bool arrived(const Join& j, std::size_t k) const {
    const SystemGraph& g = model_.components[k];
    for (const auto& [x, v] : j.point)
      if (g.find_signature(x) && cur_.merged.at(x) != v) return false;
    return true;
  }

  bool blocked(std::size_t k) const {
    for (const auto& j : joins_)
      if (!j.released && j.participants.count(k) && arrived(j, k)) return true;
    return false;
  }

  void update_joins() {
    for (auto& j : joins_) {
      if (j.released) continue;
      bool all = std::all_of(j.participants.begin(), j.participants.end(), [&](std::size_t k) { return arrived(j, k); });
      if (all) release(j);
    }
  }

  void release_stuck_joins() {
    for (auto& j : joins_)
      if (!j.released && std::any_of(j.participants.begin(), j.participants.end(), [&](std::size_t k) { return arrived(j, k); }))
        release(j);
  }

  void release(Join& j) {
    j.released = true;
    trace_.confluences.push_back(trace_.steps.size() - 1);
  }

  std::vector<const Step*> filter(const std::vector<Step>& steps) const {
    std::vector<const Step*> out;
    for (const auto& s : steps)
      if (std::none_of(s.moves.begin(), s.moves.end(), [&](const auto& mv) { return blocked(mv.first); }))
        out.push_back(&s);
    return out;
  }

  std::optional<std::string> waiting_on() const {
    for (std::size_t k = 0; k < cs_.components.size(); ++k) {
      const ConditionalTS& c = cs_.components[k];
      CondState local;
      local.declarators.assign(cur_.declarators.begin() + offsets_[k],
                               cur_.declarators.begin() + offsets_[k] + c.parts.size());
      for (const auto& v : c.local_vars) local.local.set(v.name, cur_.merged.at(v.name));
      auto idx = c.find(local);
      if (!idx) continue;
      for (auto t : c.outgoing(*idx)) {
        const Action& a = c.transitions[t].action;
        if (a.is_communication() && external_.count(a.channel) && guard_sat(cur_.merged, c.transitions[t].guard))
          return a.channel;
      }
    }
    return std::nullopt;
  }

  Choice choice_of(const Step& s) const {
    auto [k, t] = s.moves.front();
    const CondTransition& ct = cs_.components[k].transitions[t];
    const Transition& gt = model_.components[k].transitions[ct.edge];
    return {s.action, cs_.components[k].name, gt.source, gt.target, ct.edge};
  }

  std::size_t pick(const std::vector<const Step*>& steps) {
    std::vector<std::size_t> pool(steps.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    if (parallel_) {
      std::vector<std::size_t> comps;
      for (const auto* s : steps) comps.push_back(s->moves.front().first);
      std::sort(comps.begin(), comps.end());
      comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
      std::size_t k = comps[std::uniform_int_distribution<std::size_t>(0, comps.size() - 1)(rng_)];
      pool.clear();
      for (std::size_t i = 0; i < steps.size(); ++i)
        if (steps[i]->moves.front().first == k) pool.push_back(i);
    }
    if (pool.size() == 1) return pool.front();
    std::vector<Choice> options;
    for (auto i : pool) options.push_back(choice_of(*steps[i]));
    std::string where = options.front().component + "." + options.front().source;
    if (opts_.resolver) return pool[opts_.resolver->choose(where, options)];
    if (parallel_) return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng_)];
    throw ModelError("divergence", "divergence at " + where + " (choices: " + describe(options) + ") and no resolver");
  }

  void fire(const Step& s) {
    std::string guard;
    std::vector<std::string> comps;
    for (auto [k, t] : s.moves) {
      const CondTransition& ct = cs_.components[k].transitions[t];
      guard += (guard.empty() ? "" : "; ") + model_.components[k].transitions[ct.edge].guard.str();
      comps.push_back(cs_.components[k].name);
    }
    cur_ = s.target;
    ++tick_;
    top_up();
    record(s.action, guard, comps);
    if (!opts_.effects) return;
    const EffectHandler* h = opts_.effects->find(s.action);
    if (!h) return;
    const Evaluation snapshot = cur_.merged;
    EffectContext ctx{s.action, guard, comps, trace_.steps.size() - 1, tick_};
    try {
      (*h)(snapshot, ctx);
    } catch (const std::exception& e) {
      throw ModelError("effect", "effect of '" + s.action + "' failed: " + e.what());
    } catch (...) {
      throw ModelError("effect", "effect of '" + s.action + "' failed");
    }
  }

  void record(std::string action, std::string guard, std::vector<std::string> comps) {
    TraceStep st;
    st.key = cur_.key();
    st.state = cur_;
    st.labels = global_labels(cs_, cur_);
    st.action = std::move(action);
    st.guard = std::move(guard);
    st.components = std::move(comps);
    st.timestamp = tick_;
    trace_.steps.push_back(std::move(st));
  }
};

}  // namespace

Trace run(const SystemGraph& g, const RunOptions& opts) {
  Model m{g.name, {g}, {}};
  return Engine(m, opts, false, opts.seed).go();
}

Trace run(const SystemGraph& g, const EffectRegistry& effects, DivergenceResolver& resolver,
          std::vector<ChannelEndpoint> endpoints, std::size_t step_limit) {
  RunOptions o;
  o.effects = &effects;
  o.resolver = &resolver;
  o.endpoints = std::move(endpoints);
  o.step_limit = step_limit;
  return run(g, o);
}

Trace run_parallel(const Model& m, std::uint64_t seed, const RunOptions& opts) {
  return Engine(m, opts, true, seed).go();
}

bool trace_conformance(const Trace& t, const TransitionSystem& ts) {
  if (t.steps.empty()) return false;
  auto prev = ts.find(t.steps.front().key);
  if (!prev || !ts.is_initial(*prev)) return false;
  for (std::size_t i = 1; i < t.steps.size(); ++i) {
    auto next = ts.find(t.steps[i].key);
    if (!next) return false;
    bool ok = false;
    for (auto e : ts.outgoing(*prev)) {
      const auto& tr = ts.transitions[e];
      if (tr.target == *next && tr.action == t.steps[i].action) ok = true;
    }
    if (!ok) return false;
    prev = next;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Trace files

void write_trace(std::ostream& os, const Trace& t) {
  os << "ts v1\n";
  if (!t.model.empty()) os << "model " << t.model << '\n';
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    os << "state " << i << ' ' << t.steps[i].key;
    for (const auto& l : t.steps[i].labels) os << ' ' << l;
    os << '\n';
  }
  if (!t.steps.empty()) os << "init 0\n";
  for (std::size_t i = 1; i < t.steps.size(); ++i) os << "trans " << i - 1 << ' ' << t.steps[i].action << ' ' << i << '\n';
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    os << "time " << i << ' ' << t.steps[i].timestamp << '\n';
    if (!t.steps[i].guard.empty()) os << "guard " << i << ' ' << t.steps[i].guard << '\n';
    if (!t.steps[i].components.empty()) {
      os << "by " << i;
      for (const auto& c : t.steps[i].components) os << ' ' << c;
      os << '\n';
    }
  }
  for (auto j : t.confluences) os << "join " << j << '\n';
  os << "stop " << to_string(t.stop) << '\n';
}

std::string write_trace(const Trace& t) {
  std::ostringstream os;
  write_trace(os, t);
  return os.str();
}

Trace read_trace(std::istream& is) {
  Trace t;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  auto bad = [&](const std::string& msg) {
    throw ModelError({{Severity::error, {lineno, 1, 0}, "syntax", msg}});
  };
  auto step_at = [&](std::size_t i) -> TraceStep& {
    if (i >= t.steps.size()) bad("step " + std::to_string(i) + " is not declared");
    return t.steps[i];
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (!header) {
      std::string v;
      if (word != "ts" || !(ls >> v) || v != "v1") bad("expected header 'ts v1'");
      header = true;
      continue;
    }
    std::size_t i = 0;
    if (word == "model") {
      ls >> t.model;
    } else if (word == "state") {
      TraceStep st;
      if (!(ls >> i >> st.key) || i != t.steps.size()) bad("expected 'state <next id> <key> <labels...>'");
      std::string l;
      while (ls >> l) st.labels.insert(l);
      t.steps.push_back(std::move(st));
    } else if (word == "init") {
      if (!(ls >> i) || i != 0) bad("a trace starts at state 0");
    } else if (word == "trans") {
      std::size_t dst;
      std::string action;
      if (!(ls >> i >> action >> dst) || dst != i + 1) bad("expected 'trans <i> <action> <i+1>'");
      step_at(dst).action = action;
    } else if (word == "time") {
      std::uint64_t ts;
      if (!(ls >> i >> ts)) bad("expected 'time <step> <tick>'");
      step_at(i).timestamp = ts;
    } else if (word == "guard") {
      if (!(ls >> i)) bad("expected 'guard <step> <text>'");
      std::string rest;
      std::getline(ls, rest);
      step_at(i).guard = trim(rest);
    } else if (word == "by") {
      if (!(ls >> i)) bad("expected 'by <step> <components...>'");
      auto& st = step_at(i);
      std::string c;
      while (ls >> c) st.components.push_back(c);
    } else if (word == "join") {
      if (!(ls >> i)) bad("expected 'join <step>'");
      t.confluences.push_back(i);
    } else if (word == "stop") {
      std::string r;
      ls >> r;
      if (r == "terminal") t.stop = Trace::Stop::terminal;
      else if (r == "deadlock") t.stop = Trace::Stop::deadlock;
      else if (r == "step-limit") t.stop = Trace::Stop::step_limit;
      else bad("unknown stop reason '" + r + "'");
      t.terminal = t.stop == Trace::Stop::terminal;
    } else {
      bad("unknown record '" + word + "'");
    }
  }
  if (!header) bad("missing header 'ts v1'");
  return t;
}

Trace read_trace(const std::string& text) {
  std::istringstream is(text);
  return read_trace(is);
}

}  // namespace sysgraph
