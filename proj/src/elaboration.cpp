#include "sysgraph/elaboration.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "sysgraph/frontend.hpp"

namespace sysgraph {

Evaluation initial_state(const SystemGraph& g) {
  const StateDeclarator* d = g.find_declarator(g.initial);
  if (!d) throw ModelError("missing-initial", "system '" + g.name + "' has no initial declarator");
  Evaluation v = eval_override(default_evaluation(g.signatures), d->partial);
  if (!guard_sat(v, g.initial_guard))
    throw ModelError("initial-guard", "initial guard '" + g.initial_guard.str() + "' of '" + g.name +
                                          "' does not hold in " + v.str());
  return v;
}

Evaluation infer_successor(const Evaluation& current, const StateDeclarator& target) {
  return eval_override(current, target.partial);
}

std::optional<std::size_t> ConditionalTS::find(const CondState& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& ConditionalTS::outgoing(std::size_t state) const {
  static const std::vector<std::size_t> none;
  return state < out_.size() ? out_[state] : none;
}

void ConditionalTS::reindex() {
  index_.clear();
  out_.assign(states.size(), {});
  for (std::size_t i = 0; i < states.size(); ++i) index_.emplace(states[i], i);
  for (std::size_t i = 0; i < transitions.size(); ++i) out_[transitions[i].source].push_back(i);
}

namespace {

std::vector<std::string> names_of(const std::vector<VarSignature>& sigs) {
  std::vector<std::string> out;
  for (const auto& s : sigs) out.push_back(s.name);
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Breadth-first bookkeeping shared by the lowering passes.
class Frontier {
 public:
  explicit Frontier(const ExplorationConfig& cfg) : cfg_(cfg) {}

  // False when the state budget is exhausted and truncation is enabled.
  bool admit(std::size_t count) {
    if (count < cfg_.max_states) return true;
    limit("state limit of " + std::to_string(cfg_.max_states) + " reached");
    return false;
  }
  bool expand(std::size_t depth) {
    if (depth < cfg_.max_depth) return true;
    limit("depth limit of " + std::to_string(cfg_.max_depth) + " reached");
    return false;
  }
  bool truncated() const { return truncated_; }

 private:
  void limit(const std::string& what) {
    if (cfg_.on_limit == ExplorationConfig::OnLimit::error) throw ModelError("limit", "exploration " + what);
    truncated_ = true;
  }

  const ExplorationConfig& cfg_;
  bool truncated_ = false;
};

// Whether `g` can hold for some value of the shared variables it reads.
bool satisfiable_over_shared(const Guard& g, const Evaluation& local, const std::vector<VarSignature>& shared) {
  std::vector<VarSignature> read;
  auto vars = g.variables();
  for (const auto& s : shared)
    if (vars.count(s.name)) read.push_back(s);
  if (read.empty()) return guard_sat(local, g);
  for (const auto& assignment : enumerate_evaluations(read)) {
    Evaluation v = local;
    for (const auto& [k, x] : assignment) v.set(k, x);
    if (guard_sat(v, g)) return true;
  }
  return false;
}

void split_pins(const Evaluation& pins, const std::vector<std::string>& shared, Evaluation& local_out,
                Evaluation& shared_out) {
  for (const auto& [k, v] : pins) (contains(shared, k) ? shared_out : local_out).set(k, v);
}

}  // namespace

ConditionalTS interpret_graph(const SystemGraph& g, const std::vector<std::string>& shared,
                              const ExplorationConfig& cfg) {
  auto diags = validate_graph(g);
  if (has_errors(diags)) throw ModelError(diags);

  ConditionalTS cts;
  cts.name = g.name;
  cts.parts = {g.name};
  for (const auto& s : g.signatures) (contains(shared, s.name) ? cts.shared_vars : cts.local_vars).push_back(s);
  cts.channels = g.channels;
  cts.initial_guard = g.initial_guard;
  cts.propositions = g.propositions;
  cts.labeling = g.labeling;
  cts.atomic_propositions = atomic_propositions(g);

  const StateDeclarator* init = g.find_declarator(g.initial);
  Evaluation v0 = eval_override(default_evaluation(g.signatures), init->partial);
  if (cts.shared_vars.empty() && !guard_sat(v0, g.initial_guard)) initial_state(g);  // throws
  Evaluation local0 = v0.restrict_to(names_of(cts.local_vars));
  Evaluation unused;
  split_pins(init->partial, shared, unused, cts.initial_shared);

  Frontier frontier(cfg);
  std::map<CondState, std::size_t> seen;
  std::vector<std::size_t> depth;
  auto intern = [&](CondState s, std::size_t d) -> std::optional<std::size_t> {
    if (auto it = seen.find(s); it != seen.end()) return it->second;
    if (!frontier.admit(cts.states.size())) return std::nullopt;
    seen.emplace(s, cts.states.size());
    cts.states.push_back(std::move(s));
    depth.push_back(d);
    return cts.states.size() - 1;
  };

  cts.initials.push_back(*intern({{g.initial}, local0}, 0));
  for (std::size_t i = 0; i < cts.states.size(); ++i) {
    const CondState src = cts.states[i];
    bool has_moves = false;
    for (std::size_t k = 0; k < g.transitions.size(); ++k) {
      const Transition& t = g.transitions[k];
      if (t.source != src.declarators.front()) continue;
      if (!satisfiable_over_shared(t.guard, src.local, cts.shared_vars)) continue;
      if (!has_moves && !frontier.expand(depth[i])) break;
      has_moves = true;
      const StateDeclarator* target = g.find_declarator(t.target);
      Evaluation pin_local, pin_shared;
      split_pins(target->partial, shared, pin_local, pin_shared);

      std::vector<std::optional<TypedValue>> branches{std::nullopt};
      if (t.action.kind == Action::Kind::receive) {
        branches.clear();
        for (const auto& v : g.find_channel(t.action.channel)->domain.values()) branches.emplace_back(v);
      }
      for (const auto& received : branches) {
        Evaluation local = src.local;
        Evaluation writes;
        if (received) {
          if (contains(shared, t.action.target))
            writes.set(t.action.target, *received);
          else
            local.set(t.action.target, *received);
        }
        for (const auto& [x, v] : pin_local) local.set(x, v);
        for (const auto& [x, v] : pin_shared) writes.set(x, v);
        auto dst = intern({{t.target}, std::move(local)}, depth[i] + 1);
        if (!dst) continue;
        cts.transitions.push_back({i, t.guard, t.action, *dst, std::move(writes), received, 0, k});
      }
    }
  }
  cts.truncated = frontier.truncated();
  cts.reindex();
  return cts;
}

namespace {

void merge_channels(std::vector<ChannelDecl>& into, const std::vector<ChannelDecl>& from) {
  for (const auto& c : from) {
    auto it = std::find_if(into.begin(), into.end(), [&](const ChannelDecl& d) { return d.name == c.name; });
    if (it == into.end())
      into.push_back(c);
    else if (!(*it == c))
      throw ModelError("capacity", "channel '" + c.name + "' is declared differently by two components");
  }
}

void merge_signatures(std::vector<VarSignature>& into, const std::vector<VarSignature>& from) {
  for (const auto& s : from) {
    auto it = std::find_if(into.begin(), into.end(), [&](const VarSignature& d) { return d.name == s.name; });
    if (it == into.end())
      into.push_back(s);
    else if (!(*it == s))
      throw ModelError("kind-mismatch", "shared variable '" + s.name + "' is declared with conflicting kinds");
  }
}

void check_disjoint_locals(const std::vector<ConditionalTS>& components) {
  std::map<std::string, std::string> owner;
  for (const auto& c : components)
    for (const auto& s : c.local_vars)
      if (auto [it, fresh] = owner.emplace(s.name, c.name); !fresh)
        throw ModelError("overlap", "variable '" + s.name + "' is owned by both '" + it->second + "' and '" +
                                        c.name + "'");
}

Evaluation merge_initial_shared(const std::vector<ConditionalTS>& components) {
  Evaluation out;
  for (const auto& c : components)
    for (const auto& [k, v] : c.initial_shared) {
      if (auto prev = out.get(k); prev && *prev != v)
        throw ModelError("initial-guard", "initial declarators disagree on shared variable '" + k + "'");
      out.set(k, v);
    }
  return out;
}

ConditionalTS product_shell(const std::vector<ConditionalTS>& components) {
  if (components.empty()) throw ModelError("overlap", "composition needs at least one component");
  ConditionalTS out;
  std::vector<Guard> guards;
  for (const auto& c : components) {
    out.name += (out.name.empty() ? "" : "|") + c.name;
    out.parts.insert(out.parts.end(), c.parts.begin(), c.parts.end());
    out.local_vars.insert(out.local_vars.end(), c.local_vars.begin(), c.local_vars.end());
    merge_signatures(out.shared_vars, c.shared_vars);
    merge_channels(out.channels, c.channels);
    guards.push_back(c.initial_guard);
    out.propositions.insert(out.propositions.end(), c.propositions.begin(), c.propositions.end());
    out.labeling.insert(out.labeling.end(), c.labeling.begin(), c.labeling.end());
    out.atomic_propositions.insert(c.atomic_propositions.begin(), c.atomic_propositions.end());
  }
  out.initial_guard = Guard::all_of(std::move(guards));
  out.initial_shared = merge_initial_shared(components);
  return out;
}

CondState combine(const std::vector<ConditionalTS>& components, const std::vector<std::size_t>& tuple,
                  const Evaluation& extra) {
  CondState s;
  std::vector<Evaluation> parts{extra};
  for (std::size_t k = 0; k < components.size(); ++k) {
    const CondState& c = components[k].states[tuple[k]];
    s.declarators.insert(s.declarators.end(), c.declarators.begin(), c.declarators.end());
    parts.push_back(c.local);
  }
  s.local = eval_merge(parts);
  return s;
}

// Cartesian product of the components' initial states.
std::vector<std::vector<std::size_t>> initial_tuples(const std::vector<ConditionalTS>& components) {
  std::vector<std::vector<std::size_t>> out{{}};
  for (const auto& c : components) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& prefix : out)
      for (auto i : c.initials) {
        auto t = prefix;
        t.push_back(i);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> part_offsets(const std::vector<ConditionalTS>& components) {
  std::vector<std::size_t> out;
  std::size_t n = 0;
  for (const auto& c : components) {
    out.push_back(n);
    n += c.parts.size();
  }
  return out;
}

}  // namespace

ConditionalTS compose_interleave(const std::vector<ConditionalTS>& components, const ExplorationConfig& cfg) {
  check_disjoint_locals(components);
  for (const auto& c : components)
    for (const auto& s : c.shared_vars)
      for (const auto& d : components)
        if (std::any_of(d.local_vars.begin(), d.local_vars.end(), [&](const auto& l) { return l.name == s.name; }))
          throw ModelError("overlap", "variable '" + s.name + "' is owned by '" + d.name + "' and shared by '" +
                                          c.name + "'");
  ConditionalTS out = product_shell(components);
  auto offsets = part_offsets(components);

  Frontier frontier(cfg);
  std::map<std::vector<std::size_t>, std::size_t> seen;
  std::vector<std::vector<std::size_t>> tuples;
  std::vector<std::size_t> depth;
  auto intern = [&](const std::vector<std::size_t>& t, std::size_t d) -> std::optional<std::size_t> {
    if (auto it = seen.find(t); it != seen.end()) return it->second;
    if (!frontier.admit(out.states.size())) return std::nullopt;
    seen.emplace(t, out.states.size());
    tuples.push_back(t);
    out.states.push_back(combine(components, t, {}));
    depth.push_back(d);
    return out.states.size() - 1;
  };
  for (const auto& t : initial_tuples(components))
    if (auto i = intern(t, 0)) out.initials.push_back(*i);

  for (std::size_t i = 0; i < out.states.size(); ++i) {
    const auto tuple = tuples[i];
    bool expanded = false;
    for (std::size_t k = 0; k < components.size(); ++k) {
      for (auto ti : components[k].outgoing(tuple[k])) {
        if (!expanded && !frontier.expand(depth[i])) goto next_state;
        expanded = true;
        const CondTransition& t = components[k].transitions[ti];
        auto moved = tuple;
        moved[k] = t.target;
        auto dst = intern(moved, depth[i] + 1);
        if (!dst) continue;
        out.transitions.push_back({i, t.guard, t.action, *dst, t.shared_writes, t.received, offsets[k] + t.part, t.edge});
      }
    }
  next_state:;
  }
  out.truncated = frontier.truncated();
  out.reindex();
  return out;
}

ConditionalTS compose_shared(const std::vector<ConditionalTS>& components, const std::vector<VarSignature>& shared,
                             const ExplorationConfig& cfg) {
  check_disjoint_locals(components);
  std::vector<std::string> shared_names = names_of(shared);
  for (const auto& c : components) {
    for (const auto& s : c.local_vars)
      if (contains(shared_names, s.name))
        throw ModelError("overlap", "variable '" + s.name + "' is owned by '" + c.name +
                                        "'; lower it with the variable marked shared");
    for (const auto& s : c.shared_vars) {
      auto it = std::find_if(shared.begin(), shared.end(), [&](const VarSignature& d) { return d.name == s.name; });
      if (it == shared.end())
        throw ModelError("unresolved-name", "'" + c.name + "' reads shared variable '" + s.name +
                                                "' that the composition does not declare");
      if (!(it->type == s.type))
        throw ModelError("kind-mismatch", "shared variable '" + s.name + "' is declared with conflicting kinds");
    }
  }
  ConditionalTS out = product_shell(components);
  out.shared_vars.clear();
  out.local_vars.insert(out.local_vars.end(), shared.begin(), shared.end());
  Evaluation shared0 = eval_override(default_evaluation(shared), out.initial_shared);
  out.initial_shared = {};
  auto offsets = part_offsets(components);

  Frontier frontier(cfg);
  std::map<std::pair<std::vector<std::size_t>, Evaluation>, std::size_t> seen;
  std::vector<std::pair<std::vector<std::size_t>, Evaluation>> keys;
  std::vector<std::size_t> depth;
  auto intern = [&](const std::vector<std::size_t>& t, const Evaluation& sh,
                    std::size_t d) -> std::optional<std::size_t> {
    auto key = std::pair(t, sh);
    if (auto it = seen.find(key); it != seen.end()) return it->second;
    if (!frontier.admit(out.states.size())) return std::nullopt;
    seen.emplace(key, out.states.size());
    keys.push_back(key);
    out.states.push_back(combine(components, t, sh));
    depth.push_back(d);
    return out.states.size() - 1;
  };
  for (const auto& t : initial_tuples(components)) {
    CondState s = combine(components, t, shared0);
    if (!guard_sat(s.local, out.initial_guard)) continue;
    if (auto i = intern(t, shared0, 0)) out.initials.push_back(*i);
  }
  if (out.initials.empty())
    throw ModelError("initial-guard", "no initial state of '" + out.name + "' satisfies the initial guards");
  out.initial_guard = Guard::truth();

  for (std::size_t i = 0; i < out.states.size(); ++i) {
    const auto [tuple, sh] = keys[i];
    const Evaluation merged = out.states[i].local;
    bool expanded = false;
    for (std::size_t k = 0; k < components.size(); ++k) {
      for (auto ti : components[k].outgoing(tuple[k])) {
        const CondTransition& t = components[k].transitions[ti];
        if (!guard_sat(merged, t.guard)) continue;
        if (!expanded && !frontier.expand(depth[i])) goto next_state;
        expanded = true;
        auto moved = tuple;
        moved[k] = t.target;
        auto dst = intern(moved, eval_override(sh, t.shared_writes), depth[i] + 1);
        if (!dst) continue;
        out.transitions.push_back({i, t.guard, t.action, *dst, {}, t.received, offsets[k] + t.part, t.edge});
      }
    }
  next_state:;
  }
  out.truncated = frontier.truncated();
  out.reindex();
  return out;
}

ChannelSystem channel_system(const Model& m, const ExplorationConfig& cfg) {
  auto diags = validate_model(m);
  if (has_errors(diags)) throw ModelError(diags);
  ChannelSystem cs;
  cs.name = m.name;
  for (const auto& g : m.components) {
    cs.components.push_back(interpret_graph(g, m.shared, cfg));
    merge_channels(cs.channels, g.channels);
    for (const auto& s : g.signatures)
      if (contains(m.shared, s.name)) merge_signatures(cs.shared, {s});
  }
  return cs;
}

ChannelSystem channel_system(const SystemGraph& g, const ExplorationConfig& cfg) {
  return channel_system(Model{g.name, {g}, {}}, cfg);
}

namespace {

struct Located {
  std::size_t offset = 0;  // first declarator slot of the component
  std::size_t state = 0;   // component state index
};

std::vector<Located> locate(const ChannelSystem& cs, const GlobalState& s) {
  std::vector<Located> out;
  std::size_t offset = 0;
  for (const auto& c : cs.components) {
    CondState local;
    if (offset + c.parts.size() > s.declarators.size())
      throw ModelError("state", "global state has too few declarators for '" + c.name + "'");
    local.declarators.assign(s.declarators.begin() + offset, s.declarators.begin() + offset + c.parts.size());
    for (const auto& v : c.local_vars) local.local.set(v.name, s.merged.at(v.name));
    auto idx = c.find(local);
    if (!idx) throw ModelError("state", "global state " + s.key() + " is not a state of '" + c.name + "'");
    out.push_back({offset, *idx});
    offset += c.parts.size();
  }
  return out;
}

void apply_move(const ConditionalTS& c, const CondTransition& t, std::size_t offset, GlobalState& s) {
  const CondState& dst = c.states[t.target];
  std::copy(dst.declarators.begin(), dst.declarators.end(), s.declarators.begin() + offset);
  for (const auto& [k, v] : dst.local) s.merged.set(k, v);
  for (const auto& [k, v] : t.shared_writes) s.merged.set(k, v);
}

const ChannelDecl& channel_of(const ChannelSystem& cs, const std::string& name) {
  for (const auto& c : cs.channels)
    if (c.name == name) return c;
  throw ModelError("unresolved-name", "unknown channel '" + name + "'");
}

}  // namespace

std::vector<GlobalState> initial_states(const ChannelSystem& cs) {
  Evaluation shared = eval_override(default_evaluation(cs.shared), merge_initial_shared(cs.components));
  ChannelContents chans;
  for (const auto& c : cs.channels) chans[c.name] = c.initial;
  std::vector<GlobalState> out;
  for (const auto& t : initial_tuples(cs.components)) {
    GlobalState s;
    s.channels = chans;
    std::vector<Evaluation> parts{shared};
    for (std::size_t k = 0; k < cs.components.size(); ++k) {
      const CondState& c = cs.components[k].states[t[k]];
      s.declarators.insert(s.declarators.end(), c.declarators.begin(), c.declarators.end());
      parts.push_back(c.local);
    }
    s.merged = eval_merge(parts);
    bool ok = std::all_of(cs.components.begin(), cs.components.end(),
                          [&](const ConditionalTS& c) { return guard_sat(s.merged, c.initial_guard); });
    if (ok) out.push_back(std::move(s));
  }
  if (out.empty()) throw ModelError("initial-guard", "no initial state of '" + cs.name + "' satisfies its initial guard");
  return out;
}

std::vector<Step> successors(const ChannelSystem& cs, const GlobalState& s) {
  std::vector<Step> out;
  auto where = locate(cs, s);
  for (std::size_t i = 0; i < cs.components.size(); ++i) {
    const ConditionalTS& ci = cs.components[i];
    for (auto ti : ci.outgoing(where[i].state)) {
      const CondTransition& t = ci.transitions[ti];
      if (!guard_sat(s.merged, t.guard)) continue;
      const Action& a = t.action;
      if (a.kind == Action::Kind::named) {
        Step st{a.str(), s, {{i, ti}}};
        apply_move(ci, t, where[i].offset, st.target);
        out.push_back(std::move(st));
        continue;
      }
      const ChannelDecl& ch = channel_of(cs, a.channel);
      const auto& queue = s.channels.at(a.channel);
      if (a.kind == Action::Kind::receive) {
        if (ch.synchronous() || queue.empty() || queue.front() != *t.received) continue;
        Step st{a.str(), s, {{i, ti}}};
        auto& q = st.target.channels[a.channel];
        q.erase(q.begin());
        apply_move(ci, t, where[i].offset, st.target);
        out.push_back(std::move(st));
        continue;
      }
      TypedValue msg = a.message.is_var() ? s.merged.at(a.message.var) : a.message.literal;
      if (!ch.synchronous()) {
        if (queue.size() >= ch.capacity) continue;
        Step st{a.str(), s, {{i, ti}}};
        st.target.channels[a.channel].push_back(msg);
        apply_move(ci, t, where[i].offset, st.target);
        out.push_back(std::move(st));
        continue;
      }
      // Rendezvous: pair with every enabled receiver in another component.
      for (std::size_t j = 0; j < cs.components.size(); ++j) {
        if (j == i) continue;
        const ConditionalTS& cj = cs.components[j];
        for (auto ui : cj.outgoing(where[j].state)) {
          const CondTransition& u = cj.transitions[ui];
          if (u.action.kind != Action::Kind::receive || u.action.channel != a.channel) continue;
          if (*u.received != msg || !guard_sat(s.merged, u.guard)) continue;
          Step st{u.action.str(), s, {{i, ti}, {j, ui}}};
          apply_move(ci, t, where[i].offset, st.target);
          apply_move(cj, u, where[j].offset, st.target);
          out.push_back(std::move(st));
        }
      }
    }
  }
  return out;
}

std::set<std::string> global_labels(const ChannelSystem& cs, const GlobalState& s) {
  std::set<std::string> out;
  for (const auto& c : cs.components) {
    auto l = state_labels(c.propositions, c.labeling, s.merged);
    out.insert(l.begin(), l.end());
  }
  return out;
}

TransitionSystem explore(const ChannelSystem& cs, const ExplorationConfig& cfg) {
  TransitionSystem ts;
  for (const auto& c : cs.components) ts.atomic_propositions.insert(c.atomic_propositions.begin(), c.atomic_propositions.end());
  Frontier frontier(cfg);
  std::vector<std::size_t> depth;
  auto intern = [&](const GlobalState& g, std::size_t d) -> std::optional<std::size_t> {
    std::string key = g.key();
    if (auto id = ts.find(key)) return id;
    if (!frontier.admit(ts.states.size())) return std::nullopt;
    depth.push_back(d);
    return ts.add_state({std::move(key), global_labels(cs, g), g});
  };
  for (const auto& g : initial_states(cs))
    if (auto id = intern(g, 0); id && !ts.is_initial(*id)) ts.initials.push_back(*id);

  for (std::size_t i = 0; i < ts.states.size(); ++i) {
    auto steps = successors(cs, *ts.states[i].global);
    if (steps.empty() || !frontier.expand(depth[i])) continue;
    for (auto& st : steps) {
      auto dst = intern(st.target, depth[i] + 1);
      if (dst) ts.add_transition(i, st.action, *dst);
    }
  }
  ts.truncated = frontier.truncated();
  return ts;
}

// Component lowering keeps the default budget: its state count is unrelated to
// the reachable global states the caller is bounding.
TransitionSystem elaborate(const Model& m, const ExplorationConfig& cfg) { return explore(channel_system(m), cfg); }

TransitionSystem elaborate(const SystemGraph& g, const ExplorationConfig& cfg) {
  return explore(channel_system(g), cfg);
}

}  // namespace sysgraph
