#include "sysgraph/increment.hpp"

#include <algorithm>
#include <set>

#include "sysgraph/frontend.hpp"

namespace sysgraph {

namespace {

// Inner variables and channels must exist in the outer graph with the same
// types.
void check_signature(const SystemGraph& inner, const SystemGraph& outer) {
  for (const auto& s : inner.signatures) {
    const VarSignature* o = outer.find_signature(s.name);
    if (!o || o->type != s.type)
      throw ModelError("signature-mismatch", "variable '" + s.name + "' of '" + inner.name + "' is not declared with type " +
                                                 s.type.str() + " in '" + outer.name + "'");
  }
  for (const auto& c : inner.channels) {
    const ChannelDecl* o = outer.find_channel(c.name);
    if (!o || !(*o == c))
      throw ModelError("signature-mismatch",
                       "channel '" + c.name + "' of '" + inner.name + "' differs from the one in '" + outer.name + "'");
  }
}

std::set<std::string> action_set(const SystemGraph& g) {
  std::set<std::string> out;
  for (const auto& t : g.transitions) out.insert(t.action.str());
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  std::string n = base + kInnerSuffix;
  while (taken.count(n)) n += kInnerSuffix;
  return n;
}

}  // namespace

bool is_module(const SystemGraph& inner, const SystemGraph& outer) {
  try {
    check_signature(inner, outer);
  } catch (const ModelError&) {
    return false;
  }
  for (const auto& d : inner.declarators) {
    const StateDeclarator* o = outer.find_declarator(d.name);
    if (!o || o->partial != d.partial) return false;
  }
  auto a1 = action_set(inner), a2 = action_set(outer);
  if (!std::includes(a2.begin(), a2.end(), a1.begin(), a1.end())) return false;
  for (const auto& p : inner.propositions) {
    const Proposition* o = outer.find_proposition(p.name);
    if (!o || !(o->formula == p.formula)) return false;
  }
  ConditionalTS cts;
  try {
    cts = interpret_graph(inner);
  } catch (const ModelError& e) {
    if (e.code() != "initial-guard") throw;
    return true;  // no reachable state to disagree on
  }
  Evaluation base = default_evaluation(outer.signatures);
  for (const auto& s : cts.states) {
    Evaluation v = eval_override(base, s.local);
    if (label_state(inner, v) != label_state(outer, v)) return false;
  }
  return true;
}

EmbedResult embed(const SystemGraph& inner, const SystemGraph& outer, const std::string& at) {
  if (!outer.find_declarator(at))
    throw ModelError("unresolved-name", "'" + outer.name + "' has no declarator '" + at + "'");
  check_signature(inner, outer);
  bool at_has_outbound = std::any_of(outer.transitions.begin(), outer.transitions.end(),
                                     [&](const Transition& t) { return t.source == at; });
  if (inner.terminals.empty() && at_has_outbound)
    throw ModelError("nonterminal-inner", "'" + inner.name + "' has no terminal declarator to continue from '" + at +
                                              "' with");

  EmbedResult r;
  r.module = is_module(inner, outer);

  // Names of the inner graph after the (possibly disjoint) union.
  std::map<std::string, std::string> dname, pname;
  {
    std::set<std::string> taken;
    for (const auto& d : outer.declarators) taken.insert(d.name);
    for (const auto& d : inner.declarators) taken.insert(d.name);
    for (const auto& d : inner.declarators) {
      std::string n = d.name;
      if (!r.module && outer.find_declarator(d.name)) {
        n = fresh_name(d.name, taken);
        taken.insert(n);
        r.renames[d.name] = n;
      }
      dname[d.name] = n;
    }
    std::set<std::string> ptaken;
    for (const auto& p : outer.propositions) ptaken.insert(p.name);
    for (const auto& p : inner.propositions) ptaken.insert(p.name);
    for (const auto& p : inner.propositions) {
      std::string n = p.name;
      if (!r.module && outer.find_proposition(p.name)) {
        n = fresh_name(p.name, ptaken);
        ptaken.insert(n);
        r.renames[p.name] = n;
      }
      pname[p.name] = n;
    }
  }
  const std::string i1 = dname.at(inner.initial);

  SystemGraph g;
  g.name = outer.name;
  g.signatures = outer.signatures;
  g.channels = outer.channels;
  g.refinable = outer.refinable;

  std::vector<Transition> edges;
  auto add = [&](Transition t) {
    t.span = {};
    if (std::find(edges.begin(), edges.end(), t) == edges.end()) edges.push_back(std::move(t));
  };
  for (const auto& t : outer.transitions)
    if (t.source != at && t.target != at) add(t);
  for (const auto& t : inner.transitions) add({dname.at(t.source), t.guard, t.action, dname.at(t.target), {}});
  for (const auto& t : outer.transitions)
    if (t.target == at) add({t.source, inner.initial_guard, t.action, i1, {}});
  for (const auto& f : inner.terminals)
    for (const auto& t : outer.transitions)
      if (t.source == at) add({dname.at(f), t.guard, t.action, t.target, {}});
  g.transitions = std::move(edges);

  bool at_used = std::any_of(g.transitions.begin(), g.transitions.end(),
                             [&](const Transition& t) { return t.source == at || t.target == at; });
  for (const auto& d : outer.declarators)
    if (d.name != at || at_used) g.declarators.push_back({d.name, d.partial, {}});
  for (const auto& d : inner.declarators) {
    const std::string& n = dname.at(d.name);
    if (std::none_of(g.declarators.begin(), g.declarators.end(), [&](const StateDeclarator& x) { return x.name == n; }))
      g.declarators.push_back({n, d.partial, {}});
  }

  if (at == outer.initial) {
    g.initial = i1;
    g.initial_guard = inner.initial_guard;
  } else {
    g.initial = outer.initial;
    g.initial_guard = outer.initial_guard;
  }

  if (outer.is_terminal(at)) {
    for (const auto& f : outer.terminals)
      if (f != at) g.terminals.push_back(f);
    for (const auto& f : inner.terminals)
      if (std::find(g.terminals.begin(), g.terminals.end(), dname.at(f)) == g.terminals.end())
        g.terminals.push_back(dname.at(f));
  } else {
    g.terminals = outer.terminals;
  }

  g.propositions = outer.propositions;
  for (const auto& p : inner.propositions)
    if (!g.find_proposition(pname.at(p.name))) g.propositions.push_back({pname.at(p.name), p.formula, {}});
  g.labeling = outer.labeling;
  for (const auto& l : inner.labeling) {
    LabelRule rule{l.when, pname.at(l.proposition), {}};
    if (std::find(g.labeling.begin(), g.labeling.end(), rule) == g.labeling.end()) g.labeling.push_back(rule);
  }
  for (auto& d : g.declarators) d.span = {};
  for (auto& p : g.propositions) p.span = {};
  for (auto& l : g.labeling) l.span = {};
  r.graph = std::move(g);
  return r;
}

ChannelSystem compose_vertical(const std::vector<SystemGraph>& parts, const std::vector<ChannelDecl>& channels,
                               const std::vector<std::string>& shared) {
  std::map<std::string, std::string> owner;
  for (const auto& p : parts)
    for (const auto& s : p.signatures) {
      if (std::find(shared.begin(), shared.end(), s.name) != shared.end()) continue;
      auto [it, fresh] = owner.emplace(s.name, p.name);
      if (!fresh)
        throw ModelError("overlap", "variable '" + s.name + "' is owned by both '" + it->second + "' and '" + p.name +
                                        "' but is not shared");
    }
  for (const auto& p : parts)
    for (const auto& c : p.channels) {
      auto it = std::find_if(channels.begin(), channels.end(), [&](const ChannelDecl& d) { return d.name == c.name; });
      if (it == channels.end() || !(*it == c))
        throw ModelError("channel-mismatch", "channel '" + c.name + "' of '" + p.name + "' is not in the shared channel set");
    }
  std::string name;
  for (const auto& p : parts) name += (name.empty() ? "" : "_") + p.name;
  ChannelSystem cs = channel_system(Model{name, parts, shared});
  for (const auto& c : channels)
    if (std::none_of(cs.channels.begin(), cs.channels.end(), [&](const ChannelDecl& d) { return d.name == c.name; }))
      cs.channels.push_back(c);
  return cs;
}

std::string to_string(NextMove m) {
  switch (m) {
    case NextMove::deliver: return "deliver";
    case NextMove::integrate: return "integrate";
    case NextMove::iterate: return "iterate";
  }
  return "";
}

NextMove classify_next_move(bool refinable, bool dependent) {
  if (refinable) return NextMove::iterate;
  return dependent ? NextMove::integrate : NextMove::deliver;
}

}  // namespace sysgraph
