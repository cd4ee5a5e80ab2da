#include "sysgraph/graph.hpp"

#include <algorithm>

namespace sysgraph {

std::string Action::str() const {
  switch (kind) {
    case Kind::named: return name;
    case Kind::send: return channel + "!" + message.str();
    case Kind::receive: return channel + "?" + target;
  }
  return {};
}

std::string Action::match_key() const {
  switch (kind) {
    case Kind::named: return name;
    case Kind::send: return channel + "!";
    case Kind::receive: return channel + "?";
  }
  return {};
}

std::string Transition::str() const {
  std::string s = source + " -> " + target;
  if (!guard.is_true()) s += " when " + guard.str();
  return s + " on " + action.str();
}

const StateDeclarator* SystemGraph::find_declarator(const std::string& n) const {
  for (const auto& d : declarators)
    if (d.name == n) return &d;
  return nullptr;
}

const VarSignature* SystemGraph::find_signature(const std::string& n) const {
  for (const auto& s : signatures)
    if (s.name == n) return &s;
  return nullptr;
}

const ChannelDecl* SystemGraph::find_channel(const std::string& n) const {
  for (const auto& c : channels)
    if (c.name == n) return &c;
  return nullptr;
}

const Proposition* SystemGraph::find_proposition(const std::string& n) const {
  for (const auto& p : propositions)
    if (p.name == n) return &p;
  return nullptr;
}

bool SystemGraph::is_terminal(const std::string& n) const {
  return std::find(terminals.begin(), terminals.end(), n) != terminals.end();
}

std::vector<std::string> SystemGraph::variable_names() const {
  std::vector<std::string> out;
  for (const auto& s : signatures) out.push_back(s.name);
  return out;
}

std::vector<Action> SystemGraph::actions() const {
  std::vector<Action> out;
  for (const auto& t : transitions)
    if (std::find(out.begin(), out.end(), t.action) == out.end()) out.push_back(t.action);
  return out;
}

std::vector<std::string> SystemGraph::named_actions() const {
  std::vector<std::string> out;
  for (const auto& t : transitions)
    if (!t.action.is_communication() &&
        std::find(out.begin(), out.end(), t.action.name) == out.end())
      out.push_back(t.action.name);
  return out;
}

bool SystemGraph::operator==(const SystemGraph& o) const {
  return name == o.name && signatures == o.signatures && channels == o.channels &&
         declarators == o.declarators && transitions == o.transitions && initial == o.initial &&
         initial_guard == o.initial_guard && terminals == o.terminals &&
         propositions == o.propositions && labeling == o.labeling && refinable == o.refinable;
}

std::set<std::string> label_state(const std::vector<Proposition>& props, const std::vector<LabelRule>& rules,
                                  const Evaluation& v) {
  std::set<std::string> out;
  for (const auto& p : props) {
    if (!guard_sat(v, p.formula)) continue;
    bool restricted = false;
    bool allowed = false;
    for (const auto& rule : rules) {
      if (rule.proposition != p.name) continue;
      restricted = true;
      if (guard_sat(v, rule.when)) {
        allowed = true;
        break;
      }
    }
    if (!restricted || allowed) out.insert(p.name);
  }
  return out;
}

std::set<std::string> state_labels(const std::vector<Proposition>& props, const std::vector<LabelRule>& rules,
                                   const Evaluation& v) {
  std::set<std::string> out = label_state(props, rules, v);
  for (const auto& p : props)
    for (const auto& a : atoms(p.formula))
      if (guard_sat(v, Guard(a))) out.insert(a.label());
  return out;
}

std::set<std::string> atomic_propositions(const std::vector<Proposition>& props) {
  std::set<std::string> out;
  for (const auto& p : props) {
    out.insert(p.name);
    for (const auto& a : atoms(p.formula)) out.insert(a.label());
  }
  return out;
}

std::set<std::string> label_state(const SystemGraph& g, const Evaluation& v) {
  return label_state(g.propositions, g.labeling, v);
}

std::set<std::string> state_labels(const SystemGraph& g, const Evaluation& v) {
  return state_labels(g.propositions, g.labeling, v);
}

std::set<std::string> atomic_propositions(const SystemGraph& g) { return atomic_propositions(g.propositions); }

}  // namespace sysgraph
