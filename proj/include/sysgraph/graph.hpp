#pragma once

// System graphs: named state declarators connected by guarded, action-labelled
// transitions, plus channels, propositions and labelling rules.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sysgraph/diagnostics.hpp"
#include "sysgraph/guard.hpp"
#include "sysgraph/value.hpp"

namespace sysgraph {

struct ChannelDecl {
  std::string name;
  std::size_t capacity = 0;  // 0 = synchronous rendezvous
  VarType domain;
  std::vector<TypedValue> initial;  // initial queue content, front first
  SourceSpan span;

  bool synchronous() const { return capacity == 0; }
  bool operator==(const ChannelDecl& o) const {
    return name == o.name && capacity == o.capacity && domain == o.domain && initial == o.initial;
  }
};

struct StateDeclarator {
  std::string name;
  Evaluation partial;  // pinned ("interesting") variables
  SourceSpan span;

  bool operator==(const StateDeclarator& o) const { return name == o.name && partial == o.partial; }
};

struct Action {
  enum class Kind { named, send, receive };
  Kind kind = Kind::named;
  std::string name;     // named actions
  std::string channel;  // send / receive
  Operand message;      // send: literal or variable
  std::string target;   // receive: bound variable

  static Action named_action(std::string n) { return {Kind::named, std::move(n), {}, {}, {}}; }
  static Action send(std::string ch, Operand m) { return {Kind::send, {}, std::move(ch), std::move(m), {}}; }
  static Action receive(std::string ch, std::string var) {
    return {Kind::receive, {}, std::move(ch), {}, std::move(var)};
  }

  bool is_communication() const { return kind != Kind::named; }
  // `payGas`, `c!5`, `c?tx`
  std::string str() const;
  // Name used when actions are matched across systems: communication actions
  // match on (channel, direction) only.
  std::string match_key() const;

  bool operator==(const Action& o) const { return str() == o.str(); }
  bool operator<(const Action& o) const { return str() < o.str(); }
};

struct Transition {
  std::string source;
  Guard guard;
  Action action;
  std::string target;
  SourceSpan span;

  std::string str() const;
  bool operator==(const Transition& o) const {
    return source == o.source && guard == o.guard && action == o.action && target == o.target;
  }
};

struct Proposition {
  std::string name;
  Guard formula;
  SourceSpan span;

  bool operator==(const Proposition& o) const { return name == o.name && formula == o.formula; }
};

// `label when <guard> => <proposition>`: restricts where a proposition labels.
struct LabelRule {
  Guard when;
  std::string proposition;
  SourceSpan span;

  bool operator==(const LabelRule& o) const { return when == o.when && proposition == o.proposition; }
};

struct SystemGraph {
  std::string name;
  std::vector<VarSignature> signatures;
  std::vector<ChannelDecl> channels;
  std::vector<StateDeclarator> declarators;
  std::vector<Transition> transitions;
  std::string initial;
  Guard initial_guard;
  std::vector<std::string> terminals;
  std::vector<Proposition> propositions;
  std::vector<LabelRule> labeling;
  bool refinable = false;
  SourceSpan span;

  const StateDeclarator* find_declarator(const std::string& n) const;
  const VarSignature* find_signature(const std::string& n) const;
  const ChannelDecl* find_channel(const std::string& n) const;
  const Proposition* find_proposition(const std::string& n) const;
  bool is_terminal(const std::string& n) const;

  std::vector<std::string> variable_names() const;
  // All actions in first-use order, and the named (non-communication) subset.
  std::vector<Action> actions() const;
  std::vector<std::string> named_actions() const;

  bool operator==(const SystemGraph& o) const;
};

// A file may hold several systems composed in parallel over shared channels
// and (optionally) shared variables.
struct Model {
  std::string name;
  std::vector<SystemGraph> components;
  std::vector<std::string> shared;  // variables shared between components

  bool operator==(const Model&) const = default;
};

// L(v): propositions whose formula holds in v, restricted by label rules.
std::set<std::string> label_state(const SystemGraph& g, const Evaluation& v);

// Labels used for transition-system states: proposition names plus the atoms
// of all propositions that are true in v.
std::set<std::string> state_labels(const SystemGraph& g, const Evaluation& v);
std::set<std::string> atomic_propositions(const SystemGraph& g);

std::set<std::string> label_state(const std::vector<Proposition>& props, const std::vector<LabelRule>& rules,
                                  const Evaluation& v);
std::set<std::string> state_labels(const std::vector<Proposition>& props, const std::vector<LabelRule>& rules,
                                   const Evaluation& v);
std::set<std::string> atomic_propositions(const std::vector<Proposition>& props);

}  // namespace sysgraph
