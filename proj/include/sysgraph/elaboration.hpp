#pragma once

// Lowering of system graphs: state inference, conditional transition systems,
// parallel composition and channel-system exploration.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sysgraph/graph.hpp"
#include "sysgraph/transition_system.hpp"

namespace sysgraph {

struct ExplorationConfig {
  enum class OnLimit { error, truncate };

  std::size_t max_states = 1'000'000;
  std::size_t max_depth = 100'000;
  OnLimit on_limit = OnLimit::error;
};

// V0: initial pins over ε-defaults. Throws ModelError("initial-guard") when
// g0 does not hold.
Evaluation initial_state(const SystemGraph& g);

// V[V̂']: the evaluation entered when moving into `target`.
Evaluation infer_successor(const Evaluation& current, const StateDeclarator& target);

// A state of a conditional transition system: the declarators of its
// constituent graphs and the evaluation of the variables it owns.
struct CondState {
  std::vector<std::string> declarators;
  Evaluation local;

  auto operator<=>(const CondState&) const = default;
};

struct CondTransition {
  std::size_t source = 0;
  Guard guard;  // over owned and shared variables
  Action action;
  std::size_t target = 0;
  Evaluation shared_writes;             // applied to shared variables on firing
  std::optional<TypedValue> received;   // receives: the value this branch binds
  std::size_t part = 0;                 // constituent graph that moves
  std::size_t edge = 0;                 // index of the graph transition
};

struct ConditionalTS {
  std::string name;
  std::vector<std::string> parts;          // constituent graph names
  std::vector<VarSignature> local_vars;
  std::vector<VarSignature> shared_vars;   // read and written, owned elsewhere
  std::vector<ChannelDecl> channels;
  std::vector<CondState> states;
  std::vector<CondTransition> transitions;
  std::vector<std::size_t> initials;
  Guard initial_guard;
  Evaluation initial_shared;               // shared pins of the initial declarators
  std::vector<Proposition> propositions;
  std::vector<LabelRule> labeling;
  std::set<std::string> atomic_propositions;
  bool truncated = false;

  std::optional<std::size_t> find(const CondState& s) const;
  const std::vector<std::size_t>& outgoing(std::size_t state) const;

  // Rebuilds the lookup tables after `states`/`transitions` change.
  void reindex();

 private:
  std::map<CondState, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
};

// Lowers one graph. Variables in `shared` stay unowned: guards over them are
// kept, writes become shared_writes. Receives branch over the channel domain.
ConditionalTS interpret_graph(const SystemGraph& g, const std::vector<std::string>& shared = {},
                              const ExplorationConfig& cfg = {});

// Pure interleaving. Throws ModelError("overlap") on shared owned variables.
ConditionalTS compose_interleave(const std::vector<ConditionalTS>& components,
                                 const ExplorationConfig& cfg = {});

// Interleaving over shared variables, which the result owns. Only reachable
// product states are kept.
ConditionalTS compose_shared(const std::vector<ConditionalTS>& components, const std::vector<VarSignature>& shared,
                             const ExplorationConfig& cfg = {});

struct ChannelSystem {
  std::string name;
  std::vector<ConditionalTS> components;
  std::vector<ChannelDecl> channels;
  std::vector<VarSignature> shared;
};

// Validates and lowers every component of a model.
ChannelSystem channel_system(const Model& m, const ExplorationConfig& cfg = {});
ChannelSystem channel_system(const SystemGraph& g, const ExplorationConfig& cfg = {});

// One enabled step of a channel system.
struct Step {
  std::string action;
  GlobalState target;
  std::vector<std::pair<std::size_t, std::size_t>> moves;  // (component, transition) pairs
};

std::vector<GlobalState> initial_states(const ChannelSystem& cs);
std::vector<Step> successors(const ChannelSystem& cs, const GlobalState& s);
std::set<std::string> global_labels(const ChannelSystem& cs, const GlobalState& s);

// Breadth-first exploration of the reachable global states.
TransitionSystem explore(const ChannelSystem& cs, const ExplorationConfig& cfg = {});

TransitionSystem elaborate(const Model& m, const ExplorationConfig& cfg = {});
TransitionSystem elaborate(const SystemGraph& g, const ExplorationConfig& cfg = {});

}  // namespace sysgraph
