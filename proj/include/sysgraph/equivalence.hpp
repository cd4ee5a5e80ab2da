#pragma once

// Strong bisimulation and simulation between transition systems, with
// witnesses that can be checked pair by pair.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sysgraph/elaboration.hpp"
#include "sysgraph/transition_system.hpp"

namespace sysgraph {

enum class RefinementMode { bisimulation, simulation };

// How transition actions take part in matching. `ignore` relates states by
// labels and branching alone; `by_name` also requires equal actions, with
// communication actions compared on (channel, direction).
enum class ActionMatching { ignore, by_name };

struct UnmatchedMove {
  bool from_left = true;  // which system makes the move
  std::size_t source = 0;
  std::string action;
  std::size_t target = 0;
};

struct RefinementReport {
  RefinementMode mode = RefinementMode::bisimulation;
  bool holds = false;
  // On success: pairs (left state, right state) of the witness relation.
  std::vector<std::pair<std::size_t, std::size_t>> relation;
  // On failure: the smallest unrelated initial pair and, when the labels
  // agree, a move of one side the other cannot match.
  std::optional<std::pair<std::size_t, std::size_t>> distinguishing;
  std::optional<UnmatchedMove> move;
  std::string explanation;
};

std::string to_string(RefinementMode mode);

// a ∼ b. Coarsest stable partition of the disjoint union.
RefinementReport bisim_equiv(const TransitionSystem& a, const TransitionSystem& b,
                             ActionMatching matching = ActionMatching::by_name);

// concrete ⪯ abstract: every move of `concrete` is matched by `abstract`
// from related states with equal labels.
RefinementReport simulates(const TransitionSystem& concrete, const TransitionSystem& abstract,
                           ActionMatching matching = ActionMatching::by_name);

// Lowers both graphs. Bisimulation compares old with new; simulation checks
// that the new graph is simulated by the old one.
RefinementReport refine_check(const Model& old_model, const Model& new_model, RefinementMode mode,
                              ActionMatching matching = ActionMatching::ignore, const ExplorationConfig& cfg = {});
RefinementReport refine_check(const SystemGraph& old_graph, const SystemGraph& new_graph, RefinementMode mode,
                              ActionMatching matching = ActionMatching::ignore, const ExplorationConfig& cfg = {});

}  // namespace sysgraph
