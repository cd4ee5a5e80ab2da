#pragma once

// Temporal properties over proposition names: LTL checked through a Büchi
// product and nested depth-first search, CTL by fixpoint labelling.

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sysgraph/graph.hpp"
#include "sysgraph/transition_system.hpp"

namespace sysgraph {

enum class Logic { ltl, ctl };

std::string to_string(Logic logic);

struct Formula {
  enum class Op {
    truth,
    falsity,
    atom,
    negation,
    conjunction,
    disjunction,
    implication,
    // LTL path operators
    next,
    eventually,
    always,
    until,
    release,
    // CTL
    ex,
    ef,
    eg,
    eu,
    ax,
    af,
    ag,
    au,
  };

  Op op = Op::truth;
  std::string name;  // atoms
  std::vector<Formula> args;

  static Formula truth() { return {Op::truth, {}, {}}; }
  static Formula falsity() { return {Op::falsity, {}, {}}; }
  static Formula atom(std::string n) { return {Op::atom, std::move(n), {}}; }
  static Formula unary(Op op, Formula a) { return {op, {}, {std::move(a)}}; }
  static Formula binary(Op op, Formula a, Formula b) { return {op, {}, {std::move(a), std::move(b)}}; }

  // LTL unless a CTL operator occurs.
  Logic logic() const;
  bool is_temporal() const;
  std::set<std::string> atoms() const;

  // Fully bracketed binaries; re-parses to an equal formula.
  std::string str() const;

  bool operator==(const Formula&) const = default;
  std::strong_ordering operator<=>(const Formula& o) const;
};

// Parses `G (PaidGas -> F Notified)`, `AG EF Done`, `A[p U q]`, ...
// Atoms must be among `propositions`. Throws ModelError with code `syntax`,
// `unknown-proposition` or `mixed-logic`.
Formula compile_property(const std::string& text, const std::set<std::string>& propositions);
Formula compile_property(const std::string& text, const SystemGraph& g);
Formula compile_property(const std::string& text, const Model& m);

// Negation normal form of an LTL formula (only literals are negated).
Formula ltl_nnf(const Formula& f);

// Transition-based Büchi automaton over proposition valuations. A transition
// is enabled by a letter containing `positive` and disjoint from `negative`.
struct BuchiAutomaton {
  struct Edge {
    std::size_t source = 0;
    std::set<std::string> positive;
    std::set<std::string> negative;
    std::size_t target = 0;
    bool accepting = false;
  };
  std::vector<std::string> states;  // obligation sets, printed
  std::size_t initial = 0;
  std::vector<Edge> edges;

  bool enabled(const Edge& e, const std::set<std::string>& letter) const;
};

BuchiAutomaton ltl_to_buchi(const Formula& f);

struct CheckOptions {
  bool stutter = true;  // deadlock states repeat forever
};

// Ultimately periodic run: states[cycle_start..] repeats forever.
// actions[i] leads from states[i] to the next state; the last one closes the
// cycle. Implicit stutter steps use the action "-".
struct Lasso {
  std::vector<std::size_t> states;
  std::vector<std::string> actions;
  std::size_t cycle_start = 0;
};

struct Verdict {
  Logic logic = Logic::ltl;
  bool satisfied = false;
  std::optional<Lasso> counterexample;          // LTL
  std::optional<std::size_t> failing_state;     // CTL: an initial state
  std::string failing_subformula;               // CTL
  std::size_t product_states = 0;               // LTL search effort
};

Verdict check_ltl(const TransitionSystem& ts, const Formula& f, const CheckOptions& opts = {});
// Deadlock states always stutter here.
Verdict check_ctl(const TransitionSystem& ts, const Formula& f);
// CTL when a CTL operator occurs, LTL otherwise.
Verdict check(const TransitionSystem& ts, const Formula& f, const CheckOptions& opts = {});

// States of `ts` satisfying a CTL formula.
std::vector<bool> ctl_states(const TransitionSystem& ts, const Formula& f);

// The lasso as `ts v1` records, one state per position (keys may repeat),
// closed by `cycle-at <k>`.
std::string format_lasso(const TransitionSystem& ts, const Lasso& lasso);

// Promela model of a graph or composition with one `ltl` block per property.
// Throws ModelError("unsupported") for CTL properties or oversized symbol
// types.
std::string emit_promela(const Model& m, const std::vector<Formula>& props);
std::string emit_promela(const SystemGraph& g, const std::vector<Formula>& props);

}  // namespace sysgraph
