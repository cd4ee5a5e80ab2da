#pragma once

// Explicit labelled transition systems and their `ts v1` text form.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sysgraph/value.hpp"

namespace sysgraph {

using ChannelContents = std::map<std::string, std::vector<TypedValue>>;

// ⟨s1,…,sn, V, C⟩: the declarators the components sit in (flattened, in
// component order), the merged evaluation and the channel queues.
struct GlobalState {
  std::vector<std::string> declarators;
  Evaluation merged;
  ChannelContents channels;

  // `init;paid=false,status=0,tx=0;c=[7]`. Whitespace free, injective.
  std::string key() const;

  auto operator<=>(const GlobalState&) const = default;
};

struct TsState {
  std::string key;
  std::set<std::string> labels;
  std::optional<GlobalState> global;  // absent for imported systems
};

struct TsTransition {
  std::size_t source = 0;
  std::string action;
  std::size_t target = 0;

  auto operator<=>(const TsTransition&) const = default;
};

class TransitionSystem {
 public:
  std::vector<TsState> states;
  std::vector<TsTransition> transitions;
  std::vector<std::size_t> initials;
  std::set<std::string> atomic_propositions;
  bool truncated = false;

  std::size_t add_state(TsState s);
  void add_transition(std::size_t src, std::string action, std::size_t dst);

  std::optional<std::size_t> find(const std::string& key) const;
  // Indices into `transitions`, in insertion order.
  const std::vector<std::size_t>& outgoing(std::size_t state) const;
  bool is_initial(std::size_t state) const;
  std::set<std::string> actions() const;

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
};

// Communication actions match on (channel, direction): `c!5` -> `c!`.
std::string action_match_key(const std::string& action);

void write_ts(std::ostream& os, const TransitionSystem& ts);
std::string write_ts(const TransitionSystem& ts);
// Throws ModelError("syntax") on malformed input.
TransitionSystem read_ts(std::istream& is);
TransitionSystem read_ts(const std::string& text);

}  // namespace sysgraph
