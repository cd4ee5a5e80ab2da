#pragma once

// Executable semantics: runs a graph or a parallel model step by step with
// action effects, divergence resolution, channel feeds and trace recording.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sysgraph/elaboration.hpp"
#include "sysgraph/graph.hpp"
#include "sysgraph/transition_system.hpp"

namespace sysgraph {

// Two outgoing edges of one declarator whose guards cannot tell them apart.
struct Divergence {
  std::string declarator;
  std::size_t first = 0;   // graph transition indices, first < second
  std::size_t second = 0;

  bool operator==(const Divergence&) const = default;
};

std::vector<Divergence> detect_divergences(const SystemGraph& g);

// What a handler sees besides the evaluation snapshot.
struct EffectContext {
  std::string action;
  std::string guard;
  std::vector<std::string> components;
  std::size_t step = 0;         // index of the trace step the action produced
  std::uint64_t timestamp = 0;
};

using EffectHandler = std::function<void(const Evaluation&, const EffectContext&)>;

class EffectRegistry {
 public:
  // Registers (or replaces) the handler for an action. Communication actions
  // may be registered by their full text (`c?tx`) or their match key (`c?`).
  void on(const std::string& action, EffectHandler handler);
  const EffectHandler* find(const std::string& action) const;
  bool empty() const { return handlers_.empty(); }
  std::vector<std::string> actions() const;

 private:
  std::map<std::string, EffectHandler> handlers_;
};

// One enabled alternative offered to a resolver.
struct Choice {
  std::string action;
  std::string component;
  std::string source;
  std::string target;
  std::size_t edge = 0;  // transition index in the component's graph
};

class DivergenceResolver {
 public:
  enum class Strategy { scripted, policy, random, prompt };

  // Entries are consumed in order; each names an action or an option index.
  static DivergenceResolver scripted(std::vector<std::string> choices);
  // Lowest (component, edge) wins.
  static DivergenceResolver policy();
  static DivergenceResolver random(std::uint64_t seed);
  // Lists the options on `out`, reads one line (index or action) from `in`.
  static DivergenceResolver prompt(std::istream& in, std::ostream& out);

  Strategy strategy() const { return strategy_; }
  // Throws ModelError("divergence") when no usable choice is left.
  std::size_t choose(const std::string& where, const std::vector<Choice>& options);

 private:
  explicit DivergenceResolver(Strategy s) : strategy_(s) {}

  Strategy strategy_;
  std::vector<std::string> script_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
  std::istream* in_ = nullptr;
  std::ostream* out_ = nullptr;
};

// A source of messages for an external channel.
class MessageFeed {
 public:
  virtual ~MessageFeed() = default;
  // Next message, or nothing while the feed has nothing to offer.
  virtual std::optional<TypedValue> next(const VarType& domain) = 0;
};

std::shared_ptr<MessageFeed> values_feed(std::vector<TypedValue> values);
// One value per line; blank lines and `#` comments are skipped.
std::shared_ptr<MessageFeed> stream_feed(std::shared_ptr<std::istream> in);
std::shared_ptr<MessageFeed> file_feed(const std::string& path);

// `true`, `-3`, `ok`: parsed against the domain. Throws ModelError("range").
TypedValue parse_message(const std::string& text, const VarType& domain);

struct ChannelEndpoint {
  enum class Mode { internal, external };

  std::string channel;
  Mode mode = Mode::internal;
  std::shared_ptr<MessageFeed> feed;  // external only

  static ChannelEndpoint internal(std::string channel);
  static ChannelEndpoint external(std::string channel, std::shared_ptr<MessageFeed> feed);
  static ChannelEndpoint external(std::string channel, std::vector<TypedValue> values);
};

struct RunOptions {
  std::size_t step_limit = 10'000;  // logical ticks, waiting included
  const EffectRegistry* effects = nullptr;
  DivergenceResolver* resolver = nullptr;
  std::vector<ChannelEndpoint> endpoints;
  // run_parallel only: scheduler seed and join evaluations.
  std::uint64_t seed = 0;
  std::vector<Evaluation> confluence;
};

struct TraceStep {
  std::string key;  // GlobalState::key() of the state reached
  GlobalState state;  // not restored by read_trace
  std::set<std::string> labels;
  std::string action;  // empty for step 0
  std::string guard;   // guard text of the fired edge(s)
  std::vector<std::string> components;
  std::uint64_t timestamp = 0;

  bool operator==(const TraceStep& o) const {
    return key == o.key && labels == o.labels && action == o.action && guard == o.guard &&
           components == o.components && timestamp == o.timestamp;
  }
};

struct Trace {
  enum class Stop { terminal, deadlock, step_limit };

  std::string model;
  std::vector<TraceStep> steps;
  bool terminal = false;
  Stop stop = Stop::deadlock;
  std::vector<std::size_t> confluences;  // step index after which a join released

  bool operator==(const Trace&) const = default;
};

std::string to_string(Trace::Stop stop);

Trace run(const SystemGraph& g, const RunOptions& opts = {});
Trace run(const SystemGraph& g, const EffectRegistry& effects, DivergenceResolver& resolver,
          std::vector<ChannelEndpoint> endpoints = {}, std::size_t step_limit = 10'000);

// Seeded interleaving of the components of a model.
Trace run_parallel(const Model& m, std::uint64_t seed, const RunOptions& opts = {});

bool trace_conformance(const Trace& t, const TransitionSystem& ts);

// `ts v1` records, one state per step, plus `time`, `guard`, `join` and
// `stop` lines.
void write_trace(std::ostream& os, const Trace& t);
std::string write_trace(const Trace& t);
Trace read_trace(std::istream& is);
Trace read_trace(const std::string& text);

}  // namespace sysgraph
