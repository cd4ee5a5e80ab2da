#pragma once

// Implementation-stage skeletons: an immutable variable table and control
// flow, overridable effect hooks, divergence interfaces and channel
// descriptors, rendered as canonical JSON or as class-shaped pseudocode.

#include <set>
#include <string>
#include <vector>

#include "sysgraph/graph.hpp"

namespace sysgraph {

struct PropertyEvidence {
  std::string formula;
  bool satisfied = false;
};

struct SkeletonOptions {
  std::vector<PropertyEvidence> evidence;  // verification results for the graph
  bool force = false;                      // accept a graph without passing evidence
  std::set<std::string> external_channels;
};

struct SkeletonBundle {
  static constexpr int kSchemaVersion = 1;

  struct Row {
    std::size_t index = 0;
    std::string source;
    std::string guard;
    Action action;
    std::string target;
  };
  struct Hook {
    std::string action;
    std::string name;
  };
  struct DivergenceInterface {
    std::string name;
    std::string declarator;
    std::vector<std::size_t> edges;  // control-flow rows offered to the signal
  };
  struct ChannelDescriptor {
    ChannelDecl channel;
    bool external = false;
    std::vector<std::string> operations;  // internal: send/receive used by the graph
    std::string adapter;                  // external: required adapter interface
  };

  int schema_version = kSchemaVersion;
  std::string system;
  bool refinable = false;
  std::vector<VarSignature> variables;
  std::vector<StateDeclarator> declarators;
  std::vector<std::string> terminals;
  std::vector<Row> control_flow;
  std::vector<Hook> effect_hooks;
  std::vector<DivergenceInterface> divergence_interfaces;
  std::vector<ChannelDescriptor> channels;
  std::string entry_declarator;
  std::string entry_guard;
  std::vector<Proposition> propositions;
  std::vector<LabelRule> labeling;
  std::vector<PropertyEvidence> verification;
  bool forced = false;
};

// Throws ModelError("unverified") when no evidence is given or some property
// fails, unless forced.
SkeletonBundle generate_skeleton(const SystemGraph& g, const SkeletonOptions& opts = {});

// Compiles and checks each property against the elaborated graph.
std::vector<PropertyEvidence> verify_properties(const SystemGraph& g, const std::vector<std::string>& properties);

// Sorted keys, two-space indentation, trailing newline.
std::string render_bundle_json(const SkeletonBundle& b);
std::string render_reference_text(const SkeletonBundle& b);

// Throws ModelError("syntax") on malformed documents and ModelError("schema")
// on an unsupported schema version.
SkeletonBundle read_bundle_json(const std::string& text);

// Inverse mapping on the fields the bundle shares with a graph.
SystemGraph bundle_to_graph(const SkeletonBundle& b);

}  // namespace sysgraph
