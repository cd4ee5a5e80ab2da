#pragma once

// The `.sg` modelling language: lexing, parsing, name resolution, static
// validation and pretty printing.

#include <optional>
#include <string>
#include <vector>

#include "sysgraph/diagnostics.hpp"
#include "sysgraph/graph.hpp"

namespace sysgraph {

struct SourceUnit {
  std::string path;
  std::string text;
};

template <typename T>
struct ParseResult {
  std::optional<T> value;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return value.has_value(); }
};

// Exactly one `system` block and no composition.
ParseResult<SystemGraph> parse_source(const SourceUnit& src);

// Any number of systems; with several systems a `parallel` declaration picks
// the components. A single-system file yields a one-component model.
ParseResult<Model> parse_model(const SourceUnit& src);

// Reads `path` from disk; I/O failures come back as an `io` diagnostic.
ParseResult<Model> load_model(const std::string& path);
ParseResult<SystemGraph> load_graph(const std::string& path);

// Static well-formedness. Never throws.
std::vector<Diagnostic> validate_graph(const SystemGraph& g);
std::vector<Diagnostic> validate_model(const Model& m);

// Source-order printing that re-parses to an equal graph.
std::string print_graph(const SystemGraph& g);
std::string print_model(const Model& m);

// Order-independent printing used for content digests: sorted declarators,
// transitions, propositions and rules.
std::string canonical_text(const SystemGraph& g);

// Parses a stand-alone guard against a graph's variables (symbols resolved).
Guard parse_guard(const std::string& text, const SystemGraph& g);

}  // namespace sysgraph
