#pragma once

// Integration-stage algebra: embedding one graph at a declarator of another,
// module detection, vertical composition and next-move classification.

#include <map>
#include <string>
#include <vector>

#include "sysgraph/elaboration.hpp"
#include "sysgraph/graph.hpp"

namespace sysgraph {

// Suffix appended to colliding inner names when the union must be disjoint.
inline constexpr const char* kInnerSuffix = "_inner";

struct EmbedResult {
  SystemGraph graph;
  bool module = false;  // plain unions were used
  // Inner declarator and proposition names that were renamed.
  std::map<std::string, std::string> renames;
};

// D1 ⊆ D2 with equal pins, A1 ⊆ A2, P1 ⊆ P2 with equal formulas, and equal
// labels on every reachable state of the inner graph.
bool is_module(const SystemGraph& inner, const SystemGraph& outer);

// Splices `inner` into `outer` in place of declarator `at`. Throws
// ModelError with codes unresolved-name, signature-mismatch or
// nonterminal-inner.
EmbedResult embed(const SystemGraph& inner, const SystemGraph& outer, const std::string& at);

// [T1 | ... | Tn] over `channels`. Variables outside `shared` must be owned by
// one part only (ModelError("overlap")); every channel a part declares must
// match the shared declaration (ModelError("channel-mismatch")).
ChannelSystem compose_vertical(const std::vector<SystemGraph>& parts, const std::vector<ChannelDecl>& channels,
                               const std::vector<std::string>& shared = {});

enum class NextMove { deliver, integrate, iterate };

std::string to_string(NextMove m);
NextMove classify_next_move(bool refinable, bool dependent);

}  // namespace sysgraph
