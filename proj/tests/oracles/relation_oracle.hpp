#pragma once

// Naive greatest-fixpoint relations: start from label-compatible pairs and
// delete violators until nothing changes.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sysgraph/transition_system.hpp"

namespace oracle {

using namespace sysgraph;

using Pairs = std::set<std::pair<std::size_t, std::size_t>>;

inline std::string match(const std::string& action, bool by_name) { return by_name ? action_match_key(action) : ""; }

// Can every move of x (in X) be answered by y (in Y) inside `rel`?
inline bool answers(const TransitionSystem& X, std::size_t x, const TransitionSystem& Y, std::size_t y,
                    const Pairs& rel, bool by_name, bool flipped) {
  for (auto ti : X.outgoing(x)) {
    const auto& t = X.transitions[ti];
    bool ok = false;
    for (auto ui : Y.outgoing(y)) {
      const auto& u = Y.transitions[ui];
      if (match(t.action, by_name) != match(u.action, by_name)) continue;
      auto p = flipped ? std::pair(u.target, t.target) : std::pair(t.target, u.target);
      if (rel.count(p)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

inline Pairs greatest(const TransitionSystem& a, const TransitionSystem& b, bool by_name, bool both_ways) {
  Pairs rel;
  for (std::size_t s = 0; s < a.states.size(); ++s)
    for (std::size_t t = 0; t < b.states.size(); ++t)
      if (a.states[s].labels == b.states[t].labels) rel.emplace(s, t);
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = rel.begin(); it != rel.end();) {
      auto [s, t] = *it;
      bool keep = answers(a, s, b, t, rel, by_name, false) && (!both_ways || answers(b, t, a, s, rel, by_name, true));
      if (keep) {
        ++it;
      } else {
        it = rel.erase(it);
        changed = true;
      }
    }
  }
  return rel;
}

inline bool initials_covered(const TransitionSystem& a, const TransitionSystem& b, const Pairs& rel, bool both_ways) {
  for (auto i : a.initials) {
    bool ok = false;
    for (auto j : b.initials) ok = ok || rel.count({i, j});
    if (!ok) return false;
  }
  if (!both_ways) return true;
  for (auto j : b.initials) {
    bool ok = false;
    for (auto i : a.initials) ok = ok || rel.count({i, j});
    if (!ok) return false;
  }
  return true;
}

inline bool bisimilar(const TransitionSystem& a, const TransitionSystem& b, bool by_name) {
  return initials_covered(a, b, greatest(a, b, by_name, true), true);
}

inline bool simulated(const TransitionSystem& concrete, const TransitionSystem& abstract, bool by_name) {
  return initials_covered(concrete, abstract, greatest(concrete, abstract, by_name, false), false);
}

// Pair-by-pair check that `rel` is a (bi)simulation covering the initials.
inline bool valid_witness(const TransitionSystem& a, const TransitionSystem& b,
                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs, bool by_name,
                          bool both_ways) {
  Pairs rel(pairs.begin(), pairs.end());
  for (auto [s, t] : rel) {
    if (s >= a.states.size() || t >= b.states.size()) return false;
    if (a.states[s].labels != b.states[t].labels) return false;
    if (!answers(a, s, b, t, rel, by_name, false)) return false;
    if (both_ways && !answers(b, t, a, s, rel, by_name, true)) return false;
  }
  return initials_covered(a, b, rel, both_ways);
}

}  // namespace oracle
