#include "sysgraph/equivalence.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace sysgraph {

std::string to_string(RefinementMode mode) {
  return mode == RefinementMode::bisimulation ? "bisimulation" : "simulation";
}

namespace {

std::string key_of(const std::string& action, ActionMatching m) {
  return m == ActionMatching::ignore ? std::string() : action_match_key(action);
}

// The disjoint union of two systems with actions reduced to match keys.
struct Union {
  std::size_t left_size = 0;
  std::vector<std::set<std::string>> labels;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out;  // (action id, target)
  std::vector<std::string> action_names;

  Union(const TransitionSystem& a, const TransitionSystem& b, ActionMatching m) {
    left_size = a.states.size();
    std::map<std::string, std::size_t> ids;
    auto add = [&](const TransitionSystem& ts, std::size_t offset) {
      for (const auto& s : ts.states) labels.push_back(s.labels);
      out.resize(labels.size());
      for (const auto& t : ts.transitions) {
        std::string k = key_of(t.action, m);
        auto [it, fresh] = ids.emplace(k, action_names.size());
        if (fresh) action_names.push_back(k);
        out[t.source + offset].emplace_back(it->second, t.target + offset);
      }
    };
    add(a, 0);
    add(b, left_size);
  }
  std::size_t size() const { return labels.size(); }
};

std::vector<std::size_t> coarsest_partition(const Union& u) {
  std::vector<std::size_t> block(u.size());
  {
    std::map<std::set<std::string>, std::size_t> ids;
    for (std::size_t s = 0; s < u.size(); ++s) block[s] = ids.emplace(u.labels[s], ids.size()).first->second;
  }
  std::size_t count = 0;
  for (auto b : block) count = std::max(count, b + 1);
  // Split blocks by their successor signature until nothing changes.
  while (true) {
    std::map<std::pair<std::size_t, std::set<std::pair<std::size_t, std::size_t>>>, std::size_t> ids;
    std::vector<std::size_t> next(u.size());
    for (std::size_t s = 0; s < u.size(); ++s) {
      std::set<std::pair<std::size_t, std::size_t>> sig;
      for (const auto& [a, t] : u.out[s]) sig.emplace(a, block[t]);
      next[s] = ids.emplace(std::pair(block[s], std::move(sig)), ids.size()).first->second;
    }
    std::size_t n = ids.size();
    block = std::move(next);
    if (n == count) break;
    count = n;
  }
  return block;
}

// A move of `s` that `t` cannot answer under relation `related`.
template <typename Related>
std::optional<UnmatchedMove> find_unmatched(const Union& u, std::size_t s, std::size_t t, bool from_left,
                                            const TransitionSystem& ts_s, Related related) {
  for (const auto& [a, s2] : u.out[s]) {
    bool answered = std::any_of(u.out[t].begin(), u.out[t].end(),
                                [&](const auto& m) { return m.first == a && related(s2, m.second); });
    if (answered) continue;
    std::size_t offset = from_left ? 0 : u.left_size;
    std::size_t src = s - offset, dst = s2 - offset;
    for (auto ti : ts_s.outgoing(src)) {
      const TsTransition& tr = ts_s.transitions[ti];
      if (tr.target == dst) return UnmatchedMove{from_left, src, tr.action, dst};
    }
  }
  return std::nullopt;
}

std::string describe_labels(const std::set<std::string>& l) {
  std::string out = "{";
  for (const auto& x : l) out += (out.size() > 1 ? "," : "") + x;
  return out + "}";
}

}  // namespace

RefinementReport bisim_equiv(const TransitionSystem& a, const TransitionSystem& b, ActionMatching matching) {
  RefinementReport r;
  r.mode = RefinementMode::bisimulation;
  Union u(a, b, matching);
  auto block = coarsest_partition(u);
  const std::size_t off = u.left_size;
  auto related = [&](std::size_t x, std::size_t y) { return block[x] == block[y]; };

  auto matched = [&](std::size_t i, const std::vector<std::size_t>& others, std::size_t other_offset) {
    return std::any_of(others.begin(), others.end(), [&](std::size_t j) { return related(i, j + other_offset); });
  };
  std::optional<std::pair<std::size_t, std::size_t>> bad;
  for (auto i : a.initials)
    if (!matched(i, b.initials, off)) {
      std::size_t j = b.initials.empty() ? 0 : *std::min_element(b.initials.begin(), b.initials.end());
      if (!bad || std::pair(i, j) < *bad) bad = std::pair(i, j);
    }
  for (auto j : b.initials)
    if (!matched(j + off, a.initials, 0)) {
      std::size_t i = a.initials.empty() ? 0 : *std::min_element(a.initials.begin(), a.initials.end());
      if (!bad || std::pair(i, j) < *bad) bad = std::pair(i, j);
    }

  if (!bad) {
    r.holds = true;
    for (std::size_t i = 0; i < a.states.size(); ++i)
      for (std::size_t j = 0; j < b.states.size(); ++j)
        if (related(i, j + off)) r.relation.emplace_back(i, j);
    r.explanation = "bisimilar";
    return r;
  }
  r.distinguishing = bad;
  if (a.initials.empty() || b.initials.empty()) {
    r.explanation = "one system has no initial state";
    return r;
  }
  auto [i, j] = *bad;
  if (u.labels[i] != u.labels[j + off]) {
    r.explanation = "labels differ: " + describe_labels(u.labels[i]) + " vs " + describe_labels(u.labels[j + off]);
    return r;
  }
  r.move = find_unmatched(u, i, j + off, true, a, related);
  if (!r.move) r.move = find_unmatched(u, j + off, i, false, b, related);
  r.explanation = r.move ? "move " + r.move->action + " of the " + (r.move->from_left ? "left" : "right") +
                               " system has no bisimilar answer"
                         : "states are not bisimilar";
  return r;
}

RefinementReport simulates(const TransitionSystem& concrete, const TransitionSystem& abstract,
                           ActionMatching matching) {
  RefinementReport r;
  r.mode = RefinementMode::simulation;
  Union u(concrete, abstract, matching);
  const std::size_t nc = concrete.states.size(), na = abstract.states.size(), off = u.left_size;
  const std::size_t nact = std::max<std::size_t>(1, u.action_names.size());

  std::vector<char> rel(nc * na, 0);
  auto in = [&](std::size_t s, std::size_t t) { return rel[s * na + t] != 0; };
  for (std::size_t s = 0; s < nc; ++s)
    for (std::size_t t = 0; t < na; ++t) rel[s * na + t] = u.labels[s] == u.labels[t + off];

  // Predecessors per action in both systems.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pred(u.size());
  for (std::size_t s = 0; s < u.size(); ++s)
    for (const auto& [a, t] : u.out[s]) pred[t].emplace_back(a, s);

  // count[(s', t, a)] = |{t' : t -a-> t', (s', t') related}|
  std::unordered_map<std::uint64_t, std::size_t> count;
  auto ckey = [&](std::size_t s2, std::size_t t, std::size_t a) {
    return (static_cast<std::uint64_t>(s2) * na + t) * nact + a;
  };
  std::vector<std::pair<std::size_t, std::size_t>> removed;
  for (std::size_t s = 0; s < nc; ++s)
    for (std::size_t t = 0; t < na; ++t)
      if (!in(s, t)) removed.emplace_back(s, t);
  for (std::size_t s2 = 0; s2 < nc; ++s2)
    for (std::size_t t = 0; t < na; ++t)
      for (const auto& [a, t2] : u.out[t + off])
        if (in(s2, t2 - off)) ++count[ckey(s2, t, a)];

  // A related pair (s, t) is violated when some s -a-> s' has count 0 at t.
  auto violated = [&](std::size_t s, std::size_t t) {
    for (const auto& [a, s2] : u.out[s]) {
      auto it = count.find(ckey(s2, t, a));
      if (it == count.end() || it->second == 0) return true;
    }
    return false;
  };
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t s = 0; s < nc; ++s)
    for (std::size_t t = 0; t < na; ++t)
      if (in(s, t) && violated(s, t)) {
        rel[s * na + t] = 0;
        work.emplace_back(s, t);
      }
  while (!work.empty()) {
    auto [s2, t2] = work.back();
    work.pop_back();
    for (const auto& [a, t] : pred[t2 + off]) {
      std::size_t& c = count[ckey(s2, t - off, a)];
      if (--c != 0) continue;
      for (const auto& [b, s] : pred[s2]) {
        if (b != a || !in(s, t - off)) continue;
        rel[s * na + (t - off)] = 0;
        work.emplace_back(s, t - off);
      }
    }
  }

  std::optional<std::pair<std::size_t, std::size_t>> bad;
  for (auto i : concrete.initials) {
    bool ok = std::any_of(abstract.initials.begin(), abstract.initials.end(), [&](std::size_t j) { return in(i, j); });
    if (ok) continue;
    std::size_t j = abstract.initials.empty() ? 0 : *std::min_element(abstract.initials.begin(), abstract.initials.end());
    if (!bad || std::pair(i, j) < *bad) bad = std::pair(i, j);
  }
  if (!bad) {
    r.holds = true;
    for (std::size_t s = 0; s < nc; ++s)
      for (std::size_t t = 0; t < na; ++t)
        if (in(s, t)) r.relation.emplace_back(s, t);
    r.explanation = "simulated";
    return r;
  }
  r.distinguishing = bad;
  if (abstract.initials.empty()) {
    r.explanation = "the abstract system has no initial state";
    return r;
  }
  auto [i, j] = *bad;
  if (u.labels[i] != u.labels[j + off]) {
    r.explanation = "labels differ: " + describe_labels(u.labels[i]) + " vs " + describe_labels(u.labels[j + off]);
    return r;
  }
  r.move = find_unmatched(u, i, j + off, true, concrete,
                          [&](std::size_t x, std::size_t y) { return in(x, y - off); });
  r.explanation = r.move ? "move " + r.move->action + " of the concrete system cannot be simulated"
                         : "states are not related";
  return r;
}

RefinementReport refine_check(const Model& old_model, const Model& new_model, RefinementMode mode,
                              ActionMatching matching, const ExplorationConfig& cfg) {
  TransitionSystem old_ts = elaborate(old_model, cfg);
  TransitionSystem new_ts = elaborate(new_model, cfg);
  if (mode == RefinementMode::bisimulation) return bisim_equiv(old_ts, new_ts, matching);
  return simulates(new_ts, old_ts, matching);
}

RefinementReport refine_check(const SystemGraph& old_graph, const SystemGraph& new_graph, RefinementMode mode,
                              ActionMatching matching, const ExplorationConfig& cfg) {
  return refine_check(Model{old_graph.name, {old_graph}, {}}, Model{new_graph.name, {new_graph}, {}}, mode, matching,
                      cfg);
}

}  // namespace sysgraph
