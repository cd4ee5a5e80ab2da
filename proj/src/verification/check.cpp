#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sysgraph/diagnostics.hpp"
#include "sysgraph/verification.hpp"

namespace sysgraph {

using Op = Formula::Op;

namespace {

constexpr std::size_t kStutter = std::numeric_limits<std::size_t>::max();

// Successor lists with deadlocks optionally closed by a stutter loop. Entries
// are (transition index or kStutter, target).
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> successor_lists(const TransitionSystem& ts,
                                                                               bool stutter) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out(ts.states.size());
  for (std::size_t s = 0; s < ts.states.size(); ++s) {
    for (auto ti : ts.outgoing(s)) out[s].emplace_back(ti, ts.transitions[ti].target);
    if (out[s].empty() && stutter) out[s].emplace_back(kStutter, s);
  }
  return out;
}

// Product of the system with the automaton for the negated property. Nodes are
// (state, automaton state, entered-by-accepting-edge).
class Product {
 public:
  Product(const TransitionSystem& ts, const BuchiAutomaton& a, bool stutter)
      : ts_(ts), a_(a), succ_(successor_lists(ts, stutter)), by_source_(a.states.size()) {
    for (std::size_t i = 0; i < a.edges.size(); ++i) by_source_[a.edges[i].source].push_back(i);
  }

  using Node = std::uint64_t;
  struct Succ {
    std::size_t transition;
    Node node;
  };

  Node node(std::size_t s, std::size_t q, bool acc) const { return (static_cast<Node>(s) * a_.states.size() + q) * 2 + acc; }
  std::size_t state_of(Node n) const { return static_cast<std::size_t>(n / 2 / a_.states.size()); }
  bool accepting(Node n) const { return n % 2 == 1; }

  std::vector<Node> initials() const {
    std::vector<Node> out;
    for (auto s : ts_.initials) out.push_back(node(s, a_.initial, false));
    return out;
  }

  std::vector<Succ> successors(Node n) const {
    std::size_t s = state_of(n);
    std::size_t q = static_cast<std::size_t>(n / 2 % a_.states.size());
    std::vector<Succ> out;
    const auto& letter = ts_.states[s].labels;
    for (auto ei : by_source_[q]) {
      const auto& e = a_.edges[ei];
      if (!a_.enabled(e, letter)) continue;
      for (const auto& [ti, dst] : succ_[s]) out.push_back({ti, node(dst, e.target, e.accepting)});
    }
    return out;
  }

 private:
  const TransitionSystem& ts_;
  const BuchiAutomaton& a_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> succ_;
  std::vector<std::vector<std::size_t>> by_source_;
};

struct Frame {
  Product::Node node;
  std::vector<Product::Succ> succ;
  std::size_t next = 0;
  std::size_t via = kStutter;  // transition that entered this node
};

std::string action_of(const TransitionSystem& ts, std::size_t ti) {
  return ti == kStutter ? "-" : ts.transitions[ti].action;
}

// Drops repetitions: shortest period first, then rotates the cycle backwards
// into the prefix while the lasso describes the same run.
void normalize(Lasso& l) {
  std::size_t m = l.states.size() - l.cycle_start;
  for (std::size_t d = 1; d < m; ++d) {
    if (m % d) continue;
    bool periodic = true;
    for (std::size_t i = d; i < m && periodic; ++i)
      periodic = l.states[l.cycle_start + i] == l.states[l.cycle_start + i % d] &&
                 l.actions[l.cycle_start + i] == l.actions[l.cycle_start + i % d];
    if (periodic) {
      l.states.resize(l.cycle_start + d);
      l.actions.resize(l.cycle_start + d);
      break;
    }
  }
  while (l.cycle_start > 0 && l.states[l.cycle_start - 1] == l.states.back() &&
         l.actions[l.cycle_start - 1] == l.actions.back()) {
    l.states.pop_back();
    l.actions.pop_back();
    --l.cycle_start;
  }
}

}  // namespace

Verdict check_ltl(const TransitionSystem& ts, const Formula& f, const CheckOptions& opts) {
  if (f.logic() != Logic::ltl) throw ModelError("unsupported", "check_ltl needs an LTL formula");
  Verdict v;
  v.logic = Logic::ltl;
  BuchiAutomaton a = ltl_to_buchi(Formula::unary(Op::negation, f));
  Product p(ts, a, opts.stutter);

  std::unordered_set<Product::Node> outer_seen, inner_seen;
  std::vector<Frame> outer, inner;

  // Inner search from an accepting seed for a path back to it.
  auto cycle_through = [&](Product::Node seed) {
    inner.clear();
    inner.push_back({seed, p.successors(seed)});
    inner_seen.insert(seed);
    while (!inner.empty()) {
      Frame& top = inner.back();
      if (top.next == top.succ.size()) {
        inner.pop_back();
        continue;
      }
      auto s = top.succ[top.next++];
      if (s.node == seed) {
        inner.push_back({s.node, {}, 0, s.transition});
        return true;
      }
      if (inner_seen.insert(s.node).second) inner.push_back({s.node, p.successors(s.node), 0, s.transition});
    }
    return false;
  };

  bool found = false;
  for (auto init : p.initials()) {
    if (found || !outer_seen.insert(init).second) continue;
    outer.push_back({init, p.successors(init)});
    while (!outer.empty()) {
      Frame& top = outer.back();
      if (top.next < top.succ.size()) {
        auto s = top.succ[top.next++];
        if (outer_seen.insert(s.node).second) outer.push_back({s.node, p.successors(s.node), 0, s.transition});
        continue;
      }
      if (p.accepting(top.node) && cycle_through(top.node)) {
        found = true;
        break;
      }
      outer.pop_back();
    }
  }
  v.product_states = outer_seen.size();
  if (!found) {
    v.satisfied = true;
    return v;
  }

  // outer: initial .. seed; inner: seed .. (closing step back to seed).
  Lasso l;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    l.states.push_back(p.state_of(outer[i].node));
    if (i > 0) l.actions.push_back(action_of(ts, outer[i].via));
  }
  l.cycle_start = outer.size() - 1;
  for (std::size_t i = 1; i < inner.size(); ++i) {
    l.actions.push_back(action_of(ts, inner[i].via));
    if (i + 1 < inner.size()) l.states.push_back(p.state_of(inner[i].node));
  }
  normalize(l);
  v.counterexample = std::move(l);
  return v;
}

std::vector<bool> ctl_states(const TransitionSystem& ts, const Formula& f) {
  const std::size_t n = ts.states.size();
  auto succ = successor_lists(ts, true);
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& [ti, t] : succ[s]) pred[t].push_back(s);

  // E[a U b]: backward closure of b through a-states.
  auto eu = [&](const std::vector<bool>& a, const std::vector<bool>& b) {
    std::vector<bool> z = b;
    std::vector<std::size_t> work;
    for (std::size_t s = 0; s < n; ++s)
      if (z[s]) work.push_back(s);
    while (!work.empty()) {
      std::size_t t = work.back();
      work.pop_back();
      for (auto s : pred[t])
        if (!z[s] && a[s]) {
          z[s] = true;
          work.push_back(s);
        }
    }
    return z;
  };
  // A[a U b]: a state joins once all its successors have joined.
  auto au = [&](const std::vector<bool>& a, const std::vector<bool>& b) {
    std::vector<bool> z = b;
    std::vector<std::size_t> pending(n), work;
    for (std::size_t s = 0; s < n; ++s) {
      pending[s] = succ[s].size();
      if (z[s]) work.push_back(s);
    }
    while (!work.empty()) {
      std::size_t t = work.back();
      work.pop_back();
      for (auto s : pred[t])
        if (!z[s] && a[s] && --pending[s] == 0) {
          z[s] = true;
          work.push_back(s);
        }
    }
    return z;
  };
  // EG a: drop a-states until every remaining one keeps a successor inside.
  auto eg = [&](const std::vector<bool>& a) {
    std::vector<bool> z = a;
    std::vector<std::size_t> inside(n, 0), work;
    for (std::size_t s = 0; s < n; ++s)
      for (const auto& [ti, t] : succ[s])
        if (z[t]) ++inside[s];
    for (std::size_t s = 0; s < n; ++s)
      if (z[s] && inside[s] == 0) {
        z[s] = false;
        work.push_back(s);
      }
    while (!work.empty()) {
      std::size_t t = work.back();
      work.pop_back();
      for (auto s : pred[t])
        if (z[s] && --inside[s] == 0) {
          z[s] = false;
          work.push_back(s);
        }
    }
    return z;
  };
  auto negate = [](std::vector<bool> v) {
    v.flip();
    return v;
  };
  const std::vector<bool> all(n, true);

  std::function<std::vector<bool>(const Formula&)> sat = [&](const Formula& g) -> std::vector<bool> {
    switch (g.op) {
      case Op::truth: return all;
      case Op::falsity: return std::vector<bool>(n, false);
      case Op::atom: {
        std::vector<bool> out(n);
        for (std::size_t s = 0; s < n; ++s) out[s] = ts.states[s].labels.count(g.name) > 0;
        return out;
      }
      case Op::negation: return negate(sat(g.args[0]));
      case Op::conjunction:
      case Op::disjunction:
      case Op::implication: {
        auto a = sat(g.args[0]), b = sat(g.args[1]);
        std::vector<bool> out(n);
        for (std::size_t s = 0; s < n; ++s)
          out[s] = g.op == Op::conjunction ? a[s] && b[s] : g.op == Op::disjunction ? a[s] || b[s] : !a[s] || b[s];
        return out;
      }
      case Op::ex:
      case Op::ax: {
        auto a = sat(g.args[0]);
        std::vector<bool> out(n);
        for (std::size_t s = 0; s < n; ++s) {
          auto in = [&](const auto& e) { return a[e.second]; };
          out[s] = g.op == Op::ex ? std::any_of(succ[s].begin(), succ[s].end(), in)
                                  : std::all_of(succ[s].begin(), succ[s].end(), in);
        }
        return out;
      }
      case Op::ef: return eu(all, sat(g.args[0]));
      case Op::af: return au(all, sat(g.args[0]));
      case Op::eg: return eg(sat(g.args[0]));
      case Op::ag: return negate(eu(all, negate(sat(g.args[0]))));
      case Op::eu: return eu(sat(g.args[0]), sat(g.args[1]));
      case Op::au: return au(sat(g.args[0]), sat(g.args[1]));
      default: throw ModelError("unsupported", "path operator without quantifier in CTL: " + g.str());
    }
  };
  return sat(f);
}

Verdict check_ctl(const TransitionSystem& ts, const Formula& f) {
  Verdict v;
  v.logic = Logic::ctl;
  auto holds = ctl_states(ts, f);
  for (auto s : ts.initials) {
    if (holds[s]) continue;
    v.failing_state = s;
    // Narrow down through boolean structure to the part that fails here.
    const Formula* g = &f;
    while (true) {
      if (g->op == Op::conjunction) {
        g = !ctl_states(ts, g->args[0])[s] ? &g->args[0] : &g->args[1];
      } else if (g->op == Op::implication) {
        g = &g->args[1];
      } else {
        break;
      }
    }
    v.failing_subformula = g->str();
    return v;
  }
  v.satisfied = true;
  return v;
}

Verdict check(const TransitionSystem& ts, const Formula& f, const CheckOptions& opts) {
  return f.logic() == Logic::ctl ? check_ctl(ts, f) : check_ltl(ts, f, opts);
}

std::string format_lasso(const TransitionSystem& ts, const Lasso& l) {
  std::ostringstream os;
  os << "ts v1\n";
  for (std::size_t i = 0; i < l.states.size(); ++i) {
    const auto& st = ts.states[l.states[i]];
    os << "state " << i << ' ' << st.key;
    for (const auto& x : st.labels) os << ' ' << x;
    os << '\n';
  }
  if (!l.states.empty()) os << "init 0\n";
  for (std::size_t i = 0; i < l.actions.size(); ++i)
    os << "trans " << i << ' ' << l.actions[i] << ' ' << (i + 1 < l.states.size() ? i + 1 : l.cycle_start) << '\n';
  os << "cycle-at " << l.cycle_start << '\n';
  return os.str();
}

}  // namespace sysgraph
