// Obligation-set automaton: states are sets of formulas still to be
// satisfied, edges carry the literals the current letter must satisfy.
// Acceptance is generalized over the until subformulas and then
// degeneralized with a level counter.

#include <algorithm>
#include <map>

#include "sysgraph/diagnostics.hpp"
#include "sysgraph/verification.hpp"

namespace sysgraph {

using Op = Formula::Op;

bool BuchiAutomaton::enabled(const Edge& e, const std::set<std::string>& letter) const {
  for (const auto& p : e.positive)
    if (!letter.count(p)) return false;
  for (const auto& n : e.negative)
    if (letter.count(n)) return false;
  return true;
}

namespace {

using Obligations = std::set<int>;

struct Move {
  std::set<std::string> pos, neg;
  Obligations next;
  auto operator<=>(const Move&) const = default;
};

using Moves = std::set<Move>;

Moves cross(const Moves& a, const Moves& b) {
  Moves out;
  for (const auto& x : a)
    for (const auto& y : b) {
      Move m = x;
      m.pos.insert(y.pos.begin(), y.pos.end());
      m.neg.insert(y.neg.begin(), y.neg.end());
      m.next.insert(y.next.begin(), y.next.end());
      bool clash = std::any_of(m.pos.begin(), m.pos.end(), [&](const std::string& p) { return m.neg.count(p) > 0; });
      if (!clash) out.insert(std::move(m));
    }
  return out;
}

Moves unite(Moves a, const Moves& b) {
  a.insert(b.begin(), b.end());
  return a;
}

class Builder {
 public:
  int intern(const Formula& f) {
    auto [it, fresh] = ids_.emplace(f, static_cast<int>(pool_.size()));
    if (fresh) pool_.push_back(f);
    return it->second;
  }
  const Formula& at(int id) const { return pool_[id]; }

  const Moves& delta(int id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    Formula f = pool_[id];  // interning below may grow the pool
    Moves m = compute(f);
    return memo_.emplace(id, std::move(m)).first->second;
  }

  Moves delta(const Obligations& e) {
    Moves acc{Move{}};
    for (int id : e) acc = cross(acc, delta(id));
    return acc;
  }

 private:
  std::vector<Formula> pool_;
  std::map<Formula, int> ids_;
  std::map<int, Moves> memo_;

  Moves compute(const Formula& f) {
    switch (f.op) {
      case Op::truth: return {Move{}};
      case Op::falsity: return {};
      case Op::atom: return {Move{{f.name}, {}, {}}};
      case Op::negation: return {Move{{}, {f.args[0].name}, {}}};
      case Op::conjunction: return cross(delta(intern(f.args[0])), delta(intern(f.args[1])));
      case Op::disjunction: return unite(delta(intern(f.args[0])), delta(intern(f.args[1])));
      case Op::next: return {Move{{}, {}, {intern(f.args[0])}}};
      case Op::until: {
        Moves stay = cross(delta(intern(f.args[0])), {Move{{}, {}, {intern(f)}}});
        return unite(delta(intern(f.args[1])), stay);
      }
      case Op::release: {
        Moves wait = unite(delta(intern(f.args[0])), {Move{{}, {}, {intern(f)}}});
        return cross(delta(intern(f.args[1])), wait);
      }
      case Op::eventually: return unite(delta(intern(f.args[0])), {Move{{}, {}, {intern(f)}}});
      case Op::always: return cross(delta(intern(f.args[0])), {Move{{}, {}, {intern(f)}}});
      default: throw ModelError("unsupported", "operator not allowed in LTL: " + f.str());
    }
  }
};

void collect_untils(const Formula& f, std::set<Formula>& out) {
  if (f.op == Op::until || f.op == Op::eventually) out.insert(f);
  for (const auto& a : f.args) collect_untils(a, out);
}

std::string describe(const Builder& b, const Obligations& e) {
  std::string out = "{";
  bool first = true;
  for (int id : e) {
    if (!first) out += ", ";
    first = false;
    out += b.at(id).str();
  }
  return out + "}";
}

}  // namespace

BuchiAutomaton ltl_to_buchi(const Formula& f) {
  if (f.logic() != Logic::ltl) throw ModelError("unsupported", "ltl_to_buchi needs an LTL formula");
  Formula root = ltl_nnf(f);
  Builder b;

  std::set<Formula> until_set;
  collect_untils(root, until_set);
  std::vector<int> untils;     // formula ids
  std::vector<int> goals;      // id of the right operand
  for (const auto& u : until_set) {
    untils.push_back(b.intern(u));
    goals.push_back(b.intern(u.op == Op::until ? u.args[1] : u.args[0]));
  }
  const std::size_t k = untils.size();

  // A move satisfies until u when u is not postponed, or the goal's own
  // obligations are already discharged by the move.
  auto accepts = [&](std::size_t i, const Move& m) {
    if (!m.next.count(untils[i])) return true;
    for (const auto& g : b.delta(goals[i])) {
      if (std::includes(m.pos.begin(), m.pos.end(), g.pos.begin(), g.pos.end()) &&
          std::includes(m.neg.begin(), m.neg.end(), g.neg.begin(), g.neg.end()) &&
          std::includes(m.next.begin(), m.next.end(), g.next.begin(), g.next.end()))
        return true;
    }
    return false;
  };

  BuchiAutomaton a;
  std::map<std::pair<Obligations, std::size_t>, std::size_t> index;
  std::vector<std::pair<Obligations, std::size_t>> queue;
  auto state = [&](const Obligations& e, std::size_t level) {
    auto [it, fresh] = index.emplace(std::pair(e, level), a.states.size());
    if (fresh) {
      a.states.push_back(describe(b, e) + (k > 1 ? "@" + std::to_string(level) : ""));
      queue.emplace_back(e, level);
    }
    return it->second;
  };
  a.initial = state({b.intern(root)}, 0);

  std::set<std::tuple<std::size_t, std::set<std::string>, std::set<std::string>, std::size_t, bool>> seen;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    auto [e, level] = queue[qi];
    std::size_t src = index.at({e, level});
    for (const auto& m : b.delta(e)) {
      std::size_t j = level;
      bool accepting = k == 0;
      while (j < k && accepts(j, m)) ++j;
      if (k > 0 && j == k) {
        accepting = true;
        j = 0;
      }
      std::size_t dst = state(m.next, j);
      if (seen.emplace(src, m.pos, m.neg, dst, accepting).second)
        a.edges.push_back({src, m.pos, m.neg, dst, accepting});
    }
  }
  return a;
}

}  // namespace sysgraph
