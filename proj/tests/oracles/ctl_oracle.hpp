#pragma once

// CTL by Kleene iteration of the fixpoint equations over all states at once.

#include <vector>

#include "oracles/ltl_oracle.hpp"

namespace oracle {

inline std::vector<bool> ctl_sat(const TransitionSystem& ts, const Formula& f) {
  using Op = Formula::Op;
  const std::size_t n = ts.states.size();
  auto succ = ts_successors(ts, true);
  auto ex = [&](const std::vector<bool>& z) {
    std::vector<bool> r(n);
    for (std::size_t s = 0; s < n; ++s)
      for (auto t : succ[s]) r[s] = r[s] || z[t];
    return r;
  };
  auto ax = [&](const std::vector<bool>& z) {
    std::vector<bool> r(n, true);
    for (std::size_t s = 0; s < n; ++s)
      for (auto t : succ[s]) r[s] = r[s] && z[t];
    return r;
  };
  // Least (from all-false) or greatest (from all-true) fixpoint of z = b | (a & step(z)).
  auto iterate = [&](const std::vector<bool>& a, const std::vector<bool>& b, bool universal, bool greatest) {
    std::vector<bool> z(n, greatest);
    while (true) {
      auto s = universal ? ax(z) : ex(z);
      std::vector<bool> next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = b[i] || (a[i] && s[i]);
      if (next == z) return z;
      z = next;
    }
  };
  const std::vector<bool> all(n, true), none(n, false);
  auto sub = [&](std::size_t i) { return ctl_sat(ts, f.args[i]); };
  switch (f.op) {
    case Op::truth: return all;
    case Op::falsity: return none;
    case Op::atom: {
      std::vector<bool> r(n);
      for (std::size_t s = 0; s < n; ++s) r[s] = ts.states[s].labels.count(f.name) > 0;
      return r;
    }
    case Op::negation: { auto r = sub(0); r.flip(); return r; }
    case Op::conjunction: { auto a = sub(0), b = sub(1); for (std::size_t s = 0; s < n; ++s) a[s] = a[s] && b[s]; return a; }
    case Op::disjunction: { auto a = sub(0), b = sub(1); for (std::size_t s = 0; s < n; ++s) a[s] = a[s] || b[s]; return a; }
    case Op::implication: { auto a = sub(0), b = sub(1); for (std::size_t s = 0; s < n; ++s) a[s] = !a[s] || b[s]; return a; }
    case Op::ex: return ex(sub(0));
    case Op::ax: return ax(sub(0));
    case Op::ef: return iterate(all, sub(0), false, false);
    case Op::af: return iterate(all, sub(0), true, false);
    case Op::eg: return iterate(sub(0), none, false, true);
    case Op::ag: return iterate(sub(0), none, true, true);
    case Op::eu: return iterate(sub(0), sub(1), false, false);
    case Op::au: return iterate(sub(0), sub(1), true, false);
    default: throw std::logic_error("not a CTL formula");
  }
}

}  // namespace oracle
