#pragma once

// Quantifier-free guards over variable comparisons, closed under !, &&, ||
// and ->. Guards are immutable; copies share structure.

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sysgraph/value.hpp"

namespace sysgraph {

struct Operand {
  enum class Kind { variable, literal };
  Kind kind = Kind::literal;
  std::string var;
  TypedValue literal;

  static Operand variable(std::string name) { return {Kind::variable, std::move(name), {}}; }
  static Operand value(TypedValue v) { return {Kind::literal, {}, std::move(v)}; }

  bool is_var() const { return kind == Kind::variable; }
  std::string str() const { return is_var() ? var : literal.str(); }

  auto operator<=>(const Operand&) const = default;
};

enum class CmpOp { eq, ne, lt, le, gt, ge };

std::string to_string(CmpOp op);

// An atomic proposition `lhs op rhs`.
struct Comparison {
  Operand lhs;
  CmpOp op = CmpOp::eq;
  Operand rhs;

  std::string str() const { return lhs.str() + " " + to_string(op) + " " + rhs.str(); }
  // Whitespace-free form used as a state label.
  std::string label() const { return lhs.str() + to_string(op) + rhs.str(); }
  auto operator<=>(const Comparison&) const = default;
};

class Guard {
 public:
  enum class Kind { constant, compare, negation, conjunction, disjunction, implication };

  Guard() : Guard(true) {}
  explicit Guard(bool value);
  explicit Guard(Comparison cmp);

  static Guard truth() { return Guard(true); }
  static Guard falsity() { return Guard(false); }
  static Guard compare(Operand lhs, CmpOp op, Operand rhs) {
    return Guard(Comparison{std::move(lhs), op, std::move(rhs)});
  }
  static Guard negate(Guard g);
  static Guard all_of(std::vector<Guard> parts);
  static Guard any_of(std::vector<Guard> parts);
  static Guard implies(Guard lhs, Guard rhs);

  Kind kind() const;
  bool constant_value() const;
  const Comparison& comparison() const;
  const std::vector<Guard>& children() const;

  bool is_true() const { return kind() == Kind::constant && constant_value(); }

  // Canonical printing; re-parses to a structurally equal guard.
  std::string str() const;

  // Variables referenced by any comparison.
  std::set<std::string> variables() const;

  bool operator==(const Guard& other) const;

 private:
  struct Node;
  explicit Guard(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Literal {
  Comparison atom;
  bool positive = true;
  auto operator<=>(const Literal&) const = default;
};

using Clause = std::vector<Literal>;

// A conjunction of clauses; the empty CNF is true, an empty clause is false.
struct Cnf {
  std::vector<Clause> clauses;
  bool operator==(const Cnf&) const = default;
};

bool compare_values(const TypedValue& a, CmpOp op, const TypedValue& b);

// V |= g. Throws EvalError when a referenced variable is missing.
bool guard_sat(const Evaluation& v, const Guard& g);
bool cnf_sat(const Evaluation& v, const Cnf& cnf);

Cnf to_cnf(const Guard& g);
Guard from_cnf(const Cnf& cnf);

// Atom(p): the atomic comparisons of the CNF of p, in sorted order.
std::set<Comparison> atoms(const Guard& g);

}  // namespace sysgraph
