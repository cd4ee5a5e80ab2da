#include "sysgraph/guard.hpp"

#include <stdexcept>

namespace sysgraph {

struct Guard::Node {
  Kind kind = Kind::constant;
  bool value = true;
  Comparison cmp;
  std::vector<Guard> kids;
};

std::string to_string(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
  }
  return "?";
}

Guard::Guard(bool value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->value = value;
  node_ = std::move(n);
}

Guard::Guard(Comparison cmp) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::compare;
  n->cmp = std::move(cmp);
  node_ = std::move(n);
}

Guard Guard::negate(Guard g) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::negation;
  n->kids.push_back(std::move(g));
  return Guard(std::shared_ptr<const Node>(std::move(n)));
}

Guard Guard::all_of(std::vector<Guard> parts) {
  if (parts.empty()) return truth();
  if (parts.size() == 1) return parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::conjunction;
  n->kids = std::move(parts);
  return Guard(std::shared_ptr<const Node>(std::move(n)));
}

Guard Guard::any_of(std::vector<Guard> parts) {
  if (parts.empty()) return falsity();
  if (parts.size() == 1) return parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::disjunction;
  n->kids = std::move(parts);
  return Guard(std::shared_ptr<const Node>(std::move(n)));
}

Guard Guard::implies(Guard lhs, Guard rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::implication;
  n->kids = {std::move(lhs), std::move(rhs)};
  return Guard(std::shared_ptr<const Node>(std::move(n)));
}

Guard::Kind Guard::kind() const { return node_->kind; }
bool Guard::constant_value() const { return node_->value; }
const Comparison& Guard::comparison() const { return node_->cmp; }
const std::vector<Guard>& Guard::children() const { return node_->kids; }

namespace {

int precedence(Guard::Kind k) {
  switch (k) {
    case Guard::Kind::implication: return 1;
    case Guard::Kind::disjunction: return 2;
    case Guard::Kind::conjunction: return 3;
    default: return 4;
  }
}

}  // namespace

std::string Guard::str() const {
  switch (kind()) {
    case Kind::constant: return constant_value() ? "true" : "false";
    case Kind::compare: return comparison().str();
    case Kind::negation: {
      const Guard& c = children().front();
      if (c.kind() == Kind::constant) return "!" + c.str();
      return "!(" + c.str() + ")";
    }
    case Kind::conjunction:
    case Kind::disjunction:
    case Kind::implication: {
      const char* sep = kind() == Kind::conjunction   ? " && "
                        : kind() == Kind::disjunction ? " || "
                                                      : " -> ";
      std::string out;
      for (std::size_t i = 0; i < children().size(); ++i) {
        const Guard& c = children()[i];
        if (i) out += sep;
        // Same-operator children are bracketed so nesting survives a reparse.
        bool wrap = precedence(c.kind()) <= precedence(kind());
        out += wrap ? "(" + c.str() + ")" : c.str();
      }
      return out;
    }
  }
  return {};
}

std::set<std::string> Guard::variables() const {
  std::set<std::string> out;
  if (kind() == Kind::compare) {
    if (comparison().lhs.is_var()) out.insert(comparison().lhs.var);
    if (comparison().rhs.is_var()) out.insert(comparison().rhs.var);
  }
  for (const auto& c : children()) {
    auto sub = c.variables();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

bool Guard::operator==(const Guard& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::constant: return constant_value() == other.constant_value();
    case Kind::compare: return comparison() == other.comparison();
    default: return children() == other.children();
  }
}

bool compare_values(const TypedValue& a, CmpOp op, const TypedValue& b) {
  if (a.kind() != b.kind())
    throw EvalError(EvalError::Code::kind_mismatch, "comparison between different kinds");
  if (a.kind() != ValueKind::integer && op != CmpOp::eq && op != CmpOp::ne)
    throw EvalError(EvalError::Code::kind_mismatch, "ordering comparison on non-integer values");
  switch (op) {
    case CmpOp::eq: return a == b;
    case CmpOp::ne: return a != b;
    case CmpOp::lt: return a.as_int() < b.as_int();
    case CmpOp::le: return a.as_int() <= b.as_int();
    case CmpOp::gt: return a.as_int() > b.as_int();
    case CmpOp::ge: return a.as_int() >= b.as_int();
  }
  return false;
}

namespace {

const TypedValue& resolve(const Evaluation& v, const Operand& o) {
  return o.is_var() ? v.at(o.var) : o.literal;
}

bool atom_sat(const Evaluation& v, const Comparison& c) {
  return compare_values(resolve(v, c.lhs), c.op, resolve(v, c.rhs));
}

}  // namespace

bool guard_sat(const Evaluation& v, const Guard& g) {
  switch (g.kind()) {
    case Guard::Kind::constant: return g.constant_value();
    case Guard::Kind::compare: return atom_sat(v, g.comparison());
    case Guard::Kind::negation: return !guard_sat(v, g.children().front());
    case Guard::Kind::conjunction:
      for (const auto& c : g.children())
        if (!guard_sat(v, c)) return false;
      return true;
    case Guard::Kind::disjunction:
      for (const auto& c : g.children())
        if (guard_sat(v, c)) return true;
      return false;
    case Guard::Kind::implication:
      return !guard_sat(v, g.children()[0]) || guard_sat(v, g.children()[1]);
  }
  return false;
}

bool cnf_sat(const Evaluation& v, const Cnf& cnf) {
  for (const auto& clause : cnf.clauses) {
    bool any = false;
    for (const auto& lit : clause) {
      if (atom_sat(v, lit.atom) == lit.positive) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

namespace {

// CNF of g (positive) or of !g (negated), by pushing negations inwards and
// distributing || over &&.
Cnf cnf_of(const Guard& g, bool negated) {
  using K = Guard::Kind;
  switch (g.kind()) {
    case K::constant: {
      bool value = g.constant_value() != negated;
      return value ? Cnf{} : Cnf{{Clause{}}};
    }
    case K::compare: return Cnf{{Clause{Literal{g.comparison(), !negated}}}};
    case K::negation: return cnf_of(g.children().front(), !negated);
    case K::implication: {
      // a -> b == !a || b ; !(a -> b) == a && !b
      Guard rewritten = Guard::any_of({Guard::negate(g.children()[0]), g.children()[1]});
      return cnf_of(rewritten, negated);
    }
    case K::conjunction:
    case K::disjunction: {
      bool as_and = (g.kind() == K::conjunction) != negated;
      if (as_and) {
        Cnf out;
        for (const auto& c : g.children()) {
          Cnf sub = cnf_of(c, negated);
          out.clauses.insert(out.clauses.end(), sub.clauses.begin(), sub.clauses.end());
        }
        return out;
      }
      Cnf acc = Cnf{{Clause{}}};  // false, the unit of ||
      for (const auto& c : g.children()) {
        Cnf sub = cnf_of(c, negated);
        Cnf next;
        for (const auto& a : acc.clauses) {
          for (const auto& b : sub.clauses) {
            Clause merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            next.clauses.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

}  // namespace

Cnf to_cnf(const Guard& g) { return cnf_of(g, false); }

Guard from_cnf(const Cnf& cnf) {
  std::vector<Guard> clauses;
  for (const auto& clause : cnf.clauses) {
    std::vector<Guard> lits;
    for (const auto& lit : clause) {
      Guard a(lit.atom);
      lits.push_back(lit.positive ? a : Guard::negate(a));
    }
    clauses.push_back(Guard::any_of(std::move(lits)));
  }
  return Guard::all_of(std::move(clauses));
}

std::set<Comparison> atoms(const Guard& g) {
  std::set<Comparison> out;
  for (const auto& clause : to_cnf(g).clauses)
    for (const auto& lit : clause) out.insert(lit.atom);
  return out;
}

}  // namespace sysgraph
