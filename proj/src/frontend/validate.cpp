#include <algorithm>
#include <map>
#include <set>

#include "sysgraph/frontend.hpp"

namespace sysgraph {

namespace {

class Checker {
 public:
  Checker(const SystemGraph& g, std::vector<Diagnostic>& out) : g_(g), out_(out) {}

  void run() {
    check_signatures();
    check_channels();
    check_declarators();
    check_transitions();
    check_propositions();
    check_terminals();
  }

 private:
  const SystemGraph& g_;
  std::vector<Diagnostic>& out_;

  void error(const SourceSpan& span, const char* code, std::string msg) {
    out_.push_back({Severity::error, span, code, std::move(msg)});
  }

  // A well-formed type: non-empty range or enumeration.
  bool check_type(const VarType& t, const SourceSpan& span, const std::string& owner) {
    if (t.kind == ValueKind::integer && t.lo > t.hi) {
      error(span, "range", "empty integer range " + t.str() + " for '" + owner + "'");
      return false;
    }
    if (t.kind == ValueKind::symbol) {
      if (t.enumerants.empty()) {
        error(span, "range", "empty symbol type for '" + owner + "'");
        return false;
      }
      std::set<std::string> seen;
      for (const auto& e : t.enumerants) {
        if (!seen.insert(e).second) {
          error(span, "duplicate-name", "enumerant '" + e + "' repeated in type of '" + owner + "'");
          return false;
        }
      }
    }
    return true;
  }

  void check_value(const VarType& t, const TypedValue& v, const SourceSpan& span, const std::string& what) {
    if (v.kind() != t.kind) {
      error(span, "kind-mismatch", what + ": " + to_string(v.kind()) + " value " + v.str() +
                                       " where " + t.str() + " is expected");
    } else if (!t.contains(v)) {
      error(span, "range", what + ": value " + v.str() + " is outside " + t.str());
    }
  }

  void check_signatures() {
    std::set<std::string> seen;
    for (const auto& s : g_.signatures) {
      if (!seen.insert(s.name).second)
        error(s.span, "duplicate-name", "variable '" + s.name + "' declared twice");
      if (check_type(s.type, s.span, s.name)) check_value(s.type, s.default_value, s.span, "default of '" + s.name + "'");
    }
  }

  void check_channels() {
    std::set<std::string> seen;
    for (const auto& c : g_.channels) {
      if (!seen.insert(c.name).second) error(c.span, "duplicate-name", "channel '" + c.name + "' declared twice");
      if (g_.find_signature(c.name))
        error(c.span, "duplicate-name", "channel '" + c.name + "' has the name of a variable");
      if (!check_type(c.domain, c.span, c.name)) continue;
      if (c.initial.size() > c.capacity)
        error(c.span, "capacity", "channel '" + c.name + "' holds " + std::to_string(c.initial.size()) +
                                      " initial messages but has capacity " + std::to_string(c.capacity));
      for (const auto& v : c.initial) check_value(c.domain, v, c.span, "initial message of '" + c.name + "'");
    }
  }

  void check_declarators() {
    std::set<std::string> seen;
    for (const auto& d : g_.declarators) {
      if (!seen.insert(d.name).second)
        error(d.span, "duplicate-declarator", "state declarator '" + d.name + "' declared twice");
      for (const auto& [var, value] : d.partial) {
        const VarSignature* s = g_.find_signature(var);
        if (!s) {
          error(d.span, "unresolved-name", "declarator '" + d.name + "' pins unknown variable '" + var + "'");
          continue;
        }
        check_value(s->type, value, d.span, "pin of '" + var + "' in '" + d.name + "'");
      }
    }
    if (g_.initial.empty()) {
      error(g_.span, "missing-initial", "system '" + g_.name + "' has no initial declarator");
    } else if (!g_.find_declarator(g_.initial)) {
      error(g_.span, "unresolved-name", "initial declarator '" + g_.initial + "' is not declared");
    } else {
      check_guard(g_.initial_guard, g_.find_declarator(g_.initial)->span, "initial guard");
    }
  }

  void check_transitions() {
    for (const auto& t : g_.transitions) {
      if (!g_.find_declarator(t.source))
        error(t.span, "unresolved-name", "unknown source declarator '" + t.source + "'");
      if (!g_.find_declarator(t.target))
        error(t.span, "unresolved-name", "unknown target declarator '" + t.target + "'");
      check_guard(t.guard, t.span, "guard");
      check_action(t.action, t.span);
    }
  }

  void check_action(const Action& a, const SourceSpan& span) {
    if (a.kind == Action::Kind::named) return;
    const ChannelDecl* c = g_.find_channel(a.channel);
    if (!c) {
      error(span, "unresolved-name", "unknown channel '" + a.channel + "'");
      return;
    }
    if (a.kind == Action::Kind::send) {
      if (a.message.is_var()) {
        const VarSignature* s = g_.find_signature(a.message.var);
        if (!s) {
          error(span, "unresolved-name", "unknown variable '" + a.message.var + "' in send");
        } else if (!c->domain.includes(s->type)) {
          error(span, "kind-mismatch", "variable '" + s->name + "' of type " + s->type.str() +
                                           " cannot be sent on '" + c->name + "' of type " + c->domain.str());
        }
      } else {
        check_value(c->domain, a.message.literal, span, "message on '" + c->name + "'");
      }
      return;
    }
    const VarSignature* s = g_.find_signature(a.target);
    if (!s) {
      error(span, "unresolved-name", "unknown variable '" + a.target + "' in receive");
    } else if (!s->type.includes(c->domain)) {
      error(span, "kind-mismatch", "variable '" + s->name + "' of type " + s->type.str() +
                                       " cannot receive from '" + c->name + "' of type " + c->domain.str());
    }
  }

  void check_propositions() {
    std::set<std::string> seen;
    for (const auto& p : g_.propositions) {
      if (!seen.insert(p.name).second) error(p.span, "duplicate-name", "proposition '" + p.name + "' declared twice");
      check_guard(p.formula, p.span, "proposition '" + p.name + "'");
    }
    for (const auto& r : g_.labeling) {
      if (!g_.find_proposition(r.proposition))
        error(r.span, "unresolved-name", "label rule names unknown proposition '" + r.proposition + "'");
      check_guard(r.when, r.span, "label rule");
    }
  }

  void check_terminals() {
    for (const auto& t : g_.terminals)
      if (!g_.find_declarator(t)) error(g_.span, "unresolved-name", "unknown terminal declarator '" + t + "'");
  }

  // Returns the operand's kind if it can be determined.
  std::optional<ValueKind> operand_kind(const Operand& o, const SourceSpan& span, const std::string& where) {
    if (!o.is_var()) return o.literal.kind();
    const VarSignature* s = g_.find_signature(o.var);
    if (!s) {
      error(span, "unresolved-name", "unknown name '" + o.var + "' in " + where);
      return std::nullopt;
    }
    return s->type.kind;
  }

  void check_guard(const Guard& g, const SourceSpan& span, const std::string& where) {
    if (g.kind() != Guard::Kind::compare) {
      for (const auto& c : g.children()) check_guard(c, span, where);
      return;
    }
    const Comparison& c = g.comparison();
    auto lk = operand_kind(c.lhs, span, where);
    auto rk = operand_kind(c.rhs, span, where);
    if (!lk || !rk) return;
    if (*lk != *rk) {
      error(span, "kind-mismatch", "cannot compare " + to_string(*lk) + " with " + to_string(*rk) + " in " +
                                       where + " ('" + c.str() + "')");
      return;
    }
    if (*lk != ValueKind::integer && c.op != CmpOp::eq && c.op != CmpOp::ne)
      error(span, "kind-mismatch", "ordering comparison on " + to_string(*lk) + " values in " + where);
    if (*lk == ValueKind::symbol) {
      for (const auto* lit : {&c.lhs, &c.rhs}) {
        const Operand& other = lit == &c.lhs ? c.rhs : c.lhs;
        if (lit->is_var() || !other.is_var()) continue;
        if (!g_.find_signature(other.var)->type.contains(lit->literal))
          error(span, "unresolved-name", "'" + lit->literal.as_symbol() + "' is not a value of '" + other.var + "'");
      }
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate_graph(const SystemGraph& g) {
  std::vector<Diagnostic> out;
  Checker(g, out).run();
  return out;
}

std::vector<Diagnostic> validate_model(const Model& m) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const auto& c : m.components) {
    if (!names.insert(c.name).second)
      out.push_back({Severity::error, c.span, "duplicate-name", "system '" + c.name + "' used twice in composition"});
    auto sub = validate_graph(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }

  std::set<std::string> shared(m.shared.begin(), m.shared.end());
  std::map<std::string, const SystemGraph*> owner;
  std::map<std::string, const VarSignature*> shared_sig;
  std::map<std::string, const ChannelDecl*> chans;
  for (const auto& c : m.components) {
    for (const auto& s : c.signatures) {
      if (shared.count(s.name)) {
        auto [it, fresh] = shared_sig.emplace(s.name, &s);
        if (!fresh && !(*it->second == s))
          out.push_back({Severity::error, s.span, "kind-mismatch",
                         "shared variable '" + s.name + "' declared with conflicting types or defaults"});
        continue;
      }
      auto [it, fresh] = owner.emplace(s.name, &c);
      if (!fresh)
        out.push_back({Severity::error, s.span, "duplicate-name",
                       "variable '" + s.name + "' is declared in '" + it->second->name + "' and '" + c.name +
                           "' but is not shared"});
    }
    for (const auto& ch : c.channels) {
      auto [it, fresh] = chans.emplace(ch.name, &ch);
      if (!fresh && !(*it->second == ch))
        out.push_back({Severity::error, ch.span, "capacity",
                       "channel '" + ch.name + "' declared differently by several components"});
    }
  }
  for (const auto& s : m.shared)
    if (!shared_sig.count(s))
      out.push_back({Severity::error, m.components.empty() ? SourceSpan{} : m.components.front().span,
                     "unresolved-name", "shared variable '" + s + "' is not declared"});
  return out;
}

}  // namespace sysgraph
