#include <cctype>
#include <map>
#include <sstream>

#include "sysgraph/elaboration.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/verification.hpp"

namespace sysgraph {

using Op = Formula::Op;

namespace {

std::string promela_type(const VarType& t) {
  switch (t.kind) {
    case ValueKind::boolean: return "bool";
    case ValueKind::symbol: return "mtype";
    case ValueKind::integer:
      if (t.lo >= 0 && t.hi <= 255) return "byte";
      if (t.lo >= -32768 && t.hi <= 32767) return "short";
      return "int";
  }
  return "int";
}

std::string literal(const TypedValue& v) {
  switch (v.kind()) {
    case ValueKind::boolean: return v.as_bool() ? "true" : "false";
    case ValueKind::integer: return std::to_string(v.as_int());
    case ValueKind::symbol: return "e_" + v.as_symbol();
  }
  return "";
}

std::string operand(const Operand& o) { return o.is_var() ? o.var : literal(o.literal); }

std::string expr(const Guard& g) {
  switch (g.kind()) {
    case Guard::Kind::constant: return g.constant_value() ? "true" : "false";
    case Guard::Kind::compare: {
      const auto& c = g.comparison();
      return operand(c.lhs) + " " + to_string(c.op) + " " + operand(c.rhs);
    }
    case Guard::Kind::negation: return "!(" + expr(g.children()[0]) + ")";
    case Guard::Kind::implication: return "(!(" + expr(g.children()[0]) + ") || " + expr(g.children()[1]) + ")";
    case Guard::Kind::conjunction:
    case Guard::Kind::disjunction: {
      std::string sep = g.kind() == Guard::Kind::conjunction ? " && " : " || ";
      std::string out = "(";
      for (std::size_t i = 0; i < g.children().size(); ++i) out += (i ? sep : "") + expr(g.children()[i]);
      return out + ")";
    }
  }
  return "true";
}

std::string ltl_text(const Formula& f) {
  switch (f.op) {
    case Op::truth: return "true";
    case Op::falsity: return "false";
    case Op::atom: return "prop_" + f.name;
    case Op::negation: return "!" + ltl_text(f.args[0]);
    case Op::next: return "X " + ltl_text(f.args[0]);
    case Op::eventually: return "<> " + ltl_text(f.args[0]);
    case Op::always: return "[] " + ltl_text(f.args[0]);
    case Op::conjunction: return "(" + ltl_text(f.args[0]) + " && " + ltl_text(f.args[1]) + ")";
    case Op::disjunction: return "(" + ltl_text(f.args[0]) + " || " + ltl_text(f.args[1]) + ")";
    case Op::implication: return "(" + ltl_text(f.args[0]) + " -> " + ltl_text(f.args[1]) + ")";
    case Op::until: return "(" + ltl_text(f.args[0]) + " U " + ltl_text(f.args[1]) + ")";
    case Op::release: return "(" + ltl_text(f.args[0]) + " V " + ltl_text(f.args[1]) + ")";
    default: throw ModelError("unsupported", "CTL properties cannot be emitted as Promela");
  }
}

std::string ident(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::string emit_promela(const Model& m, const std::vector<Formula>& props) {
  if (auto diags = validate_model(m); has_errors(diags)) throw ModelError(diags);
  for (const auto& p : props)
    if (p.logic() != Logic::ltl) throw ModelError("unsupported", "CTL property '" + p.str() + "' cannot be emitted as Promela");

  std::vector<const VarSignature*> vars;
  std::map<std::string, const ChannelDecl*> channels;
  std::set<std::string> enumerants;
  auto note_type = [&](const VarType& t) {
    if (t.kind == ValueKind::symbol) enumerants.insert(t.enumerants.begin(), t.enumerants.end());
  };
  {
    std::set<std::string> seen;
    for (const auto& g : m.components) {
      for (const auto& s : g.signatures) {
        note_type(s.type);
        if (seen.insert(s.name).second) vars.push_back(&s);
      }
      for (const auto& c : g.channels) {
        note_type(c.domain);
        channels.emplace(c.name, &c);
      }
    }
  }
  if (enumerants.size() > 255)
    throw ModelError("unsupported", "symbol types with more than 255 enumerants in total cannot be emitted as Promela");

  auto starts = initial_states(channel_system(m));
  if (starts.empty()) throw ModelError("initial-guard", "no initial state satisfies the initial guard");
  const GlobalState& start = starts.front();

  std::ostringstream os;
  os << "/* " << m.name << " */\n\n";
  if (!enumerants.empty()) {
    os << "mtype = {";
    bool first = true;
    for (const auto& e : enumerants) {
      os << (first ? " " : ", ") << "e_" << e;
      first = false;
    }
    os << " };\n\n";
  }
  for (const auto* s : vars) os << promela_type(s->type) << ' ' << s->name << " = " << literal(start.merged.at(s->name)) << ";\n";
  for (const auto& [name, c] : channels) os << "chan " << name << " = [" << c->capacity << "] of { " << promela_type(c->domain) << " };\n";

  std::size_t offset = 0;
  for (const auto& g : m.components) {
    const std::string comp = ident(g.name);
    std::map<std::string, std::size_t> loc;
    for (const auto& d : g.declarators) loc.emplace(d.name, loc.size());
    std::size_t initial_loc = loc.at(start.declarators[offset++]);
    os << "\n/* " << g.name << " */\n";
    os << (loc.size() <= 256 ? "byte " : "short ") << comp << "_loc = " << initial_loc << ";\n";
    for (const auto& d : g.declarators) {
      os << "#define at_" << comp << '_' << d.name << " (" << comp << "_loc == " << loc.at(d.name);
      for (const auto& [x, v] : d.partial) os << " && " << x << " == " << literal(v);
      os << ")\n";
    }
    for (const auto& d : g.declarators) {
      os << "inline enter_" << comp << '_' << d.name << "() {\n  " << comp << "_loc = " << loc.at(d.name);
      for (const auto& [x, v] : d.partial) os << ";\n  " << x << " = " << literal(v);
      os << "\n}\n";
    }
    os << "proctype " << comp << "() {\nend:\n  do\n";
    for (const auto& t : g.transitions) {
      std::string cond = comp + "_loc == " + std::to_string(loc.at(t.source));
      if (!t.guard.is_true()) cond += " && " + expr(t.guard);
      std::string body;
      const Action& a = t.action;
      if (a.kind == Action::Kind::send) {
        if (!channels.at(a.channel)->synchronous()) cond += " && nfull(" + a.channel + ")";
        body = a.channel + "!" + operand(a.message) + "; ";
      } else if (a.kind == Action::Kind::receive) {
        if (!channels.at(a.channel)->synchronous()) cond += " && nempty(" + a.channel + ")";
        body = a.channel + "?" + a.target + "; ";
      }
      os << "  :: atomic { " << cond << " -> " << body << "enter_" << comp << '_' << t.target << "() }";
      if (a.kind == Action::Kind::named) os << "  /* " << a.name << " */";
      os << '\n';
    }
    os << "  od\n}\n";
  }

  std::map<std::string, std::vector<std::string>> definitions;
  for (const auto& g : m.components)
    for (const auto& p : g.propositions) {
      std::string def = expr(p.formula);
      std::vector<std::string> when;
      for (const auto& r : g.labeling)
        if (r.proposition == p.name) when.push_back(expr(r.when));
      if (!when.empty()) {
        std::string any;
        for (std::size_t i = 0; i < when.size(); ++i) any += (i ? " || " : "") + when[i];
        def = "(" + def + " && (" + any + "))";
      }
      definitions[p.name].push_back(def);
    }
  if (!definitions.empty()) os << '\n';
  for (const auto& [name, defs] : definitions) {
    os << "#define prop_" << name << " (";
    for (std::size_t i = 0; i < defs.size(); ++i) os << (i ? " || " : "") << defs[i];
    os << ")\n";
  }

  os << "\ninit {\n  atomic {\n";
  for (const auto& [name, q] : start.channels)
    for (const auto& v : q) os << "    " << name << "!" << literal(v) << ";\n";
  for (const auto& g : m.components) os << "    run " << ident(g.name) << "();\n";
  os << "  }\n}\n";

  for (std::size_t i = 0; i < props.size(); ++i) os << "\nltl p" << i << " { " << ltl_text(props[i]) << " }\n";
  return os.str();
}

std::string emit_promela(const SystemGraph& g, const std::vector<Formula>& props) {
  return emit_promela(Model{g.name, {g}, {}}, props);
}

}  // namespace sysgraph
