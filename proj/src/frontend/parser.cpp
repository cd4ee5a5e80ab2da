#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lexer.hpp"
#include "sysgraph/frontend.hpp"

namespace sysgraph {

namespace {

using detail::Tok;
using detail::Token;

struct SyntaxError {
  Diagnostic diag;
};

struct ParallelDecl {
  std::string name;
  std::vector<std::pair<std::string, SourceSpan>> parts;
  std::vector<std::string> shared;
  SourceSpan span;
};

struct ParsedFile {
  std::vector<SystemGraph> systems;
  std::vector<ParallelDecl> compositions;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags) : toks_(std::move(toks)), diags_(diags) {}

  ParsedFile parse_file() {
    ParsedFile file;
    while (!at(Tok::end)) {
      try {
        if (at_keyword("system") || at_keyword("module")) {
          file.systems.push_back(parse_system());
        } else if (at_keyword("parallel")) {
          file.compositions.push_back(parse_parallel());
        } else {
          fail("expected 'system' or 'parallel', found " + found());
        }
      } catch (const SyntaxError& e) {
        diags_.push_back(e.diag);
        // Skip to something that can start a top-level declaration.
        while (!at(Tok::end) && !at_keyword("system") && !at_keyword("module") && !at_keyword("parallel"))
          ++pos_;
      }
    }
    return file;
  }

  Guard parse_guard_only() {
    Guard g = parse_guard();
    expect(Tok::end, "end of guard");
    return g;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok t) const { return peek().kind == t; }
  bool at_keyword(const char* kw) const { return at(Tok::ident) && peek().text == kw; }
  std::string found() const {
    return at(Tok::end) ? "end of input" : "'" + peek().text + "'";
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError{{Severity::error, peek().span, "syntax", msg}};
  }

  const Token& expect(Tok t, const std::string& what) {
    if (!at(t)) fail("expected " + what + ", found " + found());
    return toks_[pos_++];
  }
  void expect_keyword(const char* kw) {
    if (!at_keyword(kw)) fail(std::string("expected '") + kw + "', found " + found());
    ++pos_;
  }
  bool accept(Tok t) {
    if (!at(t)) return false;
    ++pos_;
    return true;
  }
  bool accept_keyword(const char* kw) {
    if (!at_keyword(kw)) return false;
    ++pos_;
    return true;
  }

  const Token& identifier(const std::string& what) { return expect(Tok::ident, what); }

  std::int64_t integer_literal() {
    bool neg = accept(Tok::minus);
    const Token& t = expect(Tok::integer, "integer");
    try {
      std::int64_t v = std::stoll(t.text);
      return neg ? -v : v;
    } catch (const std::exception&) {
      throw SyntaxError{{Severity::error, t.span, "syntax", "integer literal out of range"}};
    }
  }

  TypedValue literal() {
    if (at(Tok::integer) || at(Tok::minus)) return TypedValue(integer_literal());
    const Token& t = identifier("literal");
    if (t.text == "true") return TypedValue(true);
    if (t.text == "false") return TypedValue(false);
    return TypedValue::symbol(t.text);
  }

  VarType type() {
    const Token& t = identifier("type");
    if (t.text == "bool") return VarType::boolean();
    if (t.text == "int") {
      if (!at(Tok::lbracket))
        throw SyntaxError{{Severity::error, t.span, "syntax",
                           "integer types need an explicit range, e.g. int[0..4]"}};
      ++pos_;
      std::int64_t lo = integer_literal();
      expect(Tok::dotdot, "'..'");
      std::int64_t hi = integer_literal();
      expect(Tok::rbracket, "']'");
      return VarType::integer(lo, hi);
    }
    if (t.text == "sym") {
      expect(Tok::lbrace, "'{'");
      std::vector<std::string> names;
      do {
        names.push_back(identifier("enumerant").text);
      } while (accept(Tok::comma));
      expect(Tok::rbrace, "'}'");
      return VarType::symbol(std::move(names));
    }
    throw SyntaxError{{Severity::error, t.span, "syntax", "unknown type '" + t.text + "'"}};
  }

  SourceSpan span_from(const SourceSpan& start) const {
    const Token& last = toks_[pos_ == 0 ? 0 : pos_ - 1];
    SourceSpan s = start;
    if (last.span.line == start.line && last.span.column >= start.column)
      s.length = last.span.column + last.span.length - start.column;
    return s;
  }

  SystemGraph parse_system() {
    SourceSpan start = peek().span;
    ++pos_;  // system / module
    SystemGraph g;
    g.name = identifier("system name").text;
    expect(Tok::lbrace, "'{'");
    bool have_initial = false;
    while (!at(Tok::rbrace)) {
      if (at(Tok::end)) fail("unterminated system block, expected '}'");
      try {
        parse_item(g, have_initial);
      } catch (const SyntaxError& e) {
        diags_.push_back(e.diag);
        while (!at(Tok::end) && !at(Tok::semi) && !at(Tok::rbrace)) ++pos_;
        accept(Tok::semi);
      }
    }
    expect(Tok::rbrace, "'}'");
    g.span = start;
    return g;
  }

  void parse_item(SystemGraph& g, bool& have_initial) {
    SourceSpan start = peek().span;
    if (accept_keyword("vars")) {
      expect(Tok::lbrace, "'{'");
      while (!accept(Tok::rbrace)) {
        VarSignature sig;
        SourceSpan s = peek().span;
        sig.name = identifier("variable name").text;
        expect(Tok::colon, "':'");
        sig.type = type();
        sig.default_value = sig.type.default_value();
        if (accept(Tok::assign)) sig.default_value = literal();
        expect(Tok::semi, "';'");
        sig.span = span_from(s);
        g.signatures.push_back(std::move(sig));
      }
      return;
    }
    if (accept_keyword("chan")) {
      ChannelDecl c;
      c.name = identifier("channel name").text;
      expect(Tok::colon, "':'");
      c.domain = type();
      expect_keyword("cap");
      std::int64_t cap = integer_literal();
      if (cap < 0) fail("channel capacity must be non-negative");
      c.capacity = static_cast<std::size_t>(cap);
      if (accept(Tok::assign)) {
        expect(Tok::lbracket, "'['");
        if (!at(Tok::rbracket)) {
          do {
            c.initial.push_back(literal());
          } while (accept(Tok::comma));
        }
        expect(Tok::rbracket, "']'");
      }
      expect(Tok::semi, "';'");
      c.span = span_from(start);
      g.channels.push_back(std::move(c));
      return;
    }
    if (accept_keyword("state")) {
      StateDeclarator d;
      d.name = identifier("declarator name").text;
      expect(Tok::lbrace, "'{'");
      if (!at(Tok::rbrace)) {
        do {
          std::string var = identifier("variable name").text;
          expect(Tok::assign, "'='");
          d.partial.set(var, literal());
        } while (accept(Tok::comma));
      }
      expect(Tok::rbrace, "'}'");
      d.span = span_from(start);
      if (accept_keyword("init")) {
        if (have_initial) {
          diags_.push_back({Severity::error, d.span, "multiple-initial",
                            "more than one initial declarator ('" + g.initial + "' and '" + d.name + "')"});
        } else {
          have_initial = true;
          g.initial = d.name;
          if (accept_keyword("when")) g.initial_guard = parse_guard();
        }
      }
      expect(Tok::semi, "';'");
      g.declarators.push_back(std::move(d));
      return;
    }
    if (accept_keyword("trans")) {
      Transition t;
      t.source = identifier("source declarator").text;
      expect(Tok::arrow, "'->'");
      t.target = identifier("target declarator").text;
      if (accept_keyword("when")) t.guard = parse_guard();
      expect_keyword("on");
      t.action = parse_action();
      expect(Tok::semi, "';'");
      t.span = span_from(start);
      g.transitions.push_back(std::move(t));
      return;
    }
    if (accept_keyword("prop")) {
      Proposition p;
      p.name = identifier("proposition name").text;
      expect(Tok::define, "':='");
      p.formula = parse_guard();
      expect(Tok::semi, "';'");
      p.span = span_from(start);
      g.propositions.push_back(std::move(p));
      return;
    }
    if (accept_keyword("label")) {
      LabelRule r;
      expect_keyword("when");
      r.when = parse_guard();
      expect(Tok::fat_arrow, "'=>'");
      r.proposition = identifier("proposition name").text;
      expect(Tok::semi, "';'");
      r.span = span_from(start);
      g.labeling.push_back(std::move(r));
      return;
    }
    if (accept_keyword("terminal")) {
      do {
        g.terminals.push_back(identifier("declarator name").text);
      } while (accept(Tok::comma));
      expect(Tok::semi, "';'");
      return;
    }
    if (accept_keyword("refinable")) {
      g.refinable = true;
      expect(Tok::semi, "';'");
      return;
    }
    if (at_keyword("embed") || at_keyword("parallel"))
      fail("'" + peek().text + "' is not allowed inside a system block");
    fail("expected a declaration (vars, chan, state, trans, prop, label, terminal), found " + found());
  }

  Action parse_action() {
    std::string name = identifier("action").text;
    if (accept(Tok::bang)) {
      if (at(Tok::ident)) {
        const Token& t = toks_[pos_++];
        if (t.text == "true") return Action::send(name, Operand::value(TypedValue(true)));
        if (t.text == "false") return Action::send(name, Operand::value(TypedValue(false)));
        return Action::send(name, Operand::variable(t.text));
      }
      return Action::send(name, Operand::value(TypedValue(integer_literal())));
    }
    if (accept(Tok::question)) return Action::receive(name, identifier("receive variable").text);
    return Action::named_action(name);
  }

  ParallelDecl parse_parallel() {
    ParallelDecl p;
    p.span = peek().span;
    ++pos_;
    p.name = identifier("composition name").text;
    expect(Tok::assign, "'='");
    do {
      const Token& t = identifier("system name");
      p.parts.emplace_back(t.text, t.span);
    } while (accept(Tok::pipe));
    if (accept_keyword("shared")) {
      expect(Tok::lbrace, "'{'");
      if (!at(Tok::rbrace)) {
        do {
          p.shared.push_back(identifier("variable name").text);
        } while (accept(Tok::comma));
      }
      expect(Tok::rbrace, "'}'");
    }
    expect(Tok::semi, "';'");
    return p;
  }

  // guard := disj ('->' guard)?
  Guard parse_guard() {
    Guard lhs = parse_disjunction();
    if (accept(Tok::arrow)) return Guard::implies(lhs, parse_guard());
    return lhs;
  }

  Guard parse_disjunction() {
    std::vector<Guard> parts{parse_conjunction()};
    while (accept(Tok::or_)) parts.push_back(parse_conjunction());
    return Guard::any_of(std::move(parts));
  }

  Guard parse_conjunction() {
    std::vector<Guard> parts{parse_unary()};
    while (accept(Tok::and_)) parts.push_back(parse_unary());
    return Guard::all_of(std::move(parts));
  }

  Guard parse_unary() {
    if (accept(Tok::bang)) return Guard::negate(parse_unary());
    if (accept(Tok::lparen)) {
      Guard g = parse_guard();
      expect(Tok::rparen, "')'");
      return g;
    }
    if (at_keyword("true") && !is_cmp(peek(1).kind)) {
      ++pos_;
      return Guard::truth();
    }
    if (at_keyword("false") && !is_cmp(peek(1).kind)) {
      ++pos_;
      return Guard::falsity();
    }
    Operand lhs = operand();
    if (!is_cmp(peek().kind)) {
      if (lhs.is_var()) return Guard::compare(lhs, CmpOp::eq, Operand::value(TypedValue(true)));
      fail("expected a comparison operator, found " + found());
    }
    CmpOp op = cmp_op(toks_[pos_++].kind);
    Operand rhs = operand();
    return Guard::compare(std::move(lhs), op, std::move(rhs));
  }

  static bool is_cmp(Tok t) {
    return t == Tok::eq || t == Tok::ne || t == Tok::lt || t == Tok::le || t == Tok::gt || t == Tok::ge;
  }
  static CmpOp cmp_op(Tok t) {
    switch (t) {
      case Tok::eq: return CmpOp::eq;
      case Tok::ne: return CmpOp::ne;
      case Tok::lt: return CmpOp::lt;
      case Tok::le: return CmpOp::le;
      case Tok::gt: return CmpOp::gt;
      default: return CmpOp::ge;
    }
  }

  Operand operand() {
    if (at(Tok::integer) || at(Tok::minus)) return Operand::value(TypedValue(integer_literal()));
    const Token& t = identifier("operand");
    if (t.text == "true") return Operand::value(TypedValue(true));
    if (t.text == "false") return Operand::value(TypedValue(false));
    return Operand::variable(t.text);
  }
};

// Identifiers that are not variables but name an enumerant of the type on the
// other side of a comparison become symbol literals.
Operand resolve_operand(const Operand& o, const Operand& other, const SystemGraph& g) {
  if (!o.is_var() || g.find_signature(o.var)) return o;
  if (other.is_var()) {
    if (const VarSignature* s = g.find_signature(other.var); s && s->type.kind == ValueKind::symbol) {
      const auto& en = s->type.enumerants;
      if (std::find(en.begin(), en.end(), o.var) != en.end())
        return Operand::value(TypedValue::symbol(o.var));
    }
  }
  return o;
}

Guard resolve_guard(const Guard& g, const SystemGraph& sys) {
  switch (g.kind()) {
    case Guard::Kind::constant: return g;
    case Guard::Kind::compare: {
      const Comparison& c = g.comparison();
      return Guard::compare(resolve_operand(c.lhs, c.rhs, sys), c.op, resolve_operand(c.rhs, c.lhs, sys));
    }
    case Guard::Kind::negation: return Guard::negate(resolve_guard(g.children().front(), sys));
    case Guard::Kind::implication:
      return Guard::implies(resolve_guard(g.children()[0], sys), resolve_guard(g.children()[1], sys));
    case Guard::Kind::conjunction:
    case Guard::Kind::disjunction: {
      std::vector<Guard> kids;
      for (const auto& k : g.children()) kids.push_back(resolve_guard(k, sys));
      return g.kind() == Guard::Kind::conjunction ? Guard::all_of(std::move(kids))
                                                  : Guard::any_of(std::move(kids));
    }
  }
  return g;
}

void resolve(SystemGraph& g) {
  g.initial_guard = resolve_guard(g.initial_guard, g);
  for (auto& t : g.transitions) {
    t.guard = resolve_guard(t.guard, g);
    if (t.action.kind == Action::Kind::send && t.action.message.is_var() &&
        !g.find_signature(t.action.message.var))
      t.action.message = Operand::value(TypedValue::symbol(t.action.message.var));
  }
  for (auto& p : g.propositions) p.formula = resolve_guard(p.formula, g);
  for (auto& r : g.labeling) r.when = resolve_guard(r.when, g);
}

ParsedFile parse_file(const SourceUnit& src, std::vector<Diagnostic>& diags) {
  if (!detail::valid_utf8(src.text)) {
    diags.push_back({Severity::error, {1, 1, 0}, "lexical", "source is not valid UTF-8"});
    return {};
  }
  auto toks = detail::lex(src.text, diags);
  Parser p(std::move(toks), diags);
  ParsedFile file = p.parse_file();
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::pair(a.span.line, a.span.column) < std::pair(b.span.line, b.span.column);
  });
  for (auto& g : file.systems) resolve(g);
  return file;
}

}  // namespace

ParseResult<Model> parse_model(const SourceUnit& src) {
  ParseResult<Model> out;
  ParsedFile file = parse_file(src, out.diagnostics);
  if (file.systems.empty()) {
    if (!has_errors(out.diagnostics))
      out.diagnostics.push_back({Severity::error, {1, 1, 0}, "missing-initial",
                                 "no system declared, so there is no initial declarator"});
    return out;
  }
  Model m;
  if (file.compositions.size() > 1) {
    out.diagnostics.push_back({Severity::error, file.compositions[1].span, "syntax",
                               "at most one 'parallel' composition per file"});
    return out;
  }
  if (file.compositions.empty()) {
    if (file.systems.size() > 1) {
      out.diagnostics.push_back({Severity::error, file.systems[1].span, "syntax",
                                 "several systems need a 'parallel' composition"});
      return out;
    }
    m.name = file.systems.front().name;
    m.components = std::move(file.systems);
  } else {
    const ParallelDecl& p = file.compositions.front();
    m.name = p.name;
    m.shared = p.shared;
    for (const auto& [part, span] : p.parts) {
      auto it = std::find_if(file.systems.begin(), file.systems.end(),
                             [&](const SystemGraph& g) { return g.name == part; });
      if (it == file.systems.end()) {
        out.diagnostics.push_back({Severity::error, span, "unresolved-name",
                                   "unknown system '" + part + "' in composition"});
        continue;
      }
      m.components.push_back(*it);
    }
  }
  auto v = validate_model(m);
  out.diagnostics.insert(out.diagnostics.end(), v.begin(), v.end());
  if (!has_errors(out.diagnostics)) out.value = std::move(m);
  return out;
}

ParseResult<SystemGraph> parse_source(const SourceUnit& src) {
  ParseResult<SystemGraph> out;
  ParsedFile file = parse_file(src, out.diagnostics);
  if (file.systems.empty()) {
    out.diagnostics.push_back({Severity::error, {1, 1, 0}, "missing-initial",
                               "no system declared, so there is no initial declarator"});
    return out;
  }
  if (file.systems.size() > 1 || !file.compositions.empty()) {
    SourceSpan s = file.systems.size() > 1 ? file.systems[1].span : file.compositions.front().span;
    out.diagnostics.push_back({Severity::error, s, "syntax", "expected exactly one system in this file"});
    return out;
  }
  auto v = validate_graph(file.systems.front());
  out.diagnostics.insert(out.diagnostics.end(), v.begin(), v.end());
  if (!has_errors(out.diagnostics)) out.value = std::move(file.systems.front());
  return out;
}

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ParseResult<Model> load_model(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    ParseResult<Model> out;
    out.diagnostics.push_back({Severity::error, {}, "io", "cannot read file '" + path + "'"});
    return out;
  }
  return parse_model({path, *text});
}

ParseResult<SystemGraph> load_graph(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    ParseResult<SystemGraph> out;
    out.diagnostics.push_back({Severity::error, {}, "io", "cannot read file '" + path + "'"});
    return out;
  }
  return parse_source({path, *text});
}

Guard parse_guard(const std::string& text, const SystemGraph& g) {
  std::vector<Diagnostic> diags;
  auto toks = detail::lex(text, diags);
  if (has_errors(diags)) throw ModelError(diags);
  Parser p(std::move(toks), diags);
  try {
    return resolve_guard(p.parse_guard_only(), g);
  } catch (const SyntaxError& e) {
    throw ModelError({e.diag});
  }
}

}  // namespace sysgraph
