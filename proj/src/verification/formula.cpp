#include <algorithm>
#include <cctype>
#include <map>

#include "sysgraph/diagnostics.hpp"
#include "sysgraph/verification.hpp"

namespace sysgraph {

using Op = Formula::Op;

std::string to_string(Logic logic) { return logic == Logic::ltl ? "LTL" : "CTL"; }

namespace {

bool is_ctl_op(Op op) {
  switch (op) {
    case Op::ex: case Op::ef: case Op::eg: case Op::eu:
    case Op::ax: case Op::af: case Op::ag: case Op::au:
      return true;
    default:
      return false;
  }
}

bool is_path_op(Op op) {
  return op == Op::next || op == Op::eventually || op == Op::always || op == Op::until || op == Op::release;
}

const char* unary_name(Op op) {
  switch (op) {
    case Op::negation: return "!";
    case Op::next: return "X";
    case Op::eventually: return "F";
    case Op::always: return "G";
    case Op::ex: return "EX";
    case Op::ef: return "EF";
    case Op::eg: return "EG";
    case Op::ax: return "AX";
    case Op::af: return "AF";
    case Op::ag: return "AG";
    default: return "?";
  }
}

const char* binary_name(Op op) {
  switch (op) {
    case Op::conjunction: return "&&";
    case Op::disjunction: return "||";
    case Op::implication: return "->";
    case Op::until: return "U";
    case Op::release: return "R";
    default: return "?";
  }
}

template <typename Fn>
void walk(const Formula& f, Fn fn) {
  fn(f);
  for (const auto& a : f.args) walk(a, fn);
}

}  // namespace

Logic Formula::logic() const {
  bool ctl = false;
  walk(*this, [&](const Formula& g) { ctl = ctl || is_ctl_op(g.op); });
  return ctl ? Logic::ctl : Logic::ltl;
}

bool Formula::is_temporal() const {
  bool t = false;
  walk(*this, [&](const Formula& g) { t = t || is_ctl_op(g.op) || is_path_op(g.op); });
  return t;
}

std::set<std::string> Formula::atoms() const {
  std::set<std::string> out;
  walk(*this, [&](const Formula& g) {
    if (g.op == Op::atom) out.insert(g.name);
  });
  return out;
}

std::strong_ordering Formula::operator<=>(const Formula& o) const {
  if (auto c = op <=> o.op; c != 0) return c;
  if (auto c = name <=> o.name; c != 0) return c;
  return std::lexicographical_compare_three_way(args.begin(), args.end(), o.args.begin(), o.args.end());
}

std::string Formula::str() const {
  switch (op) {
    case Op::truth: return "true";
    case Op::falsity: return "false";
    case Op::atom: return name;
    case Op::eu: return "E[" + args[0].str() + " U " + args[1].str() + "]";
    case Op::au: return "A[" + args[0].str() + " U " + args[1].str() + "]";
    case Op::conjunction: case Op::disjunction: case Op::implication:
    case Op::until: case Op::release:
      return "(" + args[0].str() + " " + binary_name(op) + " " + args[1].str() + ")";
    default: {
      std::string sep = op == Op::negation ? "" : " ";
      return unary_name(op) + sep + args[0].str();
    }
  }
}

namespace {

struct Tok {
  enum Kind { ident, lparen, rparen, lbrack, rbrack, bang, and_, or_, arrow, end } kind;
  std::string text;
  std::size_t column;
};

[[noreturn]] void fail(const std::string& code, std::size_t column, std::size_t length, const std::string& msg) {
  throw ModelError({{Severity::error, {1, column, length}, code, msg}});
}

std::vector<Tok> tokenize(const std::string& s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    std::size_t col = i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::ident, s.substr(i, j - i), col});
      i = j;
    } else if (c == '(') { out.push_back({Tok::lparen, "(", col}); ++i; }
    else if (c == ')') { out.push_back({Tok::rparen, ")", col}); ++i; }
    else if (c == '[') {
      if (s.compare(i, 2, "[]") == 0) { out.push_back({Tok::ident, "G", col}); i += 2; }
      else { out.push_back({Tok::lbrack, "[", col}); ++i; }
    }
    else if (c == ']') { out.push_back({Tok::rbrack, "]", col}); ++i; }
    else if (c == '<' && s.compare(i, 2, "<>") == 0) { out.push_back({Tok::ident, "F", col}); i += 2; }
    else if (c == '!' || c == '~') { out.push_back({Tok::bang, "!", col}); ++i; }
    else if (c == '&') { std::size_t n = s.compare(i, 2, "&&") == 0 ? 2 : 1; out.push_back({Tok::and_, "&&", col}); i += n; }
    else if (c == '|') { std::size_t n = s.compare(i, 2, "||") == 0 ? 2 : 1; out.push_back({Tok::or_, "||", col}); i += n; }
    else if (c == '-' && s.compare(i, 2, "->") == 0) { out.push_back({Tok::arrow, "->", col}); i += 2; }
    else fail("syntax", col, 1, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::end, "", s.size() + 1});
  return out;
}

const std::map<std::string, Op>& unary_keywords() {
  static const std::map<std::string, Op> m = {
      {"X", Op::next}, {"F", Op::eventually}, {"G", Op::always},
      {"EX", Op::ex},  {"EF", Op::ef},        {"EG", Op::eg},
      {"AX", Op::ax},  {"AF", Op::af},        {"AG", Op::ag},
  };
  return m;
}

class PropertyParser {
 public:
  PropertyParser(const std::string& text, const std::set<std::string>& props) : toks_(tokenize(text)), props_(props) {}

  Formula parse() {
    Formula f = implication();
    if (peek().kind != Tok::end) fail("syntax", peek().column, peek().text.size(), "unexpected '" + peek().text + "'");
    return f;
  }

 private:
  std::vector<Tok> toks_;
  const std::set<std::string>& props_;
  std::size_t pos_ = 0;

  const Tok& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  Tok next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_ident(const char* w) const { return peek().kind == Tok::ident && peek().text == w; }

  void expect(Tok::Kind k, const char* what) {
    if (peek().kind != k) {
      const Tok& t = peek();
      fail("syntax", t.column, t.text.size(), std::string("expected ") + what +
                                                    (t.kind == Tok::end ? " at end of input" : ", got '" + t.text + "'"));
    }
    next();
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (peek().kind == Tok::arrow) {
      next();
      return Formula::binary(Op::implication, std::move(lhs), implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (peek().kind == Tok::or_) {
      next();
      lhs = Formula::binary(Op::disjunction, std::move(lhs), conjunction());
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = binary_temporal();
    while (peek().kind == Tok::and_) {
      next();
      lhs = Formula::binary(Op::conjunction, std::move(lhs), binary_temporal());
    }
    return lhs;
  }

  // U and R, right associative.
  Formula binary_temporal() {
    Formula lhs = unary();
    if (at_ident("U") || at_ident("R")) {
      Op op = next().text == "U" ? Op::until : Op::release;
      return Formula::binary(op, std::move(lhs), binary_temporal());
    }
    return lhs;
  }

  Formula unary() {
    const Tok& t = peek();
    if (t.kind == Tok::bang) {
      next();
      return Formula::unary(Op::negation, unary());
    }
    if (t.kind == Tok::lparen) {
      next();
      Formula f = implication();
      expect(Tok::rparen, "')'");
      return f;
    }
    if (t.kind != Tok::ident) {
      fail("syntax", t.column, t.text.size(),
           t.kind == Tok::end ? "unexpected end of property" : "unexpected '" + t.text + "'");
    }
    if (auto it = unary_keywords().find(t.text); it != unary_keywords().end()) {
      next();
      return Formula::unary(it->second, unary());
    }
    if (t.text == "A" || t.text == "E") return quantified();
    if (t.text == "true" || t.text == "false") {
      next();
      return t.text == "true" ? Formula::truth() : Formula::falsity();
    }
    if (t.text == "U" || t.text == "R") fail("syntax", t.column, 1, "missing left operand of '" + t.text + "'");
    Tok id = next();
    if (!props_.count(id.text)) fail("unknown-proposition", id.column, id.text.size(), "unknown proposition '" + id.text + "'");
    return Formula::atom(id.text);
  }

  // `A G p`, `E F p`, `A[p U q]`, `E(p U q)`
  Formula quantified() {
    Tok q = next();
    bool universal = q.text == "A";
    if (peek().kind == Tok::ident && (peek().text == "G" || peek().text == "F" || peek().text == "X")) {
      std::string p = next().text;
      Op op = p == "G" ? (universal ? Op::ag : Op::eg) : p == "F" ? (universal ? Op::af : Op::ef) : (universal ? Op::ax : Op::ex);
      return Formula::unary(op, unary());
    }
    Tok::Kind close;
    if (peek().kind == Tok::lbrack) close = Tok::rbrack;
    else if (peek().kind == Tok::lparen) close = Tok::rparen;
    else fail("syntax", q.column, 1, "path quantifier '" + q.text + "' must be followed by G, F, X or an until");
    next();
    std::size_t column = peek().column;
    Formula inner = implication();
    expect(close, close == Tok::rbrack ? "']'" : "')'");
    if (inner.op != Op::until) fail("syntax", column, 1, "expected 'p U q' after path quantifier '" + q.text + "'");
    return Formula::binary(universal ? Op::au : Op::eu, std::move(inner.args[0]), std::move(inner.args[1]));
  }
};

}  // namespace

Formula compile_property(const std::string& text, const std::set<std::string>& propositions) {
  Formula f = PropertyParser(text, propositions).parse();
  bool ctl = false, path = false;
  walk(f, [&](const Formula& g) {
    ctl = ctl || is_ctl_op(g.op);
    path = path || is_path_op(g.op);
  });
  if (ctl && path)
    fail("mixed-logic", 1, text.size(), "property mixes CTL quantifiers with unquantified path operators");
  return f;
}

Formula compile_property(const std::string& text, const SystemGraph& g) {
  std::set<std::string> props;
  for (const auto& p : g.propositions) props.insert(p.name);
  return compile_property(text, props);
}

Formula compile_property(const std::string& text, const Model& m) {
  std::set<std::string> props;
  for (const auto& c : m.components)
    for (const auto& p : c.propositions) props.insert(p.name);
  return compile_property(text, props);
}

Formula ltl_nnf(const Formula& f) {
  auto neg = [](const Formula& g) { return ltl_nnf(Formula::unary(Op::negation, g)); };
  switch (f.op) {
    case Op::truth: case Op::falsity: case Op::atom:
      return f;
    case Op::implication:
      return Formula::binary(Op::disjunction, neg(f.args[0]), ltl_nnf(f.args[1]));
    case Op::negation: {
      const Formula& g = f.args[0];
      switch (g.op) {
        case Op::truth: return Formula::falsity();
        case Op::falsity: return Formula::truth();
        case Op::atom: return f;
        case Op::negation: return ltl_nnf(g.args[0]);
        case Op::conjunction: return Formula::binary(Op::disjunction, neg(g.args[0]), neg(g.args[1]));
        case Op::disjunction: return Formula::binary(Op::conjunction, neg(g.args[0]), neg(g.args[1]));
        case Op::implication: return Formula::binary(Op::conjunction, ltl_nnf(g.args[0]), neg(g.args[1]));
        case Op::next: return Formula::unary(Op::next, neg(g.args[0]));
        case Op::eventually: return Formula::unary(Op::always, neg(g.args[0]));
        case Op::always: return Formula::unary(Op::eventually, neg(g.args[0]));
        case Op::until: return Formula::binary(Op::release, neg(g.args[0]), neg(g.args[1]));
        case Op::release: return Formula::binary(Op::until, neg(g.args[0]), neg(g.args[1]));
        default: throw ModelError("unsupported", "CTL operator in an LTL formula");
      }
    }
    case Op::conjunction: case Op::disjunction: case Op::until: case Op::release:
      return Formula::binary(f.op, ltl_nnf(f.args[0]), ltl_nnf(f.args[1]));
    case Op::next: case Op::eventually: case Op::always:
      return Formula::unary(f.op, ltl_nnf(f.args[0]));
    default:
      throw ModelError("unsupported", "CTL operator in an LTL formula");
  }
}

}  // namespace sysgraph
