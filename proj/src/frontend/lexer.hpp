#pragma once

#include <string>
#include <vector>

#include "sysgraph/diagnostics.hpp"

namespace sysgraph::detail {

enum class Tok {
  ident,
  integer,
  lbrace,
  rbrace,
  lparen,
  rparen,
  lbracket,
  rbracket,
  semi,
  colon,
  comma,
  assign,    // =
  define,    // :=
  eq,        // ==
  ne,        // !=
  lt,
  le,
  gt,
  ge,
  bang,      // !
  question,  // ?
  and_,      // &&
  or_,       // ||
  pipe,      // |
  arrow,     // ->
  fat_arrow, // =>
  dotdot,    // ..
  minus,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourceSpan span;
};

std::string describe(Tok t);

// Tokenizes `text`; lexical errors are appended to `diags` and skipped.
std::vector<Token> lex(const std::string& text, std::vector<Diagnostic>& diags);

bool valid_utf8(const std::string& text);

}  // namespace sysgraph::detail
