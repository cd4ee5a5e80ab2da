#include "lexer.hpp"

#include <cctype>

namespace sysgraph::detail {

std::string describe(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::integer: return "integer";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::semi: return "';'";
    case Tok::colon: return "':'";
    case Tok::comma: return "','";
    case Tok::assign: return "'='";
    case Tok::define: return "':='";
    case Tok::eq: return "'=='";
    case Tok::ne: return "'!='";
    case Tok::lt: return "'<'";
    case Tok::le: return "'<='";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::bang: return "'!'";
    case Tok::question: return "'?'";
    case Tok::and_: return "'&&'";
    case Tok::or_: return "'||'";
    case Tok::pipe: return "'|'";
    case Tok::arrow: return "'->'";
    case Tok::fat_arrow: return "'=>'";
    case Tok::dotdot: return "'..'";
    case Tok::minus: return "'-'";
    case Tok::end: return "end of input";
  }
  return "token";
}

bool valid_utf8(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E) extra = 3;
    else return false;
    if (i + extra >= text.size() && extra > 0) return false;
    for (std::size_t k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(text[i + k]) >> 6) != 0x2) return false;
    i += extra + 1;
  }
  return true;
}

std::vector<Token> lex(const std::string& text, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto emit = [&](Tok kind, std::size_t len) {
    out.push_back({kind, text.substr(i, len), {line, col, len}});
    advance(len);
  };
  auto next_is = [&](char c) { return i + 1 < text.size() && text[i + 1] == c; };

  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      emit(Tok::ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      emit(Tok::integer, j - i);
      continue;
    }
    switch (c) {
      case '{': emit(Tok::lbrace, 1); continue;
      case '}': emit(Tok::rbrace, 1); continue;
      case '(': emit(Tok::lparen, 1); continue;
      case ')': emit(Tok::rparen, 1); continue;
      case '[': emit(Tok::lbracket, 1); continue;
      case ']': emit(Tok::rbracket, 1); continue;
      case ';': emit(Tok::semi, 1); continue;
      case ',': emit(Tok::comma, 1); continue;
      case '?': emit(Tok::question, 1); continue;
      case ':': next_is('=') ? emit(Tok::define, 2) : emit(Tok::colon, 1); continue;
      case '=':
        if (next_is('=')) emit(Tok::eq, 2);
        else if (next_is('>')) emit(Tok::fat_arrow, 2);
        else emit(Tok::assign, 1);
        continue;
      case '!': next_is('=') ? emit(Tok::ne, 2) : emit(Tok::bang, 1); continue;
      case '<': next_is('=') ? emit(Tok::le, 2) : emit(Tok::lt, 1); continue;
      case '>': next_is('=') ? emit(Tok::ge, 2) : emit(Tok::gt, 1); continue;
      case '&':
        if (next_is('&')) {
          emit(Tok::and_, 2);
          continue;
        }
        break;
      case '|': next_is('|') ? emit(Tok::or_, 2) : emit(Tok::pipe, 1); continue;
      case '-': next_is('>') ? emit(Tok::arrow, 2) : emit(Tok::minus, 1); continue;
      case '.':
        if (next_is('.')) {
          emit(Tok::dotdot, 2);
          continue;
        }
        break;
      default: break;
    }
    // Report a whole UTF-8 sequence as one unexpected character.
    std::size_t len = 1;
    auto uc = static_cast<unsigned char>(c);
    if (uc >= 0xC0) len = uc >= 0xF0 ? 4 : uc >= 0xE0 ? 3 : 2;
    if (i + len > text.size()) len = text.size() - i;
    diags.push_back({Severity::error, {line, col, len}, "lexical",
                     "unexpected character '" + text.substr(i, len) + "'"});
    advance(len);
  }
  out.push_back({Tok::end, "", {line, col, 0}});
  return out;
}

}  // namespace sysgraph::detail
