#include "lexer.hpp"

#include <cctype>
#include <charconv>

#include "dagmc/error.hpp"

namespace dagmc::lang::detail {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_keyword(std::string_view word) {
  return word == "if" || word == "then" || word == "else";
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }

    Token tok{Tok::end, "", 0.0, line, col};
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      tok.kind = Tok::identifier;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && (is_digit(src[j]) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      tok.kind = Tok::number;
      tok.text = std::string(src.substr(i, j - i));
      const auto [ptr, ec] =
          std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
        throw SyntaxError("malformed number '" + tok.text + "'", line, col);
      }
      advance(j - i);
    } else if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      std::string text;
      while (j < src.size() && src[j] != c && src[j] != '\n') {
        if (src[j] == '\\' && j + 1 < src.size()) {
          const char e = src[j + 1];
          text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          j += 2;
        } else {
          text += src[j++];
        }
      }
      if (j >= src.size() || src[j] != c) throw SyntaxError("unterminated string", line, col);
      tok.kind = Tok::string;
      tok.text = std::move(text);
      advance(j + 1 - i);
    } else {
      auto two = [&](char next) { return i + 1 < src.size() && src[i + 1] == next; };
      std::size_t len = 1;
      switch (c) {
        case '{': tok.kind = Tok::lbrace; break;
        case '}': tok.kind = Tok::rbrace; break;
        case '(': tok.kind = Tok::lparen; break;
        case ')': tok.kind = Tok::rparen; break;
        case '[': tok.kind = Tok::lbracket; break;
        case ']': tok.kind = Tok::rbracket; break;
        case ',': tok.kind = Tok::comma; break;
        case ';': tok.kind = Tok::semicolon; break;
        case '.': tok.kind = Tok::dot; break;
        case '+': tok.kind = Tok::plus; break;
        case '-': tok.kind = Tok::minus; break;
        case '*': tok.kind = Tok::star; break;
        case '/': tok.kind = Tok::slash; break;
        case '^': tok.kind = Tok::caret; break;
        case '<':
          tok.kind = two('=') ? Tok::le : Tok::lt;
          len = two('=') ? 2 : 1;
          break;
        case '>':
          tok.kind = two('=') ? Tok::ge : Tok::gt;
          len = two('=') ? 2 : 1;
          break;
        case '=':
          tok.kind = two('=') ? Tok::eq : Tok::assign;
          len = two('=') ? 2 : 1;
          break;
        case '~':
        case '!':
          if (!two('=')) throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
          tok.kind = Tok::ne;
          len = 2;
          break;
        default:
          throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
      }
      tok.text = std::string(src.substr(i, len));
      advance(len);
    }
    out.push_back(std::move(tok));
  }
  out.push_back(Token{Tok::end, "", 0.0, line, col});
  return out;
}

std::string describe(const Token& token) {
  switch (token.kind) {
    case Tok::end: return "end of input";
    case Tok::string: return "string \"" + token.text + "\"";
    case Tok::identifier: return "'" + token.text + "'";
    default: return "'" + token.text + "'";
  }
}

const Token& TokenStream::peek(std::size_t ahead) const {
  const std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[k];
}

const Token& TokenStream::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenStream::at_word(std::string_view word) const {
  return peek().kind == Tok::identifier && peek().text == word;
}

bool TokenStream::accept(Tok kind) {
  if (!at(kind)) return false;
  next();
  return true;
}

const Token& TokenStream::expect(Tok kind, std::string_view what) {
  if (!at(kind)) fail("expected " + std::string(what) + ", found " + describe(peek()));
  return next();
}

std::string TokenStream::expect_identifier(std::string_view what) {
  if (!at(Tok::identifier) || is_keyword(peek().text)) {
    fail("expected " + std::string(what) + ", found " + describe(peek()));
  }
  return next().text;
}

void TokenStream::fail(const std::string& message) const { fail_at(peek(), message); }

void TokenStream::fail_at(const Token& token, const std::string& message) const {
  throw SyntaxError(message, token.line, token.column);
}

Expr TokenStream::parse_expression() { return parse_conditional(); }

Expr TokenStream::parse_conditional() {
  if (at_word("if")) {
    next();
    Expr cond = parse_expression();
    if (!at_word("then")) fail("expected 'then', found " + describe(peek()));
    next();
    Expr then_branch = parse_expression();
    if (!at_word("else")) fail("expected 'else', found " + describe(peek()));
    next();
    Expr else_branch = parse_expression();
    return Expr::conditional(std::move(cond), std::move(then_branch), std::move(else_branch));
  }
  return parse_comparison();
}

Expr TokenStream::parse_comparison() {
  Expr lhs = parse_additive();
  for (;;) {
    BinaryOp op;
    switch (peek().kind) {
      case Tok::lt: op = BinaryOp::lt; break;
      case Tok::le: op = BinaryOp::le; break;
      case Tok::gt: op = BinaryOp::gt; break;
      case Tok::ge: op = BinaryOp::ge; break;
      case Tok::eq: op = BinaryOp::eq; break;
      case Tok::ne: op = BinaryOp::ne; break;
      default: return lhs;
    }
    next();
    lhs = Expr::binary(op, std::move(lhs), parse_additive());
  }
}

Expr TokenStream::parse_additive() {
  Expr lhs = parse_multiplicative();
  while (at(Tok::plus) || at(Tok::minus)) {
    const BinaryOp op = next().kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
    lhs = Expr::binary(op, std::move(lhs), parse_multiplicative());
  }
  return lhs;
}

Expr TokenStream::parse_multiplicative() {
  Expr lhs = parse_unary();
  while (at(Tok::star) || at(Tok::slash)) {
    const BinaryOp op = next().kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
    lhs = Expr::binary(op, std::move(lhs), parse_unary());
  }
  return lhs;
}

Expr TokenStream::parse_unary() {
  if (accept(Tok::minus)) return Expr::negate(parse_unary());
  return parse_power();
}

Expr TokenStream::parse_power() {
  Expr base = parse_postfix();
  if (accept(Tok::caret)) return Expr::binary(BinaryOp::pow, std::move(base), parse_unary());
  return base;
}

Expr TokenStream::parse_postfix() {
  if (at(Tok::identifier) && !is_keyword(peek().text)) {
    if (peek(1).kind == Tok::lparen) {
      std::string fn = next().text;
      next();
      std::vector<Expr> args;
      if (!at(Tok::rparen)) {
        do {
          args.push_back(parse_expression());
        } while (accept(Tok::comma));
      }
      expect(Tok::rparen, "')'");
      return Expr::call(std::move(fn), std::move(args));
    }
    if (peek(1).kind == Tok::lbracket) {
      std::string name = next().text;
      next();
      Expr position = parse_expression();
      expect(Tok::rbracket, "']'");
      return Expr::index(std::move(name), std::move(position));
    }
  }
  return parse_primary();
}

Expr TokenStream::parse_primary() {
  const Token& tok = peek();
  switch (tok.kind) {
    case Tok::number: return Expr::number(next().number);
    case Tok::identifier:
      if (tok.text == "if") return parse_conditional();
      return Expr::identifier(expect_identifier("identifier"));
    case Tok::lparen: {
      next();
      Expr inner = parse_expression();
      expect(Tok::rparen, "')'");
      return inner;
    }
    case Tok::lbracket: {
      next();
      std::vector<Expr> elems;
      if (!at(Tok::rbracket)) {
        do {
          elems.push_back(parse_expression());
        } while (accept(Tok::comma));
      }
      expect(Tok::rbracket, "']'");
      return Expr::vector(std::move(elems));
    }
    default: fail("expected expression, found " + describe(tok));
  }
}

}  // namespace dagmc::lang::detail
