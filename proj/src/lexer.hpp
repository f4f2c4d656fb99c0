#pragma once

// Tokenizer and expression parser shared by parse_expr and the model-file
// parser. Internal header.

#include <string>
#include <string_view>
#include <vector>

#include "dagmc/expr.hpp"

namespace dagmc::lang::detail {

enum class Tok {
  identifier,
  number,
  string,
  lbrace,
  rbrace,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  semicolon,
  assign,
  dot,
  plus,
  minus,
  star,
  slash,
  caret,
  lt,
  le,
  gt,
  ge,
  eq,
  ne,
  end,
};

struct Token {
  Tok kind;
  std::string text;  // identifier name, string contents, or number spelling
  double number = 0.0;
  int line = 1;
  int column = 1;
};

/// Splits `source` into tokens; `#` starts a comment running to end of line.
/// The last token is always Tok::end.
std::vector<Token> tokenize(std::string_view source);

std::string describe(const Token& token);

/// Recursive-descent parser over a token vector.
class TokenStream {
public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_word(std::string_view word) const;
  bool accept(Tok kind);
  const Token& expect(Tok kind, std::string_view what);
  std::string expect_identifier(std::string_view what);
  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_at(const Token& token, const std::string& message) const;

  Expr parse_expression();

private:
  Expr parse_conditional();
  Expr parse_comparison();
  Expr parse_additive();
  Expr parse_multiplicative();
  Expr parse_unary();
  Expr parse_power();
  Expr parse_postfix();
  Expr parse_primary();

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace dagmc::lang::detail
