#pragma once

// Shared tokenizer for the small textual languages (minilang, terms, plans).

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "exr/common.hpp"

namespace exr::detail {

class LineIndex {
 public:
  explicit LineIndex(std::string_view text, SourcePos base = {}) : base_(base) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i)
      if (text[i] == '\n') starts_.push_back(i + 1);
  }

  /// Position of `offset`, shifted by the base position of the text.
  SourcePos at(std::size_t offset) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    const std::size_t line = static_cast<std::size_t>(it - starts_.begin()) - 1;
    SourcePos p;
    p.offset = base_.offset + offset;
    p.line = base_.line + static_cast<int>(line);
    p.column = static_cast<int>(offset - starts_[line]) + (line == 0 ? base_.column : 1);
    return p;
  }

 private:
  SourcePos base_;
  std::vector<std::size_t> starts_;
};

struct Token {
  enum Kind { Ident, Int, String, Punct, End };
  Kind kind = End;
  std::string text;  // for String: the unescaped contents
  std::size_t offset = 0;
  std::size_t length = 0;
  bool space_before = false;

  bool is(Kind k, std::string_view t) const { return kind == k && text == t; }
  bool punct(std::string_view t) const { return is(Punct, t); }
  bool ident(std::string_view t) const { return is(Ident, t); }
};

std::string describe(const Token& t);

struct LexOptions {
  std::vector<std::string_view> puncts;  // multi-character punctuators
  bool slash_comments = false;           // `//` and `/* */`
  bool hash_comments = false;            // `#` to end of line
};

std::vector<Token> lex(std::string_view src, const LexOptions& options, const LineIndex& lines);

/// Cursor over a token vector with error reporting helpers.
class TokenStream {
 public:
  TokenStream(std::vector<Token> tokens, const LineIndex& lines)
      : tokens_(std::move(tokens)), lines_(lines) {}

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Token::End; }

  bool accept_punct(std::string_view p) {
    if (peek().punct(p)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_ident(std::string_view p) {
    if (peek().ident(p)) {
      next();
      return true;
    }
    return false;
  }

  const Token& expect_punct(std::string_view p) {
    if (!peek().punct(p)) fail({std::string("'") + std::string(p) + "'"});
    return next();
  }
  const Token& expect_kind(Token::Kind k, std::string_view what) {
    if (peek().kind != k) fail({std::string(what)});
    return next();
  }

  SourcePos pos_of(const Token& t) const { return lines_.at(t.offset); }
  SourcePos here() const { return pos_of(peek()); }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string msg = "unexpected " + describe(peek());
    if (!expected.empty()) {
      msg += ", expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += " or ";
        msg += expected[i];
      }
    }
    throw ParseError(msg, here(), std::move(expected));
  }

  std::size_t mark() const { return pos_; }
  void reset(std::size_t m) { pos_ = m; }

 private:
  std::vector<Token> tokens_;
  const LineIndex& lines_;
  std::size_t pos_ = 0;
};

}  // namespace exr::detail
