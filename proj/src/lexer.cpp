#include "lexer.hpp"

#include <cctype>

namespace exr::detail {

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::End: return "end of input";
    case Token::String: return "string " + quote(t.text);
    case Token::Int: return "number '" + t.text + "'";
    case Token::Ident: return "identifier '" + t.text + "'";
    case Token::Punct: return "'" + t.text + "'";
  }
  return "token";
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> lex(std::string_view src, const LexOptions& options, const LineIndex& lines) {
  std::vector<Token> out;
  std::size_t i = 0;
  bool space = true;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      space = true;
      continue;
    }
    if (options.slash_comments && c == '/' && i + 1 < src.size()) {
      if (src[i + 1] == '/') {
        while (i < src.size() && src[i] != '\n') ++i;
        space = true;
        continue;
      }
      if (src[i + 1] == '*') {
        const std::size_t close = src.find("*/", i + 2);
        if (close == std::string_view::npos)
          throw ParseError("unterminated comment", lines.at(i), {"'*/'"});
        i = close + 2;
        space = true;
        continue;
      }
    }
    if (options.hash_comments && c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      space = true;
      continue;
    }

    Token t;
    t.offset = i;
    t.space_before = space;
    space = false;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.kind = Token::Ident;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Int;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string text;
      bool closed = false;
      while (j < src.size()) {
        const char d = src[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\n') break;
        if (d == '\\' && j + 1 < src.size()) {
          const char e = src[j + 1];
          switch (e) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case '"': text += '"'; break;
            case '\\': text += '\\'; break;
            default: text += '\\'; text += e;
          }
          j += 2;
          continue;
        }
        text += d;
        ++j;
      }
      if (!closed) throw ParseError("unterminated string literal", lines.at(i), {"'\"'"});
      t.kind = Token::String;
      t.text = std::move(text);
      i = j;
    } else {
      std::string_view best;
      for (auto p : options.puncts)
        if (p.size() > best.size() && src.substr(i, p.size()) == p) best = p;
      t.kind = Token::Punct;
      t.text = best.empty() ? std::string(1, c) : std::string(best);
      i += t.text.size();
    }
    t.length = i - t.offset;
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Token::End;
  end.offset = src.size();
  end.space_before = true;
  out.push_back(end);
  return out;
}

}  // namespace exr::detail
