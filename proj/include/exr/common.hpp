#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exr {

/// 1-based line/column into some source text. `offset` is 0-based.
struct SourcePos {
  std::size_t offset = 0;
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
  friend auto operator<=>(const SourcePos& a, const SourcePos& b) {
    return a.offset <=> b.offset;
  }
};

std::string to_string(const SourcePos& pos);

/// Computes line/column for a byte offset of `text`.
SourcePos position_at(std::string_view text, std::size_t offset);

/// Base of every error thrown across a module boundary. `code()` is a
/// stable identifier (e.g. "ParseError", "UnboundName") used in reports.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string message, SourcePos pos = {})
      : std::runtime_error(message), code_(std::move(code)), pos_(pos) {}

  const std::string& code() const noexcept { return code_; }
  const SourcePos& pos() const noexcept { return pos_; }

 private:
  std::string code_;
  SourcePos pos_;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, SourcePos pos, std::vector<std::string> expected = {},
             std::string code = "ParseError")
      : Error(std::move(code), std::move(message), pos), expected_(std::move(expected)) {}

  /// Token kinds that would have been accepted at `pos()`.
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::vector<std::string> expected_;
};

enum class Severity { Info, Warning, Error };

std::string_view to_string(Severity s);

/// A single diagnostic produced by validation, typing or linting.
struct Finding {
  Severity severity = Severity::Info;
  std::string code;
  std::string message;
  SourcePos pos;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Sorts by position, then code.
void sort_findings(std::vector<Finding>& findings);

Severity max_severity(const std::vector<Finding>& findings);

// Small text helpers shared by the line-oriented file formats.
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string read_file(const std::string& path);

/// Quotes `s` as a double-quoted string literal with \" \\ \n \t escapes.
std::string quote(std::string_view s);

}  // namespace exr
