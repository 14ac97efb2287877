#pragma once

// Revised Bloom taxonomy: the two category scales, clue tables mapping verbs
// and nouns onto them, and groupings of cells into course levels.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exr/common.hpp"

namespace exr::bloom {

enum class Process { Remember, Understand, Apply, Analyze, Evaluate, Create };
enum class Knowledge { Factual, Conceptual, Procedural, Metacognitive };

inline constexpr Process kProcesses[] = {Process::Remember, Process::Understand,
                                         Process::Apply,    Process::Analyze,
                                         Process::Evaluate, Process::Create};
inline constexpr Knowledge kKnowledge[] = {Knowledge::Factual, Knowledge::Conceptual,
                                           Knowledge::Procedural, Knowledge::Metacognitive};

inline int rank(Process p) { return static_cast<int>(p); }
inline int rank(Knowledge k) { return static_cast<int>(k); }

std::string_view to_string(Process p);
std::string_view to_string(Knowledge k);
std::optional<Process> parse_process(std::string_view s);      // case-insensitive
std::optional<Knowledge> parse_knowledge(std::string_view s);  // case-insensitive

struct Cell {
  Process process = Process::Remember;
  Knowledge knowledge = Knowledge::Factual;

  friend bool operator==(const Cell&, const Cell&) = default;
  /// Lexicographic (process first); used only for deterministic tie breaks.
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// "(Analyze, Conceptual)".
std::string to_string(const Cell& c);

/// Componentwise order and join.
bool leq(const Cell& a, const Cell& b);
Cell join(const Cell& a, const Cell& b);

class ClueTable {
 public:
  /// Parses `verb <lemma> -> <Process>` / `noun <id> -> <Knowledge>` lines;
  /// `#` starts a comment. Throws ParseError.
  static ClueTable parse(std::string_view text);

  void add_verb(std::string lemma, Process p);
  void add_noun(std::string id, Knowledge k);

  std::optional<Process> verb(std::string_view lemma) const;
  std::optional<Knowledge> noun(std::string_view id) const;

  /// Verb lemmas, as token sequences, longest first.
  std::vector<std::vector<std::string>> verb_phrases() const;

 private:
  std::map<std::string, Process> verbs_;
  std::map<std::string, Knowledge> nouns_;
};

struct Statement {
  std::string verb;
  std::vector<std::string> np;

  friend bool operator==(const Statement&, const Statement&) = default;
};

/// Reduces a learning-objective sentence to verb x noun phrases. Throws
/// Error("CannotNormalize") when no lexicon verb occurs.
Statement normalize_statement(std::string_view text, const ClueTable& clues);

struct Classification {
  std::optional<Cell> cell;
  bool verb_missing = false;
  bool noun_missing = false;
  /// "verb", "noun" or "both" when unclassifiable.
  std::string missing_side() const;
};

Classification classify(const Statement& s, const ClueTable& clues);

/// Moves the cell to (Create, K) when the student has not reached row K.
Cell dynamic_cell(const Cell& static_cell, Knowledge student);

enum class CourseLevel { ReadingUnderstanding, WritingSmallFragments, WritingNontrivial };

std::string_view to_string(CourseLevel l);
CourseLevel course_level(const Cell& c);

/// Named grouping of categories, loaded from `process <Cat> -> <Group>` and
/// `knowledge <Cat> -> <Group>` lines.
class Grouping {
 public:
  static Grouping parse(std::string_view text);
  std::optional<std::string> group(Process p) const;
  std::optional<std::string> group(Knowledge k) const;

 private:
  std::map<Process, std::string> process_;
  std::map<Knowledge, std::string> knowledge_;
};

}  // namespace exr::bloom
