#pragma once

// Exercise specifications (`.exr` files): question text with fenced
// minilang code, MCQ options or free-value answers, a declared Bloom target
// and a solution plan.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exr/bloom.hpp"
#include "exr/common.hpp"
#include "exr/minilang.hpp"
#include "exr/plan.hpp"

namespace exr::spec {

/// A checkable claim about the effect of the question's code.
struct Facet {
  enum class Kind { Stdout, Binding, Text };
  Kind kind = Kind::Stdout;
  std::string name;  // binding name
  lang::Value value;  // binding value
  std::string text;   // stdout or free text
  SourcePos pos;
};

std::string render(const Facet& f);

struct McqOption {
  char key = 'a';
  std::string label;
  bool correct = false;
  std::optional<Facet> expect;
  std::string tag;  // distractor transform that produced the option
  SourcePos pos;
};

struct CodeBlock {
  std::string source;  // dedented
  SourcePos pos;       // first code line
  lang::Program program;
};

struct Provenance {
  std::string rule;
  std::vector<std::pair<std::string, std::string>> bindings;
  std::optional<std::uint64_t> seed;
};

enum class Mode { Mcq, FreeValue };

struct ExerciseSpec {
  std::string id;
  std::optional<bloom::Cell> declared_target;
  SourcePos target_pos;
  std::vector<std::string> prerequisites;
  std::optional<Provenance> provenance;
  std::string question;  // raw text, fences included
  std::vector<CodeBlock> code;
  Mode mode = Mode::FreeValue;
  bool fill = false;  // option labels complete the `___` line of the code
  std::vector<McqOption> options;
  std::vector<Facet> answers;
  std::optional<plan::PlanDoc> plan;
  SourcePos plan_pos;
  std::vector<Finding> warnings;  // raised while parsing

  /// Declared target or the (Understand, Conceptual) default.
  bloom::Cell target() const;
  const McqOption* correct_option() const;
};

/// Throws ParseError (codes ParseError, DuplicateOptionKey,
/// MissingCorrectOption, MultipleCorrectOptions, ...).
ExerciseSpec parse_spec(std::string_view source);

/// Canonical text; parse_spec(render(s)) is equivalent to s.
std::string render(const ExerciseSpec& s);

/// Structural equality ignoring source positions.
bool equivalent(const ExerciseSpec& a, const ExerciseSpec& b);

/// Source evaluated for the question (all fences, in order).
std::string question_program(const ExerciseSpec& s);

/// Source evaluated for an option in fill mode.
std::string fill_program(const ExerciseSpec& s, const McqOption& o);

// ---------------------------------------------------------------------------

enum class Verdict { Confirmed, Refuted, EvaluationFailed, NoExpectation, Unchecked };
std::string_view to_string(Verdict v);

struct OptionResult {
  char key = 'a';
  bool correct = false;
  Verdict verdict = Verdict::NoExpectation;
  std::string detail;
};

struct AnswerResult {
  std::string facet;
  Verdict verdict = Verdict::Unchecked;
  std::string detail;
};

struct ValidationReport {
  std::optional<lang::Effect> effect;  // of the question code, if any
  std::vector<OptionResult> options;
  std::vector<AnswerResult> answers;
  std::vector<Finding> findings;

  std::size_t errors() const;
};

/// Checks each declared facet against evaluation. Pure; never throws for
/// runtime faults.
ValidationReport validate_spec(const ExerciseSpec& s, std::uint64_t fuel);

/// Whether `f` holds for effect `e` (Text facets never hold).
bool facet_holds(const Facet& f, const lang::Effect& e);

struct Consistency {
  std::optional<plan::Report> report;
  std::vector<Finding> findings;
};

/// Types the plan and compares it with the declared target; includes
/// MissingPath, Unmapped and MissingPlan findings.
Consistency consistency_check(const ExerciseSpec& s, const plan::VerbMap& verbs,
                              const plan::Weights& w);

}  // namespace exr::spec
