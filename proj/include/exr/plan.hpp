#pragma once

// Plan algebra over the three reasoning layers and its typing into Bloom
// cells and effort scores.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exr/bloom.hpp"
#include "exr/common.hpp"

namespace exr::plan {

enum class Layer { Eval, DR, MDR };

std::string_view to_string(Layer l);
std::optional<Layer> parse_layer(std::string_view s);

struct Plan;
using PlanPtr = std::shared_ptr<const Plan>;

struct Atom {
  std::string verb;
  Layer layer = Layer::DR;
  std::string subject;  // optional free-form reference, empty if absent
};
struct Seq {
  PlanPtr left, right;
};
struct Choice {
  PlanPtr left, right;
};
struct Star {
  PlanPtr body;
};
struct RuleRef {
  std::string name;
};

struct Plan {
  SourcePos pos;
  std::variant<Atom, Seq, Choice, Star, RuleRef> node;
};

/// A plan expression together with its named rule definitions.
struct PlanDoc {
  std::map<std::string, PlanPtr> rules;
  std::vector<std::string> rule_order;  // definition order, for rendering
  PlanPtr root;
};

/// Grammar:
///   doc  := (NAME "=>" expr ".")* expr
///   expr := seq ("|" seq)*
///   seq  := unit (";" unit)*
///   unit := VERB "(" LAYER [":" subject] ")" | NAME | "(" expr ")" ["*"]
/// `base` shifts reported positions (plans embedded in other files).
/// Throws ParseError; Error("UndefinedRule"), Error("RecursiveRule").
PlanDoc parse_plan(std::string_view source, SourcePos base = {});

std::string render(const PlanPtr& p);
std::string render(const PlanDoc& d);

// ---------------------------------------------------------------------------
// Typing

struct VerbMap {
  std::map<std::pair<std::string, Layer>, bloom::Cell> cells;

  /// `verb <lemma>@<Layer> -> (<Process>, <Knowledge>)` lines.
  static VerbMap parse(std::string_view text);
  std::optional<bloom::Cell> lookup(const std::string& verb, Layer layer) const;
};

struct Weights {
  double star_factor = 2.0;
  double missing_path_ratio = 4.0;
  std::size_t path_bound = 64;

  /// `key = value` lines with keys star_factor, missing_path_ratio, path_bound.
  static Weights parse(std::string_view text);
};

bloom::Cell default_cell(Layer layer);
double atom_score(const bloom::Cell& c);

using Signature = std::vector<Layer>;

enum class Pattern { P1, P2, P3 };
std::string_view to_string(Pattern p);
/// "P1-oscillation", "P2-abstraction", "P3-inflection".
std::string_view describe(Pattern p);

std::vector<Pattern> detect_patterns(const Signature& s);
std::vector<Pattern> detect_patterns(const std::vector<Signature>& sigs);

struct Report {
  bloom::Cell cell_min_path;
  bloom::Cell cell_max_path;
  double effort_min = 0;
  double effort_max = 0;
  std::vector<Signature> signatures;
  bool truncated = false;
  std::vector<Pattern> patterns;
  std::vector<Finding> warnings;  // Unmapped, PathExplosion, MissingPath
};

/// Types a plan. Unmapped verbs produce warnings; exceeding the path bound
/// sets `truncated` and adds a PathExplosion finding.
Report type_plan(const PlanDoc& doc, const VerbMap& verbs, const Weights& w);

/// Per-node values of the scoring recurrence (no signatures).
struct Typing {
  bloom::Cell cell_min;
  bloom::Cell cell_max;
  double effort_min = 0;
  double effort_max = 0;
};
Typing type_node(const PlanDoc& doc, const PlanPtr& p, const VerbMap& verbs, const Weights& w);

/// Enumerated layer sequences of a plan, Star unrolled once. Consecutive
/// repeated layers collapse. Returns nullopt when more than `bound` paths.
std::optional<std::vector<Signature>> signatures(const PlanDoc& doc, const PlanPtr& p,
                                                 std::size_t bound);

struct MissingPath {
  PlanPtr smaller;
  PlanPtr larger;
  double ratio = 0;
};

/// Flags every Seq whose sides differ in effort by at least the ratio.
std::vector<MissingPath> missing_path_lint(const PlanDoc& doc, const VerbMap& verbs,
                                           const Weights& w);

Finding to_finding(const MissingPath& m);

/// Discrepancies between a declared target and the typed interval.
std::vector<Finding> target_discrepancies(const bloom::Cell& declared, const Report& r,
                                          SourcePos pos);

}  // namespace exr::plan
