#pragma once

// Terms over exact rationals, normalization modulo AC of + and *, matching,
// rule packs with expert and buggy rules, solution graphs and diagnosis.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "exr/common.hpp"

namespace exr::rw {

/// Exact rational with int64 parts; arithmetic throws Error("Overflow") or
/// Error("DivisionByZero").
class Rational {
 public:
  Rational(std::int64_t n = 0) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;
  /// Integer power; negative exponents invert.
  Rational pow(std::int64_t e) const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_;
  std::int64_t den_;
};

std::string to_string(const Rational& r);

// ---------------------------------------------------------------------------

enum class Kind { Const, Sym, Var, App };

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Const;
  Rational value;      // Const
  std::string name;    // Sym / Var name, App operator
  std::vector<Term> kids;
  bool seq = false;    // Var written `R...`
};

Term cst(Rational v);
Term sym(std::string name);
Term var(std::string name, bool seq = false);
Term app(std::string op, std::vector<Term> kids);

/// Total order used for canonical sorting: Const < Sym < Var < App.
int compare(const Term& a, const Term& b);
inline bool equal(const Term& a, const Term& b) { return compare(a, b) == 0; }
struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare(a, b) < 0; }
};

bool contains(const Term& t, const Term& sub);
bool has_op(const Term& t, std::string_view op);

enum class TermMode {
  Ground,   // no variables
  Pattern,  // uppercase identifiers are variables, `R...` sequence variables
  Template  // as Pattern, plus `$1`, `$2` references to solved subtasks
};

/// Infix syntax: + - * / ^, unary -, `8x` / `8x^2` monomials,
/// `d/dx[t]`, and the functions log sin cos eq at monomial neg.
Term parse_term(std::string_view text, TermMode mode = TermMode::Ground, SourcePos base = {});

std::string to_string(const Term& t);

/// Canonical form: flattening and sorting of + and *, constant folding,
/// `a - b` and `a / b` eliminated, monomial canonicalization, and `at`
/// substitution once its body is derivative-free. Idempotent.
Term normalize(const Term& t);

// ---------------------------------------------------------------------------

struct Subst {
  std::map<std::string, Term> vars;
  std::map<std::string, std::string> fns;  // function variables -> operator
};

/// First match of `pattern` against normalize(subject).
std::optional<Subst> match_term(const Term& pattern, const Term& subject);
/// Every match, in search order.
std::vector<Subst> match_all(const Term& pattern, const Term& subject);

/// Replaces variables and `$i` (1-based) references, then normalizes.
Term instantiate(const Term& tmpl, const Subst& s, const std::vector<Term>& solved = {});

// ---------------------------------------------------------------------------

enum class RuleKind { Expert, Buggy };
std::string_view to_string(RuleKind k);

struct Guard {
  std::string name;  // const nonconst free same distinct nonzero
  std::vector<std::string> args;
};

struct Rule {
  std::string name;
  RuleKind kind = RuleKind::Expert;
  std::set<std::string> tags;  // always includes "expert" or "buggy"
  Term pattern;
  std::vector<Term> subtasks;
  Term rebuild;
  std::vector<Guard> guards;
  SourcePos pos;
};

bool guards_hold(const Rule& r, const Subst& s);

struct RulePack {
  std::vector<Rule> rules;

  /// Blocks of `rule <name> expert|buggy [tags(a,b)] : <pattern>
  /// [=> <sub> ; <sub>] ~> <rebuild> [when g(U), ...]`; `#` comments.
  static RulePack parse(std::string_view text);
};

// ---------------------------------------------------------------------------

struct GraphNode {
  Term task;
  int depth = 0;
  std::optional<Term> result;  // set once solved
};

struct GraphEdge {
  int parent = 0;
  std::string rule;
  std::vector<int> children;
  bool subtasks = false;  // children are subtasks combined by the rule's rebuild
};

struct SolutionGraph {
  std::vector<GraphNode> nodes;  // nodes[0] is the root
  std::vector<GraphEdge> edges;
  bool depth_exceeded = false;

  std::optional<Term> solution() const { return nodes.front().result; }
};

SolutionGraph build_solution_graph(const Term& task, const RulePack& pack, int max_depth);

// ---------------------------------------------------------------------------

struct Step {
  std::string rule;
  RuleKind kind = RuleKind::Expert;
  std::set<std::string> tags;
  std::string position;  // child-index path, e.g. "1.0"; empty for the root
  Term result;
};

struct Explanation {
  std::vector<Step> steps;
  int buggy_steps() const;
};

struct DiagnoseOptions {
  int max_steps = 6;
  std::size_t state_cap = 50000;
};

/// All explanation paths from `task` to a term normalizing to `answer`,
/// ranked by (buggy steps, length, rule names). Throws Error("NoExplanation")
/// when none exists within the bounds.
std::vector<Explanation> diagnose(const Term& task, const Term& answer, const RulePack& pack,
                                  DiagnoseOptions options = {});

/// Every (rule, position, result) one step away from `t`.
std::vector<Step> successors(const Term& t, const RulePack& pack, bool expert_only);

}  // namespace exr::rw
