#pragma once

// minilang: the small imperative language behind every code fragment an
// exercise shows. The surface accepts Java-like statements
// (`int[] a = {1, 2};`, `for(...)`, `System.out.print(i+" ");`) and ML-like
// value bindings (`val x = 7 + 4`). Evaluation is deterministic and bounded
// by fuel, one unit per executed statement.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "exr/common.hpp"

namespace exr::lang {

enum class Type { Int, IntArray };

std::string_view to_string(Type t);

// ---------------------------------------------------------------------------
// AST. Nodes are immutable once built and shared through shared_ptr<const>.

struct Expr;
struct Stmt;
using ExprPtr = std::shared_ptr<const Expr>;
using StmtPtr = std::shared_ptr<const Stmt>;

enum class UnaryOp { Negate, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

std::string_view to_string(BinaryOp op);

struct IntLit {
  std::int64_t value = 0;
};
struct VarRef {
  std::string name;
};
struct Index {
  ExprPtr array;
  ExprPtr index;
};
struct Length {
  ExprPtr array;
};
struct Unary {
  UnaryOp op;
  ExprPtr operand;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct NewArray {
  ExprPtr size;
};

struct Expr {
  SourcePos pos;
  Type type = Type::Int;
  std::variant<IntLit, VarRef, Index, Length, Unary, Binary, NewArray> node;
};

enum class AssignOp { Set, Add, Sub };

struct VarDecl {
  std::string name;
  Type type = Type::Int;
  ExprPtr init;  // never null; `int x;` desugars to 0
};
struct ArrayLiteralDecl {
  std::string name;
  std::vector<ExprPtr> elements;
};
struct Assign {
  AssignOp op = AssignOp::Set;
  ExprPtr target;  // VarRef or Index
  ExprPtr value;
};
struct IncDec {
  bool increment = true;
  bool prefix = true;
  ExprPtr target;
};
struct If {
  ExprPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;  // may be null
};
struct While {
  ExprPtr cond;
  StmtPtr body;
};
struct For {
  StmtPtr init;  // may be null
  ExprPtr cond;  // may be null (infinite loop)
  StmtPtr step;  // may be null
  StmtPtr body;
};
struct Print {
  ExprPtr value;
  std::string separator;
};
struct Block {
  std::vector<StmtPtr> statements;
};
struct Empty {};

struct Stmt {
  SourcePos pos;
  std::variant<VarDecl, ArrayLiteralDecl, Assign, IncDec, If, While, For, Print, Block, Empty>
      node;
};

std::string_view statement_kind(const Stmt& s);

struct Program {
  std::vector<StmtPtr> statements;
};

/// Parses and name-resolves `source`. Throws ParseError (codes "ParseError",
/// "UnboundName", "TypeMismatch") with the offending position.
Program parse_program(std::string_view source);

// ---------------------------------------------------------------------------
// Values and effects.

struct Value {
  std::variant<std::monostate, std::int64_t, std::vector<std::int64_t>> data;

  static Value unit() { return {}; }
  static Value integer(std::int64_t v) { return Value{v}; }
  static Value array(std::vector<std::int64_t> v) { return Value{std::move(v)}; }

  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_array() const { return std::holds_alternative<std::vector<std::int64_t>>(data); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data); }
  const std::vector<std::int64_t>& as_array() const {
    return std::get<std::vector<std::int64_t>>(data);
  }

  friend bool operator==(const Value&, const Value&) = default;
};

/// `7`, `{1, 2, 4}` or `()`.
std::string to_string(const Value& v);

using Bindings = std::vector<std::pair<std::string, Value>>;

const Value* find_binding(const Bindings& b, std::string_view name);

enum class Status { Completed, FuelExhausted, RuntimeError };
enum class RuntimeErrorKind { IndexOutOfBounds, DivisionByZero, Overflow, NegativeArraySize };

std::string_view to_string(RuntimeErrorKind k);

struct Effect {
  std::string stdout_text;
  Bindings bindings;  // top-level names in declaration order
  std::uint64_t steps = 0;
  Status status = Status::Completed;
  std::optional<RuntimeErrorKind> error;
  std::optional<SourcePos> error_pos;

  /// "Completed", "FuelExhausted" or "RuntimeError(<kind>)".
  std::string status_string() const;

  friend bool operator==(const Effect&, const Effect&) = default;
};

/// Runs `program` for at most `fuel` statements. Never throws for runtime
/// faults; they are recorded in the effect's status.
Effect evaluate(const Program& program, std::uint64_t fuel);

struct Snapshot {
  SourcePos pos;
  std::string kind;
  Bindings environment;  // visible names, outermost scope first
  std::string output;    // text printed by this statement itself
};

/// One snapshot per executed statement, recorded when the statement finishes
/// (or is interrupted). Compound statements therefore appear after their
/// bodies. The last snapshot of a finished run equals the effect bindings.
std::vector<Snapshot> trace(const Program& program, std::uint64_t fuel);

}  // namespace exr::lang
