#include "exr/minilang.hpp"

#include <charconv>
#include <limits>

#include "lexer.hpp"

namespace exr::lang {

std::string_view to_string(Type t) { return t == Type::Int ? "int" : "int[]"; }

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

std::string_view statement_kind(const Stmt& s) {
  static constexpr std::string_view names[] = {"VarDecl", "ArrayLiteralDecl", "Assign", "IncDec",
                                               "If",      "While",            "For",    "Print",
                                               "Block",   "Empty"};
  return names[s.node.index()];
}

std::string_view to_string(RuntimeErrorKind k) {
  switch (k) {
    case RuntimeErrorKind::IndexOutOfBounds: return "IndexOutOfBounds";
    case RuntimeErrorKind::DivisionByZero: return "DivisionByZero";
    case RuntimeErrorKind::Overflow: return "Overflow";
    case RuntimeErrorKind::NegativeArraySize: return "NegativeArraySize";
  }
  return "?";
}

std::string Effect::status_string() const {
  switch (status) {
    case Status::Completed: return "Completed";
    case Status::FuelExhausted: return "FuelExhausted";
    case Status::RuntimeError:
      return "RuntimeError(" + std::string(to_string(error.value_or(RuntimeErrorKind::Overflow))) +
             ")";
  }
  return "?";
}

std::string to_string(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_array()) {
    std::string s = "{";
    const auto& a = v.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(a[i]);
    }
    return s + "}";
  }
  return "()";
}

const Value* find_binding(const Bindings& b, std::string_view name) {
  for (const auto& [n, v] : b)
    if (n == name) return &v;
  return nullptr;
}

// ===========================================================================
// Parser

namespace {

using detail::Token;
using detail::TokenStream;

const detail::LexOptions& lex_options() {
  static const detail::LexOptions opts{
      {"<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "++", "--"}, true, false};
  return opts;
}

class Parser {
 public:
  Parser(std::string_view src, const detail::LineIndex& lines)
      : ts_(detail::lex(src, lex_options(), lines), lines) {}

  Program parse() {
    Program p;
    scopes_.emplace_back();
    while (!ts_.at_end()) p.statements.push_back(statement());
    return p;
  }

 private:
  TokenStream ts_;
  std::vector<std::vector<std::pair<std::string, Type>>> scopes_;

  // -- scopes ---------------------------------------------------------------

  struct ScopeGuard {
    Parser& p;
    explicit ScopeGuard(Parser& parser) : p(parser) { p.scopes_.emplace_back(); }
    ~ScopeGuard() { p.scopes_.pop_back(); }
  };

  void declare(const std::string& name, Type t) {
    auto& scope = scopes_.back();
    for (auto& [n, ty] : scope)
      if (n == name) {
        ty = t;
        return;
      }
    scope.emplace_back(name, t);
  }

  Type lookup(const Token& tok) const {
    for (auto s = scopes_.rbegin(); s != scopes_.rend(); ++s)
      for (const auto& [n, t] : *s)
        if (n == tok.text) return t;
    throw ParseError("unbound name '" + tok.text + "'", ts_.pos_of(tok), {}, "UnboundName");
  }

  [[noreturn]] void type_error(const SourcePos& pos, const std::string& msg) const {
    throw ParseError(msg, pos, {}, "TypeMismatch");
  }

  void require(const ExprPtr& e, Type t, const char* what) const {
    if (e->type != t)
      type_error(e->pos, std::string(what) + " must be " + std::string(to_string(t)) +
                             ", found " + std::string(to_string(e->type)));
  }

  // -- helpers --------------------------------------------------------------

  template <class Node>
  StmtPtr make_stmt(SourcePos pos, Node node) {
    auto s = std::make_shared<Stmt>();
    s->pos = pos;
    s->node = std::move(node);
    return s;
  }

  template <class Node>
  ExprPtr make_expr(SourcePos pos, Type t, Node node) {
    auto e = std::make_shared<Expr>();
    e->pos = pos;
    e->type = t;
    e->node = std::move(node);
    return e;
  }

  static bool is_keyword(const std::string& s) {
    static const char* const kws[] = {"int", "val", "if", "else", "while", "for", "true",
                                      "false", "new"};
    for (auto k : kws)
      if (s == k) return true;
    return false;
  }

  const Token& identifier() {
    const Token& t = ts_.peek();
    if (t.kind != Token::Ident || is_keyword(t.text)) ts_.fail({"identifier"});
    return ts_.next();
  }

  // -- statements -----------------------------------------------------------

  StmtPtr statement() {
    const Token& t = ts_.peek();
    const SourcePos pos = ts_.here();
    if (t.punct("{")) return block();
    if (t.punct(";")) {
      ts_.next();
      return make_stmt(pos, Empty{});
    }
    if (t.ident("if")) return if_statement();
    if (t.ident("while")) return while_statement();
    if (t.ident("for")) return for_statement();
    if (t.ident("val")) {
      auto s = val_declaration();
      ts_.accept_punct(";");
      return s;
    }
    if (t.ident("int")) {
      auto s = int_declaration();
      ts_.expect_punct(";");
      return s;
    }
    if (is_print()) return print_statement();
    auto s = simple_statement();
    ts_.expect_punct(";");
    return s;
  }

  StmtPtr block() {
    const SourcePos pos = ts_.here();
    ts_.expect_punct("{");
    ScopeGuard guard(*this);
    Block b;
    while (!ts_.peek().punct("}")) {
      if (ts_.at_end()) ts_.fail({"'}'"});
      b.statements.push_back(statement());
    }
    ts_.next();
    return make_stmt(pos, std::move(b));
  }

  StmtPtr scoped_statement() {
    ScopeGuard guard(*this);
    return statement();
  }

  ExprPtr condition() {
    ts_.expect_punct("(");
    auto c = expression();
    require(c, Type::Int, "condition");
    ts_.expect_punct(")");
    return c;
  }

  StmtPtr if_statement() {
    const SourcePos pos = ts_.here();
    ts_.next();
    If node;
    node.cond = condition();
    node.then_branch = scoped_statement();
    if (ts_.accept_ident("else")) node.else_branch = scoped_statement();
    return make_stmt(pos, std::move(node));
  }

  StmtPtr while_statement() {
    const SourcePos pos = ts_.here();
    ts_.next();
    While node;
    node.cond = condition();
    node.body = scoped_statement();
    return make_stmt(pos, std::move(node));
  }

  StmtPtr for_statement() {
    const SourcePos pos = ts_.here();
    ts_.next();
    ts_.expect_punct("(");
    ScopeGuard guard(*this);
    For node;
    if (!ts_.peek().punct(";"))
      node.init = ts_.peek().ident("int") ? int_declaration() : simple_statement();
    ts_.expect_punct(";");
    if (!ts_.peek().punct(";")) {
      node.cond = expression();
      require(node.cond, Type::Int, "loop condition");
    }
    ts_.expect_punct(";");
    if (!ts_.peek().punct(")")) node.step = simple_statement();
    ts_.expect_punct(")");
    node.body = scoped_statement();
    return make_stmt(pos, std::move(node));
  }

  StmtPtr val_declaration() {
    const SourcePos pos = ts_.here();
    ts_.next();
    const Token& name = identifier();
    ts_.expect_punct("=");
    VarDecl d;
    d.name = name.text;
    d.init = expression();
    d.type = d.init->type;
    declare(d.name, d.type);
    return make_stmt(pos, std::move(d));
  }

  StmtPtr int_declaration() {
    const SourcePos pos = ts_.here();
    ts_.next();  // int
    const bool array = ts_.accept_punct("[");
    if (array) ts_.expect_punct("]");
    const Token& name = identifier();
    if (array) {
      ts_.expect_punct("=");
      if (ts_.peek().punct("{")) {
        ts_.next();
        ArrayLiteralDecl d;
        d.name = name.text;
        if (!ts_.peek().punct("}")) {
          do {
            auto e = expression();
            require(e, Type::Int, "array element");
            d.elements.push_back(std::move(e));
          } while (ts_.accept_punct(","));
        }
        ts_.expect_punct("}");
        declare(d.name, Type::IntArray);
        return make_stmt(pos, std::move(d));
      }
      VarDecl d;
      d.name = name.text;
      d.type = Type::IntArray;
      d.init = expression();
      require(d.init, Type::IntArray, "initializer");
      declare(d.name, Type::IntArray);
      return make_stmt(pos, std::move(d));
    }
    VarDecl d;
    d.name = name.text;
    d.type = Type::Int;
    if (ts_.accept_punct("=")) {
      d.init = expression();
      require(d.init, Type::Int, "initializer");
    } else {
      d.init = make_expr(pos, Type::Int, IntLit{0});
    }
    declare(d.name, Type::Int);
    return make_stmt(pos, std::move(d));
  }

  bool is_print() const {
    const Token& t = ts_.peek();
    if (t.ident("System")) return true;
    return (t.ident("print") || t.ident("println")) && ts_.peek(1).punct("(");
  }

  StmtPtr print_statement() {
    const SourcePos pos = ts_.here();
    if (ts_.accept_ident("System")) {
      ts_.expect_punct(".");
      if (!ts_.accept_ident("out")) ts_.fail({"'out'"});
      ts_.expect_punct(".");
    }
    bool newline = false;
    if (ts_.accept_ident("println")) {
      newline = true;
    } else if (!ts_.accept_ident("print")) {
      ts_.fail({"'print'", "'println'"});
    }
    ts_.expect_punct("(");
    Print p;
    p.value = expression();
    require(p.value, Type::Int, "printed value");
    if (ts_.accept_punct("+")) p.separator = ts_.expect_kind(Token::String, "string").text;
    if (newline) p.separator += "\n";
    ts_.expect_punct(")");
    ts_.expect_punct(";");
    return make_stmt(pos, std::move(p));
  }

  // Assignment, ++/-- in either position.
  StmtPtr simple_statement() {
    const SourcePos pos = ts_.here();
    if (ts_.peek().punct("++") || ts_.peek().punct("--")) {
      const bool inc = ts_.next().text == "++";
      auto target = lvalue();
      require(target, Type::Int, "increment target");
      return make_stmt(pos, IncDec{inc, true, std::move(target)});
    }
    auto target = lvalue();
    const Token& op = ts_.peek();
    if (op.punct("++") || op.punct("--")) {
      ts_.next();
      require(target, Type::Int, "increment target");
      return make_stmt(pos, IncDec{op.text == "++", false, std::move(target)});
    }
    Assign a;
    if (ts_.accept_punct("=")) {
      a.op = AssignOp::Set;
    } else if (ts_.accept_punct("+=")) {
      a.op = AssignOp::Add;
    } else if (ts_.accept_punct("-=")) {
      a.op = AssignOp::Sub;
    } else {
      ts_.fail({"'='", "'+='", "'-='", "'++'", "'--'"});
    }
    a.value = expression();
    if (a.op != AssignOp::Set) require(target, Type::Int, "compound assignment target");
    require(a.value, target->type, "assigned value");
    a.target = std::move(target);
    return make_stmt(pos, std::move(a));
  }

  ExprPtr lvalue() {
    const SourcePos pos = ts_.here();
    const Token& name = identifier();
    const Type t = lookup(name);
    ExprPtr e = make_expr(pos, t, VarRef{name.text});
    if (ts_.accept_punct("[")) {
      if (t != Type::IntArray) type_error(pos, "'" + name.text + "' is not an array");
      auto idx = expression();
      require(idx, Type::Int, "index");
      ts_.expect_punct("]");
      e = make_expr(pos, Type::Int, Index{std::move(e), std::move(idx)});
    }
    return e;
  }

  // -- expressions ----------------------------------------------------------

  ExprPtr expression() { return logical_or(); }

  ExprPtr binary(SourcePos pos, BinaryOp op, ExprPtr l, ExprPtr r) {
    require(l, Type::Int, "operand");
    require(r, Type::Int, "operand");
    return make_expr(pos, Type::Int, Binary{op, std::move(l), std::move(r)});
  }

  ExprPtr logical_or() {
    auto e = logical_and();
    while (ts_.peek().punct("||")) {
      const SourcePos pos = ts_.here();
      ts_.next();
      e = binary(pos, BinaryOp::Or, std::move(e), logical_and());
    }
    return e;
  }

  ExprPtr logical_and() {
    auto e = equality();
    while (ts_.peek().punct("&&")) {
      const SourcePos pos = ts_.here();
      ts_.next();
      e = binary(pos, BinaryOp::And, std::move(e), equality());
    }
    return e;
  }

  ExprPtr equality() {
    auto e = relational();
    for (;;) {
      const Token& t = ts_.peek();
      BinaryOp op;
      if (t.punct("==")) op = BinaryOp::Eq;
      else if (t.punct("!=")) op = BinaryOp::Ne;
      else return e;
      const SourcePos pos = ts_.here();
      ts_.next();
      e = binary(pos, op, std::move(e), relational());
    }
  }

  ExprPtr relational() {
    auto e = additive();
    for (;;) {
      const Token& t = ts_.peek();
      BinaryOp op;
      if (t.punct("<")) op = BinaryOp::Lt;
      else if (t.punct("<=")) op = BinaryOp::Le;
      else if (t.punct(">")) op = BinaryOp::Gt;
      else if (t.punct(">=")) op = BinaryOp::Ge;
      else return e;
      const SourcePos pos = ts_.here();
      ts_.next();
      e = binary(pos, op, std::move(e), additive());
    }
  }

  ExprPtr additive() {
    auto e = multiplicative();
    for (;;) {
      const Token& t = ts_.peek();
      BinaryOp op;
      if (t.punct("+")) op = BinaryOp::Add;
      else if (t.punct("-")) op = BinaryOp::Sub;
      else return e;
      // `i + " "` inside print: the string belongs to the print separator.
      if (ts_.peek(1).kind == Token::String) return e;
      const SourcePos pos = ts_.here();
      ts_.next();
      e = binary(pos, op, std::move(e), multiplicative());
    }
  }

  ExprPtr multiplicative() {
    auto e = unary();
    for (;;) {
      const Token& t = ts_.peek();
      BinaryOp op;
      if (t.punct("*")) op = BinaryOp::Mul;
      else if (t.punct("/")) op = BinaryOp::Div;
      else if (t.punct("%")) op = BinaryOp::Mod;
      else return e;
      const SourcePos pos = ts_.here();
      ts_.next();
      e = binary(pos, op, std::move(e), unary());
    }
  }

  ExprPtr unary() {
    const SourcePos pos = ts_.here();
    const Token& t = ts_.peek();
    if (t.punct("-") || t.punct("~")) {
      ts_.next();
      auto operand = unary();
      require(operand, Type::Int, "operand");
      return make_expr(pos, Type::Int, Unary{UnaryOp::Negate, std::move(operand)});
    }
    if (t.punct("!")) {
      ts_.next();
      auto operand = unary();
      require(operand, Type::Int, "operand");
      return make_expr(pos, Type::Int, Unary{UnaryOp::Not, std::move(operand)});
    }
    return postfix();
  }

  ExprPtr postfix() {
    auto e = primary();
    for (;;) {
      const SourcePos pos = ts_.here();
      if (ts_.peek().punct("[")) {
        if (e->type != Type::IntArray) type_error(e->pos, "indexing a non-array value");
        ts_.next();
        auto idx = expression();
        require(idx, Type::Int, "index");
        ts_.expect_punct("]");
        e = make_expr(pos, Type::Int, Index{std::move(e), std::move(idx)});
      } else if (ts_.peek().punct(".") && ts_.peek(1).ident("length")) {
        if (e->type != Type::IntArray) type_error(e->pos, "'.length' of a non-array value");
        ts_.next();
        ts_.next();
        e = make_expr(pos, Type::Int, Length{std::move(e)});
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const SourcePos pos = ts_.here();
    const Token& t = ts_.peek();
    if (t.kind == Token::Int) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc()) throw ParseError("integer literal out of range", pos, {}, "Overflow");
      ts_.next();
      return make_expr(pos, Type::Int, IntLit{v});
    }
    if (t.ident("true") || t.ident("false")) {
      const bool b = t.text == "true";
      ts_.next();
      return make_expr(pos, Type::Int, IntLit{b ? 1 : 0});
    }
    if (t.ident("new")) {
      ts_.next();
      if (!ts_.accept_ident("int")) ts_.fail({"'int'"});
      ts_.expect_punct("[");
      auto size = expression();
      require(size, Type::Int, "array size");
      ts_.expect_punct("]");
      return make_expr(pos, Type::IntArray, NewArray{std::move(size)});
    }
    if (t.punct("(")) {
      ts_.next();
      auto e = expression();
      ts_.expect_punct(")");
      return e;
    }
    if (t.kind == Token::Ident && !is_keyword(t.text)) {
      const Token& name = ts_.next();
      return make_expr(pos, lookup(name), VarRef{name.text});
    }
    ts_.fail({"expression"});
  }
};

}  // namespace

Program parse_program(std::string_view source) {
  detail::LineIndex lines(source);
  Parser p(source, lines);
  return p.parse();
}

// ===========================================================================
// Interpreter

namespace {

struct RuntimeFault {
  RuntimeErrorKind kind;
  SourcePos pos;
};
struct FuelOut {};

class Interpreter {
 public:
  Interpreter(std::uint64_t fuel, std::vector<Snapshot>* trace) : fuel_(fuel), trace_(trace) {}

  Effect run(const Program& p) {
    Effect effect;
    scopes_.emplace_back();
    try {
      for (const auto& s : p.statements) exec(*s);
      effect.status = Status::Completed;
    } catch (const FuelOut&) {
      effect.status = Status::FuelExhausted;
    } catch (const RuntimeFault& f) {
      effect.status = Status::RuntimeError;
      effect.error = f.kind;
      effect.error_pos = f.pos;
    }
    effect.stdout_text = std::move(out_);
    effect.bindings = scopes_.front();
    effect.steps = steps_;
    return effect;
  }

 private:
  std::uint64_t fuel_;
  std::uint64_t steps_ = 0;
  std::vector<Snapshot>* trace_;
  std::vector<Bindings> scopes_;
  std::string out_;

  struct ScopeGuard {
    Interpreter& in;
    explicit ScopeGuard(Interpreter& i) : in(i) { in.scopes_.emplace_back(); }
    ~ScopeGuard() { in.scopes_.pop_back(); }
  };

  Value& slot(const std::string& name) {
    for (auto s = scopes_.rbegin(); s != scopes_.rend(); ++s)
      for (auto& [n, v] : *s)
        if (n == name) return v;
    // Unreachable for resolved programs.
    throw RuntimeFault{RuntimeErrorKind::Overflow, {}};
  }

  void declare(const std::string& name, Value v) {
    auto& scope = scopes_.back();
    for (auto& [n, old] : scope)
      if (n == name) {
        old = std::move(v);
        return;
      }
    scope.emplace_back(name, std::move(v));
  }

  Bindings visible() const {
    Bindings all;
    for (const auto& scope : scopes_)
      for (const auto& [n, v] : scope) {
        bool shadowed = false;
        for (auto& [an, av] : all)
          if (an == n) {
            av = v;
            shadowed = true;
          }
        if (!shadowed) all.emplace_back(n, v);
      }
    return all;
  }

  void record(const Stmt& s, std::size_t out_before) {
    if (!trace_) return;
    trace_->push_back(
        Snapshot{s.pos, std::string(statement_kind(s)), visible(), out_.substr(out_before)});
  }

  // -- arithmetic -----------------------------------------------------------

  static std::int64_t add(std::int64_t a, std::int64_t b, const SourcePos& pos) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw RuntimeFault{RuntimeErrorKind::Overflow, pos};
    return r;
  }
  static std::int64_t sub(std::int64_t a, std::int64_t b, const SourcePos& pos) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw RuntimeFault{RuntimeErrorKind::Overflow, pos};
    return r;
  }
  static std::int64_t mul(std::int64_t a, std::int64_t b, const SourcePos& pos) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw RuntimeFault{RuntimeErrorKind::Overflow, pos};
    return r;
  }

  // -- expressions ----------------------------------------------------------

  std::int64_t eval_int(const Expr& e) { return eval(e).as_int(); }

  Value eval(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> Value {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, IntLit>) {
            return Value::integer(n.value);
          } else if constexpr (std::is_same_v<N, VarRef>) {
            return slot(n.name);
          } else if constexpr (std::is_same_v<N, Index>) {
            return Value::integer(*element(n, e.pos));
          } else if constexpr (std::is_same_v<N, Length>) {
            return Value::integer(static_cast<std::int64_t>(eval(*n.array).as_array().size()));
          } else if constexpr (std::is_same_v<N, Unary>) {
            const std::int64_t v = eval_int(*n.operand);
            if (n.op == UnaryOp::Not) return Value::integer(v == 0 ? 1 : 0);
            return Value::integer(sub(0, v, e.pos));
          } else if constexpr (std::is_same_v<N, Binary>) {
            return Value::integer(binary(n, e.pos));
          } else {
            const std::int64_t size = eval_int(*n.size);
            if (size < 0) throw RuntimeFault{RuntimeErrorKind::NegativeArraySize, e.pos};
            return Value::array(std::vector<std::int64_t>(static_cast<std::size_t>(size), 0));
          }
        },
        e.node);
  }

  std::int64_t binary(const Binary& b, const SourcePos& pos) {
    if (b.op == BinaryOp::And) return eval_int(*b.lhs) != 0 && eval_int(*b.rhs) != 0;
    if (b.op == BinaryOp::Or) return eval_int(*b.lhs) != 0 || eval_int(*b.rhs) != 0;
    const std::int64_t l = eval_int(*b.lhs);
    const std::int64_t r = eval_int(*b.rhs);
    switch (b.op) {
      case BinaryOp::Add: return add(l, r, pos);
      case BinaryOp::Sub: return sub(l, r, pos);
      case BinaryOp::Mul: return mul(l, r, pos);
      case BinaryOp::Div:
      case BinaryOp::Mod:
        if (r == 0) throw RuntimeFault{RuntimeErrorKind::DivisionByZero, pos};
        if (l == std::numeric_limits<std::int64_t>::min() && r == -1) {
          if (b.op == BinaryOp::Mod) return 0;
          throw RuntimeFault{RuntimeErrorKind::Overflow, pos};
        }
        return b.op == BinaryOp::Div ? l / r : l % r;
      case BinaryOp::Lt: return l < r;
      case BinaryOp::Le: return l <= r;
      case BinaryOp::Gt: return l > r;
      case BinaryOp::Ge: return l >= r;
      case BinaryOp::Eq: return l == r;
      case BinaryOp::Ne: return l != r;
      default: return 0;
    }
  }

  std::int64_t* element(const Index& idx, const SourcePos& pos) {
    // Arrays are only ever indexed through a variable or a nested index of
    // a variable; evaluate the index before resolving the storage slot.
    const std::int64_t i = eval_int(*idx.index);
    auto* arr = std::get_if<VarRef>(&idx.array->node);
    std::vector<std::int64_t>* storage = nullptr;
    std::vector<std::int64_t> temp;
    if (arr) {
      storage = &std::get<std::vector<std::int64_t>>(slot(arr->name).data);
    } else {
      temp = eval(*idx.array).as_array();
      storage = &temp;
    }
    if (i < 0 || static_cast<std::uint64_t>(i) >= storage->size())
      throw RuntimeFault{RuntimeErrorKind::IndexOutOfBounds, pos};
    if (!arr) {
      scratch_ = (*storage)[static_cast<std::size_t>(i)];
      return &scratch_;
    }
    return &(*storage)[static_cast<std::size_t>(i)];
  }
  std::int64_t scratch_ = 0;

  void store(const Expr& target, Value v) {
    if (auto* var = std::get_if<VarRef>(&target.node)) {
      slot(var->name) = std::move(v);
      return;
    }
    *element(std::get<Index>(target.node), target.pos) = v.as_int();
  }

  // -- statements -----------------------------------------------------------

  void exec(const Stmt& s) {
    if (steps_ >= fuel_) throw FuelOut{};
    ++steps_;
    const std::size_t out_before = out_.size();
    try {
      exec_node(s);
    } catch (...) {
      record(s, out_before);
      throw;
    }
    record(s, out_before);
  }

  bool truthy(const Expr& e) { return eval_int(e) != 0; }

  void exec_node(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, VarDecl>) {
            declare(n.name, eval(*n.init));
          } else if constexpr (std::is_same_v<N, ArrayLiteralDecl>) {
            std::vector<std::int64_t> values;
            values.reserve(n.elements.size());
            for (const auto& e : n.elements) values.push_back(eval_int(*e));
            declare(n.name, Value::array(std::move(values)));
          } else if constexpr (std::is_same_v<N, Assign>) {
            if (n.op == AssignOp::Set) {
              store(*n.target, eval(*n.value));
            } else {
              const std::int64_t cur = eval_int(*n.target);
              const std::int64_t rhs = eval_int(*n.value);
              store(*n.target, Value::integer(n.op == AssignOp::Add ? add(cur, rhs, s.pos)
                                                                    : sub(cur, rhs, s.pos)));
            }
          } else if constexpr (std::is_same_v<N, IncDec>) {
            const std::int64_t cur = eval_int(*n.target);
            store(*n.target, Value::integer(n.increment ? add(cur, 1, s.pos) : sub(cur, 1, s.pos)));
          } else if constexpr (std::is_same_v<N, If>) {
            if (truthy(*n.cond)) {
              ScopeGuard g(*this);
              exec(*n.then_branch);
            } else if (n.else_branch) {
              ScopeGuard g(*this);
              exec(*n.else_branch);
            }
          } else if constexpr (std::is_same_v<N, While>) {
            while (truthy(*n.cond)) {
              ScopeGuard g(*this);
              exec(*n.body);
            }
          } else if constexpr (std::is_same_v<N, For>) {
            ScopeGuard g(*this);
            if (n.init) exec(*n.init);
            while (!n.cond || truthy(*n.cond)) {
              {
                ScopeGuard body(*this);
                exec(*n.body);
              }
              if (n.step) exec(*n.step);
            }
          } else if constexpr (std::is_same_v<N, Print>) {
            out_ += std::to_string(eval_int(*n.value));
            out_ += n.separator;
          } else if constexpr (std::is_same_v<N, Block>) {
            ScopeGuard g(*this);
            for (const auto& st : n.statements) exec(*st);
          }
        },
        s.node);
  }
};

}  // namespace

Effect evaluate(const Program& program, std::uint64_t fuel) {
  Interpreter in(fuel, nullptr);
  return in.run(program);
}

std::vector<Snapshot> trace(const Program& program, std::uint64_t fuel) {
  std::vector<Snapshot> snaps;
  Interpreter in(fuel, &snaps);
  in.run(program);
  return snaps;
}

}  // namespace exr::lang
