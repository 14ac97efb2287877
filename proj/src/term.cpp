#include <algorithm>
#include <charconv>
#include <numeric>

#include "exr/rewrite.hpp"
#include "lexer.hpp"

namespace exr::rw {

// ===========================================================================
// Rational

namespace {

[[noreturn]] void overflow() { throw Error("Overflow", "rational arithmetic overflow"); }

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) overflow();
  return r;
}
std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) overflow();
  return r;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error("DivisionByZero", "rational with zero denominator");
  if (n == INT64_MIN || d == INT64_MIN) overflow();
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  num_ = n / g;
  den_ = d / g;
}

Rational operator+(const Rational& a, const Rational& b) {
  const std::int64_t g = std::gcd(a.den_, b.den_);
  const std::int64_t l = checked_mul(a.den_ / g, b.den_);
  return Rational(checked_add(checked_mul(a.num_, l / a.den_), checked_mul(b.num_, l / b.den_)), l);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  const std::int64_t g1 = std::gcd(a.num_, b.den_);
  const std::int64_t g2 = std::gcd(b.num_, a.den_);
  const std::int64_t n1 = g1 ? a.num_ / g1 : 0, d2 = g1 ? b.den_ / g1 : b.den_;
  const std::int64_t n2 = g2 ? b.num_ / g2 : 0, d1 = g2 ? a.den_ / g2 : a.den_;
  return Rational(checked_mul(n1, n2), checked_mul(d1, d2));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw Error("DivisionByZero", "division by zero");
  return a * Rational(b.den_, b.num_);
}

Rational Rational::operator-() const {
  if (num_ == INT64_MIN) overflow();
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

Rational Rational::pow(std::int64_t e) const {
  if (e < 0) {
    if (num_ == 0) throw Error("DivisionByZero", "zero to a negative power");
    return Rational(1) / pow(-e);
  }
  if (e > 64 && num_ != 0 && num_ != 1 && num_ != -1) overflow();
  Rational r(1);
  for (std::int64_t i = 0; i < e; ++i) r = r * *this;
  return r;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  // Cross-multiplication in 128 bits cannot overflow.
  const __int128 l = static_cast<__int128>(a.num_) * b.den_;
  const __int128 r = static_cast<__int128>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string to_string(const Rational& r) {
  if (r.is_integer()) return std::to_string(r.num());
  return std::to_string(r.num()) + "/" + std::to_string(r.den());
}

// ===========================================================================
// Construction and order

Term cst(Rational v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = v;
  return n;
}

Term sym(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sym;
  n->name = std::move(name);
  return n;
}

Term var(std::string name, bool seq) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->name = std::move(name);
  n->seq = seq;
  return n;
}

Term app(std::string op, std::vector<Term> kids) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::App;
  n->name = std::move(op);
  n->kids = std::move(kids);
  return n;
}

int compare(const Term& a, const Term& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
  switch (a->kind) {
    case Kind::Const: {
      auto c = a->value <=> b->value;
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::Sym:
    case Kind::Var: {
      const int c = a->name.compare(b->name);
      if (c != 0) return c < 0 ? -1 : 1;
      return a->seq == b->seq ? 0 : (a->seq ? 1 : -1);
    }
    case Kind::App: {
      const int c = a->name.compare(b->name);
      if (c != 0) return c < 0 ? -1 : 1;
      const std::size_t n = std::min(a->kids.size(), b->kids.size());
      for (std::size_t i = 0; i < n; ++i)
        if (int k = compare(a->kids[i], b->kids[i])) return k;
      if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

bool contains(const Term& t, const Term& sub) {
  if (equal(t, sub)) return true;
  for (const auto& k : t->kids)
    if (contains(k, sub)) return true;
  return false;
}

bool has_op(const Term& t, std::string_view op) {
  if (t->kind == Kind::App && t->name == op) return true;
  for (const auto& k : t->kids)
    if (has_op(k, op)) return true;
  return false;
}

// ===========================================================================
// Parsing

namespace {

using detail::Token;
using detail::TokenStream;

bool is_upper_ident(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

std::size_t arity(const std::string& op) {
  if (op == "log" || op == "sin" || op == "cos" || op == "neg") return 1;
  if (op == "eq" || op == "d") return 2;
  if (op == "at" || op == "monomial") return 3;
  return 0;
}

class TermParser {
 public:
  TermParser(std::string_view src, TermMode mode, const detail::LineIndex& lines)
      : mode_(mode), ts_(detail::lex(src, options(), lines), lines) {}

  Term parse() {
    auto t = sum();
    if (!ts_.at_end()) ts_.fail({"operator", "end of term"});
    return t;
  }

 private:
  TermMode mode_;
  TokenStream ts_;

  static const detail::LexOptions& options() {
    static const detail::LexOptions o{{"..."}, false, false};
    return o;
  }

  bool vars_allowed() const { return mode_ != TermMode::Ground; }

  Term sum() {
    auto left = product();
    std::vector<Term> kids{left};
    bool any = false;
    for (;;) {
      if (ts_.accept_punct("+")) {
        kids.push_back(product());
      } else if (ts_.accept_punct("-")) {
        kids.push_back(app("neg", {product()}));
      } else {
        break;
      }
      any = true;
    }
    return any ? app("+", std::move(kids)) : left;
  }

  Term product() {
    auto left = unary();
    std::vector<Term> kids{left};
    bool any = false;
    for (;;) {
      if (ts_.accept_punct("*")) {
        kids.push_back(unary());
      } else if (ts_.peek().punct("/") && !is_derivative()) {
        ts_.next();
        kids.push_back(app("^", {unary(), cst(-1)}));
      } else {
        break;
      }
      any = true;
    }
    return any ? app("*", std::move(kids)) : left;
  }

  Term unary() {
    if (ts_.accept_punct("-")) return app("neg", {unary()});
    return power();
  }

  Term power() {
    auto base = primary();
    if (ts_.accept_punct("^")) return app("^", {base, unary()});
    return base;
  }

  bool is_derivative() const {
    return ts_.peek().ident("d") && ts_.peek(1).punct("/") &&
           ts_.peek(2).kind == Token::Ident && ts_.peek(2).text.size() > 1 &&
           ts_.peek(2).text[0] == 'd';
  }

  Term name_term(const Token& tok) {
    if (is_upper_ident(tok.text)) {
      if (!vars_allowed())
        throw ParseError("pattern variable '" + tok.text + "' in a ground term", ts_.pos_of(tok));
      const bool seq = ts_.accept_punct("...");
      return var(tok.text, seq);
    }
    return sym(tok.text);
  }

  Term primary() {
    const Token& t = ts_.peek();
    const SourcePos pos = ts_.here();
    if (t.kind == Token::Int) {
      ts_.next();
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc()) throw ParseError("number out of range", pos);
      // `8x` and `8x^2`: a coefficient glued to a variable.
      if (ts_.peek().kind == Token::Ident && !ts_.peek().space_before &&
          arity(ts_.peek().text) == 0) {
        Term v_term = name_term(ts_.next());
        Term degree = cst(1);
        if (ts_.peek().punct("^") && ts_.peek(1).kind == Token::Int) {
          ts_.next();
          degree = cst(std::stoll(ts_.next().text));
        }
        return app("monomial", {cst(v), v_term, degree});
      }
      return cst(v);
    }
    if (t.punct("$")) {
      if (mode_ != TermMode::Template) throw ParseError("'$' reference outside a rebuild", pos);
      ts_.next();
      const Token& n = ts_.expect_kind(Token::Int, "subtask number");
      if (n.space_before) ts_.fail({"subtask number"});
      return var("$" + n.text);
    }
    if (t.punct("(")) {
      ts_.next();
      auto e = sum();
      ts_.expect_punct(")");
      return e;
    }
    if (is_derivative()) {
      ts_.next();
      ts_.next();
      const Token& dv = ts_.next();
      const std::string vname = dv.text.substr(1);
      Term v;
      if (is_upper_ident(vname)) {
        if (!vars_allowed())
          throw ParseError("pattern variable in a ground term", ts_.pos_of(dv));
        v = var(vname);
      } else {
        v = sym(vname);
      }
      ts_.expect_punct("[");
      auto body = sum();
      ts_.expect_punct("]");
      return app("d", {v, body});
    }
    if (t.kind == Token::Ident) {
      const Token& name = ts_.next();
      if (ts_.peek().punct("(")) {
        const bool fvar = is_upper_ident(name.text);
        if (fvar && !vars_allowed())
          throw ParseError("function variable '" + name.text + "' in a ground term", pos);
        const std::size_t n = fvar ? 1 : arity(name.text);
        if (n == 0 || name.text == "d")
          throw ParseError("unknown function '" + name.text + "'", pos, {}, "UnknownFunction");
        ts_.next();
        std::vector<Term> args;
        args.push_back(sum());
        while (ts_.accept_punct(",")) args.push_back(sum());
        ts_.expect_punct(")");
        if (args.size() != n)
          throw ParseError("'" + name.text + "' takes " + std::to_string(n) + " argument(s)", pos,
                           {}, "ArityMismatch");
        return app(name.text, std::move(args));
      }
      return name_term(name);
    }
    ts_.fail({"term"});
  }
};

}  // namespace

Term parse_term(std::string_view text, TermMode mode, SourcePos base) {
  detail::LineIndex lines(text, base);
  TermParser p(text, mode, lines);
  return p.parse();
}

// ===========================================================================
// Printing

namespace {

// Contexts: 0 top, 1 sum, 2 product, 3 unary operand, 4 power base/exponent.
bool is_plain_monomial(const Term& t) {
  return t->kind == Kind::App && t->name == "monomial" && t->kids[0]->kind == Kind::Const &&
         t->kids[0]->value.is_integer() && t->kids[2]->kind == Kind::Const &&
         t->kids[2]->value.is_integer() && t->kids[1]->kind != Kind::App;
}

void print(std::string& out, const Term& t, int ctx) {
  auto wrap = [&](bool paren, auto&& body) {
    if (paren) out += "(";
    body();
    if (paren) out += ")";
  };
  switch (t->kind) {
    case Kind::Const: {
      const bool simple = t->value.is_integer() && t->value.num() >= 0;
      wrap(!simple && ctx >= 2, [&] { out += to_string(t->value); });
      return;
    }
    case Kind::Sym: out += t->name; return;
    case Kind::Var:
      out += t->name;
      if (t->seq) out += "...";
      return;
    case Kind::App: break;
  }
  const std::string& op = t->name;
  if (op == "+") {
    wrap(ctx >= 2, [&] {
      for (std::size_t i = 0; i < t->kids.size(); ++i) {
        if (i) out += " + ";
        print(out, t->kids[i], 1);
      }
    });
  } else if (op == "*") {
    wrap(ctx >= 3, [&] {
      for (std::size_t i = 0; i < t->kids.size(); ++i) {
        if (i) out += "*";
        print(out, t->kids[i], 2);
      }
    });
  } else if (op == "^") {
    wrap(ctx >= 4, [&] {
      print(out, t->kids[0], 4);
      out += "^";
      print(out, t->kids[1], 4);
    });
  } else if (op == "neg") {
    wrap(ctx >= 4, [&] {
      out += "-";
      print(out, t->kids[0], 3);
    });
  } else if (op == "d") {
    out += "d/d";
    print(out, t->kids[0], 4);
    out += "[";
    print(out, t->kids[1], 0);
    out += "]";
  } else if (is_plain_monomial(t)) {
    const auto c = t->kids[0]->value.num();
    wrap(ctx >= 4 || (c < 0 && ctx >= 2), [&] {
      out += std::to_string(c);
      print(out, t->kids[1], 4);
      if (!(t->kids[2]->value == Rational(1))) {
        out += "^";
        out += to_string(t->kids[2]->value);
      }
    });
  } else {
    out += op + "(";
    for (std::size_t i = 0; i < t->kids.size(); ++i) {
      if (i) out += ", ";
      print(out, t->kids[i], 0);
    }
    out += ")";
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::string out;
  print(out, t, 0);
  return out;
}

// ===========================================================================
// Normalization

namespace {

bool is_const(const Term& t) { return t->kind == Kind::Const; }
bool is_app(const Term& t, std::string_view op) { return t->kind == Kind::App && t->name == op; }
bool is_const_value(const Term& t, const Rational& v) { return is_const(t) && t->value == v; }

Term substitute(const Term& t, const Term& from, const Term& to) {
  if (equal(t, from)) return to;
  if (t->kids.empty()) return t;
  std::vector<Term> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) kids.push_back(substitute(k, from, to));
  return app(t->name, std::move(kids));
}

Term norm_app(const std::string& op, std::vector<Term> kids);
Term norm_product(std::vector<Term> kids);

Term norm_power(const Term& base, const Term& exp) {
  if (is_const_value(exp, 0)) return cst(1);
  if (is_const_value(exp, 1)) return base;
  if (is_const_value(base, 1)) return cst(1);
  if (is_const(base) && is_const(exp) && exp->value.is_integer() &&
      !(base->value == Rational(0) && exp->value.num() < 0))
    return cst(base->value.pow(exp->value.num()));
  return app("^", {base, exp});
}

Term norm_monomial(const Term& c, const Term& v, const Term& n) {
  if (is_const(c) && c->value == Rational(0)) return cst(0);
  if (is_const_value(n, 0)) return c;
  if (is_const_value(c, 1)) return norm_power(v, n);
  if (v->kind == Kind::Const || v->kind == Kind::App) return norm_product({c, norm_power(v, n)});
  return app("monomial", {c, v, n});
}

Term norm_sum(std::vector<Term> kids) {
  std::vector<Term> flat;
  Rational total(0);
  bool has_const = false;
  for (auto& k : kids) {
    if (is_app(k, "+")) {
      for (const auto& g : k->kids) {
        if (is_const(g)) {
          total = total + g->value;
          has_const = true;
        } else {
          flat.push_back(g);
        }
      }
    } else if (is_const(k)) {
      total = total + k->value;
      has_const = true;
    } else {
      flat.push_back(k);
    }
  }
  if (has_const && (total != Rational(0) || flat.empty())) flat.push_back(cst(total));
  if (flat.empty()) return cst(0);
  if (flat.size() == 1) return flat.front();
  std::stable_sort(flat.begin(), flat.end(), TermLess{});
  return app("+", std::move(flat));
}

Term norm_product(std::vector<Term> kids) {
  std::vector<Term> flat;
  Rational coeff(1);
  auto add_factor = [&](const Term& g, auto&& self) -> void {
    if (is_app(g, "*")) {
      for (const auto& h : g->kids) self(h, self);
    } else if (is_const(g)) {
      coeff = coeff * g->value;
    } else if (is_app(g, "monomial") && is_const(g->kids[0])) {
      coeff = coeff * g->kids[0]->value;
      self(norm_power(g->kids[1], g->kids[2]), self);
    } else {
      flat.push_back(g);
    }
  };
  for (const auto& k : kids) add_factor(k, add_factor);
  if (coeff == Rational(0)) return cst(0);
  if (flat.empty()) return cst(coeff);
  std::stable_sort(flat.begin(), flat.end(), TermLess{});
  if (flat.size() == 1) {
    if (coeff == Rational(1)) return flat.front();
    const Term& f = flat.front();
    if (f->kind == Kind::Sym) return app("monomial", {cst(coeff), f, cst(1)});
    if (is_app(f, "^") && f->kids[0]->kind == Kind::Sym && is_const(f->kids[1]) &&
        f->kids[1]->value.is_integer())
      return app("monomial", {cst(coeff), f->kids[0], f->kids[1]});
  }
  if (coeff != Rational(1)) flat.insert(flat.begin(), cst(coeff));
  return app("*", std::move(flat));
}

Term norm_app(const std::string& op, std::vector<Term> kids) {
  if (op == "+") return norm_sum(std::move(kids));
  if (op == "*") return norm_product(std::move(kids));
  if (op == "^" && kids.size() == 2) return norm_power(kids[0], kids[1]);
  if (op == "monomial" && kids.size() == 3) return norm_monomial(kids[0], kids[1], kids[2]);
  if (op == "neg" && kids.size() == 1) {
    const Term& k = kids[0];
    if (is_const(k)) return cst(-k->value);
    if (is_app(k, "monomial") && is_const(k->kids[0]))
      return norm_monomial(cst(-k->kids[0]->value), k->kids[1], k->kids[2]);
    return norm_product({cst(-1), k});
  }
  if (kids.size() == 1 && is_const(kids[0])) {
    if (op == "log" && kids[0]->value == Rational(1)) return cst(0);
    if (op == "sin" && kids[0]->value == Rational(0)) return cst(0);
    if (op == "cos" && kids[0]->value == Rational(0)) return cst(1);
  }
  if (op == "at" && kids.size() == 3 && !has_op(kids[0], "d"))
    return normalize(substitute(kids[0], kids[1], kids[2]));
  return app(op, std::move(kids));
}

}  // namespace

Term normalize(const Term& t) {
  if (t->kind != Kind::App) return t;
  std::vector<Term> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) kids.push_back(normalize(k));
  return norm_app(t->name, std::move(kids));
}

}  // namespace exr::rw
