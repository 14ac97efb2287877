#include "exr/templates.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <random>
#include <regex>
#include <set>

#include "exr/minilang.hpp"

namespace exr::tpl {

std::string_view to_string(Produces p) {
  switch (p) {
    case Produces::Code: return "code";
    case Produces::Option: return "option";
    case Produces::Spec: return "spec";
  }
  return "?";
}

const TemplateRule* TemplatePack::find(std::string_view name) const {
  for (const auto& r : rules)
    if (r.name == name) return &r;
  return nullptr;
}

const TemplateRule& TemplatePack::at(std::string_view name) const {
  if (const auto* r = find(name)) return *r;
  throw Error("UnknownRule", "no template rule named '" + std::string(name) + "'");
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string dedent_block(const std::vector<std::string_view>& lines) {
  std::size_t first = 0, last = lines.size();
  while (first < last && trim(lines[first]).empty()) ++first;
  while (last > first && trim(lines[last - 1]).empty()) --last;
  std::size_t indent = std::string::npos;
  for (std::size_t i = first; i < last; ++i) {
    if (trim(lines[i]).empty()) continue;
    std::size_t k = 0;
    while (k < lines[i].size() && (lines[i][k] == ' ' || lines[i][k] == '\t')) ++k;
    indent = std::min(indent, k);
  }
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i > first) out += '\n';
    std::string_view l = lines[i];
    l = l.size() >= indent ? l.substr(indent) : std::string_view();
    while (!l.empty() && std::isspace(static_cast<unsigned char>(l.back()))) l.remove_suffix(1);
    out += l;
  }
  return out;
}

// Rule names referenced from `body` as `name(`.
std::set<std::string> referenced(const std::string& body, const TemplatePack& pack) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (!ident_start(body[i]) || (i > 0 && ident_char(body[i - 1]))) continue;
    std::size_t j = i;
    while (j < body.size() && ident_char(body[j])) ++j;
    if (j < body.size() && body[j] == '(') {
      std::string name = body.substr(i, j - i);
      if (pack.find(name)) out.insert(std::move(name));
    }
    i = j - 1;
  }
  return out;
}

void check_acyclic(const TemplatePack& pack) {
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& r : pack.rules) edges[r.name] = referenced(r.body, pack);
  std::map<std::string, int> state;  // 1 visiting, 2 done
  std::vector<std::string> path;
  auto visit = [&](auto&& self, const std::string& n) -> void {
    state[n] = 1;
    path.push_back(n);
    for (const auto& m : edges[n]) {
      if (state[m] == 1) {
        std::string cycle;
        auto it = std::find(path.begin(), path.end(), m);
        for (; it != path.end(); ++it) cycle += *it + " -> ";
        throw Error("CycleDetected", "template call cycle: " + cycle + m, pack.at(m).pos);
      }
      if (state[m] == 0) self(self, m);
    }
    path.pop_back();
    state[n] = 2;
  };
  for (const auto& r : pack.rules)
    if (state[r.name] == 0) visit(visit, r.name);
}

}  // namespace

TemplatePack TemplatePack::parse(std::string_view text) {
  static const std::regex header(
      R"(^#([A-Za-z_]\w*)\s*\(([^)]*)\)\s*(?::\s*([A-Za-z]+)\s*)?=>(.*)$)");
  TemplatePack pack;
  const auto lines = split(text, '\n');
  std::optional<TemplateRule> cur;
  std::vector<std::string_view> body;
  std::size_t offset = 0;
  for (const auto line : lines) {
    const SourcePos pos = position_at(text, offset);
    offset += line.size() + 1;
    const auto t = trim(line);
    if (cur) {
      if (t == "#end") {
        cur->body = dedent_block(body);
        pack.rules.push_back(std::move(*cur));
        cur.reset();
        body.clear();
      } else if (line.substr(0, 1) == "#" && std::regex_match(std::string(line), header)) {
        throw ParseError("rule '" + cur->name + "' is missing '#end'", pos, {"#end"});
      } else {
        body.push_back(line);
      }
      continue;
    }
    if (t.empty() || t.substr(0, 2) == "//") continue;
    std::cmatch m;
    if (!std::regex_match(t.data(), t.data() + t.size(), m, header))
      throw ParseError("expected a rule header '#name(params) =>'", pos, {"#name(params) =>"});
    TemplateRule r;
    r.name = m[1].str();
    r.pos = pos;
    const std::string params = m[2].str();
    for (auto p : split(params, ',')) {
      const auto name = trim(p);
      if (name.empty()) {
        if (trim(params).empty()) break;
        throw ParseError("empty parameter name", pos, {"identifier"});
      }
      if (!ident_start(name[0]) ||
          !std::all_of(name.begin(), name.end(), [](char c) { return ident_char(c); }))
        throw ParseError("bad parameter name '" + std::string(name) + "'", pos, {"identifier"});
      if (std::find(r.params.begin(), r.params.end(), name) != r.params.end())
        throw ParseError("duplicate parameter '" + std::string(name) + "'", pos);
      r.params.emplace_back(name);
    }
    if (m[3].matched) {
      const auto kind = m[3].str();
      if (kind == "code") r.produces = Produces::Code;
      else if (kind == "option") r.produces = Produces::Option;
      else if (kind == "spec") r.produces = Produces::Spec;
      else throw ParseError("unknown rule kind '" + kind + "'", pos, {"code", "option", "spec"});
    }
    if (pack.find(r.name))
      throw Error("DuplicateRule", "template rule '" + r.name + "' defined twice", pos);
    cur = std::move(r);
    // Text after `=>` on the header line starts the body.
    const auto rest = m[4].str();
    if (!trim(rest).empty()) {
      const auto at = line.find("=>");
      body.push_back(line.substr(at + 2));
    }
  }
  if (cur) throw ParseError("rule '" + cur->name + "' is missing '#end'", cur->pos, {"#end"});
  check_acyclic(pack);
  return pack;
}

// ---------------------------------------------------------------------------
// Distractor transforms

const std::vector<DistractorTransform>& transforms() {
  static const std::vector<DistractorTransform> all = {
      {"buggy_limit", Role::Limit},
      {"buggy_operator", Role::Operator},
      {"buggy_init", Role::Init},
      {"buggy_step", Role::Step},
  };
  return all;
}

bool is_transform(std::string_view name) {
  return std::any_of(transforms().begin(), transforms().end(),
                     [&](const DistractorTransform& t) { return t.name == name; });
}

namespace {

std::int64_t as_int(std::string_view transform, std::string_view v) {
  v = trim(v);
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("BadTransformInput",
                std::string(transform) + " needs an integer, got '" + std::string(v) + "'");
  return out;
}

std::vector<std::string> shifted(std::int64_t v, std::initializer_list<std::int64_t> deltas,
                                 bool allow_zero) {
  std::vector<std::string> out;
  for (auto d : deltas) {
    const auto c = v + d;
    if (d == 0 || (!allow_zero && c == 0)) continue;
    auto s = std::to_string(c);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<std::string> candidates(std::string_view transform, std::string_view value,
                                    const Bindings& env) {
  if (transform == "buggy_limit") {
    const auto v = as_int(transform, value);
    std::int64_t s = 1;
    if (auto it = env.find("step"); it != env.end()) s = std::abs(as_int("step", it->second));
    if (s == 0) s = 1;
    return shifted(v, {-s, s, -2 * s, 2 * s, -1, 1, -2, 2}, true);
  }
  if (transform == "buggy_init")
    return shifted(as_int(transform, value), {1, -1, 2, -2, 3, -3, 4, -4}, true);
  if (transform == "buggy_step")
    return shifted(as_int(transform, value), {1, -1, 2, -2, 3, -3, 4, -4}, false);
  if (transform == "buggy_operator") {
    static const std::map<std::string, std::vector<std::string>, std::less<>> table = {
        {"<", {"<=", ">", "!="}},   {"<=", {"<", ">=", "=="}}, {">", {">=", "<", "!="}},
        {">=", {">", "<=", "=="}},  {"==", {"!=", "<="}},       {"!=", {"==", "<"}},
        {"+=", {"-=", "*=", "="}},  {"-=", {"+=", "="}},        {"*=", {"+=", "="}},
        {"+", {"-", "*"}},          {"-", {"+"}},               {"*", {"+"}},
    };
    auto it = table.find(trim(value));
    if (it == table.end())
      throw Error("BadTransformInput", "buggy_operator has no mutation for '" +
                                           std::string(value) + "'");
    return it->second;
  }
  throw Error("UnknownTransform", "unknown distractor transform '" + std::string(transform) + "'");
}

// ---------------------------------------------------------------------------
// Expansion

namespace {

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool is_splice_fn(std::string_view n) { return n == "capitalize" || n == "upper" || n == "lower"; }

std::string apply_splice_fn(std::string_view fn, std::string v) {
  if (fn == "capitalize") return capitalize(std::move(v));
  if (fn == "upper") {
    for (auto& c : v) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return v;
  }
  return to_lower(v);
}

struct Arg {
  enum class Kind { Param, Literal, Apply } kind = Kind::Param;
  std::string text;  // param name, literal value or function name
  std::vector<Arg> inner;
};

struct Call {
  std::string name;
  std::vector<Arg> args;
};

class ArgParser {
 public:
  explicit ArgParser(std::string_view s) : s_(s) {}

  std::vector<Arg> list() {
    std::vector<Arg> out;
    ws();
    if (i_ >= s_.size()) return out;
    for (;;) {
      out.push_back(arg());
      ws();
      if (i_ < s_.size() && s_[i_] == ',') {
        ++i_;
        continue;
      }
      break;
    }
    ws();
    if (i_ != s_.size()) bad("',' or ')'");
    return out;
  }

  Call call() {
    ws();
    Call c;
    c.name = ident();
    ws();
    if (i_ >= s_.size() || s_[i_] != '(') bad("'('");
    const std::size_t close = matching(i_);
    c.args = ArgParser(s_.substr(i_ + 1, close - i_ - 1)).list();
    i_ = close + 1;
    return c;
  }

  std::size_t pos() const { return i_; }
  std::string_view rest() const { return s_.substr(i_); }

 private:
  Arg arg() {
    ws();
    Arg a;
    if (i_ < s_.size() && s_[i_] == '"') {
      a.kind = Arg::Kind::Literal;
      ++i_;
      while (i_ < s_.size() && s_[i_] != '"') {
        if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
        a.text += s_[i_++];
      }
      if (i_ >= s_.size()) bad("'\"'");
      ++i_;
      return a;
    }
    if (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-')) {
      a.kind = Arg::Kind::Literal;
      const std::size_t start = i_++;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      a.text = std::string(s_.substr(start, i_ - start));
      return a;
    }
    a.text = ident();
    ws();
    if (i_ < s_.size() && s_[i_] == '(') {
      a.kind = Arg::Kind::Apply;
      const std::size_t close = matching(i_);
      a.inner = ArgParser(s_.substr(i_ + 1, close - i_ - 1)).list();
      i_ = close + 1;
    }
    return a;
  }

  std::string ident() {
    ws();
    const std::size_t start = i_;
    if (i_ < s_.size() && ident_start(s_[i_]))
      while (i_ < s_.size() && ident_char(s_[i_])) ++i_;
    if (start == i_) bad("identifier");
    return std::string(s_.substr(start, i_ - start));
  }

  std::size_t matching(std::size_t open) const {
    int depth = 0;
    bool str = false;
    for (std::size_t k = open; k < s_.size(); ++k) {
      const char c = s_[k];
      if (str) {
        if (c == '\\') ++k;
        else if (c == '"') str = false;
      } else if (c == '"') {
        str = true;
      } else if (c == '(') {
        ++depth;
      } else if (c == ')' && --depth == 0) {
        return k;
      }
    }
    bad("')'");
  }

  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  [[noreturn]] void bad(const std::string& what) const {
    throw ParseError("bad template call '" + std::string(s_) + "': expected " + what, {}, {what});
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

class Expander {
 public:
  explicit Expander(const TemplatePack& pack) : pack_(pack) {}

  std::map<std::string, int> choice;  // candidate index per transform

  std::string value(const Arg& a, const Bindings& env) {
    switch (a.kind) {
      case Arg::Kind::Literal: return a.text;
      case Arg::Kind::Param: return lookup(a.text, env);
      case Arg::Kind::Apply: {
        if (a.inner.size() != 1)
          throw Error("ArityMismatch", a.text + " takes exactly one argument");
        const auto v = value(a.inner[0], env);
        if (is_splice_fn(a.text)) return apply_splice_fn(a.text, v);
        const auto cands = candidates(a.text, v, env);
        const auto k = static_cast<std::size_t>(choice[a.text]);
        if (k >= cands.size())
          throw Error("NoCandidate", a.text + " has no candidate #" + std::to_string(k + 1));
        return cands[k];
      }
    }
    return {};
  }

  std::string call(const Call& c, const Bindings& env) {
    const auto& rule = pack_.at(c.name);
    if (rule.params.size() != c.args.size())
      throw Error("ArityMismatch", "template '" + rule.name + "' takes " +
                                       std::to_string(rule.params.size()) + " arguments, got " +
                                       std::to_string(c.args.size()),
                  rule.pos);
    Bindings inner = env;
    for (std::size_t i = 0; i < c.args.size(); ++i) inner[rule.params[i]] = value(c.args[i], env);
    return run(rule, inner);
  }

  std::string run(const TemplateRule& rule, const Bindings& env) {
    if (std::find(stack_.begin(), stack_.end(), rule.name) != stack_.end())
      throw Error("CycleDetected", "template '" + rule.name + "' calls itself", rule.pos);
    stack_.push_back(rule.name);
    auto out = text(rule.body, env);
    stack_.pop_back();
    return out;
  }

  std::string text(std::string_view body, const Bindings& env) {
    std::string out;
    std::size_t i = 0;
    while (i < body.size()) {
      const char c = body[i];
      if (c == '$') {
        if (i + 1 < body.size() && body[i + 1] == '$') {
          out += '$';
          i += 2;
          continue;
        }
        std::size_t j = i + 1;
        while (j < body.size() && ident_char(body[j])) ++j;
        if (j == i + 1) {
          out += c;
          ++i;
          continue;
        }
        const std::string name(body.substr(i + 1, j - i - 1));
        if (is_splice_fn(name) && j < body.size() && body[j] == '(') {
          const auto close = body.find(')', j);
          if (close == std::string_view::npos)
            throw ParseError("unterminated $" + name + "(", {}, {"')'"});
          const auto arg = std::string(trim(body.substr(j + 1, close - j - 1)));
          out += apply_splice_fn(name, lookup(arg, env));
          i = close + 1;
          continue;
        }
        out += lookup(name, env);
        i = j;
        continue;
      }
      if (c == '{') {
        if (auto done = try_call(body, i, env)) {
          out += done->first;
          i = done->second;
          continue;
        }
      }
      out += c;
      ++i;
    }
    return out;
  }

 private:
  // `{name(args)}` at `at`; returns expansion and the index past '}'.
  std::optional<std::pair<std::string, std::size_t>> try_call(std::string_view body,
                                                              std::size_t at,
                                                              const Bindings& env) {
    std::size_t j = at + 1;
    if (j >= body.size() || !ident_start(body[j])) return std::nullopt;
    while (j < body.size() && ident_char(body[j])) ++j;
    if (j >= body.size() || body[j] != '(') return std::nullopt;
    int depth = 0;
    bool str = false;
    std::size_t close = std::string_view::npos;
    for (std::size_t k = j; k < body.size(); ++k) {
      const char ch = body[k];
      if (str) {
        if (ch == '\\') ++k;
        else if (ch == '"') str = false;
      } else if (ch == '"') {
        str = true;
      } else if (ch == '\n') {
        break;
      } else if (ch == '(') {
        ++depth;
      } else if (ch == ')' && --depth == 0) {
        close = k;
        break;
      }
    }
    if (close == std::string_view::npos || close + 1 >= body.size() || body[close + 1] != '}')
      return std::nullopt;
    const std::string name(body.substr(at + 1, j - at - 1));
    const auto inner = body.substr(at + 1, close - at);
    if (is_transform(name) || is_splice_fn(name)) {
      Arg a;
      a.kind = Arg::Kind::Apply;
      a.text = name;
      a.inner = ArgParser(body.substr(j + 1, close - j - 1)).list();
      return std::make_pair(value(a, env), close + 2);
    }
    if (!pack_.find(name))
      throw Error("UnknownRule", "call to unknown template rule '" + name + "'");
    return std::make_pair(call(ArgParser(inner).call(), env), close + 2);
  }

  std::string lookup(const std::string& name, const Bindings& env) const {
    auto it = env.find(name);
    if (it == env.end())
      throw Error("UnboundParam", "parameter '" + name + "' is not bound");
    return it->second;
  }

  const TemplatePack& pack_;
  std::vector<std::string> stack_;
};

void require_bound(const TemplateRule& rule, const Bindings& b) {
  for (const auto& p : rule.params)
    if (!b.count(p))
      throw Error("UnboundParam", "parameter '" + p + "' of '" + rule.name + "' is not bound",
                  rule.pos);
}

}  // namespace

std::string expand(const TemplateRule& rule, const Bindings& bindings, const TemplatePack& pack) {
  require_bound(rule, bindings);
  Expander ex(pack);
  return ex.run(rule, bindings);
}

// ---------------------------------------------------------------------------
// Exercise generation

namespace {

constexpr int kAttempts = 8;

struct Outcome {
  std::string label;
  spec::Facet facet;
};

enum class FacetKind { Stdout, Binding };

// Evaluates generated code; nullopt when it does not parse or complete.
std::optional<Outcome> observe(const std::string& code, FacetKind kind, const std::string& name,
                               std::uint64_t fuel) {
  lang::Effect eff;
  try {
    eff = lang::evaluate(lang::parse_program(code), fuel);
  } catch (const ParseError&) {
    return std::nullopt;
  }
  if (eff.status != lang::Status::Completed) return std::nullopt;
  Outcome o;
  if (kind == FacetKind::Stdout) {
    o.facet.kind = spec::Facet::Kind::Stdout;
    o.facet.text = eff.stdout_text;
    std::string_view l = eff.stdout_text;
    while (!l.empty() && std::isspace(static_cast<unsigned char>(l.back()))) l.remove_suffix(1);
    o.label = l.empty() ? "(no output)" : std::string(l);
  } else {
    const auto* v = lang::find_binding(eff.bindings, name);
    if (!v) return std::nullopt;
    o.facet.kind = spec::Facet::Kind::Binding;
    o.facet.name = name;
    o.facet.value = *v;
    o.label = lang::to_string(*v);
  }
  return o;
}

Arg with_transform(const Arg& a, const std::string& fn, const std::string& param) {
  if (a.kind == Arg::Kind::Param && a.text == param) {
    Arg w;
    w.kind = Arg::Kind::Apply;
    w.text = fn;
    w.inner = {a};
    return w;
  }
  Arg out = a;
  for (auto& in : out.inner) in = with_transform(in, fn, param);
  return out;
}

[[noreturn]] void generation_failed(const std::string& why) {
  throw Error("GenerationFailed", why);
}

std::string mcq_directive(std::string_view line, std::string_view indent, Expander& ex,
                          const Bindings& env, std::uint64_t seed, std::uint64_t fuel) {
  ArgParser p(line);
  const Call call = p.call();
  auto rest = trim(p.rest());
  FacetKind kind;
  std::string name;
  if (rest.substr(0, 6) == "stdout") {
    kind = FacetKind::Stdout;
    rest = trim(rest.substr(6));
  } else if (rest.substr(0, 7) == "binding") {
    kind = FacetKind::Binding;
    rest = trim(rest.substr(7));
    std::size_t k = 0;
    while (k < rest.size() && ident_char(rest[k])) ++k;
    name = std::string(rest.substr(0, k));
    if (name.empty()) throw ParseError("@mcq binding needs a name", {}, {"identifier"});
    rest = trim(rest.substr(k));
  } else {
    throw ParseError("@mcq expects 'stdout' or 'binding NAME'", {}, {"stdout", "binding"});
  }
  if (rest.empty() || rest[0] != ':') throw ParseError("@mcq expects ':' before transforms", {}, {"':'"});
  rest = trim(rest.substr(1));

  std::vector<std::pair<std::string, std::string>> wanted;  // transform, param
  {
    std::string buf(rest);
    std::size_t i = 0;
    while (i < buf.size()) {
      while (i < buf.size() && (std::isspace(static_cast<unsigned char>(buf[i])) || buf[i] == ',')) ++i;
      if (i >= buf.size()) break;
      const auto open = buf.find('(', i);
      const auto close = buf.find(')', i);
      if (open == std::string::npos || close == std::string::npos || close < open)
        throw ParseError("bad distractor list '" + buf + "'", {}, {"transform(param)"});
      const auto fn = std::string(trim(std::string_view(buf).substr(i, open - i)));
      const auto param = std::string(trim(std::string_view(buf).substr(open + 1, close - open - 1)));
      if (!is_transform(fn))
        throw Error("UnknownTransform", "unknown distractor transform '" + fn + "'");
      wanted.emplace_back(fn, param);
      i = close + 1;
    }
  }

  ex.choice.clear();
  const auto truth = observe(ex.call(call, env), kind, name, fuel);
  if (!truth) generation_failed("the correct code does not evaluate to completion");

  struct Opt {
    Outcome out;
    bool correct;
    std::string tag;
  };
  std::vector<Opt> opts{{*truth, true, ""}};
  std::set<std::string> labels{truth->label};
  std::vector<std::string> failures;
  for (const auto& [fn, param] : wanted) {
    Call c = call;
    bool touched = false;
    for (auto& a : c.args) {
      Arg w = with_transform(a, fn, param);
      touched |= w.kind != a.kind || w.inner.size() != a.inner.size();
      a = std::move(w);
    }
    if (!touched) throw Error("UnboundParam", fn + "(" + param + ") matches no argument of the call");
    bool found = false;
    for (int k = 0; k < kAttempts && !found; ++k) {
      ex.choice.clear();
      ex.choice[fn] = k;
      std::string code;
      try {
        code = ex.call(c, env);
      } catch (const Error& e) {
        if (e.code() == "NoCandidate") break;
        throw;
      }
      auto got = observe(code, kind, name, fuel);
      if (!got || labels.count(got->label)) continue;
      labels.insert(got->label);
      opts.push_back({*got, false, fn});
      found = true;
    }
    if (!found) failures.push_back(fn + "(" + param + ")");  // dropped
  }
  ex.choice.clear();
  if (opts.size() < 2)
    generation_failed("no distinct distractor from " + failures.front() + " within " +
                      std::to_string(kAttempts) + " attempts");

  // Seeded Fisher-Yates so the correct key varies with the seed.
  std::mt19937_64 rng(seed);
  for (std::size_t i = opts.size(); i > 1; --i) std::swap(opts[i - 1], opts[rng() % i]);

  std::string out = std::string(indent) + "mcq {\n";
  char key = 'a';
  for (const auto& o : opts) {
    out += std::string(indent) + "  " + key++ + ": " + quote(o.out.label);
    if (o.correct) out += " *";
    out += " expect " + spec::render(o.out.facet);
    if (!o.tag.empty()) out += " tag " + o.tag;
    out += "\n";
  }
  out += std::string(indent) + "}";
  return out;
}

std::string answer_directive(std::string_view line, std::string_view indent, Expander& ex,
                             const Bindings& env, std::uint64_t fuel) {
  line = trim(line);
  std::string kind;
  std::size_t k = 0;
  while (k < line.size() && ident_char(line[k])) ++k;
  kind = std::string(line.substr(0, k));
  line = trim(line.substr(k));
  std::string name;
  if (kind == "binding") {
    k = 0;
    while (k < line.size() && ident_char(line[k])) ++k;
    name = std::string(line.substr(0, k));
    line = trim(line.substr(k));
  } else if (kind != "text" && kind != "stdout") {
    throw ParseError("@answer expects text, stdout or binding", {}, {"text", "stdout", "binding"});
  }
  ArgParser p(line);
  const Call call = p.call();
  const auto code = ex.call(call, env);
  spec::Facet f;
  if (kind == "text") {
    f.kind = spec::Facet::Kind::Text;
    f.text = code;
  } else {
    auto got = observe(code, kind == "stdout" ? FacetKind::Stdout : FacetKind::Binding, name, fuel);
    if (!got) generation_failed("answer code does not evaluate to completion");
    f = got->facet;
  }
  return std::string(indent) + "answer: " + spec::render(f) + ";";
}

}  // namespace

spec::ExerciseSpec instantiate_exercise(const TemplateRule& metaplan, const Bindings& bindings,
                                        std::uint64_t seed, std::uint64_t fuel,
                                        const TemplatePack& pack) {
  if (metaplan.produces != Produces::Spec)
    generation_failed("template '" + metaplan.name + "' does not produce a spec");
  require_bound(metaplan, bindings);
  Expander ex(pack);
  std::string source;
  for (const auto line : split(metaplan.body, '\n')) {
    const auto t = trim(line);
    if (t.substr(0, 4) == "@mcq") {
      source += mcq_directive(t.substr(4), line.substr(0, line.find('@')), ex, bindings, seed, fuel);
    } else if (t.substr(0, 7) == "@answer") {
      source += answer_directive(t.substr(7), line.substr(0, line.find('@')), ex, bindings, fuel);
    } else {
      source += ex.text(line, bindings);
    }
    source += '\n';
  }
  spec::ExerciseSpec s = spec::parse_spec(source);
  spec::Provenance prov;
  prov.rule = metaplan.name;
  for (const auto& p : metaplan.params) prov.bindings.emplace_back(p, bindings.at(p));
  prov.seed = seed;
  s.provenance = std::move(prov);
  const auto report = spec::validate_spec(s, fuel);
  for (const auto& f : report.findings)
    if (f.severity == Severity::Error)
      generation_failed("generated spec does not validate: " + f.code + ": " + f.message);
  return s;
}

}  // namespace exr::tpl
