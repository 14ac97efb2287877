#include "exr/spec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace exr::spec {

using lang::Value;

bloom::Cell ExerciseSpec::target() const {
  return declared_target.value_or(
      bloom::Cell{bloom::Process::Understand, bloom::Knowledge::Conceptual});
}

const McqOption* ExerciseSpec::correct_option() const {
  for (const auto& o : options)
    if (o.correct) return &o;
  return nullptr;
}

// ===========================================================================
// Parsing

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  std::size_t offset() const { return i_; }
  void seek(std::size_t i) { i_ = i; }
  SourcePos pos() const { return position_at(text_, i_); }
  SourcePos pos(std::size_t at) const { return position_at(text_, at); }
  bool at_end() { return skip(), i_ >= text_.size(); }
  std::string_view text() const { return text_; }

  // Whitespace and `//` comments.
  void skip() {
    for (;;) {
      while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
      if (text_.substr(i_, 2) == "//") {
        while (i_ < text_.size() && text_[i_] != '\n') ++i_;
        continue;
      }
      return;
    }
  }

  char peek() {
    skip();
    return i_ < text_.size() ? text_[i_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++i_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("'") + c + "'");
  }

  bool accept_word(std::string_view w) {
    skip();
    const std::size_t save = i_;
    if (word() == w) return true;
    i_ = save;
    return false;
  }

  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail("'" + std::string(w) + "'");
  }

  // Identifier-like word: letters, digits, '_' and '-'.
  std::string word() {
    skip();
    const std::size_t start = i_;
    while (i_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i_])) ||
                                 text_[i_] == '_' || text_[i_] == '-'))
      ++i_;
    return std::string(text_.substr(start, i_ - start));
  }

  std::string expect_word_any(const std::string& what) {
    auto w = word();
    if (w.empty()) fail(what);
    return w;
  }

  std::string string_lit() {
    if (peek() != '"') fail("string");
    const SourcePos start = pos();
    ++i_;
    std::string out;
    while (i_ < text_.size() && text_[i_] != '"') {
      char c = text_[i_++];
      if (c == '\n') throw ParseError("unterminated string", start, {"'\"'"});
      if (c == '\\' && i_ < text_.size()) {
        const char e = text_[i_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: out += '\\'; out += e;
        }
        continue;
      }
      out += c;
    }
    if (i_ >= text_.size()) throw ParseError("unterminated string", start, {"'\"'"});
    ++i_;
    return out;
  }

  std::int64_t integer() {
    skip();
    const std::size_t start = i_;
    if (i_ < text_.size() && text_[i_] == '-') ++i_;
    while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + i_, v);
    if (ec != std::errc() || p != text_.data() + i_) {
      i_ = start;
      fail("integer");
    }
    return v;
  }

  std::uint64_t unsigned_integer() {
    skip();
    const std::size_t start = i_;
    while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text_.data() + start, text_.data() + i_, v);
    if (ec != std::errc() || p != text_.data() + i_) {
      i_ = start;
      fail("non-negative integer");
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& expected) {
    skip();
    std::string found = i_ >= text_.size() ? "end of input"
                                           : "'" + std::string(1, text_[i_]) + "'";
    throw ParseError("unexpected " + found + ", expected " + expected, pos(), {expected});
  }

 private:
  std::string_view text_;
  std::size_t i_ = 0;
};

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

// Raw block body up to the matching '}', skipping fenced regions.
std::string_view raw_block(Cursor& c, const SourcePos& open_pos) {
  const std::string_view text = c.text();
  std::size_t i = c.offset();
  int depth = 1;
  bool fenced = false;
  bool line_start = false;
  std::size_t line_begin = i;
  const std::size_t start = i;
  while (i < text.size()) {
    if (line_start || i == line_begin) {
      const std::size_t eol = text.find('\n', i);
      const auto line = text.substr(i, eol == std::string_view::npos ? text.size() - i : eol - i);
      if (is_fence(line)) {
        fenced = !fenced;
        i = eol == std::string_view::npos ? text.size() : eol;
        line_start = false;
        continue;
      }
      line_start = false;
    }
    const char ch = text[i];
    if (ch == '\n') {
      line_start = true;
      line_begin = i + 1;
    } else if (!fenced && ch == '{') {
      ++depth;
    } else if (!fenced && ch == '}') {
      if (--depth == 0) {
        c.seek(i + 1);
        return text.substr(start, i - start);
      }
    }
    ++i;
  }
  throw ParseError(fenced ? "unterminated code fence" : "unterminated block", open_pos, {"'}'"});
}

std::string clean_question(std::string_view body) {
  // Drop leading blank lines and trailing whitespace.
  std::size_t start = 0;
  for (;;) {
    const std::size_t eol = body.find('\n', start);
    if (eol == std::string_view::npos) break;
    if (!trim(body.substr(start, eol - start)).empty()) break;
    start = eol + 1;
  }
  std::string_view s = body.substr(start);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<CodeBlock> extract_code(std::string_view text, std::size_t body_offset) {
  std::vector<CodeBlock> blocks;
  std::size_t i = 0;
  bool inside = false;
  std::vector<std::pair<std::size_t, std::string_view>> lines;  // offset, line
  std::size_t open_off = 0;
  auto finish = [&] {
    std::size_t indent = std::string_view::npos;
    for (const auto& [off, l] : lines) {
      if (trim(l).empty()) continue;
      std::size_t k = 0;
      while (k < l.size() && (l[k] == ' ' || l[k] == '\t')) ++k;
      indent = std::min(indent, k);
    }
    if (indent == std::string_view::npos) indent = 0;
    CodeBlock b;
    for (const auto& [off, l] : lines) {
      b.source += l.size() >= indent ? std::string(l.substr(indent)) : std::string();
      b.source += '\n';
    }
    // Only the offset is meaningful here; the caller resolves line/column.
    b.pos.offset = body_offset + (lines.empty() ? open_off : lines.front().first + indent);
    blocks.push_back(std::move(b));
    lines.clear();
  };
  while (i <= text.size()) {
    std::size_t eol = text.find('\n', i);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(i, eol - i);
    if (is_fence(line)) {
      if (inside) finish();
      else open_off = i;
      inside = !inside;
    } else if (inside) {
      lines.emplace_back(i, line);
    }
    if (eol == text.size()) break;
    i = eol + 1;
  }
  return blocks;
}

Value parse_value(Cursor& c) {
  if (c.accept('{')) {
    std::vector<std::int64_t> items;
    if (!c.accept('}')) {
      do items.push_back(c.integer());
      while (c.accept(','));
      c.expect('}');
    }
    return Value::array(std::move(items));
  }
  return Value::integer(c.integer());
}

Facet parse_facet(Cursor& c) {
  Facet f;
  f.pos = c.pos();
  const std::size_t save = c.offset();
  const std::string w = c.expect_word_any("facet");
  if ((w == "stdout" || w == "text") && c.peek() == '"') {
    f.kind = w == "stdout" ? Facet::Kind::Stdout : Facet::Kind::Text;
    f.text = c.string_lit();
    return f;
  }
  if (!c.accept('=')) {
    c.seek(save);
    c.word();
    c.fail("'=' after binding name");
  }
  f.kind = Facet::Kind::Binding;
  f.name = w;
  f.value = parse_value(c);
  return f;
}

void parse_options(Cursor& c, ExerciseSpec& s, const SourcePos& block_pos) {
  std::set<char> keys;
  while (!c.accept('}')) {
    if (c.at_end()) throw ParseError("unterminated mcq block", block_pos, {"'}'"});
    McqOption o;
    o.pos = c.pos();
    const std::string key = c.word();
    if (key.size() != 1 || key[0] < 'a' || key[0] > 'z') c.fail("option key (a-z)");
    o.key = key[0];
    if (!keys.insert(o.key).second)
      throw ParseError("duplicate option key '" + key + "'", o.pos, {}, "DuplicateOptionKey");
    c.expect(':');
    o.label = c.string_lit();
    if (c.accept('*')) o.correct = true;
    for (;;) {
      if (c.accept_word("expect")) {
        if (o.expect) c.fail("one 'expect' per option");
        o.expect = parse_facet(c);
      } else if (c.accept_word("tag")) {
        o.tag = c.expect_word_any("tag name");
      } else {
        break;
      }
    }
    s.options.push_back(std::move(o));
  }
  const auto n = std::count_if(s.options.begin(), s.options.end(),
                               [](const McqOption& o) { return o.correct; });
  if (n == 0)
    throw ParseError("no option is marked correct with '*'", block_pos, {}, "MissingCorrectOption");
  if (n > 1)
    throw ParseError("more than one option is marked correct", block_pos, {},
                     "MultipleCorrectOptions");
}

}  // namespace

ExerciseSpec parse_spec(std::string_view source) {
  Cursor c(source);
  ExerciseSpec s;
  c.expect_word("exercise");
  s.id = c.string_lit();
  const SourcePos open = c.pos();
  c.expect('{');
  bool have_question = false, have_mcq = false, have_plan = false, have_target = false;
  auto once = [&](bool& flag, const char* what, const SourcePos& pos) {
    if (flag) throw ParseError(std::string("duplicate '") + what + "' section", pos);
    flag = true;
  };
  while (!c.accept('}')) {
    if (c.at_end()) throw ParseError("unterminated exercise", open, {"'}'"});
    const SourcePos pos = c.pos();
    const std::string kw = c.word();
    if (kw == "target") {
      once(have_target, "target", pos);
      c.expect(':');
      s.target_pos = pos;
      const SourcePos ppos = c.pos();
      auto p = bloom::parse_process(c.word());
      if (!p) throw ParseError("unknown process category", ppos, {"Remember..Create"});
      c.expect_word("x");
      const SourcePos kpos = c.pos();
      auto k = bloom::parse_knowledge(c.word());
      if (!k) throw ParseError("unknown knowledge category", kpos, {"Factual..Metacognitive"});
      s.declared_target = bloom::Cell{*p, *k};
      c.expect(';');
    } else if (kw == "requires") {
      c.expect(':');
      do s.prerequisites.push_back(c.expect_word_any("concept identifier"));
      while (c.accept(','));
      c.expect(';');
    } else if (kw == "provenance") {
      if (s.provenance) throw ParseError("duplicate 'provenance' section", pos);
      c.expect(':');
      Provenance p;
      p.rule = c.expect_word_any("template rule name");
      c.expect('(');
      if (!c.accept(')')) {
        do {
          auto k = c.expect_word_any("parameter name");
          c.expect('=');
          p.bindings.emplace_back(k, c.string_lit());
        } while (c.accept(','));
        c.expect(')');
      }
      if (c.accept_word("seed")) {
        p.seed = c.unsigned_integer();
      }
      c.expect(';');
      s.provenance = std::move(p);
    } else if (kw == "question") {
      once(have_question, "question", pos);
      c.expect('{');
      const std::size_t body_start = c.offset();
      const std::string_view body = raw_block(c, pos);
      s.question = clean_question(body);
      s.code = extract_code(body, body_start);
      // Re-anchor positions to the whole file.
      for (auto& b : s.code) b.pos = position_at(source, b.pos.offset);
      for (auto& b : s.code) {
        try {
          b.program = lang::parse_program(b.source);
        } catch (const ParseError& e) {
          SourcePos p = b.pos;
          p.line += e.pos().line - 1;
          p.column = e.pos().line == 1 ? b.pos.column + e.pos().column - 1
                                       : e.pos().column + (b.pos.column - 1);
          p.offset = b.pos.offset + e.pos().offset;
          throw ParseError(std::string("in question code: ") + e.what(), p, e.expected(), e.code());
        }
      }
    } else if (kw == "mcq") {
      once(have_mcq, "mcq", pos);
      s.mode = Mode::Mcq;
      s.fill = c.accept_word("fill");
      c.expect('{');
      parse_options(c, s, pos);
    } else if (kw == "answer") {
      c.expect(':');
      s.answers.push_back(parse_facet(c));
      c.expect(';');
    } else if (kw == "plan") {
      once(have_plan, "plan", pos);
      c.expect('{');
      c.skip();
      const std::size_t start = c.offset();
      const std::size_t end = source.find('}', start);
      if (end == std::string_view::npos) throw ParseError("unterminated plan", pos, {"'}'"});
      s.plan_pos = position_at(source, start);
      s.plan = plan::parse_plan(source.substr(start, end - start), s.plan_pos);
      c.seek(end + 1);
    } else {
      c.seek(source.find(kw, pos.offset));
      c.fail("'target', 'requires', 'provenance', 'question', 'mcq', 'answer' or 'plan'");
    }
  }
  if (!c.at_end()) c.fail("end of file");
  if (!have_question) throw ParseError("exercise has no question", open, {"question"});
  if (s.mode == Mode::Mcq && !s.answers.empty())
    throw ParseError("an exercise has either mcq options or answers", open);
  if (!s.declared_target)
    s.warnings.push_back({Severity::Warning, "DefaultTarget",
                          "no target declared; assuming (Understand, Conceptual)", open});
  return s;
}

// ===========================================================================
// Rendering

std::string render(const Facet& f) {
  switch (f.kind) {
    case Facet::Kind::Stdout: return "stdout " + quote(f.text);
    case Facet::Kind::Text: return "text " + quote(f.text);
    case Facet::Kind::Binding: return f.name + " = " + lang::to_string(f.value);
  }
  return "";
}

std::string render(const ExerciseSpec& s) {
  std::string out = "exercise " + quote(s.id) + " {\n";
  if (s.declared_target)
    out += "  target: " + std::string(bloom::to_string(s.declared_target->process)) + " x " +
           std::string(bloom::to_string(s.declared_target->knowledge)) + ";\n";
  if (!s.prerequisites.empty()) {
    out += "  requires: ";
    for (std::size_t i = 0; i < s.prerequisites.size(); ++i) {
      if (i) out += ", ";
      out += s.prerequisites[i];
    }
    out += ";\n";
  }
  if (s.provenance) {
    out += "  provenance: " + s.provenance->rule + "(";
    for (std::size_t i = 0; i < s.provenance->bindings.size(); ++i) {
      if (i) out += ", ";
      out += s.provenance->bindings[i].first + "=" + quote(s.provenance->bindings[i].second);
    }
    out += ")";
    if (s.provenance->seed) out += " seed " + std::to_string(*s.provenance->seed);
    out += ";\n";
  }
  out += "  question {\n" + s.question + "\n  }\n";
  if (s.mode == Mode::Mcq) {
    out += s.fill ? "  mcq fill {\n" : "  mcq {\n";
    for (const auto& o : s.options) {
      out += "    ";
      out += o.key;
      out += ": " + quote(o.label);
      if (o.correct) out += " *";
      if (o.expect) out += " expect " + render(*o.expect);
      if (!o.tag.empty()) out += " tag " + o.tag;
      out += "\n";
    }
    out += "  }\n";
  }
  for (const auto& a : s.answers) out += "  answer: " + render(a) + ";\n";
  if (s.plan) out += "  plan {\n    " + plan::render(*s.plan) + "\n  }\n";
  out += "}\n";
  return out;
}

namespace {

bool same_facet(const std::optional<Facet>& a, const std::optional<Facet>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->kind == b->kind && a->name == b->name && a->value == b->value && a->text == b->text;
}

}  // namespace

bool equivalent(const ExerciseSpec& a, const ExerciseSpec& b) {
  if (a.id != b.id || a.declared_target != b.declared_target ||
      a.prerequisites != b.prerequisites || a.question != b.question || a.mode != b.mode ||
      a.fill != b.fill || a.options.size() != b.options.size() ||
      a.answers.size() != b.answers.size() || a.code.size() != b.code.size() ||
      a.plan.has_value() != b.plan.has_value())
    return false;
  if (a.provenance.has_value() != b.provenance.has_value()) return false;
  if (a.provenance && (a.provenance->rule != b.provenance->rule ||
                       a.provenance->bindings != b.provenance->bindings ||
                       a.provenance->seed != b.provenance->seed))
    return false;
  for (std::size_t i = 0; i < a.options.size(); ++i) {
    const auto& x = a.options[i];
    const auto& y = b.options[i];
    if (x.key != y.key || x.label != y.label || x.correct != y.correct || x.tag != y.tag ||
        !same_facet(x.expect, y.expect))
      return false;
  }
  for (std::size_t i = 0; i < a.answers.size(); ++i)
    if (!same_facet(a.answers[i], b.answers[i])) return false;
  for (std::size_t i = 0; i < a.code.size(); ++i)
    if (a.code[i].source != b.code[i].source) return false;
  if (a.plan && plan::render(*a.plan) != plan::render(*b.plan)) return false;
  return true;
}

std::string question_program(const ExerciseSpec& s) {
  std::string src;
  for (const auto& b : s.code) src += b.source;
  return src;
}

std::string fill_program(const ExerciseSpec& s, const McqOption& o) {
  const std::string src = question_program(s);
  std::string out;
  bool filled = false;
  for (auto line : split(src, '\n')) {
    if (!filled && line.find("___") != std::string_view::npos) {
      out += o.label;
      filled = true;
    } else {
      out += line;
    }
    out += '\n';
  }
  if (!filled) out += o.label + "\n";
  return out;
}

// ===========================================================================
// Validation

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Confirmed: return "Confirmed";
    case Verdict::Refuted: return "Refuted";
    case Verdict::EvaluationFailed: return "EvaluationFailed";
    case Verdict::NoExpectation: return "NoExpectation";
    case Verdict::Unchecked: return "Unchecked";
  }
  return "?";
}

std::size_t ValidationReport::errors() const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::Error;
  }));
}

bool facet_holds(const Facet& f, const lang::Effect& e) {
  switch (f.kind) {
    case Facet::Kind::Stdout: return e.stdout_text == f.text;
    case Facet::Kind::Binding: {
      const Value* v = lang::find_binding(e.bindings, f.name);
      return v && *v == f.value;
    }
    case Facet::Kind::Text: return false;
  }
  return false;
}

namespace {

std::string describe_effect(const Facet& f, const lang::Effect& e) {
  if (f.kind == Facet::Kind::Stdout) return "stdout " + quote(e.stdout_text);
  const Value* v = lang::find_binding(e.bindings, f.name);
  return f.name + " = " + (v ? lang::to_string(*v) : std::string("<unbound>"));
}

struct Run {
  std::optional<lang::Effect> effect;
  std::string failure;  // parse problem, if any
};

Run run_source(const std::string& src, std::uint64_t fuel) {
  Run r;
  try {
    r.effect = lang::evaluate(lang::parse_program(src), fuel);
  } catch (const ParseError& e) {
    r.failure = std::string(e.code()) + " at " + to_string(e.pos()) + ": " + e.what();
  }
  return r;
}

}  // namespace

ValidationReport validate_spec(const ExerciseSpec& s, std::uint64_t fuel) {
  ValidationReport rep;
  auto add = [&](Severity sev, std::string code, std::string msg, SourcePos pos) {
    rep.findings.push_back({sev, std::move(code), std::move(msg), pos});
  };

  std::optional<lang::Effect> base;
  if (!s.code.empty() && !(s.mode == Mode::Mcq && s.fill)) {
    Run r = run_source(question_program(s), fuel);
    if (!r.effect) {
      add(Severity::Error, "ParseError", "question code: " + r.failure, s.code.front().pos);
    } else {
      base = r.effect;
      rep.effect = r.effect;
    }
  }

  if (s.mode == Mode::Mcq) {
    for (const auto& o : s.options) {
      OptionResult res{o.key, o.correct, Verdict::NoExpectation, ""};
      const std::string who = std::string("option ") + o.key;
      if (!o.expect) {
        if (o.correct)
          add(Severity::Warning, "UncheckedOption", who + " (correct) declares no expected effect",
              o.pos);
        rep.options.push_back(res);
        continue;
      }
      if (o.expect->kind == Facet::Kind::Text) {
        res.verdict = Verdict::Unchecked;
        add(Severity::Info, "UncheckedText", who + ": text facets cannot be checked", o.pos);
        rep.options.push_back(res);
        continue;
      }
      std::optional<lang::Effect> eff;
      if (s.fill) {
        Run r = run_source(fill_program(s, o), fuel);
        if (!r.effect) {
          res.verdict = Verdict::EvaluationFailed;
          res.detail = r.failure;
          add(o.correct ? Severity::Error : Severity::Info, "EvaluationFailed",
              who + " does not parse: " + r.failure, o.pos);
          rep.options.push_back(res);
          continue;
        }
        eff = r.effect;
      } else {
        eff = base;
      }
      if (!eff) {
        res.verdict = Verdict::Unchecked;
        add(Severity::Info, "NoCode", who + ": no code to evaluate", o.pos);
        rep.options.push_back(res);
        continue;
      }
      if (eff->status != lang::Status::Completed) {
        res.verdict = Verdict::EvaluationFailed;
        res.detail = eff->status_string();
        if (o.correct) {
          add(Severity::Error, "EvaluationFailed",
              who + " (correct): evaluation ended with " + res.detail, o.pos);
        } else {
          add(Severity::Info, "DistractorRuntimeError",
              who + " is refuted by " + res.detail, o.pos);
        }
        rep.options.push_back(res);
        continue;
      }
      const bool holds = facet_holds(*o.expect, *eff);
      res.verdict = holds ? Verdict::Confirmed : Verdict::Refuted;
      res.detail = describe_effect(*o.expect, *eff);
      if (o.correct && !holds)
        add(Severity::Error, "CorrectOptionMismatch",
            who + " is marked correct but evaluation gives " + res.detail, o.pos);
      if (!o.correct && holds)
        add(Severity::Error, "DegenerateDistractor",
            who + " is a distractor but its expected effect holds (" + res.detail + ")", o.pos);
      rep.options.push_back(res);
    }
  } else {
    for (const auto& a : s.answers) {
      AnswerResult res{render(a), Verdict::Unchecked, ""};
      if (a.kind == Facet::Kind::Text) {
        add(Severity::Info, "UncheckedText", "text answers cannot be checked by evaluation", a.pos);
      } else if (!base) {
        add(Severity::Warning, "NoCode", "answer " + res.facet + " has no code to check against",
            a.pos);
      } else if (base->status != lang::Status::Completed) {
        res.verdict = Verdict::EvaluationFailed;
        res.detail = base->status_string();
        add(Severity::Error, "EvaluationFailed", "question code ended with " + res.detail, a.pos);
      } else if (facet_holds(a, *base)) {
        res.verdict = Verdict::Confirmed;
        res.detail = describe_effect(a, *base);
      } else {
        res.verdict = Verdict::Refuted;
        res.detail = describe_effect(a, *base);
        add(Severity::Error, "AnswerMismatch",
            "answer " + res.facet + " but evaluation gives " + res.detail, a.pos);
      }
      rep.answers.push_back(res);
    }
  }
  sort_findings(rep.findings);
  return rep;
}

Consistency consistency_check(const ExerciseSpec& s, const plan::VerbMap& verbs,
                              const plan::Weights& w) {
  Consistency c;
  if (!s.plan) {
    c.findings.push_back(
        {Severity::Warning, "MissingPlan", "exercise '" + s.id + "' has no plan", {}});
    return c;
  }
  c.report = plan::type_plan(*s.plan, verbs, w);
  c.findings = c.report->warnings;
  for (const auto& m : plan::missing_path_lint(*s.plan, verbs, w))
    c.findings.push_back(plan::to_finding(m));
  for (auto& f : plan::target_discrepancies(s.target(), *c.report,
                                            s.declared_target ? s.target_pos : s.plan_pos))
    c.findings.push_back(std::move(f));
  sort_findings(c.findings);
  return c;
}

}  // namespace exr::spec
