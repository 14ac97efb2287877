#include "exr/plan.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "lexer.hpp"

namespace exr::plan {

using bloom::Cell;

std::string_view to_string(Layer l) {
  switch (l) {
    case Layer::Eval: return "Eval";
    case Layer::DR: return "DR";
    case Layer::MDR: return "MDR";
  }
  return "?";
}

std::optional<Layer> parse_layer(std::string_view s) {
  if (s == "Eval" || s == "E") return Layer::Eval;
  if (s == "DR") return Layer::DR;
  if (s == "MDR") return Layer::MDR;
  return std::nullopt;
}

// ===========================================================================
// Parsing

namespace {

using detail::Token;
using detail::TokenStream;

class PlanParser {
 public:
  PlanParser(std::string_view src, const detail::LineIndex& lines)
      : src_(src), ts_(detail::lex(src, options(), lines), lines) {}

  PlanDoc parse() {
    PlanDoc doc;
    while (ts_.peek().kind == Token::Ident && ts_.peek(1).punct("=>")) {
      const Token& name = ts_.next();
      const SourcePos pos = ts_.pos_of(name);
      ts_.next();
      if (doc.rules.count(name.text))
        throw ParseError("rule '" + name.text + "' defined twice", pos, {}, "DuplicateRule");
      doc.rules[name.text] = expr();
      doc.rule_order.push_back(name.text);
      rule_pos_[name.text] = pos;
      ts_.expect_punct(".");
    }
    doc.root = expr();
    if (!ts_.at_end()) ts_.fail({"';'", "'|'", "end of plan"});
    check_refs(doc);
    return doc;
  }

 private:
  std::string_view src_;
  TokenStream ts_;
  std::vector<std::pair<std::string, SourcePos>> refs_;
  std::map<std::string, SourcePos> rule_pos_;

  static const detail::LexOptions& options() {
    static const detail::LexOptions o{{"=>"}, true, false};
    return o;
  }

  template <class N>
  PlanPtr make(SourcePos pos, N node) {
    auto p = std::make_shared<Plan>();
    p->pos = pos;
    p->node = std::move(node);
    return p;
  }

  PlanPtr expr() {
    auto left = seq();
    while (ts_.peek().punct("|")) {
      const SourcePos pos = ts_.here();
      ts_.next();
      left = make(pos, Choice{left, seq()});
    }
    return left;
  }

  PlanPtr seq() {
    auto left = unit();
    while (ts_.peek().punct(";")) {
      const SourcePos pos = ts_.here();
      ts_.next();
      left = make(pos, Seq{left, unit()});
    }
    return left;
  }

  PlanPtr unit() {
    const SourcePos pos = ts_.here();
    PlanPtr p;
    if (ts_.accept_punct("(")) {
      p = expr();
      ts_.expect_punct(")");
    } else if (ts_.peek().kind == Token::Ident) {
      const Token& name = ts_.next();
      if (ts_.accept_punct("(")) {
        Atom a;
        a.verb = name.text;
        const Token& layer = ts_.expect_kind(Token::Ident, "layer (Eval, DR or MDR)");
        auto l = parse_layer(layer.text);
        if (!l)
          throw ParseError("unknown layer '" + layer.text + "'", ts_.pos_of(layer),
                           {"Eval", "DR", "MDR"});
        a.layer = *l;
        if (ts_.peek().punct(":")) {
          const std::size_t start = ts_.next().offset + 1;
          while (!ts_.peek().punct(")")) {
            if (ts_.at_end()) ts_.fail({"')'"});
            ts_.next();
          }
          a.subject = std::string(trim(src_.substr(start, ts_.peek().offset - start)));
        }
        ts_.expect_punct(")");
        p = make(pos, std::move(a));
      } else {
        refs_.emplace_back(name.text, pos);
        p = make(pos, RuleRef{name.text});
      }
    } else {
      ts_.fail({"verb", "rule name", "'('"});
    }
    while (ts_.peek().punct("*")) {
      const SourcePos spos = ts_.here();
      ts_.next();
      p = make(spos, Star{p});
    }
    return p;
  }

  void check_refs(const PlanDoc& doc) {
    for (const auto& [name, pos] : refs_)
      if (!doc.rules.count(name))
        throw Error("UndefinedRule", "undefined plan rule '" + name + "'", pos);
    // Reject every cycle between rules; plans are finite descriptions.
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit;
    std::function<void(const PlanPtr&, const std::string&)> walk =
        [&](const PlanPtr& p, const std::string& owner) {
          std::visit(
              [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, Seq> || std::is_same_v<N, Choice>) {
                  walk(n.left, owner);
                  walk(n.right, owner);
                } else if constexpr (std::is_same_v<N, Star>) {
                  walk(n.body, owner);
                } else if constexpr (std::is_same_v<N, RuleRef>) {
                  if (state[n.name] == 1)
                    throw Error("RecursiveRule",
                                "plan rule '" + n.name + "' is recursive (via '" + owner + "')",
                                p->pos);
                  visit(n.name);
                }
              },
              p->node);
        };
    visit = [&](const std::string& name) {
      if (state[name] == 2) return;
      state[name] = 1;
      walk(doc.rules.at(name), name);
      state[name] = 2;
    };
    for (const auto& name : doc.rule_order) visit(name);
  }
};

}  // namespace

PlanDoc parse_plan(std::string_view source, SourcePos base) {
  detail::LineIndex lines(source, base);
  PlanParser p(source, lines);
  return p.parse();
}

namespace {

// Precedence: Choice 0, Seq 1, unit 2.
void render_into(std::string& out, const PlanPtr& p, int context) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Atom>) {
          out += n.verb + "(" + std::string(to_string(n.layer));
          if (!n.subject.empty()) out += ": " + n.subject;
          out += ")";
        } else if constexpr (std::is_same_v<N, RuleRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<N, Star>) {
          out += "(";
          render_into(out, n.body, 0);
          out += ")*";
        } else {
          const int prec = std::is_same_v<N, Seq> ? 1 : 0;
          const bool paren = prec < context;
          if (paren) out += "(";
          render_into(out, n.left, prec);
          out += std::is_same_v<N, Seq> ? " ; " : " | ";
          render_into(out, n.right, prec + 1);
          if (paren) out += ")";
        }
      },
      p->node);
}

}  // namespace

std::string render(const PlanPtr& p) {
  std::string out;
  render_into(out, p, 0);
  return out;
}

std::string render(const PlanDoc& d) {
  std::string out;
  for (const auto& name : d.rule_order) out += name + " => " + render(d.rules.at(name)) + " .\n";
  out += render(d.root);
  return out;
}

// ===========================================================================
// Config files

VerbMap VerbMap::parse(std::string_view text) {
  VerbMap m;
  std::size_t offset = 0;
  for (auto raw : split(text, '\n')) {
    const SourcePos pos = position_at(text, offset);
    offset += raw.size() + 1;
    auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) -> void {
      throw ParseError(msg + " in verb map line '" + std::string(line) + "'", pos);
    };
    if (line.substr(0, 5) != "verb ") fail("expected 'verb'");
    const auto arrow = line.find("->");
    if (arrow == std::string_view::npos) fail("expected '->'");
    auto key = trim(line.substr(5, arrow - 5));
    const auto at = key.find('@');
    if (at == std::string_view::npos) fail("expected '<verb>@<Layer>'");
    auto layer = parse_layer(trim(key.substr(at + 1)));
    if (!layer) fail("unknown layer");
    auto cell = trim(line.substr(arrow + 2));
    if (cell.size() < 2 || cell.front() != '(' || cell.back() != ')') fail("expected '(P, K)'");
    auto parts = split(cell.substr(1, cell.size() - 2), ',');
    if (parts.size() != 2) fail("expected '(P, K)'");
    auto p = bloom::parse_process(trim(parts[0]));
    auto k = bloom::parse_knowledge(trim(parts[1]));
    if (!p || !k) fail("unknown category");
    m.cells[{std::string(trim(key.substr(0, at))), *layer}] = Cell{*p, *k};
  }
  return m;
}

std::optional<Cell> VerbMap::lookup(const std::string& verb, Layer layer) const {
  auto it = cells.find({verb, layer});
  if (it == cells.end()) return std::nullopt;
  return it->second;
}

Weights Weights::parse(std::string_view text) {
  Weights w;
  std::size_t offset = 0;
  for (auto raw : split(text, '\n')) {
    const SourcePos pos = position_at(text, offset);
    offset += raw.size() + 1;
    auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string_view::npos) sep = line.find(':');
    if (sep == std::string_view::npos) throw ParseError("expected 'key = value'", pos);
    const std::string key(trim(line.substr(0, sep)));
    const std::string value(trim(line.substr(sep + 1)));
    try {
      std::size_t used = 0;
      if (key == "star_factor") {
        w.star_factor = std::stod(value, &used);
      } else if (key == "missing_path_ratio") {
        w.missing_path_ratio = std::stod(value, &used);
      } else if (key == "path_bound") {
        w.path_bound = std::stoul(value, &used);
      } else {
        throw ParseError("unknown weight '" + key + "'", pos);
      }
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ParseError("bad number '" + value + "' for '" + key + "'", pos);
    }
  }
  if (w.star_factor <= 0 || w.missing_path_ratio <= 0 || w.path_bound == 0)
    throw ParseError("weights must be positive", {});
  return w;
}

// ===========================================================================
// Typing

Cell default_cell(Layer layer) {
  if (layer == Layer::Eval) return {bloom::Process::Apply, bloom::Knowledge::Procedural};
  return {bloom::Process::Understand, bloom::Knowledge::Conceptual};
}

double atom_score(const Cell& c) { return 1.0 + bloom::rank(c.process) + bloom::rank(c.knowledge); }

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::P1: return "P1";
    case Pattern::P2: return "P2";
    case Pattern::P3: return "P3";
  }
  return "?";
}

std::string_view describe(Pattern p) {
  switch (p) {
    case Pattern::P1: return "P1-oscillation";
    case Pattern::P2: return "P2-abstraction";
    case Pattern::P3: return "P3-inflection";
  }
  return "?";
}

namespace {

bool contains(const Signature& s, std::initializer_list<Layer> frag) {
  return std::search(s.begin(), s.end(), frag.begin(), frag.end()) != s.end();
}

const PlanPtr& resolve(const PlanDoc& doc, const RuleRef& r) { return doc.rules.at(r.name); }

}  // namespace

std::vector<Pattern> detect_patterns(const Signature& s) {
  std::vector<Pattern> out;
  if (contains(s, {Layer::DR, Layer::Eval, Layer::DR})) out.push_back(Pattern::P1);
  if (contains(s, {Layer::DR, Layer::MDR, Layer::DR})) out.push_back(Pattern::P2);
  if (contains(s, {Layer::MDR, Layer::DR, Layer::Eval})) out.push_back(Pattern::P3);
  return out;
}

std::vector<Pattern> detect_patterns(const std::vector<Signature>& sigs) {
  std::set<Pattern> found;
  for (const auto& s : sigs)
    for (auto p : detect_patterns(s)) found.insert(p);
  return {found.begin(), found.end()};
}

Typing type_node(const PlanDoc& doc, const PlanPtr& p, const VerbMap& verbs, const Weights& w) {
  return std::visit(
      [&](const auto& n) -> Typing {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Atom>) {
          const Cell c = verbs.lookup(n.verb, n.layer).value_or(default_cell(n.layer));
          const double s = atom_score(c);
          return {c, c, s, s};
        } else if constexpr (std::is_same_v<N, RuleRef>) {
          return type_node(doc, resolve(doc, n), verbs, w);
        } else if constexpr (std::is_same_v<N, Star>) {
          Typing t = type_node(doc, n.body, verbs, w);
          t.effort_min *= w.star_factor;
          t.effort_max *= w.star_factor;
          return t;
        } else if constexpr (std::is_same_v<N, Seq>) {
          const Typing l = type_node(doc, n.left, verbs, w);
          const Typing r = type_node(doc, n.right, verbs, w);
          return {bloom::join(l.cell_min, r.cell_min), bloom::join(l.cell_max, r.cell_max),
                  l.effort_min + r.effort_min, l.effort_max + r.effort_max};
        } else {
          const Typing l = type_node(doc, n.left, verbs, w);
          const Typing r = type_node(doc, n.right, verbs, w);
          Typing t;
          if (l.effort_min < r.effort_min) {
            t.cell_min = l.cell_min;
          } else if (r.effort_min < l.effort_min) {
            t.cell_min = r.cell_min;
          } else {
            t.cell_min = std::min(l.cell_min, r.cell_min);
          }
          t.cell_max = bloom::join(l.cell_max, r.cell_max);
          t.effort_min = std::min(l.effort_min, r.effort_min);
          t.effort_max = std::max(l.effort_max, r.effort_max);
          return t;
        }
      },
      p->node);
}

namespace {

void append_collapsed(Signature& s, const Signature& tail) {
  for (Layer l : tail)
    if (s.empty() || s.back() != l) s.push_back(l);
}

// Paths as raw layer sequences; nullopt once the bound is exceeded.
std::optional<std::vector<Signature>> enumerate(const PlanDoc& doc, const PlanPtr& p,
                                                std::size_t bound) {
  return std::visit(
      [&](const auto& n) -> std::optional<std::vector<Signature>> {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Atom>) {
          return std::vector<Signature>{{n.layer}};
        } else if constexpr (std::is_same_v<N, RuleRef>) {
          return enumerate(doc, resolve(doc, n), bound);
        } else if constexpr (std::is_same_v<N, Star>) {
          return enumerate(doc, n.body, bound);
        } else if constexpr (std::is_same_v<N, Seq>) {
          auto l = enumerate(doc, n.left, bound);
          if (!l) return std::nullopt;
          auto r = enumerate(doc, n.right, bound);
          if (!r) return std::nullopt;
          if (l->size() * r->size() > bound) return std::nullopt;
          std::vector<Signature> out;
          for (const auto& a : *l)
            for (const auto& b : *r) {
              Signature s = a;
              append_collapsed(s, b);
              out.push_back(std::move(s));
            }
          return out;
        } else {
          auto l = enumerate(doc, n.left, bound);
          if (!l) return std::nullopt;
          auto r = enumerate(doc, n.right, bound);
          if (!r) return std::nullopt;
          if (l->size() + r->size() > bound) return std::nullopt;
          l->insert(l->end(), r->begin(), r->end());
          return l;
        }
      },
      p->node);
}

void collect_atoms(const PlanDoc& doc, const PlanPtr& p, std::vector<const Plan*>& out,
                   std::set<std::string>& seen_rules) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Atom>) {
          out.push_back(p.get());
        } else if constexpr (std::is_same_v<N, RuleRef>) {
          if (seen_rules.insert(n.name).second)
            collect_atoms(doc, resolve(doc, n), out, seen_rules);
        } else if constexpr (std::is_same_v<N, Star>) {
          collect_atoms(doc, n.body, out, seen_rules);
        } else {
          collect_atoms(doc, n.left, out, seen_rules);
          collect_atoms(doc, n.right, out, seen_rules);
        }
      },
      p->node);
}

}  // namespace

std::optional<std::vector<Signature>> signatures(const PlanDoc& doc, const PlanPtr& p,
                                                 std::size_t bound) {
  auto raw = enumerate(doc, p, bound);
  if (!raw) return std::nullopt;
  std::vector<Signature> out;
  for (auto& s : *raw) {
    Signature c;
    append_collapsed(c, s);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  }
  return out;
}

Report type_plan(const PlanDoc& doc, const VerbMap& verbs, const Weights& w) {
  Report r;
  const Typing t = type_node(doc, doc.root, verbs, w);
  r.cell_min_path = t.cell_min;
  r.cell_max_path = t.cell_max;
  r.effort_min = t.effort_min;
  r.effort_max = t.effort_max;

  std::vector<const Plan*> atoms;
  std::set<std::string> seen;
  collect_atoms(doc, doc.root, atoms, seen);
  std::set<std::pair<std::string, Layer>> reported;
  for (const Plan* a : atoms) {
    const auto& atom = std::get<Atom>(a->node);
    if (verbs.lookup(atom.verb, atom.layer)) continue;
    if (!reported.insert({atom.verb, atom.layer}).second) continue;
    const Cell c = default_cell(atom.layer);
    r.warnings.push_back({Severity::Warning, "Unmapped",
                          "verb '" + atom.verb + "@" + std::string(to_string(atom.layer)) +
                              "' has no cell; assuming " + bloom::to_string(c),
                          a->pos});
  }

  if (auto sigs = signatures(doc, doc.root, w.path_bound)) {
    r.signatures = std::move(*sigs);
  } else {
    r.truncated = true;
    r.warnings.push_back({Severity::Warning, "PathExplosion",
                          "more than " + std::to_string(w.path_bound) +
                              " paths; signatures truncated",
                          doc.root->pos});
  }
  r.patterns = detect_patterns(r.signatures);
  return r;
}

std::vector<MissingPath> missing_path_lint(const PlanDoc& doc, const VerbMap& verbs,
                                           const Weights& w) {
  std::vector<MissingPath> out;
  std::function<void(const PlanPtr&)> walk = [&](const PlanPtr& p) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, Star>) {
            walk(n.body);
          } else if constexpr (std::is_same_v<N, Seq> || std::is_same_v<N, Choice>) {
            walk(n.left);
            walk(n.right);
            if constexpr (std::is_same_v<N, Seq>) {
              const double l = type_node(doc, n.left, verbs, w).effort_min;
              const double r = type_node(doc, n.right, verbs, w).effort_min;
              const double small = std::min(l, r);
              const double large = std::max(l, r);
              if (small > 0 && large >= w.missing_path_ratio * small) {
                const bool left_small = l <= r;
                out.push_back({left_small ? n.left : n.right, left_small ? n.right : n.left,
                               large / small});
              }
            }
          }
        },
        p->node);
  };
  for (const auto& name : doc.rule_order) walk(doc.rules.at(name));
  walk(doc.root);
  return out;
}

Finding to_finding(const MissingPath& m) {
  std::ostringstream msg;
  msg.precision(3);
  msg << "'" << render(m.smaller) << "' may be skipped next to '" << render(m.larger)
      << "' (effort ratio " << m.ratio << ")";
  return {Severity::Warning, "MissingPath", msg.str(), m.smaller->pos};
}

std::vector<Finding> target_discrepancies(const Cell& declared, const Report& r, SourcePos pos) {
  std::vector<Finding> out;
  const auto& lo = r.cell_min_path;
  const auto& hi = r.cell_max_path;
  if (declared.process < lo.process || declared.process > hi.process)
    out.push_back({Severity::Warning, "TargetDiscrepancy",
                   "declared process " + std::string(bloom::to_string(declared.process)) +
                       " outside plan range " + std::string(bloom::to_string(lo.process)) +
                       ".." + std::string(bloom::to_string(hi.process)),
                   pos});
  if (declared.knowledge < lo.knowledge || declared.knowledge > hi.knowledge)
    out.push_back({Severity::Warning, "TargetDiscrepancy",
                   "declared knowledge " + std::string(bloom::to_string(declared.knowledge)) +
                       " outside plan range " + std::string(bloom::to_string(lo.knowledge)) +
                       ".." + std::string(bloom::to_string(hi.knowledge)),
                   pos});
  return out;
}

}  // namespace exr::plan
