#include <algorithm>
#include <functional>
#include <queue>
#include <regex>
#include <tuple>

#include "exr/rewrite.hpp"

namespace exr::rw {

// ===========================================================================
// Matching

namespace {

using Cont = std::function<bool(Subst&)>;

bool is_fn_var(const Term& p) {
  return p->kind == Kind::App && !p->name.empty() &&
         std::isupper(static_cast<unsigned char>(p->name[0]));
}

bool is_unary_fn(const Term& s) {
  return s->kind == Kind::App && s->kids.size() == 1 &&
         (s->name == "log" || s->name == "sin" || s->name == "cos");
}

bool match(const Term& p, const Term& s, Subst& sub, const Cont& k);

bool bind_var(const std::string& name, const Term& value, Subst& sub, const Cont& k) {
  if (auto it = sub.vars.find(name); it != sub.vars.end())
    return equal(it->second, value) ? k(sub) : false;
  sub.vars.emplace(name, value);
  const bool stop = k(sub);
  sub.vars.erase(name);
  return stop;
}

bool match_list(const std::vector<Term>& ps, const std::vector<Term>& ss, std::size_t i,
                Subst& sub, const Cont& k) {
  if (i == ps.size()) return k(sub);
  return match(ps[i], ss[i], sub, [&](Subst& s2) { return match_list(ps, ss, i + 1, s2, k); });
}

Term identity(const std::string& op) { return cst(op == "+" ? 0 : 1); }

Term rest_term(const std::string& op, const std::vector<Term>& rest) {
  if (rest.empty()) return identity(op);
  if (rest.size() == 1) return rest.front();
  return app(op, rest);
}

// Assigns the non-absorbing pattern children to distinct subject elements;
// the absorber (if any) takes what is left.
bool match_ac(const std::string& op, const std::vector<Term>& ps, const Term* absorber,
              const std::vector<Term>& elems, std::vector<bool>& used, std::size_t i, Subst& sub,
              const Cont& k) {
  if (i == ps.size()) {
    std::vector<Term> rest;
    for (std::size_t e = 0; e < elems.size(); ++e)
      if (!used[e]) rest.push_back(elems[e]);
    if (!absorber) return rest.empty() ? k(sub) : false;
    if (rest.empty() && !(*absorber)->seq) return false;
    return bind_var((*absorber)->name, rest_term(op, rest), sub, k);
  }
  for (std::size_t e = 0; e < elems.size(); ++e) {
    if (used[e]) continue;
    used[e] = true;
    const bool stop = match(ps[i], elems[e], sub, [&](Subst& s2) {
      return match_ac(op, ps, absorber, elems, used, i + 1, s2, k);
    });
    used[e] = false;
    if (stop) return true;
  }
  return false;
}

bool match(const Term& p, const Term& s, Subst& sub, const Cont& k) {
  switch (p->kind) {
    case Kind::Var: return bind_var(p->name, s, sub, k);
    case Kind::Const: return s->kind == Kind::Const && s->value == p->value ? k(sub) : false;
    case Kind::Sym: return s->kind == Kind::Sym && s->name == p->name ? k(sub) : false;
    case Kind::App: break;
  }
  if (is_fn_var(p)) {
    if (!is_unary_fn(s) || p->kids.size() != 1) return false;
    if (auto it = sub.fns.find(p->name); it != sub.fns.end()) {
      if (it->second != s->name) return false;
      return match(p->kids[0], s->kids[0], sub, k);
    }
    sub.fns.emplace(p->name, s->name);
    const bool stop = match(p->kids[0], s->kids[0], sub, k);
    sub.fns.erase(p->name);
    return stop;
  }
  if (p->name == "+" || p->name == "*") {
    const Term* absorber = nullptr;
    std::vector<Term> others;
    for (const auto& c : p->kids)
      if (c->kind == Kind::Var && c->seq && !absorber) absorber = &c;
    if (!absorber && p->kids.size() >= 2 && p->kids.back()->kind == Kind::Var)
      absorber = &p->kids.back();
    for (const auto& c : p->kids)
      if (&c != absorber) others.push_back(c);
    const bool same_op = s->kind == Kind::App && s->name == p->name;
    const std::vector<Term> elems = same_op ? s->kids : std::vector<Term>{s};
    if (!same_op && !(absorber && (*absorber)->seq)) return false;
    std::vector<bool> used(elems.size(), false);
    return match_ac(p->name, others, absorber, elems, used, 0, sub, k);
  }
  if (s->kind != Kind::App || s->name != p->name || s->kids.size() != p->kids.size()) return false;
  return match_list(p->kids, s->kids, 0, sub, k);
}

}  // namespace

std::optional<Subst> match_term(const Term& pattern, const Term& subject) {
  std::optional<Subst> out;
  Subst sub;
  match(pattern, normalize(subject), sub, [&](Subst& s) {
    out = s;
    return true;
  });
  return out;
}

std::vector<Subst> match_all(const Term& pattern, const Term& subject) {
  std::vector<Subst> out;
  Subst sub;
  match(pattern, normalize(subject), sub, [&](Subst& s) {
    out.push_back(s);
    return false;
  });
  return out;
}

namespace {

Term instantiate_raw(const Term& t, const Subst& s, const std::vector<Term>& solved) {
  switch (t->kind) {
    case Kind::Const:
    case Kind::Sym: return t;
    case Kind::Var: {
      if (t->name[0] == '$') {
        const std::size_t i = std::stoul(t->name.substr(1));
        if (i == 0 || i > solved.size())
          throw Error("UnboundVariable", "no solved subtask " + t->name);
        return solved[i - 1];
      }
      auto it = s.vars.find(t->name);
      if (it == s.vars.end()) throw Error("UnboundVariable", "unbound variable " + t->name);
      return it->second;
    }
    case Kind::App: break;
  }
  std::vector<Term> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) kids.push_back(instantiate_raw(k, s, solved));
  std::string op = t->name;
  if (is_fn_var(t)) {
    auto it = s.fns.find(op);
    if (it == s.fns.end()) throw Error("UnboundVariable", "unbound function variable " + op);
    op = it->second;
  }
  return app(op, std::move(kids));
}

}  // namespace

Term instantiate(const Term& tmpl, const Subst& s, const std::vector<Term>& solved) {
  return normalize(instantiate_raw(tmpl, s, solved));
}

// ===========================================================================
// Rules

std::string_view to_string(RuleKind k) { return k == RuleKind::Expert ? "expert" : "buggy"; }

bool guards_hold(const Rule& r, const Subst& s) {
  auto get = [&](const std::string& n) -> const Term& { return s.vars.at(n); };
  for (const auto& g : r.guards) {
    bool ok = true;
    if (g.name == "const") {
      ok = get(g.args[0])->kind == Kind::Const;
    } else if (g.name == "nonconst") {
      ok = get(g.args[0])->kind != Kind::Const;
    } else if (g.name == "nonzero") {
      ok = get(g.args[0])->kind == Kind::Const && get(g.args[0])->value != Rational(0);
    } else if (g.name == "free") {
      ok = !contains(get(g.args[0]), get(g.args[1]));
    } else if (g.name == "same") {
      ok = equal(get(g.args[0]), get(g.args[1]));
    } else if (g.name == "distinct") {
      ok = !equal(get(g.args[0]), get(g.args[1]));
    }
    if (!ok) return false;
  }
  return true;
}

namespace {

void collect_vars(const Term& t, std::set<std::string>& vars, std::set<std::string>& fns) {
  if (t->kind == Kind::Var) vars.insert(t->name);
  if (is_fn_var(t)) fns.insert(t->name);
  for (const auto& k : t->kids) collect_vars(k, vars, fns);
}

std::size_t guard_arity(const std::string& g) {
  if (g == "const" || g == "nonconst" || g == "nonzero") return 1;
  if (g == "free" || g == "same" || g == "distinct") return 2;
  return 0;
}

// Finds `word` as a whole word at or after `from`.
std::size_t find_word(std::string_view s, std::string_view word, std::size_t from = 0) {
  auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  for (std::size_t i = s.find(word, from); i != std::string_view::npos; i = s.find(word, i + 1)) {
    const bool left = i == 0 || !ident(s[i - 1]);
    const bool right = i + word.size() >= s.size() || !ident(s[i + word.size()]);
    if (left && right) return i;
  }
  return std::string_view::npos;
}

Rule parse_rule(std::string_view text, std::size_t start, std::size_t end) {
  const std::string_view block = text.substr(start, end - start);
  auto pos_at = [&](std::size_t rel) { return position_at(text, start + rel); };
  auto fail = [&](std::size_t rel, const std::string& msg) -> void {
    throw ParseError(msg, pos_at(rel));
  };

  Rule r;
  r.pos = pos_at(0);
  const std::size_t colon = block.find(':');
  if (colon == std::string_view::npos) fail(0, "expected ':' after rule header");
  {
    static const std::regex header(
        R"(^\s*rule\s+([A-Za-z_][A-Za-z0-9_]*)\s+(expert|buggy)\s*(?:tags\s*\(([^)]*)\))?\s*$)");
    const std::string h(block.substr(0, colon));
    std::smatch m;
    if (!std::regex_match(h, m, header))
      fail(0, "expected 'rule <name> expert|buggy [tags(...)] :'");
    r.name = m[1];
    r.kind = m[2] == "expert" ? RuleKind::Expert : RuleKind::Buggy;
    r.tags.insert(m[2]);
    if (m[3].matched)
      for (auto t : split(std::string_view(m[3].first.base(), m[3].length()), ','))
        if (!trim(t).empty()) r.tags.emplace(trim(t));
    if (r.tags.count(r.kind == RuleKind::Expert ? "buggy" : "expert"))
      fail(0, "rule '" + r.name + "' is tagged with the opposite kind");
  }

  const std::size_t rewrite = block.find("~>", colon);
  if (rewrite == std::string_view::npos) fail(colon, "expected '~>' in rule '" + r.name + "'");
  const std::size_t arrow = block.substr(0, rewrite).find("=>", colon);
  const std::size_t when = find_word(block, "when", rewrite);

  auto term_at = [&](std::size_t from, std::size_t to, TermMode mode) {
    const std::string_view src = block.substr(from, to - from);
    if (trim(src).empty()) fail(from, "empty term in rule '" + r.name + "'");
    return parse_term(src, mode, pos_at(from));
  };

  r.pattern = term_at(colon + 1, arrow == std::string_view::npos ? rewrite : arrow,
                      TermMode::Pattern);
  if (arrow != std::string_view::npos) {
    std::size_t from = arrow + 2;
    for (;;) {
      std::size_t semi = block.find(';', from);
      if (semi == std::string_view::npos || semi > rewrite) semi = rewrite;
      r.subtasks.push_back(term_at(from, semi, TermMode::Pattern));
      if (semi == rewrite) break;
      from = semi + 1;
    }
  }
  const std::size_t rebuild_end = when == std::string_view::npos ? block.size() : when;
  r.rebuild = term_at(rewrite + 2, rebuild_end, TermMode::Template);

  if (when != std::string_view::npos) {
    const std::string g(block.substr(when + 4));
    static const std::regex guard(R"(\s*([a-z]+)\s*\(([^)]*)\)\s*(,|$))");
    auto it = g.cbegin();
    std::smatch m;
    while (it != g.cend() && std::regex_search(it, g.cend(), m, guard,
                                               std::regex_constants::match_continuous)) {
      Guard gd;
      gd.name = m[1];
      for (auto a : split(std::string_view(m[2].first.base(), m[2].length()), ','))
        gd.args.emplace_back(trim(a));
      if (guard_arity(gd.name) == 0)
        fail(when, "unknown guard '" + gd.name + "' in rule '" + r.name + "'");
      if (gd.args.size() != guard_arity(gd.name))
        fail(when, "guard '" + gd.name + "' takes " + std::to_string(guard_arity(gd.name)) +
                       " argument(s)");
      r.guards.push_back(std::move(gd));
      it = m[0].second;
      if (m[3].length() == 0) break;
    }
    if (it != g.cend() && !trim(std::string_view(&*it, static_cast<std::size_t>(g.cend() - it))).empty())
      fail(when, "malformed guard list in rule '" + r.name + "'");
    if (r.guards.empty()) fail(when, "empty guard list in rule '" + r.name + "'");
  }

  // Every variable used outside the pattern must be bound by it.
  std::set<std::string> pv, pf;
  collect_vars(r.pattern, pv, pf);
  std::set<std::string> uv, uf;
  for (const auto& t : r.subtasks) collect_vars(t, uv, uf);
  collect_vars(r.rebuild, uv, uf);
  for (const auto& g : r.guards) uv.insert(g.args.begin(), g.args.end());
  for (const auto& v : uv) {
    if (v[0] == '$') {
      const std::size_t i = std::stoul(v.substr(1));
      if (i == 0 || i > r.subtasks.size())
        fail(rewrite, "rule '" + r.name + "' references " + v + " but has " +
                          std::to_string(r.subtasks.size()) + " subtask(s)");
    } else if (!pv.count(v)) {
      fail(0, "variable " + v + " of rule '" + r.name + "' does not occur in its pattern");
    }
  }
  for (const auto& f : uf)
    if (!pf.count(f))
      fail(0, "function variable " + f + " of rule '" + r.name + "' not bound by its pattern");
  return r;
}

}  // namespace

RulePack RulePack::parse(std::string_view text) {
  // Blank out comments, keeping offsets stable.
  std::string clean(text);
  for (std::size_t i = 0; i < clean.size(); ++i)
    if (clean[i] == '#')
      while (i < clean.size() && clean[i] != '\n') clean[i++] = ' ';

  std::vector<std::size_t> starts;
  for (std::size_t i = find_word(clean, "rule"); i != std::string_view::npos;
       i = find_word(clean, "rule", i + 1)) {
    // A block starts at `rule` as the first word of a line.
    std::size_t j = i;
    while (j > 0 && (clean[j - 1] == ' ' || clean[j - 1] == '\t')) --j;
    if (j == 0 || clean[j - 1] == '\n') starts.push_back(i);
  }
  if (!trim(std::string_view(clean).substr(0, starts.empty() ? clean.size() : starts.front())).empty())
    throw ParseError("expected 'rule'", position_at(text, 0));

  RulePack pack;
  std::set<std::string> names;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::size_t end = i + 1 < starts.size() ? starts[i + 1] : clean.size();
    Rule r = parse_rule(clean, starts[i], end);
    if (!names.insert(r.name).second)
      throw ParseError("duplicate rule '" + r.name + "'", r.pos, {}, "DuplicateRule");
    pack.rules.push_back(std::move(r));
  }
  return pack;
}

// ===========================================================================
// One-step successors

namespace {

void positions(const Term& t, std::vector<int>& path, std::vector<std::vector<int>>& out) {
  out.push_back(path);
  for (std::size_t i = 0; i < t->kids.size(); ++i) {
    path.push_back(static_cast<int>(i));
    positions(t->kids[i], path, out);
    path.pop_back();
  }
}

const Term& subterm(const Term& t, const std::vector<int>& path, std::size_t i = 0) {
  if (i == path.size()) return t;
  return subterm(t->kids[static_cast<std::size_t>(path[i])], path, i + 1);
}

Term replace(const Term& t, const std::vector<int>& path, const Term& with, std::size_t i = 0) {
  if (i == path.size()) return with;
  std::vector<Term> kids = t->kids;
  const auto k = static_cast<std::size_t>(path[i]);
  kids[k] = replace(kids[k], path, with, i + 1);
  return app(t->name, std::move(kids));
}

std::string path_string(const std::vector<int>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path[i]);
  }
  return s;
}

// Result of applying `r` with `s` at the position; subtasks are left in
// place, unsolved, so later steps can work on them.
Term apply_inline(const Rule& r, const Subst& s) {
  std::vector<Term> subs;
  for (const auto& st : r.subtasks) subs.push_back(instantiate(st, s));
  return instantiate(r.rebuild, s, subs);
}

}  // namespace

std::vector<Step> successors(const Term& t0, const RulePack& pack, bool expert_only) {
  const Term t = normalize(t0);
  std::vector<Step> out;
  std::vector<std::vector<int>> ps;
  std::vector<int> path;
  positions(t, path, ps);
  for (const auto& p : ps) {
    const Term& sub = subterm(t, p);
    for (const auto& r : pack.rules) {
      if (expert_only && r.kind != RuleKind::Expert) continue;
      for (const auto& s : match_all(r.pattern, sub)) {
        if (!guards_hold(r, s)) continue;
        Term result;
        try {
          result = normalize(replace(t, p, apply_inline(r, s)));
        } catch (const Error&) {
          continue;  // arithmetic outside the rational range
        }
        if (equal(result, t)) continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](const Step& st) {
          return st.rule == r.name && equal(st.result, result);
        });
        if (dup) continue;
        out.push_back({r.name, r.kind, r.tags, path_string(p), result});
      }
    }
  }
  return out;
}

// ===========================================================================
// Solution graph

SolutionGraph build_solution_graph(const Term& task, const RulePack& pack, int max_depth) {
  constexpr std::size_t kMaxNodes = 5000;
  SolutionGraph g;
  std::map<Term, int, TermLess> index;
  struct EdgeInfo {
    const Rule* rule = nullptr;
    Subst subst;
  };
  std::vector<EdgeInfo> info;

  auto add_node = [&](const Term& t, int depth) {
    if (auto it = index.find(t); it != index.end()) return it->second;
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({t, depth, std::nullopt});
    index.emplace(t, id);
    return id;
  };
  auto reaches = [&](int from, int to) {
    std::vector<int> stack{from};
    std::set<int> seen;
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      if (n == to) return true;
      if (!seen.insert(n).second) continue;
      for (const auto& e : g.edges)
        if (e.parent == n) stack.insert(stack.end(), e.children.begin(), e.children.end());
    }
    return false;
  };
  auto expert_applicable = [&](const Term& t) { return !successors(t, pack, true).empty(); };

  add_node(normalize(task), 0);
  std::queue<int> queue;
  queue.push(0);
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop();
    const Term t = g.nodes[static_cast<std::size_t>(n)].task;
    const int depth = g.nodes[static_cast<std::size_t>(n)].depth;

    std::vector<std::pair<GraphEdge, EdgeInfo>> pending;
    std::optional<Term> direct;

    // Decomposing rules at the root of the task.
    for (const auto& r : pack.rules) {
      if (r.kind != RuleKind::Expert || r.subtasks.empty()) continue;
      for (const auto& s : match_all(r.pattern, t)) {
        if (!guards_hold(r, s)) continue;
        GraphEdge e{n, r.name, {}, true};
        std::vector<Term> subs;
        for (const auto& st : r.subtasks) subs.push_back(instantiate(st, s));
        pending.push_back({e, {&r, s}});
        pending.back().first.children.assign(subs.size(), -1);
        // Children are materialized below; stash the terms in the subst.
        for (std::size_t i = 0; i < subs.size(); ++i)
          pending.back().second.subst.vars["$sub" + std::to_string(i)] = subs[i];
        break;
      }
    }
    // Rewrites anywhere in the task.
    for (const auto& step : successors(t, pack, true)) {
      const Rule* r = nullptr;
      for (const auto& cand : pack.rules)
        if (cand.name == step.rule) r = &cand;
      if (!r->subtasks.empty() && step.position.empty()) continue;
      if (!has_op(step.result, "d") && !expert_applicable(step.result)) {
        if (!direct) direct = step.result;
        continue;
      }
      GraphEdge e{n, step.rule, {-1}, false};
      Subst s;
      s.vars["$sub0"] = step.result;
      pending.push_back({e, {r, s}});
    }

    if (direct) {
      g.nodes[static_cast<std::size_t>(n)].result = direct;
      continue;
    }
    if (pending.empty()) {
      if (!has_op(t, "d")) g.nodes[static_cast<std::size_t>(n)].result = t;
      continue;
    }
    if (depth >= max_depth || g.nodes.size() >= kMaxNodes) {
      g.depth_exceeded = true;
      continue;
    }
    for (auto& [e, inf] : pending) {
      bool cyclic = false;
      std::vector<int> kids;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        const Term ct = inf.subst.vars.at("$sub" + std::to_string(i));
        const bool fresh = !index.count(ct);
        const int c = add_node(ct, depth + 1);
        if (fresh) queue.push(c);
        if (c == n || reaches(c, n)) cyclic = true;
        kids.push_back(c);
      }
      if (cyclic) continue;
      e.children = kids;
      g.edges.push_back(e);
      info.push_back(std::move(inf));
    }
  }

  // Propagate results bottom-up until nothing changes.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto& e = g.edges[i];
      auto& parent = g.nodes[static_cast<std::size_t>(e.parent)];
      if (parent.result) continue;
      std::vector<Term> solved;
      for (int c : e.children) {
        const auto& r = g.nodes[static_cast<std::size_t>(c)].result;
        if (!r) break;
        solved.push_back(*r);
      }
      if (solved.size() != e.children.size()) continue;
      parent.result = e.subtasks ? instantiate(info[i].rule->rebuild, info[i].subst, solved)
                                 : solved.front();
      changed = true;
    }
  }
  return g;
}

// ===========================================================================
// Diagnosis

int Explanation::buggy_steps() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                        [](const Step& s) { return s.kind == RuleKind::Buggy; }));
}

namespace {

struct Cost {
  int buggy = 0;
  std::size_t length = 0;
  std::vector<std::string> names;

  friend bool operator<(const Cost& a, const Cost& b) {
    return std::tie(a.buggy, a.length, a.names) < std::tie(b.buggy, b.length, b.names);
  }
};

Cost cost_of(const std::vector<Step>& steps) {
  Cost c;
  c.length = steps.size();
  for (const auto& s : steps) {
    if (s.kind == RuleKind::Buggy) ++c.buggy;
    c.names.push_back(s.rule);
  }
  return c;
}

}  // namespace

std::vector<Explanation> diagnose(const Term& task, const Term& answer, const RulePack& pack,
                                  DiagnoseOptions options) {
  const Term start = normalize(task);
  const Term goal = normalize(answer);
  if (equal(start, goal)) return {Explanation{}};

  struct Entry {
    Cost cost;
    Term term;
    std::vector<Step> path;
  };
  auto worse = [](const Entry& a, const Entry& b) { return b.cost < a.cost; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::map<Term, Cost, TermLess> best;
  std::vector<Explanation> found;

  open.push({Cost{}, start, {}});
  best[start] = Cost{};
  std::size_t expanded = 0;
  while (!open.empty() && expanded < options.state_cap) {
    Entry cur = open.top();
    open.pop();
    if (auto it = best.find(cur.term); it != best.end() && it->second < cur.cost) continue;
    if (static_cast<int>(cur.path.size()) >= options.max_steps) continue;
    ++expanded;
    for (auto& step : successors(cur.term, pack, false)) {
      std::vector<Step> path = cur.path;
      path.push_back(step);
      if (equal(step.result, goal)) {
        found.push_back({std::move(path)});
        continue;
      }
      Cost c = cost_of(path);
      auto it = best.find(step.result);
      if (it != best.end() && !(c < it->second)) continue;
      best[step.result] = c;
      open.push({std::move(c), step.result, std::move(path)});
    }
  }
  if (found.empty())
    throw Error("NoExplanation",
                "no rule path of at most " + std::to_string(options.max_steps) +
                    " steps explains " + to_string(goal));
  std::stable_sort(found.begin(), found.end(), [](const Explanation& a, const Explanation& b) {
    return cost_of(a.steps) < cost_of(b.steps);
  });
  return found;
}

}  // namespace exr::rw
