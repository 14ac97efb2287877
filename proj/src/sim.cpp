#include "exr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

namespace exr::sim {

using plan::Layer;
using plan::PlanPtr;

// ---------------------------------------------------------------------------
// Profiles

namespace {

double parse_number(std::string_view s, const std::string& what) {
  const std::string t(trim(s));
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error("InvalidProfile", "bad number '" + t + "' for " + what);
}

std::vector<std::pair<std::string, std::string>> assignments(std::string_view rest,
                                                               const std::string& clause) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string buf(rest);
  for (auto& c : buf)
    if (c == ',') c = ' ';
  for (auto item : split(buf, ' ')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw Error("InvalidProfile", "expected NAME=VALUE in '" + clause + "'");
    out.emplace_back(std::string(trim(item.substr(0, eq))), std::string(item.substr(eq + 1)));
  }
  return out;
}

}  // namespace

StudentProfile StudentProfile::parse(std::string_view text) {
  StudentProfile p;
  p.prefer.clear();
  bool have_prefer = false;
  std::string cleaned;
  for (auto line : split(text, '\n')) {
    const auto hash = line.find('#');
    cleaned += line.substr(0, hash);
    cleaned += ';';
  }
  for (auto clause : split(cleaned, ';')) {
    clause = trim(clause);
    if (clause.empty()) continue;
    std::size_t k = 0;
    while (k < clause.size() && (std::isalpha(static_cast<unsigned char>(clause[k])) || clause[k] == '_')) ++k;
    const std::string key = to_lower(clause.substr(0, k));
    auto rest = trim(clause.substr(k));
    const std::string whole(clause);
    if (key == "label" || key == "level" || key == "temperature") {
      if (rest.empty() || (rest[0] != ':' && rest[0] != '='))
        throw Error("ParseError", "expected ':' after '" + key + "'");
      rest = trim(rest.substr(1));
      if (key == "label") {
        p.label = std::string(rest);
      } else if (key == "level") {
        auto lv = bloom::parse_knowledge(rest);
        if (!lv) throw Error("InvalidProfile", "unknown knowledge level '" + std::string(rest) + "'");
        p.level = *lv;
      } else {
        p.temperature = parse_number(rest, "temperature");
      }
    } else if (key == "prefer") {
      have_prefer = true;
      for (const auto& [name, value] : assignments(rest, whole)) {
        auto l = plan::parse_layer(name);
        if (!l) throw Error("InvalidProfile", "unknown layer '" + name + "'");
        p.prefer[*l] = parse_number(value, "preference " + name);
      }
    } else if (key == "slip") {
      for (const auto& [name, value] : assignments(rest, whole)) {
        if (name != "P1" && name != "P2" && name != "P3" && name != "generic")
          throw Error("InvalidProfile", "unknown slip key '" + name + "' (P1, P2, P3, generic)");
        p.slip[name] = parse_number(value, "slip " + name);
      }
    } else {
      throw Error("ParseError", "unknown profile clause '" + whole + "'");
    }
  }
  if (!have_prefer) throw Error("InvalidProfile", "profile has no 'prefer' clause");
  double sum = 0;
  for (auto l : {Layer::Eval, Layer::DR, Layer::MDR}) {
    const double v = p.preference(l);
    if (v < 0 || v > 1) throw Error("InvalidProfile", "layer preferences must lie in [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error("InvalidProfile", "layer preferences sum to " + std::to_string(sum) + ", not 1");
  for (const auto& [k, v] : p.slip)
    if (!(v >= 0 && v <= 1)) throw Error("InvalidProfile", "slip " + k + " must lie in [0,1]");
  if (!(p.temperature > 0)) throw Error("InvalidProfile", "temperature must be positive");
  return p;
}

double StudentProfile::preference(Layer l) const {
  auto it = prefer.find(l);
  return it == prefer.end() ? 0.0 : it->second;
}

double StudentProfile::slip_for(const std::vector<plan::Pattern>& patterns) const {
  if (patterns.empty()) return 0.0;
  bool configured = false;
  double best = 0;
  for (auto pat : patterns) {
    auto it = slip.find(std::string(plan::to_string(pat)));
    if (it == slip.end()) continue;
    configured = true;
    best = std::max(best, it->second);
  }
  if (configured) return best;
  auto g = slip.find("generic");
  return g == slip.end() ? 0.0 : g->second;
}

// ---------------------------------------------------------------------------

std::string site_key(const PlanPtr& p) { return plan::render(p) + "@" + to_string(p->pos); }

namespace {

template <class... F>
struct Overload : F... {
  using F::operator()...;
};
template <class... F>
Overload(F...) -> Overload<F...>;

bloom::Cell atom_cell(const plan::Atom& a, const plan::VerbMap& verbs) {
  return verbs.lookup(a.verb, a.layer).value_or(plan::default_cell(a.layer));
}

// Effort weighted by how little the profile likes each layer.
double penalized_cost(const plan::PlanDoc& doc, const PlanPtr& p, const StudentProfile& prof,
                      const plan::VerbMap& verbs, const plan::Weights& w) {
  return std::visit(
      Overload{
          [&](const plan::Atom& a) {
            return plan::atom_score(atom_cell(a, verbs)) * (1.0 - prof.preference(a.layer));
          },
          [&](const plan::Seq& s) {
            return penalized_cost(doc, s.left, prof, verbs, w) +
                   penalized_cost(doc, s.right, prof, verbs, w);
          },
          [&](const plan::Choice& c) {
            return std::min(penalized_cost(doc, c.left, prof, verbs, w),
                            penalized_cost(doc, c.right, prof, verbs, w));
          },
          [&](const plan::Star& s) {
            return w.star_factor * penalized_cost(doc, s.body, prof, verbs, w);
          },
          [&](const plan::RuleRef& r) {
            return penalized_cost(doc, doc.rules.at(r.name), prof, verbs, w);
          },
      },
      p->node);
}

void flatten_choice(const PlanPtr& p, std::vector<PlanPtr>& out) {
  if (const auto* c = std::get_if<plan::Choice>(&p->node)) {
    flatten_choice(c->left, out);
    flatten_choice(c->right, out);
  } else {
    out.push_back(p);
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct ChoiceSite {
  std::string key;
  std::vector<PlanPtr> branches;
  std::vector<double> cumulative;
};

struct DropSite {
  PlanPtr smaller;
  std::string key;
  double slip = 0;
};

class Walker {
 public:
  Walker(const plan::PlanDoc& doc, const StudentProfile& prof, const plan::VerbMap& verbs,
         const plan::Weights& w)
      : doc_(doc), prof_(prof), verbs_(verbs), w_(w) {
    iterations_ = std::max(1L, std::lround(w.star_factor));
    for (const auto& m : plan::missing_path_lint(doc, verbs, w)) {
      // The flagged Seq is the parent of `smaller`; find it by identity.
      DropSite d;
      d.smaller = m.smaller;
      d.key = site_key(m.smaller);
      const PlanPtr seq = parent_seq(m.smaller);
      if (!seq) continue;
      auto sigs = plan::signatures(doc, seq, w.path_bound);
      if (!sigs)
        throw Error("PathExplosion", "too many paths to simulate at " + site_key(seq), seq->pos);
      d.slip = prof.slip_for(plan::detect_patterns(*sigs));
      drops_[seq.get()] = d;
    }
  }

  void prepare_choices(SimOutcome& out) {
    visit_all([&](const PlanPtr& p, bool flattened_child) {
      if (flattened_child || !std::holds_alternative<plan::Choice>(p->node)) return;
      ChoiceSite site;
      site.key = site_key(p);
      const auto stats = choice_probabilities(doc_, p, prof_, verbs_, w_);
      flatten_choice(p, site.branches);
      double acc = 0;
      for (double q : stats.probabilities) site.cumulative.push_back(acc += q);
      out.branches[site.key] = stats;
      choices_[p.get()] = std::move(site);
    });
  }

  // Returns the site keys missed during one walk.
  void walk(const PlanPtr& p, std::mt19937_64& rng, std::set<std::string>& missed,
            SimOutcome& out) {
    std::visit(Overload{
                   [&](const plan::Atom& a) {
                     const auto cell = atom_cell(a, verbs_);
                     const auto dyn = bloom::dynamic_cell(cell, prof_.level);
                     if (dyn.process == bloom::Process::Create && prof_.level < cell.knowledge)
                       missed.insert(site_key(p));
                   },
                   [&](const plan::Seq& s) {
                     auto it = drops_.find(p.get());
                     if (it != drops_.end() && it->second.slip > 0 && unit(rng) < it->second.slip) {
                       missed.insert(it->second.key);
                       const PlanPtr& keep = it->second.smaller == s.left ? s.right : s.left;
                       walk(keep, rng, missed, out);
                       return;
                     }
                     walk(s.left, rng, missed, out);
                     walk(s.right, rng, missed, out);
                   },
                   [&](const plan::Choice&) {
                     auto& site = choices_.at(p.get());
                     const double u = unit(rng);
                     std::size_t k = 0;
                     while (k + 1 < site.cumulative.size() && u >= site.cumulative[k]) ++k;
                     ++out.branches[site.key].counts[k];
                     walk(site.branches[k], rng, missed, out);
                   },
                   [&](const plan::Star& s) {
                     for (long i = 0; i < iterations_; ++i) walk(s.body, rng, missed, out);
                   },
                   [&](const plan::RuleRef& r) { walk(doc_.rules.at(r.name), rng, missed, out); },
               },
               p->node);
  }

 private:
  template <class F>
  void visit_all(F&& f) {
    std::set<const plan::Plan*> seen;
    auto go = [&](auto&& self, const PlanPtr& p, bool flat) -> void {
      if (!seen.insert(p.get()).second) return;
      f(p, flat);
      std::visit(Overload{
                     [&](const plan::Atom&) {},
                     [&](const plan::Seq& s) {
                       self(self, s.left, false);
                       self(self, s.right, false);
                     },
                     [&](const plan::Choice& c) {
                       // Direct Choice children belong to this site.
                       self(self, c.left, std::holds_alternative<plan::Choice>(c.left->node));
                       self(self, c.right, std::holds_alternative<plan::Choice>(c.right->node));
                     },
                     [&](const plan::Star& s) { self(self, s.body, false); },
                     [&](const plan::RuleRef&) {},
                 },
                 p->node);
    };
    for (const auto& name : doc_.rule_order) go(go, doc_.rules.at(name), false);
    go(go, doc_.root, false);
  }

  PlanPtr parent_seq(const PlanPtr& child) {
    PlanPtr found;
    visit_all([&](const PlanPtr& p, bool) {
      if (const auto* s = std::get_if<plan::Seq>(&p->node))
        if (s->left == child || s->right == child) found = p;
    });
    return found;
  }

  const plan::PlanDoc& doc_;
  const StudentProfile& prof_;
  const plan::VerbMap& verbs_;
  const plan::Weights& w_;
  long iterations_ = 1;
  std::unordered_map<const plan::Plan*, DropSite> drops_;
  std::unordered_map<const plan::Plan*, ChoiceSite> choices_;
};

}  // namespace

BranchStats choice_probabilities(const plan::PlanDoc& doc, const PlanPtr& choice,
                                 const StudentProfile& profile, const plan::VerbMap& verbs,
                                 const plan::Weights& w) {
  if (!std::holds_alternative<plan::Choice>(choice->node))
    throw Error("NotAChoice", "choice_probabilities needs a Choice node");
  std::vector<PlanPtr> branches;
  flatten_choice(choice, branches);
  BranchStats st;
  std::vector<double> logits;
  for (const auto& b : branches) {
    st.branches.push_back(plan::render(b));
    logits.push_back(-penalized_cost(doc, b, profile, verbs, w) / profile.temperature);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double l : logits) z += std::exp(l - top);
  for (double l : logits) st.probabilities.push_back(std::exp(l - top) / z);
  st.counts.assign(branches.size(), 0);
  return st;
}

SimOutcome simulate(const plan::PlanDoc& doc, const StudentProfile& profile,
                    const plan::VerbMap& verbs, const plan::Weights& w, std::uint64_t seed,
                    std::size_t trials) {
  if (trials == 0) throw Error("InvalidArgument", "trials must be at least 1");
  SimOutcome out;
  out.trials = trials;
  Walker walker(doc, profile, verbs, w);
  walker.prepare_choices(out);
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(t)));
    std::set<std::string> missed;
    walker.walk(doc.root, rng, missed, out);
    if (missed.empty()) ++out.solved;
    for (const auto& k : missed) ++out.misses[k];
  }
  return out;
}

}  // namespace exr::sim
