#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <set>

#include "exr/defaults.hpp"
#include "exr/plan.hpp"
#include "oracles.hpp"

using namespace exr;
using namespace exr::plan;
using bloom::Cell;
using bloom::Knowledge;
using bloom::Process;

namespace {

const VerbMap& verbs() {
  static const VerbMap v = VerbMap::parse(defaults::verb_map());
  return v;
}
const Weights& weights() {
  static const Weights w = Weights::parse(defaults::weights());
  return w;
}

Report type_text(const std::string& src) { return type_plan(parse_plan(src), verbs(), weights()); }

std::string error_code(const std::string& src) {
  try {
    parse_plan(src);
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

}  // namespace

TEST(Plan, Fig2Typing) {
  const auto doc = parse_plan("read(DR) ; infer_intent(MDR) ; count_manual(Eval) ; conclude(DR)");
  // Four atoms chained by Seq.
  int atoms = 0;
  std::function<void(const PlanPtr&)> count = [&](const PlanPtr& p) {
    if (std::holds_alternative<Atom>(p->node)) ++atoms;
    if (auto* s = std::get_if<Seq>(&p->node)) {
      count(s->left);
      count(s->right);
    }
  };
  ASSERT_TRUE(std::holds_alternative<Seq>(doc.root->node));
  count(doc.root);
  EXPECT_EQ(atoms, 4);
  const auto r = type_plan(doc, verbs(), weights());
  EXPECT_EQ(r.cell_max_path, (Cell{Process::Evaluate, Knowledge::Procedural}));
  EXPECT_EQ(r.cell_min_path, r.cell_max_path);
  // 2 + 5 + 5 + 6 under 1 + ranks.
  EXPECT_DOUBLE_EQ(r.effort_min, 18.0);
  EXPECT_DOUBLE_EQ(r.effort_max, 18.0);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.signatures.size(), 1u);
  EXPECT_EQ(r.signatures[0], (Signature{Layer::DR, Layer::MDR, Layer::Eval, Layer::DR}));
}

TEST(Plan, SingleAtom) {
  const auto r = type_text("execute(Eval)");
  EXPECT_EQ(r.cell_min_path, (Cell{Process::Apply, Knowledge::Procedural}));
  EXPECT_EQ(r.cell_min_path, r.cell_max_path);
  EXPECT_DOUBLE_EQ(r.effort_min, r.effort_max);
  EXPECT_DOUBLE_EQ(r.effort_min, 5.0);
}

TEST(Plan, ChoiceBoundsExample) {
  // compare = 3; recall + conclude = 1 + 6.
  const auto r = type_text("compare(DR) | (recall(DR) ; conclude(DR))");
  EXPECT_DOUBLE_EQ(r.effort_min, 3.0);
  EXPECT_DOUBLE_EQ(r.effort_max, 7.0);
}

TEST(Plan, ParseErrors) {
  EXPECT_EQ(error_code("a(DR) ; )"), "ParseError");
  EXPECT_EQ(error_code("a(XYZ)"), "ParseError");
  EXPECT_EQ(error_code(""), "ParseError");
  EXPECT_EQ(error_code("Missing ; a(DR)"), "UndefinedRule");
  EXPECT_EQ(error_code("Loop => a(DR) ; Loop. Loop"), "RecursiveRule");
  try {
    parse_plan("a(DR) ;\n  ; b(DR)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 2);
    EXPECT_EQ(e.pos().column, 3);
  }
}

TEST(Plan, RulesExpand) {
  const auto r = type_text("Check => run(Eval) | read(DR).\nCheck ; conclude(DR)");
  EXPECT_DOUBLE_EQ(r.effort_min, 2.0 + 6.0);
  EXPECT_DOUBLE_EQ(r.effort_max, 5.0 + 6.0);
  const auto doc = parse_plan("Check => run(Eval) | read(DR).\nCheck ; conclude(DR)");
  EXPECT_EQ(render(parse_plan(render(doc))), render(doc));
}

TEST(Plan, UnmappedDefaults) {
  auto r = type_text("frobnicate(Eval)");
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].code, "Unmapped");
  EXPECT_EQ(r.cell_max_path, (Cell{Process::Apply, Knowledge::Procedural}));
  r = type_text("frobnicate(MDR)");
  EXPECT_EQ(r.cell_max_path, (Cell{Process::Understand, Knowledge::Conceptual}));
}

TEST(Plan, Patterns) {
  using L = Layer;
  EXPECT_EQ(detect_patterns(Signature{L::DR, L::Eval, L::DR, L::Eval, L::DR}),
            std::vector<Pattern>{Pattern::P1});
  EXPECT_EQ(detect_patterns(Signature{L::MDR, L::DR, L::Eval}), std::vector<Pattern>{Pattern::P3});
  EXPECT_TRUE(detect_patterns(Signature{L::DR}).empty());
  EXPECT_EQ(detect_patterns(Signature{L::DR, L::MDR, L::DR, L::Eval}),
            (std::vector<Pattern>{Pattern::P2, Pattern::P3}));
  EXPECT_EQ(describe(Pattern::P2), "P2-abstraction");
}

TEST(Plan, StarUnrolledOnceInSignatures) {
  const auto r = type_text("(read(DR) ; run(Eval))* ; read(DR)");
  ASSERT_EQ(r.signatures.size(), 1u);
  EXPECT_EQ(r.signatures[0], (Signature{Layer::DR, Layer::Eval, Layer::DR}));
  EXPECT_EQ(r.patterns, std::vector<Pattern>{Pattern::P1});
}

TEST(Plan, PathExplosion) {
  std::string src = "(a(DR) | b(Eval))";
  for (int i = 0; i < 6; ++i) src += " ; (a(DR) | b(Eval))";
  const auto r = type_text(src);
  EXPECT_TRUE(r.truncated);
  EXPECT_TRUE(std::any_of(r.warnings.begin(), r.warnings.end(),
                          [](const Finding& f) { return f.code == "PathExplosion"; }));
}

TEST(Plan, MissingPathExamples) {
  // (conclude)* = 12, read = 2.
  auto doc = parse_plan("(conclude(DR))* ; read(DR)");
  auto m = missing_path_lint(doc, verbs(), weights());
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m[0].ratio, 6.0);
  EXPECT_EQ(render(m[0].smaller), "read(DR)");

  doc = parse_plan("infer_intent(MDR) ; check_bounds(Eval)");  // 5 vs 4
  EXPECT_TRUE(missing_path_lint(doc, verbs(), weights()).empty());
}

TEST(Plan, ExtendedLeedsFlagsBoundsCheck) {
  const auto doc = parse_plan(
      "read(DR) ; infer_intent(MDR) ; count_manual(DR) ; conclude(DR) ; check_bounds(Eval)");
  const auto m = missing_path_lint(doc, verbs(), weights());
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(render(m[0].smaller), "check_bounds(Eval)");
  EXPECT_GE(m[0].ratio, 4.0);
  EXPECT_DOUBLE_EQ(m[0].ratio, 18.0 / 4.0);
  const auto f = to_finding(m[0]);
  EXPECT_EQ(f.code, "MissingPath");
  EXPECT_EQ(f.pos.column, 66);
}

TEST(Plan, TargetDiscrepancies) {
  const auto r = type_text("read(DR) ; infer_intent(MDR) ; count_manual(Eval) ; conclude(DR)");
  auto d = target_discrepancies({Process::Understand, Knowledge::Conceptual}, r, {});
  EXPECT_EQ(d.size(), 2u);
  d = target_discrepancies(r.cell_max_path, r, {});
  EXPECT_TRUE(d.empty());
}

// ---------------------------------------------------------------------------
// Random plans against a path-enumeration oracle.

using namespace exr::oracle;

TEST(PlanProperty, RandomPlansMatchOracle) {
  std::mt19937_64 rng(2024);
  const double k = weights().star_factor;
  int checked = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto g = gen(rng, 6);
    const auto src = text(g);
    const auto doc = parse_plan(src);
    const auto r = type_plan(doc, verbs(), weights());
    SCOPED_TRACE(src);

    EXPECT_LE(r.effort_min, r.effort_max);
    EXPECT_TRUE(bloom::leq(r.cell_min_path, r.cell_max_path));
    EXPECT_EQ(r.cell_max_path, all_atoms_join(g));
    EXPECT_EQ(render(parse_plan(render(doc))), render(doc));

    if (path_count(g) > 4096) continue;
    ++checked;
    const auto ps = paths(g, k);
    double lo = ps[0].effort, hi = ps[0].effort;
    for (const auto& p : ps) {
      lo = std::min(lo, p.effort);
      hi = std::max(hi, p.effort);
    }
    EXPECT_NEAR(r.effort_min, lo, 1e-9);
    EXPECT_NEAR(r.effort_max, hi, 1e-9);
    bool witnessed = false;
    for (const auto& p : ps)
      if (std::abs(p.effort - lo) < 1e-9 && p.cell == r.cell_min_path) witnessed = true;
    EXPECT_TRUE(witnessed) << "cell_min_path is not the cell of a cheapest path";

    if (ps.size() <= weights().path_bound) {
      ASSERT_FALSE(r.truncated);
      std::set<Signature> want, got(r.signatures.begin(), r.signatures.end());
      bool p1 = false, p2 = false, p3 = false;
      for (const auto& p : ps) {
        const auto s = collapse(p.layers);
        want.insert(s);
        p1 |= contains_run(s, {Layer::DR, Layer::Eval, Layer::DR});
        p2 |= contains_run(s, {Layer::DR, Layer::MDR, Layer::DR});
        p3 |= contains_run(s, {Layer::MDR, Layer::DR, Layer::Eval});
      }
      EXPECT_EQ(got, want);
      EXPECT_EQ(got.size(), r.signatures.size());
      std::vector<Pattern> pats;
      if (p1) pats.push_back(Pattern::P1);
      if (p2) pats.push_back(Pattern::P2);
      if (p3) pats.push_back(Pattern::P3);
      EXPECT_EQ(r.patterns, pats);
    }
  }
  EXPECT_GT(checked, 700);
}

TEST(PlanProperty, CombinatorInvariants) {
  std::mt19937_64 rng(77);
  const double k = weights().star_factor;
  for (int n = 0; n < 1000; ++n) {
    const auto a = text(gen(rng, 5));
    const auto b = text(gen(rng, 5));
    const auto ta = type_text(a), tb = type_text(b);
    const auto seq = type_text("(" + a + ") ; (" + b + ")");
    const auto cho = type_text("(" + a + ") | (" + b + ")");
    const auto star = type_text("(" + a + ")*");
    SCOPED_TRACE(a + "  //  " + b);

    EXPECT_TRUE(bloom::leq(ta.cell_max_path, seq.cell_max_path));
    EXPECT_TRUE(bloom::leq(tb.cell_max_path, seq.cell_max_path));
    EXPECT_NEAR(seq.effort_min, ta.effort_min + tb.effort_min, 1e-9);
    EXPECT_NEAR(seq.effort_max, ta.effort_max + tb.effort_max, 1e-9);

    EXPECT_NEAR(cho.effort_min, std::min(ta.effort_min, tb.effort_min), 1e-9);
    EXPECT_NEAR(cho.effort_max, std::max(ta.effort_max, tb.effort_max), 1e-9);

    EXPECT_EQ(star.cell_min_path, ta.cell_min_path);
    EXPECT_EQ(star.cell_max_path, ta.cell_max_path);
    EXPECT_NEAR(star.effort_min, k * ta.effort_min, 1e-9);
    EXPECT_NEAR(star.effort_max, k * ta.effort_max, 1e-9);

    // Determinism.
    const auto again = type_text(a);
    EXPECT_EQ(again.effort_min, ta.effort_min);
    EXPECT_EQ(again.cell_min_path, ta.cell_min_path);
    EXPECT_EQ(again.signatures, ta.signatures);
    EXPECT_EQ(again.warnings, ta.warnings);
  }
}

TEST(PlanProperty, LintSoundness) {
  std::mt19937_64 rng(5);
  const double k = weights().star_factor;
  const double thr = weights().missing_path_ratio;
  int flagged_total = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto g = gen(rng, 4);
    const auto doc = parse_plan(text(g));
    const auto m = missing_path_lint(doc, verbs(), weights());
    std::vector<double> ratios;
    seq_ratios(g, k, ratios);
    std::vector<double> want;
    for (double x : ratios)
      if (x >= thr) want.push_back(x);
    std::vector<double> got;
    for (const auto& f : m) {
      EXPECT_GE(f.ratio, thr);
      got.push_back(f.ratio);
    }
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got.size(), want.size()) << text(g);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
    flagged_total += static_cast<int>(got.size());
  }
  EXPECT_GT(flagged_total, 0);
}

TEST(PlanProperty, RenderRoundTripRandom) {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 500; ++n) {
    const auto doc = parse_plan(text(gen(rng, 6)));
    const auto once = render(doc);
    const auto doc2 = parse_plan(once);
    EXPECT_EQ(render(doc2), once);
    const auto a = type_plan(doc, verbs(), weights());
    const auto b = type_plan(doc2, verbs(), weights());
    EXPECT_EQ(a.effort_min, b.effort_min);
    EXPECT_EQ(a.effort_max, b.effort_max);
    EXPECT_EQ(a.signatures, b.signatures);
  }
}
