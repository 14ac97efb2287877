#include <gtest/gtest.h>

#include <random>

#include "exr/defaults.hpp"
#include "exr/spec.hpp"
#include "support.hpp"

using namespace exr;
using namespace exr::spec;

namespace {

const std::vector<std::string> kCorpus = {"leeds-q2.exr",    "ml-bindings.exr",
                                          "maxpos.exr",      "for-loop.exr",
                                          "getter-setter.exr", "for-loop-generated.exr"};

const OptionResult& option(const ValidationReport& r, char key) {
  for (const auto& o : r.options)
    if (o.key == key) return o;
  throw std::runtime_error("no option");
}

bool has_code(const std::vector<Finding>& fs, const std::string& code) {
  for (const auto& f : fs)
    if (f.code == code) return true;
  return false;
}

std::string expect_parse_error(const std::string& src) {
  try {
    parse_spec(src);
  } catch (const ParseError& e) {
    return e.code();
  } catch (const Error& e) {
    return "Error:" + e.code();
  }
  return "none";
}

const char* kMinimal = R"(exercise "t" {
  target: Apply x Procedural;
  question {
```
int x = 1 + 1;
```
  }
  mcq {
    a: "2" * expect x = 2
    b: "3" expect x = 3
  }
  plan { run(Eval) }
}
)";

}  // namespace

TEST(SpecDsl, CorpusParses) {
  for (const auto& name : kCorpus) {
    SCOPED_TRACE(name);
    const auto s = parse_spec(test::corpus(name));
    EXPECT_FALSE(s.id.empty());
    EXPECT_TRUE(s.plan.has_value());
    EXPECT_TRUE(s.declared_target.has_value());
  }
}

TEST(SpecDsl, LeedsStructure) {
  const auto s = parse_spec(test::corpus("leeds-q2.exr"));
  EXPECT_EQ(s.id, "leeds-q2");
  EXPECT_EQ(s.mode, Mode::Mcq);
  ASSERT_EQ(s.options.size(), 4u);
  ASSERT_NE(s.correct_option(), nullptr);
  EXPECT_EQ(s.correct_option()->key, 'b');
  EXPECT_EQ(s.options[0].tag, "intended_function");
  ASSERT_EQ(s.code.size(), 1u);
  EXPECT_EQ(s.code[0].pos.line, 8);
  EXPECT_EQ(s.target(), (bloom::Cell{bloom::Process::Analyze, bloom::Knowledge::Conceptual}));
  EXPECT_EQ(s.prerequisites, (std::vector<std::string>{"array", "while-loop", "sorted-array"}));
}

TEST(SpecDsl, RoundTripCorpus) {
  for (const auto& name : kCorpus) {
    SCOPED_TRACE(name);
    const auto s = parse_spec(test::corpus(name));
    const auto text = render(s);
    const auto back = parse_spec(text);
    EXPECT_TRUE(equivalent(s, back)) << text;
    EXPECT_EQ(render(back), text);
  }
}

TEST(SpecDsl, ValidateLeeds) {
  const auto r = validate_spec(parse_spec(test::corpus("leeds-q2.exr")), 100000);
  ASSERT_TRUE(r.effect.has_value());
  EXPECT_EQ(lang::find_binding(r.effect->bindings, "count")->as_int(), 2);
  EXPECT_EQ(option(r, 'b').verdict, Verdict::Confirmed);
  EXPECT_EQ(option(r, 'a').verdict, Verdict::Refuted);
  EXPECT_EQ(option(r, 'c').verdict, Verdict::Refuted);
  EXPECT_EQ(option(r, 'd').verdict, Verdict::Refuted);
  EXPECT_EQ(r.errors(), 0u);
}

TEST(SpecDsl, ValidateFig8) {
  const auto s = parse_spec(test::corpus("for-loop.exr"));
  const auto r = validate_spec(s, 1000);
  EXPECT_EQ(r.effect->stdout_text, "0 2 ");
  EXPECT_EQ(option(r, 'c').verdict, Verdict::Confirmed);
  for (char k : {'a', 'b', 'd', 'e'}) EXPECT_EQ(option(r, k).verdict, Verdict::Refuted) << k;
  EXPECT_EQ(r.errors(), 0u);
}

TEST(SpecDsl, ValidateIsPure) {
  const auto s = parse_spec(test::corpus("maxpos.exr"));
  const auto before = render(s);
  const auto a = validate_spec(s, 10000);
  const auto b = validate_spec(s, 10000);
  EXPECT_EQ(render(s), before);
  ASSERT_EQ(a.options.size(), b.options.size());
  for (std::size_t i = 0; i < a.options.size(); ++i) {
    EXPECT_EQ(a.options[i].verdict, b.options[i].verdict);
    EXPECT_EQ(a.options[i].detail, b.options[i].detail);
  }
  EXPECT_EQ(a.findings, b.findings);
}

TEST(SpecDsl, FillModeMaxpos) {
  const auto s = parse_spec(test::corpus("maxpos.exr"));
  EXPECT_TRUE(s.fill);
  const auto r = validate_spec(s, 10000);
  EXPECT_EQ(r.errors(), 0u);
  EXPECT_EQ(option(r, 'd').verdict, Verdict::Confirmed);
  // Loops b and e read past the array end.
  EXPECT_EQ(option(r, 'b').verdict, Verdict::EvaluationFailed);
  EXPECT_EQ(option(r, 'e').verdict, Verdict::EvaluationFailed);
}

TEST(SpecDsl, ValidatedSpecHasExactlyOneMatchingOption) {
  for (const auto& name : kCorpus) {
    const auto s = parse_spec(test::corpus(name));
    if (s.mode != Mode::Mcq || s.fill) continue;
    const auto r = validate_spec(s, 100000);
    ASSERT_EQ(r.errors(), 0u) << name;
    int matching = 0;
    for (const auto& o : s.options)
      if (o.expect && facet_holds(*o.expect, *r.effect)) ++matching;
    EXPECT_EQ(matching, 1) << name;
  }
}

TEST(SpecDsl, CorrectOptionMismatch) {
  auto src = test::corpus("leeds-q2.exr");
  src.replace(src.find("\"3\" expect"), 10, "\"3\" * expect");
  src.replace(src.find("\"2\" * expect"), 12, "\"2\" expect");
  const auto s = parse_spec(src);
  EXPECT_EQ(s.correct_option()->key, 'a');
  const auto r = validate_spec(s, 100000);
  EXPECT_TRUE(has_code(r.findings, "CorrectOptionMismatch"));
  EXPECT_GT(r.errors(), 0u);
}

TEST(SpecDsl, DegenerateDistractor) {
  std::string src = kMinimal;
  src.replace(src.find("x = 3"), 5, "x = 2");
  const auto r = validate_spec(parse_spec(src), 100);
  EXPECT_TRUE(has_code(r.findings, "DegenerateDistractor"));
}

TEST(SpecDsl, ParseErrors) {
  std::string two_correct = kMinimal;
  two_correct.replace(two_correct.find("\"3\" expect"), 10, "\"3\" * expect");
  EXPECT_EQ(expect_parse_error(two_correct), "MultipleCorrectOptions");

  std::string none_correct = kMinimal;
  none_correct.replace(none_correct.find("\"2\" *"), 5, "\"2\"");
  EXPECT_EQ(expect_parse_error(none_correct), "MissingCorrectOption");

  std::string dup = kMinimal;
  dup.replace(dup.find("b: \"3\""), 1, "a");
  EXPECT_EQ(expect_parse_error(dup), "DuplicateOptionKey");

  EXPECT_EQ(expect_parse_error("exercise \"x\" {"), "ParseError");
  EXPECT_EQ(expect_parse_error("exercise \"x\" { target: Apply x Nothing; }"), "ParseError");
}

TEST(SpecDsl, CodeErrorPositionIsAbsolute) {
  std::string src = kMinimal;
  src.replace(src.find("1 + 1;"), 6, "1 + ;");
  try {
    parse_spec(src);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 5);
    EXPECT_EQ(e.pos().column, 13);
  }
}

TEST(SpecDsl, DefaultTargetWarning) {
  std::string src = kMinimal;
  src.erase(src.find("  target:"), std::string("  target: Apply x Procedural;\n").size());
  const auto s = parse_spec(src);
  EXPECT_FALSE(s.declared_target.has_value());
  EXPECT_EQ(s.target(), (bloom::Cell{bloom::Process::Understand, bloom::Knowledge::Conceptual}));
  EXPECT_TRUE(has_code(s.warnings, "DefaultTarget"));
}

TEST(SpecDsl, ConsistencyLeeds) {
  const auto s = parse_spec(test::corpus("leeds-q2.exr"));
  const auto verbs = plan::VerbMap::parse(defaults::verb_map());
  const auto w = plan::Weights::parse(defaults::weights());
  const auto c = consistency_check(s, verbs, w);
  EXPECT_TRUE(has_code(c.findings, "TargetDiscrepancy"));
  EXPECT_TRUE(has_code(c.findings, "MissingPath"));
}

TEST(SpecDsl, ConsistencyMissingPlan) {
  std::string src = kMinimal;
  src.erase(src.find("  plan {"), std::string("  plan { run(Eval) }\n").size());
  const auto s = parse_spec(src);
  const auto c = consistency_check(s, plan::VerbMap::parse(defaults::verb_map()),
                                   plan::Weights::parse(defaults::weights()));
  EXPECT_TRUE(has_code(c.findings, "MissingPlan"));
}

TEST(SpecDsl, DeclaredEqualsComputedHasNoDiscrepancy) {
  // run(Eval) types to (Apply, Procedural), the declared target.
  const auto s = parse_spec(kMinimal);
  const auto c = consistency_check(s, plan::VerbMap::parse(defaults::verb_map()),
                                   plan::Weights::parse(defaults::weights()));
  EXPECT_FALSE(has_code(c.findings, "TargetDiscrepancy"));
}

TEST(SpecDslProperty, RandomSpecsRoundTrip) {
  std::mt19937_64 rng(99);
  for (int n = 0; n < 200; ++n) {
    const int k = 2 + static_cast<int>(rng() % 5);
    const int correct = static_cast<int>(rng() % k);
    const int v = static_cast<int>(rng() % 50);
    std::string src = "exercise \"r" + std::to_string(n) + "\" {\n";
    if (rng() % 2) src += "  target: Analyze x Procedural;\n";
    if (rng() % 2) src += "  requires: a, b-c;\n";
    src += "  question {\nWhat is y?\n```\nint y = " + std::to_string(v) + " * 2;\n```\n  }\n";
    src += "  mcq {\n";
    for (int i = 0; i < k; ++i) {
      const int val = i == correct ? 2 * v : 2 * v + i + 1;
      src += std::string("    ") + static_cast<char>('a' + i) + ": \"" + std::to_string(val) + "\"" +
             (i == correct ? " *" : "") + " expect y = " + std::to_string(val) +
             (rng() % 3 == 0 ? " tag t" + std::to_string(i) : "") + "\n";
    }
    src += "  }\n  plan { read(DR) ; (run(Eval) | abstract(MDR))* }\n}\n";
    const auto s = parse_spec(src);
    EXPECT_TRUE(equivalent(s, parse_spec(render(s)))) << src;
    EXPECT_EQ(validate_spec(s, 100).errors(), 0u) << src;
  }
}
