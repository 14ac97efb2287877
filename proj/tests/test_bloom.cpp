#include <gtest/gtest.h>

#include <random>

#include "exr/bloom.hpp"
#include "exr/defaults.hpp"

using namespace exr;
using namespace exr::bloom;

namespace {

const ClueTable& clues() {
  static const ClueTable t = ClueTable::parse(defaults::clues());
  return t;
}

std::optional<Cell> classify_text(const std::string& s) {
  return classify(normalize_statement(s, clues()), clues()).cell;
}

}  // namespace

TEST(Bloom, Ranks) {
  for (int i = 0; i < 6; ++i) EXPECT_EQ(rank(kProcesses[i]), i);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(rank(kKnowledge[i]), i);
  EXPECT_EQ(parse_process("analyze"), Process::Analyze);
  EXPECT_EQ(parse_knowledge("METACOGNITIVE"), Knowledge::Metacognitive);
  EXPECT_FALSE(parse_process("Synthesis").has_value());
}

TEST(Bloom, NormalizeStatements) {
  auto s = normalize_statement("To be able to distinguish between an interpreter and a compiler",
                               clues());
  EXPECT_EQ(s.verb, "distinguish");
  EXPECT_EQ(s.np, (std::vector<std::string>{"interpreter", "compiler"}));
  s = normalize_statement("List primitive data types in a language", clues());
  EXPECT_EQ(s.verb, "list");
  EXPECT_EQ(s.np, (std::vector<std::string>{"primitive-data-type", "language"}));
  try {
    normalize_statement("", clues());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "CannotNormalize");
  }
}

TEST(Bloom, TaxonomyTableExamples) {
  EXPECT_EQ(classify_text("List primitive data types in a language"),
            (Cell{Process::Remember, Knowledge::Factual}));
  EXPECT_EQ(classify_text("Decompose a structured concept in its parts"),
            (Cell{Process::Analyze, Knowledge::Conceptual}));
  EXPECT_EQ(classify_text("How to implement a sort algorithm"),
            (Cell{Process::Understand, Knowledge::Procedural}));
  EXPECT_EQ(classify_text("Criticize learning programming methodology"),
            (Cell{Process::Evaluate, Knowledge::Metacognitive}));
}

TEST(Bloom, InterpreterCompiler) {
  EXPECT_EQ(classify_text("To be able to distinguish between an interpreter and a compiler"),
            (Cell{Process::Analyze, Knowledge::Conceptual}));
}

TEST(Bloom, Unclassifiable) {
  auto c = classify({"distinguish", {"quux"}}, clues());
  EXPECT_FALSE(c.cell);
  EXPECT_EQ(c.missing_side(), "noun");
  c = classify({"ponder", {"compiler"}}, clues());
  EXPECT_EQ(c.missing_side(), "verb");
  c = classify({"ponder", {"quux"}}, clues());
  EXPECT_EQ(c.missing_side(), "both");
}

TEST(Bloom, CompoundNounTakesMax) {
  const auto c = classify({"list", {"keyword", "algorithm", "compiler"}}, clues());
  EXPECT_EQ(c.cell, (Cell{Process::Remember, Knowledge::Procedural}));
}

TEST(Bloom, DynamicCell) {
  const Cell ap{Process::Apply, Knowledge::Procedural};
  EXPECT_EQ(dynamic_cell(ap, Knowledge::Conceptual), (Cell{Process::Create, Knowledge::Procedural}));
  EXPECT_EQ(dynamic_cell(ap, Knowledge::Procedural), ap);
  const Cell rf{Process::Remember, Knowledge::Factual};
  EXPECT_EQ(dynamic_cell(rf, Knowledge::Factual), rf);
}

TEST(Bloom, DynamicCellProperties) {
  for (Process p : kProcesses)
    for (Knowledge k : kKnowledge)
      for (Knowledge s : kKnowledge) {
        const Cell c{p, k};
        const Cell d = dynamic_cell(c, s);
        EXPECT_TRUE(leq(c, d));
        EXPECT_EQ(dynamic_cell(d, s), d);
        EXPECT_EQ(d.knowledge, k);
        EXPECT_EQ(d == c, rank(s) >= rank(k) || p == Process::Create);
      }
}

TEST(Bloom, CourseLevelAllCells) {
  const auto lister = Grouping::parse(*defaults::grouping("lister"));
  int n = 0;
  for (Process p : kProcesses)
    for (Knowledge k : kKnowledge) {
      ++n;
      const auto lvl = course_level({p, k});
      CourseLevel want = CourseLevel::ReadingUnderstanding;
      if (p == Process::Apply || p == Process::Analyze) want = CourseLevel::WritingSmallFragments;
      if (p == Process::Evaluate || p == Process::Create) want = CourseLevel::WritingNontrivial;
      EXPECT_EQ(lvl, want);
      EXPECT_EQ(lvl, course_level({p, Knowledge::Factual}));
      EXPECT_EQ(lister.group(p), std::string(to_string(lvl)));
    }
  EXPECT_EQ(n, 24);
  EXPECT_EQ(course_level({Process::Understand, Knowledge::Conceptual}),
            CourseLevel::ReadingUnderstanding);
  EXPECT_EQ(course_level({Process::Analyze, Knowledge::Procedural}),
            CourseLevel::WritingSmallFragments);
  EXPECT_EQ(course_level({Process::Create, Knowledge::Metacognitive}),
            CourseLevel::WritingNontrivial);
}

TEST(Bloom, BarnesGrouping) {
  const auto g = Grouping::parse(*defaults::grouping("barnes"));
  EXPECT_EQ(g.group(Knowledge::Factual), "Behavioral");
  EXPECT_EQ(g.group(Knowledge::Conceptual), "Behavioral");
  EXPECT_EQ(g.group(Knowledge::Procedural), "Implementation");
  EXPECT_EQ(g.group(Knowledge::Metacognitive), "Enhancement");
  EXPECT_FALSE(g.group(Process::Apply).has_value());
}

TEST(Bloom, ClueTableParse) {
  const auto t = ClueTable::parse("# c\nverb Frobnicate -> Create\nnoun widget -> Procedural\n");
  EXPECT_EQ(t.verb("frobnicate"), Process::Create);
  EXPECT_EQ(t.verb("FROBNICATE"), Process::Create);
  EXPECT_EQ(t.noun("widget"), Knowledge::Procedural);
  EXPECT_FALSE(t.noun("gadget").has_value());
  EXPECT_THROW(ClueTable::parse("verb x -> Nothing\n"), ParseError);
  EXPECT_THROW(ClueTable::parse("adjective x -> Create\n"), ParseError);
}

TEST(BloomProperty, MonotoneExtension) {
  const std::vector<std::string> statements = {
      "List primitive data types in a language",
      "Decompose a structured concept in its parts",
      "How to implement a sort algorithm",
      "Criticize learning programming methodology",
      "Explain the binding of a variable",
      "Design a class with a getter and setter",
      "Trace the loop over the array",
      "Judge the redundancy of a method"};
  std::mt19937_64 rng(1);
  const char* extra_verbs[] = {"gadget", "frob", "explain", "widget"};
  const char* extra_nouns[] = {"variable", "thing", "class", "parts"};
  for (int n = 0; n < 50; ++n) {
    ClueTable t = ClueTable::parse(defaults::clues());
    std::vector<std::optional<Cell>> before;
    for (const auto& s : statements) {
      try {
        before.push_back(classify(normalize_statement(s, t), t).cell);
      } catch (const Error&) {
        before.push_back(std::nullopt);
      }
    }
    // Only add entries that are absent; existing ones stay untouched.
    for (int i = 0; i < 3; ++i) {
      const std::string v = extra_verbs[rng() % 4];
      if (!t.verb(v)) t.add_verb(v, kProcesses[rng() % 6]);
      const std::string k = extra_nouns[rng() % 4];
      if (!t.noun(k)) t.add_noun(k, kKnowledge[rng() % 4]);
    }
    for (std::size_t i = 0; i < statements.size(); ++i) {
      if (!before[i]) continue;
      const auto after = classify(normalize_statement(statements[i], t), t).cell;
      EXPECT_EQ(after, before[i]) << statements[i];
    }
  }
}
