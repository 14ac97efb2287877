#include <gtest/gtest.h>

#include <random>
#include <set>

#include "exr/defaults.hpp"
#include "exr/templates.hpp"

using namespace exr;
using namespace exr::tpl;

namespace {

const TemplatePack& cs1() {
  static const TemplatePack p = TemplatePack::parse(*defaults::template_pack("cs1"));
  return p;
}

const Bindings kFig8 = {
    {"init", "0"}, {"test", "<="}, {"limit", "3"}, {"assign", "+="}, {"step", "2"}};

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

}  // namespace

TEST(Templates, GenBodyByteExact) {
  EXPECT_EQ(expand(cs1().at("genBody"), kFig8, cs1()),
            "for(int i=0;i<=3;i+=2) System.out.print(i+\" \");");
}

TEST(Templates, CaseCUsesBuggyLimit) {
  const auto text = expand(cs1().at("caseC"), kFig8, cs1());
  EXPECT_EQ(text, "c) for(int i=0;i<=1;i+=2) System.out.print(i+\" \");");
  EXPECT_EQ(candidates("buggy_limit", "3", kFig8).front(), "1");
}

TEST(Templates, EmptyRule) {
  const auto pack = TemplatePack::parse("#empty() =>\n#end\n");
  EXPECT_EQ(expand(pack.at("empty"), {}, pack), "");
}

TEST(Templates, Errors) {
  EXPECT_EQ(error_code([] { expand(cs1().at("genBody"), {{"init", "0"}}, cs1()); }),
            "UnboundParam");
  EXPECT_EQ(error_code([] { cs1().at("nosuch"); }), "UnknownRule");
  const auto pack = TemplatePack::parse("#a(x) =>\n{nosuch(x)}\n#end\n");
  EXPECT_EQ(error_code([&] { expand(pack.at("a"), {{"x", "1"}}, pack); }), "UnknownRule");
  EXPECT_EQ(error_code([] {
              TemplatePack::parse("#a(x) =>\n{b(x)}\n#end\n#b(x) =>\n{a(x)}\n#end\n");
            }),
            "CycleDetected");
  EXPECT_EQ(error_code([] { TemplatePack::parse("#a() =>\nx\n#end\n#a() =>\ny\n#end\n"); }),
            "DuplicateRule");
  EXPECT_EQ(error_code([] {
              const auto p = TemplatePack::parse("#a(x, y) =>\n$x$y\n#end\n#b(x) =>\n{a(x)}\n#end\n");
              expand(p.at("b"), {{"x", "1"}}, p);
            }),
            "ArityMismatch");
}

TEST(Templates, Splices) {
  const auto pack = TemplatePack::parse(
      "#g(field, type) =>\npublic $type get$capitalize(field)(){return $field;} $$ $upper(type)\n#end\n");
  EXPECT_EQ(expand(pack.at("g"), {{"field", "count"}, {"type", "int"}}, pack),
            "public int getCount(){return count;} $ INT");
}

TEST(Templates, Getter) {
  EXPECT_EQ(expand(cs1().at("getter"), {{"field", "x"}, {"type", "int"}}, cs1()),
            "public int getX(){return x;}");
  EXPECT_EQ(expand(cs1().at("getter"), {{"field", "size"}, {"type", "long"}}, cs1()),
            "public long getSize(){return size;}");
}

TEST(Templates, AccessorsSpec) {
  const auto s = instantiate_exercise(cs1().at("accessors"), {{"field", "x"}, {"type", "int"}}, 1,
                                      1000, cs1());
  ASSERT_EQ(s.answers.size(), 2u);
  EXPECT_EQ(s.answers[0].text, "public int getX(){return x;}");
  EXPECT_EQ(s.answers[1].text, "public void setX(int v){x = v;}");
  ASSERT_TRUE(s.provenance);
  EXPECT_EQ(s.provenance->rule, "accessors");
}

TEST(Templates, TransformsChangeValue) {
  const Bindings env = {{"step", "2"}};
  for (const auto& t : transforms()) {
    const std::vector<std::string> values =
        t.role == Role::Operator ? std::vector<std::string>{"<", "<=", ">", ">=", "!=", "==", "+=", "-="}
                                 : std::vector<std::string>{"-3", "0", "1", "3", "10"};
    for (const auto& v : values) {
      const auto c = candidates(t.name, v, env);
      EXPECT_FALSE(c.empty()) << t.name << " " << v;
      for (const auto& x : c) EXPECT_NE(x, v) << t.name;
      EXPECT_EQ(std::set<std::string>(c.begin(), c.end()).size(), c.size()) << t.name;
    }
  }
  EXPECT_TRUE(is_transform("buggy_limit"));
  EXPECT_FALSE(is_transform("genBody"));
}

TEST(Templates, Fig8Instance) {
  const auto s = instantiate_exercise(cs1().at("forLoop"), kFig8, 1, 1000, cs1());
  ASSERT_NE(s.correct_option(), nullptr);
  EXPECT_EQ(s.correct_option()->expect->text, "0 2 ");
  // Every distractor's recorded effect is what its own code prints.
  for (const auto& o : s.options) {
    if (o.correct) continue;
    ASSERT_TRUE(o.expect.has_value());
    EXPECT_FALSE(o.tag.empty());
    if (o.tag == "buggy_limit") {
      Bindings b = kFig8;
      b["limit"] = candidates("buggy_limit", "3", kFig8).front();
      const auto code = expand(cs1().at("genBody"), b, cs1());
      EXPECT_EQ(o.expect->text, lang::evaluate(lang::parse_program(code), 1000).stdout_text);
    }
  }
  ASSERT_TRUE(s.provenance);
  EXPECT_EQ(s.provenance->seed, 1u);
}

TEST(Templates, Determinism) {
  const auto a = instantiate_exercise(cs1().at("forLoop"), kFig8, 7, 1000, cs1());
  const auto b = instantiate_exercise(cs1().at("forLoop"), kFig8, 7, 1000, cs1());
  EXPECT_EQ(spec::render(a), spec::render(b));
  bool differs = false;
  for (std::uint64_t seed = 8; seed < 20 && !differs; ++seed)
    differs = spec::render(instantiate_exercise(cs1().at("forLoop"), kFig8, seed, 1000, cs1())) !=
              spec::render(a);
  EXPECT_TRUE(differs);  // the seed drives the option order
}

namespace {

Bindings draw(std::mt19937_64& rng) {
  static const char* tests[] = {"<", "<=", ">", ">=", "!="};
  static const char* assigns[] = {"+=", "-="};
  Bindings b;
  const bool up = rng() % 2;
  const int step = 1 + static_cast<int>(rng() % 3);
  const int init = static_cast<int>(rng() % 10) - (up ? 0 : -5);
  const int span = 2 + static_cast<int>(rng() % 8);
  b["init"] = std::to_string(init);
  b["limit"] = std::to_string(up ? init + span : init - span);
  b["step"] = std::to_string(step);
  b["assign"] = up ? assigns[0] : assigns[1];
  std::string t = tests[rng() % 5];
  if (!up && (t == "<" || t == "<=")) t = t == "<" ? ">" : ">=";
  if (up && (t == ">" || t == ">=")) t = t == ">" ? "<" : "<=";
  if (t == "!=") t = up ? "<" : ">";  // keep the loop finite for every step
  b["test"] = t;
  return b;
}

}  // namespace

TEST(TemplatesProperty, HundredDrawsValidate) {
  std::mt19937_64 rng(123);
  for (int n = 0; n < 100; ++n) {
    const auto b = draw(rng);
    const std::uint64_t seed = rng();
    SCOPED_TRACE(n);
    spec::ExerciseSpec s;
    ASSERT_NO_THROW(s = instantiate_exercise(cs1().at("forLoop"), b, seed, 10000, cs1()));
    const auto r = spec::validate_spec(s, 10000);
    EXPECT_EQ(r.errors(), 0u);
    int confirmed = 0;
    std::set<std::string> labels;
    for (const auto& o : r.options) {
      if (o.correct) {
        EXPECT_EQ(o.verdict, spec::Verdict::Confirmed);
        ++confirmed;
      } else {
        EXPECT_EQ(o.verdict, spec::Verdict::Refuted);
      }
    }
    for (const auto& o : s.options) labels.insert(o.label);
    EXPECT_EQ(confirmed, 1);
    EXPECT_EQ(labels.size(), s.options.size());
    EXPECT_GE(s.options.size(), 2u);
    // Generated specs survive the text format.
    EXPECT_TRUE(spec::equivalent(s, spec::parse_spec(spec::render(s))));
  }
}

TEST(TemplatesProperty, GenerationFailsWhenNoDistinctDistractor) {
  // A body whose output ignores the mutated parameter cannot yield a distractor.
  const auto pack = TemplatePack::parse(R"(#body(limit) : code =>
int y = $limit;
System.out.print(7);
#end

#ex(limit) : spec =>
exercise "e" {
  target: Apply x Procedural;
  question {
```
{body(limit)}
```
  }
  @mcq body(limit) stdout : buggy_limit(limit)
  plan { run(Eval) }
}
#end
)");
  EXPECT_EQ(error_code([&] { instantiate_exercise(pack.at("ex"), {{"limit", "3"}}, 1, 100, pack); }),
            "GenerationFailed");
}
