#include <gtest/gtest.h>

#include <sstream>

#include "exr/cli.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace exr;
using json = nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string corpus_path(const std::string& name) {
  return test::source_path("data/corpus/" + name);
}

}  // namespace

TEST(Cli, CheckExitCodes) {
  EXPECT_EQ(run({"check", corpus_path("for-loop.exr")}).code, 0);
  EXPECT_EQ(run({"check", corpus_path("for-loop-generated.exr")}).code, 0);
  EXPECT_EQ(run({"check", corpus_path("ml-bindings.exr")}).code, 0);
  EXPECT_EQ(run({"check", corpus_path("leeds-q2.exr")}).code, 1);
  EXPECT_EQ(run({"check", corpus_path("nope.exr")}).code, 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 3);
  EXPECT_EQ(run({"eval"}).code, 3);
}

TEST(Cli, CheckJsonEnvelope) {
  const auto r = run({"--json", "check", corpus_path("leeds-q2.exr")});
  EXPECT_EQ(r.code, 1);
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j.contains("tool_version"));
  EXPECT_TRUE(j.contains("findings"));
  bool missing_path = false;
  for (const auto& f : j["findings"]) missing_path |= f["code"] == "MissingPath";
  EXPECT_TRUE(missing_path);
}

TEST(Cli, CheckJsonGolden) {
  auto j = json::parse(run({"--json", "check", corpus_path("leeds-q2.exr")}).out);
  j["input"] = "leeds-q2.exr";
  const auto golden = json::parse(read_file(test::source_path("tests/golden/check_leeds.json")));
  EXPECT_EQ(j, golden) << j.dump(2);
}

TEST(Cli, Eval) {
  auto r = run({"eval", test::source_path("tests/data/fig8.ml")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0 2 "), std::string::npos);
  r = run({"--json", "eval", test::source_path("tests/data/fig8.ml")});
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["payload"]["stdout"], "0 2 ");
}

TEST(Cli, Classify) {
  auto r = run({"--json", "classify", "Criticize learning programming methodology"});
  EXPECT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NE(j.dump().find("Metacognitive"), std::string::npos);
  EXPECT_EQ(run({"classify", "Ponder the void"}).code, 2);
  EXPECT_EQ(run({"classify", "Explain the quux"}).code, 1);
}

TEST(Cli, Diagnose) {
  auto r = run({"diagnose", "--pack", "differentiation", "--task", "d/dx[log(sin(x^3))]",
                "--answer", "1/sin(x^3)"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("chain_inner"), std::string::npos);
  r = run({"--json", "diagnose", "--pack", "linear", "eq(2x+9, 8+6x)", "eq(8x, 17)"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(json::accept(r.out));
  EXPECT_EQ(run({"diagnose", "--pack", "nosuch", "--task", "x"}).code, 3);
}

TEST(Cli, GenAndSimulate) {
  auto r = run({"gen", "cs1", "--rule", "forLoop", "--bind", "init=0", "--bind", "test=<=",
                "--bind", "limit=3", "--bind", "assign=+=", "--bind", "step=2", "--seed", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, read_file(corpus_path("for-loop-generated.exr")));

  r = run({"--json", "simulate", corpus_path("leeds-q2.exr"), "--profile", "expert", "--trials",
           "500", "--seed", "3"});
  EXPECT_LE(r.code, 1);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["payload"]["trials"], 500);
}

TEST(Cli, AllJsonOutputsParse) {
  for (const auto& name : {"leeds-q2.exr", "ml-bindings.exr", "maxpos.exr", "for-loop.exr",
                           "getter-setter.exr", "for-loop-generated.exr"}) {
    const auto r = run({"--json", "check", corpus_path(name)});
    EXPECT_TRUE(json::accept(r.out)) << name;
  }
  const auto bad = run({"--json", "check", corpus_path("nope.exr")});
  EXPECT_EQ(bad.code, 3);
  EXPECT_TRUE(json::accept(bad.out));
}
