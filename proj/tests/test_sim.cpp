#include <gtest/gtest.h>

#include <cmath>

#include "exr/defaults.hpp"
#include "exr/sim.hpp"

using namespace exr;
using namespace exr::sim;
using plan::Layer;

namespace {

const plan::VerbMap& verbs() {
  static const auto v = plan::VerbMap::parse(defaults::verb_map());
  return v;
}
const plan::Weights& weights() {
  static const auto w = plan::Weights::parse(defaults::weights());
  return w;
}
StudentProfile profile(const std::string& name) {
  return StudentProfile::parse(*defaults::profile(name));
}

const char* kLeedsExtended =
    "read(DR) ; infer_intent(MDR) ; count_manual(DR) ; conclude(DR) ; check_bounds(Eval)";
// run + bind = 5 + 4 (Eval); infer_intent + abstract = 5 + 5 (MDR).
const char* kEvalOrAbstract = "(run(Eval) ; bind(Eval)) | (infer_intent(MDR) ; abstract(MDR))";

// Softmax of -(sum of score * (1 - pref)) / T over two branches.
double p_first(double eval_pref, double mdr_pref, double temperature) {
  const double c1 = 9 * (1 - eval_pref);
  const double c2 = 10 * (1 - mdr_pref);
  return 1.0 / (1.0 + std::exp(-(c2 - c1) / temperature));
}

std::string error_code(const std::string& text) {
  try {
    StudentProfile::parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

}  // namespace

TEST(Sim, ProfileParse) {
  const auto p = StudentProfile::parse(
      "label: x; level: Conceptual\nprefer Eval=0.5 DR=0.25 MDR=0.25 # comment\n"
      "slip P1=0.1 P3=0.2 generic=0.05; temperature: 2");
  EXPECT_EQ(p.label, "x");
  EXPECT_EQ(p.level, bloom::Knowledge::Conceptual);
  EXPECT_DOUBLE_EQ(p.preference(Layer::Eval), 0.5);
  EXPECT_DOUBLE_EQ(p.temperature, 2.0);
  EXPECT_DOUBLE_EQ(p.slip_for({plan::Pattern::P3}), 0.2);
  EXPECT_DOUBLE_EQ(p.slip_for({plan::Pattern::P2}), 0.05);
  EXPECT_DOUBLE_EQ(p.slip_for({}), 0.0);
  EXPECT_EQ(error_code("prefer Eval=0.5 DR=0.2 MDR=0.2"), "InvalidProfile");
  EXPECT_EQ(error_code("prefer Eval=1; slip P3=1.5"), "InvalidProfile");
  EXPECT_EQ(error_code("prefer Eval=1; temperature: 0"), "InvalidProfile");
  EXPECT_EQ(error_code("prefer Eval=1; wobble 3"), "ParseError");
}

TEST(Sim, ShippedProfiles) {
  for (auto name : defaults::profile_names()) EXPECT_NO_THROW(profile(std::string(name)));
}

TEST(Sim, ChoiceProbabilitiesMatchSoftmax) {
  const auto doc = plan::parse_plan(kEvalOrAbstract);
  for (const auto& name : {"novice", "expert"}) {
    const auto prof = profile(name);
    const auto st = choice_probabilities(doc, doc.root, prof, verbs(), weights());
    ASSERT_EQ(st.probabilities.size(), 2u);
    const double want = p_first(prof.preference(Layer::Eval), prof.preference(Layer::MDR),
                                prof.temperature);
    EXPECT_NEAR(st.probabilities[0], want, 1e-12) << name;
    EXPECT_NEAR(st.probabilities[0] + st.probabilities[1], 1.0, 1e-12);
  }
}

TEST(Sim, ExpertsAbstractNovicesEvaluate) {
  const auto doc = plan::parse_plan(kEvalOrAbstract);
  const auto expert = simulate(doc, profile("expert"), verbs(), weights(), 42, 10000);
  const auto novice = simulate(doc, profile("novice"), verbs(), weights(), 42, 10000);
  ASSERT_EQ(expert.branches.size(), 1u);
  const auto& e = expert.branches.begin()->second;
  const auto& n = novice.branches.begin()->second;
  EXPECT_GT(e.counts[1], e.counts[0]);  // MDR branch
  EXPECT_GT(n.counts[0], n.counts[1]);  // Eval branch
}

TEST(Sim, BranchFrequenciesConverge) {
  const auto doc = plan::parse_plan(kEvalOrAbstract);
  const auto prof = StudentProfile::parse("prefer Eval=0.3 DR=0.3 MDR=0.4; temperature: 3");
  const std::size_t trials = 20000;
  const auto out = simulate(doc, prof, verbs(), weights(), 9, trials);
  const auto& st = out.branches.begin()->second;
  const double p = p_first(0.3, 0.4, 3.0);
  const double sigma = std::sqrt(trials * p * (1 - p));
  EXPECT_NEAR(static_cast<double>(st.counts[0]), trials * p, 3 * sigma);
  EXPECT_EQ(st.counts[0] + st.counts[1], trials);
}

TEST(Sim, SlipRateOnFlaggedSite) {
  const auto doc = plan::parse_plan(kLeedsExtended);
  const auto prof = StudentProfile::parse(
      "level: Metacognitive; prefer Eval=0.2 DR=0.4 MDR=0.4; slip P3=0.3");
  const std::size_t trials = 10000;
  const auto out = simulate(doc, prof, verbs(), weights(), 2024, trials);
  ASSERT_EQ(out.misses.size(), 1u);
  const auto& [site, misses] = *out.misses.begin();
  EXPECT_EQ(site.rfind("check_bounds(Eval)@", 0), 0u);
  const double sigma = std::sqrt(trials * 0.3 * 0.7);
  EXPECT_NEAR(static_cast<double>(misses), 3000.0, 3 * sigma);
  EXPECT_EQ(out.solved, trials - misses);
}

TEST(Sim, NoSlipMeansAllSolved) {
  const auto doc = plan::parse_plan(kLeedsExtended);
  const auto out = simulate(doc, profile("novice"), verbs(), weights(), 1, 2000);
  EXPECT_EQ(out.solved, 2000u);
  EXPECT_TRUE(out.misses.empty());
}

TEST(Sim, EscalatedAtomsAreMissed) {
  // infer_intent is Conceptual; a Factual student must create that knowledge.
  const auto doc = plan::parse_plan("read(DR) ; infer_intent(MDR)");
  const auto prof = StudentProfile::parse("level: Factual; prefer DR=1");
  const auto out = simulate(doc, prof, verbs(), weights(), 3, 100);
  EXPECT_EQ(out.solved, 0u);
  ASSERT_EQ(out.misses.size(), 1u);
  EXPECT_EQ(out.misses.begin()->second, 100u);
}

TEST(Sim, SeedDeterminism) {
  const auto doc = plan::parse_plan(std::string("(") + kEvalOrAbstract + ") ; " + kLeedsExtended);
  const auto prof = profile("expert");
  const auto a = simulate(doc, prof, verbs(), weights(), 77, 5000);
  const auto b = simulate(doc, prof, verbs(), weights(), 77, 5000);
  EXPECT_EQ(a.solved, b.solved);
  EXPECT_EQ(a.misses, b.misses);
  ASSERT_EQ(a.branches.size(), b.branches.size());
  for (const auto& [k, v] : a.branches) EXPECT_EQ(v.counts, b.branches.at(k).counts);
  const auto c = simulate(doc, prof, verbs(), weights(), 78, 5000);
  EXPECT_NE(a.misses, c.misses);
}
