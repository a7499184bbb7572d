#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include <trustnav/assessment.hpp>

#include "oracles.hpp"

using namespace trustnav;

TEST(PartialMoments, Examples) {
  auto pm = partial_moments({std::vector<double>(100, 97.0), 0.0});
  EXPECT_EQ(pm.upm, 97.0);
  EXPECT_EQ(pm.lpm_mag, 0.0);

  std::vector<double> mixed(50, 80.0);
  mixed.insert(mixed.end(), 50, -100.0);
  pm = partial_moments({mixed, 0.0});
  EXPECT_EQ(pm.upm, 40.0);
  EXPECT_EQ(pm.lpm_mag, 50.0);

  pm = partial_moments({{0.0}, 0.0});
  EXPECT_EQ(pm.upm, 0.0);
  EXPECT_EQ(pm.lpm_mag, 0.0);
}

TEST(PartialMoments, BoundarySampleCountsUpper) {
  const auto pm = partial_moments({{5.0, 5.0, -3.0, 1.0}, 5.0});
  EXPECT_DOUBLE_EQ(pm.upm, 10.0 / 4);
  EXPECT_DOUBLE_EQ(pm.lpm_mag, 4.0 / 4);
}

TEST(PartialMoments, EmptyRejected) { EXPECT_THROW(partial_moments({{}, 0.0}), std::invalid_argument); }

TEST(OutcomeAssessment, SemanticExamples) {
  EXPECT_EQ(outcome_assessment(97, 0), 1.0);
  EXPECT_NEAR(outcome_assessment(40, 50), -10.0 / 90.0, 1e-12);
  EXPECT_EQ(outcome_assessment(0, 0), 0.0);
  EXPECT_EQ(outcome_assessment(0, 12), -1.0);
}

TEST(OutcomeAssessment, SemanticEqualsLogisticOfLogRatio) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.01, 200.0);
  for (int i = 0; i < 1000; ++i) {
    const double upm = u(rng), lpm = u(rng);
    EXPECT_NEAR(outcome_assessment(upm, lpm), 2.0 / (1.0 + std::exp(std::log(lpm / upm))) - 1.0, 1e-12);
  }
}

TEST(OutcomeAssessment, LiteralExamples) {
  EXPECT_NEAR(outcome_assessment(40, 50, OaMode::Literal), 2.0 / (1.0 + std::exp(-0.8)) - 1.0, 1e-12);
  EXPECT_NEAR(outcome_assessment(40, 50, OaMode::Literal), 0.3799, 1e-4);
  EXPECT_EQ(outcome_assessment(97, 0, OaMode::Literal), 1.0);
  EXPECT_EQ(outcome_assessment(0, 0, OaMode::Literal), 0.0);
  // All-failure samples cannot go below zero under the printed transform.
  EXPECT_EQ(outcome_assessment(0, 50, OaMode::Literal), 0.0);
}

TEST(OutcomeAssessment, NegativeInputsRejected) {
  EXPECT_THROW(outcome_assessment(-1, 0), std::invalid_argument);
  EXPECT_THROW(outcome_assessment(0, -1), std::invalid_argument);
}

TEST(OutcomeAssessment, ScaleInvariant) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-150.0, 120.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s(20);
    for (auto& v : s) v = u(rng);
    const auto a = partial_moments({s, 0.0});
    for (auto& v : s) v *= 3.7;
    const auto b = partial_moments({s, 0.0});
    EXPECT_NEAR(outcome_assessment(a.upm, a.lpm_mag), outcome_assessment(b.upm, b.lpm_mag), 1e-12);
  }
}

TEST(OutcomeAssessment, MonotoneUnderImprovement) {
  Rng rng(3);
  std::uniform_real_distribution<double> below(-1000.0, -1e-9);
  std::uniform_real_distribution<double> above(0.0, 100.0);
  std::uniform_int_distribution<int> size(1, 100);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(size(rng)));
    for (auto& v : s) v = bernoulli(rng, 0.5) ? below(rng) : above(rng);
    s[0] = below(rng);
    const auto before = partial_moments({s, 0.0});
    s[0] = above(rng);
    const auto after = partial_moments({s, 0.0});
    if (outcome_assessment(after.upm, after.lpm_mag) < outcome_assessment(before.upm, before.lpm_mag)) {
      ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Label, TableBoundaries) {
  EXPECT_EQ(label(-1.0), Label::VeryBad);
  EXPECT_EQ(label(-0.75), Label::Bad);
  EXPECT_EQ(label(std::nextafter(-0.75, -1.0)), Label::VeryBad);
  EXPECT_EQ(label(-0.25), Label::Fair);
  EXPECT_EQ(label(std::nextafter(-0.25, -1.0)), Label::Bad);
  EXPECT_EQ(label(0.25), Label::Fair);
  EXPECT_EQ(label(std::nextafter(0.25, 1.0)), Label::Good);
  EXPECT_EQ(label(0.75), Label::Good);
  EXPECT_EQ(label(std::nextafter(0.75, 1.0)), Label::VeryGood);
  EXPECT_EQ(label(1.0), Label::VeryGood);
}

TEST(Label, OutOfRangeRejected) {
  EXPECT_THROW(label(1.0001), std::out_of_range);
  EXPECT_THROW(label(-1.5), std::out_of_range);
  EXPECT_THROW(label(std::nan("")), std::out_of_range);
}

TEST(Label, TotalOverUnitInterval) {
  for (int i = 0; i <= 2000; ++i) {
    const double oa = -1.0 + i / 1000.0;
    EXPECT_NO_THROW(label(oa));
  }
}

TEST(Label, NamesRoundTrip) {
  for (Label l : kLabels) EXPECT_EQ(parse_label(to_string(l)), l);
  EXPECT_EQ(to_string(Label::VeryBad), "very bad");
  EXPECT_THROW(parse_label("awful"), std::invalid_argument);
}

TEST(Statement, Template) {
  EXPECT_EQ(render_statement("green", Label::Good).text,
            "the green robot has good confidence in navigating to the goal");
  EXPECT_EQ(render_statement("red", Label::VeryBad).text,
            "the red robot has very bad confidence in navigating to the goal");
  const auto fair = render_statement("blue", Label::Fair);
  EXPECT_NE(fair.text.find(" fair "), std::string::npos);
  EXPECT_EQ(fair.source, ReportSource::Informed);
  EXPECT_TRUE(ReportStatement::absent("red").text.empty());
  EXPECT_FALSE(ReportStatement::absent("red").label.has_value());
}

TEST(Statement, RandomReportsAreUniform) {
  Rng rng(17);
  std::map<Label, int> counts;
  constexpr int kDraws = 10'000;
  for (int i = 0; i < kDraws; ++i) {
    const auto r = random_report(rng, "red");
    ASSERT_TRUE(r.label.has_value());
    EXPECT_EQ(r.source, ReportSource::Random);
    EXPECT_EQ(r.text, render_statement("red", *r.label).text);
    ++counts[*r.label];
  }
  for (Label l : kLabels) EXPECT_NEAR(counts[l] / double(kDraws), 0.2, 0.015);
}

TEST(Statement, RandomReportReplay) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(random_report(a, "red"), random_report(b, "red"));
}

TEST(Assess, CraterFreeGridIsVeryGood) {
  const auto g = parse_grid("S.~.~\n..~.G");
  const auto s = solve_value_iteration(g);
  const auto a = assess(g, s.policy, 1);
  EXPECT_EQ(a.oa, 1.0);
  EXPECT_EQ(a.label, Label::VeryGood);
  EXPECT_EQ(a.n_samples, 100);
}

TEST(Assess, ForcedDebrisBetweenCratersFallsShort) {
  // The only way through is the debris cell; each attempt lands in one of
  // the two craters with probability 1/2.
  const auto g = parse_grid(
      "##O##\n"
      "S.~.G\n"
      "##O##");
  const auto s = solve_value_iteration(g);
  const auto a = assess(g, s.policy, 1);
  EXPECT_LT(a.oa, 1.0);
  EXPECT_GT(a.lpm_mag, 0.0);
}

TEST(Assess, SamplesPathMatchesFormula) {
  const auto a = assess_samples("x", {{80, 80, -100, -100}, 0.0}, OaMode::Semantic, 3);
  EXPECT_EQ(a.upm, 40.0);
  EXPECT_EQ(a.lpm_mag, 50.0);
  EXPECT_NEAR(a.oa, -1.0 / 9.0, 1e-12);
  EXPECT_EQ(a.label, Label::Fair);
}

TEST(Assess, JsonSchema) {
  const auto a = assess_samples("cfg-1", {{97}, 0.0}, OaMode::Semantic, 9);
  const auto j = to_json(a);
  for (const char* key : {"config_id", "upm", "lpm", "oa", "label", "mode", "n_samples", "r_min", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["label"], "very good");
  EXPECT_EQ(j["mode"], "semantic");
  const auto back = assessment_from_json(j);
  EXPECT_EQ(back.config_id, "cfg-1");
  EXPECT_EQ(back.label, Label::VeryGood);
  EXPECT_EQ(back.seed, 9u);
}
