#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "generated.hpp"
#include "kc/error.hpp"
#include "kc/eval_harness.hpp"

namespace kc {
namespace {

using testing::b;
using testing::k;
using Letters = std::vector<std::optional<std::size_t>>;

ParsedAnswer answer(Letters letters, bool nota = false) { return {std::move(letters), nota}; }

Problem three_blank_problem() {
  auto p = testing::andy_garcia_problem();
  p.question.constraints.push_back({b(3), "actedIn", k("Smokin' Aces")});
  p.options.per_blank.push_back({"Jeremy Piven", "Ron Perlman", "Casey Kasem"});
  p.options.gold_index.push_back(0);
  p.question.gold.push_back("Jeremy Piven");
  return p;
}

TEST(EvalHarness, ScoreUnitVectors) {
  const auto p = testing::andy_garcia_problem();  // gold B, C
  auto s = score(p, answer({1, 2}));
  EXPECT_DOUBLE_EQ(s.pc(), 1.0);
  EXPECT_EQ(s.fc(), 1);
  s = score(p, answer({1, std::nullopt}));
  EXPECT_DOUBLE_EQ(s.pc(), 0.5);
  EXPECT_EQ(s.fc(), 0);
  s = score(p, answer({std::nullopt, std::nullopt}));
  EXPECT_DOUBLE_EQ(s.pc(), 0.0);

  const auto q = three_blank_problem();
  s = score(q, answer({1, 2, 1}));
  EXPECT_DOUBLE_EQ(s.pc(), 2.0 / 3.0);
  EXPECT_EQ(s.fc(), 0);
}

TEST(EvalHarness, NotaScoring) {
  auto p = testing::andy_garcia_problem();
  EXPECT_EQ(score(p, answer({1, 2}, true)).fc(), 0);
  EXPECT_DOUBLE_EQ(score(p, answer({1, 2}, true)).pc(), 0.0);
  p.options.nota = true;
  p.options.gold_index.clear();
  EXPECT_EQ(score(p, answer({std::nullopt, std::nullopt}, true)).fc(), 1);
  EXPECT_EQ(score(p, answer({1, 2})).fc(), 0);
  EXPECT_DOUBLE_EQ(score(p, answer({1, 2})).pc(), 0.0);
}

TEST(EvalHarness, PatternClassification) {
  QuestionGraph q;
  q.gold = {"x", "y", "z"};
  q.constraints = {{b(1), "r", k("c")}, {b(2), "r", k("c")}, {b(3), "r", k("c")}};
  EXPECT_FALSE(classify_pattern(q).any());

  q.constraints.push_back({b(1), "r", b(2)});
  EXPECT_EQ(classify_pattern(q), (Patterns{true, false, false}));

  q.constraints.push_back({b(2), "r", b(3)});
  EXPECT_EQ(classify_pattern(q), (Patterns{true, true, false}));

  q.constraints.push_back({b(3), "r", b(1)});
  EXPECT_EQ(classify_pattern(q), (Patterns{true, true, true}));

  // Parallel constraints between two blanks are not a cycle of three.
  QuestionGraph two;
  two.gold = {"x", "y"};
  two.constraints = {{b(1), "r", b(2)}, {b(2), "s", b(1)}};
  EXPECT_EQ(classify_pattern(two), (Patterns{true, false, false}));
}

std::vector<Problem> fixture_set() {
  return {testing::worked_problem(), testing::dick_powell_problem(), testing::true_lies_problem(),
          testing::andy_garcia_problem()};
}

TEST(EvalHarness, CrossTabCountsEachCell) {
  const auto ps = fixture_set();
  const std::vector<bool> none(ps.size(), false);
  // with knowledge:    +, +, -, -
  // without knowledge: +, -, +, -
  const std::vector<ParsedAnswer> with{answer({0, 1}), answer({1, 1}), answer({0}), answer({0, 0})};
  const std::vector<ParsedAnswer> without{answer({0, 1}), answer({0, 0}), answer({1}), answer({0, 0})};
  const auto k_report = build_report(ps, with, none, "with");
  const auto n_report = build_report(ps, without, none, "without");
  EXPECT_EQ(cross_tab(k_report, n_report), (CrossTab{1, 1, 1, 1}));

  const std::vector<Problem> fewer(ps.begin(), ps.end() - 1);
  const auto short_report =
      build_report(fewer, std::span<const ParsedAnswer>(without.data(), 3), std::vector<bool>(3, false), "without");
  EXPECT_THROW(cross_tab(k_report, short_report), Error);
}

TEST(EvalHarness, AggregatesAndUnfinishedPolicy) {
  const auto ps = fixture_set();
  const std::vector<ParsedAnswer> answers{answer({0, 1}), answer({1, 0}), answer({0}), answer({1, 2})};
  const std::vector<bool> unfinished{false, false, true, false};
  const auto zero = build_report(ps, answers, unfinished, "with");
  // pc: 1, 0.5, 0 (unfinished), 1 -> 62.5; fc: 1, 0, 0, 1 -> 50
  EXPECT_DOUBLE_EQ(zero.overall().mean_pc, 62.5);
  EXPECT_DOUBLE_EQ(zero.overall().mean_fc, 50.0);
  EXPECT_EQ(zero.overall().n, 4u);
  EXPECT_EQ(zero.unfinished_count(), 1u);

  const auto excl = build_report(ps, answers, unfinished, "with", UnfinishedPolicy::exclude);
  EXPECT_DOUBLE_EQ(excl.overall().mean_pc, 250.0 / 3.0);
  EXPECT_EQ(excl.overall().n, 3u);

  const auto tiers = zero.by_tier();
  EXPECT_EQ(tiers.at(Tier::hard).n, 2u);
  EXPECT_DOUBLE_EQ(tiers.at(Tier::easy).mean_fc, 100.0);

  EXPECT_THROW(build_report(ps, std::span<const ParsedAnswer>(answers.data(), 2), unfinished, "with"), Error);
}

TEST(EvalHarness, FcOneIffPcOne) {
  const auto problems = testing::flatten(testing::small_dataset().problems);
  Rng rng(8);
  for (const auto& p : problems) {
    ParsedAnswer a;
    for (std::size_t bl = 0; bl < p.blank_count(); ++bl) {
      const auto r = rng.uniform(4);
      a.per_blank.push_back(r == 3 ? std::nullopt : std::optional<std::size_t>(r));
    }
    const auto s = score(p, a);
    EXPECT_EQ(s.fc() == 1, s.pc() == 1.0);
    EXPECT_GE(s.pc(), 0.0);
    EXPECT_LE(s.pc(), 1.0);
  }
}

TEST(EvalHarness, ScoresInvariantUnderOptionPermutation) {
  const auto problems = testing::flatten(testing::small_dataset().problems);
  Rng rng(21);
  for (const auto& p : problems) {
    ParsedAnswer a;
    for (std::size_t bl = 0; bl < p.blank_count(); ++bl) a.per_blank.push_back(rng.uniform(3));
    auto q = p;
    ParsedAnswer qa = a;
    for (std::size_t bl = 0; bl < p.blank_count(); ++bl) {
      std::vector<std::size_t> perm{0, 1, 2};
      rng.shuffle(perm);
      for (std::size_t i = 0; i < 3; ++i) q.options.per_blank[bl][perm[i]] = p.options.per_blank[bl][i];
      q.options.gold_index[bl] = perm[p.options.gold_index[bl]];
      qa.per_blank[bl] = perm[*a.per_blank[bl]];
    }
    EXPECT_EQ(score(p, a).correct, score(q, qa).correct);
  }
}

TEST(EvalHarness, RandomBaselineClosedForm) {
  // Blank counts 2, 1, 2, 3; three options everywhere.
  const std::vector<Problem> ps{testing::worked_problem(), testing::true_lies_problem(),
                                testing::andy_garcia_problem(), three_blank_problem()};
  Rng rng(5);
  const auto r = random_baseline(ps, 20000, rng);
  EXPECT_NEAR(r.expected_pc, 100.0 / 3.0, 1e-9);
  const double expected_fc = 100.0 * (1.0 / 9.0 + 1.0 / 3.0 + 1.0 / 9.0 + 1.0 / 27.0) / 4.0;
  EXPECT_NEAR(r.expected_fc, expected_fc, 1e-9);
  EXPECT_NEAR(r.mean_pc, 100.0 / 3.0, 1.0);
  EXPECT_LE(std::abs(r.mean_fc - r.expected_fc), 4 * r.fc_sigma);

  auto single = testing::true_lies_problem();
  single.options.per_blank = {{"Charlton Heston"}};
  single.options.gold_index = {0};
  const std::vector<Problem> one{single};
  const auto sure = random_baseline(one, 10, rng);
  EXPECT_DOUBLE_EQ(sure.mean_pc, 100.0);
  EXPECT_DOUBLE_EQ(sure.mean_fc, 100.0);
  EXPECT_THROW(random_baseline(one, 0, rng), Error);
}

TEST(EvalHarness, OptionOrderSlice) {
  const auto ps = fixture_set();  // first-blank gold positions 0, 1, 1, 1
  const std::vector<ParsedAnswer> answers{answer({0, 1}), answer({1, 1}), answer({0}), answer({1, 0})};
  const auto report = build_report(ps, answers, std::vector<bool>(4, false), "with");
  const auto slice = option_order_slice(report);
  ASSERT_GE(slice.by_first_blank.size(), 2u);
  EXPECT_EQ(slice.by_first_blank[0].n, 1u);
  EXPECT_EQ(slice.by_first_blank[1].n, 3u);
  EXPECT_DOUBLE_EQ(slice.by_first_blank[1].mean_fc, 100.0 / 3.0);
  ASSERT_GE(slice.by_each_blank.size(), 3u);
  // Blanks at gold position C: Andy Garcia blank 2 only, answered wrong.
  EXPECT_EQ(slice.by_each_blank[2].n, 1u);
  EXPECT_DOUBLE_EQ(slice.by_each_blank[2].accuracy, 0.0);
}

TEST(EvalHarness, NotaSliceCountsClaims) {
  auto ps = fixture_set();
  ps[3].options.nota = true;
  ps[3].options.gold_index.clear();
  const std::vector<ParsedAnswer> answers{answer({0, 1}, true), answer({1, 1}), answer({1}),
                                          answer({std::nullopt, std::nullopt}, true)};
  const auto report = build_report(ps, answers, std::vector<bool>(4, false), "with");
  const auto s = nota_slice(report);
  EXPECT_EQ(s.nota.n, 1u);
  EXPECT_DOUBLE_EQ(s.nota.mean_fc, 100.0);
  EXPECT_EQ(s.regular.n, 3u);
  EXPECT_EQ(s.nota_claims_on_regular, 1u);
}

TEST(EvalHarness, TableAndJson) {
  const auto ps = fixture_set();
  const std::vector<ParsedAnswer> answers{answer({0, 1}), answer({1, 1}), answer({1}), answer({1, 2})};
  const auto report = build_report(ps, answers, std::vector<bool>(4, false), "with");
  const auto j = report_json(report);
  EXPECT_EQ(j["per_problem"].size(), 4u);
  const std::vector<ScoreReport> reports{report};
  const auto table = render_table(reports);
  EXPECT_NE(table.find("100.0"), std::string::npos);
  EXPECT_EQ(format_percent(33.333), "33.3");
}

}  // namespace
}  // namespace kc
