#include <gtest/gtest.h>

#include <atomic>
#include <set>

#include "fixtures.hpp"
#include "generated.hpp"
#include "kc/csp_solver.hpp"
#include "kc/error.hpp"
#include "kc/option_sampler.hpp"
#include "kc/pipeline.hpp"

namespace kc {
namespace {

std::string dump(const GeneratedDataset& d) {
  std::string out;
  for (const auto* m : {&d.problems, &d.nota}) {
    for (const auto& [tier, ps] : *m) {
      for (const auto& p : ps) out += serialize_problem(p) + "\n";
    }
  }
  return out;
}

TEST(Pipeline, GeneratedProblemsPassValidation) {
  const auto& g = testing::small_graph();
  const auto& d = testing::small_dataset();
  for (const auto& [tier, ps] : d.problems) {
    EXPECT_EQ(ps.size(), testing::small_generation().per_tier) << to_string(tier);
    for (const auto& p : ps) {
      EXPECT_EQ(p.tier, tier);
      EXPECT_TRUE(validate_problem(g, p).empty()) << p.id;
      EXPECT_TRUE(is_unique(g, p.question));
      EXPECT_TRUE(certify_option_uniqueness(g, p.question, p.options));
      EXPECT_TRUE(std::is_sorted(p.neighborhood.begin(), p.neighborhood.end()));
    }
  }
  for (const auto& [tier, ps] : d.nota) {
    for (const auto& p : ps) EXPECT_TRUE(validate_problem(g, p).empty()) << p.id;
  }
}

TEST(Pipeline, GridBoundsHold) {
  for (const auto& p : testing::flatten(testing::small_dataset().problems)) {
    const auto& c = p.question.config;
    EXPECT_GE(c.graph_size, 6u);
    EXPECT_LE(c.graph_size, 11u);
    EXPECT_GE(c.blank_size, (c.graph_size + 3) / 4);
    EXPECT_LE(c.blank_size, c.graph_size / 2);
    EXPECT_LE(p.question.nodes.size(), c.graph_size);
    EXPECT_EQ(p.blank_count(), c.blank_size);
  }
}

TEST(Pipeline, ValidationCatchesCorruption) {
  const auto& g = testing::small_graph();
  auto p = testing::small_dataset().problems.at(Tier::hard).front();
  auto wrong_gold = p;
  wrong_gold.options.gold_index[0] = (wrong_gold.options.gold_index[0] + 1) % 3;
  EXPECT_FALSE(validate_problem(g, wrong_gold).empty());
  auto fake_fact = p;
  fake_fact.knowledge->triples.push_back({"Person 00001", "actedIn", "Nowhere"});
  EXPECT_FALSE(validate_problem(g, fake_fact).empty());
}

TEST(Pipeline, SameSeedSameBytesAcrossThreadCounts) {
  const auto& g = testing::small_graph();
  auto cfg = testing::small_generation();
  cfg.per_tier = 8;
  const auto a = dump(generate_dataset(g, cfg));
  cfg.parallel = 3;
  const auto b = dump(generate_dataset(g, cfg));
  EXPECT_EQ(a, b);
  cfg.parallel = 1;
  cfg.seed = 43;
  EXPECT_NE(a, dump(generate_dataset(g, cfg)));
}

TEST(Pipeline, ConfigValidation) {
  GenerationConfig cfg;
  cfg.graph_sizes.clear();
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.per_tier = 3;
  EXPECT_EQ(cfg.attempt_budget(), 600u);
  cfg.max_attempts = 10;
  EXPECT_EQ(cfg.attempt_budget(), 10u);
}

TEST(Pipeline, GridDrawStaysInRange) {
  GenerationConfig cfg;
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto s = draw_sampler_config(cfg, rng);
    EXPECT_NO_THROW(s.validate());
    EXPECT_GE(s.blank_size, (s.graph_size + 3) / 4);
    EXPECT_LE(s.blank_size, s.graph_size / 2);
  }
}

TEST(Pipeline, DatasetStatsAverages) {
  EXPECT_EQ(dataset_stats({}).questions, 0u);
  EXPECT_EQ(dataset_stats({}).avg_nodes, 0.0);
  const std::vector<Problem> ps{testing::worked_problem(), testing::true_lies_problem()};
  const auto s = dataset_stats(ps);
  EXPECT_EQ(s.questions, 2u);
  // worked: 5 nodes, 4 edges, 2 blanks; true lies: 3 nodes, 2 edges, 1 blank
  EXPECT_DOUBLE_EQ(s.avg_nodes, 4.0);
  EXPECT_DOUBLE_EQ(s.avg_edges, 3.0);
  EXPECT_DOUBLE_EQ(s.avg_blanks, 1.5);
}

TEST(Pipeline, OracleEvaluationScoresFullCredit) {
  const auto problems = testing::flatten(testing::small_dataset().problems);
  for (auto style : {Style::zero_shot, Style::few_shot, Style::staged, Style::verify_all, Style::cot_sc}) {
    EvaluationConfig cfg;
    cfg.prompt.style = style;
    cfg.parallel = 2;
    OracleResponder oracle(style, style == Style::cot_sc ? 5 : 1);
    const auto run = run_evaluation(problems, problems, oracle, cfg);
    const std::size_t n_ex = style == Style::zero_shot ? 0 : 5;
    EXPECT_EQ(run.exemplars.size(), n_ex);
    EXPECT_EQ(run.evaluated.size(), problems.size() - n_ex);
    for (const auto& ex : run.exemplars) {
      EXPECT_EQ(std::count(run.evaluated.begin(), run.evaluated.end(), ex.problem), 0);
    }
    EXPECT_DOUBLE_EQ(run.report.overall().mean_fc, 100.0) << to_string(style);
    EXPECT_DOUBLE_EQ(run.report.overall().mean_pc, 100.0);
  }
}

class FlakyResponder final : public Responder {
 public:
  std::vector<std::string> respond(const std::string&, const Problem& p) override {
    const auto n = calls_++;
    if (n % 3 == 1) throw TransportError("down", 503);
    if (n % 3 == 2) throw ContextOverflowError("too long");
    return {format_answer(gold_answer(p))};
  }
  std::size_t sample_count() const override { return 1; }

 private:
  std::atomic<std::size_t> calls_{0};
};

TEST(Pipeline, FailuresBecomeUnfinished) {
  const auto problems = testing::flatten(testing::small_dataset().problems);
  FlakyResponder flaky;
  EvaluationConfig cfg;
  const auto run = run_evaluation(problems, problems, flaky, cfg);
  const auto n = problems.size();
  EXPECT_EQ(run.transport_failures, (n + 1) / 3);
  EXPECT_EQ(run.context_overflows, n / 3);
  EXPECT_EQ(run.report.unfinished_count(), run.transport_failures + run.context_overflows);
  const auto finished = n - run.report.unfinished_count();
  EXPECT_NEAR(run.report.overall().mean_fc, 100.0 * finished / n, 1e-9);

  cfg.unfinished_policy = UnfinishedPolicy::exclude;
  const auto excl = run_evaluation(problems, problems, flaky, cfg);
  EXPECT_EQ(excl.report.overall().n, n - excl.report.unfinished_count());
}

TEST(Pipeline, StoredPredictionsScored) {
  const auto problems = testing::flatten(testing::small_dataset().problems);
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i + 1 < problems.size(); ++i) preds.push_back({problems[i].id, format_answer(gold_answer(problems[i]))});
  const auto run = score_predictions(problems, preds, "with");
  EXPECT_EQ(run.report.unfinished_count(), 1u);
  EXPECT_EQ(run.report.overall().n, problems.size());
}

TEST(Pipeline, ParallelForCoversAllAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error("boom");
               }),
               Error);
}

}  // namespace
}  // namespace kc
