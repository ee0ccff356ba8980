#pragma once
// Partial/full credit scoring, aggregation and analysis slices.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kc/problem_io.hpp"
#include "kc/rng.hpp"

namespace kc {

struct Score {
  std::size_t correct = 0;
  std::size_t blanks = 0;

  double pc() const { return blanks ? static_cast<double>(correct) / static_cast<double>(blanks) : 0.0; }
  int fc() const { return blanks && correct == blanks ? 1 : 0; }
};

// Letters are compared per blank; on a none-of-the-above problem only a
// none-of-the-above claim earns credit (all blanks), and on any other problem
// such a claim earns none.
Score score(const Problem& p, const ParsedAnswer& a);

struct Patterns {
  bool two_blank = false;    // A-B
  bool three_path = false;   // A-B-C
  bool cycle = false;

  bool any() const { return two_blank || three_path || cycle; }
  friend bool operator==(const Patterns&, const Patterns&) = default;
};

// Structure of the blank-to-blank constraint graph.
Patterns classify_pattern(const QuestionGraph& q);

struct ProblemResult {
  std::string id;
  Tier tier = Tier::easy;
  bool nota = false;
  Score score;
  bool unfinished = false;
  bool nota_claimed = false;
  std::vector<std::size_t> gold_positions;  // empty for none-of-the-above
  std::vector<bool> blank_correct;
  Patterns patterns;
};

enum class UnfinishedPolicy { zero_score, exclude };

struct Aggregate {
  double mean_pc = 0.0;  // percent
  double mean_fc = 0.0;  // percent
  std::size_t n = 0;
};

struct ScoreReport {
  std::string setting;
  UnfinishedPolicy unfinished_policy = UnfinishedPolicy::zero_score;
  std::vector<ProblemResult> per_problem;

  // Results that count under the unfinished policy.
  std::vector<const ProblemResult*> counted() const;
  std::map<Tier, Aggregate> by_tier() const;
  Aggregate overall() const;
  std::size_t unfinished_count() const;
};

// answers[i] and unfinished[i] belong to problems[i].
ScoreReport build_report(std::span<const Problem> problems, std::span<const ParsedAnswer> answers,
                         const std::vector<bool>& unfinished, std::string setting,
                         UnfinishedPolicy policy = UnfinishedPolicy::zero_score);

Aggregate aggregate(std::span<const ProblemResult* const> results);

struct RandomBaseline {
  double mean_pc = 0.0;  // percent
  double mean_fc = 0.0;  // percent
  double expected_pc = 0.0;
  double expected_fc = 0.0;
  // Standard error of mean_fc under the closed form.
  double fc_sigma = 0.0;
};

// Uniform letter per blank, `trials` passes over the set.
RandomBaseline random_baseline(std::span<const Problem> problems, std::size_t trials, Rng& rng);

struct CrossTab {
  // N = without knowledge, K = with knowledge; + correct (full credit).
  std::size_t n_plus_k_plus = 0;
  std::size_t n_plus_k_minus = 0;
  std::size_t n_minus_k_plus = 0;
  std::size_t n_minus_k_minus = 0;

  friend bool operator==(const CrossTab&, const CrossTab&) = default;
};

// Throws Error when the reports do not cover the same problem ids.
CrossTab cross_tab(const ScoreReport& with_knowledge, const ScoreReport& without_knowledge);

struct BlankAccuracy {
  double accuracy = 0.0;  // percent of blanks answered correctly
  std::size_t n = 0;      // blanks
};

struct PositionSlice {
  std::vector<Aggregate> by_first_blank;     // index = gold position of blank 1
  std::vector<BlankAccuracy> by_each_blank;  // index = that blank's own gold position
};

PositionSlice option_order_slice(const ScoreReport& report);

struct PatternSlice {
  Aggregate two_blank;
  Aggregate three_path;
  Aggregate cycle;
  Aggregate none;
};

PatternSlice pattern_slice(const ScoreReport& report);

struct NotaSlice {
  Aggregate nota;
  Aggregate regular;
  std::size_t nota_claims_on_regular = 0;
};

NotaSlice nota_slice(const ScoreReport& report);

Json report_json(const ScoreReport& report);
// Tier x setting table with PC and FC columns, one decimal.
std::string render_table(std::span<const ScoreReport> reports);

// One decimal, as in result tables.
std::string format_percent(double value);

}  // namespace kc
