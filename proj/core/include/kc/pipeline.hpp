#pragma once
// Dataset generation and evaluation runs built from the individual stages.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kc/eval_harness.hpp"
#include "kc/kg_store.hpp"
#include "kc/llm_client.hpp"
#include "kc/option_sampler.hpp"
#include "kc/problem_io.hpp"
#include "kc/prompt.hpp"
#include "kc/question.hpp"

namespace kc {

struct GenerationConfig {
  SamplerConfig sampler;  // k-hop, layer cap and center degrees; sizes come from the grid below
  // Each attempt draws s_G, then s_B in [ceil(s_G/4), floor(s_G/2)], then
  // one value per multiplier list.
  std::vector<std::size_t> graph_sizes{6, 7, 8, 9, 10, 11};
  std::vector<Multiplier> reduce_multipliers{{11, 10}, {12, 10}, {13, 10}};
  std::vector<Multiplier> blank_multipliers{{1, 1}, {11, 10}};
  std::vector<Tier> tiers{Tier::easy, Tier::medium, Tier::hard};
  OptionSamplerConfig options;
  std::size_t noise_per_constraint = 3;
  bool nota = false;
  std::size_t per_tier = 100;   // stop once every tier holds this many problems
  std::size_t max_attempts = 0;  // 0 = 200 * per_tier
  std::size_t parallel = 1;
  std::uint64_t seed = 0;

  std::size_t attempt_budget() const { return max_attempts ? max_attempts : 200 * per_tier; }
  // Throws Error on empty grids or invalid sizes.
  void validate() const;
};

struct GenerationStats {
  std::size_t attempts = 0;
  std::size_t sampling_failures = 0;
  std::size_t not_unique = 0;
  std::size_t duplicates = 0;
  std::size_t groups = 0;
  std::map<Tier, std::size_t> infeasible;
  std::map<Tier, std::size_t> nota_infeasible;
};

struct GeneratedDataset {
  std::map<Tier, std::vector<Problem>> problems;
  std::map<Tier, std::vector<Problem>> nota;
  GenerationStats stats;
  std::vector<std::string> warnings;

  std::size_t total() const;
};

// Output is identical for every value of cfg.parallel.
GeneratedDataset generate_dataset(const KnowledgeGraph& g, const GenerationConfig& cfg);

// Sampler config of one attempt (grid draw applied to cfg.sampler).
SamplerConfig draw_sampler_config(const GenerationConfig& cfg, Rng& rng);

// Rebuilds the sampled neighborhood of a stored problem. Throws GraphError
// when a name is not in `g`.
Neighborhood neighborhood_of(const KnowledgeGraph& g, const Problem& p);

// Every invariant a stored problem must satisfy against its source graph:
// structure, unique solution, option certification, gold consistency and
// distractor rules. Returns the violations found.
std::vector<std::string> validate_problem(const KnowledgeGraph& g, const Problem& p);

struct DatasetStats {
  std::size_t questions = 0;
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
  double avg_blanks = 0.0;
};

DatasetStats dataset_stats(std::span<const Problem> problems);

struct EvaluationConfig {
  PromptConfig prompt;
  std::size_t parallel = 1;
  UnfinishedPolicy unfinished_policy = UnfinishedPolicy::zero_score;
  std::uint64_t exemplar_seed = 0;
  // Verifier for solver-backed exemplar bodies; gold knowledge when null.
  const KnowledgeGraph* verifier = nullptr;
};

struct EvaluationRun {
  std::vector<Problem> evaluated;  // input minus exemplar problems
  std::vector<Exemplar> exemplars;
  std::vector<Prediction> predictions;
  std::vector<std::vector<std::string>> samples;  // raw completions per problem
  std::vector<ParsedAnswer> answers;
  ScoreReport report;
  std::size_t transport_failures = 0;
  std::size_t context_overflows = 0;
};

std::vector<Exemplar> build_exemplars(std::span<const Problem> pool, const EvaluationConfig& cfg);

// Renders, queries, parses and scores every problem. Problems that also serve
// as exemplars are left out. Transport failures and context overflows are
// recorded as unfinished. Multi-sample responders are merged by
// self_consistency, and the prediction text is the merged answer.
EvaluationRun run_evaluation(std::span<const Problem> problems, std::span<const Problem> exemplar_pool,
                             Responder& responder, const EvaluationConfig& cfg);

// Scores stored predictions; problems without a prediction count as unfinished.
EvaluationRun score_predictions(std::span<const Problem> problems, std::span<const Prediction> predictions,
                                const std::string& setting,
                                UnfinishedPolicy policy = UnfinishedPolicy::zero_score);

// Runs fn(i) for i in [0, n) on up to `width` threads. The first exception is
// rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t width, const std::function<void(std::size_t)>& fn);

}  // namespace kc
