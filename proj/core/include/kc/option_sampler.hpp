#pragma once
// Distractor selection by structural rules:
//   rule 1: candidate plays the blank's role (head/tail) for one of its relations
//   rule 2: candidate lies in the sampled neighborhood around the center
//   rule 3: candidate satisfies one of the blank's definite constraints
// easy requires rule 1, medium rules 1-2, hard rules 1-3.

#include <cstddef>
#include <string>
#include <vector>

#include "kc/kg_store.hpp"
#include "kc/options.hpp"
#include "kc/question.hpp"
#include "kc/rng.hpp"

namespace kc {

struct DistractorRuleReport {
  std::string candidate;
  std::size_t blank = 0;
  bool rule1 = false;
  bool rule2 = false;
  bool rule3 = false;

  bool meets(Tier tier) const;
};

// Throws GraphError when the blank has no constraints.
DistractorRuleReport rule_check(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n,
                                std::size_t blank, const std::string& candidate);

// Every entity meeting the tier's rules for `blank`, minus the golds of all
// blanks; ascending ids.
std::vector<EntityId> distractor_pool(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n,
                                      std::size_t blank, Tier tier);

struct OptionSamplerConfig {
  std::size_t options_per_blank = 3;
  // Redraw attempts per blank before the tier is declared infeasible.
  std::size_t redraws_per_blank = 20;
};

// Throws InfeasibleError when a pool is too small or no redraw certifies.
OptionAssignment sample_options(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n, Tier tier,
                                const OptionSamplerConfig& cfg, Rng& rng);

// Exactly one satisfying combination (none for a NOTA assignment).
bool certify_option_uniqueness(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o);

// Replaces each gold option in place with a fresh distractor of the same tier.
OptionAssignment make_nota(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n,
                           const OptionAssignment& o, Rng& rng, std::size_t redraws_per_blank = 20);

}  // namespace kc
