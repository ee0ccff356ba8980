#pragma once

#include <cstddef>
#include <vector>

#include "kc/kg_store.hpp"
#include "kc/options.hpp"
#include "kc/question.hpp"
#include "kc/rng.hpp"

namespace kc {

struct KnowledgePassage {
  std::vector<Triple> triples;
  std::size_t useful_count = 0;
  std::size_t noise_count = 0;
  // Some constraint got fewer noise triples than requested.
  bool short_padding = false;

  friend bool operator==(const KnowledgePassage&, const KnowledgePassage&) = default;
};

// Per constraint: its gold-filled triple plus `noise_per_constraint` distinct
// true KG triples of the same relation, preferring (1) triples through the
// constraint's known entity whose blank-side entity is in the neighborhood,
// then (2) triples whose blank-side entity is in the neighborhood, then (3)
// any triple of the relation. The union is shuffled.
KnowledgePassage compose_knowledge(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o,
                                   const Neighborhood& n, Rng& rng, std::size_t noise_per_constraint = 3);

}  // namespace kc
