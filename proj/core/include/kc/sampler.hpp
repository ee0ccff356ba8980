#pragma once
// Answer-graph and question-graph construction:
// center -> capped k-hop neighborhood -> downsampled component -> blanks.

#include <span>
#include <vector>

#include "kc/kg_store.hpp"
#include "kc/question.hpp"
#include "kc/rng.hpp"

namespace kc {

// Entities whose degree is in a fixed set, precomputed once per graph.
class CenterPool {
 public:
  CenterPool(const KnowledgeGraph& g, std::span<const std::uint32_t> degrees);

  bool empty() const { return candidates_.empty(); }
  std::size_t size() const { return candidates_.size(); }
  std::span<const EntityId> candidates() const { return candidates_; }
  // Throws SamplingError when empty.
  EntityId draw(Rng& rng) const;

 private:
  std::vector<EntityId> candidates_;
};

EntityId sample_center(const KnowledgeGraph& g, const SamplerConfig& cfg, Rng& rng);

Neighborhood capped_khop(const KnowledgeGraph& g, EntityId center, const SamplerConfig& cfg, Rng& rng);

// Node-induced triples of `nodes` (ascending ids), as triple indices.
std::vector<std::uint32_t> induced_triples(const KnowledgeGraph& g, std::span<const EntityId> nodes);

// Weakly connected components of the node-induced subgraph; each component is
// ascending and components are ordered by (size descending, node list ascending).
std::vector<std::vector<EntityId>> weak_components(const KnowledgeGraph& g, std::span<const EntityId> nodes);

// Removes high-degree nodes until the largest component fits graph_size and
// returns that component. The center is kept as-is (it may have been removed).
Neighborhood downsample(const KnowledgeGraph& g, const Neighborhood& n, const SamplerConfig& cfg, Rng& rng);

// Masks blank_size of the answer graph's highest-degree nodes.
QuestionGraph select_blanks(const KnowledgeGraph& g, const Neighborhood& answer, const SamplerConfig& cfg,
                            Rng& rng);

}  // namespace kc
