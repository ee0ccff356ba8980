#pragma once
// A small seeded dataset over the synthetic graph, built once per process.

#include "kc/pipeline.hpp"
#include "kc/synthetic_kg.hpp"

namespace kc::testing {

inline const KnowledgeGraph& small_graph() {
  static const KnowledgeGraph g = [] {
    SyntheticKgConfig c;
    c.persons = 800;
    c.films = 240;
    c.seed = 5;
    return synthetic_graph(c, RelationFilter::yago_default());
  }();
  return g;
}

inline GenerationConfig small_generation() {
  GenerationConfig cfg;
  cfg.per_tier = 25;
  cfg.nota = true;
  cfg.seed = 42;
  return cfg;
}

inline const GeneratedDataset& small_dataset() {
  static const GeneratedDataset d = generate_dataset(small_graph(), small_generation());
  return d;
}

inline std::vector<Problem> flatten(const std::map<Tier, std::vector<Problem>>& by_tier) {
  std::vector<Problem> out;
  for (const auto& [tier, ps] : by_tier) out.insert(out.end(), ps.begin(), ps.end());
  return out;
}

}  // namespace kc::testing
