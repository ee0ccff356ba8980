#pragma once
// Seeded encyclopedic-style graph for tests, benchmarks and offline demos:
// people, films, countries and their usual relations, with skewed popularity.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kc/kg_store.hpp"

namespace kc {

struct SyntheticKgConfig {
  std::size_t persons = 3000;
  std::size_t films = 900;
  std::size_t countries = 40;
  std::size_t cities = 160;
  std::size_t universities = 60;
  std::size_t prizes = 30;
  std::size_t languages = 20;
  std::size_t currencies = 20;
  std::size_t events = 25;
  std::size_t instruments = 12;
  double zipf_exponent = 0.8;
  double gender_rate = 0.3;
  double citizenship_rate = 0.5;
  // Also emit relations the default filter removes (wasBornIn, livesIn, ...).
  bool include_filtered_relations = true;
  std::uint64_t seed = 1;
};

// Sorted, duplicate-free triples.
std::vector<Triple> synthetic_triples(const SyntheticKgConfig& cfg);

KnowledgeGraph synthetic_graph(const SyntheticKgConfig& cfg, const RelationFilter& filter);

}  // namespace kc
