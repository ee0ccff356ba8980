#include "kc/knowledge_composer.hpp"

#include <algorithm>

#include "kc/error.hpp"

namespace kc {

namespace {

// Appends up to `want` triples drawn uniformly from `pool`, skipping ones
// already taken.
void take_from(std::span<const std::uint32_t> pool, std::size_t want, std::vector<std::uint32_t>& taken,
               Rng& rng) {
  if (want == 0 || pool.empty()) return;
  auto idx = rng.sample_indices(pool.size(), std::min(pool.size(), want + taken.size()));
  rng.shuffle(idx);
  std::size_t added = 0;
  for (auto i : idx) {
    if (added == want) break;
    if (std::find(taken.begin(), taken.end(), pool[i]) != taken.end()) continue;
    taken.push_back(pool[i]);
    ++added;
  }
}

}  // namespace

KnowledgePassage compose_knowledge(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o,
                                   const Neighborhood& n, Rng& rng, std::size_t noise_per_constraint) {
  if (o.nota) throw InfeasibleError("knowledge passages need the gold answer among the options");
  KnowledgePassage passage;
  Assignment gold = q.gold;

  for (const auto& c : q.constraints) {
    const Triple useful = *as_triple(ground(c, gold));
    passage.triples.push_back(useful);
    ++passage.useful_count;

    auto rel = g.find_relation(c.relation);
    if (!rel) {
      passage.short_padding = true;
      continue;
    }
    // The blank side of the constraint; the head when there is no blank.
    const bool blank_is_tail = !c.head.is_blank() && c.tail.is_blank();
    std::optional<TripleIds> gold_triple;
    auto gh = g.find_entity(useful.head), gt = g.find_entity(useful.tail);
    if (gh && gt) gold_triple = TripleIds{*gh, *rel, *gt};
    auto is_gold = [&](std::uint32_t idx) { return gold_triple && g.triple_at(idx) == *gold_triple; };

    std::vector<std::uint32_t> taken;
    const auto& known = blank_is_tail ? c.head : c.tail;
    if (c.has_blank() && !known.is_blank()) {
      std::vector<std::uint32_t> anchored;
      if (auto k = g.find_entity(known.entity)) {
        for (auto idx : blank_is_tail ? g.out_triples(*k) : g.in_triples(*k)) {
          const auto& t = g.triple_at(idx);
          const EntityId side = blank_is_tail ? t.tail : t.head;
          if (t.relation == *rel && n.contains(side) && !is_gold(idx)) anchored.push_back(idx);
        }
      }
      take_from(anchored, noise_per_constraint, taken, rng);
    }
    if (taken.size() < noise_per_constraint) {
      std::vector<std::uint32_t> nearby;
      for (auto e : n.nodes) {
        for (auto idx : blank_is_tail ? g.in_triples(e) : g.out_triples(e)) {
          if (g.triple_at(idx).relation == *rel && !is_gold(idx)) nearby.push_back(idx);
        }
      }
      std::sort(nearby.begin(), nearby.end());
      take_from(nearby, noise_per_constraint - taken.size(), taken, rng);
    }
    if (taken.size() < noise_per_constraint) {
      std::vector<std::uint32_t> any;
      for (auto idx : g.relation_triples(*rel)) {
        if (!is_gold(idx)) any.push_back(idx);
      }
      take_from(any, noise_per_constraint - taken.size(), taken, rng);
    }
    if (taken.size() < noise_per_constraint) passage.short_padding = true;
    for (auto idx : taken) passage.triples.push_back(g.to_triple(g.triple_at(idx)));
    passage.noise_count += taken.size();
  }
  rng.shuffle(passage.triples);
  return passage;
}

}  // namespace kc
