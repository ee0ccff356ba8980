#include "kc/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "kc/error.hpp"

namespace kc {

CenterPool::CenterPool(const KnowledgeGraph& g, std::span<const std::uint32_t> degrees) {
  for (EntityId e = 0; e < g.entity_count(); ++e) {
    if (std::find(degrees.begin(), degrees.end(), g.degree(e)) != degrees.end()) candidates_.push_back(e);
  }
}

EntityId CenterPool::draw(Rng& rng) const {
  if (candidates_.empty()) throw SamplingError("no entity has a degree in the center degree set");
  return rng.pick(candidates());
}

EntityId sample_center(const KnowledgeGraph& g, const SamplerConfig& cfg, Rng& rng) {
  return CenterPool(g, cfg.center_degrees).draw(rng);
}

Neighborhood capped_khop(const KnowledgeGraph& g, EntityId center, const SamplerConfig& cfg, Rng& rng) {
  std::vector<EntityId> nodes{center};
  std::vector<EntityId> frontier{center};
  for (std::size_t hop = 0; hop < cfg.k_hops && !frontier.empty(); ++hop) {
    std::vector<EntityId> next;
    for (auto u : frontier) {
      for (auto v : g.neighbor_ids(u)) next.push_back(v);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::sort(nodes.begin(), nodes.end());
    std::vector<EntityId> fresh;
    std::set_difference(next.begin(), next.end(), nodes.begin(), nodes.end(), std::back_inserter(fresh));
    if (fresh.size() > cfg.layer_cap) fresh = rng.sample(std::span<const EntityId>(fresh), cfg.layer_cap);
    nodes.insert(nodes.end(), fresh.begin(), fresh.end());
    frontier = std::move(fresh);
  }
  std::sort(nodes.begin(), nodes.end());
  Neighborhood n;
  n.center = center;
  n.triples = induced_triples(g, nodes);
  n.nodes = std::move(nodes);
  return n;
}

std::vector<std::uint32_t> induced_triples(const KnowledgeGraph& g, std::span<const EntityId> nodes) {
  std::vector<std::uint32_t> out;
  for (auto u : nodes) {
    for (auto idx : g.out_triples(u)) {
      if (std::binary_search(nodes.begin(), nodes.end(), g.triple_at(idx).tail)) out.push_back(idx);
    }
  }
  return out;
}

std::vector<std::vector<EntityId>> weak_components(const KnowledgeGraph& g, std::span<const EntityId> nodes) {
  const std::size_t n = nodes.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto index_of = [&](EntityId e) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), e) - nodes.begin());
  };
  for (auto idx : induced_triples(g, nodes)) {
    const auto& t = g.triple_at(idx);
    auto a = find(index_of(t.head)), b = find(index_of(t.tail));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<EntityId>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(nodes[i]);
  std::vector<std::vector<EntityId>> out;
  for (auto& grp : groups) {
    if (!grp.empty()) out.push_back(std::move(grp));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return out;
}

Neighborhood downsample(const KnowledgeGraph& g, const Neighborhood& n, const SamplerConfig& cfg, Rng& rng) {
  if (n.nodes.empty()) throw SamplingError("empty neighborhood");
  std::vector<EntityId> nodes = n.nodes;
  auto components = weak_components(g, nodes);
  while (components.front().size() > cfg.graph_size) {
    std::vector<EntityId> sorted = nodes;
    std::sort(sorted.begin(), sorted.end(), [&](EntityId a, EntityId b) {
      if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
      return a < b;
    });
    const std::size_t rr = std::max<std::size_t>(1, cfg.reduce_multiplier.apply(nodes.size() - cfg.graph_size));
    const std::size_t hi = std::min(rr - 1, sorted.size() - 1);
    const std::size_t lo = std::min((rr - 1) / 2, hi);
    const EntityId victim = sorted[rng.uniform_between(lo, hi)];
    nodes.erase(std::lower_bound(nodes.begin(), nodes.end(), victim));
    if (nodes.empty()) break;
    components = weak_components(g, nodes);
  }
  if (nodes.empty() || components.front().size() < 2) {
    throw SamplingError("answer graph collapsed below two nodes");
  }
  Neighborhood out;
  out.center = n.center;
  out.nodes = std::move(components.front());
  out.triples = induced_triples(g, out.nodes);
  return out;
}

QuestionGraph select_blanks(const KnowledgeGraph& g, const Neighborhood& answer, const SamplerConfig& cfg,
                            Rng& rng) {
  const std::size_t s_b = cfg.blank_size;
  if (s_b == 0) throw SamplingError("blank size must be positive");

  std::vector<std::size_t> local_degree(answer.nodes.size(), 0);
  auto index_of = [&](EntityId e) {
    return static_cast<std::size_t>(std::lower_bound(answer.nodes.begin(), answer.nodes.end(), e) -
                                    answer.nodes.begin());
  };
  for (auto idx : answer.triples) {
    const auto& t = g.triple_at(idx);
    ++local_degree[index_of(t.head)];
    if (t.tail != t.head) ++local_degree[index_of(t.tail)];
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < answer.nodes.size(); ++i) {
    if (local_degree[i] > 0) order.push_back(i);
  }
  if (s_b > order.size()) throw SamplingError("answer graph has fewer connected nodes than blanks");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return local_degree[a] > local_degree[b]; });

  const std::size_t br = std::min(order.size(), std::max(s_b, cfg.blank_multiplier.apply(s_b)));
  const auto picked = rng.sample_indices(br, s_b);

  QuestionGraph q;
  q.config = cfg;
  q.center = g.entity_name(answer.center);
  for (auto e : answer.nodes) q.nodes.push_back(g.entity_name(e));

  std::vector<std::optional<std::size_t>> blank_of(answer.nodes.size());
  for (std::size_t b = 0; b < picked.size(); ++b) {
    const std::size_t node = order[picked[b]];
    blank_of[node] = b;
    q.gold.push_back(g.entity_name(answer.nodes[node]));
  }
  auto slot_for = [&](EntityId e) {
    auto i = index_of(e);
    return blank_of[i] ? Slot::of_blank(*blank_of[i]) : Slot::known(g.entity_name(e));
  };
  for (auto idx : answer.triples) {
    const auto& t = g.triple_at(idx);
    q.constraints.push_back({slot_for(t.head), g.relation_name(t.relation), slot_for(t.tail)});
  }
  return q;
}

}  // namespace kc
