#include "kc/option_sampler.hpp"

#include <algorithm>

#include "kc/csp_solver.hpp"
#include "kc/error.hpp"

namespace kc {

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::easy: return "easy";
    case Tier::medium: return "medium";
    case Tier::hard: return "hard";
  }
  return "easy";
}

Tier parse_tier(std::string_view text) {
  if (text == "easy") return Tier::easy;
  if (text == "medium") return Tier::medium;
  if (text == "hard") return Tier::hard;
  throw ParseError("unknown tier '" + std::string(text) + "'");
}

bool DistractorRuleReport::meets(Tier tier) const {
  switch (tier) {
    case Tier::easy: return rule1;
    case Tier::medium: return rule1 && rule2;
    case Tier::hard: return rule1 && rule2 && rule3;
  }
  return false;
}

namespace {

struct BlankRoles {
  // Spans of entities playing the blank's role, one per constraint.
  std::vector<std::span<const EntityId>> role;
  // Entities satisfying each definite constraint.
  std::vector<std::span<const EntityId>> definite;
};

BlankRoles blank_roles(const KnowledgeGraph& g, const QuestionGraph& q, std::size_t blank) {
  BlankRoles out;
  bool any = false;
  for (const auto& c : q.constraints) {
    if (!c.mentions(blank)) continue;
    any = true;
    auto rel = g.find_relation(c.relation);
    if (!rel) continue;
    const bool as_head = c.head.blank == blank, as_tail = c.tail.blank == blank;
    if (as_head) out.role.push_back(g.relation_heads(*rel));
    if (as_tail) out.role.push_back(g.relation_tails(*rel));
    if (c.definite_for(blank)) {
      auto known = g.find_entity(as_head ? c.tail.entity : c.head.entity);
      if (known) out.definite.push_back(as_head ? g.heads(*known, *rel) : g.tails(*known, *rel));
    }
  }
  if (!any) throw GraphError(blank_label(blank) + " has no constraints");
  return out;
}

bool in_any(std::span<const std::span<const EntityId>> lists, EntityId e) {
  return std::any_of(lists.begin(), lists.end(),
                     [&](auto s) { return std::binary_search(s.begin(), s.end(), e); });
}

std::vector<EntityId> sorted_union(std::span<const std::span<const EntityId>> lists) {
  std::vector<EntityId> out;
  for (auto s : lists) out.insert(out.end(), s.begin(), s.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EntityId> gold_ids(const KnowledgeGraph& g, const QuestionGraph& q) {
  std::vector<EntityId> out;
  for (const auto& name : q.gold) {
    if (auto e = g.find_entity(name)) out.push_back(*e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

OptionAssignment draw(const KnowledgeGraph& g, const QuestionGraph& q, Tier tier,
                      const std::vector<std::vector<EntityId>>& pools, std::size_t k, Rng& rng) {
  OptionAssignment o;
  o.tier = tier;
  for (std::size_t b = 0; b < q.blank_count(); ++b) {
    auto picked = rng.sample(std::span<const EntityId>(pools[b]), k - 1);
    rng.shuffle(picked);
    std::vector<std::string> names;
    for (auto e : picked) names.push_back(g.entity_name(e));
    const std::size_t pos = rng.uniform(k);
    names.insert(names.begin() + static_cast<std::ptrdiff_t>(pos), q.gold[b]);
    o.per_blank.push_back(std::move(names));
    o.gold_index.push_back(pos);
  }
  return o;
}

}  // namespace

DistractorRuleReport rule_check(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n,
                                std::size_t blank, const std::string& candidate) {
  const auto roles = blank_roles(g, q, blank);
  DistractorRuleReport r;
  r.candidate = candidate;
  r.blank = blank;
  auto e = g.find_entity(candidate);
  if (!e) return r;
  r.rule1 = in_any(roles.role, *e);
  r.rule2 = n.contains(*e);
  r.rule3 = in_any(roles.definite, *e);
  return r;
}

std::vector<EntityId> distractor_pool(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n,
                                      std::size_t blank, Tier tier) {
  const auto roles = blank_roles(g, q, blank);
  std::vector<EntityId> pool;
  switch (tier) {
    case Tier::easy:
      pool = sorted_union(roles.role);
      break;
    case Tier::medium:
      for (auto e : n.nodes) {
        if (in_any(roles.role, e)) pool.push_back(e);
      }
      break;
    case Tier::hard:
      for (auto e : sorted_union(roles.definite)) {
        if (n.contains(e) && in_any(roles.role, e)) pool.push_back(e);
      }
      break;
  }
  const auto golds = gold_ids(g, q);
  std::erase_if(pool, [&](EntityId e) { return std::binary_search(golds.begin(), golds.end(), e); });
  return pool;
}

OptionAssignment sample_options(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n, Tier tier,
                                const OptionSamplerConfig& cfg, Rng& rng) {
  const std::size_t k = cfg.options_per_blank;
  if (k < 2) throw InfeasibleError("options_per_blank must be at least 2");
  std::vector<std::vector<EntityId>> pools;
  for (std::size_t b = 0; b < q.blank_count(); ++b) {
    pools.push_back(distractor_pool(g, q, n, b, tier));
    if (pools.back().size() < k - 1) {
      throw InfeasibleError(std::string(to_string(tier)) + " tier: " + blank_label(b) + " has " +
                            std::to_string(pools.back().size()) + " candidate distractors, needs " +
                            std::to_string(k - 1));
    }
  }
  const std::size_t budget = std::max<std::size_t>(1, cfg.redraws_per_blank * q.blank_count());
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    auto o = draw(g, q, tier, pools, k, rng);
    if (certify_option_uniqueness(g, q, o)) return o;
  }
  throw InfeasibleError(std::string(to_string(tier)) + " tier: no uniquely solvable option set after " +
                        std::to_string(budget) + " draws");
}

bool certify_option_uniqueness(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o) {
  return count_option_solutions(g, q, o, 2) == (o.nota ? 0u : 1u);
}

OptionAssignment make_nota(const KnowledgeGraph& g, const QuestionGraph& q, const Neighborhood& n,
                           const OptionAssignment& o, Rng& rng, std::size_t redraws_per_blank) {
  if (o.nota) throw InfeasibleError("options are already none-of-the-above");
  std::vector<std::vector<EntityId>> pools;
  for (std::size_t b = 0; b < q.blank_count(); ++b) {
    auto pool = distractor_pool(g, q, n, b, o.tier);
    std::erase_if(pool, [&](EntityId e) {
      const auto& listed = o.per_blank[b];
      return std::find(listed.begin(), listed.end(), g.entity_name(e)) != listed.end();
    });
    if (pool.empty()) throw InfeasibleError("no replacement distractor for " + blank_label(b));
    pools.push_back(std::move(pool));
  }
  const std::size_t budget = std::max<std::size_t>(1, redraws_per_blank * q.blank_count());
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    OptionAssignment out = o;
    out.nota = true;
    out.gold_index.clear();
    for (std::size_t b = 0; b < q.blank_count(); ++b) {
      out.per_blank[b][o.gold_index[b]] = g.entity_name(rng.pick(std::span<const EntityId>(pools[b])));
    }
    if (certify_option_uniqueness(g, q, out)) return out;
  }
  throw InfeasibleError("none-of-the-above variant still has a satisfying combination");
}

}  // namespace kc
