#pragma once
// In-memory knowledge graph of directed (head, relation, tail) triples.
//
// Entities and relations are interned to dense 32-bit ids. Ids are assigned in
// ascending name order, so comparing ids compares names; every "entity-id
// ascending" tiebreak in the library relies on this.
//
// Three sorted permutations of the triple table back the lookups:
//   (head, relation, tail)  -> tails(h, r), out_triples(h)
//   (tail, relation, head)  -> heads(t, r), in_triples(t)
//   (relation, head, tail)  -> relation_triples(r)
// The graph is immutable after construction and safe for concurrent readers.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kc {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleIds {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend auto operator<=>(const TripleIds&, const TripleIds&) = default;
  friend bool operator==(const TripleIds&, const TripleIds&) = default;
};

// Relations to drop (or keep) while loading. When `retained` is non-empty it
// is an allow-list; otherwise everything outside `removed` is kept.
struct RelationFilter {
  std::set<std::string> removed;
  std::set<std::string> retained;

  bool admits(std::string_view relation) const;
  void validate() const;

  // Location-related, time-sensitive and not-self-evident YAGO relations.
  static RelationFilter yago_default();
  static RelationFilter none() { return {}; }
  // One relation per line; `-rel` removes, `+rel` retains. Blank lines and
  // lines starting with '#' are ignored.
  static RelationFilter parse(std::istream& in);
  static RelationFilter load(const std::filesystem::path& path);
};

struct LoadStats {
  std::size_t lines_read = 0;
  std::size_t triples_read = 0;
  std::size_t duplicates = 0;
  std::size_t filtered = 0;
  std::size_t triples_kept = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;

  // Line-oriented "key: value" summary.
  std::string summary() const;
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Deduplicates; applies no relation filter.
  static KnowledgeGraph from_triples(std::span<const Triple> triples, LoadStats* stats = nullptr);

  std::size_t triple_count() const { return triples_.size(); }
  std::size_t entity_count() const { return entity_names_.size(); }
  std::size_t relation_count() const { return relation_names_.size(); }
  bool empty() const { return triples_.empty(); }

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  const std::string& entity_name(EntityId id) const { return entity_names_[id]; }
  const std::string& relation_name(RelationId id) const { return relation_names_[id]; }
  std::span<const std::string> entity_names() const { return entity_names_; }
  std::span<const std::string> relation_names() const { return relation_names_; }

  // Triples in (head, relation, tail) order.
  std::span<const TripleIds> triples() const { return triples_; }
  const TripleIds& triple_at(std::uint32_t index) const { return triples_[index]; }
  Triple to_triple(const TripleIds& t) const;

  bool contains(EntityId head, RelationId relation, EntityId tail) const;
  bool contains(const Triple& t) const;

  // Sorted entity ids.
  std::span<const EntityId> tails(EntityId head, RelationId relation) const;
  std::span<const EntityId> heads(EntityId tail, RelationId relation) const;
  std::span<const EntityId> relation_heads(RelationId relation) const { return relation_heads_[relation]; }
  std::span<const EntityId> relation_tails(RelationId relation) const { return relation_tails_[relation]; }
  // Neighbours in either direction, self excluded.
  std::span<const EntityId> neighbor_ids(EntityId e) const;

  // Indices into triples().
  std::span<const std::uint32_t> out_triples(EntityId e) const;
  std::span<const std::uint32_t> in_triples(EntityId e) const;
  std::span<const std::uint32_t> relation_triples(RelationId r) const;

  // Triples incident to e, in or out; a self-loop counts once.
  std::uint32_t degree(EntityId e) const { return degree_[e]; }
  std::uint32_t degree(std::string_view name) const;

  std::set<std::string> tails_of(std::string_view head, std::string_view relation) const;
  std::set<std::string> heads_of(std::string_view tail, std::string_view relation) const;
  std::set<std::string> neighbors(std::string_view entity) const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;

  std::vector<TripleIds> triples_;  // sorted (h, r, t)

  // CSR over triples_ by head; tail_col_[i] = triples_[i].tail.
  std::vector<std::uint32_t> out_offsets_;
  std::vector<EntityId> tail_col_;
  std::vector<std::uint32_t> out_ids_;

  // CSR over the (t, r, h) permutation.
  std::vector<std::uint32_t> in_offsets_;
  std::vector<std::uint32_t> in_perm_;
  std::vector<RelationId> in_rel_col_;
  std::vector<EntityId> head_col_;

  // CSR over the (r, h, t) permutation.
  std::vector<std::uint32_t> rel_offsets_;
  std::vector<std::uint32_t> rel_perm_;

  std::vector<std::vector<EntityId>> relation_heads_;
  std::vector<std::vector<EntityId>> relation_tails_;

  std::vector<std::uint32_t> nbr_offsets_;
  std::vector<EntityId> nbr_col_;

  std::vector<std::uint32_t> degree_;
};

// Parses `head<TAB>relation<TAB>tail` lines. Throws ParseError on a line with
// the wrong field count or an empty field, GraphError when nothing survives
// the filter.
KnowledgeGraph parse_graph(std::istream& in, const RelationFilter& filter, LoadStats* stats = nullptr);
KnowledgeGraph load_graph(const std::filesystem::path& path, const RelationFilter& filter,
                          LoadStats* stats = nullptr);

void write_triples_tsv(std::ostream& out, std::span<const Triple> triples);

}  // namespace kc
