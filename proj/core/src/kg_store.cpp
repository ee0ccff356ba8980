#include "kc/kg_store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "kc/error.hpp"

namespace kc {

namespace {

// Locates the sub-range of a (key, relation)-sorted column block whose
// relation equals `relation`.
template <typename RelAt>
std::pair<std::uint32_t, std::uint32_t> relation_range(std::uint32_t lo, std::uint32_t hi,
                                                       RelationId relation, RelAt rel_at) {
  std::uint32_t first = lo, count = hi - lo;
  while (count > 0) {
    auto step = count / 2, mid = first + step;
    if (rel_at(mid) < relation) {
      first = mid + 1;
      count -= step + 1;
    } else {
      count = step;
    }
  }
  std::uint32_t last = first;
  while (last < hi && rel_at(last) == relation) ++last;
  return {first, last};
}

std::vector<std::uint32_t> offsets_for(std::size_t buckets, std::size_t n,
                                       const auto& key_at) {
  std::vector<std::uint32_t> offsets(buckets + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ++offsets[key_at(i) + 1];
  for (std::size_t b = 0; b < buckets; ++b) offsets[b + 1] += offsets[b];
  return offsets;
}

}  // namespace

bool RelationFilter::admits(std::string_view relation) const {
  const std::string key(relation);
  if (!retained.empty()) return retained.contains(key);
  return !removed.contains(key);
}

void RelationFilter::validate() const {
  for (const auto& r : removed) {
    if (retained.contains(r)) throw ParseError("relation both removed and retained: " + r);
  }
}

RelationFilter RelationFilter::yago_default() {
  RelationFilter f;
  f.removed = {"isLocatedIn", "livesIn",    "happenedIn",     "diedIn",        "wasBornIn",
               "worksAt",     "playsFor",   "isAffiliatedTo", "isPoliticianOf", "isLeaderOf",
               "influences",  "owns",       "isKnownFor",     "dealsWith",     "imports",
               "exports",     "created",    "isInterestedIn", "isConnectedTo"};
  return f;
}

RelationFilter RelationFilter::parse(std::istream& in) {
  RelationFilter f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const char sign = line.front();
    std::string rel = line.substr(1);
    if (rel.empty() || (sign != '-' && sign != '+')) {
      throw ParseError("relation filter entries must start with '-' or '+'", lineno);
    }
    (sign == '-' ? f.removed : f.retained).insert(std::move(rel));
  }
  f.validate();
  return f;
}

RelationFilter RelationFilter::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open relation filter: " + path.string());
  return parse(in);
}

std::string LoadStats::summary() const {
  std::ostringstream os;
  os << "lines_read: " << lines_read << '\n'
     << "triples_read: " << triples_read << '\n'
     << "duplicates: " << duplicates << '\n'
     << "filtered: " << filtered << '\n'
     << "triples_kept: " << triples_kept << '\n'
     << "entities: " << entities << '\n'
     << "relations: " << relations << '\n';
  return os.str();
}

KnowledgeGraph KnowledgeGraph::from_triples(std::span<const Triple> input, LoadStats* stats) {
  KnowledgeGraph g;

  std::vector<std::string> ents, rels;
  ents.reserve(input.size() * 2);
  for (const auto& t : input) {
    ents.push_back(t.head);
    ents.push_back(t.tail);
    rels.push_back(t.relation);
  }
  std::sort(ents.begin(), ents.end());
  ents.erase(std::unique(ents.begin(), ents.end()), ents.end());
  std::sort(rels.begin(), rels.end());
  rels.erase(std::unique(rels.begin(), rels.end()), rels.end());

  g.entity_names_ = std::move(ents);
  g.relation_names_ = std::move(rels);
  g.entity_index_.reserve(g.entity_names_.size());
  for (EntityId i = 0; i < g.entity_names_.size(); ++i) g.entity_index_.emplace(g.entity_names_[i], i);
  for (RelationId i = 0; i < g.relation_names_.size(); ++i) g.relation_index_.emplace(g.relation_names_[i], i);

  g.triples_.reserve(input.size());
  for (const auto& t : input) {
    g.triples_.push_back({g.entity_index_.at(t.head), g.relation_index_.at(t.relation),
                          g.entity_index_.at(t.tail)});
  }
  std::sort(g.triples_.begin(), g.triples_.end());
  const auto before = g.triples_.size();
  g.triples_.erase(std::unique(g.triples_.begin(), g.triples_.end()), g.triples_.end());

  if (stats) {
    stats->duplicates += before - g.triples_.size();
    stats->triples_kept = g.triples_.size();
    stats->entities = g.entity_names_.size();
    stats->relations = g.relation_names_.size();
  }

  const std::size_t n = g.triples_.size();
  const std::size_t ne = g.entity_names_.size();
  const std::size_t nr = g.relation_names_.size();
  const auto& T = g.triples_;

  g.out_offsets_ = offsets_for(ne, n, [&](std::size_t i) { return T[i].head; });
  g.tail_col_.resize(n);
  g.out_ids_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.tail_col_[i] = T[i].tail;
    g.out_ids_[i] = static_cast<std::uint32_t>(i);
  }

  g.in_perm_.resize(n);
  std::iota(g.in_perm_.begin(), g.in_perm_.end(), 0u);
  std::sort(g.in_perm_.begin(), g.in_perm_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::tie(T[a].tail, T[a].relation, T[a].head) < std::tie(T[b].tail, T[b].relation, T[b].head);
  });
  g.in_offsets_ = offsets_for(ne, n, [&](std::size_t i) { return T[i].tail; });
  g.in_rel_col_.resize(n);
  g.head_col_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.in_rel_col_[i] = T[g.in_perm_[i]].relation;
    g.head_col_[i] = T[g.in_perm_[i]].head;
  }

  g.rel_perm_.resize(n);
  std::iota(g.rel_perm_.begin(), g.rel_perm_.end(), 0u);
  std::stable_sort(g.rel_perm_.begin(), g.rel_perm_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return T[a].relation < T[b].relation; });
  g.rel_offsets_ = offsets_for(nr, n, [&](std::size_t i) { return T[i].relation; });

  g.relation_heads_.assign(nr, {});
  g.relation_tails_.assign(nr, {});
  for (const auto& t : T) {
    g.relation_heads_[t.relation].push_back(t.head);
    g.relation_tails_[t.relation].push_back(t.tail);
  }
  for (auto* lists : {&g.relation_heads_, &g.relation_tails_}) {
    for (auto& v : *lists) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  g.degree_.assign(ne, 0);
  std::vector<std::vector<EntityId>> nbrs(ne);
  for (const auto& t : T) {
    ++g.degree_[t.head];
    if (t.tail != t.head) {
      ++g.degree_[t.tail];
      nbrs[t.head].push_back(t.tail);
      nbrs[t.tail].push_back(t.head);
    }
  }
  g.nbr_offsets_.assign(ne + 1, 0);
  for (std::size_t e = 0; e < ne; ++e) {
    auto& v = nbrs[e];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    g.nbr_offsets_[e + 1] = g.nbr_offsets_[e] + static_cast<std::uint32_t>(v.size());
  }
  g.nbr_col_.reserve(g.nbr_offsets_[ne]);
  for (auto& v : nbrs) g.nbr_col_.insert(g.nbr_col_.end(), v.begin(), v.end());

  return g;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

Triple KnowledgeGraph::to_triple(const TripleIds& t) const {
  return {entity_names_[t.head], relation_names_[t.relation], entity_names_[t.tail]};
}

bool KnowledgeGraph::contains(EntityId head, RelationId relation, EntityId tail) const {
  auto ts = tails(head, relation);
  return std::binary_search(ts.begin(), ts.end(), tail);
}

bool KnowledgeGraph::contains(const Triple& t) const {
  auto h = find_entity(t.head);
  auto r = find_relation(t.relation);
  auto tl = find_entity(t.tail);
  return h && r && tl && contains(*h, *r, *tl);
}

std::span<const EntityId> KnowledgeGraph::tails(EntityId head, RelationId relation) const {
  if (head >= entity_names_.size()) return {};
  auto [lo, hi] = relation_range(out_offsets_[head], out_offsets_[head + 1], relation,
                                 [&](std::uint32_t i) { return triples_[i].relation; });
  return std::span<const EntityId>(tail_col_).subspan(lo, hi - lo);
}

std::span<const EntityId> KnowledgeGraph::heads(EntityId tail, RelationId relation) const {
  if (tail >= entity_names_.size()) return {};
  auto [lo, hi] = relation_range(in_offsets_[tail], in_offsets_[tail + 1], relation,
                                 [&](std::uint32_t i) { return in_rel_col_[i]; });
  return std::span<const EntityId>(head_col_).subspan(lo, hi - lo);
}

std::span<const EntityId> KnowledgeGraph::neighbor_ids(EntityId e) const {
  return std::span<const EntityId>(nbr_col_).subspan(nbr_offsets_[e], nbr_offsets_[e + 1] - nbr_offsets_[e]);
}

std::span<const std::uint32_t> KnowledgeGraph::out_triples(EntityId e) const {
  return std::span<const std::uint32_t>(out_ids_).subspan(out_offsets_[e], out_offsets_[e + 1] - out_offsets_[e]);
}

std::span<const std::uint32_t> KnowledgeGraph::in_triples(EntityId e) const {
  return std::span<const std::uint32_t>(in_perm_).subspan(in_offsets_[e], in_offsets_[e + 1] - in_offsets_[e]);
}

std::span<const std::uint32_t> KnowledgeGraph::relation_triples(RelationId r) const {
  return std::span<const std::uint32_t>(rel_perm_).subspan(rel_offsets_[r], rel_offsets_[r + 1] - rel_offsets_[r]);
}

std::uint32_t KnowledgeGraph::degree(std::string_view name) const {
  auto e = find_entity(name);
  return e ? degree_[*e] : 0;
}

std::set<std::string> KnowledgeGraph::tails_of(std::string_view head, std::string_view relation) const {
  std::set<std::string> out;
  auto h = find_entity(head);
  auto r = find_relation(relation);
  if (!h || !r) return out;
  for (auto t : tails(*h, *r)) out.insert(entity_names_[t]);
  return out;
}

std::set<std::string> KnowledgeGraph::heads_of(std::string_view tail, std::string_view relation) const {
  std::set<std::string> out;
  auto t = find_entity(tail);
  auto r = find_relation(relation);
  if (!t || !r) return out;
  for (auto h : heads(*t, *r)) out.insert(entity_names_[h]);
  return out;
}

std::set<std::string> KnowledgeGraph::neighbors(std::string_view entity) const {
  std::set<std::string> out;
  auto e = find_entity(entity);
  if (!e) return out;
  for (auto n : neighbor_ids(*e)) out.insert(entity_names_[n]);
  return out;
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return a.entity_names_ == b.entity_names_ && a.relation_names_ == b.relation_names_ &&
         a.triples_ == b.triples_;
}

KnowledgeGraph parse_graph(std::istream& in, const RelationFilter& filter, LoadStats* stats) {
  filter.validate();
  LoadStats local;
  std::vector<Triple> kept;
  std::string line;
  while (std::getline(in, line)) {
    ++local.lines_read;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<std::string_view, 3> fields;
    std::size_t count = 0, start = 0;
    std::string_view sv(line);
    for (;;) {
      auto tab = sv.find('\t', start);
      auto piece = sv.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start);
      if (count < 3) fields[count] = piece;
      ++count;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (count != 3) {
      throw ParseError("expected 3 tab-separated fields, found " + std::to_string(count), local.lines_read);
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError("empty field in triple", local.lines_read);
    }
    ++local.triples_read;
    if (!filter.admits(fields[1])) {
      ++local.filtered;
      continue;
    }
    kept.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  }
  if (kept.empty()) throw GraphError("knowledge graph is empty after filtering");
  auto g = KnowledgeGraph::from_triples(kept, &local);
  if (stats) *stats = local;
  return g;
}

KnowledgeGraph load_graph(const std::filesystem::path& path, const RelationFilter& filter, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open knowledge graph: " + path.string());
  return parse_graph(in, filter, stats);
}

void write_triples_tsv(std::ostream& out, std::span<const Triple> triples) {
  for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

}  // namespace kc
