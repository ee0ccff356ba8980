#include "kc/csp_solver.hpp"

#include <algorithm>

namespace kc {

namespace {

constexpr std::uint32_t kMissing = std::numeric_limits<std::uint32_t>::max();

// Constraint resolved to graph ids. For blank slots `head`/`tail` hold the
// blank index; a missing entity or relation makes the constraint unsatisfiable.
struct Compiled {
  bool head_blank = false;
  bool tail_blank = false;
  std::uint32_t head = 0;
  std::uint32_t tail = 0;
  RelationId relation = 0;
  bool resolvable = true;
};

std::vector<Compiled> compile(const KnowledgeGraph& g, const QuestionGraph& q) {
  std::vector<Compiled> out;
  out.reserve(q.constraints.size());
  for (const auto& c : q.constraints) {
    Compiled k;
    auto rel = g.find_relation(c.relation);
    k.resolvable = rel.has_value();
    k.relation = rel.value_or(0);
    auto slot = [&](const Slot& s, bool& is_blank, std::uint32_t& value) {
      if (s.is_blank()) {
        is_blank = true;
        value = static_cast<std::uint32_t>(*s.blank);
      } else if (auto e = g.find_entity(s.entity)) {
        value = *e;
      } else {
        k.resolvable = false;
      }
    };
    slot(c.head, k.head_blank, k.head);
    slot(c.tail, k.tail_blank, k.tail);
    out.push_back(k);
  }
  return out;
}

// Option entity ids per blank; kMissing for names outside the graph.
std::vector<std::vector<std::uint32_t>> option_ids(const KnowledgeGraph& g, const OptionAssignment& o) {
  std::vector<std::vector<std::uint32_t>> ids(o.per_blank.size());
  for (std::size_t b = 0; b < o.per_blank.size(); ++b) {
    for (const auto& name : o.per_blank[b]) ids[b].push_back(g.find_entity(name).value_or(kMissing));
  }
  return ids;
}

// Checks a constraint whose blanks all have values in `value` (entity ids).
bool holds(const KnowledgeGraph& g, const Compiled& c, std::span<const std::uint32_t> value) {
  if (!c.resolvable) return false;
  const auto h = c.head_blank ? value[c.head] : c.head;
  const auto t = c.tail_blank ? value[c.tail] : c.tail;
  if (h == kMissing || t == kMissing) return false;
  return g.contains(h, c.relation, t);
}

std::vector<EntityId> intersect(std::vector<std::span<const EntityId>> lists) {
  if (lists.empty()) return {};
  std::sort(lists.begin(), lists.end(), [](auto a, auto b) { return a.size() < b.size(); });
  std::vector<EntityId> acc(lists[0].begin(), lists[0].end());
  for (std::size_t i = 1; i < lists.size() && !acc.empty(); ++i) {
    std::vector<EntityId> next;
    std::set_intersection(acc.begin(), acc.end(), lists[i].begin(), lists[i].end(), std::back_inserter(next));
    acc = std::move(next);
  }
  return acc;
}

class EntitySearch {
 public:
  EntitySearch(const KnowledgeGraph& g, const QuestionGraph& q, std::size_t limit)
      : g_(g), q_(q), limit_(limit), cs_(compile(g, q)), value_(q.blank_count(), kMissing),
        assigned_(q.blank_count(), false) {}

  std::vector<Assignment> run() {
    for (const auto& c : cs_) {
      if (!c.resolvable) return {};
      if (!c.head_blank && !c.tail_blank && !g_.contains(c.head, c.relation, c.tail)) return {};
    }
    if (q_.blank_count() == 0) return {Assignment{}};
    search(0);
    return std::move(found_);
  }

 private:
  std::vector<EntityId> candidates(std::size_t b) const {
    std::vector<std::span<const EntityId>> anchored, loose;
    for (const auto& c : cs_) {
      const bool as_head = c.head_blank && c.head == b;
      const bool as_tail = c.tail_blank && c.tail == b;
      if (!as_head && !as_tail) continue;
      if (as_head && as_tail) {
        loose.push_back(g_.relation_heads(c.relation));
        continue;
      }
      const bool other_blank = as_head ? c.tail_blank : c.head_blank;
      const auto other = as_head ? c.tail : c.head;
      if (other_blank && !assigned_[other]) {
        loose.push_back(as_head ? g_.relation_heads(c.relation) : g_.relation_tails(c.relation));
        continue;
      }
      const EntityId known = other_blank ? value_[other] : other;
      anchored.push_back(as_head ? g_.heads(known, c.relation) : g_.tails(known, c.relation));
    }
    if (!anchored.empty()) return intersect(std::move(anchored));
    return intersect(std::move(loose));
  }

  bool self_loops_hold(std::size_t b) const {
    for (const auto& c : cs_) {
      if (c.head_blank && c.tail_blank && c.head == b && c.tail == b &&
          !g_.contains(value_[b], c.relation, value_[b])) {
        return false;
      }
    }
    return true;
  }

  // Returns true once the limit is reached.
  bool search(std::size_t depth) {
    if (depth == q_.blank_count()) {
      Assignment a;
      for (auto v : value_) a.push_back(g_.entity_name(v));
      found_.push_back(std::move(a));
      return found_.size() >= limit_;
    }
    std::size_t best = q_.blank_count();
    std::vector<EntityId> best_cands;
    for (std::size_t b = 0; b < q_.blank_count(); ++b) {
      if (assigned_[b]) continue;
      auto cands = candidates(b);
      if (cands.empty()) return false;
      if (best == q_.blank_count() || cands.size() < best_cands.size()) {
        best = b;
        best_cands = std::move(cands);
      }
    }
    assigned_[best] = true;
    for (auto v : best_cands) {
      value_[best] = v;
      if (!self_loops_hold(best)) continue;
      if (search(depth + 1)) return true;
    }
    assigned_[best] = false;
    value_[best] = kMissing;
    return false;
  }

  const KnowledgeGraph& g_;
  const QuestionGraph& q_;
  std::size_t limit_;
  std::vector<Compiled> cs_;
  std::vector<std::uint32_t> value_;
  std::vector<bool> assigned_;
  std::vector<Assignment> found_;
};

std::optional<Triple> grounded_triple(const QuestionGraph& q, const OptionAssignment& o, std::size_t ci,
                                      std::span<const std::optional<std::size_t>> choice) {
  PartialAssignment values(q.blank_count());
  for (std::size_t b = 0; b < choice.size(); ++b) {
    if (choice[b]) values[b] = o.per_blank[b][*choice[b]];
  }
  return as_triple(ground(q.constraints[ci], values));
}

class OptionState {
 public:
  OptionState(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o)
      : g(g), q(q), o(o), cs(compile(g, q)), ids(option_ids(g, o)), value(q.blank_count(), kMissing),
        choice(q.blank_count()) {}

  void set(std::size_t b, std::size_t i) {
    choice[b] = i;
    value[b] = ids[b][i];
  }
  void clear(std::size_t b) {
    choice[b].reset();
    value[b] = kMissing;
  }
  bool complete(std::size_t ci) const {
    const auto& c = cs[ci];
    return (!c.head_blank || choice[c.head]) && (!c.tail_blank || choice[c.tail]);
  }
  bool ok(std::size_t ci) const { return holds(g, cs[ci], value); }
  Triple triple(std::size_t ci) const { return *grounded_triple(q, o, ci, choice); }

  const KnowledgeGraph& g;
  const QuestionGraph& q;
  const OptionAssignment& o;
  std::vector<Compiled> cs;
  std::vector<std::vector<std::uint32_t>> ids;
  std::vector<std::uint32_t> value;
  std::vector<std::optional<std::size_t>> choice;
};

std::optional<std::size_t> first_violated_grounded(const OptionState& s) {
  for (std::size_t ci = 0; ci < s.q.constraints.size(); ++ci) {
    if (!s.q.constraints[ci].has_blank() && !s.ok(ci)) return ci;
  }
  return std::nullopt;
}

class StagedSearch {
 public:
  StagedSearch(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o) : s_(g, q, o) {}

  SolveTranscript run() {
    if (auto bad = first_violated_grounded(s_)) {
      t_.events.push_back({1, SolveAction::verify_fail, std::nullopt, std::nullopt, s_.triple(*bad)});
      return std::move(t_);
    }
    if (stage(1)) {
      std::vector<std::size_t> final;
      for (auto c : s_.choice) final.push_back(*c);
      t_.final = std::move(final);
    }
    return std::move(t_);
  }

 private:
  std::size_t pick_blank() const {
    std::optional<std::size_t> best;
    std::size_t best_count = 0;
    for (std::size_t b = 0; b < s_.q.blank_count(); ++b) {
      if (s_.choice[b]) continue;
      std::size_t count = 0;
      for (const auto& c : s_.q.constraints) {
        if (c.head.blank == b && c.tail.blank != b) count += !c.tail.is_blank() || s_.choice[*c.tail.blank];
        if (c.tail.blank == b && c.head.blank != b) count += !c.head.is_blank() || s_.choice[*c.head.blank];
      }
      if (!best || count > best_count) {
        best = b;
        best_count = count;
      }
    }
    return *best;
  }

  bool stage(std::size_t n) {
    if (stack_.size() == s_.q.blank_count()) return true;
    const std::size_t b = pick_blank();
    for (std::size_t i = 0; i < s_.o.per_blank[b].size(); ++i) {
      t_.events.push_back({n, SolveAction::propose, b, i, std::nullopt});
      t_.events.push_back({n, SolveAction::fill, b, i, std::nullopt});
      s_.set(b, i);
      std::optional<std::size_t> violated;
      for (std::size_t ci = 0; ci < s_.q.constraints.size() && !violated; ++ci) {
        if (s_.q.constraints[ci].mentions(b) && s_.complete(ci) && !s_.ok(ci)) violated = ci;
      }
      if (violated) {
        t_.events.push_back({n, SolveAction::verify_fail, b, i, s_.triple(*violated)});
        s_.clear(b);
        continue;
      }
      t_.events.push_back({n, SolveAction::verify_pass, b, i, std::nullopt});
      stack_.push_back(b);
      if (stage(n + 1)) return true;
      stack_.pop_back();
      s_.clear(b);
    }
    std::optional<std::size_t> previous;
    if (!stack_.empty()) previous = stack_.back();
    t_.events.push_back({n, SolveAction::backtrack, previous, std::nullopt, std::nullopt});
    return false;
  }

  OptionState s_;
  SolveTranscript t_;
  std::vector<std::size_t> stack_;
};

}  // namespace

std::vector<Assignment> enumerate_solutions(const KnowledgeGraph& g, const QuestionGraph& q, std::size_t limit) {
  if (limit == 0) return {};
  return EntitySearch(g, q, limit).run();
}

bool is_unique(const KnowledgeGraph& g, const QuestionGraph& q) { return enumerate_solutions(g, q, 2).size() == 1; }

std::vector<std::vector<std::size_t>> option_combinations(const KnowledgeGraph& g, const QuestionGraph& q,
                                                          const OptionAssignment& o,
                                                          std::span<const std::size_t> blanks,
                                                          std::span<const std::size_t> constraints,
                                                          std::size_t limit) {
  OptionState s(g, q, o);
  std::vector<std::vector<std::size_t>> out;
  if (limit == 0) return out;

  // Constraints become checkable once the last of their blanks (in `blanks`
  // order) is set.
  std::vector<std::vector<std::size_t>> due(blanks.size() + 1);
  for (auto ci : constraints) {
    std::size_t last = 0;
    for (std::size_t k = 0; k < blanks.size(); ++k) {
      if (q.constraints[ci].mentions(blanks[k])) last = k + 1;
    }
    due[last].push_back(ci);
  }
  for (auto ci : due[0]) {
    if (!s.ok(ci)) return out;
  }

  std::vector<std::size_t> pick(blanks.size());
  auto rec = [&](auto& self, std::size_t k) -> bool {
    if (k == blanks.size()) {
      out.push_back(pick);
      return out.size() >= limit;
    }
    const auto b = blanks[k];
    for (std::size_t i = 0; i < o.per_blank[b].size(); ++i) {
      s.set(b, i);
      pick[k] = i;
      bool fine = true;
      for (auto ci : due[k + 1]) {
        if (!s.ok(ci)) {
          fine = false;
          break;
        }
      }
      if (fine && self(self, k + 1)) return true;
    }
    s.clear(b);
    return false;
  };
  if (!blanks.empty()) {
    rec(rec, 0);
  } else {
    out.emplace_back();
  }
  return out;
}

std::size_t count_option_solutions(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o,
                                   std::size_t limit) {
  std::vector<std::size_t> blanks(q.blank_count()), constraints(q.constraints.size());
  for (std::size_t i = 0; i < blanks.size(); ++i) blanks[i] = i;
  for (std::size_t i = 0; i < constraints.size(); ++i) constraints[i] = i;
  return option_combinations(g, q, o, blanks, constraints, limit).size();
}

std::string_view to_string(SolveAction action) {
  switch (action) {
    case SolveAction::propose: return "propose";
    case SolveAction::fill: return "fill";
    case SolveAction::verify_pass: return "verify-pass";
    case SolveAction::verify_fail: return "verify-fail";
    case SolveAction::backtrack: return "backtrack";
  }
  return "unknown";
}

SolveTranscript staged_solve(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o) {
  return StagedSearch(g, q, o).run();
}

SolveTranscript verify_all_solve(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o) {
  SolveTranscript t;
  OptionState s(g, q, o);
  const std::size_t nb = q.blank_count();
  for (std::size_t b = 0; b < nb; ++b) {
    if (o.per_blank[b].empty()) return t;
  }
  std::vector<std::size_t> combo(nb, 0);
  for (std::size_t trial = 1;; ++trial) {
    t.events.push_back({trial, SolveAction::propose, std::nullopt, std::nullopt, std::nullopt});
    for (std::size_t b = 0; b < nb; ++b) {
      s.set(b, combo[b]);
      t.events.push_back({trial, SolveAction::fill, b, combo[b], std::nullopt});
    }
    std::optional<std::size_t> violated;
    for (std::size_t ci = 0; ci < q.constraints.size() && !violated; ++ci) {
      if (!s.ok(ci)) violated = ci;
    }
    if (!violated) {
      t.events.push_back({trial, SolveAction::verify_pass, std::nullopt, std::nullopt, std::nullopt});
      t.final = combo;
      return t;
    }
    t.events.push_back({trial, SolveAction::verify_fail, std::nullopt, std::nullopt, s.triple(*violated)});

    std::size_t b = nb;
    while (b > 0) {
      --b;
      if (++combo[b] < o.per_blank[b].size()) break;
      combo[b] = 0;
      if (b == 0) return t;
    }
    if (nb == 0) return t;
  }
}

std::vector<std::optional<std::size_t>> replay(const SolveTranscript& t, std::size_t blank_count) {
  std::vector<std::optional<std::size_t>> state(blank_count);
  for (const auto& e : t.events) {
    switch (e.action) {
      case SolveAction::fill:
        state[*e.blank] = e.candidate;
        break;
      case SolveAction::verify_fail:
        if (e.blank) {
          state[*e.blank].reset();
        } else {
          std::fill(state.begin(), state.end(), std::nullopt);
        }
        break;
      case SolveAction::backtrack:
        if (e.blank) state[*e.blank].reset();
        break;
      case SolveAction::propose:
      case SolveAction::verify_pass:
        break;
    }
  }
  return state;
}

Assignment to_assignment(const OptionAssignment& o, std::span<const std::size_t> choice) {
  Assignment a;
  for (std::size_t b = 0; b < choice.size(); ++b) a.push_back(o.per_blank[b][choice[b]]);
  return a;
}

}  // namespace kc
