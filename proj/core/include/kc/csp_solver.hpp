#pragma once
// Exact constraint solving against a knowledge graph, over the whole entity
// space or restricted to the multiple-choice options.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "kc/kg_store.hpp"
#include "kc/options.hpp"
#include "kc/question.hpp"

namespace kc {

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

// Every assignment of KG entities to blanks under which all constraints are
// KG triples, in search order (entity-id ascending at each choice point).
std::vector<Assignment> enumerate_solutions(const KnowledgeGraph& g, const QuestionGraph& q,
                                            std::size_t limit = kUnlimited);

bool is_unique(const KnowledgeGraph& g, const QuestionGraph& q);

// Option combinations for `blanks` (one option index per listed blank) that
// satisfy `constraints`, in lexicographic order. Each constraint may only
// mention listed blanks.
std::vector<std::vector<std::size_t>> option_combinations(const KnowledgeGraph& g, const QuestionGraph& q,
                                                          const OptionAssignment& o,
                                                          std::span<const std::size_t> blanks,
                                                          std::span<const std::size_t> constraints,
                                                          std::size_t limit = kUnlimited);

// Satisfying combinations over all blanks and all constraints.
std::size_t count_option_solutions(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o,
                                   std::size_t limit = kUnlimited);

enum class SolveAction { propose, fill, verify_pass, verify_fail, backtrack };

std::string_view to_string(SolveAction action);

struct SolveEvent {
  std::size_t stage = 0;                 // 1-based stage (staged) or trial (verify-all)
  SolveAction action = SolveAction::propose;
  std::optional<std::size_t> blank;
  std::optional<std::size_t> candidate;  // option index
  std::optional<Triple> violated;

  friend bool operator==(const SolveEvent&, const SolveEvent&) = default;
};

// Replay rules: fill sets the blank; verify-fail with a blank clears that
// blank, without one clears everything; backtrack clears its blank.
struct SolveTranscript {
  std::vector<SolveEvent> events;
  std::optional<std::vector<std::size_t>> final;  // option index per blank

  bool satisfiable() const { return final.has_value(); }
};

// Blank-by-blank depth-first search: the next blank is the unsolved one with
// the most definite constraints (known entity or solved blank on the other
// end), ties to the lower index; options are tried in listed order.
SolveTranscript staged_solve(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o);

// Whole combinations in lexicographic option order (first blank most
// significant); each rejected combination names its first violated constraint.
SolveTranscript verify_all_solve(const KnowledgeGraph& g, const QuestionGraph& q, const OptionAssignment& o);

std::vector<std::optional<std::size_t>> replay(const SolveTranscript& t, std::size_t blank_count);

// Option indices -> entity names.
Assignment to_assignment(const OptionAssignment& o, std::span<const std::size_t> choice);

}  // namespace kc
