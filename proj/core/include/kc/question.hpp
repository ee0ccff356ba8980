#pragma once
// Question-graph model shared by the sampler, solvers and serializers.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kc/kg_store.hpp"

namespace kc {

// Exact ratio used for the reduce/blank range multipliers (1.2 == {12, 10}).
struct Multiplier {
  std::uint32_t num = 1;
  std::uint32_t den = 1;

  // round-half-up(value * num / den)
  std::size_t apply(std::size_t value) const;
  // Parses "1.2", "1", "6/5".
  static Multiplier parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const Multiplier& a, const Multiplier& b) {
    return std::uint64_t{a.num} * b.den == std::uint64_t{b.num} * a.den;
  }
};

// One end of a constraint: a known entity or a 0-based blank index.
struct Slot {
  std::string entity;
  std::optional<std::size_t> blank;

  static Slot known(std::string name) { return {std::move(name), std::nullopt}; }
  static Slot of_blank(std::size_t index) { return {{}, index}; }
  bool is_blank() const { return blank.has_value(); }

  friend bool operator==(const Slot&, const Slot&) = default;
};

struct Constraint {
  Slot head;
  std::string relation;
  Slot tail;

  bool has_blank() const { return head.is_blank() || tail.is_blank(); }
  bool mentions(std::size_t blank) const { return head.blank == blank || tail.blank == blank; }
  // The other end is a known entity ("definite" for that blank).
  bool definite_for(std::size_t blank) const;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

// Values for some or all blanks, indexed by blank.
using PartialAssignment = std::vector<std::optional<std::string>>;
// Values for every blank, indexed by blank.
using Assignment = std::vector<std::string>;

// Substitutes assigned blanks. The result may still contain blanks.
Constraint ground(const Constraint& c, const PartialAssignment& values);
Constraint ground(const Constraint& c, const Assignment& values);
// Set when neither slot is a blank.
std::optional<Triple> as_triple(const Constraint& c);

// Display name for a blank: "blank 1" for index 0.
std::string blank_label(std::size_t index);

struct SamplerConfig {
  std::vector<std::uint32_t> center_degrees{5, 7, 9};
  std::size_t k_hops = 5;
  std::size_t layer_cap = 8;
  std::size_t graph_size = 8;
  std::size_t blank_size = 3;
  Multiplier reduce_multiplier{12, 10};
  Multiplier blank_multiplier{1, 1};
  std::uint64_t seed = 0;

  // Throws SamplingError describing the first violated bound.
  void validate() const;

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

// Parses `key = value` lines (blank lines and '#' comments ignored) on top of
// `base`. Keys: center_degrees (comma list), k_hops, layer_cap, graph_size,
// blank_size, reduce_multiplier, blank_multiplier, seed.
SamplerConfig parse_sampler_config(std::istream& in, SamplerConfig base = {});

// A node set around a center plus every KG triple with both ends inside.
struct Neighborhood {
  EntityId center = 0;
  std::vector<EntityId> nodes;           // ascending
  std::vector<std::uint32_t> triples;    // indices into KnowledgeGraph::triples(), ascending

  bool contains(EntityId e) const;
};

struct QuestionGraph {
  std::vector<std::string> nodes;        // answer-graph entities, ascending
  std::vector<Constraint> constraints;
  std::vector<std::string> gold;         // gold entity per blank
  std::string center;
  SamplerConfig config;

  std::size_t blank_count() const { return gold.size(); }
  std::size_t edge_count() const { return constraints.size(); }

  friend bool operator==(const QuestionGraph&, const QuestionGraph&) = default;
};

}  // namespace kc
