#pragma once
// Hand-built problems over the TSV fixtures in tests/fixtures.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "kc/kg_store.hpp"
#include "kc/problem_io.hpp"
#include "kc/question.hpp"

namespace kc::testing {

inline std::string fixture_path(const std::string& name) { return std::string(KC_FIXTURE_DIR) + "/" + name; }

// Raw lines, duplicates kept, in file order.
inline std::vector<Triple> fixture_lines(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::vector<Triple> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = line.find('\t', a + 1);
    out.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
  }
  return out;
}

inline KnowledgeGraph fixture_graph(const std::string& name) {
  return load_graph(fixture_path(name), RelationFilter::none());
}

inline Slot k(std::string name) { return Slot::known(std::move(name)); }
inline Slot b(std::size_t one_based) { return Slot::of_blank(one_based - 1); }

inline Problem make_problem(std::string id, const std::string& fixture, std::vector<Constraint> constraints,
                            std::vector<std::vector<std::string>> options, std::vector<std::size_t> gold_index,
                            Tier tier = Tier::hard) {
  Problem p;
  p.id = id;
  p.group = id;
  p.tier = tier;
  p.question.constraints = std::move(constraints);
  for (std::size_t i = 0; i < options.size(); ++i) p.question.gold.push_back(options[i][gold_index[i]]);
  p.options.per_blank = std::move(options);
  p.options.gold_index = std::move(gold_index);
  p.options.tier = tier;

  const auto lines = fixture_lines(fixture);
  KnowledgePassage passage;
  passage.triples = lines;
  passage.useful_count = p.question.constraints.size();
  passage.noise_count = lines.size() - passage.useful_count;
  p.knowledge = passage;

  std::set<std::string> names;
  for (const auto& t : lines) names.insert({t.head, t.tail});
  p.neighborhood.assign(names.begin(), names.end());

  std::set<std::string> nodes;
  for (const auto& c : p.question.constraints) {
    const auto g = ground(c, p.question.gold);
    nodes.insert({g.head.entity, g.tail.entity});
  }
  p.question.nodes.assign(nodes.begin(), nodes.end());
  p.question.center = p.question.nodes.front();
  return p;
}

// Worked crossword over toy.tsv; gold blank 1: A, blank 2: B.
inline Problem worked_problem() {
  return make_problem("worked", "toy.tsv",
                      {{k("Paz Vega"), "actedIn", b(1)},
                       {k("Jada Pinkett Smith"), "directed", b(1)},
                       {b(2), "actedIn", k("Prom Night (2008 film)")},
                       {b(2), "actedIn", b(1)}},
                      {{"The Human Contract", "The Spirit (film)", "The Six Wives of Henry Lefay"},
                       {"Johnathon Schaech", "Idris Elba", "Brittany Snow"}},
                      {0, 1}, Tier::easy);
}

// Gold blank 1: B (male), blank 2: B (Joan Blondell).
inline Problem dick_powell_problem() {
  return make_problem("dick-powell", "dick_powell.tsv",
                      {{b(2), "isMarriedTo", k("Dick Powell")},
                       {b(2), "actedIn", k("Support Your Local Gunfighter")},
                       {k("Dick Powell"), "isMarriedTo", b(2)},
                       {k("Dick Powell"), "hasGender", b(1)},
                       {k("Borislav Mikhailov"), "hasGender", b(1)},
                       {k("Cole Tinkler"), "hasGender", b(1)}},
                      {{"female", "male"}, {"Suzanne Pleshette", "Joan Blondell", "James Garner"}}, {1, 1});
}

// Bill Paxton listed first; gold B (Charlton Heston).
inline Problem true_lies_problem() {
  return make_problem("true-lies", "true_lies.tsv",
                      {{b(1), "actedIn", k("True Lies")}, {b(1), "actedIn", k("Chiefs (miniseries)")}},
                      {{"Bill Paxton", "Charlton Heston", "Paul Sorvino"}}, {1});
}

// Gold blank 1: B (Smokin' Aces), blank 2: C (Jeremy Piven).
inline Problem andy_garcia_problem() {
  return make_problem("andy-garcia", "andy_garcia.tsv",
                      {{k("Andy García"), "actedIn", b(1)},
                       {b(2), "actedIn", b(1)},
                       {b(2), "actedIn", k("Scooby-Doo! in Where's My Mummy?")}},
                      {{"Things to Do in Denver When You're Dead", "Smokin' Aces", "Beverly Hills Chihuahua"},
                       {"Ron Perlman", "Casey Kasem", "Jeremy Piven"}},
                      {1, 2}, Tier::medium);
}

}  // namespace kc::testing
