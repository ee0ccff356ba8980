#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "kc/error.hpp"
#include "kc/kg_store.hpp"
#include "kc/rng.hpp"

namespace kc {
namespace {

using testing::fixture_graph;
using testing::fixture_lines;

using Names = std::set<std::string>;

// Incidence count over the distinct fixture lines, straight from the file.
std::map<std::string, std::size_t> incidence_oracle(const std::vector<Triple>& lines) {
  std::set<Triple> distinct(lines.begin(), lines.end());
  std::map<std::string, std::size_t> deg;
  for (const auto& t : distinct) {
    ++deg[t.head];
    if (t.tail != t.head) ++deg[t.tail];
  }
  return deg;
}

TEST(KgStore, DuplicateLinesCollapse) {
  std::istringstream in("Paz Vega\tactedIn\tThe Human Contract\nPaz Vega\tactedIn\tThe Human Contract\n");
  LoadStats stats;
  const auto g = parse_graph(in, RelationFilter::none(), &stats);
  EXPECT_EQ(g.triple_count(), 1u);
  EXPECT_EQ(stats.duplicates, 1u);
  EXPECT_EQ(stats.lines_read, 2u);
}

TEST(KgStore, ToyFixtureDegreesMatchIncidenceCount) {
  const auto lines = fixture_lines("toy.tsv");
  ASSERT_EQ(lines.size(), 16u);
  const auto g = fixture_graph("toy.tsv");
  const auto oracle = incidence_oracle(lines);
  for (const auto& [name, deg] : oracle) EXPECT_EQ(g.degree(name), deg) << name;
  // Three of the four Joe Roberts lines are the same fact.
  EXPECT_EQ(g.degree("Joe Roberts"), 2u);
  EXPECT_EQ(g.triple_count(), 14u);
}

TEST(KgStore, NeighborsOfToyEntities) {
  const auto g = fixture_graph("toy.tsv");
  EXPECT_EQ(g.neighbors("Jada Pinkett Smith"), (Names{"The Human Contract"}));
  EXPECT_EQ(g.neighbors("The Human Contract"), (Names{"Paz Vega", "Jada Pinkett Smith", "Idris Elba"}));
  EXPECT_TRUE(g.neighbors("Nobody").empty());
}

TEST(KgStore, TailsAndHeads) {
  const auto g = fixture_graph("toy.tsv");
  EXPECT_EQ(g.tails_of("Paz Vega", "actedIn"),
            (Names{"The Human Contract", "The Six Wives of Henry Lefay", "The Spirit (film)"}));
  EXPECT_EQ(g.heads_of("Prom Night (2008 film)", "actedIn"),
            (Names{"Johnathon Schaech", "Brittany Snow", "Idris Elba"}));
  EXPECT_TRUE(g.tails_of("Nobody", "actedIn").empty());
  EXPECT_TRUE(g.tails_of("Paz Vega", "noSuchRelation").empty());
}

TEST(KgStore, MalformedLineReportsLineNumber) {
  std::istringstream in("a\tr\tb\nonly two\tfields\n");
  try {
    parse_graph(in, RelationFilter::none());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream empty_field("a\t\tb\n");
  EXPECT_THROW(parse_graph(empty_field, RelationFilter::none()), ParseError);
}

TEST(KgStore, EmptyAfterFilterIsGraphError) {
  std::istringstream in("a\tlivesIn\tb\n");
  EXPECT_THROW(parse_graph(in, RelationFilter::yago_default()), GraphError);
}

TEST(KgStore, DefaultFilterKeepsSeventeenRelations) {
  const std::vector<std::string> removed{"isLocatedIn", "livesIn", "happenedIn", "diedIn", "wasBornIn",
                                         "worksAt", "playsFor", "isAffiliatedTo", "isPoliticianOf", "isLeaderOf",
                                         "influences", "owns", "isKnownFor", "dealsWith", "imports",
                                         "exports", "created", "isInterestedIn", "isConnectedTo"};
  const std::vector<std::string> kept{"graduatedFrom", "hasGender", "isCitizenOf", "hasWonPrize", "actedIn",
                                      "directed", "isMarriedTo", "hasChild", "hasAcademicAdvisor",
                                      "hasMusicalRole", "hasCapital", "hasCurrency", "hasOfficialLanguage",
                                      "hasNeighbor", "participatedIn", "wroteMusicFor", "edited"};
  const auto f = RelationFilter::yago_default();
  for (const auto& r : removed) EXPECT_FALSE(f.admits(r)) << r;
  for (const auto& r : kept) EXPECT_TRUE(f.admits(r)) << r;
  EXPECT_EQ(kept.size(), 17u);
}

TEST(KgStore, FilterFileSyntax) {
  std::istringstream ok("# comment\n\n-livesIn\n+actedIn\n");
  const auto f = RelationFilter::parse(ok);
  EXPECT_TRUE(f.admits("actedIn"));
  EXPECT_FALSE(f.admits("directed"));
  std::istringstream bad("livesIn\n");
  EXPECT_THROW(RelationFilter::parse(bad), ParseError);
  std::istringstream both("-a\n+a\n");
  EXPECT_THROW(RelationFilter::parse(both).validate(), ParseError);
}

// Random graphs: every index agrees with a linear scan of the triple list.
TEST(KgStore, IndicesAreProjectionsOfTriples) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<Triple> raw;
    const std::size_t n_ent = 5 + rng.uniform(20);
    const std::size_t n_tri = 10 + rng.uniform(60);
    for (std::size_t i = 0; i < n_tri; ++i) {
      raw.push_back({"e" + std::to_string(rng.uniform(n_ent)), "r" + std::to_string(rng.uniform(3)),
                     "e" + std::to_string(rng.uniform(n_ent))});
    }
    const auto g = KnowledgeGraph::from_triples(raw);
    const std::set<Triple> distinct(raw.begin(), raw.end());
    ASSERT_EQ(g.triple_count(), distinct.size());

    std::size_t degree_sum = 0, self_loops = 0;
    for (const auto& t : distinct) self_loops += t.head == t.tail;
    for (const auto& name : g.entity_names()) {
      std::size_t deg = 0;
      Names out_r0, in_r0;
      for (const auto& t : distinct) {
        deg += (t.head == name || t.tail == name);
        if (t.head == name && t.relation == "r0") out_r0.insert(t.tail);
        if (t.tail == name && t.relation == "r0") in_r0.insert(t.head);
      }
      EXPECT_EQ(g.degree(name), deg);
      EXPECT_EQ(g.tails_of(name, "r0"), out_r0);
      EXPECT_EQ(g.heads_of(name, "r0"), in_r0);
      degree_sum += g.degree(name);
    }
    EXPECT_EQ(degree_sum, 2 * distinct.size() - self_loops);
    for (const auto& t : distinct) EXPECT_TRUE(g.contains(t));
    EXPECT_FALSE(g.contains(Triple{"e0", "zz", "e1"}));
  }
}

TEST(KgStore, EntityIdsFollowNameOrder) {
  const auto g = fixture_graph("toy.tsv");
  const auto names = g.entity_names();
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
}

}  // namespace
}  // namespace kc
