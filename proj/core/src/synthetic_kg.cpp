#include "kc/synthetic_kg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "kc/rng.hpp"

namespace kc {

namespace {

std::string label(const char* kind, std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s %05zu", kind, i);
  return buf;
}

// Draws ranks 0..n-1 with weight 1 / (rank + 1)^s.
class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = acc;
    }
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform01() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }
  // k distinct ranks (k clamped to n).
  std::vector<std::size_t> draw_distinct(Rng& rng, std::size_t k) const {
    k = std::min(k, cdf_.size());
    std::vector<std::size_t> out;
    while (out.size() < k) {
      const auto r = draw(rng);
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    }
    return out;
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

std::vector<Triple> synthetic_triples(const SyntheticKgConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<Triple> out;
  auto add = [&](std::string h, const char* r, std::string t) { out.push_back({std::move(h), r, std::move(t)}); };

  const auto person = [](std::size_t i) { return label("Person", i); };
  const auto film = [](std::size_t i) { return label("Film", i); };
  const auto country = [](std::size_t i) { return label("Country", i); };
  const auto city = [](std::size_t i) { return label("City", i); };

  const Zipf person_pop(cfg.persons, cfg.zipf_exponent);
  const Zipf country_pop(cfg.countries, cfg.zipf_exponent);
  const Zipf uni_pop(cfg.universities, cfg.zipf_exponent);
  const Zipf prize_pop(cfg.prizes, cfg.zipf_exponent);
  const Zipf city_pop(cfg.cities, cfg.zipf_exponent);

  for (std::size_t p = 0; p < cfg.persons; ++p) {
    if (rng.uniform01() < cfg.gender_rate) add(person(p), "hasGender", rng.uniform(2) ? "male" : "female");
    if (cfg.countries && rng.uniform01() < cfg.citizenship_rate) add(person(p), "isCitizenOf", country(country_pop.draw(rng)));
    if (cfg.universities && rng.uniform01() < 0.3) {
      add(person(p), "graduatedFrom", label("University", uni_pop.draw(rng)));
    }
    if (cfg.prizes && rng.uniform01() < 0.25) {
      for (auto z : prize_pop.draw_distinct(rng, 1 + rng.uniform(2))) add(person(p), "hasWonPrize", label("Prize", z));
    }
    if (cfg.instruments && rng.uniform01() < 0.08) {
      add(person(p), "hasMusicalRole", label("Instrument", rng.uniform(cfg.instruments)));
    }
    if (cfg.include_filtered_relations && cfg.cities) {
      add(person(p), "wasBornIn", city(city_pop.draw(rng)));
      if (rng.uniform01() < 0.5) add(person(p), "livesIn", city(city_pop.draw(rng)));
    }
  }

  // Marriages in both directions, children of married couples.
  std::vector<std::size_t> order(cfg.persons);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto couples = order.size() * 3 / 10 / 2;
  std::size_t next_child = 2 * couples;
  for (std::size_t c = 0; c < couples; ++c) {
    const auto a = person(order[2 * c]);
    const auto b = person(order[2 * c + 1]);
    add(a, "isMarriedTo", b);
    add(b, "isMarriedTo", a);
    const auto kids = rng.uniform(3);
    for (std::size_t k = 0; k < kids && next_child < order.size(); ++k, ++next_child) {
      const auto child = person(order[next_child]);
      add(a, "hasChild", child);
      add(b, "hasChild", child);
    }
  }

  // Academic lineage among graduates.
  for (std::size_t p = 0; p + 1 < cfg.persons; ++p) {
    if (rng.uniform01() < 0.05) add(person(p), "hasAcademicAdvisor", person(person_pop.draw(rng)));
  }

  for (std::size_t f = 0; f < cfg.films; ++f) {
    add(person(person_pop.draw(rng)), "directed", film(f));
    for (auto a : person_pop.draw_distinct(rng, 2 + rng.uniform(4))) add(person(a), "actedIn", film(f));
    if (rng.uniform01() < 0.3) add(person(person_pop.draw(rng)), "edited", film(f));
    if (rng.uniform01() < 0.3) add(person(person_pop.draw(rng)), "wroteMusicFor", film(f));
  }

  for (std::size_t c = 0; c < cfg.countries; ++c) {
    if (cfg.cities) add(country(c), "hasCapital", city(c % cfg.cities));
    if (cfg.currencies) add(country(c), "hasCurrency", label("Currency", rng.uniform(cfg.currencies)));
    if (cfg.languages) {
      for (std::size_t k = 0, n = 1 + rng.uniform(2); k < n; ++k) {
        add(country(c), "hasOfficialLanguage", label("Language", rng.uniform(cfg.languages)));
      }
    }
    for (std::size_t k = 0, n = rng.uniform(3); k < n && cfg.countries > 1; ++k) {
      const auto d = rng.uniform(cfg.countries);
      if (d == c) continue;
      add(country(c), "hasNeighbor", country(d));
      add(country(d), "hasNeighbor", country(c));
    }
    if (cfg.events) {
      for (auto e : rng.sample_indices(cfg.events, rng.uniform(3))) add(country(c), "participatedIn", label("Event", e));
    }
  }
  if (cfg.include_filtered_relations && cfg.countries) {
    for (std::size_t c = 0; c < cfg.cities; ++c) add(city(c), "isLocatedIn", country(c % cfg.countries));
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

KnowledgeGraph synthetic_graph(const SyntheticKgConfig& cfg, const RelationFilter& filter) {
  auto triples = synthetic_triples(cfg);
  std::erase_if(triples, [&](const Triple& t) { return !filter.admits(t.relation); });
  return KnowledgeGraph::from_triples(triples);
}

}  // namespace kc
