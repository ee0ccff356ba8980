#include "kc/question.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

#include "kc/error.hpp"

namespace kc {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("invalid integer for " + key + ": '" + text + "'");
  }
  return v;
}

}  // namespace

std::size_t Multiplier::apply(std::size_t value) const {
  const std::uint64_t scaled = std::uint64_t{value} * num;
  return static_cast<std::size_t>((2 * scaled + den) / (2 * std::uint64_t{den}));
}

Multiplier Multiplier::parse(const std::string& raw) {
  const std::string text = trim(raw);
  if (auto slash = text.find('/'); slash != std::string::npos) {
    Multiplier m{static_cast<std::uint32_t>(parse_uint(text.substr(0, slash), "multiplier")),
                 static_cast<std::uint32_t>(parse_uint(text.substr(slash + 1), "multiplier"))};
    if (m.den == 0) throw ParseError("multiplier denominator is zero");
    return m;
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return {static_cast<std::uint32_t>(parse_uint(text, "multiplier")), 1};
  const std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
  if (frac.empty() || frac.size() > 6) throw ParseError("invalid multiplier: '" + text + "'");
  std::uint32_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const auto w = whole.empty() ? 0 : parse_uint(whole, "multiplier");
  return {static_cast<std::uint32_t>(w * den + parse_uint(frac, "multiplier")), den};
}

std::string Multiplier::to_string() const {
  if (num % den == 0) return std::to_string(num / den);
  std::uint32_t den10 = 1;
  while (den10 < 1000000 && (std::uint64_t{num} * den10) % den != 0) den10 *= 10;
  if ((std::uint64_t{num} * den10) % den != 0) return std::to_string(num) + "/" + std::to_string(den);
  const auto scaled = std::uint64_t{num} * den10 / den;
  std::string frac = std::to_string(scaled % den10);
  while (frac.size() < std::to_string(den10).size() - 1) frac.insert(frac.begin(), '0');
  return std::to_string(scaled / den10) + "." + frac;
}

bool Constraint::definite_for(std::size_t blank) const {
  if (head.blank == blank) return !tail.is_blank();
  if (tail.blank == blank) return !head.is_blank();
  return false;
}

Constraint ground(const Constraint& c, const PartialAssignment& values) {
  auto fill = [&](const Slot& s) {
    if (s.is_blank() && *s.blank < values.size() && values[*s.blank]) return Slot::known(*values[*s.blank]);
    return s;
  };
  return {fill(c.head), c.relation, fill(c.tail)};
}

Constraint ground(const Constraint& c, const Assignment& values) {
  PartialAssignment partial(values.begin(), values.end());
  return ground(c, partial);
}

std::optional<Triple> as_triple(const Constraint& c) {
  if (c.has_blank()) return std::nullopt;
  return Triple{c.head.entity, c.relation, c.tail.entity};
}

std::string blank_label(std::size_t index) { return "blank " + std::to_string(index + 1); }

void SamplerConfig::validate() const {
  if (center_degrees.empty()) throw SamplingError("center_degrees is empty");
  if (layer_cap < 1) throw SamplingError("layer_cap must be >= 1");
  if (graph_size < 2) throw SamplingError("graph_size must be >= 2");
  const std::size_t lo = (graph_size + 3) / 4, hi = graph_size / 2;
  if (blank_size < lo || blank_size > hi) {
    throw SamplingError("blank_size " + std::to_string(blank_size) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] for graph_size " + std::to_string(graph_size));
  }
  if (reduce_multiplier.den == 0 || reduce_multiplier.num < reduce_multiplier.den) {
    throw SamplingError("reduce_multiplier must be >= 1");
  }
  if (blank_multiplier.den == 0 || blank_multiplier.num < blank_multiplier.den) {
    throw SamplingError("blank_multiplier must be >= 1");
  }
}

SamplerConfig parse_sampler_config(std::istream& in, SamplerConfig cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    try {
      if (key == "center_degrees") {
        cfg.center_degrees.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          cfg.center_degrees.push_back(static_cast<std::uint32_t>(parse_uint(trim(item), key)));
        }
      } else if (key == "k_hops") {
        cfg.k_hops = parse_uint(value, key);
      } else if (key == "layer_cap") {
        cfg.layer_cap = parse_uint(value, key);
      } else if (key == "graph_size") {
        cfg.graph_size = parse_uint(value, key);
      } else if (key == "blank_size") {
        cfg.blank_size = parse_uint(value, key);
      } else if (key == "reduce_multiplier") {
        cfg.reduce_multiplier = Multiplier::parse(value);
      } else if (key == "blank_multiplier") {
        cfg.blank_multiplier = Multiplier::parse(value);
      } else if (key == "seed") {
        cfg.seed = parse_uint(value, key);
      } else {
        throw ParseError("unknown key '" + key + "'");
      }
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return cfg;
}

bool Neighborhood::contains(EntityId e) const { return std::binary_search(nodes.begin(), nodes.end(), e); }

}  // namespace kc
