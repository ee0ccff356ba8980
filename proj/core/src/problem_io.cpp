#include "kc/problem_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>

#include "kc/error.hpp"

namespace kc {

namespace {

std::string slot_text(const Slot& s) { return s.is_blank() ? blank_label(*s.blank) : s.entity; }

std::optional<std::size_t> parse_blank_label(std::string_view text) {
  constexpr std::string_view prefix = "blank ";
  if (!text.starts_with(prefix) || text.size() == prefix.size()) return std::nullopt;
  std::size_t n = 0;
  for (char ch : text.substr(prefix.size())) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    n = n * 10 + static_cast<std::size_t>(ch - '0');
  }
  if (n == 0) return std::nullopt;
  return n - 1;
}

Slot slot_from(const std::string& text, std::size_t blank_count) {
  if (auto b = parse_blank_label(text); b && *b < blank_count) return Slot::of_blank(*b);
  return Slot::known(text);
}

Json config_json(const SamplerConfig& c) {
  return Json{{"center_degrees", c.center_degrees},
              {"k_hops", c.k_hops},
              {"layer_cap", c.layer_cap},
              {"graph_size", c.graph_size},
              {"blank_size", c.blank_size},
              {"reduce_multiplier", c.reduce_multiplier.to_string()},
              {"blank_multiplier", c.blank_multiplier.to_string()},
              {"seed", c.seed}};
}

SamplerConfig config_from(const Json& j) {
  SamplerConfig c;
  c.center_degrees = j.at("center_degrees").get<std::vector<std::uint32_t>>();
  c.k_hops = j.at("k_hops").get<std::size_t>();
  c.layer_cap = j.at("layer_cap").get<std::size_t>();
  c.graph_size = j.at("graph_size").get<std::size_t>();
  c.blank_size = j.at("blank_size").get<std::size_t>();
  c.reduce_multiplier = Multiplier::parse(j.at("reduce_multiplier").get<std::string>());
  c.blank_multiplier = Multiplier::parse(j.at("blank_multiplier").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

Json sampler_config_json(const SamplerConfig& c) { return config_json(c); }

Json to_json(const Problem& p) {
  const auto& q = p.question;
  const auto& o = p.options;
  Json j;
  j["id"] = p.id;
  j["tier"] = to_string(p.tier);

  Json constraints = Json::array();
  for (const auto& c : q.constraints) constraints.push_back({slot_text(c.head), c.relation, slot_text(c.tail)});
  j["constraints"] = std::move(constraints);

  Json blanks = Json::array();
  for (std::size_t b = 0; b < q.blank_count(); ++b) blanks.push_back(blank_label(b));
  j["blanks"] = std::move(blanks);

  Json options = Json::object();
  for (std::size_t b = 0; b < o.per_blank.size(); ++b) options[blank_label(b)] = o.per_blank[b];
  j["options"] = std::move(options);

  if (!o.nota) {
    Json gold = Json::object();
    for (std::size_t b = 0; b < o.gold_index.size(); ++b) {
      gold[blank_label(b)] = std::string(1, option_letter(o.gold_index[b]));
    }
    j["gold"] = std::move(gold);
  }
  if (p.knowledge) {
    Json k = Json::array();
    for (const auto& t : p.knowledge->triples) k.push_back({t.head, t.relation, t.tail});
    j["knowledge"] = std::move(k);
  }
  j["seed"] = p.seed;

  Json meta;
  meta["group"] = p.group;
  Json answers = Json::object();
  for (std::size_t b = 0; b < q.gold.size(); ++b) answers[blank_label(b)] = q.gold[b];
  meta["answers"] = std::move(answers);
  meta["nota"] = o.nota;
  meta["nodes"] = q.nodes;
  meta["center"] = q.center;
  meta["neighborhood"] = p.neighborhood;
  meta["config"] = config_json(q.config);
  meta["generator_version"] = p.generator_version;
  if (p.knowledge) {
    meta["knowledge_useful"] = p.knowledge->useful_count;
    meta["knowledge_noise"] = p.knowledge->noise_count;
    meta["knowledge_short"] = p.knowledge->short_padding;
  }
  j["meta"] = std::move(meta);
  return j;
}

Problem problem_from_json(const Json& j) {
  try {
    Problem p;
    p.id = j.at("id").get<std::string>();
    p.tier = parse_tier(j.at("tier").get<std::string>());
    p.seed = j.at("seed").get<std::uint64_t>();

    const auto& meta = j.at("meta");
    const auto blanks = j.at("blanks").get<std::vector<std::string>>();
    for (std::size_t b = 0; b < blanks.size(); ++b) {
      if (blanks[b] != blank_label(b)) throw ParseError("blanks must be \"blank 1\", \"blank 2\", ... in order");
    }
    const std::size_t nb = blanks.size();

    auto& q = p.question;
    for (const auto& c : j.at("constraints")) {
      if (!c.is_array() || c.size() != 3) throw ParseError("constraint must be [head, relation, tail]");
      q.constraints.push_back({slot_from(c[0].get<std::string>(), nb), c[1].get<std::string>(),
                               slot_from(c[2].get<std::string>(), nb)});
    }
    const auto& answers = meta.at("answers");
    for (const auto& label : blanks) q.gold.push_back(answers.at(label).get<std::string>());
    q.nodes = meta.at("nodes").get<std::vector<std::string>>();
    q.center = meta.at("center").get<std::string>();
    q.config = config_from(meta.at("config"));

    auto& o = p.options;
    o.tier = p.tier;
    o.nota = meta.at("nota").get<bool>();
    const auto& options = j.at("options");
    for (const auto& label : blanks) o.per_blank.push_back(options.at(label).get<std::vector<std::string>>());
    if (!o.nota) {
      const auto& gold = j.at("gold");
      for (std::size_t b = 0; b < nb; ++b) {
        const auto letter = gold.at(blanks[b]).get<std::string>();
        if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z') {
          throw ParseError("gold for " + blanks[b] + " must be a single letter");
        }
        o.gold_index.push_back(static_cast<std::size_t>(letter[0] - 'A'));
      }
    }

    if (j.contains("knowledge")) {
      KnowledgePassage k;
      for (const auto& t : j.at("knowledge")) {
        if (!t.is_array() || t.size() != 3) throw ParseError("knowledge triple must be [head, relation, tail]");
        k.triples.push_back({t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>()});
      }
      k.useful_count = meta.value("knowledge_useful", q.constraints.size());
      k.noise_count = meta.value("knowledge_noise", k.triples.size() - std::min(k.triples.size(), k.useful_count));
      k.short_padding = meta.value("knowledge_short", false);
      p.knowledge = std::move(k);
    }
    p.group = meta.value("group", std::string{});
    p.neighborhood = meta.value("neighborhood", std::vector<std::string>{});
    p.generator_version = meta.value("generator_version", std::string{});
    return p;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid problem record: ") + e.what());
  }
}

std::string serialize_problem(const Problem& p) { return to_json(p).dump(); }

Problem parse_problem(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return problem_from_json(j);
}

void write_problems_jsonl(std::ostream& out, std::span<const Problem> problems) {
  for (const auto& p : problems) out << serialize_problem(p) << '\n';
}

std::vector<Problem> read_problems_jsonl(std::istream& in) {
  std::vector<Problem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_problem(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

std::vector<Problem> load_problems(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset: " + path.string());
  return read_problems_jsonl(in);
}

std::vector<std::string> structural_issues(const Problem& p) {
  std::vector<std::string> issues;
  const auto& q = p.question;
  const auto& o = p.options;
  const std::size_t nb = q.blank_count();
  if (nb == 0) issues.push_back("problem has no blanks");
  if (o.per_blank.size() != nb) issues.push_back("option lists do not match the blank count");
  std::vector<bool> seen(nb, false);
  for (const auto& c : q.constraints) {
    for (const auto* s : {&c.head, &c.tail}) {
      if (s->is_blank() && *s->blank < nb) seen[*s->blank] = true;
      if (!s->is_blank() && s->entity.empty()) issues.push_back("constraint has an empty entity");
    }
    if (c.relation.empty()) issues.push_back("constraint has an empty relation");
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (!seen[b]) issues.push_back(blank_label(b) + " appears in no constraint");
  }
  const std::size_t k = o.options_per_blank();
  for (std::size_t b = 0; b < o.per_blank.size(); ++b) {
    const auto& list = o.per_blank[b];
    if (list.size() != k) issues.push_back(blank_label(b) + " has a different option count");
    if (std::set<std::string>(list.begin(), list.end()).size() != list.size()) {
      issues.push_back(blank_label(b) + " has duplicate options");
    }
    if (b >= nb) continue;
    const auto hits = std::count(list.begin(), list.end(), q.gold[b]);
    if (o.nota) {
      if (hits != 0) issues.push_back(blank_label(b) + " lists its gold answer in a none-of-the-above problem");
    } else if (b >= o.gold_index.size() || o.gold_index[b] >= list.size()) {
      issues.push_back(blank_label(b) + " has an out-of-range gold letter");
    } else if (hits != 1 || list[o.gold_index[b]] != q.gold[b]) {
      issues.push_back(blank_label(b) + " gold letter does not point at its answer");
    }
  }
  if (o.tier != p.tier) issues.push_back("option tier differs from problem tier");
  return issues;
}

std::vector<Prediction> read_predictions_jsonl(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = Json::parse(line);
      out.push_back({j.at("problem_id").get<std::string>(), j.at("response_text").get<std::string>(),
                     j.value("unfinished", false)});
    } catch (const Json::exception& e) {
      throw ParseError(std::string("invalid prediction: ") + e.what(), lineno);
    }
  }
  return out;
}

void write_predictions_jsonl(std::ostream& out, std::span<const Prediction> predictions) {
  for (const auto& p : predictions) {
    Json j{{"problem_id", p.problem_id}, {"response_text", p.response_text}};
    if (p.unfinished) j["unfinished"] = true;
    out << j.dump() << '\n';
  }
}

ParsedAnswer parse_answer(std::string_view text, const Problem& p) {
  static const std::regex token(R"(blank\s*(\d+)\s*:\s*([A-Za-z])\b)", std::regex::icase);
  ParsedAnswer a;
  a.per_blank.assign(p.blank_count(), std::nullopt);
  const std::string s(text);
  std::size_t last_mention_end = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), token); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    std::size_t index = 0;
    try {
      index = std::stoul(m[1].str());
    } catch (const std::exception&) {
      continue;
    }
    const auto letter = static_cast<std::size_t>(std::toupper(static_cast<unsigned char>(m[2].str()[0])) - 'A');
    if (index == 0 || index > p.blank_count()) continue;
    if (letter >= p.options.per_blank[index - 1].size()) continue;
    a.per_blank[index - 1] = letter;
    last_mention_end = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  const auto pos = lower(s).rfind("none of the above");
  a.nota_claimed = pos != std::string::npos && pos >= last_mention_end;
  return a;
}

std::string format_answer(const ParsedAnswer& a) {
  if (a.nota_claimed) return "none of the above";
  std::string out;
  for (std::size_t b = 0; b < a.per_blank.size(); ++b) {
    if (!a.per_blank[b]) continue;
    if (!out.empty()) out += ", ";
    out += blank_label(b) + ": " + option_letter(*a.per_blank[b]);
  }
  return out;
}

ParsedAnswer gold_answer(const Problem& p) {
  ParsedAnswer a;
  a.nota_claimed = p.nota();
  a.per_blank.assign(p.blank_count(), std::nullopt);
  if (!p.nota()) {
    for (std::size_t b = 0; b < p.options.gold_index.size(); ++b) a.per_blank[b] = p.options.gold_index[b];
  }
  return a;
}

std::string humanize_relation(std::string_view relation) {
  static const std::map<std::string, std::string, std::less<>> table{
      {"actedIn", "acted in"},
      {"directed", "directed"},
      {"edited", "edited"},
      {"graduatedFrom", "graduated from"},
      {"hasAcademicAdvisor", "has academic advisor"},
      {"hasCapital", "has capital"},
      {"hasChild", "has child"},
      {"hasCurrency", "has currency"},
      {"hasGender", "has gender"},
      {"hasMusicalRole", "has musical role"},
      {"hasNeighbor", "has neighbor"},
      {"hasOfficialLanguage", "has official language"},
      {"hasWonPrize", "has won prize"},
      {"isCitizenOf", "is citizen of"},
      {"isMarriedTo", "is married to"},
      {"participatedIn", "participated in"},
      {"wroteMusicFor", "wrote music for"},
  };
  if (auto it = table.find(relation); it != table.end()) return it->second;
  std::string out;
  for (char ch : relation) {
    if (std::isupper(static_cast<unsigned char>(ch))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (ch == '_') {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += ch;
    }
  }
  return out;
}

std::string format_triple(const Triple& t) {
  return "(" + t.head + ", " + humanize_relation(t.relation) + ", " + t.tail + ")";
}

std::string format_constraint(const Constraint& c) {
  return "(" + slot_text(c.head) + ", " + humanize_relation(c.relation) + ", " + slot_text(c.tail) + ")";
}

}  // namespace kc
