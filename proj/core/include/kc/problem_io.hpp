#pragma once
// Problem records, their JSON / JSON-lines wire format, and answer parsing.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kc/knowledge_composer.hpp"
#include "kc/options.hpp"
#include "kc/question.hpp"

namespace kc {

inline constexpr std::string_view kGeneratorVersion = "kcross-1.0";

// Insertion-ordered JSON keeps the emitted field order stable and readable.
using Json = nlohmann::ordered_json;

struct Problem {
  std::string id;
  std::string group;  // shared by the tier variants of one question graph
  Tier tier = Tier::easy;
  QuestionGraph question;
  OptionAssignment options;
  std::optional<KnowledgePassage> knowledge;
  std::vector<std::string> neighborhood;  // sampled neighborhood, ascending
  std::uint64_t seed = 0;
  std::string generator_version{kGeneratorVersion};

  bool nota() const { return options.nota; }
  std::size_t blank_count() const { return question.blank_count(); }

  friend bool operator==(const Problem&, const Problem&) = default;
};

Json to_json(const Problem& p);
// Throws ParseError on schema violations.
Problem problem_from_json(const Json& j);

Json sampler_config_json(const SamplerConfig& c);

std::string serialize_problem(const Problem& p);
Problem parse_problem(std::string_view line);

void write_problems_jsonl(std::ostream& out, std::span<const Problem> problems);
std::vector<Problem> read_problems_jsonl(std::istream& in);
std::vector<Problem> load_problems(const std::filesystem::path& path);

// Consistency of a deserialized record (blank labels, option counts, gold
// positions); returns the problems found, empty when the record is sound.
std::vector<std::string> structural_issues(const Problem& p);

struct Prediction {
  std::string problem_id;
  std::string response_text;
  bool unfinished = false;
};

std::vector<Prediction> read_predictions_jsonl(std::istream& in);
void write_predictions_jsonl(std::ostream& out, std::span<const Prediction> predictions);

struct ParsedAnswer {
  std::vector<std::optional<std::size_t>> per_blank;  // option index per blank
  bool nota_claimed = false;

  friend bool operator==(const ParsedAnswer&, const ParsedAnswer&) = default;
};

// Case-insensitive "blank <i>: <letter>" scan; the last mention of a blank
// wins and letters outside the option range are ignored. "none of the above"
// counts as a claim only when it appears after the last blank mention.
ParsedAnswer parse_answer(std::string_view text, const Problem& p);

// "blank 1: A, blank 2: C" or "none of the above".
std::string format_answer(const ParsedAnswer& a);
ParsedAnswer gold_answer(const Problem& p);

// actedIn -> "acted in"; unknown camelCase names are split into lowercase words.
std::string humanize_relation(std::string_view relation);
// "(Paz Vega, acted in, The Human Contract)"
std::string format_triple(const Triple& t);
std::string format_constraint(const Constraint& c);

}  // namespace kc
