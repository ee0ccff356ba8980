#pragma once
// Subcommands of the kcross tool, callable in-process.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kc/llm_client.hpp"
#include "kc/pipeline.hpp"
#include "kc/synthetic_kg.hpp"

namespace kc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataInvalid = 2, kTransport = 3 };

struct GraphSource {
  std::string path;
  std::string relation_filter;  // file of -rel/+rel lines; built-in removal list when empty
  bool no_filter = false;
};

KnowledgeGraph load_source(const GraphSource& src, std::ostream& log);

// "easy", "medium", "hard" or "all".
std::vector<Tier> parse_tier_selection(const std::string& text);

struct GenerateOptions {
  GraphSource kg;
  std::string config_file;  // key = value sampler settings
  std::string out_dir;
  GenerationConfig generation;
};

int cmd_generate(const GenerateOptions& opt, std::ostream& log);

struct StatsOptions {
  std::vector<std::string> datasets;
  bool json = false;
};

// Keyed by tier name; none-of-the-above problems are keyed "<tier>-nota".
std::map<std::string, DatasetStats> stats_by_subset(const std::vector<Problem>& problems);
int cmd_stats(const StatsOptions& opt, std::ostream& out, std::ostream& log);

struct EvaluateOptions {
  std::vector<std::string> datasets;
  std::vector<Tier> tiers{Tier::easy, Tier::medium, Tier::hard};
  std::string predictions;           // score stored responses instead of querying
  bool oracle = false;               // built-in oracle responder
  std::string endpoint;              // chat-completion base URL
  ResponderConfig responder;
  std::vector<std::string> exemplar_pool;  // the datasets themselves when empty
  GraphSource verifier;                    // optional; gold knowledge when path is empty
  EvaluationConfig evaluation;
  std::string out_dir;
  Clock* clock = nullptr;  // system clock when null
};

struct EvaluateResult {
  int exit_code = kOk;
  EvaluationRun run;
  std::optional<TransportStats> transport;
};

EvaluateResult cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& log);

struct ValidateOptions {
  GraphSource kg;
  std::vector<std::string> datasets;
};

int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& log);

struct RenderOptions {
  std::vector<std::string> datasets;
  std::vector<std::string> ids;  // all when empty
  std::vector<std::string> exemplar_pool;
  GraphSource verifier;
  EvaluationConfig evaluation;
};

int cmd_render(const RenderOptions& opt, std::ostream& out, std::ostream& log);

struct SolveOptions {
  std::vector<std::string> datasets;
  std::vector<std::string> ids;
  GraphSource kg;  // gold knowledge per problem when path is empty
  Style style = Style::staged;
  std::size_t verify_all_retries = 1;
};

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& log);

struct SynthOptions {
  SyntheticKgConfig config;
  std::string out;
};

int cmd_synth_kg(const SynthOptions& opt, std::ostream& log);

std::vector<Problem> load_datasets(const std::vector<std::string>& paths);

}  // namespace kc::cli
