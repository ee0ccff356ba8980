#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "kc/error.hpp"

namespace {

using namespace kc;
using namespace kc::cli;

void add_graph_flags(CLI::App* cmd, GraphSource& src, bool required) {
  auto* kg = cmd->add_option("--kg", src.path, "Knowledge graph TSV (head<TAB>relation<TAB>tail)");
  if (required) kg->required()->check(CLI::ExistingFile);
  cmd->add_option("--relation-filter", src.relation_filter, "File of -relation / +relation lines")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--no-relation-filter", src.no_filter, "Keep every relation");
}

struct PromptFlags {
  std::string setting = "with";
  std::string style = "zero-shot";
  std::size_t exemplars = 5;
  std::string mix = "mixed";
  bool nota_instruction = false;
  std::size_t verify_all_retries = 1;
  std::uint64_t seed = 0;
  std::size_t parallel = 1;
  bool exclude_unfinished = false;
};

void add_prompt_flags(CLI::App* cmd, PromptFlags& f) {
  cmd->add_option("--setting", f.setting, "with | without | upperbound")->capture_default_str();
  cmd->add_option("--style", f.style, "zero-shot | few-shot | cot | cot-sc | ltm | staged | verify-all")
      ->capture_default_str();
  cmd->add_option("--exemplars", f.exemplars, "Exemplars per prompt")->capture_default_str();
  cmd->add_option("--mix", f.mix, "easy | medium | hard | mixed")->capture_default_str();
  cmd->add_flag("--nota-instruction", f.nota_instruction, "Tell the model it may answer none of the above");
  cmd->add_option("--verify-all-retries", f.verify_all_retries, "Rejected combinations shown in verify-all exemplars")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Exemplar selection seed")->capture_default_str();
  cmd->add_option("--parallel", f.parallel, "Concurrent requests")->capture_default_str();
  cmd->add_flag("--exclude-unfinished", f.exclude_unfinished, "Drop unfinished responses instead of scoring them 0");
}

EvaluationConfig to_config(const PromptFlags& f) {
  EvaluationConfig c;
  c.prompt.setting = parse_setting(f.setting);
  c.prompt.style = parse_style(f.style);
  c.prompt.exemplar_count = f.exemplars;
  c.prompt.exemplar_mix = parse_mix(f.mix);
  c.prompt.nota_instruction = f.nota_instruction;
  c.prompt.verify_all_retries = f.verify_all_retries;
  c.exemplar_seed = f.seed;
  c.parallel = f.parallel;
  c.unfinished_policy = f.exclude_unfinished ? UnfinishedPolicy::exclude : UnfinishedPolicy::zero_score;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge crossword generator, solver and evaluator"};
  app.require_subcommand(1);
  int code = kOk;

  // generate
  GenerateOptions gen;
  std::string gen_tier = "all";
  auto* generate = app.add_subcommand("generate", "Sample problems from a knowledge graph");
  add_graph_flags(generate, gen.kg, true);
  generate->add_option("--out", gen.out_dir, "Output directory")->required();
  generate->add_option("--config", gen.config_file, "key = value settings file")->check(CLI::ExistingFile);
  generate->add_option("--tier", gen_tier, "easy | medium | hard | all")->capture_default_str();
  generate->add_option("--per-tier", gen.generation.per_tier, "Problems per tier")->capture_default_str();
  generate->add_option("--max-attempts", gen.generation.max_attempts, "Sampling attempts (0 = 200 per problem)");
  generate->add_option("--options-per-blank", gen.generation.options.options_per_blank)->capture_default_str();
  generate->add_option("--noise", gen.generation.noise_per_constraint, "Noise triples per constraint")
      ->capture_default_str();
  generate->add_flag("--nota", gen.generation.nota, "Also emit none-of-the-above variants");
  generate->add_option("--seed", gen.generation.seed)->capture_default_str();
  generate->add_option("--parallel", gen.generation.parallel, "Worker threads")->capture_default_str();
  generate->callback([&] {
    gen.generation.tiers = parse_tier_selection(gen_tier);
    code = cmd_generate(gen, std::cerr);
  });

  // stats
  StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Per-subset counts and average nodes, edges and blanks");
  stats_cmd->add_option("datasets", stats.datasets, "Problem JSONL files")->required()->check(CLI::ExistingFile);
  stats_cmd->add_flag("--json", stats.json, "JSON output");
  stats_cmd->callback([&] { code = cmd_stats(stats, std::cout, std::cerr); });

  // evaluate
  EvaluateOptions eval;
  PromptFlags eval_flags;
  std::string eval_tier = "all";
  std::optional<double> temperature;
  std::optional<std::size_t> samples;
  auto* evaluate = app.add_subcommand("evaluate", "Prompt a responder and score the answers");
  evaluate->add_option("datasets", eval.datasets, "Problem JSONL files")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--tier", eval_tier, "easy | medium | hard | all")->capture_default_str();
  evaluate->add_flag("--oracle", eval.oracle, "Use the built-in oracle responder");
  evaluate->add_option("--endpoint", eval.endpoint, "Chat-completion base URL (API key from KC_API_KEY)");
  evaluate->add_option("--model", eval.responder.model, "Model name");
  evaluate->add_option("--predictions", eval.predictions, "Score stored responses (JSONL)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--temperature", temperature, "Sampling temperature (0.1; 0.7 for cot-sc)");
  evaluate->add_option("--samples", samples, "Completions per prompt (1; 5 for cot-sc)");
  evaluate->add_option("--max-tokens", eval.responder.max_tokens)->capture_default_str();
  evaluate->add_option("--max-attempts", eval.responder.retry.max_attempts, "HTTP attempts per request")
      ->capture_default_str();
  evaluate->add_option("--rate-limit", eval.responder.rate_limit.requests, "Requests per minute (0 = unlimited)");
  evaluate->add_option("--exemplar-pool", eval.exemplar_pool, "Exemplar source files (default: the datasets)");
  add_graph_flags(evaluate, eval.verifier, false);
  evaluate->add_option("--out", eval.out_dir, "Report directory");
  add_prompt_flags(evaluate, eval_flags);
  evaluate->callback([&] {
    eval.tiers = parse_tier_selection(eval_tier);
    eval.evaluation = to_config(eval_flags);
    const bool sc = eval.evaluation.prompt.style == Style::cot_sc;
    const auto sc_defaults = ResponderConfig::self_consistency_defaults();
    eval.responder.temperature = temperature.value_or(sc ? sc_defaults.temperature : eval.responder.temperature);
    eval.responder.sample_count = samples.value_or(sc ? sc_defaults.sample_count : 1);
    code = cmd_evaluate(eval, std::cout, std::cerr).exit_code;
  });

  // validate
  ValidateOptions val;
  auto* validate = app.add_subcommand("validate", "Re-check every invariant of a dataset against its graph");
  add_graph_flags(validate, val.kg, true);
  validate->add_option("datasets", val.datasets, "Problem JSONL files")->required()->check(CLI::ExistingFile);
  validate->callback([&] { code = cmd_validate(val, std::cout, std::cerr); });

  // render
  RenderOptions ren;
  PromptFlags ren_flags;
  auto* render = app.add_subcommand("render", "Print prompts");
  render->add_option("datasets", ren.datasets, "Problem JSONL files")->required()->check(CLI::ExistingFile);
  render->add_option("--id", ren.ids, "Only these problem ids");
  render->add_option("--exemplar-pool", ren.exemplar_pool, "Exemplar source files (default: the datasets)");
  add_graph_flags(render, ren.verifier, false);
  add_prompt_flags(render, ren_flags);
  render->callback([&] {
    ren.evaluation = to_config(ren_flags);
    code = cmd_render(ren, std::cout, std::cerr);
  });

  // solve
  SolveOptions sol;
  std::string strategy = "staged";
  auto* solve = app.add_subcommand("solve", "Print oracle solver transcripts");
  solve->add_option("datasets", sol.datasets, "Problem JSONL files")->required()->check(CLI::ExistingFile);
  solve->add_option("--id", sol.ids, "Only these problem ids");
  solve->add_option("--strategy", strategy, "staged | verify-all")->capture_default_str();
  solve->add_option("--verify-all-retries", sol.verify_all_retries)->capture_default_str();
  add_graph_flags(solve, sol.kg, false);
  solve->callback([&] {
    sol.style = parse_style(strategy);
    code = cmd_solve(sol, std::cout, std::cerr);
  });

  // synth-kg
  SynthOptions syn;
  auto* synth = app.add_subcommand("synth-kg", "Write a seeded synthetic knowledge graph");
  synth->add_option("--out", syn.out, "Output TSV")->required();
  synth->add_option("--persons", syn.config.persons)->capture_default_str();
  synth->add_option("--films", syn.config.films)->capture_default_str();
  synth->add_option("--countries", syn.config.countries)->capture_default_str();
  synth->add_option("--seed", syn.config.seed)->capture_default_str();
  synth->callback([&] { code = cmd_synth_kg(syn, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const kc::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const kc::Error& e) {
    std::cerr << e.what() << "\n";
    return kDataInvalid;
  }
  return code;
}
