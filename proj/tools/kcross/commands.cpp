#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "kc/csp_solver.hpp"
#include "kc/error.hpp"

namespace kc::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& dir, const std::string& command, Json config, std::uint64_t seed,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs, Json counts,
                    const std::string& started) {
  Json m;
  m["command"] = command;
  m["config"] = std::move(config);
  m["seed"] = seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["started_at"] = started;
  m["finished_at"] = utc_now();
  m["counts"] = std::move(counts);
  m["generator_version"] = std::string(kGeneratorVersion);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::size_t to_size(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("'" + key + "' expects a non-negative integer, got '" + text + "'");
  }
}

// Generation-level keys are consumed here; the rest go to the sampler parser.
void apply_config_file(const std::string& path, GenerationConfig& gen) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream rest;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto eq = line.find('=');
    std::string key = eq == std::string::npos ? "" : line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::string value = eq == std::string::npos ? "" : line.substr(eq + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    if (key == "graph_sizes" || key == "graph_size") {
      gen.graph_sizes.clear();
      for (const auto& v : split_list(value)) gen.graph_sizes.push_back(to_size(v, key));
    } else if (key == "reduce_multipliers" || key == "reduce_multiplier") {
      gen.reduce_multipliers.clear();
      for (const auto& v : split_list(value)) gen.reduce_multipliers.push_back(Multiplier::parse(v));
    } else if (key == "blank_multipliers" || key == "blank_multiplier") {
      gen.blank_multipliers.clear();
      for (const auto& v : split_list(value)) gen.blank_multipliers.push_back(Multiplier::parse(v));
    } else if (key == "per_tier") {
      gen.per_tier = to_size(value, key);
    } else if (key == "options_per_blank") {
      gen.options.options_per_blank = to_size(value, key);
    } else if (key == "noise_per_constraint") {
      gen.noise_per_constraint = to_size(value, key);
    } else if (key == "max_attempts") {
      gen.max_attempts = to_size(value, key);
    } else {
      rest << line << '\n';
      continue;
    }
    rest << '\n';  // keep line numbers aligned for sampler errors
  }
  std::istringstream sampler_in(rest.str());
  gen.sampler = parse_sampler_config(sampler_in, gen.sampler);
}

Json generation_json(const GenerationConfig& g) {
  Json j;
  j["sampler"] = sampler_config_json(g.sampler);
  j["graph_sizes"] = g.graph_sizes;
  Json rm = Json::array();
  for (const auto& m : g.reduce_multipliers) rm.push_back(m.to_string());
  j["reduce_multipliers"] = rm;
  Json bm = Json::array();
  for (const auto& m : g.blank_multipliers) bm.push_back(m.to_string());
  j["blank_multipliers"] = bm;
  Json tiers = Json::array();
  for (auto t : g.tiers) tiers.push_back(to_string(t));
  j["tiers"] = tiers;
  j["options_per_blank"] = g.options.options_per_blank;
  j["redraws_per_blank"] = g.options.redraws_per_blank;
  j["noise_per_constraint"] = g.noise_per_constraint;
  j["nota"] = g.nota;
  j["per_tier"] = g.per_tier;
  j["max_attempts"] = g.attempt_budget();
  j["parallel"] = g.parallel;
  return j;
}

Json prompt_json(const EvaluationConfig& e) {
  Json j;
  j["setting"] = to_string(e.prompt.setting);
  j["style"] = to_string(e.prompt.style);
  j["exemplars"] = e.prompt.exemplars_needed();
  j["mix"] = to_string(e.prompt.exemplar_mix);
  j["nota_instruction"] = e.prompt.nota_instruction;
  j["verify_all_retries"] = e.prompt.verify_all_retries;
  j["exemplar_seed"] = e.exemplar_seed;
  j["unfinished"] = e.unfinished_policy == UnfinishedPolicy::exclude ? "exclude" : "zero";
  j["parallel"] = e.parallel;
  return j;
}

std::vector<Problem> select(std::vector<Problem> problems, const std::vector<std::string>& ids) {
  if (ids.empty()) return problems;
  const std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  std::erase_if(problems, [&](const Problem& p) { return !wanted.count(p.id); });
  return problems;
}

std::optional<KnowledgeGraph> optional_graph(const GraphSource& src, std::ostream& log) {
  if (src.path.empty()) return std::nullopt;
  return load_source(src, log);
}

std::string fixed2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

}  // namespace

KnowledgeGraph load_source(const GraphSource& src, std::ostream& log) {
  RelationFilter filter;
  if (!src.no_filter) {
    filter = src.relation_filter.empty() ? RelationFilter::yago_default() : RelationFilter::load(src.relation_filter);
  }
  LoadStats stats;
  auto g = load_graph(src.path, filter, &stats);
  log << "loaded " << src.path << "\n" << stats.summary();
  return g;
}

std::vector<Tier> parse_tier_selection(const std::string& text) {
  if (text == "all") return {Tier::easy, Tier::medium, Tier::hard};
  return {parse_tier(text)};
}

std::vector<Problem> load_datasets(const std::vector<std::string>& paths) {
  std::vector<Problem> out;
  for (const auto& p : paths) {
    auto part = load_problems(p);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

int cmd_generate(const GenerateOptions& opt, std::ostream& log) {
  const auto started = utc_now();
  if (opt.out_dir.empty()) {
    log << "generate: --out is required\n";
    return kUsage;
  }
  GenerationConfig gen = opt.generation;
  KnowledgeGraph g;
  try {
    if (!opt.config_file.empty()) apply_config_file(opt.config_file, gen);
    gen.validate();
    g = load_source(opt.kg, log);
  } catch (const ParseError& e) {
    log << "generate: " << e.what() << "\n";
    return kDataInvalid;
  } catch (const GraphError& e) {
    log << "generate: " << e.what() << "\n";
    return kDataInvalid;
  } catch (const Error& e) {
    log << "generate: " << e.what() << "\n";
    return kUsage;
  }

  const auto data = generate_dataset(g, gen);
  for (const auto& w : data.warnings) log << "warning: " << w << "\n";
  const auto& st = data.stats;
  log << "attempts " << st.attempts << ", sampling failures " << st.sampling_failures << ", not unique "
      << st.not_unique << ", duplicates " << st.duplicates << ", question graphs " << st.groups << "\n";

  if (data.total() == 0) {
    log << "generate: no valid problems were produced\n";
    for (const auto& [tier, n] : st.infeasible) log << "  " << to_string(tier) << " infeasible: " << n << "\n";
    return kDataInvalid;
  }

  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  Json counts;
  auto emit = [&](const std::string& name, const std::vector<Problem>& ps) {
    std::ofstream out(dir / name, std::ios::binary);
    write_problems_jsonl(out, ps);
    outputs.push_back(name);
    counts[name] = ps.size();
  };
  for (const auto& [tier, ps] : data.problems) emit(std::string(to_string(tier)) + ".jsonl", ps);
  for (const auto& [tier, ps] : data.nota) emit("nota_" + std::string(to_string(tier)) + ".jsonl", ps);
  counts["attempts"] = st.attempts;
  counts["question_graphs"] = st.groups;
  write_manifest(dir, "generate", generation_json(gen), gen.seed, {opt.kg.path}, outputs, counts, started);
  log << "wrote " << data.total() << " problems to " << dir.string() << "\n";
  return kOk;
}

std::map<std::string, DatasetStats> stats_by_subset(const std::vector<Problem>& problems) {
  std::map<std::string, std::vector<Problem>> groups;
  for (const auto& p : problems) {
    auto key = std::string(to_string(p.tier));
    if (p.nota()) key += "-nota";
    groups[key].push_back(p);
  }
  std::map<std::string, DatasetStats> out;
  for (const auto& [k, ps] : groups) out[k] = dataset_stats(ps);
  return out;
}

int cmd_stats(const StatsOptions& opt, std::ostream& out, std::ostream& log) {
  std::vector<Problem> problems;
  try {
    problems = load_datasets(opt.datasets);
  } catch (const Error& e) {
    log << "stats: " << e.what() << "\n";
    return kDataInvalid;
  }
  const auto by = stats_by_subset(problems);
  const std::vector<std::string> order{"easy", "medium", "hard", "easy-nota", "medium-nota", "hard-nota"};
  if (opt.json) {
    Json j = Json::object();
    for (const auto& k : order) {
      const auto it = by.find(k);
      if (it == by.end()) continue;
      j[k] = {{"questions", it->second.questions},
              {"avg_nodes", it->second.avg_nodes},
              {"avg_edges", it->second.avg_edges},
              {"avg_blanks", it->second.avg_blanks}};
    }
    out << j.dump(2) << "\n";
    return kOk;
  }
  out << std::left << std::setw(12) << "subset" << std::right << std::setw(8) << "#Qs" << std::setw(11) << "nodes"
      << std::setw(11) << "edges" << std::setw(11) << "blanks" << "\n";
  for (const auto& k : order) {
    const auto it = by.find(k);
    if (it == by.end()) continue;
    const auto& s = it->second;
    out << std::left << std::setw(12) << k << std::right << std::setw(8) << s.questions << std::setw(11)
        << fixed2(s.avg_nodes) << std::setw(11) << fixed2(s.avg_edges) << std::setw(11) << fixed2(s.avg_blanks)
        << "\n";
  }
  return kOk;
}

EvaluateResult cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& log) {
  const auto started = utc_now();
  EvaluateResult result;
  const int sources = (opt.oracle ? 1 : 0) + (opt.endpoint.empty() ? 0 : 1) + (opt.predictions.empty() ? 0 : 1);
  if (sources != 1) {
    log << "evaluate: give exactly one of --oracle, --endpoint or --predictions\n";
    result.exit_code = kUsage;
    return result;
  }

  std::vector<Problem> problems;
  std::vector<Problem> pool;
  std::optional<KnowledgeGraph> verifier;
  std::vector<Prediction> predictions;
  try {
    problems = load_datasets(opt.datasets);
    std::erase_if(problems, [&](const Problem& p) {
      return std::find(opt.tiers.begin(), opt.tiers.end(), p.tier) == opt.tiers.end();
    });
    pool = opt.exemplar_pool.empty() ? problems : load_datasets(opt.exemplar_pool);
    verifier = optional_graph(opt.verifier, log);
    if (!opt.predictions.empty()) {
      std::ifstream in(opt.predictions);
      if (!in) throw ParseError("cannot open predictions file: " + opt.predictions);
      predictions = read_predictions_jsonl(in);
    }
  } catch (const Error& e) {
    log << "evaluate: " << e.what() << "\n";
    result.exit_code = kDataInvalid;
    return result;
  }

  auto cfg = opt.evaluation;
  if (verifier) cfg.verifier = &*verifier;
  const auto setting = std::string(to_string(cfg.prompt.setting));

  SystemClock system_clock;
  Clock& clock = opt.clock ? *opt.clock : system_clock;
  std::unique_ptr<ChatCompletionResponder> remote;
  try {
    if (!opt.predictions.empty()) {
      result.run = score_predictions(problems, predictions, setting, cfg.unfinished_policy);
    } else if (opt.oracle) {
      OracleResponder oracle(cfg.prompt.style, opt.responder.sample_count, cfg.verifier, cfg.prompt.verify_all_retries);
      result.run = run_evaluation(problems, pool, oracle, cfg);
    } else {
      auto rc = opt.responder;
      rc.endpoint = opt.endpoint;
      remote = std::make_unique<ChatCompletionResponder>(rc, clock);
      result.run = run_evaluation(problems, pool, *remote, cfg);
      result.transport = remote->stats();
    }
  } catch (const InfeasibleError& e) {
    log << "evaluate: " << e.what() << "\n";
    result.exit_code = kDataInvalid;
    return result;
  } catch (const RenderError& e) {
    log << "evaluate: " << e.what() << "\n";
    result.exit_code = kDataInvalid;
    return result;
  } catch (const Error& e) {
    log << "evaluate: " << e.what() << "\n";
    result.exit_code = kUsage;
    return result;
  }

  const auto& run = result.run;
  const std::vector<ScoreReport> reports{run.report};
  out << render_table(reports);
  if (run.report.unfinished_count()) log << run.report.unfinished_count() << " unfinished responses\n";

  if (!opt.out_dir.empty()) {
    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    auto report = report_json(run.report);
    if (result.transport) {
      const auto& t = *result.transport;
      Json status = Json::object();
      for (const auto& [code, n] : t.status_counts) status[std::to_string(code)] = n;
      report["transport"] = {{"calls", t.calls},         {"requests", t.requests}, {"retries", t.retries},
                             {"failures", t.failures},   {"overflows", t.overflows}, {"status_counts", status}};
    }
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "table.txt", render_table(reports));
    {
      std::ofstream pred(dir / "predictions.jsonl", std::ios::binary);
      write_predictions_jsonl(pred, run.predictions);
    }
    {
      std::ofstream raw(dir / "responses.jsonl", std::ios::binary);
      for (std::size_t i = 0; i < run.evaluated.size(); ++i) {
        raw << Json{{"problem_id", run.evaluated[i].id}, {"samples", run.samples[i]}}.dump() << "\n";
      }
    }
    Json config = prompt_json(cfg);
    if (!opt.endpoint.empty()) {
      config["endpoint"] = opt.endpoint;
      config["model"] = opt.responder.model;
      config["temperature"] = opt.responder.temperature;
      config["samples"] = opt.responder.sample_count;
    }
    config["responder"] = opt.oracle ? "oracle" : (opt.endpoint.empty() ? "predictions" : "endpoint");
    std::vector<std::string> inputs = opt.datasets;
    if (!opt.predictions.empty()) inputs.push_back(opt.predictions);
    write_manifest(dir, "evaluate", config, cfg.exemplar_seed, inputs,
                   {"report.json", "table.txt", "predictions.jsonl", "responses.jsonl"},
                   Json{{"evaluated", run.evaluated.size()},
                        {"exemplars", run.exemplars.size()},
                        {"unfinished", run.report.unfinished_count()}},
                   started);
  }
  if (run.transport_failures) {
    log << "evaluate: " << run.transport_failures << " problems failed at the transport layer\n";
    result.exit_code = kTransport;
  }
  return result;
}

int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& log) {
  std::vector<Problem> problems;
  KnowledgeGraph g;
  try {
    problems = load_datasets(opt.datasets);
    g = load_source(opt.kg, log);
  } catch (const Error& e) {
    log << "validate: " << e.what() << "\n";
    return kDataInvalid;
  }
  std::size_t bad = 0;
  std::unordered_set<std::string> ids;
  for (const auto& p : problems) {
    auto issues = validate_problem(g, p);
    if (!ids.insert(p.id).second) issues.push_back("duplicate problem id");
    if (issues.empty()) continue;
    ++bad;
    for (const auto& i : issues) out << p.id << ": " << i << "\n";
  }
  out << problems.size() << " problems checked, " << bad << " with issues\n";
  return bad ? kDataInvalid : kOk;
}

int cmd_render(const RenderOptions& opt, std::ostream& out, std::ostream& log) {
  try {
    const auto problems = load_datasets(opt.datasets);
    const auto pool = opt.exemplar_pool.empty() ? problems : load_datasets(opt.exemplar_pool);
    const auto verifier = optional_graph(opt.verifier, log);
    auto cfg = opt.evaluation;
    if (verifier) cfg.verifier = &*verifier;
    const auto exemplars = build_exemplars(pool, cfg);
    std::unordered_set<std::string> skip;
    for (const auto& e : exemplars) skip.insert(e.problem.id);
    for (const auto& p : select(problems, opt.ids)) {
      if (skip.count(p.id)) continue;
      out << "### " << p.id << "\n" << render_prompt(p, cfg.prompt, exemplars) << "\n\n";
    }
  } catch (const Error& e) {
    log << "render: " << e.what() << "\n";
    return kDataInvalid;
  }
  return kOk;
}

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& log) {
  if (opt.style != Style::staged && opt.style != Style::verify_all) {
    log << "solve: strategy must be staged or verify-all\n";
    return kUsage;
  }
  try {
    const auto problems = select(load_datasets(opt.datasets), opt.ids);
    const auto kg = optional_graph(opt.kg, log);
    for (const auto& p : problems) {
      out << "### " << p.id << "\n" << answer_body(p, opt.style, kg ? &*kg : nullptr, opt.verify_all_retries)
          << "\n\n";
    }
  } catch (const Error& e) {
    log << "solve: " << e.what() << "\n";
    return kDataInvalid;
  }
  return kOk;
}

int cmd_synth_kg(const SynthOptions& opt, std::ostream& log) {
  if (opt.out.empty()) {
    log << "synth-kg: --out is required\n";
    return kUsage;
  }
  const auto triples = synthetic_triples(opt.config);
  std::ofstream out(opt.out, std::ios::binary);
  if (!out) {
    log << "synth-kg: cannot write " << opt.out << "\n";
    return kDataInvalid;
  }
  write_triples_tsv(out, triples);
  log << "wrote " << triples.size() << " triples to " << opt.out << "\n";
  return kOk;
}

}  // namespace kc::cli
