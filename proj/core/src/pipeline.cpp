#include "kc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "kc/csp_solver.hpp"
#include "kc/error.hpp"
#include "kc/knowledge_composer.hpp"
#include "kc/sampler.hpp"

namespace kc {

void parallel_for(std::size_t n, std::size_t width, const std::function<void(std::size_t)>& fn) {
  width = std::clamp<std::size_t>(width, 1, std::max<std::size_t>(n, 1));
  if (width == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> workers;
  workers.reserve(width);
  for (std::size_t w = 0; w < width; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const auto i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first) std::rethrow_exception(first);
}

void GenerationConfig::validate() const {
  if (graph_sizes.empty() || reduce_multipliers.empty() || blank_multipliers.empty()) {
    throw Error("generation grid lists must be non-empty");
  }
  for (auto s : graph_sizes) {
    if (s < 2) throw Error("graph size must be at least 2, got " + std::to_string(s));
  }
  if (tiers.empty()) throw Error("no tiers requested");
  if (options.options_per_blank < 2) throw Error("options_per_blank must be at least 2");
  if (per_tier == 0) throw Error("per_tier must be at least 1");
}

std::size_t GeneratedDataset::total() const {
  std::size_t n = 0;
  for (const auto& [tier, ps] : problems) n += ps.size();
  for (const auto& [tier, ps] : nota) n += ps.size();
  return n;
}

SamplerConfig draw_sampler_config(const GenerationConfig& cfg, Rng& rng) {
  SamplerConfig s = cfg.sampler;
  s.graph_size = cfg.graph_sizes[rng.uniform(cfg.graph_sizes.size())];
  const auto lo = std::max<std::size_t>(1, (s.graph_size + 3) / 4);
  const auto hi = std::max(lo, s.graph_size / 2);
  s.blank_size = rng.uniform_between(lo, hi);
  s.reduce_multiplier = cfg.reduce_multipliers[rng.uniform(cfg.reduce_multipliers.size())];
  s.blank_multiplier = cfg.blank_multipliers[rng.uniform(cfg.blank_multipliers.size())];
  return s;
}

namespace {

struct TierOutcome {
  std::optional<Problem> problem;
  std::optional<Problem> nota;
  bool infeasible = false;
  bool nota_infeasible = false;
};

struct Attempt {
  enum class Status { ok, sampling_failure, not_unique } status = Status::sampling_failure;
  std::uint64_t seed = 0;
  std::string key;  // dedup key of the question graph
  std::map<Tier, TierOutcome> tiers;
};

std::string dedup_key(const QuestionGraph& q) {
  std::vector<std::string> parts;
  for (const auto& c : q.constraints) {
    auto g = ground(c, q.gold);
    parts.push_back(g.head.entity + '\t' + g.relation + '\t' + g.tail.entity);
  }
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& p : parts) key += p + '\n';
  key += '#';
  auto golds = q.gold;
  std::sort(golds.begin(), golds.end());
  for (const auto& g : golds) key += g + '\t';
  return key;
}

std::vector<std::string> names_of(const KnowledgeGraph& g, std::span<const EntityId> ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.emplace_back(g.entity_name(id));
  std::sort(out.begin(), out.end());
  return out;
}

Attempt run_attempt(const KnowledgeGraph& g, const GenerationConfig& cfg, const CenterPool& centers,
                    std::size_t index) {
  Attempt a;
  a.seed = mix_seed(cfg.seed, index);
  Rng base(a.seed);
  Rng grid = base.fork(1);
  Rng sampling = base.fork(2);

  QuestionGraph q;
  Neighborhood n;
  try {
    const auto scfg = draw_sampler_config(cfg, grid);
    const auto center = centers.draw(sampling);
    n = capped_khop(g, center, scfg, sampling);
    const auto answer = downsample(g, n, scfg, sampling);
    q = select_blanks(g, answer, scfg, sampling);
  } catch (const SamplingError&) {
    return a;
  }
  if (q.blank_count() == 0 || !is_unique(g, q)) {
    a.status = Attempt::Status::not_unique;
    return a;
  }
  a.status = Attempt::Status::ok;
  a.key = dedup_key(q);

  const auto neighborhood = names_of(g, n.nodes);
  for (auto tier : cfg.tiers) {
    const auto t = static_cast<std::uint64_t>(tier);
    Rng opt_rng = base.fork(10 + t);
    Rng know_rng = base.fork(20 + t);
    Rng nota_rng = base.fork(30 + t);
    TierOutcome out;
    try {
      auto options = sample_options(g, q, n, tier, cfg.options, opt_rng);
      Problem p;
      p.tier = tier;
      p.question = q;
      p.knowledge = compose_knowledge(g, q, options, n, know_rng, cfg.noise_per_constraint);
      p.options = std::move(options);
      p.neighborhood = neighborhood;
      p.seed = a.seed;
      if (cfg.nota) {
        try {
          Problem v = p;
          v.options = make_nota(g, q, n, p.options, nota_rng, cfg.options.redraws_per_blank);
          out.nota = std::move(v);
        } catch (const InfeasibleError&) {
          out.nota_infeasible = true;
        }
      }
      out.problem = std::move(p);
    } catch (const InfeasibleError&) {
      out.infeasible = true;
    }
    a.tiers[tier] = std::move(out);
  }
  return a;
}

std::string group_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "kc-%06zu", index);
  return buf;
}

}  // namespace

GeneratedDataset generate_dataset(const KnowledgeGraph& g, const GenerationConfig& cfg) {
  cfg.validate();
  GeneratedDataset out;
  for (auto t : cfg.tiers) {
    out.problems[t];
    if (cfg.nota) out.nota[t];
  }
  const CenterPool centers(g, cfg.sampler.center_degrees);
  if (centers.empty()) {
    out.warnings.push_back("no entity has a center degree in the configured set");
    return out;
  }

  auto full = [&] {
    return std::all_of(cfg.tiers.begin(), cfg.tiers.end(),
                       [&](Tier t) { return out.problems[t].size() >= cfg.per_tier; });
  };

  std::unordered_set<std::string> seen;
  const auto budget = cfg.attempt_budget();
  const auto batch = std::max<std::size_t>(16, 4 * cfg.parallel);
  std::size_t next = 0;
  while (next < budget && !full()) {
    const auto count = std::min(batch, budget - next);
    std::vector<Attempt> attempts(count);
    parallel_for(count, cfg.parallel, [&](std::size_t i) { attempts[i] = run_attempt(g, cfg, centers, next + i); });

    for (auto& a : attempts) {
      if (full()) break;
      ++out.stats.attempts;
      if (a.status == Attempt::Status::sampling_failure) {
        ++out.stats.sampling_failures;
        continue;
      }
      if (a.status == Attempt::Status::not_unique) {
        ++out.stats.not_unique;
        continue;
      }
      if (!seen.insert(a.key).second) {
        ++out.stats.duplicates;
        continue;
      }
      bool any = false;
      for (auto& [tier, o] : a.tiers) {
        if (o.infeasible) ++out.stats.infeasible[tier];
        if (o.nota_infeasible) ++out.stats.nota_infeasible[tier];
        any = any || (o.problem && out.problems[tier].size() < cfg.per_tier);
      }
      if (!any) continue;
      const auto gid = group_id(out.stats.groups++);
      for (auto& [tier, o] : a.tiers) {
        if (!o.problem || out.problems[tier].size() >= cfg.per_tier) continue;
        o.problem->group = gid;
        o.problem->id = gid + "-" + std::string(to_string(tier));
        out.problems[tier].push_back(std::move(*o.problem));
        if (o.nota) {
          o.nota->group = gid;
          o.nota->id = gid + "-" + std::string(to_string(tier)) + "-nota";
          out.nota[tier].push_back(std::move(*o.nota));
        }
      }
    }
    next += count;
  }

  for (auto t : cfg.tiers) {
    const auto have = out.problems[t].size();
    if (have < cfg.per_tier) {
      out.warnings.push_back(std::string(to_string(t)) + ": generated " + std::to_string(have) + " of " +
                             std::to_string(cfg.per_tier) + " problems within " + std::to_string(budget) +
                             " attempts");
    }
  }
  return out;
}

Neighborhood neighborhood_of(const KnowledgeGraph& g, const Problem& p) {
  Neighborhood n;
  const auto center = g.find_entity(p.question.center);
  if (!center) throw GraphError("center '" + p.question.center + "' is not in the graph");
  n.center = *center;
  for (const auto& name : p.neighborhood) {
    const auto id = g.find_entity(name);
    if (!id) throw GraphError("neighborhood entity '" + name + "' is not in the graph");
    n.nodes.push_back(*id);
  }
  std::sort(n.nodes.begin(), n.nodes.end());
  n.nodes.erase(std::unique(n.nodes.begin(), n.nodes.end()), n.nodes.end());
  n.triples = induced_triples(g, n.nodes);
  return n;
}

std::vector<std::string> validate_problem(const KnowledgeGraph& g, const Problem& p) {
  auto issues = structural_issues(p);
  if (!issues.empty()) return issues;
  const auto& q = p.question;

  for (const auto& c : q.constraints) {
    const auto t = as_triple(ground(c, q.gold));
    if (!t || !g.contains(*t)) {
      issues.push_back("gold assignment violates " + format_constraint(c));
    }
  }
  const auto sols = enumerate_solutions(g, q, 2);
  if (sols.size() != 1) {
    issues.push_back("question graph has " + std::string(sols.empty() ? "no" : "several") + " solutions");
  } else if (sols.front() != q.gold) {
    issues.push_back("unique solution differs from the gold answer");
  }

  const auto& o = p.options;
  if (!p.nota()) {
    for (std::size_t b = 0; b < q.blank_count(); ++b) {
      if (o.per_blank[b][o.gold_index[b]] != q.gold[b]) issues.push_back("gold option mismatch for " + blank_label(b));
    }
  } else {
    for (std::size_t b = 0; b < q.blank_count(); ++b) {
      const auto& opts = o.per_blank[b];
      if (std::find(opts.begin(), opts.end(), q.gold[b]) != opts.end()) {
        issues.push_back("none-of-the-above problem lists the gold answer for " + blank_label(b));
      }
    }
  }
  if (!certify_option_uniqueness(g, q, o)) {
    issues.push_back(p.nota() ? "some option combination satisfies every constraint"
                              : "option space does not have exactly one solution");
  }

  Neighborhood n;
  try {
    n = neighborhood_of(g, p);
  } catch (const GraphError& e) {
    issues.push_back(e.what());
    return issues;
  }
  for (std::size_t b = 0; b < q.blank_count(); ++b) {
    for (std::size_t i = 0; i < o.per_blank[b].size(); ++i) {
      if (!p.nota() && i == o.gold_index[b]) continue;
      const auto& cand = o.per_blank[b][i];
      if (!g.find_entity(cand)) {
        issues.push_back("option '" + cand + "' is not in the graph");
        continue;
      }
      const auto r = rule_check(g, q, n, b, cand);
      if (!r.meets(o.tier)) {
        issues.push_back("distractor '" + cand + "' for " + blank_label(b) + " fails the " +
                         std::string(to_string(o.tier)) + " rules");
      }
    }
  }

  if (p.knowledge) {
    for (const auto& t : p.knowledge->triples) {
      if (!g.contains(t)) issues.push_back("knowledge triple " + format_triple(t) + " is not in the graph");
    }
    if (!p.nota()) {
      for (const auto& c : q.constraints) {
        const auto t = as_triple(ground(c, q.gold));
        if (t && std::find(p.knowledge->triples.begin(), p.knowledge->triples.end(), *t) ==
                     p.knowledge->triples.end()) {
          issues.push_back("knowledge lacks the gold-filled " + format_constraint(c));
        }
      }
    }
  }
  return issues;
}

DatasetStats dataset_stats(std::span<const Problem> problems) {
  DatasetStats s;
  s.questions = problems.size();
  if (problems.empty()) return s;
  double nodes = 0, edges = 0, blanks = 0;
  for (const auto& p : problems) {
    nodes += static_cast<double>(p.question.nodes.size());
    edges += static_cast<double>(p.question.edge_count());
    blanks += static_cast<double>(p.blank_count());
  }
  const auto n = static_cast<double>(problems.size());
  s.avg_nodes = nodes / n;
  s.avg_edges = edges / n;
  s.avg_blanks = blanks / n;
  return s;
}

std::vector<Exemplar> build_exemplars(std::span<const Problem> pool, const EvaluationConfig& cfg) {
  const auto count = cfg.prompt.exemplars_needed();
  if (count == 0) return {};
  const auto chosen = assemble_exemplars(pool, count, cfg.prompt.exemplar_mix, cfg.exemplar_seed);
  std::vector<Exemplar> out;
  out.reserve(chosen.size());
  for (const auto& p : chosen) {
    out.push_back(make_exemplar(p, cfg.prompt.style, cfg.verifier, cfg.prompt.verify_all_retries));
  }
  return out;
}

EvaluationRun run_evaluation(std::span<const Problem> problems, std::span<const Problem> exemplar_pool,
                             Responder& responder, const EvaluationConfig& cfg) {
  EvaluationRun run;
  run.exemplars = build_exemplars(exemplar_pool, cfg);
  std::unordered_set<std::string> exemplar_ids;
  for (const auto& e : run.exemplars) exemplar_ids.insert(e.problem.id);
  for (const auto& p : problems) {
    if (!exemplar_ids.count(p.id)) run.evaluated.push_back(p);
  }

  const auto n = run.evaluated.size();
  run.predictions.resize(n);
  run.samples.resize(n);
  run.answers.resize(n);
  std::vector<char> unfinished(n, 0);
  std::atomic<std::size_t> transport{0};
  std::atomic<std::size_t> overflow{0};

  parallel_for(n, cfg.parallel, [&](std::size_t i) {
    const auto& p = run.evaluated[i];
    const auto prompt = render_prompt(p, cfg.prompt, run.exemplars);
    auto& pred = run.predictions[i];
    pred.problem_id = p.id;
    try {
      run.samples[i] = responder.respond(prompt, p);
    } catch (const TransportError&) {
      unfinished[i] = 1;
      ++transport;
    } catch (const ContextOverflowError&) {
      unfinished[i] = 1;
      ++overflow;
    }
    if (unfinished[i] || run.samples[i].empty()) {
      unfinished[i] = 1;
      pred.unfinished = true;
      run.answers[i].per_blank.assign(p.blank_count(), std::nullopt);
      return;
    }
    if (run.samples[i].size() == 1) {
      pred.response_text = run.samples[i].front();
      run.answers[i] = parse_answer(pred.response_text, p);
      return;
    }
    std::vector<ParsedAnswer> parses;
    parses.reserve(run.samples[i].size());
    for (const auto& s : run.samples[i]) parses.push_back(parse_answer(s, p));
    run.answers[i] = self_consistency(parses);
    pred.response_text = format_answer(run.answers[i]);
  });

  const std::vector<bool> flags(unfinished.begin(), unfinished.end());
  run.report = build_report(run.evaluated, run.answers, flags, std::string(to_string(cfg.prompt.setting)),
                            cfg.unfinished_policy);
  run.transport_failures = transport.load();
  run.context_overflows = overflow.load();
  return run;
}

EvaluationRun score_predictions(std::span<const Problem> problems, std::span<const Prediction> predictions,
                                const std::string& setting, UnfinishedPolicy policy) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& pr : predictions) by_id[pr.problem_id] = &pr;
  EvaluationRun run;
  run.evaluated.assign(problems.begin(), problems.end());
  std::vector<bool> flags;
  for (const auto& p : run.evaluated) {
    const auto it = by_id.find(p.id);
    Prediction pred;
    pred.problem_id = p.id;
    ParsedAnswer a;
    a.per_blank.assign(p.blank_count(), std::nullopt);
    if (it == by_id.end() || it->second->unfinished) {
      pred.unfinished = true;
      if (it != by_id.end()) pred.response_text = it->second->response_text;
    } else {
      pred = *it->second;
      a = parse_answer(pred.response_text, p);
    }
    flags.push_back(pred.unfinished);
    run.samples.push_back({pred.response_text});
    run.predictions.push_back(std::move(pred));
    run.answers.push_back(std::move(a));
  }
  run.report = build_report(run.evaluated, run.answers, flags, setting, policy);
  return run;
}

}  // namespace kc
