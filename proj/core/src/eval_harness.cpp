#include "kc/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "kc/error.hpp"

namespace kc {

Score score(const Problem& p, const ParsedAnswer& a) {
  Score s;
  s.blanks = p.blank_count();
  if (p.nota()) {
    if (a.nota_claimed) s.correct = s.blanks;
    return s;
  }
  if (a.nota_claimed) return s;
  for (std::size_t b = 0; b < s.blanks && b < a.per_blank.size(); ++b) {
    if (a.per_blank[b] && b < p.options.gold_index.size() && *a.per_blank[b] == p.options.gold_index[b]) {
      ++s.correct;
    }
  }
  return s;
}

Patterns classify_pattern(const QuestionGraph& q) {
  const auto n = q.blank_count();
  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& c : q.constraints) {
    if (!c.head.blank || !c.tail.blank) continue;
    const auto a = *c.head.blank;
    const auto b = *c.tail.blank;
    if (a == b || a >= n || b >= n) continue;
    adj[a].insert(b);
    adj[b].insert(a);
  }
  Patterns out;
  std::size_t edges = 0;
  for (std::size_t v = 0; v < n; ++v) {
    edges += adj[v].size();
    if (!adj[v].empty()) out.two_blank = true;
    if (adj[v].size() >= 2) out.three_path = true;
  }
  edges /= 2;

  // A simple graph is a forest iff |E| = |V| - #components.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t v = 0; v < n; ++v) {
    for (auto u : adj[v]) {
      const auto a = find(v);
      const auto b = find(u);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  out.cycle = edges + components > n;
  return out;
}

std::vector<const ProblemResult*> ScoreReport::counted() const {
  std::vector<const ProblemResult*> out;
  for (const auto& r : per_problem) {
    if (r.unfinished && unfinished_policy == UnfinishedPolicy::exclude) continue;
    out.push_back(&r);
  }
  return out;
}

Aggregate aggregate(std::span<const ProblemResult* const> results) {
  Aggregate a;
  a.n = results.size();
  if (results.empty()) return a;
  double pc = 0.0;
  double fc = 0.0;
  for (const auto* r : results) {
    pc += r->score.pc();
    fc += r->score.fc();
  }
  a.mean_pc = 100.0 * pc / static_cast<double>(a.n);
  a.mean_fc = 100.0 * fc / static_cast<double>(a.n);
  return a;
}

std::map<Tier, Aggregate> ScoreReport::by_tier() const {
  std::map<Tier, std::vector<const ProblemResult*>> groups;
  for (const auto* r : counted()) groups[r->tier].push_back(r);
  std::map<Tier, Aggregate> out;
  for (const auto& [tier, rs] : groups) out[tier] = aggregate(rs);
  return out;
}

Aggregate ScoreReport::overall() const {
  const auto rs = counted();
  return aggregate(rs);
}

std::size_t ScoreReport::unfinished_count() const {
  return static_cast<std::size_t>(
      std::count_if(per_problem.begin(), per_problem.end(), [](const auto& r) { return r.unfinished; }));
}

ScoreReport build_report(std::span<const Problem> problems, std::span<const ParsedAnswer> answers,
                         const std::vector<bool>& unfinished, std::string setting, UnfinishedPolicy policy) {
  if (answers.size() != problems.size() || unfinished.size() != problems.size()) {
    throw Error("build_report: " + std::to_string(problems.size()) + " problems but " +
                std::to_string(answers.size()) + " answers and " + std::to_string(unfinished.size()) + " flags");
  }
  ScoreReport report;
  report.setting = std::move(setting);
  report.unfinished_policy = policy;
  report.per_problem.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& p = problems[i];
    ProblemResult r;
    r.id = p.id;
    r.tier = p.tier;
    r.nota = p.nota();
    r.unfinished = unfinished[i];
    if (r.unfinished) {
      r.score.blanks = p.blank_count();
    } else {
      r.score = score(p, answers[i]);
    }
    r.nota_claimed = !r.unfinished && answers[i].nota_claimed;
    r.gold_positions = p.options.gold_index;
    r.blank_correct.assign(p.blank_count(), false);
    if (!r.unfinished && !p.nota() && !answers[i].nota_claimed) {
      const auto& a = answers[i].per_blank;
      for (std::size_t b = 0; b < r.gold_positions.size() && b < a.size(); ++b) {
        r.blank_correct[b] = a[b] && *a[b] == r.gold_positions[b];
      }
    }
    r.patterns = classify_pattern(p.question);
    report.per_problem.push_back(std::move(r));
  }
  return report;
}

RandomBaseline random_baseline(std::span<const Problem> problems, std::size_t trials, Rng& rng) {
  if (trials == 0) throw Error("random_baseline: trials must be at least 1");
  RandomBaseline out;
  if (problems.empty()) return out;

  double pc_sum = 0.0;
  double fc_sum = 0.0;
  ParsedAnswer guess;
  for (std::size_t t = 0; t < trials; ++t) {
    for (const auto& p : problems) {
      guess.per_blank.assign(p.blank_count(), std::nullopt);
      for (std::size_t b = 0; b < p.blank_count(); ++b) {
        const auto k = p.options.per_blank[b].size();
        if (k > 0) guess.per_blank[b] = rng.uniform(k);
      }
      const auto s = score(p, guess);
      pc_sum += s.pc();
      fc_sum += s.fc();
    }
  }
  const double draws = static_cast<double>(trials) * static_cast<double>(problems.size());
  out.mean_pc = 100.0 * pc_sum / draws;
  out.mean_fc = 100.0 * fc_sum / draws;

  double exp_pc = 0.0;
  double exp_fc = 0.0;
  double var_fc = 0.0;
  for (const auto& p : problems) {
    if (p.nota() || p.blank_count() == 0) continue;
    double pc = 0.0;
    double fc = 1.0;
    for (const auto& opts : p.options.per_blank) {
      const double q = opts.empty() ? 0.0 : 1.0 / static_cast<double>(opts.size());
      pc += q;
      fc *= q;
    }
    exp_pc += pc / static_cast<double>(p.blank_count());
    exp_fc += fc;
    var_fc += fc * (1.0 - fc);
  }
  const double n = static_cast<double>(problems.size());
  out.expected_pc = 100.0 * exp_pc / n;
  out.expected_fc = 100.0 * exp_fc / n;
  out.fc_sigma = 100.0 * std::sqrt(var_fc / static_cast<double>(trials)) / n;
  return out;
}

CrossTab cross_tab(const ScoreReport& with_knowledge, const ScoreReport& without_knowledge) {
  std::unordered_map<std::string, int> without;
  for (const auto& r : without_knowledge.per_problem) without[r.id] = r.score.fc();
  if (without.size() != with_knowledge.per_problem.size()) {
    throw Error("cross_tab: reports cover different problem sets");
  }
  CrossTab t;
  for (const auto& r : with_knowledge.per_problem) {
    const auto it = without.find(r.id);
    if (it == without.end()) throw Error("cross_tab: problem '" + r.id + "' missing from the without-knowledge report");
    const bool n_plus = it->second == 1;
    const bool k_plus = r.score.fc() == 1;
    if (n_plus && k_plus) ++t.n_plus_k_plus;
    else if (n_plus) ++t.n_plus_k_minus;
    else if (k_plus) ++t.n_minus_k_plus;
    else ++t.n_minus_k_minus;
  }
  return t;
}

namespace {

std::vector<Aggregate> aggregate_buckets(const std::vector<std::vector<const ProblemResult*>>& buckets) {
  std::vector<Aggregate> out;
  out.reserve(buckets.size());
  for (const auto& b : buckets) out.push_back(aggregate(b));
  return out;
}

}  // namespace

PositionSlice option_order_slice(const ScoreReport& report) {
  const auto rs = report.counted();
  std::vector<std::vector<const ProblemResult*>> first;
  std::vector<std::pair<std::size_t, std::size_t>> each;  // (correct, total)
  for (const auto* r : rs) {
    if (r->gold_positions.empty()) continue;
    const auto pos = r->gold_positions.front();
    if (first.size() <= pos) first.resize(pos + 1);
    first[pos].push_back(r);
    for (std::size_t b = 0; b < r->gold_positions.size(); ++b) {
      const auto g = r->gold_positions[b];
      if (each.size() <= g) each.resize(g + 1);
      ++each[g].second;
      if (b < r->blank_correct.size() && r->blank_correct[b]) ++each[g].first;
    }
  }
  PositionSlice out;
  out.by_first_blank = aggregate_buckets(first);
  for (const auto& [correct, total] : each) {
    out.by_each_blank.push_back(
        {total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0, total});
  }
  return out;
}

PatternSlice pattern_slice(const ScoreReport& report) {
  std::vector<const ProblemResult*> ab, abc, cyc, none;
  for (const auto* r : report.counted()) {
    if (r->patterns.two_blank) ab.push_back(r);
    if (r->patterns.three_path) abc.push_back(r);
    if (r->patterns.cycle) cyc.push_back(r);
    if (!r->patterns.any()) none.push_back(r);
  }
  return {aggregate(ab), aggregate(abc), aggregate(cyc), aggregate(none)};
}

NotaSlice nota_slice(const ScoreReport& report) {
  std::vector<const ProblemResult*> nota, regular;
  for (const auto* r : report.counted()) (r->nota ? nota : regular).push_back(r);
  NotaSlice out{aggregate(nota), aggregate(regular), 0};
  for (const auto* r : regular) out.nota_claims_on_regular += r->nota_claimed ? 1 : 0;
  return out;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  return buf;
}

namespace {

Json aggregate_json(const Aggregate& a) {
  Json j;
  j["mean_pc"] = std::round(a.mean_pc * 10.0) / 10.0;
  j["mean_fc"] = std::round(a.mean_fc * 10.0) / 10.0;
  j["n"] = a.n;
  return j;
}

}  // namespace

Json report_json(const ScoreReport& report) {
  Json j;
  j["setting"] = report.setting;
  j["unfinished_policy"] = report.unfinished_policy == UnfinishedPolicy::exclude ? "exclude" : "zero";
  j["unfinished"] = report.unfinished_count();
  Json tiers = Json::object();
  for (const auto& [tier, a] : report.by_tier()) tiers[std::string(to_string(tier))] = aggregate_json(a);
  j["aggregates"] = tiers;
  j["overall"] = aggregate_json(report.overall());

  Json slices;
  const auto pat = pattern_slice(report);
  slices["patterns"] = {{"A-B", aggregate_json(pat.two_blank)},
                        {"A-B-C", aggregate_json(pat.three_path)},
                        {"cycle", aggregate_json(pat.cycle)},
                        {"none", aggregate_json(pat.none)}};
  const auto pos = option_order_slice(report);
  Json first = Json::array();
  for (const auto& a : pos.by_first_blank) first.push_back(aggregate_json(a));
  Json each = Json::array();
  for (const auto& a : pos.by_each_blank) {
    each.push_back({{"accuracy", std::round(a.accuracy * 10.0) / 10.0}, {"n", a.n}});
  }
  slices["option_order"] = {{"first_blank", first}, {"per_blank", each}};
  const auto nota = nota_slice(report);
  slices["nota"] = {{"nota", aggregate_json(nota.nota)},
                    {"regular", aggregate_json(nota.regular)},
                    {"claims_on_regular", nota.nota_claims_on_regular}};
  j["slices"] = slices;

  Json per = Json::array();
  for (const auto& r : report.per_problem) {
    Json e;
    e["id"] = r.id;
    e["tier"] = to_string(r.tier);
    e["nota"] = r.nota;
    e["correct"] = r.score.correct;
    e["blanks"] = r.score.blanks;
    e["pc"] = r.score.pc();
    e["fc"] = r.score.fc();
    e["unfinished"] = r.unfinished;
    per.push_back(std::move(e));
  }
  j["per_problem"] = per;
  return j;
}

std::string render_table(std::span<const ScoreReport> reports) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"setting", "tier", "n", "PC", "FC"});
  for (const auto& rep : reports) {
    for (const auto& [tier, a] : rep.by_tier()) {
      rows.push_back({rep.setting, std::string(to_string(tier)), std::to_string(a.n), format_percent(a.mean_pc),
                      format_percent(a.mean_fc)});
    }
    const auto all = rep.overall();
    rows.push_back({rep.setting, "all", std::to_string(all.n), format_percent(all.mean_pc), format_percent(all.mean_fc)});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool numeric = c >= 2;
      const auto pad = std::string(width[c] - row[c].size(), ' ');
      if (c) out << "  ";
      out << (numeric ? pad + row[c] : row[c] + (c + 1 < row.size() ? pad : ""));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace kc
