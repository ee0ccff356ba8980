#include "kc/prompt.hpp"

#include <algorithm>
#include <set>

#include "kc/error.hpp"
#include "kc/rng.hpp"

namespace kc {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// "(a); (b)." or "None."
std::string listing(const std::vector<std::string>& items) { return items.empty() ? "None." : join(items, "; ") + "."; }

std::string option_text(const Problem& p, std::size_t blank, std::size_t index) {
  return std::string(1, option_letter(index)) + ". " + p.options.per_blank[blank][index];
}

std::string final_answer(const std::optional<std::vector<std::size_t>>& choice) {
  if (!choice) return "none of the above";
  ParsedAnswer a;
  a.per_blank.assign(choice->begin(), choice->end());
  return format_answer(a);
}

std::vector<std::optional<std::size_t>> as_optional(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

PartialAssignment values_of(const Problem& p, const std::vector<std::optional<std::size_t>>& state) {
  PartialAssignment values(p.blank_count());
  for (std::size_t b = 0; b < state.size(); ++b) {
    if (state[b]) values[b] = p.options.per_blank[b][*state[b]];
  }
  return values;
}

std::string current_answer(const Problem& p, const std::vector<std::optional<std::size_t>>& state) {
  std::vector<std::string> parts;
  for (std::size_t b = 0; b < state.size(); ++b) {
    if (state[b]) parts.push_back(blank_label(b) + ": " + option_text(p, b, *state[b]));
  }
  return "Current answer: " + (parts.empty() ? std::string("None.") : join(parts, ", ") + ".");
}

std::vector<std::string> open_constraints(const Problem& p, const PartialAssignment& values) {
  std::vector<std::string> out;
  for (const auto& c : p.question.constraints) {
    auto g = ground(c, values);
    if (g.has_blank()) out.push_back(format_constraint(g));
  }
  return out;
}

// The constraint a stage "solves from": the first one linking the blank to a
// known entity or an answered blank, else the first one mentioning it.
std::size_t anchor_constraint(const Problem& p, std::size_t blank, const std::vector<std::optional<std::size_t>>& state) {
  const auto& cs = p.question.constraints;
  std::optional<std::size_t> fallback;
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    const auto& c = cs[ci];
    if (!c.mentions(blank)) continue;
    if (!fallback) fallback = ci;
    const Slot& other = c.head.blank == blank ? c.tail : c.head;
    if (other.blank == blank) continue;
    if (!other.is_blank() || state[*other.blank]) return ci;
  }
  return fallback.value_or(0);
}

std::string cot_body(const Problem& p) {
  if (p.nota()) return "No combination of the options satisfies all the constraints.\nTherefore, none of the above";
  std::vector<std::string> cited;
  std::set<std::string> seen;
  for (const auto& c : p.question.constraints) {
    auto text = format_constraint(ground(c, p.question.gold));
    if (seen.insert(text).second) cited.push_back(text);
  }
  return join(cited, "; ") + ".\nTherefore, " + format_answer(gold_answer(p));
}

std::string ltm_body(const Problem& p, const KnowledgeGraph& v) {
  const auto& q = p.question;
  std::vector<std::size_t> prefix;
  std::vector<std::string> steps;
  std::vector<std::string> considered;
  bool exhausted = false;
  for (std::size_t ci = 0; ci < q.constraints.size(); ++ci) {
    if (!q.constraints[ci].has_blank()) continue;
    prefix.push_back(ci);
    considered.push_back(format_constraint(q.constraints[ci]));
    std::vector<std::size_t> blanks;
    for (std::size_t b = 0; b < q.blank_count(); ++b) {
      for (auto k : prefix) {
        if (q.constraints[k].mentions(b)) {
          blanks.push_back(b);
          break;
        }
      }
    }
    const auto combos = option_combinations(v, q, p.options, blanks, prefix);
    std::vector<std::string> alternatives;
    for (const auto& combo : combos) {
      std::vector<std::string> parts;
      for (std::size_t k = 0; k < blanks.size(); ++k) {
        parts.push_back(blank_label(blanks[k]) + ": " + option_letter(combo[k]));
      }
      alternatives.push_back(join(parts, " and "));
    }
    std::string step = (steps.empty() ? "Considering " : "considering ") + join(considered, ", ") + ", maybe ";
    step += alternatives.empty() ? "none" : join(alternatives, ", or ");
    steps.push_back(std::move(step));
    if (combos.empty()) {
      exhausted = true;
      break;
    }
  }
  const std::string answer = exhausted || p.nota() ? "none of the above" : format_answer(gold_answer(p));
  return join(steps, "; ") + ". Therefore, " + answer;
}

std::string block(const Problem& p, Setting setting, bool format_line, bool nota_instruction) {
  return render_question(p, setting, format_line, nota_instruction);
}

}  // namespace

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::with_knowledge: return "with-knowledge";
    case Setting::without_knowledge: return "without-knowledge";
    case Setting::upperbound: return "upperbound";
  }
  return "with-knowledge";
}

std::string_view to_string(Style s) {
  switch (s) {
    case Style::zero_shot: return "zero-shot";
    case Style::few_shot: return "few-shot";
    case Style::cot: return "cot";
    case Style::cot_sc: return "cot-sc";
    case Style::ltm: return "ltm";
    case Style::staged: return "staged";
    case Style::verify_all: return "verify-all";
  }
  return "zero-shot";
}

std::string_view to_string(ExemplarMix m) {
  switch (m) {
    case ExemplarMix::easy: return "easy";
    case ExemplarMix::medium: return "medium";
    case ExemplarMix::hard: return "hard";
    case ExemplarMix::mixed: return "mixed";
  }
  return "mixed";
}

Setting parse_setting(std::string_view text) {
  if (text == "with" || text == "with-knowledge") return Setting::with_knowledge;
  if (text == "without" || text == "without-knowledge") return Setting::without_knowledge;
  if (text == "upperbound") return Setting::upperbound;
  throw ParseError("unknown setting '" + std::string(text) + "'");
}

Style parse_style(std::string_view text) {
  for (auto s : {Style::zero_shot, Style::few_shot, Style::cot, Style::cot_sc, Style::ltm, Style::staged,
                 Style::verify_all}) {
    if (text == to_string(s)) return s;
  }
  throw ParseError("unknown style '" + std::string(text) + "'");
}

ExemplarMix parse_mix(std::string_view text) {
  for (auto m : {ExemplarMix::easy, ExemplarMix::medium, ExemplarMix::hard, ExemplarMix::mixed}) {
    if (text == to_string(m)) return m;
  }
  throw ParseError("unknown exemplar mix '" + std::string(text) + "'");
}

std::size_t PromptConfig::exemplars_needed() const { return style == Style::zero_shot ? 0 : exemplar_count; }

KnowledgeGraph gold_knowledge(const Problem& p) {
  std::vector<Triple> triples;
  for (const auto& c : p.question.constraints) {
    if (auto t = as_triple(ground(c, p.question.gold))) triples.push_back(*t);
  }
  if (p.knowledge) triples.insert(triples.end(), p.knowledge->triples.begin(), p.knowledge->triples.end());
  return KnowledgeGraph::from_triples(triples);
}

std::string answer_body(const Problem& p, Style style, const KnowledgeGraph* verifier, std::size_t retries) {
  std::optional<KnowledgeGraph> local;
  auto graph = [&]() -> const KnowledgeGraph& {
    if (verifier) return *verifier;
    if (!local) local = gold_knowledge(p);
    return *local;
  };
  switch (style) {
    case Style::zero_shot:
    case Style::few_shot: return format_answer(gold_answer(p));
    case Style::cot:
    case Style::cot_sc: return cot_body(p);
    case Style::ltm: return ltm_body(p, graph());
    case Style::staged: return render_staged(p, staged_solve(graph(), p.question, p.options));
    case Style::verify_all: return render_verify_all(p, verify_all_solve(graph(), p.question, p.options), retries);
  }
  return {};
}

Exemplar make_exemplar(const Problem& p, Style style, const KnowledgeGraph* verifier, std::size_t retries) {
  return {p, style == Style::cot_sc ? Style::cot : style, answer_body(p, style, verifier, retries)};
}

std::string render_question(const Problem& p, Setting setting, bool with_format_line, bool nota_instruction) {
  std::vector<std::string> lines;
  std::string instruction(kInstruction);
  if (nota_instruction) instruction += " " + std::string(kNotaInstruction);
  lines.push_back(std::move(instruction));

  if (setting == Setting::upperbound) {
    if (with_format_line) lines.push_back("Desired format: blank i: Z ...");
    std::vector<std::string> facts;
    for (const auto& c : p.question.constraints) facts.push_back(format_constraint(ground(c, p.question.gold)));
    lines.push_back("Knowledge: " + listing(facts));
  } else {
    if (setting == Setting::with_knowledge) {
      if (!p.knowledge) throw RenderError("problem " + p.id + " has no knowledge passage");
      std::vector<std::string> facts;
      for (const auto& t : p.knowledge->triples) facts.push_back(format_triple(t));
      lines.push_back("Knowledge: " + listing(facts));
    }
    if (with_format_line) lines.push_back("Desired format: blank i: Z");
  }

  std::vector<std::string> constraints;
  for (const auto& c : p.question.constraints) constraints.push_back(format_constraint(c));
  lines.push_back("Constraints: " + listing(constraints));
  lines.push_back("Options:");
  for (std::size_t b = 0; b < p.options.per_blank.size(); ++b) {
    std::vector<std::string> opts;
    for (std::size_t i = 0; i < p.options.per_blank[b].size(); ++i) opts.push_back(option_text(p, b, i));
    lines.push_back(blank_label(b) + ": " + join(opts, ", "));
  }
  return join(lines, "\n");
}

std::string render_prompt(const Problem& p, const PromptConfig& cfg, std::span<const Exemplar> exemplars) {
  if (cfg.style == Style::zero_shot && !exemplars.empty()) throw RenderError("zero-shot prompts take no exemplars");
  const Style wanted = cfg.style == Style::cot_sc ? Style::cot : cfg.style;
  std::vector<std::string> blocks;
  for (const auto& ex : exemplars) {
    if (ex.style != wanted) {
      throw RenderError("exemplar " + ex.problem.id + " has style " + std::string(to_string(ex.style)) +
                        ", prompt style is " + std::string(to_string(cfg.style)));
    }
    if (ex.problem.id == p.id) throw RenderError("problem " + p.id + " is one of its own exemplars");
    const char* sep = ex.style == Style::staged ? "\n" : " ";
    blocks.push_back(block(ex.problem, cfg.setting, false, cfg.nota_instruction) + "\nAnswer:" + sep + ex.body);
  }
  blocks.push_back(block(p, cfg.setting, true, cfg.nota_instruction) + "\nAnswer:");
  return join(blocks, "\n\n");
}

std::vector<Problem> assemble_exemplars(std::span<const Problem> pool, std::size_t count, ExemplarMix mix,
                                        std::uint64_t seed) {
  std::size_t want[3] = {0, 0, 0};
  switch (mix) {
    case ExemplarMix::easy: want[0] = count; break;
    case ExemplarMix::medium: want[1] = count; break;
    case ExemplarMix::hard: want[2] = count; break;
    case ExemplarMix::mixed:
      want[0] = (2 * count + 2) / 5;
      want[1] = (2 * count + 2) / 5;
      want[2] = count - want[0] - want[1];
      break;
  }
  std::vector<Problem> out;
  for (auto tier : {Tier::easy, Tier::medium, Tier::hard}) {
    const auto t = static_cast<std::size_t>(tier);
    if (want[t] == 0) continue;
    std::vector<const Problem*> candidates;
    for (const auto& p : pool) {
      if (p.tier == tier && !p.nota()) candidates.push_back(&p);
    }
    if (candidates.size() < want[t]) {
      throw InfeasibleError("exemplar pool has " + std::to_string(candidates.size()) + " " +
                            std::string(to_string(tier)) + " problems, needs " + std::to_string(want[t]));
    }
    Rng rng(mix_seed(seed, t));
    auto picked = rng.sample_indices(candidates.size(), want[t]);
    rng.shuffle(picked);
    for (auto i : picked) out.push_back(*candidates[i]);
  }
  return out;
}

std::string render_staged(const Problem& p, const SolveTranscript& t) {
  const auto& q = p.question;
  std::vector<std::string> lines;
  std::vector<std::optional<std::size_t>> state(q.blank_count());
  std::optional<std::size_t> pending_anchor;
  std::vector<std::optional<std::size_t>> before;
  std::size_t last_blank = 0;

  auto status = [&](std::size_t n, const std::vector<std::optional<std::size_t>>& s) {
    lines.push_back("Stage " + std::to_string(n) + " - status:");
    lines.push_back(current_answer(p, s));
    lines.push_back("Remaining constraints containing blanks: " + listing(open_constraints(p, values_of(p, s))));
  };

  auto attempt = [&](const SolveEvent& e, const std::optional<Triple>& violated) {
    const std::size_t n = e.stage, b = *e.blank, i = *e.candidate;
    status(n, before);
    lines.push_back("Stage " + std::to_string(n) + " - solve:");
    lines.push_back("From " + format_constraint(ground(q.constraints[*pending_anchor], values_of(p, before))) +
                    ", candidate for " + blank_label(b) + ": " + option_text(p, b, i) + ".");
    lines.push_back("Stage " + std::to_string(n) + " - status update:");
    lines.push_back(current_answer(p, state));
    const auto after = values_of(p, state);
    std::vector<std::string> filled;
    for (const auto& c : q.constraints) {
      if (!c.mentions(b)) continue;
      if (auto tr = as_triple(ground(c, after))) filled.push_back(format_triple(*tr));
    }
    lines.push_back("Filled remaining constraints with current answer: " + listing(filled));
    lines.push_back("Updated remaining constraints containing blanks: " + listing(open_constraints(p, after)));
    lines.push_back("Stage " + std::to_string(n) + " - verify filled constraints:");
    lines.push_back("Does any error occur in filled remaining constraints?");
    if (violated) {
      lines.push_back(format_triple(*violated) + " is incorrect.");
      lines.push_back("Redo stage " + std::to_string(n) + ".");
    } else {
      lines.push_back("No.");
      lines.push_back("Go to next stage.");
    }
  };

  for (const auto& e : t.events) {
    switch (e.action) {
      case SolveAction::propose:
        before = state;
        last_blank = *e.blank;
        pending_anchor = anchor_constraint(p, *e.blank, state);
        break;
      case SolveAction::fill:
        state[*e.blank] = e.candidate;
        break;
      case SolveAction::verify_pass:
        attempt(e, std::nullopt);
        break;
      case SolveAction::verify_fail: {
        if (!e.blank) {
          lines.push_back("Stage 1 - verify filled constraints:");
          lines.push_back("Does any error occur in filled remaining constraints?");
          if (e.violated) lines.push_back(format_triple(*e.violated) + " is incorrect.");
          break;
        }
        const auto anchor = as_triple(ground(q.constraints[*pending_anchor], values_of(p, state)));
        const bool anchor_failed = anchor && e.violated && *anchor == *e.violated;
        if (!anchor_failed) attempt(e, e.violated);
        state[*e.blank].reset();
        break;
      }
      case SolveAction::backtrack: {
        const std::size_t n = e.stage;
        status(n, state);
        lines.push_back("Stage " + std::to_string(n) + " - solve:");
        const auto anchor = anchor_constraint(p, last_blank, state);
        lines.push_back("From " + format_constraint(ground(q.constraints[anchor], values_of(p, state))) +
                        ", candidate for " + blank_label(last_blank) +
                        ": None of the given candidates satisfies the constraint.");
        if (e.blank) {
          lines.push_back("There is error in current answer. Go back to previous stage: stage " +
                          std::to_string(n - 1) + ".");
          state[*e.blank].reset();
          last_blank = *e.blank;
        } else {
          lines.push_back("There is error in current answer. No previous stage to go back to.");
        }
        break;
      }
    }
  }

  if (t.final) {
    const std::size_t n = q.blank_count() + 1;
    status(n, as_optional(*t.final));
    lines.push_back("Stage " + std::to_string(n) + " - solve:");
    lines.push_back("No more remaining constraints with blank.");
  }
  lines.push_back("Final answer: " + final_answer(t.final));
  return join(lines, "\n");
}

std::string render_verify_all(const Problem& p, const SolveTranscript& t, std::size_t retries) {
  struct Trial {
    std::vector<std::size_t> combo;
    std::optional<Triple> violated;
    bool passed = false;
  };
  std::vector<Trial> trials;
  for (const auto& e : t.events) {
    switch (e.action) {
      case SolveAction::propose: trials.emplace_back(); break;
      case SolveAction::fill: trials.back().combo.push_back(*e.candidate); break;
      case SolveAction::verify_pass: trials.back().passed = true; break;
      case SolveAction::verify_fail: trials.back().violated = e.violated; break;
      case SolveAction::backtrack: break;
    }
  }
  std::size_t failed_total = trials.size() - (t.final ? 1 : 0);
  std::size_t skip = failed_total > retries ? failed_total - retries : 0;

  std::vector<std::string> lines;
  for (std::size_t k = skip; k < trials.size(); ++k) {
    const auto& tr = trials[k];
    std::vector<std::string> picks, filled;
    for (std::size_t b = 0; b < tr.combo.size(); ++b) {
      picks.push_back(blank_label(b) + ": " + option_text(p, b, tr.combo[b]));
    }
    const auto values = values_of(p, as_optional(tr.combo));
    for (const auto& c : p.question.constraints) filled.push_back(format_constraint(ground(c, values)));
    lines.push_back("Candidate answer: " + join(picks, ", ") + ";");
    lines.push_back("Filled constraints with candidate answer: " + join(filled, "; ") + ";");
    lines.push_back("Verification: Does error occur in filled constraints with candidate answer?");
    if (tr.passed) {
      lines.push_back("No.");
    } else {
      lines.push_back(tr.violated ? format_triple(*tr.violated) + " is incorrect." : "Yes.");
    }
  }
  lines.push_back("Therefore, " + final_answer(t.final) + ".");
  return join(lines, "\n");
}

}  // namespace kc
