#pragma once
// Prompt text for the multiple-choice crossword format, exemplar answer
// bodies derived from oracle transcripts, and exemplar selection.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kc/csp_solver.hpp"
#include "kc/kg_store.hpp"
#include "kc/problem_io.hpp"

namespace kc {

// upperbound shows the gold-filled constraints as the knowledge block.
enum class Setting { with_knowledge, without_knowledge, upperbound };
enum class Style { zero_shot, few_shot, cot, cot_sc, ltm, staged, verify_all };
enum class ExemplarMix { easy, medium, hard, mixed };

std::string_view to_string(Setting s);
std::string_view to_string(Style s);
std::string_view to_string(ExemplarMix m);
// Accept the to_string spellings plus short forms ("with", "without").
Setting parse_setting(std::string_view text);
Style parse_style(std::string_view text);
ExemplarMix parse_mix(std::string_view text);

inline constexpr std::string_view kInstruction =
    "Instruction: Pick the correct answer for each blank that satisfies all the given constraints.";
inline constexpr std::string_view kNotaInstruction =
    "Output 'none of the above' if none of the option combinations satisfy all the constraints.";

struct PromptConfig {
  Setting setting = Setting::with_knowledge;
  Style style = Style::zero_shot;
  std::size_t exemplar_count = 5;
  ExemplarMix exemplar_mix = ExemplarMix::mixed;
  bool nota_instruction = false;
  // Rejected combinations shown before the accepted one in verify-all bodies.
  std::size_t verify_all_retries = 1;

  // Zero for zero-shot, exemplar_count otherwise.
  std::size_t exemplars_needed() const;
};

struct Exemplar {
  Problem problem;
  Style style = Style::few_shot;
  std::string body;  // text after "Answer:"
};

// Graph holding the gold-filled constraints plus the knowledge passage; what
// an exemplar author (or the oracle responder) is assumed to know when no
// full KG is at hand.
KnowledgeGraph gold_knowledge(const Problem& p);

// Answer body in the given style. Solver-backed styles verify against
// `verifier`, or against gold_knowledge(p) when it is null.
std::string answer_body(const Problem& p, Style style, const KnowledgeGraph* verifier = nullptr,
                        std::size_t verify_all_retries = 1);

Exemplar make_exemplar(const Problem& p, Style style, const KnowledgeGraph* verifier = nullptr,
                       std::size_t verify_all_retries = 1);

// Renders the question block of `p` alone, without "Answer:".
std::string render_question(const Problem& p, Setting setting, bool with_format_line, bool nota_instruction);

// Exemplar blocks, then the target block ending in "Answer:". Throws
// RenderError when an exemplar's style differs from cfg.style (cot exemplars
// serve cot-sc), when the target is among the exemplars, or when zero-shot is
// given exemplars.
std::string render_prompt(const Problem& p, const PromptConfig& cfg, std::span<const Exemplar> exemplars);

// Deterministic draw from `pool` (none-of-the-above problems are skipped).
// mixed takes 40% easy, 40% medium and the rest hard (2/2/1 for five).
// Throws InfeasibleError when a tier runs short.
std::vector<Problem> assemble_exemplars(std::span<const Problem> pool, std::size_t count, ExemplarMix mix,
                                        std::uint64_t seed);

// Staged and verify-all layouts of a transcript.
std::string render_staged(const Problem& p, const SolveTranscript& t);
std::string render_verify_all(const Problem& p, const SolveTranscript& t, std::size_t retries);

}  // namespace kc
