#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kc {

enum class Tier { easy, medium, hard };

std::string_view to_string(Tier tier);
// Throws ParseError on anything but easy/medium/hard.
Tier parse_tier(std::string_view text);

// Per-blank multiple-choice lists. gold_index is empty for none-of-the-above
// problems.
struct OptionAssignment {
  std::vector<std::vector<std::string>> per_blank;
  std::vector<std::size_t> gold_index;
  Tier tier = Tier::easy;
  bool nota = false;

  std::size_t blank_count() const { return per_blank.size(); }
  std::size_t options_per_blank() const { return per_blank.empty() ? 0 : per_blank.front().size(); }

  friend bool operator==(const OptionAssignment&, const OptionAssignment&) = default;
};

// 'A' for 0.
inline char option_letter(std::size_t index) { return static_cast<char>('A' + index); }

}  // namespace kc
