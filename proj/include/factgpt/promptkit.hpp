#pragma once

#include <string>
#include <string_view>

#include "factgpt/domain.hpp"

namespace factgpt {

struct PromptMessages {
  std::string system;
  std::string user;

  friend bool operator==(const PromptMessages&, const PromptMessages&) = default;
};

// Fixed system block for the three-way entailment question (LF line endings,
// no trailing newline).
std::string_view entailment_system_prompt() noexcept;

// The clause that follows "if TWEET is true, " for each target label.
std::string_view generation_clause(Label target) noexcept;

// Throws Error{EmptyInput} on a blank claim.
PromptMessages build_generation_prompt(std::string_view claim_text, Label target);

// Throws Error{EmptyInput} when either text is blank. Texts are inserted
// verbatim.
PromptMessages build_entailment_prompt(std::string_view tweet_text, std::string_view claim_text);

}  // namespace factgpt
