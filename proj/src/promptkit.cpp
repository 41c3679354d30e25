#include "factgpt/promptkit.hpp"

namespace factgpt {

namespace {

constexpr std::string_view kEntailmentSystem =
    "Which of the following best describes the relationship between TWEET and CLAIM?\n"
    "You must choose from ENTAILMENT, NEUTRAL, or CONTRADICTION.\n"
    "\n"
    "If TWEET is true:\n"
    "(ENTAILMENT) then CLAIM is also true.\n"
    "(NEUTRAL) CLAIM cannot be said to be true or false.\n"
    "(CONTRADICTION) then CLAIM is false.";

constexpr std::string_view kGenerationHead = "Generate TWEET so that if TWEET is true, ";
constexpr std::string_view kGenerationTail = ". Be brief. Do not start a sentence with 'Just'.";

}  // namespace

std::string_view entailment_system_prompt() noexcept { return kEntailmentSystem; }

std::string_view generation_clause(Label target) noexcept {
  switch (target) {
    case Label::Entailment: return "then CLAIM is also true";
    case Label::Neutral: return "CLAIM cannot be said to be true or false";
    case Label::Contradiction: return "then CLAIM is false";
  }
  return "";
}

PromptMessages build_generation_prompt(std::string_view claim_text, Label target) {
  if (is_blank(claim_text)) throw Error(ErrorCode::EmptyInput, "claim text is empty");
  PromptMessages m;
  m.system.reserve(kGenerationHead.size() + 48 + kGenerationTail.size());
  m.system += kGenerationHead;
  m.system += generation_clause(target);
  m.system += kGenerationTail;
  m.user = std::string(claim_text);
  return m;
}

PromptMessages build_entailment_prompt(std::string_view tweet_text, std::string_view claim_text) {
  if (is_blank(tweet_text)) throw Error(ErrorCode::EmptyInput, "tweet text is empty");
  if (is_blank(claim_text)) throw Error(ErrorCode::EmptyInput, "claim text is empty");
  PromptMessages m;
  m.system = std::string(kEntailmentSystem);
  m.user.reserve(tweet_text.size() + claim_text.size() + 16);
  m.user += "TWEET: ";
  m.user += tweet_text;
  m.user += "\nCLAIM: ";
  m.user += claim_text;
  return m;
}

}  // namespace factgpt
