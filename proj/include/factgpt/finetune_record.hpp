#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "factgpt/domain.hpp"

namespace factgpt {

// One chat-format training example: the entailment prompt plus the label the
// model should answer with.
struct FineTuneRecord {
  std::string system;
  std::string user;
  Label assistant = Label::Entailment;

  friend bool operator==(const FineTuneRecord&, const FineTuneRecord&) = default;
};

// {"messages":[{"role":"system",...},{"role":"user",...},{"role":"assistant",...}]}
OrderedJson to_json_value(const FineTuneRecord& r);
void from_json_value(const Json& j, FineTuneRecord& out);

// Throws Error{ValidationError} naming the first offending line. An input with
// no records is rejected as well.
void validate_finetune_jsonl(std::string_view text);

}  // namespace factgpt
