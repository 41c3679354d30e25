#include "factgpt/finetune_record.hpp"

namespace factgpt {

namespace {

[[noreturn]] void violation(const std::string& message) {
  throw Error(ErrorCode::SchemaViolation, message);
}

const std::string& message_content(const Json& msg, std::string_view role) {
  if (!msg.is_object()) violation("each message must be an object");
  auto r = msg.find("role");
  auto c = msg.find("content");
  if (r == msg.end() || !r->is_string() || r->get_ref<const std::string&>() != role) {
    violation("expected a \"" + std::string(role) + "\" message");
  }
  if (c == msg.end() || !c->is_string()) violation("message content must be a string");
  const auto& content = c->get_ref<const std::string&>();
  if (is_blank(content)) violation("message content must be non-empty");
  return content;
}

}  // namespace

OrderedJson to_json_value(const FineTuneRecord& r) {
  auto message = [](const char* role, std::string_view content) {
    OrderedJson m;
    m["role"] = role;
    m["content"] = content;
    return m;
  };
  OrderedJson j;
  j["messages"] = OrderedJson::array({message("system", r.system), message("user", r.user),
                                      message("assistant", label_token(r.assistant))});
  return j;
}

void from_json_value(const Json& j, FineTuneRecord& out) {
  auto it = j.find("messages");
  if (it == j.end() || !it->is_array() || it->size() != 3) {
    violation("\"messages\" must be an array of system, user and assistant messages");
  }
  out.system = message_content((*it)[0], "system");
  out.user = message_content((*it)[1], "user");
  const auto& answer = message_content((*it)[2], "assistant");
  auto label = label_from_token(answer);
  if (!label) violation("assistant content must be a label token, got \"" + answer + "\"");
  out.assistant = *label;
}

void validate_finetune_jsonl(std::string_view text) {
  auto records = decode_records_strict<FineTuneRecord>(text, "training file");
  if (records.empty()) throw Error(ErrorCode::ValidationError, "training file holds no records");
}

}  // namespace factgpt
