#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "factgpt/factgpt.h"

using Json = nlohmann::json;

namespace {

// Takes ownership of a library string.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  factgpt_string_free(s);
  return out;
}

struct Context {
  factgpt_context* ctx = nullptr;
  explicit Context(const char* options = R"({"clock":"2024-01-01T00:00:00Z"})") {
    REQUIRE(factgpt_context_create(options, &ctx) == FACTGPT_OK);
  }
  ~Context() { factgpt_context_destroy(ctx); }
};

const char* kClaims =
    "{\"id\":\"c1\",\"text\":\"Vaccinated people emit Bluetooth signals.\"}\n"
    "{\"id\":\"c2\",\"text\":\"5G towers spread the coronavirus.\"}\n";

}  // namespace

TEST_CASE("library identity and status helpers") {
  CHECK(std::strcmp(factgpt_version(), "0.1.0") == 0);
  CHECK(std::strcmp(factgpt_status_name(FACTGPT_RATE_LIMITED), "RateLimited") == 0);
  CHECK(factgpt_is_provider_failure(FACTGPT_TIMEOUT));
  CHECK_FALSE(factgpt_is_provider_failure(FACTGPT_SCHEMA_VIOLATION));
  CHECK(take(factgpt_sha256_hex("abc", 3)) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  factgpt_string_free(nullptr);
}

TEST_CASE("errors land in the per-thread slot and leave outputs untouched") {
  char* out = reinterpret_cast<char*>(0x1);
  CHECK(factgpt_validate_jsonl("claims", "{\"text\":\"ok\"}\nnope\n", &out) == FACTGPT_VALIDATION_ERROR);
  CHECK(out == reinterpret_cast<char*>(0x1));
  CHECK(std::string(factgpt_last_error()).find("line 2") != std::string::npos);
  const auto err = Json::parse(take(factgpt_last_error_json()));
  CHECK(err["status"] == FACTGPT_VALIDATION_ERROR);
  CHECK(err["code"] == "ValidationError");

  char* report = nullptr;
  CHECK(factgpt_validate_jsonl("claims", kClaims, &report) == FACTGPT_OK);
  CHECK(Json::parse(take(report))["records"] == 2);
  CHECK(factgpt_validate_jsonl("nonsense", kClaims, &report) == FACTGPT_INVALID_ARGUMENT);
  CHECK(factgpt_validate_jsonl(nullptr, kClaims, &report) == FACTGPT_INVALID_ARGUMENT);
}

TEST_CASE("pair, generate, split, export and fine-tune through the C boundary") {
  Context c;
  const char* posts = "{\"id\":\"p1\",\"text\":\"got my shot and now I connect to bluetooth\"}\n";
  char* pairs = nullptr;
  REQUIRE(factgpt_pair(c.ctx, posts, kClaims, R"({"top_k":2})", &pairs) == FACTGPT_OK);
  const auto pairs_text = take(pairs);
  CHECK(std::count(pairs_text.begin(), pairs_text.end(), '\n') == 2);
  CHECK(pairs_text.find("\"claim_id\":\"c1\"") < pairs_text.find("\"claim_id\":\"c2\""));

  char *synthetic = nullptr, *summary = nullptr;
  REQUIRE(factgpt_generate(c.ctx, kClaims, R"({"model":"gen"})", &synthetic, &summary) == FACTGPT_OK);
  const auto synthetic_text = take(synthetic);
  CHECK(std::count(synthetic_text.begin(), synthetic_text.end(), '\n') == 6);
  CHECK(synthetic_text.find("2024-01-01T00:00:00Z") != std::string::npos);
  take(summary);

  char *train = nullptr, *validation = nullptr;
  REQUIRE(factgpt_split(synthetic_text.c_str(), R"({"seed":3})", &train, &validation) == FACTGPT_OK);
  const auto train_text = take(train);
  CHECK(std::count(train_text.begin(), train_text.end(), '\n') == 4);
  take(validation);

  char* finetune = nullptr;
  REQUIRE(factgpt_export_finetune(train_text.c_str(), kClaims, &finetune) == FACTGPT_OK);
  const auto finetune_text = take(finetune);

  char* job = nullptr;
  REQUIRE(factgpt_finetune_submit(c.ctx, finetune_text.c_str(), R"({"base_model":"base"})", &job) == FACTGPT_OK);
  const auto job_text = take(job);
  CHECK(Json::parse(job_text)["status"] == "queued");
  char* done = nullptr;
  REQUIRE(factgpt_finetune_wait(c.ctx, job_text.c_str(), R"({"poll_interval_ms":0})", &done) == FACTGPT_OK);
  const auto final_job = Json::parse(take(done));
  CHECK(final_job["status"] == "succeeded");
  CHECK(final_job["fine_tuned_model_id"].is_string());

  char* unknown = nullptr;
  CHECK(factgpt_finetune_poll(c.ctx, "nope", &unknown) == FACTGPT_UNKNOWN_JOB);
  CHECK(factgpt_finetune_submit(c.ctx, "{}\n", R"({"base_model":"base"})", &job) == FACTGPT_VALIDATION_ERROR);
}

TEST_CASE("classify, aggregate and evaluate") {
  Context c;
  const char* posts =
      "{\"id\":\"p1\",\"text\":\"bluetooth [[ENTAILMENT]]\"}\n"
      "{\"id\":\"p2\",\"text\":\"towers [[CONTRADICTION]]\"}\n";
  const char* pairs =
      "{\"pair_id\":\"a\",\"post_id\":\"p1\",\"claim_id\":\"c1\",\"token_score\":0,\"semantic_score\":0,"
      "\"combined_score\":0}\n"
      "{\"pair_id\":\"b\",\"post_id\":\"p2\",\"claim_id\":\"c2\",\"token_score\":0,\"semantic_score\":0,"
      "\"combined_score\":0}\n";
  char *preds = nullptr, *summary = nullptr;
  REQUIRE(factgpt_classify(c.ctx, pairs, posts, kClaims, R"({"model":"mock"})", &preds, &summary) == FACTGPT_OK);
  const auto preds_text = take(preds);
  const auto s = Json::parse(take(summary));
  CHECK(s["requested"] == 2);
  CHECK(s["errors"].empty());

  const char* votes =
      "{\"pair_id\":\"a\",\"votes\":[{\"annotator_id\":\"x\",\"label\":\"ENTAILMENT\"},"
      "{\"annotator_id\":\"y\",\"label\":\"ENTAILMENT\"}]}\n"
      "{\"pair_id\":\"b\",\"votes\":[{\"annotator_id\":\"x\",\"label\":\"NEUTRAL\"}]}\n";
  char *gold = nullptr, *md = nullptr;
  REQUIRE(factgpt_aggregate(votes, &gold, &md) == FACTGPT_OK);
  CHECK(take(md).find("| TOTAL | 2 | 100% |") != std::string::npos);
  const auto gold_text = take(gold);

  char* report = nullptr;
  REQUIRE(factgpt_evaluate(gold_text.c_str(), preds_text.c_str(), nullptr, &report) == FACTGPT_OK);
  const auto r = Json::parse(take(report));
  CHECK(r["accuracy"] == 0.5);
  CHECK(r["n_scored"] == 2);

  const auto reports = Json::array({{{"model", "mock"}, {"report", r}}}).dump();
  char* table = nullptr;
  REQUIRE(factgpt_render_report(reports.c_str(), &table) == FACTGPT_OK);
  CHECK(take(table).find("| mock | --- |") != std::string::npos);

  CHECK(factgpt_aggregate("{\"pair_id\":\"z\",\"votes\":[]}\n", &gold, nullptr) != FACTGPT_OK);
}

TEST_CASE("label parsing") {
  factgpt_label label = FACTGPT_LABEL_ENTAILMENT;
  int ambiguous = -1;
  CHECK(factgpt_parse_label("Neutral, maybe contradiction", &label, &ambiguous) == FACTGPT_OK);
  CHECK(label == FACTGPT_LABEL_NEUTRAL);
  CHECK(ambiguous == 1);
  CHECK(factgpt_parse_label("no idea", &label, &ambiguous) == FACTGPT_UNPARSEABLE);
  CHECK(label == FACTGPT_LABEL_NONE);
}

TEST_CASE("service routing without a socket") {
  Context c;
  factgpt_service* svc = nullptr;
  REQUIRE(factgpt_service_create(c.ctx, R"({"classify_model":"mock"})", &svc) == FACTGPT_OK);
  char* response = nullptr;
  REQUIRE(factgpt_service_handle(svc, "POST", "/v1/claims", nullptr, R"([{"id":"c","text":"t"}])", &response) ==
          FACTGPT_OK);
  auto r = Json::parse(take(response));
  CHECK(r["status"] == 200);
  CHECK(Json::parse(r["body"].get<std::string>())["ingested"] == 1);
  REQUIRE(factgpt_service_handle(svc, "GET", "/v1/review/queue", R"({"status":"all"})", nullptr, &response) ==
          FACTGPT_OK);
  r = Json::parse(take(response));
  CHECK(Json::parse(r["body"].get<std::string>())["total"] == 0);
  factgpt_service_destroy(svc);
}
