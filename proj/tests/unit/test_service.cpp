#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "../support/test_support.hpp"
#include "factgpt/io.hpp"
#include "factgpt/hashing.hpp"
#include "factgpt/service.hpp"

using namespace factgpt;
using testing::ScriptedTransport;

namespace {

const char* kClaims = R"([
  {"id":"c-bt","text":"Vaccinated people emit Bluetooth signals."},
  {"id":"c-5g","text":"5G towers spread the coronavirus."},
  {"id":"c-mask","text":"Face masks cause oxygen deprivation."}
])";

ServiceConfig base_config(const std::filesystem::path& store_dir = {}) {
  ServiceConfig c;
  c.store_dir = store_dir;
  c.classify_model = "mock";
  return c;
}

Service make_service(const std::filesystem::path& store_dir = {}) {
  return Service(base_config(store_dir), Gateway::create(GatewayOptions{}), fixed_clock_source("2024-05-01T00:00:00Z"));
}

struct Client {
  Service& service;

  std::pair<int, Json> call(const std::string& method, const std::string& path, const std::string& body = "",
                            std::map<std::string, std::string> query = {}) {
    const auto r = service.handle({method, path, std::move(query), body});
    if (r.content_type != "application/json") return {r.status, Json(r.body)};
    return {r.status, r.body.empty() ? Json() : Json::parse(r.body)};
  }
  Json ok(const std::string& method, const std::string& path, const std::string& body = "",
          std::map<std::string, std::string> query = {}) {
    auto [status, json] = call(method, path, body, std::move(query));
    CHECK_MESSAGE(status < 300, json.dump());
    return json;
  }
};

Json body(std::initializer_list<std::pair<const std::string, Json>> items) { return Json(Json::object_t(items)); }

// Enqueues a pair whose mock prediction is forced by a sentinel.
std::string enqueue(Client& c, const std::string& text, const std::string& claim_id) {
  const auto item = c.ok("POST", "/v1/review/enqueue", body({{"post_text", text}, {"claim_id", claim_id}}).dump());
  return item["pair"]["pair_id"].get<std::string>();
}

}  // namespace

TEST_CASE("claims ingest is idempotent and reports per-index errors") {
  auto service = make_service();
  Client c{service};
  CHECK(c.ok("POST", "/v1/claims", kClaims) == Json::parse(R"({"ingested":3,"skipped_duplicates":0})"));
  CHECK(c.ok("POST", "/v1/claims", kClaims) == Json::parse(R"({"ingested":0,"skipped_duplicates":3})"));
  CHECK(c.ok("GET", "/v1/claims")["claims"].size() == 3);

  auto [status, err] = c.call("POST", "/v1/claims", R"([{"id":"a","text":"ok"},{"id":"b"},7])");
  CHECK(status == 400);
  CHECK(err["code"] == "schema_violation");
  REQUIRE(err["detail"]["errors"].size() == 2);
  CHECK(err["detail"]["errors"][0]["index"] == 1);
  CHECK(err["detail"]["errors"][1]["index"] == 2);
  CHECK(c.ok("GET", "/v1/claims")["claims"].size() == 3);  // nothing from a rejected batch

  CHECK(c.call("POST", "/v1/claims", "{}").first == 400);
}

TEST_CASE("match ranks candidates and classifies on request") {
  auto service = make_service();
  Client c{service};
  CHECK(c.call("POST", "/v1/match", R"({"post_text":"hello"})").first == 409);
  c.ok("POST", "/v1/claims", kClaims);

  const auto plain = c.ok("POST", "/v1/match",
                          body({{"post_text", "omg my dad got vaccinated and I connected him to bluetooth"},
                                {"top_k", 3}})
                              .dump());
  REQUIRE(plain["candidates"].size() == 3);
  CHECK(plain["candidates"][0]["claim"]["id"] == "c-bt");
  CHECK_FALSE(plain["candidates"][0].contains("label"));
  for (std::size_t i = 1; i < 3; ++i) {
    CHECK(plain["candidates"][i - 1]["combined_score"].get<double>() >=
          plain["candidates"][i]["combined_score"].get<double>());
  }

  const auto labeled =
      c.ok("POST", "/v1/match", body({{"post_text", "bluetooth vaccine [[NEUTRAL]]"}, {"classify", true}}).dump());
  REQUIRE(labeled["candidates"].size() == 1);
  CHECK(labeled["candidates"][0]["label"] == "NEUTRAL");

  CHECK(c.call("POST", "/v1/match", R"({"post_text":"  "})").first == 400);
  CHECK(c.call("POST", "/v1/match", R"({"post_text":"x","top_k":0})").first == 400);
  CHECK(c.call("POST", "/v1/match", "not json").first == 400);
}

TEST_CASE("match returns candidates with a 502 when the provider fails") {
  auto transport = std::make_shared<ScriptedTransport>();
  transport->set_handler([](const HttpRequest&) { return HttpResponse{503, "down"}; });
  auto options = testing::fast_options();
  options.max_retries = 0;
  auto gw = std::make_shared<Gateway>(options, transport);
  Service service(base_config(), gw);
  Client c{service};
  c.ok("POST", "/v1/claims", kClaims);
  auto [status, out] = c.call("POST", "/v1/match", R"({"post_text":"vaccine bluetooth","classify":true,"top_k":2})");
  CHECK(status == 502);
  CHECK(out["code"] == "provider_error");
  REQUIRE(out["candidates"].size() == 2);
  CHECK(out["candidates"][0]["label"].is_null());
}

TEST_CASE("review queue, adjudication and conflicts") {
  testing::TempDir dir("service");
  auto service = make_service(dir.path());
  Client c{service};
  c.ok("POST", "/v1/claims", kClaims);
  const auto p1 = enqueue(c, "my vaccine made my phone pair over bluetooth [[ENTAILMENT]]", "c-bt");
  const auto p2 = enqueue(c, "5g masts are fine honestly [[CONTRADICTION]]", "c-5g");
  const auto p3 = enqueue(c, "wearing a mask at the shop today [[NEUTRAL]]", "c-mask");
  // Enqueuing again returns the existing item.
  CHECK(c.call("POST", "/v1/review/enqueue",
               body({{"post_text", "my vaccine made my phone pair over bluetooth [[ENTAILMENT]]"}, {"claim_id", "c-bt"}})
                   .dump())
            .first == 200);
  CHECK(c.call("POST", "/v1/review/enqueue", R"({"post_text":"x","claim_id":"missing"})").first == 404);

  auto queue = c.ok("GET", "/v1/review/queue");
  CHECK(queue["total"] == 3);
  CHECK(queue["next_cursor"].is_null());
  const auto& first = queue["items"][0];
  for (const char* key : {"pair", "post", "claim", "prediction", "scores", "status", "decisions"}) {
    CHECK(first.contains(key));
  }
  for (std::size_t i = 1; i < queue["items"].size(); ++i) {
    CHECK(queue["items"][i - 1]["scores"]["combined_score"].get<double>() >=
          queue["items"][i]["scores"]["combined_score"].get<double>());
  }

  SUBCASE("pagination") {
    const auto page1 = c.ok("GET", "/v1/review/queue", "", {{"limit", "2"}});
    REQUIRE(page1["items"].size() == 2);
    CHECK(page1["next_cursor"] == "2");
    const auto page2 = c.ok("GET", "/v1/review/queue", "", {{"limit", "2"}, {"cursor", "2"}});
    CHECK(page2["items"].size() == 1);
    CHECK(page2["next_cursor"].is_null());
    CHECK(c.call("GET", "/v1/review/queue", "", {{"limit", "0"}}).first == 400);
    CHECK(c.call("GET", "/v1/review/queue", "", {{"limit", "501"}}).first == 400);
    CHECK(c.call("GET", "/v1/review/queue", "", {{"status", "weird"}}).first == 400);
    const auto recent = c.ok("GET", "/v1/review/queue", "", {{"sort", "recency"}});
    CHECK(recent["items"][0]["pair"]["pair_id"] == p3);
    CHECK(c.call("GET", "/v1/review/queue", "", {{"sort", "alphabetical"}}).first == 400);
  }

  SUBCASE("confirm, override and the conflict rule") {
    auto confirmed = c.ok("POST", "/v1/review/" + p1, R"({"decision":"confirm","reviewer":"ana"})");
    CHECK(confirmed["status"] == "confirmed");
    CHECK(confirmed["decisions"][0]["label"] == "ENTAILMENT");
    CHECK(confirmed["decisions"][0]["at"] == "2024-05-01T00:00:00Z");

    auto [status, conflict] = c.call("POST", "/v1/review/" + p1, R"({"decision":"confirm","reviewer":"bo"})");
    CHECK(status == 409);
    CHECK(conflict["code"] == "conflict");

    auto forced =
        c.ok("POST", "/v1/review/" + p1, R"({"decision":"override","label":"NEUTRAL","reviewer":"bo","force":true})");
    CHECK(forced["status"] == "overridden");
    CHECK(forced["decisions"].size() == 2);

    CHECK(c.call("POST", "/v1/review/" + p2, R"({"decision":"override","reviewer":"ana"})").first == 400);
    CHECK(c.call("POST", "/v1/review/" + p2, R"({"decision":"override","label":"maybe","reviewer":"ana"})").first ==
          400);
    CHECK(c.call("POST", "/v1/review/" + p2, R"({"decision":"confirm"})").first == 400);
    CHECK(c.call("POST", "/v1/review/nope", R"({"decision":"confirm","reviewer":"ana"})").first == 404);
    c.ok("POST", "/v1/review/" + p2, R"({"decision":"override","label":"NEUTRAL","reviewer":"ana"})");

    CHECK(c.ok("GET", "/v1/review/queue")["total"] == 1);
    CHECK(c.ok("GET", "/v1/review/queue", "", {{"status", "overridden"}})["total"] == 2);
    CHECK(c.ok("GET", "/v1/review/queue", "", {{"status", "all"}})["total"] == 3);

    const auto gold = service.handle({"GET", "/v1/review/gold", {}, ""});
    CHECK(gold.content_type == "application/x-ndjson");
    const auto decoded = decode_records<GoldLabel>(gold.body);
    REQUIRE(decoded.ok());
    CHECK(decoded.records.size() == 2);

    SUBCASE("evaluation over adjudicated pairs") {
      CHECK(c.call("GET", "/v1/reports/latest").first == 404);
      const auto eval = c.ok("POST", "/v1/evaluate", "");
      // p1: predicted ENTAILMENT, gold NEUTRAL; p2: predicted CONTRADICTION, gold NEUTRAL.
      CHECK(eval["report"]["n_scored"] == 2);
      CHECK(eval["report"]["accuracy"] == 0.0);
      CHECK(eval["manifest"]["models"] == Json::array({"mock"}));
      CHECK(eval["manifest"]["n_gold"] == 2);
      CHECK(eval["manifest"]["gold_sha256"] == sha256_hex(gold.body));
      CHECK(c.ok("GET", "/v1/reports/latest") == eval);
      CHECK(c.call("POST", "/v1/evaluate", R"({"ties":"sometimes"})").first == 400);

      // Everything survives a restart.
      Service reopened(base_config(dir.path()), Gateway::create(GatewayOptions{}));
      Client r{reopened};
      CHECK(r.ok("GET", "/v1/reports/latest") == eval);
      CHECK(r.ok("GET", "/v1/review/queue", "", {{"status", "all"}})["total"] == 3);
    }
  }

  SUBCASE("a pair without a model label can only be overridden") {
    const auto item = c.ok("POST", "/v1/review/enqueue",
                           R"({"post_text":"no model for this one","claim_id":"c-mask","classify":false})");
    const auto id = item["pair"]["pair_id"].get<std::string>();
    CHECK(item["prediction"].is_null());
    CHECK(c.call("POST", "/v1/review/" + id, R"({"decision":"confirm","reviewer":"ana"})").first == 400);
  }
}

TEST_CASE("concurrent submissions produce exactly one winner") {
  auto service = make_service();
  Client c{service};
  c.ok("POST", "/v1/claims", kClaims);
  const auto id = enqueue(c, "bluetooth shots [[NEUTRAL]]", "c-bt");
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      const auto r = service.handle({"POST", "/v1/review/" + id, {},
                                     R"({"decision":"confirm","reviewer":"r)" + std::to_string(t) + R"("})"});
      if (r.status == 200) ++ok;
      if (r.status == 409) ++conflict;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 1);
  CHECK(conflict == 7);
  CHECK(service.store().adjudications(id).size() == 1);
}

TEST_CASE("routing, ui-config and health") {
  auto service = make_service();
  Client c{service};
  CHECK(c.ok("GET", "/healthz")["status"] == "ok");
  CHECK(c.call("GET", "/v1/nothing").first == 404);
  CHECK(c.call("DELETE", "/v1/claims").first == 405);
  CHECK(c.call("GET", "/v1/match").first == 405);
  CHECK(service.handle({"OPTIONS", "/v1/match", {}, ""}).status == 204);

  const auto ui = c.ok("GET", "/v1/ui-config");
  CHECK(ui["api_base"] == "/v1");
  CHECK(ui["labels"] == Json::array({"ENTAILMENT", "NEUTRAL", "CONTRADICTION"}));
  CHECK(ui["legend"]["header"] == "If TWEET is true:");
  CHECK(ui["legend"]["ENTAILMENT"] == "then CLAIM is also true.");
  CHECK(ui["legend"]["NEUTRAL"] == "CLAIM cannot be said to be true or false.");
  CHECK(ui["legend"]["CONTRADICTION"] == "then CLAIM is false.");
  CHECK(ui["classify_model"] == "mock");
  CHECK(ui["matcher"]["top_k"] == 1);
}

TEST_CASE("service config merges flat and nested keys") {
  ServiceConfig c;
  c.merge_json(Json::parse(R"({"port":9000,"store_dir":"/tmp/x","classify_model":"m",
                              "matcher":{"alpha":0.2,"top_k":4}})"));
  CHECK(c.port == 9000);
  CHECK(c.store_dir == "/tmp/x");
  CHECK(c.classify_model == "m");
  CHECK(c.matcher.alpha == 0.2);
  CHECK(c.matcher.top_k == 4);
}

TEST_CASE("served over HTTP with CORS and static assets") {
  testing::TempDir ui("ui");
  write_file_atomic(ui / "index.html", "<!doctype html><title>review</title>");
  auto config = base_config();
  config.port = 0;
  config.ui_dir = ui.path();
  config.cors_origin = "http://localhost:5173";
  Service service(config, Gateway::create(GatewayOptions{}));
  std::thread thread([&] { service.listen(); });
  for (int i = 0; i < 500 && service.bound_port() == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  REQUIRE(service.bound_port() > 0);

  httplib::Client http("127.0.0.1", service.bound_port());
  auto posted = http.Post("/v1/claims", kClaims, "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 200);
  CHECK(posted->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");

  auto match = http.Post("/v1/match", R"({"post_text":"bluetooth vaccine chip [[CONTRADICTION]]","classify":true})",
                         "application/json");
  REQUIRE(match);
  CHECK(match->status == 200);
  CHECK(Json::parse(match->body)["candidates"][0]["label"] == "CONTRADICTION");

  auto queue = http.Get("/v1/review/queue?status=all&limit=5");
  REQUIRE(queue);
  CHECK(queue->status == 200);

  auto preflight = http.Options("/v1/review/abc");
  REQUIRE(preflight);
  CHECK(preflight->status == 204);
  CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  auto page = http.Get("/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body.find("review") != std::string::npos);
  auto root = http.Get("/");
  REQUIRE(root);
  CHECK(root->status == 200);

  service.stop();
  thread.join();
}
