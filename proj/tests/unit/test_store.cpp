#include <doctest.h>

#include <thread>

#include "../support/test_support.hpp"
#include "factgpt/store.hpp"

using namespace factgpt;

namespace {

Adjudication adjudication(std::string pair, Decision d, Label l, std::string reviewer = "r1") {
  return {std::move(pair), d, l, std::move(reviewer), Label::Neutral, "2024-01-01T00:00:00Z"};
}

}  // namespace

TEST_CASE("store persists and reloads every record type") {
  testing::TempDir dir("store");
  const std::vector<Claim> claims{{"c1", "claim one", std::nullopt, std::nullopt},
                                  {"c2", "claim two", "snopes", Date::parse("2021-03-04")}};
  const std::vector<Post> posts{{"p1", "a post", std::nullopt, std::nullopt}};
  const std::vector<PairCandidate> pairs{{"pair-1", "p1", "c1", 0.5, 0.25, 0.4}};
  {
    Store store(dir.path());
    CHECK(store.upsert_claims(claims).ingested == 2);
    const auto again = store.upsert_claims(claims);
    CHECK(again.ingested == 0);
    CHECK(again.skipped_duplicates == 2);
    store.upsert_posts(posts);
    store.upsert_pairs(pairs);
    store.put_predictions(std::vector<Prediction>{{"pair-1", "m", Label::Neutral, "NEUTRAL", false}});
    store.put_predictions(std::vector<Prediction>{{"pair-1", "m", Label::Entailment, "ENTAILMENT", false}});
    store.append_adjudication(adjudication("pair-1", Decision::Confirm, Label::Entailment));
    store.append_adjudication(adjudication("pair-1", Decision::Override, Label::Contradiction, "r2"));
    EvalReport report;
    report.accuracy = 0.5;
    store.persist_report({report, OrderedJson{{"models", {"m"}}}});
  }
  Store reloaded(dir.path());
  CHECK(reloaded.claims() == claims);
  CHECK(reloaded.post("p1") == posts[0]);
  CHECK(reloaded.pairs() == pairs);
  CHECK(reloaded.prediction("pair-1")->label == Label::Entailment);
  CHECK(reloaded.predictions().size() == 1);
  const auto history = reloaded.adjudications("pair-1");
  REQUIRE(history.size() == 2);
  CHECK(history[0].decision == Decision::Confirm);
  CHECK(history[1].reviewer == "r2");
  CHECK(reloaded.latest_adjudication("pair-1")->label == Label::Contradiction);
  const auto gold = reloaded.adjudicated_gold();
  REQUIRE(gold.size() == 1);
  CHECK(gold[0] == GoldLabel{"pair-1", Decided{Label::Contradiction}});
  REQUIRE(reloaded.latest_report().has_value());
  CHECK(reloaded.latest_report()->report.accuracy == 0.5);
  CHECK(reloaded.latest_report()->manifest["models"][0] == "m");
  CHECK_FALSE(reloaded.claim("nope").has_value());
}

TEST_CASE("in-memory store writes nothing") {
  Store store;
  store.upsert_claims(std::vector<Claim>{{"c", "t", std::nullopt, std::nullopt}});
  CHECK(store.claims().size() == 1);
  CHECK(store.dir().empty());
}

TEST_CASE("adjudication JSON") {
  const auto a = adjudication("p", Decision::Override, Label::Neutral);
  Adjudication back;
  from_json_value(Json::parse(to_json_value(a).dump()), back);
  CHECK(back == a);
  CHECK_THROWS_AS(from_json_value(Json::parse(R"({"pair_id":"p","decision":"maybe","label":"NEUTRAL",
                                                  "reviewer":"r"})"),
                                  back),
                  Error);
}

TEST_CASE("concurrent appends are all kept") {
  testing::TempDir dir("store-concurrent");
  {
    Store store(dir.path());
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 25; ++i) {
          store.append_adjudication(adjudication("pair-" + std::to_string(i), Decision::Confirm, Label::Neutral,
                                                 "r" + std::to_string(t)));
        }
      });
    }
    for (auto& t : threads) t.join();
  }
  Store reloaded(dir.path());
  std::size_t total = 0;
  for (int i = 0; i < 25; ++i) total += reloaded.adjudications("pair-" + std::to_string(i)).size();
  CHECK(total == 200);
}
