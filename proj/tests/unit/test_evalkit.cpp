#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "factgpt/evalkit.hpp"

using namespace factgpt;

namespace {

constexpr Label E = Label::Entailment, N = Label::Neutral, C = Label::Contradiction;

std::vector<GoldLabel> decided_gold(std::initializer_list<Label> labels) {
  std::vector<GoldLabel> out;
  int i = 0;
  for (Label l : labels) out.push_back({"p" + std::to_string(i++), Decided{l}});
  return out;
}

std::vector<Prediction> preds(std::initializer_list<std::optional<Label>> labels) {
  std::vector<Prediction> out;
  int i = 0;
  for (auto l : labels) out.push_back({"p" + std::to_string(i++), "m", l, l ? std::string(label_token(*l)) : "?", false});
  return out;
}

}  // namespace

TEST_CASE("worked example: one entailment predicted neutral") {
  const auto r = evaluate(decided_gold({E, E, N, C}), preds({E, N, N, C}));
  CHECK(r.per_class[0].precision == doctest::Approx(1.0));
  CHECK(r.per_class[0].recall == doctest::Approx(0.5));
  CHECK(r.per_class[0].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[1].precision == doctest::Approx(0.5));
  CHECK(r.per_class[1].recall == doctest::Approx(1.0));
  CHECK(r.per_class[1].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[2].f1 == doctest::Approx(1.0));
  CHECK(r.macro_precision == doctest::Approx(2.5 / 3.0));
  CHECK(r.macro_recall == doctest::Approx(2.5 / 3.0));
  CHECK(r.accuracy == doctest::Approx(0.75));
  CHECK(r.n_scored == 4);
  CHECK(format_metric(r.per_class[0].f1) == ".67");
  CHECK(format_metric(r.macro_precision) == ".83");
  CHECK(format_metric(r.accuracy) == ".75");
}

TEST_CASE("metric formatting") {
  CHECK(format_metric(0.725) == ".73");
  CHECK(format_metric(0.0) == ".00");
  CHECK(format_metric(0.005) == ".01");
  CHECK(format_metric(0.994) == ".99");
  CHECK(format_metric(0.995) == "1.00");
  CHECK(format_metric(1.0) == "1.00");
  CHECK(format_metric(0.5) == ".50");
}

TEST_CASE("zero denominators give zero") {
  const auto r = evaluate(decided_gold({E, E}), preds({E, E}));
  CHECK(r.per_class[1].precision == 0.0);
  CHECK(r.per_class[1].recall == 0.0);
  CHECK(r.per_class[1].f1 == 0.0);
  CHECK(r.accuracy == 1.0);
  const auto empty = evaluate(std::vector<GoldLabel>{}, std::vector<Prediction>{});
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.n_scored == 0);
}

TEST_CASE("tie policies") {
  std::vector<GoldLabel> gold{{"p0", Decided{E}}, {"p1", Tie{{N, C}}}};
  const auto p = preds({E, C});
  SUBCASE("exclude") {
    const auto r = evaluate(gold, p, {TiePolicy::Exclude, UnparseablePolicy::CountWrong});
    CHECK(r.n_scored == 1);
    CHECK(r.n_excluded_ties == 1);
    CHECK(r.accuracy == 1.0);
  }
  SUBCASE("credit either tied label") {
    const auto r = evaluate(gold, p, {TiePolicy::CreditEither, UnparseablePolicy::CountWrong});
    CHECK(r.n_scored == 2);
    CHECK(r.n_excluded_ties == 0);
    CHECK(r.accuracy == 1.0);
    CHECK(r.per_class[2].recall == 1.0);
  }
  SUBCASE("a prediction outside the tie is wrong") {
    const auto r = evaluate(gold, preds({E, E}), {TiePolicy::CreditEither, UnparseablePolicy::CountWrong});
    CHECK(r.accuracy == doctest::Approx(0.5));
  }
}

TEST_CASE("unparseable policies") {
  const auto gold = decided_gold({E, N, C});
  const auto p = preds({E, std::nullopt, C});
  const auto wrong = evaluate(gold, p, {TiePolicy::Exclude, UnparseablePolicy::CountWrong});
  CHECK(wrong.n_scored == 3);
  CHECK(wrong.n_unparseable == 1);
  CHECK(wrong.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(wrong.per_class[1].recall == 0.0);
  // No precision credit or penalty for any label.
  CHECK(wrong.per_class[0].precision == 1.0);
  CHECK(wrong.per_class[2].precision == 1.0);

  const auto excluded = evaluate(gold, p, {TiePolicy::Exclude, UnparseablePolicy::Exclude});
  CHECK(excluded.n_scored == 2);
  CHECK(excluded.n_unparseable == 1);
  CHECK(excluded.accuracy == 1.0);
}

TEST_CASE("scoring errors") {
  const auto gold = decided_gold({E});
  try {
    evaluate(gold, preds({E, N}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingGold);
  }
  auto dup = preds({E});
  dup.push_back(dup.front());
  try {
    evaluate(gold, dup);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicatePrediction);
  }
}

TEST_CASE("metrics agree with the reference formulas on random data") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<GoldLabel> gold;
    std::vector<Prediction> pr;
    std::vector<int> g, p;
    for (std::size_t i = 0; i < n; ++i) {
      const int gl = static_cast<int>(rng() % 3);
      const int pl = rng() % 10 == 0 ? -1 : static_cast<int>(rng() % 3);
      g.push_back(gl);
      p.push_back(pl);
      gold.push_back({"p" + std::to_string(i), Decided{kAllLabels[gl]}});
      pr.push_back({"p" + std::to_string(i), "m", pl < 0 ? std::nullopt : std::optional<Label>(kAllLabels[pl]), "", false});
    }
    const auto want = oracle::metrics(g, p);
    const auto got = evaluate(gold, pr);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(got.per_class[k].precision - want.precision[k]) <= 1e-12);
      CHECK(std::abs(got.per_class[k].recall - want.recall[k]) <= 1e-12);
      CHECK(std::abs(got.per_class[k].f1 - want.f1[k]) <= 1e-12);
    }
    CHECK(std::abs(got.macro_precision - want.macro_precision) <= 1e-12);
    CHECK(std::abs(got.macro_recall - want.macro_recall) <= 1e-12);
    CHECK(std::abs(got.accuracy - want.accuracy) <= 1e-12);
    CHECK(got.macro_precision >= 0.0);
    CHECK(got.macro_precision <= 1.0);
  }
}

TEST_CASE("report JSON round trip") {
  const auto r = evaluate(decided_gold({E, E, N, C}), preds({E, N, N, C}));
  EvalReport back;
  from_json_value(Json::parse(to_json_value(r).dump()), back);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.per_class[1].f1 == r.per_class[1].f1);
  CHECK(back.n_scored == r.n_scored);
  CHECK_THROWS_AS(from_json_value(Json::parse("{\"accuracy\":1}"), back), Error);
}

TEST_CASE("rendered comparison tables") {
  const auto r = evaluate(decided_gold({E, E, N, C}), preds({E, N, N, C}));
  const std::vector<NamedReport> reports{{"gpt-4", "", r}, {"ft-gpt-3.5", "gpt-4", r}};
  const auto md = render_report(reports);
  CHECK(md.find("| Model | Train Set From | Precision | Recall | Accuracy |") != std::string::npos);
  CHECK(md.find("| gpt-4 | --- | .83 | .83 | .75 |") != std::string::npos);
  CHECK(md.find("| ft-gpt-3.5 | gpt-4 | .83 | .83 | .75 |") != std::string::npos);
  CHECK(md.find("| Model | Train Set From | F1 Ent | F1 Neu | F1 Con |") != std::string::npos);
  CHECK(md.find("| gpt-4 | --- | .67 | .67 | 1.00 |") != std::string::npos);
  CHECK(md.find("macro-averaged") != std::string::npos);
}
