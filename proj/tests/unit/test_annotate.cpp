#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "factgpt/annotate.hpp"

using namespace factgpt;

namespace {

VoteSet votes_of(std::initializer_list<Label> labels) {
  VoteSet vs{"pair", {}};
  int n = 0;
  for (Label l : labels) vs.votes.push_back({"a" + std::to_string(n++), l});
  return vs;
}

constexpr Label E = Label::Entailment, N = Label::Neutral, C = Label::Contradiction;

}  // namespace

TEST_CASE("majority vote examples") {
  CHECK(aggregate_votes(votes_of({E, E, N})).outcome == std::variant<Decided, Tie>(Decided{E}));
  CHECK(aggregate_votes(votes_of({C})).outcome == std::variant<Decided, Tie>(Decided{C}));
  CHECK(aggregate_votes(votes_of({C, N})).outcome == std::variant<Decided, Tie>(Tie{{N, C}}));
  CHECK(aggregate_votes(votes_of({C, N, E})).outcome == std::variant<Decided, Tie>(Tie{{E, N, C}}));
  CHECK(aggregate_votes(votes_of({N, N, C, C, E})).outcome == std::variant<Decided, Tie>(Tie{{N, C}}));
  CHECK(aggregate_votes(votes_of({N, N, C, C, E})).pair_id == "pair");
  try {
    aggregate_votes(VoteSet{"empty", {}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyVotes);
  }
}

TEST_CASE("aggregation agrees with exhaustive enumeration of small vote sets") {
  // Every multiset of 1..5 votes, checked against the max-count oracle.
  for (int size = 1; size <= 5; ++size) {
    std::vector<int> v(static_cast<std::size_t>(size), 0);
    for (;;) {
      VoteSet vs{"p", {}};
      for (std::size_t i = 0; i < v.size(); ++i) vs.votes.push_back({"a" + std::to_string(i), kAllLabels[v[i]]});
      const auto want = oracle::winners(v);
      const auto got = aggregate_votes(vs);
      if (want.size() == 1) {
        REQUIRE_FALSE(got.is_tie());
        CHECK(label_index(std::get<Decided>(got.outcome).label) == static_cast<std::size_t>(want[0]));
      } else {
        REQUIRE(got.is_tie());
        const auto& labels = std::get<Tie>(got.outcome).labels;
        REQUIRE(labels.size() == want.size());
        for (std::size_t i = 0; i < labels.size(); ++i) CHECK(label_index(labels[i]) == static_cast<std::size_t>(want[i]));
      }
      // Vote order does not matter.
      std::reverse(vs.votes.begin(), vs.votes.end());
      CHECK(aggregate_votes(vs).outcome == got.outcome);
      std::size_t k = 0;
      while (k < v.size() && ++v[k] == 3) v[k++] = 0;
      if (k == v.size()) break;
    }
  }
}

TEST_CASE("percentages round half up to one decimal with exact arithmetic") {
  CHECK(format_percentage(647, 1225) == "52.8%");
  CHECK(format_percentage(433, 1225) == "35.3%");
  CHECK(format_percentage(90, 1225) == "7.3%");
  CHECK(format_percentage(55, 1225) == "4.5%");
  CHECK(format_percentage(1, 8) == "12.5%");
  CHECK(format_percentage(1, 16) == "6.3%");  // 6.25 rounds up
  CHECK(format_percentage(1, 3) == "33.3%");
  CHECK(format_percentage(2, 3) == "66.7%");
  CHECK(format_percentage(0, 5) == "0.0%");
  CHECK(format_percentage(5, 5) == "100.0%");
  CHECK(format_percentage(0, 0) == "0.0%");
}

TEST_CASE("distribution table for the reference annotation counts") {
  const auto votes = oracle::vote_fixture(647, 433, 90, 55, 0, 17);
  const auto gold = aggregate_all(votes);
  REQUIRE(gold.size() == 1225);
  const auto report = distribution_report(gold);
  CHECK(report.total == 1225);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].label == "ENTAILMENT");
  CHECK(report.rows[0].count == 647);
  CHECK(report.rows[0].percentage == "52.8%");
  CHECK(report.rows[1].label == "NEUTRAL");
  CHECK(report.rows[1].count == 433);
  CHECK(report.rows[1].percentage == "35.3%");
  CHECK(report.rows[2].label == "CONTRADICTION");
  CHECK(report.rows[2].count == 90);
  CHECK(report.rows[2].percentage == "7.3%");
  CHECK(report.rows[3].label == "(Two-way ties)");
  CHECK(report.rows[3].count == 55);
  CHECK(report.rows[3].percentage == "4.5%");

  const auto md = render_distribution_markdown(report);
  CHECK(md.find("| ENTAILMENT | 647 | 52.8% |") != std::string::npos);
  CHECK(md.find("| (Two-way ties) | 55 | 4.5% |") != std::string::npos);
  CHECK(md.find("| TOTAL | 1225 | 100% |") != std::string::npos);
  CHECK(md.find("Three-way") == std::string::npos);
}

TEST_CASE("three-way ties get their own row only when present") {
  const auto gold = aggregate_all(oracle::vote_fixture(3, 2, 1, 1, 2, 5));
  const auto report = distribution_report(gold);
  REQUIRE(report.rows.size() == 5);
  CHECK(report.rows[4].label == "(Three-way ties)");
  CHECK(report.rows[4].count == 2);
  std::size_t sum = 0;
  for (const auto& r : report.rows) sum += r.count;
  CHECK(sum == report.total);
}

TEST_CASE("row counts always sum to the total") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto gold = aggregate_all(oracle::vote_fixture(rng() % 20, rng() % 20, rng() % 20, rng() % 5, rng() % 3,
                                                         static_cast<unsigned>(trial)));
    const auto report = distribution_report(gold);
    std::size_t sum = 0;
    for (const auto& r : report.rows) sum += r.count;
    CHECK(sum == report.total);
  }
}
