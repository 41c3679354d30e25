#include "factgpt/annotate.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace factgpt {

GoldLabel aggregate_votes(const VoteSet& vote_set) {
  if (vote_set.votes.empty()) {
    throw Error(ErrorCode::EmptyVotes, "pair \"" + vote_set.pair_id + "\" has no votes");
  }
  std::array<std::size_t, 3> counts{};
  for (const auto& v : vote_set.votes) ++counts[label_index(v.label)];
  const std::size_t top = *std::max_element(counts.begin(), counts.end());

  std::vector<Label> leaders;
  for (Label l : kAllLabels) {
    if (counts[label_index(l)] == top) leaders.push_back(l);
  }
  GoldLabel gold;
  gold.pair_id = vote_set.pair_id;
  if (leaders.size() == 1) {
    gold.outcome = Decided{leaders.front()};
  } else {
    gold.outcome = Tie{std::move(leaders)};
  }
  return gold;
}

std::vector<GoldLabel> aggregate_all(std::span<const VoteSet> vote_sets) {
  std::vector<GoldLabel> out;
  out.reserve(vote_sets.size());
  for (const auto& vs : vote_sets) out.push_back(aggregate_votes(vs));
  return out;
}

std::string format_percentage(std::size_t count, std::size_t total) {
  if (total == 0) return "0.0%";
  // tenths of a percent, rounded half-up: floor((2000 * count + total) / (2 * total))
  const unsigned long long tenths =
      (2000ULL * count + total) / (2ULL * total);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

DistributionReport distribution_report(std::span<const GoldLabel> gold_labels) {
  std::array<std::size_t, 3> decided{};
  std::size_t two_way = 0, three_way = 0;
  for (const auto& g : gold_labels) {
    if (const auto* d = std::get_if<Decided>(&g.outcome)) {
      ++decided[label_index(d->label)];
    } else if (std::get<Tie>(g.outcome).labels.size() == 2) {
      ++two_way;
    } else {
      ++three_way;
    }
  }
  DistributionReport report;
  report.total = gold_labels.size();
  for (Label l : kAllLabels) {
    const auto n = decided[label_index(l)];
    report.rows.push_back({std::string(label_token(l)), n, format_percentage(n, report.total)});
  }
  report.rows.push_back({"(Two-way ties)", two_way, format_percentage(two_way, report.total)});
  if (three_way > 0) {
    report.rows.push_back({"(Three-way ties)", three_way, format_percentage(three_way, report.total)});
  }
  return report;
}

std::string render_distribution_markdown(const DistributionReport& report) {
  std::string out = "| Label | Count | Percentage |\n|---|---:|---:|\n";
  for (const auto& row : report.rows) {
    out += "| " + row.label + " | " + std::to_string(row.count) + " | " + row.percentage + " |\n";
  }
  out += "| TOTAL | " + std::to_string(report.total) + " | " + (report.total ? "100%" : "0.0%") + " |\n";
  return out;
}

}  // namespace factgpt
