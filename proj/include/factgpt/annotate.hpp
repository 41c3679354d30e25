#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "factgpt/domain.hpp"

namespace factgpt {

// Majority vote. A unique argmax yields Decided, otherwise Tie over every
// label reaching the maximum. Throws Error{EmptyVotes}.
GoldLabel aggregate_votes(const VoteSet& vote_set);

std::vector<GoldLabel> aggregate_all(std::span<const VoteSet> vote_sets);

struct DistributionRow {
  std::string label;  // "ENTAILMENT", ..., "(Two-way ties)", "(Three-way ties)"
  std::size_t count = 0;
  std::string percentage;  // one decimal, half-up, e.g. "52.8%"
};

struct DistributionReport {
  std::vector<DistributionRow> rows;
  std::size_t total = 0;
};

// count / total as a percentage rounded half-up to one decimal ("0.0%" when
// total is 0). Exact integer arithmetic.
std::string format_percentage(std::size_t count, std::size_t total);

// Rows for the three labels and two-way ties always; a three-way row only
// when such ties occur.
DistributionReport distribution_report(std::span<const GoldLabel> gold_labels);

// Markdown table with Label | Count | Percentage columns and a TOTAL row.
std::string render_distribution_markdown(const DistributionReport& report);

}  // namespace factgpt
