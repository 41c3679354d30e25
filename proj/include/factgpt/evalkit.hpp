#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "factgpt/domain.hpp"

namespace factgpt {

enum class TiePolicy {
  Exclude,       // tied gold pairs are left out and counted in n_excluded_ties
  CreditEither,  // a prediction matching any tied label counts as correct
};

enum class UnparseablePolicy {
  CountWrong,  // stays in the denominator as a miss for its gold row
  Exclude,     // left out of scoring, still reported in n_unparseable
};

struct ScoringOptions {
  TiePolicy ties = TiePolicy::Exclude;
  UnparseablePolicy unparseable = UnparseablePolicy::CountWrong;
};

// counts[gold][predicted] over (Entailment, Neutral, Contradiction), plus a
// per-gold-row column for unparseable predictions that carries no precision
// credit.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 3>, 3> counts{};
  std::array<std::size_t, 3> unparseable_by_gold{};
  std::size_t n_excluded_ties = 0;
  std::size_t n_unparseable = 0;  // all unparseable predictions seen, scored or not

  std::size_t n_scored() const noexcept;
  std::size_t trace() const noexcept;
};

// Throws Error{MissingGold} or Error{DuplicatePrediction}.
ConfusionMatrix confusion_matrix(std::span<const GoldLabel> gold, std::span<const Prediction> predictions,
                                 const ScoringOptions& options = {});

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// 0/0 is 0 everywhere.
std::array<ClassMetrics, 3> per_class_metrics(const ConfusionMatrix& m);

struct OverallMetrics {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double accuracy = 0.0;
};

OverallMetrics overall_metrics(const ConfusionMatrix& m);

struct EvalReport {
  std::array<ClassMetrics, 3> per_class{};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double accuracy = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_excluded_ties = 0;
  std::size_t n_unparseable = 0;
};

EvalReport make_report(const ConfusionMatrix& m);
EvalReport evaluate(std::span<const GoldLabel> gold, std::span<const Prediction> predictions,
                    const ScoringOptions& options = {});

// {"per_class":{"ENTAILMENT":{"precision","recall","f1"},...},"macro_precision",
//  "macro_recall","accuracy","n_scored","n_excluded_ties","n_unparseable"}
OrderedJson to_json_value(const EvalReport& r);
void from_json_value(const Json& j, EvalReport& out);

struct NamedReport {
  std::string model;
  std::string train_set_from;  // empty renders as "---" (pre-trained)
  EvalReport report;
};

// Two decimals, half-up, leading dot below 1: 0.725 -> ".73", 1 -> "1.00".
std::string format_metric(double value);

// Overall table (Precision, Recall, Accuracy) and label-by-label F1 table,
// one row per named report.
std::string render_report(std::span<const NamedReport> reports);

}  // namespace factgpt
