#include "factgpt/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace factgpt {

std::size_t ConfusionMatrix::n_scored() const noexcept {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  for (auto u : unparseable_by_gold) n += u;
  return n;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  return counts[0][0] + counts[1][1] + counts[2][2];
}

ConfusionMatrix confusion_matrix(std::span<const GoldLabel> gold, std::span<const Prediction> predictions,
                                 const ScoringOptions& options) {
  std::map<std::string_view, const GoldLabel*> by_pair;
  for (const auto& g : gold) by_pair.emplace(g.pair_id, &g);

  ConfusionMatrix m;
  std::set<std::string_view> seen;
  for (const auto& p : predictions) {
    if (!seen.insert(p.pair_id).second) {
      throw Error(ErrorCode::DuplicatePrediction, "pair \"" + p.pair_id + "\" predicted twice");
    }
    auto it = by_pair.find(p.pair_id);
    if (it == by_pair.end()) {
      throw Error(ErrorCode::MissingGold, "no gold label for pair \"" + p.pair_id + "\"");
    }
    if (!p.label) ++m.n_unparseable;

    Label truth;
    if (const auto* d = std::get_if<Decided>(&it->second->outcome)) {
      truth = d->label;
    } else {
      if (options.ties == TiePolicy::Exclude) {
        ++m.n_excluded_ties;
        continue;
      }
      const auto& tied = std::get<Tie>(it->second->outcome).labels;
      truth = tied.front();
      if (p.label && std::find(tied.begin(), tied.end(), *p.label) != tied.end()) truth = *p.label;
    }

    if (!p.label) {
      if (options.unparseable == UnparseablePolicy::CountWrong) ++m.unparseable_by_gold[label_index(truth)];
      continue;
    }
    ++m.counts[label_index(truth)][label_index(*p.label)];
  }
  return m;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::array<ClassMetrics, 3> per_class_metrics(const ConfusionMatrix& m) {
  std::array<ClassMetrics, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t tp = m.counts[k][k];
    std::size_t predicted = 0, actual = m.unparseable_by_gold[k];
    for (std::size_t j = 0; j < 3; ++j) {
      predicted += m.counts[j][k];
      actual += m.counts[k][j];
    }
    auto& c = out[k];
    c.precision = ratio(tp, predicted);
    c.recall = ratio(tp, actual);
    // 2TP / (2TP + FP + FN) equals the harmonic mean and avoids 0/0 cases.
    c.f1 = ratio(2 * tp, predicted + actual);
  }
  return out;
}

OverallMetrics overall_metrics(const ConfusionMatrix& m) {
  const auto pc = per_class_metrics(m);
  OverallMetrics o;
  for (const auto& c : pc) {
    o.macro_precision += c.precision;
    o.macro_recall += c.recall;
  }
  o.macro_precision /= 3.0;
  o.macro_recall /= 3.0;
  o.accuracy = ratio(m.trace(), m.n_scored());
  return o;
}

EvalReport make_report(const ConfusionMatrix& m) {
  EvalReport r;
  r.per_class = per_class_metrics(m);
  const auto o = overall_metrics(m);
  r.macro_precision = o.macro_precision;
  r.macro_recall = o.macro_recall;
  r.accuracy = o.accuracy;
  r.n_scored = m.n_scored();
  r.n_excluded_ties = m.n_excluded_ties;
  r.n_unparseable = m.n_unparseable;
  return r;
}

EvalReport evaluate(std::span<const GoldLabel> gold, std::span<const Prediction> predictions,
                    const ScoringOptions& options) {
  return make_report(confusion_matrix(gold, predictions, options));
}

OrderedJson to_json_value(const EvalReport& r) {
  OrderedJson j;
  for (Label l : kAllLabels) {
    const auto& c = r.per_class[label_index(l)];
    OrderedJson cj;
    cj["precision"] = c.precision;
    cj["recall"] = c.recall;
    cj["f1"] = c.f1;
    j["per_class"][std::string(label_token(l))] = std::move(cj);
  }
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["accuracy"] = r.accuracy;
  j["n_scored"] = r.n_scored;
  j["n_excluded_ties"] = r.n_excluded_ties;
  j["n_unparseable"] = r.n_unparseable;
  return j;
}

void from_json_value(const Json& j, EvalReport& out) {
  try {
    for (Label l : kAllLabels) {
      const auto& cj = j.at("per_class").at(std::string(label_token(l)));
      auto& c = out.per_class[label_index(l)];
      c.precision = cj.at("precision").get<double>();
      c.recall = cj.at("recall").get<double>();
      c.f1 = cj.at("f1").get<double>();
    }
    out.macro_precision = j.at("macro_precision").get<double>();
    out.macro_recall = j.at("macro_recall").get<double>();
    out.accuracy = j.at("accuracy").get<double>();
    out.n_scored = j.at("n_scored").get<std::size_t>();
    out.n_excluded_ties = j.at("n_excluded_ties").get<std::size_t>();
    out.n_unparseable = j.at("n_unparseable").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("eval report: ") + e.what());
  }
}

std::string format_metric(double value) {
  const double hundredths = std::floor(std::clamp(value, 0.0, 1.0) * 100.0 + 0.5 + 1e-9);
  const int h = static_cast<int>(hundredths);
  if (h >= 100) return "1.00";
  std::string out = ".";
  out += static_cast<char>('0' + h / 10);
  out += static_cast<char>('0' + h % 10);
  return out;
}

std::string render_report(std::span<const NamedReport> reports) {
  auto source = [](const NamedReport& r) { return r.train_set_from.empty() ? std::string("---") : r.train_set_from; };

  std::string out = "### Overall performance\n\n";
  out += "| Model | Train Set From | Precision | Recall | Accuracy |\n";
  out += "|---|---|---:|---:|---:|\n";
  for (const auto& r : reports) {
    out += "| " + r.model + " | " + source(r) + " | " + format_metric(r.report.macro_precision) + " | " +
           format_metric(r.report.macro_recall) + " | " + format_metric(r.report.accuracy) + " |\n";
  }
  out += "\n### Label-by-label performance\n\n";
  out += "| Model | Train Set From | F1 Ent | F1 Neu | F1 Con |\n";
  out += "|---|---|---:|---:|---:|\n";
  for (const auto& r : reports) {
    out += "| " + r.model + " | " + source(r);
    for (const auto& c : r.report.per_class) out += " | " + format_metric(c.f1);
    out += " |\n";
  }
  if (!reports.empty()) {
    out += "\nPrecision and recall are macro-averaged over the three labels; accuracy is correct / scored.\n";
    for (const auto& r : reports) {
      out += "- " + r.model + " (" + source(r) + "): scored " + std::to_string(r.report.n_scored) +
             ", excluded ties " + std::to_string(r.report.n_excluded_ties) + ", unparseable " +
             std::to_string(r.report.n_unparseable) + "\n";
    }
  }
  return out;
}

}  // namespace factgpt
