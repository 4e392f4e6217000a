#pragma once

// Per-class F1, macro-F1 and the majority baseline.

#include <biaslens/corpus.hpp>
#include <biaslens/error.hpp>
#include <biaslens/prediction.hpp>
#include <biaslens/text.hpp>

#include "json.hpp"

#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace biaslens {

enum class ClassLabel { negative = 0, positive = 1 };

/// Binary confusion counts with class 1 as "positive".
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t n() const noexcept { return tp + fp + tn + fn; }

  void add(int truth, int predicted) noexcept {
    if (truth == 1) {
      (predicted == 1 ? tp : fn) += 1;
    } else {
      (predicted == 1 ? fp : tn) += 1;
    }
  }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Harmonic mean of precision and recall for `cls`; 0 when both are 0.
inline double f1(const Confusion& c, ClassLabel cls) {
  if (c.n() == 0) throw InvalidArgument("f1: no predictions");
  const double tp = static_cast<double>(cls == ClassLabel::positive ? c.tp : c.tn);
  const double fp = static_cast<double>(cls == ClassLabel::positive ? c.fp : c.fn);
  const double fn = static_cast<double>(cls == ClassLabel::positive ? c.fn : c.fp);
  if (tp == 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

inline double macro_average(double f1_positive, double f1_negative) noexcept {
  return (f1_positive + f1_negative) / 2.0;
}

struct EvalReport {
  double f1_positive = 0.0;
  double f1_negative = 0.0;
  double macro_f1 = 0.0;
  Confusion confusion;
  std::size_t n = 0;
};

inline EvalReport make_report(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  r.n = c.n();
  r.f1_positive = f1(c, ClassLabel::positive);
  r.f1_negative = f1(c, ClassLabel::negative);
  r.macro_f1 = macro_average(r.f1_positive, r.f1_negative);
  return r;
}

inline EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw InvalidArgument("evaluate: label/prediction count mismatch");
  if (truth.empty()) throw InvalidArgument("evaluate: no predictions");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) c.add(truth[i], predicted[i]);
  return make_report(c);
}

/// Predicts the more frequent class for every item (class 0 on a tie).
inline EvalReport majority_baseline(std::span<const int> labels) {
  if (labels.empty()) throw InvalidArgument("majority_baseline: no labels");
  std::size_t positives = 0;
  for (int l : labels) positives += (l == 1);
  const int majority = positives * 2 > labels.size() ? 1 : 0;
  std::vector<int> predicted(labels.size(), majority);
  return evaluate_predictions(labels, predicted);
}

struct Evaluation {
  EvalReport report;
  std::vector<int> truth;
  std::vector<int> predicted;
  std::vector<double> p_positive;
};

/// Runs `model` over each article's full token stream.
template <Predictor P>
Evaluation evaluate(const P& model, std::span<const Article> articles, BiasType target,
                    const Abbreviations& abbrev = default_abbreviations()) {
  Evaluation out;
  for (const auto& a : articles) {
    const Prediction p = model.predict(tokenize_article(a.text, abbrev).flatten());
    out.truth.push_back(a.labels.get(target) ? 1 : 0);
    out.predicted.push_back(p.label);
    out.p_positive.push_back(p.p_positive);
  }
  out.report = evaluate_predictions(out.truth, out.predicted);
  return out;
}

/// Fraction rendered as a percentage with two decimals, e.g. 0.36376 -> "36.38".
inline std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
  j["f1_positive"] = r.f1_positive;
  j["f1_negative"] = r.f1_negative;
  j["macro_f1"] = r.macro_f1;
  return j;
}

/// Majority / model / per-class rows, percentages with two decimals.
inline nlohmann::ordered_json results_table(const EvalReport& model, const EvalReport& majority) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  rows.push_back({{"row", "Majority"}, {"f1", format_percent(majority.macro_f1)}});
  rows.push_back({{"row", "RNN"}, {"f1", format_percent(model.macro_f1)}});
  rows.push_back({{"row", "- Biased"}, {"f1", format_percent(model.f1_positive)}});
  rows.push_back({{"row", "- Unbiased"}, {"f1", format_percent(model.f1_negative)}});
  return rows;
}

}  // namespace biaslens
