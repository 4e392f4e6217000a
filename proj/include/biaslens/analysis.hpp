#pragma once

// Segment-ablation bias strength and discourse-quartile patterns.
//
// The strength of segment i is p - p_i, where p is the positive-class
// probability on the full article and p_i the probability with segment i
// (alone) removed. Each ablation starts again from the full article.

#include <biaslens/corpus.hpp>
#include <biaslens/error.hpp>
#include <biaslens/prediction.hpp>
#include <biaslens/text.hpp>

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biaslens {

enum class Granularity { sentence, paragraph };

inline std::string_view to_string(Granularity g) { return g == Granularity::sentence ? "sentence" : "paragraph"; }

inline Granularity parse_granularity(std::string_view s) {
  if (s == "sentence") return Granularity::sentence;
  if (s == "paragraph") return Granularity::paragraph;
  throw InvalidArgument("unknown granularity: " + std::string(s));
}

struct SegmentStrength {
  std::size_t index = 0;
  SentenceRange sentences;
  double p_art_minus_i = 0.0;
  double strength = 0.0;
};

struct BiasStrengthReport {
  std::string article_id;
  Granularity granularity = Granularity::sentence;
  double p_art = 0.0;
  std::size_t sentence_count = 0;
  std::vector<SegmentStrength> segments;
};

/// An article's sentences together with their tokens.
struct SegmentedArticle {
  std::string id;
  std::vector<std::string> sentences;
  std::vector<std::vector<std::string>> tokens;
};

inline SegmentedArticle segment_article(const Article& a, const Abbreviations& abbrev = default_abbreviations()) {
  SegmentedArticle s;
  s.id = a.id;
  for (auto& sentence : segment_sentences(a.text, abbrev)) {
    auto tokens = tokenize(sentence, abbrev);
    if (tokens.empty()) continue;
    s.sentences.push_back(std::move(sentence));
    s.tokens.push_back(std::move(tokens));
  }
  return s;
}

inline std::vector<SentenceRange> segment_ranges(std::size_t sentence_count, Granularity g) {
  if (g == Granularity::paragraph) return paragraphs(sentence_count);
  std::vector<SentenceRange> out;
  for (std::size_t i = 0; i < sentence_count; ++i) out.push_back({i, i + 1});
  return out;
}

/// Articles whose predicted label equals their true label for `target`.
template <Predictor P>
std::vector<Article> filter_correct(const P& model, std::span<const Article> articles, BiasType target,
                                    const Abbreviations& abbrev = default_abbreviations()) {
  std::vector<Article> out;
  for (const auto& a : articles) {
    const int truth = a.labels.get(target) ? 1 : 0;
    if (model.predict(tokenize_article(a.text, abbrev).flatten()).label == truth) out.push_back(a);
  }
  return out;
}

template <Predictor P>
BiasStrengthReport bias_strength(const P& model, const SegmentedArticle& article, Granularity granularity,
                                 const Abbreviations& abbrev = default_abbreviations()) {
  const std::size_t n = article.sentences.size();
  if (n == 0) throw InvalidArgument("bias_strength: article '" + article.id + "' has no sentences");
  const auto ranges = segment_ranges(n, granularity);
  if (ranges.size() < 2)
    throw InvalidArgument("ablation undefined: article '" + article.id + "' has a single " +
                          std::string(to_string(granularity)));

  std::vector<std::string> tokens;
  for (const auto& s : article.tokens) tokens.insert(tokens.end(), s.begin(), s.end());

  BiasStrengthReport report;
  report.article_id = article.id;
  report.granularity = granularity;
  report.sentence_count = n;
  report.p_art = model.predict(tokens).p_positive;

  for (std::size_t i = 0; i < ranges.size(); ++i) {
    // Re-tokenize the remaining sentences from their text.
    std::vector<std::string> ablated;
    for (std::size_t s = 0; s < n; ++s) {
      if (s >= ranges[i].first && s < ranges[i].last) continue;
      auto t = tokenize(article.sentences[s], abbrev);
      ablated.insert(ablated.end(), t.begin(), t.end());
    }
    const double p_minus = model.predict(ablated).p_positive;
    report.segments.push_back({i, ranges[i], p_minus, report.p_art - p_minus});
  }
  return report;
}

template <Predictor P>
BiasStrengthReport bias_strength(const P& model, const Article& article, Granularity granularity,
                                 const Abbreviations& abbrev = default_abbreviations()) {
  return bias_strength(model, segment_article(article, abbrev), granularity, abbrev);
}

// ---------------------------------------------------------------------------
// Discourse quartiles

/// Four consecutive part sizes as equal as possible; the first n % 4 parts get one extra.
inline std::array<std::size_t, 4> quartile_sizes(std::size_t sentence_count) {
  if (sentence_count < 4) throw InvalidArgument("quartile_sizes: fewer than 4 sentences");
  std::array<std::size_t, 4> sizes{};
  const std::size_t base = sentence_count / 4, extra = sentence_count % 4;
  for (std::size_t q = 0; q < 4; ++q) sizes[q] = base + (q < extra ? 1 : 0);
  return sizes;
}

/// Mean sentence strength within each quarter.
inline std::array<double, 4> quartile_means(std::span<const double> sentence_strengths) {
  const auto sizes = quartile_sizes(sentence_strengths.size());
  std::array<double, 4> means{};
  std::size_t pos = 0;
  for (std::size_t q = 0; q < 4; ++q) {
    double sum = 0.0;
    for (std::size_t k = 0; k < sizes[q]; ++k) sum += sentence_strengths[pos++];
    means[q] = sum / static_cast<double>(sizes[q]);
  }
  return means;
}

/// Shifts and scales to mean 0, population std 1. A constant input maps to all zeros.
template <std::size_t N>
std::array<double, N> z_normalize(const std::array<double, N>& values) {
  std::array<double, N> out{};
  bool constant = true;
  for (double v : values) constant = constant && v == values[0];
  if (constant) return out;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(N);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(N));
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < N; ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

enum class PatternClass { biased, unbiased };

inline std::string_view to_string(PatternClass c) { return c == PatternClass::biased ? "biased" : "unbiased"; }

inline PatternClass parse_pattern_class(std::string_view s) {
  if (s == "biased") return PatternClass::biased;
  if (s == "unbiased") return PatternClass::unbiased;
  throw InvalidArgument("unknown class: " + std::string(s));
}

/// Population over which quarter curves are z-normalized: each 4-value curve
/// alone, or the 8 values of both classes of a bias type together.
enum class NormalizationScope { per_curve, per_bias_type };

inline std::string_view to_string(NormalizationScope s) {
  return s == NormalizationScope::per_curve ? "per_curve" : "per_bias_type";
}

struct QuartilePattern {
  BiasType bias_type = BiasType::political_bias;
  PatternClass cls = PatternClass::biased;
  std::array<double, 4> raw{};
  std::array<double, 4> normalized{};
  std::size_t articles = 0;
};

struct PatternResult {
  QuartilePattern biased;
  QuartilePattern unbiased;
  std::size_t skipped_short = 0;  // articles with fewer than 4 sentences
  NormalizationScope scope = NormalizationScope::per_curve;
};

/// Sentence-level strengths of one article and its true label.
struct ArticleStrengths {
  int label = 0;
  std::vector<double> sentence_strengths;
};

inline PatternResult quartile_pattern(std::span<const ArticleStrengths> articles, BiasType bias_type,
                                      NormalizationScope scope = NormalizationScope::per_curve) {
  PatternResult result;
  result.scope = scope;
  result.biased.bias_type = result.unbiased.bias_type = bias_type;
  result.biased.cls = PatternClass::biased;
  result.unbiased.cls = PatternClass::unbiased;

  std::array<double, 4> sum_biased{}, sum_unbiased{};
  for (const auto& a : articles) {
    if (a.sentence_strengths.size() < 4) {
      ++result.skipped_short;
      continue;
    }
    const auto means = quartile_means(a.sentence_strengths);
    auto& sum = a.label == 1 ? sum_biased : sum_unbiased;
    auto& pattern = a.label == 1 ? result.biased : result.unbiased;
    for (std::size_t q = 0; q < 4; ++q) sum[q] += means[q];
    ++pattern.articles;
  }
  for (std::size_t q = 0; q < 4; ++q) {
    if (result.biased.articles) result.biased.raw[q] = sum_biased[q] / static_cast<double>(result.biased.articles);
    if (result.unbiased.articles)
      result.unbiased.raw[q] = sum_unbiased[q] / static_cast<double>(result.unbiased.articles);
  }

  if (scope == NormalizationScope::per_curve) {
    result.biased.normalized = z_normalize(result.biased.raw);
    result.unbiased.normalized = z_normalize(result.unbiased.raw);
  } else {
    std::array<double, 8> joint{};
    for (std::size_t q = 0; q < 4; ++q) {
      joint[q] = result.biased.raw[q];
      joint[q + 4] = result.unbiased.raw[q];
    }
    const auto z = z_normalize(joint);
    for (std::size_t q = 0; q < 4; ++q) {
      result.biased.normalized[q] = z[q];
      result.unbiased.normalized[q] = z[q + 4];
    }
  }
  return result;
}

/// Computes sentence strengths for each article (expected to be pre-filtered
/// to correct predictions) and aggregates them per true class.
template <Predictor P>
PatternResult quartile_pattern(const P& model, std::span<const Article> articles, BiasType bias_type,
                               NormalizationScope scope = NormalizationScope::per_curve,
                               const Abbreviations& abbrev = default_abbreviations()) {
  std::vector<ArticleStrengths> strengths;
  std::size_t skipped = 0;
  for (const auto& a : articles) {
    const auto seg = segment_article(a, abbrev);
    if (seg.sentences.size() < 4) {
      ++skipped;
      continue;
    }
    const auto report = bias_strength(model, seg, Granularity::sentence, abbrev);
    ArticleStrengths s;
    s.label = a.labels.get(bias_type) ? 1 : 0;
    for (const auto& segment : report.segments) s.sentence_strengths.push_back(segment.strength);
    strengths.push_back(std::move(s));
  }
  auto result = quartile_pattern(strengths, bias_type, scope);
  result.skipped_short += skipped;
  return result;
}

// ---------------------------------------------------------------------------
// Strength report interchange (one JSON object per line)

inline nlohmann::ordered_json to_json(const BiasStrengthReport& r) {
  nlohmann::ordered_json segments = nlohmann::ordered_json::array();
  for (const auto& s : r.segments)
    segments.push_back({{"index", s.index},
                        {"sentences", {s.sentences.first, s.sentences.last}},
                        {"p_art_minus_i", s.p_art_minus_i},
                        {"strength", s.strength}});
  nlohmann::ordered_json j;
  j["article_id"] = r.article_id;
  j["granularity"] = std::string(to_string(r.granularity));
  j["p_art"] = r.p_art;
  j["sentence_count"] = r.sentence_count;
  j["segments"] = std::move(segments);
  return j;
}

inline BiasStrengthReport strength_report_from_json(const nlohmann::json& j) {
  BiasStrengthReport r;
  r.article_id = j.at("article_id").get<std::string>();
  r.granularity = parse_granularity(j.at("granularity").get<std::string>());
  r.p_art = j.at("p_art").get<double>();
  r.sentence_count = j.at("sentence_count").get<std::size_t>();
  for (const auto& s : j.at("segments")) {
    SegmentStrength seg;
    seg.index = s.at("index").get<std::size_t>();
    seg.sentences = {s.at("sentences").at(0).get<std::size_t>(), s.at("sentences").at(1).get<std::size_t>()};
    seg.p_art_minus_i = s.at("p_art_minus_i").get<double>();
    seg.strength = s.at("strength").get<double>();
    r.segments.push_back(seg);
  }
  return r;
}

inline std::vector<BiasStrengthReport> read_strength_reports(std::istream& in, const std::string& source = "<strengths>") {
  std::vector<BiasStrengthReport> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(strength_report_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, lineno, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return out;
}

}  // namespace biaslens
