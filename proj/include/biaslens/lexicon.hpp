#pragma once

// Word-category scores per sentence and their Pearson correlation with
// sentence-level bias strength.

#include <biaslens/analysis.hpp>
#include <biaslens/corpus.hpp>
#include <biaslens/error.hpp>
#include <biaslens/prediction.hpp>
#include <biaslens/text.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace biaslens {

/// Zero variance in a Pearson input.
class UndefinedCorrelation : public Error {
 public:
  UndefinedCorrelation() : Error("undefined correlation: zero variance") {}
};

struct LexiconCategory {
  std::string name;
  std::set<std::string> exact_words;
  std::set<std::string> prefixes;

  /// A token is a member if it equals an exact word or starts with a prefix.
  bool matches(std::string_view token) const {
    const std::string folded = detail::ascii_lower(token);
    if (exact_words.count(folded)) return true;
    for (const auto& p : prefixes)
      if (folded.compare(0, p.size(), p) == 0) return true;
    return false;
  }
};

class Lexicon {
 public:
  void add(LexiconCategory c) {
    if (c.name.empty()) throw InvalidArgument("lexicon category name must be non-empty");
    if (!names_.insert(c.name).second) throw InvalidArgument("duplicate lexicon category: " + c.name);
    categories_.push_back(std::move(c));
  }

  std::span<const LexiconCategory> categories() const noexcept { return categories_; }
  std::size_t size() const noexcept { return categories_.size(); }

 private:
  std::vector<LexiconCategory> categories_;
  std::unordered_set<std::string> names_;
};

/// Parses `name: word, word, stem*` records, one per line; '#' starts a comment.
inline Lexicon load_lexicon(std::istream& in, const std::string& source = "<lexicon>") {
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) throw ParseError(source, lineno, "expected 'name: words'");
    LexiconCategory c;
    c.name = std::string(detail::trim(body.substr(0, colon)));
    if (c.name.empty()) throw ParseError(source, lineno, "empty category name");
    std::string_view rest = body.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      auto entry = detail::trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (entry.empty()) continue;
      std::string word = detail::ascii_lower(entry);
      if (word.back() == '*') {
        word.pop_back();
        if (word.empty()) throw ParseError(source, lineno, "bare '*' pattern");
        c.prefixes.insert(std::move(word));
      } else {
        c.exact_words.insert(std::move(word));
      }
    }
    try {
      lex.add(std::move(c));
    } catch (const InvalidArgument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon: " + path);
  return load_lexicon(in, path);
}

/// Matching token occurrences (duplicates counted) over total tokens.
inline double lexicon_score(std::span<const std::string> tokens, const LexiconCategory& category) {
  if (tokens.empty()) throw InvalidArgument("lexicon_score: empty sentence");
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += category.matches(t) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

/// Sample Pearson correlation. Requires equal lengths, n >= 3 and non-constant inputs.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 3) throw InvalidArgument("pearson: at least 3 observations required");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) throw UndefinedCorrelation();
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct CorrelationResult {
  std::string category;
  BiasType bias_type = BiasType::political_bias;
  double r = 0.0;
  std::size_t n = 0;
};

struct CorrelationReport {
  std::vector<CorrelationResult> results;  // descending r
  std::vector<std::string> warnings;       // omitted categories
  std::size_t skipped_articles = 0;        // fewer than 2 sentences
};

struct SentenceObservation {
  std::vector<std::string> tokens;
  double strength = 0.0;
};

/// Pools every sentence and correlates each category's score with strength.
inline CorrelationReport correlate_categories(std::span<const SentenceObservation> sentences, const Lexicon& lexicon,
                                              BiasType bias_type) {
  CorrelationReport report;
  std::vector<double> strengths;
  strengths.reserve(sentences.size());
  for (const auto& s : sentences) strengths.push_back(s.strength);
  std::vector<double> scores(sentences.size());
  for (const auto& category : lexicon.categories()) {
    for (std::size_t i = 0; i < sentences.size(); ++i) scores[i] = lexicon_score(sentences[i].tokens, category);
    try {
      report.results.push_back({category.name, bias_type, pearson(scores, strengths), sentences.size()});
    } catch (const UndefinedCorrelation&) {
      report.warnings.push_back("category '" + category.name + "' omitted: zero variance");
    } catch (const InvalidArgument& e) {
      report.warnings.push_back("category '" + category.name + "' omitted: " + e.what());
    }
  }
  std::stable_sort(report.results.begin(), report.results.end(),
                   [](const CorrelationResult& a, const CorrelationResult& b) { return a.r > b.r; });
  return report;
}

/// Sentence strengths from ablation, then pooled correlation. Articles are
/// expected to be pre-filtered to correct predictions.
template <Predictor P>
CorrelationReport correlate_categories(const P& model, std::span<const Article> articles, const Lexicon& lexicon,
                                       BiasType bias_type, const Abbreviations& abbrev = default_abbreviations()) {
  std::vector<SentenceObservation> observations;
  std::size_t skipped = 0;
  for (const auto& a : articles) {
    const auto seg = segment_article(a, abbrev);
    if (seg.sentences.size() < 2) {
      ++skipped;
      continue;
    }
    const auto report = bias_strength(model, seg, Granularity::sentence, abbrev);
    for (const auto& s : report.segments) observations.push_back({seg.tokens[s.index], s.strength});
  }
  auto report = correlate_categories(observations, lexicon, bias_type);
  report.skipped_articles = skipped;
  return report;
}

}  // namespace biaslens
