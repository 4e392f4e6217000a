#pragma once

// Synthetic marker-token corpora with known ground truth. Positive articles
// carry a marker word inside vocabulary that is otherwise shared by both
// classes, so a classifier can only separate them through the marker.

#include <biaslens/corpus.hpp>
#include <biaslens/text.hpp>

#include <cctype>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace biaslens::synthetic {

struct Config {
  std::uint64_t seed = 1;
  std::size_t articles_per_class = 200;
  std::size_t topics = 20;
  std::size_t vocabulary = 60;
  std::size_t min_sentences = 5;
  std::size_t max_sentences = 8;
  std::size_t min_words = 4;
  std::size_t max_words = 7;
  std::size_t min_markers = 1;
  std::size_t max_markers = 3;
  std::string marker = "zqmarker";
  double embedding_scale = 0.4;
};

inline const std::string kBiasedPortal = "partisan wire";
inline const std::string kNeutralPortal = "civic ledger";

inline std::vector<std::string> vocabulary(const Config& cfg) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "vu", "we"};
  std::vector<std::string> words;
  for (std::size_t i = 0; i < cfg.vocabulary; ++i) {
    std::string w;
    std::size_t k = i;
    do {
      w += kSyllables[k % 10];
      k /= 10;
    } while (k);
    w += "n";  // keep every word at least three letters
    words.push_back(std::move(w));
  }
  return words;
}

inline std::shared_ptr<EmbeddingTable> embeddings(const Config& cfg, std::size_t dimension = kEmbeddingDimension) {
  auto table = std::make_shared<EmbeddingTable>(dimension);
  std::mt19937_64 rng(cfg.seed * 7919 + 17);
  std::normal_distribution<double> dist(0.0, cfg.embedding_scale);
  auto words = vocabulary(cfg);
  words.push_back(cfg.marker);
  words.emplace_back(".");
  std::vector<double> v(dimension);
  for (const auto& w : words) {
    for (double& x : v) x = dist(rng);
    table->add(w, v);
  }
  return table;
}

/// Builds one article of random sentences. Each entry of `marker_sentences`
/// places one marker occurrence in that sentence.
inline std::string compose(const std::vector<std::string>& vocab, std::size_t sentences,
                           const std::vector<std::size_t>& marker_sentences, const Config& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> word_dist(0, vocab.size() - 1);
  std::uniform_int_distribution<std::size_t> len_dist(cfg.min_words, cfg.max_words);
  std::string text;
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<std::string> words(len_dist(rng));
    for (auto& w : words) w = vocab[word_dist(rng)];
    for (std::size_t m : marker_sentences) {
      if (m != s) continue;
      std::uniform_int_distribution<std::size_t> pos(0, words.size() - 1);
      words[pos(rng)] = cfg.marker;
    }
    words[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(words[0][0])));
    if (!text.empty()) text += ' ';
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text += ' ';
      text += words[i];
    }
    text += '.';
  }
  return text;
}

inline Article make_article(std::string id, std::string topic, bool positive, std::string text) {
  Article a;
  a.id = std::move(id);
  a.topic = std::move(topic);
  a.portal_name = positive ? kBiasedPortal : kNeutralPortal;
  a.labels = positive ? derive_labels(PoliticalPlacement::hyperpartisan_left, FairnessPlacement::opinion)
                      : derive_labels(PoliticalPlacement::neutral, FairnessPlacement::fact_reporting);
  a.text = std::move(text);
  a.scrubbed = true;
  return a;
}

/// `articles_per_class` positive and negative articles; topics interleave both classes.
inline std::vector<Article> corpus(const Config& cfg) {
  const auto vocab = vocabulary(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> sent_dist(cfg.min_sentences, cfg.max_sentences);
  std::uniform_int_distribution<std::size_t> marker_dist(cfg.min_markers, cfg.max_markers);
  std::vector<Article> out;
  for (std::size_t i = 0; i < 2 * cfg.articles_per_class; ++i) {
    const bool positive = i % 2 == 0;
    const std::size_t n = sent_dist(rng);
    std::vector<std::size_t> markers;
    if (positive) {
      std::uniform_int_distribution<std::size_t> where(0, n - 1);
      for (std::size_t k = marker_dist(rng); k > 0; --k) markers.push_back(where(rng));
    }
    out.push_back(make_article("syn-" + std::to_string(i), "topic-" + std::to_string((i / 2) % cfg.topics), positive,
                               compose(vocab, n, markers, cfg, rng)));
  }
  return out;
}

struct MarkedArticle {
  Article article;
  std::size_t marker_sentence = 0;
};

/// Positive articles in which exactly one sentence holds the marker.
inline std::vector<MarkedArticle> single_marker_articles(const Config& cfg, std::size_t count, std::uint64_t seed) {
  const auto vocab = vocabulary(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> sent_dist(cfg.min_sentences, cfg.max_sentences);
  std::vector<MarkedArticle> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = sent_dist(rng);
    std::uniform_int_distribution<std::size_t> where(0, n - 1);
    const std::size_t m = where(rng);
    out.push_back({make_article("held-" + std::to_string(i), "held-out", true, compose(vocab, n, {m}, cfg, rng)), m});
  }
  return out;
}

/// Ratings table matching the two synthetic portals.
inline std::string ratings_csv() {
  return "portal,political_placement,fairness_placement,aliases\n" + kBiasedPortal +
         ",hyperpartisan_left,opinion,Partisan Wire\n" + kNeutralPortal + ",neutral,fact_reporting,Civic Ledger\n";
}

/// Raw article records (id, portal, topic, text) for the ingest command.
inline void write_articles(std::ostream& out, const std::vector<Article>& articles) {
  for (const auto& a : articles)
    out << nlohmann::json{{"id", a.id}, {"portal", a.portal_name}, {"topic", a.topic}, {"text", a.text}}.dump()
        << '\n';
}

inline void write_embeddings(std::ostream& out, const Config& cfg, const EmbeddingTable& table) {
  auto words = vocabulary(cfg);
  words.push_back(cfg.marker);
  words.emplace_back(".");
  for (const auto& w : words) {
    out << w;
    for (double v : table.lookup(w)) out << ' ' << csv::format_double(v);
    out << '\n';
  }
}

}  // namespace biaslens::synthetic
