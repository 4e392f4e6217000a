#pragma once

// Article and portal-rating ingestion, bias label derivation, portal scrubbing
// and topic-disjoint dataset splits.

#include <biaslens/csv.hpp>
#include <biaslens/error.hpp>
#include <biaslens/text.hpp>

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace biaslens {

enum class PoliticalPlacement {
  most_extreme_left,
  hyperpartisan_left,
  skew_left,
  neutral,
  skew_right,
  hyperpartisan_right,
  most_extreme_right,
};

enum class FairnessPlacement {
  original_fact_reporting,
  fact_reporting,
  mix_fact_analysis,
  analysis,
  opinion,
  selective_story,
  propaganda,
  fabricated_info,
};

inline constexpr std::array<PoliticalPlacement, 7> kAllPoliticalPlacements = {
    PoliticalPlacement::most_extreme_left,   PoliticalPlacement::hyperpartisan_left,
    PoliticalPlacement::skew_left,           PoliticalPlacement::neutral,
    PoliticalPlacement::skew_right,          PoliticalPlacement::hyperpartisan_right,
    PoliticalPlacement::most_extreme_right,
};

inline constexpr std::array<FairnessPlacement, 8> kAllFairnessPlacements = {
    FairnessPlacement::original_fact_reporting, FairnessPlacement::fact_reporting,
    FairnessPlacement::mix_fact_analysis,       FairnessPlacement::analysis,
    FairnessPlacement::opinion,                 FairnessPlacement::selective_story,
    FairnessPlacement::propaganda,              FairnessPlacement::fabricated_info,
};

inline std::string_view to_string(PoliticalPlacement p) {
  switch (p) {
    case PoliticalPlacement::most_extreme_left: return "most_extreme_left";
    case PoliticalPlacement::hyperpartisan_left: return "hyperpartisan_left";
    case PoliticalPlacement::skew_left: return "skew_left";
    case PoliticalPlacement::neutral: return "neutral";
    case PoliticalPlacement::skew_right: return "skew_right";
    case PoliticalPlacement::hyperpartisan_right: return "hyperpartisan_right";
    case PoliticalPlacement::most_extreme_right: return "most_extreme_right";
  }
  return "?";
}

inline std::string_view to_string(FairnessPlacement p) {
  switch (p) {
    case FairnessPlacement::original_fact_reporting: return "original_fact_reporting";
    case FairnessPlacement::fact_reporting: return "fact_reporting";
    case FairnessPlacement::mix_fact_analysis: return "mix_fact_analysis";
    case FairnessPlacement::analysis: return "analysis";
    case FairnessPlacement::opinion: return "opinion";
    case FairnessPlacement::selective_story: return "selective_story";
    case FairnessPlacement::propaganda: return "propaganda";
    case FairnessPlacement::fabricated_info: return "fabricated_info";
  }
  return "?";
}

/// The three binary tasks. Each selects one field of BiasLabels.
enum class BiasType { political_bias, unfairness, non_objectivity };

inline constexpr std::array<BiasType, 3> kAllBiasTypes = {BiasType::political_bias, BiasType::unfairness,
                                                          BiasType::non_objectivity};

inline std::string_view to_string(BiasType t) {
  switch (t) {
    case BiasType::political_bias: return "political_bias";
    case BiasType::unfairness: return "unfairness";
    case BiasType::non_objectivity: return "non_objectivity";
  }
  return "?";
}

/// Accepts the canonical names and the short CLI aliases bias|fairness|objectivity.
inline BiasType parse_bias_type(std::string_view s) {
  if (s == "political_bias" || s == "bias") return BiasType::political_bias;
  if (s == "unfairness" || s == "fairness") return BiasType::unfairness;
  if (s == "non_objectivity" || s == "objectivity") return BiasType::non_objectivity;
  throw InvalidArgument("unknown bias type: " + std::string(s));
}

struct BiasLabels {
  bool political_bias = false;
  bool unfairness = false;
  bool non_objectivity = false;

  bool get(BiasType t) const noexcept {
    switch (t) {
      case BiasType::political_bias: return political_bias;
      case BiasType::unfairness: return unfairness;
      case BiasType::non_objectivity: return non_objectivity;
    }
    return false;
  }

  friend bool operator==(const BiasLabels&, const BiasLabels&) = default;
};

struct PortalRating {
  std::string portal_name;  // case-folded
  PoliticalPlacement political_placement = PoliticalPlacement::neutral;
  FairnessPlacement fairness_placement = FairnessPlacement::fact_reporting;
  std::vector<std::string> aliases;
};

/// Extreme and hyperpartisan placements are politically biased; selective
/// story, propaganda and fabricated info are unfair; either makes an
/// article non-objective.
constexpr BiasLabels derive_labels(PoliticalPlacement political, FairnessPlacement fairness) noexcept {
  BiasLabels l;
  l.political_bias = political == PoliticalPlacement::most_extreme_left ||
                     political == PoliticalPlacement::most_extreme_right ||
                     political == PoliticalPlacement::hyperpartisan_left ||
                     political == PoliticalPlacement::hyperpartisan_right;
  l.unfairness = fairness == FairnessPlacement::selective_story || fairness == FairnessPlacement::propaganda ||
                 fairness == FairnessPlacement::fabricated_info;
  l.non_objectivity = l.political_bias || l.unfairness;
  return l;
}

inline BiasLabels derive_labels(const PortalRating& r) noexcept {
  return derive_labels(r.political_placement, r.fairness_placement);
}

struct Article {
  std::string id;
  std::string portal_name;
  std::string topic;
  std::string text;
  BiasLabels labels;
  bool scrubbed = false;
};

// ---------------------------------------------------------------------------
// Placement normalization

/// Maps raw placement strings (case-insensitive, whitespace-trimmed) onto enum
/// members. Canonical enum names always resolve; extra spellings come from a
/// table `axis,raw,placement` with axis in {political, fairness}.
class PlacementNormalizer {
 public:
  PlacementNormalizer() {
    for (auto p : kAllPoliticalPlacements) political_[std::string(to_string(p))] = p;
    for (auto p : kAllFairnessPlacements) fairness_[std::string(to_string(p))] = p;
  }

  void add_political(std::string_view raw, PoliticalPlacement p) { political_[key(raw)] = p; }
  void add_fairness(std::string_view raw, FairnessPlacement p) { fairness_[key(raw)] = p; }

  std::optional<PoliticalPlacement> political(std::string_view raw) const {
    auto it = political_.find(key(raw));
    if (it == political_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<FairnessPlacement> fairness(std::string_view raw) const {
    auto it = fairness_.find(key(raw));
    if (it == fairness_.end()) return std::nullopt;
    return it->second;
  }

  /// Reads `axis,raw,placement` rows (header required, '#' lines ignored).
  static PlacementNormalizer load(std::istream& in, const std::string& source = "<normalization>") {
    PlacementNormalizer out;
    const PlacementNormalizer canonical;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty() || detail::trim(line).front() == '#') continue;
      auto f = csv::split_line(line, source, lineno);
      if (header) {
        if (f.size() != 3 || detail::trim(f[0]) != "axis")
          throw ParseError(source, lineno, "expected header axis,raw,placement");
        header = false;
        continue;
      }
      if (f.size() != 3) throw ParseError(source, lineno, "expected 3 fields");
      const auto axis = detail::trim(f[0]);
      if (axis == "political") {
        auto p = canonical.political(f[2]);
        if (!p) throw ParseError(source, lineno, "unknown political placement '" + f[2] + "'");
        out.add_political(f[1], *p);
      } else if (axis == "fairness") {
        auto p = canonical.fairness(f[2]);
        if (!p) throw ParseError(source, lineno, "unknown fairness placement '" + f[2] + "'");
        out.add_fairness(f[1], *p);
      } else {
        throw ParseError(source, lineno, "axis must be 'political' or 'fairness'");
      }
    }
    return out;
  }

  static PlacementNormalizer load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open normalization table: " + path);
    return load(in, path);
  }

 private:
  static std::string key(std::string_view raw) {
    std::string k = detail::ascii_lower(detail::trim(raw));
    for (char& c : k)
      if (c == ' ' || c == '-') c = '_';
    return k;
  }

  std::unordered_map<std::string, PoliticalPlacement> political_;
  std::unordered_map<std::string, FairnessPlacement> fairness_;
};

// ---------------------------------------------------------------------------
// Ratings table

class RatingsTable {
 public:
  /// Throws InvalidArgument on an empty or duplicate portal name.
  void add(PortalRating r) {
    r.portal_name = detail::ascii_lower(detail::trim(r.portal_name));
    if (r.portal_name.empty()) throw InvalidArgument("portal name must be non-empty");
    if (index_.count(r.portal_name)) throw InvalidArgument("duplicate portal: " + r.portal_name);
    index_.emplace(r.portal_name, ratings_.size());
    ratings_.push_back(std::move(r));
  }

  const PortalRating* find(std::string_view portal) const {
    auto it = index_.find(detail::ascii_lower(detail::trim(portal)));
    return it == index_.end() ? nullptr : &ratings_[it->second];
  }

  std::span<const PortalRating> ratings() const noexcept { return ratings_; }
  std::size_t size() const noexcept { return ratings_.size(); }

 private:
  std::vector<PortalRating> ratings_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads `portal,political_placement,fairness_placement,aliases` (aliases ';'-joined).
/// A portal with no aliases is identified by its own name.
inline RatingsTable load_ratings(std::istream& in, const std::string& source = "<ratings>",
                                 const PlacementNormalizer& normalizer = PlacementNormalizer{}) {
  RatingsTable table;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = csv::split_line(line, source, lineno);
    if (header) {
      if (f.size() != 4 || detail::trim(f[0]) != "portal" || detail::trim(f[1]) != "political_placement" ||
          detail::trim(f[2]) != "fairness_placement" || detail::trim(f[3]) != "aliases")
        throw ParseError(source, lineno, "expected header portal,political_placement,fairness_placement,aliases");
      header = false;
      continue;
    }
    if (f.size() != 4) throw ParseError(source, lineno, "expected 4 fields, found " + std::to_string(f.size()));
    PortalRating r;
    r.portal_name = detail::trim(f[0]);
    auto pol = normalizer.political(f[1]);
    if (!pol) throw ParseError(source, lineno, "unknown political placement '" + f[1] + "'");
    auto fair = normalizer.fairness(f[2]);
    if (!fair) throw ParseError(source, lineno, "unknown fairness placement '" + f[2] + "'");
    r.political_placement = *pol;
    r.fairness_placement = *fair;
    std::stringstream aliases(f[3]);
    std::string alias;
    while (std::getline(aliases, alias, ';')) {
      auto a = detail::trim(alias);
      if (!a.empty()) r.aliases.emplace_back(a);
    }
    if (r.aliases.empty()) r.aliases.push_back(r.portal_name);
    try {
      table.add(std::move(r));
    } catch (const InvalidArgument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (header) throw ParseError(source, 0, "empty ratings file");
  return table;
}

inline RatingsTable load_ratings(const std::string& path,
                                 const PlacementNormalizer& normalizer = PlacementNormalizer{}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ratings file: " + path);
  return load_ratings(in, path, normalizer);
}

// ---------------------------------------------------------------------------
// Portal scrubbing

inline constexpr std::string_view kPortalToken = "[PORTAL]";

struct ScrubEvent {
  enum class Kind { alias_replaced, byline_removed };
  std::string article_id;
  Kind kind;
  std::string original;  // matched alias occurrence or removed sentence
};

namespace detail {

inline bool is_byline(std::string_view sentence, std::span<const std::string> folded_aliases) {
  std::string s = ascii_lower(trim(sentence));
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == ')' || s.back() == '"')) s.pop_back();
  static constexpr std::string_view kTail = "contributed to this report";
  if (s.size() < kTail.size() || s.compare(s.size() - kTail.size(), kTail.size(), kTail) != 0) return false;
  std::string_view head(s);
  if (!head.empty() && head.front() == '(') head.remove_prefix(1);
  if (head.substr(0, 4) == "the ") head.remove_prefix(4);
  auto starts_with_alias = [&](std::string_view alias) {
    if (alias.empty() || head.substr(0, alias.size()) != alias) return false;
    if (head.size() == alias.size()) return true;
    const char next = head[alias.size()];
    return next == '\'' || !is_word_char(next);
  };
  if (starts_with_alias(ascii_lower(kPortalToken))) return true;
  for (const auto& a : folded_aliases)
    if (starts_with_alias(a)) return true;
  return false;
}

}  // namespace detail

/// Replaces every case-insensitive whole-word occurrence of an alias with
/// "[PORTAL]", then removes contributor-byline sentences naming the portal.
/// Idempotent. Appends one ScrubEvent per change to `log` when given.
inline Article scrub_portal_mentions(Article article, std::span<const std::string> aliases,
                                     std::vector<ScrubEvent>* log = nullptr) {
  if (aliases.empty()) throw InvalidArgument("scrub_portal_mentions: no aliases for portal " + article.portal_name);

  std::vector<std::string> folded;
  for (const auto& a : aliases) {
    auto t = detail::ascii_lower(detail::trim(a));
    if (!t.empty()) folded.push_back(std::move(t));
  }
  std::sort(folded.begin(), folded.end(),
            [](const std::string& a, const std::string& b) { return a.size() != b.size() ? a.size() > b.size() : a < b; });
  folded.erase(std::unique(folded.begin(), folded.end()), folded.end());

  const std::string& text = article.text;
  std::string out;
  out.reserve(text.size());
  const std::string lower = detail::ascii_lower(text);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, kPortalToken.size(), kPortalToken) == 0) {
      out += kPortalToken;
      i += kPortalToken.size();
      continue;
    }
    bool matched = false;
    if (i == 0 || !detail::is_word_char(text[i - 1])) {
      for (const auto& alias : folded) {
        const std::size_t end = i + alias.size();
        if (lower.compare(i, alias.size(), alias) != 0) continue;
        if (end < text.size() && detail::is_word_char(text[end])) continue;
        if (log) log->push_back({article.id, ScrubEvent::Kind::alias_replaced, text.substr(i, alias.size())});
        out += kPortalToken;
        i = end;
        matched = true;
        break;
      }
    }
    if (!matched) out += text[i++];
  }

  // Removing a byline can merge its neighbours into a new byline; repeat until stable.
  for (bool removed = true; removed && !detail::trim(out).empty();) {
    removed = false;
    const auto spans = sentence_spans(out);
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
      std::string_view sentence = std::string_view(out).substr(it->begin, it->end - it->begin);
      if (!detail::is_byline(sentence, folded)) continue;
      if (log) log->push_back({article.id, ScrubEvent::Kind::byline_removed, std::string(sentence)});
      std::size_t end = it->end;
      while (end < out.size() && (out[end] == ' ' || out[end] == '\t')) ++end;
      out.erase(it->begin, end - it->begin);
      removed = true;
    }
  }

  article.text = std::string(detail::trim(out));
  article.scrubbed = true;
  return article;
}

// ---------------------------------------------------------------------------
// Corpus loading

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

struct CorpusLoadResult {
  std::vector<Article> articles;
  std::size_t dropped_unrated = 0;
  std::map<std::string, std::size_t> dropped_by_portal;  // case-folded portal -> count
  std::size_t dropped_empty_after_scrub = 0;
  std::vector<RecordError> errors;
  std::vector<ScrubEvent> scrub_log;
};

struct LoadOptions {
  bool scrub = true;
};

/// Joins newline-delimited article records `{id, portal, topic, text}` with the
/// ratings table. Unrated portals are dropped and counted; malformed records
/// are reported per line and skipped. Throws Error if nothing survives.
inline CorpusLoadResult load_corpus(std::istream& articles_in, const RatingsTable& ratings,
                                    const std::string& source = "<articles>", LoadOptions options = {}) {
  CorpusLoadResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(articles_in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      result.errors.push_back({lineno, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    Article a;
    bool ok = rec.is_object();
    auto field = [&](const char* name, std::string& dst) {
      if (!ok) return;
      auto it = rec.find(name);
      if (it == rec.end() || !it->is_string() || detail::trim(it->get_ref<const std::string&>()).empty()) {
        result.errors.push_back({lineno, std::string("missing or empty field '") + name + "'"});
        ok = false;
        return;
      }
      dst = it->get<std::string>();
    };
    if (!ok) result.errors.push_back({lineno, "record is not an object"});
    field("id", a.id);
    field("portal", a.portal_name);
    field("topic", a.topic);
    field("text", a.text);
    if (!ok) continue;
    if (!seen_ids.insert(a.id).second) {
      result.errors.push_back({lineno, "duplicate article id '" + a.id + "'"});
      continue;
    }
    const PortalRating* rating = ratings.find(a.portal_name);
    if (!rating) {
      ++result.dropped_unrated;
      ++result.dropped_by_portal[detail::ascii_lower(detail::trim(a.portal_name))];
      continue;
    }
    a.portal_name = rating->portal_name;
    a.labels = derive_labels(*rating);
    if (options.scrub) {
      a = scrub_portal_mentions(std::move(a), rating->aliases, &result.scrub_log);
      if (a.text.empty()) {
        ++result.dropped_empty_after_scrub;
        continue;
      }
    }
    result.articles.push_back(std::move(a));
  }
  if (result.articles.empty()) throw Error(source + ": no labeled articles after joining with ratings");
  return result;
}

inline CorpusLoadResult load_corpus(const std::string& articles_path, const std::string& ratings_path,
                                    const PlacementNormalizer& normalizer = PlacementNormalizer{},
                                    LoadOptions options = {}) {
  const RatingsTable ratings = load_ratings(ratings_path, normalizer);
  std::ifstream in(articles_path);
  if (!in) throw Error("cannot open articles file: " + articles_path);
  return load_corpus(in, ratings, articles_path, options);
}

// Labeled corpus interchange (one JSON object per line).

inline nlohmann::json to_json(const Article& a) {
  return nlohmann::json{{"id", a.id},
                        {"portal", a.portal_name},
                        {"topic", a.topic},
                        {"text", a.text},
                        {"labels",
                         {{"political_bias", a.labels.political_bias},
                          {"unfairness", a.labels.unfairness},
                          {"non_objectivity", a.labels.non_objectivity}}},
                        {"scrubbed", a.scrubbed}};
}

inline void write_corpus(std::ostream& out, std::span<const Article> articles) {
  for (const auto& a : articles) out << to_json(a).dump() << '\n';
}

inline std::vector<Article> read_corpus(std::istream& in, const std::string& source = "<corpus>") {
  std::vector<Article> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Article a;
      a.id = j.at("id").get<std::string>();
      a.portal_name = j.at("portal").get<std::string>();
      a.topic = j.at("topic").get<std::string>();
      a.text = j.at("text").get<std::string>();
      const auto& l = j.at("labels");
      a.labels.political_bias = l.at("political_bias").get<bool>();
      a.labels.unfairness = l.at("unfairness").get<bool>();
      a.labels.non_objectivity = l.at("non_objectivity").get<bool>();
      a.scrubbed = j.value("scrubbed", false);
      if (a.labels.non_objectivity != (a.labels.political_bias || a.labels.unfairness))
        throw ParseError(source, lineno, "non_objectivity must equal political_bias OR unfairness");
      if (a.id.empty() || detail::trim(a.text).empty()) throw ParseError(source, lineno, "empty id or text");
      if (!ids.insert(a.id).second) throw ParseError(source, lineno, "duplicate article id '" + a.id + "'");
      out.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return out;
}

inline std::vector<Article> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  return read_corpus(in, path);
}

// ---------------------------------------------------------------------------
// Topic-grouped splits

enum class Partition { train, dev, test };

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
  }
  return "?";
}

inline Partition parse_partition(std::string_view s) {
  if (s == "train") return Partition::train;
  if (s == "dev") return Partition::dev;
  if (s == "test") return Partition::test;
  throw InvalidArgument("unknown partition: " + std::string(s));
}

struct SplitAssignment {
  std::map<std::string, Partition> topics;
  std::uint64_t seed = 0;
  double min_fraction = 0.10;

  Partition partition_of(const std::string& topic) const {
    auto it = topics.find(topic);
    if (it == topics.end()) throw Error("topic not covered by split: '" + topic + "'");
    return it->second;
  }
};

/// Shuffles the topics with a seeded generator, then fills test and dev
/// greedily until each holds at least `min_fraction` of all articles; the
/// remaining topics form the training set.
inline SplitAssignment split_by_topic(std::span<const Article> articles, std::uint64_t seed,
                                      double min_fraction = 0.10) {
  if (!(min_fraction > 0.0 && min_fraction < 0.5)) throw InvalidArgument("min_fraction must lie in (0, 0.5)");
  std::map<std::string, std::size_t> counts;
  for (const auto& a : articles) {
    if (a.topic.empty()) throw InvalidArgument("article '" + a.id + "' has no topic");
    ++counts[a.topic];
  }
  if (counts.size() < 3) throw InvalidArgument("split_by_topic: at least 3 topics required");

  const std::size_t total = articles.size();
  const auto needed = static_cast<std::size_t>(std::ceil(min_fraction * static_cast<double>(total) - 1e-9));

  std::vector<std::string> order;
  order.reserve(counts.size());
  for (const auto& [topic, _] : counts) order.push_back(topic);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitAssignment split;
  split.seed = seed;
  split.min_fraction = min_fraction;

  auto blocking = [&]() {
    auto it = std::max_element(counts.begin(), counts.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
    return Error("cannot satisfy min_fraction " + csv::format_double(min_fraction) + ": topic '" + it->first +
                 "' holds " + std::to_string(it->second) + " of " + std::to_string(total) + " articles");
  };

  std::size_t next = 0;
  for (Partition target : {Partition::test, Partition::dev}) {
    std::size_t filled = 0;
    while (filled < needed) {
      if (next >= order.size()) throw blocking();
      filled += counts[order[next]];
      split.topics[order[next]] = target;
      ++next;
    }
  }
  if (next >= order.size()) throw blocking();
  for (; next < order.size(); ++next) split.topics[order[next]] = Partition::train;
  return split;
}

inline std::string split_to_string(const SplitAssignment& split) {
  nlohmann::ordered_json topics = nlohmann::ordered_json::object();
  for (const auto& [topic, part] : split.topics) topics[topic] = std::string(to_string(part));
  nlohmann::ordered_json j;
  j["seed"] = split.seed;
  j["min_fraction"] = split.min_fraction;
  j["topics"] = std::move(topics);
  return j.dump(2) + "\n";
}

inline SplitAssignment split_from_string(std::string_view text, const std::string& source = "<split>") {
  SplitAssignment split;
  try {
    auto j = nlohmann::json::parse(text);
    split.seed = j.at("seed").get<std::uint64_t>();
    split.min_fraction = j.value("min_fraction", 0.10);
    for (const auto& [topic, part] : j.at("topics").items())
      split.topics[topic] = parse_partition(part.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
  return split;
}

inline SplitAssignment read_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open split file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return split_from_string(ss.str(), path);
}

inline std::vector<Article> select_partition(std::span<const Article> articles, const SplitAssignment& split,
                                             Partition partition) {
  std::vector<Article> out;
  for (const auto& a : articles)
    if (split.partition_of(a.topic) == partition) out.push_back(a);
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct PartitionStats {
  std::size_t articles = 0;
  std::array<std::size_t, 3> positives{};  // indexed by BiasType

  double prevalence(BiasType t) const {
    return articles ? static_cast<double>(positives[static_cast<std::size_t>(t)]) / static_cast<double>(articles) : 0.0;
  }
};

struct CorpusStats {
  std::size_t articles = 0;
  std::map<std::string, std::size_t> portals;
  std::map<std::string, std::size_t> topics;
  std::map<Partition, PartitionStats> partitions;  // filled only when a split is given
};

inline CorpusStats corpus_stats(std::span<const Article> articles, const SplitAssignment* split = nullptr) {
  CorpusStats s;
  s.articles = articles.size();
  for (const auto& a : articles) {
    ++s.portals[a.portal_name];
    ++s.topics[a.topic];
    if (!split) continue;
    auto& p = s.partitions[split->partition_of(a.topic)];
    ++p.articles;
    for (auto t : kAllBiasTypes)
      if (a.labels.get(t)) ++p.positives[static_cast<std::size_t>(t)];
  }
  return s;
}

}  // namespace biaslens
