#pragma once

// Sentence segmentation, tokenization, paragraph chunking and embedding lookup.

#include <biaslens/error.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace biaslens {

namespace detail {

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_word_char(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || u == '_' || std::isalnum(u) != 0;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Maps typographic punctuation onto its ASCII counterpart.
inline std::string normalize_punctuation(std::string_view s) {
  static const std::pair<std::string_view, std::string_view> kMap[] = {
      {"\xE2\x80\x98", "'"},   {"\xE2\x80\x99", "'"},   {"\xE2\x80\x9C", "\""},
      {"\xE2\x80\x9D", "\""},  {"\xE2\x80\x93", " -- "}, {"\xE2\x80\x94", " -- "},
      {"\xE2\x80\xA6", "..."},
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool replaced = false;
    if (static_cast<unsigned char>(s[i]) == 0xE2) {
      for (const auto& [from, to] : kMap) {
        if (s.substr(i, from.size()) == from) {
          out += to;
          i += from.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += s[i++];
  }
  return out;
}

}  // namespace detail

/// Case-folded abbreviations (with trailing period) that do not end a sentence.
class Abbreviations {
 public:
  Abbreviations() = default;
  explicit Abbreviations(const std::vector<std::string>& entries) {
    for (const auto& e : entries) insert(e);
  }

  void insert(std::string_view entry) {
    auto t = detail::trim(entry);
    if (t.empty()) return;
    std::string folded = detail::ascii_lower(t);
    if (folded.back() != '.') folded += '.';
    entries_.insert(std::move(folded));
  }

  bool contains(std::string_view word_with_period) const {
    return entries_.count(detail::ascii_lower(word_with_period)) != 0;
  }

  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

/// Built-in stop-list; identical to data/abbreviations.txt.
inline const Abbreviations& default_abbreviations() {
  static const Abbreviations kDefault(std::vector<std::string>{
      "mr.",    "mrs.",  "ms.",   "dr.",   "prof.", "sr.",    "jr.",  "st.",   "gen.",
      "sen.",   "rep.",  "gov.",  "lt.",   "col.",  "sgt.",   "capt.", "cmdr.", "adm.",
      "maj.",   "rev.",  "hon.",  "pres.", "u.s.",  "u.k.",   "u.n.", "e.u.",  "d.c.",
      "a.m.",   "p.m.",  "inc.",  "corp.", "co.",   "ltd.",   "jan.", "feb.",  "mar.",
      "apr.",   "aug.",  "sept.", "sep.",  "oct.",  "nov.",   "dec.", "no.",   "vs.",
      "etc.",   "e.g.",  "i.e.",  "ft.",   "mt.",   "ave.",   "blvd.", "dept.", "est.",
      "approx.", "fig.", "al.",   "ph.d.", "calif.", "fla.",  "mass.", "n.y.",  "wash.",
  });
  return kDefault;
}

/// Reads a stop-list: one abbreviation per line, '#' starts a comment.
inline Abbreviations load_abbreviations(std::istream& in) {
  Abbreviations out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    out.insert(line);
  }
  return out;
}

inline Abbreviations load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open abbreviation list: " + path);
  return load_abbreviations(in);
}

/// Byte range [begin, end) of one sentence inside the source text.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

/// Sentence boundaries as byte offsets. Splits on terminal punctuation
/// (. ! ?) followed by whitespace and an uppercase letter or opening quote,
/// unless the period closes a known abbreviation or a single-letter initial.
/// Blank lines always split. Throws InvalidArgument on blank input.
inline std::vector<TextSpan> sentence_spans(std::string_view text,
                                            const Abbreviations& abbrev = default_abbreviations()) {
  using detail::is_space;
  if (detail::trim(text).empty()) throw InvalidArgument("segment_sentences: empty input");

  std::vector<TextSpan> spans;
  const std::size_t n = text.size();
  std::size_t start = std::string_view::npos;

  auto close = [&](std::size_t end) {
    if (start == std::string_view::npos) return;
    while (end > start && is_space(text[end - 1])) --end;
    if (end > start) spans.push_back({start, end});
    start = std::string_view::npos;
  };

  auto is_closer = [](char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };
  auto opens_sentence = [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) != 0 || c == '"' || c == '\'' || c == '(' ||
           c == '[' || static_cast<unsigned char>(c) == 0xE2;  // typographic quote
  };

  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (is_space(c)) {
      // Blank line: newline, optional horizontal space, newline.
      if (c == '\n') {
        std::size_t j = i + 1;
        while (j < n && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
        if (j < n && text[j] == '\n') {
          close(i);
          i = j + 1;
          continue;
        }
      }
      ++i;
      continue;
    }
    if (start == std::string_view::npos) start = i;

    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
      const bool single_period = (j - i == 1 && c == '.');
      while (j < n && is_closer(text[j])) ++j;
      if (j >= n) {
        i = j;
        continue;
      }
      if (!is_space(text[j])) {
        i = j;
        continue;
      }
      std::size_t k = j;
      while (k < n && is_space(text[k])) ++k;
      if (k >= n || !opens_sentence(text[k])) {
        i = j;
        continue;
      }
      if (single_period) {
        std::size_t w = i;
        while (w > start && !is_space(text[w - 1])) --w;
        std::string_view word = text.substr(w, i + 1 - w);
        while (word.size() > 1 && (word.front() == '(' || word.front() == '"' || word.front() == '\''))
          word.remove_prefix(1);
        const bool initial = word.size() == 2 && std::isupper(static_cast<unsigned char>(word[0]));
        if (initial || abbrev.contains(word)) {
          i = j;
          continue;
        }
      }
      close(j);
      i = j;
      continue;
    }
    ++i;
  }
  close(n);
  return spans;
}

/// Splits text into trimmed sentences in document order.
inline std::vector<std::string> segment_sentences(std::string_view text,
                                                  const Abbreviations& abbrev = default_abbreviations()) {
  std::vector<std::string> out;
  for (const auto& s : sentence_spans(text, abbrev)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

namespace detail {

inline void push_with_contraction(std::string word, std::vector<std::string>& out) {
  if (word.size() > 3 && word.compare(word.size() - 3, 3, "n't") == 0) {
    out.push_back(word.substr(0, word.size() - 3));
    out.emplace_back("n't");
    return;
  }
  auto apos = word.rfind('\'');
  if (apos != std::string::npos && apos > 0) {
    std::string_view suffix = std::string_view(word).substr(apos + 1);
    if (suffix == "s" || suffix == "m" || suffix == "d" || suffix == "ll" || suffix == "re" || suffix == "ve") {
      out.push_back(word.substr(0, apos));
      out.push_back(word.substr(apos));
      return;
    }
  }
  out.push_back(std::move(word));
}

}  // namespace detail

/// Case-folded word tokens. Punctuation becomes separate tokens and clitics
/// split off at the apostrophe ("don't" -> "do" "n't", "Trump's" -> "trump" "'s").
inline std::vector<std::string> tokenize(std::string_view sentence,
                                         const Abbreviations& abbrev = default_abbreviations()) {
  using detail::is_word_char;
  const std::string s = detail::normalize_punctuation(sentence);
  const std::size_t n = s.size();
  std::vector<std::string> out;

  auto is_connector = [&](std::size_t j) {
    const char c = s[j];
    if (j + 1 >= n || !is_word_char(s[j + 1]) || !is_word_char(s[j - 1])) return false;
    if (c == ',') {
      return std::isdigit(static_cast<unsigned char>(s[j - 1])) && std::isdigit(static_cast<unsigned char>(s[j + 1]));
    }
    return c == '-' || c == '.' || c == '\'' || c == '&';
  };

  std::size_t i = 0;
  while (i < n) {
    const char c = s[i];
    if (detail::is_space(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i + 1;
      while (j < n && (is_word_char(s[j]) || is_connector(j))) ++j;
      std::string word = detail::ascii_lower(std::string_view(s).substr(i, j - i));
      if (j < n && s[j] == '.' &&
          (word.find('.') != std::string::npos || abbrev.contains(word + "."))) {
        word += '.';
        ++j;
      }
      detail::push_with_contraction(std::move(word), out);
      i = j;
      continue;
    }
    if (s.compare(i, 3, "...") == 0) {
      out.emplace_back("...");
      i += 3;
      continue;
    }
    if (s.compare(i, 2, "--") == 0) {
      out.emplace_back("--");
      i += 2;
      continue;
    }
    out.emplace_back(1, c);
    ++i;
  }
  return out;
}

/// An article split into tokenized sentences.
struct TokenizedArticle {
  std::vector<std::vector<std::string>> sentences;
  std::size_t token_count = 0;

  std::vector<std::string> flatten() const {
    std::vector<std::string> out;
    out.reserve(token_count);
    for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
};

/// Segments and tokenizes; sentences that yield no tokens are dropped.
inline TokenizedArticle tokenize_article(std::string_view text,
                                         const Abbreviations& abbrev = default_abbreviations()) {
  TokenizedArticle out;
  for (const auto& sentence : segment_sentences(text, abbrev)) {
    auto tokens = tokenize(sentence, abbrev);
    if (tokens.empty()) continue;
    out.token_count += tokens.size();
    out.sentences.push_back(std::move(tokens));
  }
  return out;
}

/// Half-open run of sentence indices [first, last).
struct SentenceRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last - first; }
  friend bool operator==(const SentenceRange&, const SentenceRange&) = default;
};

/// Consecutive disjoint chunks of `chunk` sentences; the final chunk holds the remainder.
inline std::vector<SentenceRange> paragraphs(std::size_t sentence_count, std::size_t chunk = 3) {
  if (sentence_count == 0) throw InvalidArgument("paragraphs: no sentences");
  if (chunk == 0) throw InvalidArgument("paragraphs: chunk size must be positive");
  std::vector<SentenceRange> out;
  for (std::size_t first = 0; first < sentence_count; first += chunk)
    out.push_back({first, std::min(first + chunk, sentence_count)});
  return out;
}

template <typename T>
std::vector<SentenceRange> paragraphs(std::span<const T> sentences, std::size_t chunk = 3) {
  return paragraphs(sentences.size(), chunk);
}

inline constexpr std::size_t kEmbeddingDimension = 50;

/// Immutable-after-load token -> vector table. Unknown tokens map to a zero vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension = kEmbeddingDimension)
      : dimension_(dimension), unk_(dimension, 0.0) {
    if (dimension == 0) throw InvalidArgument("embedding dimension must be positive");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return index_.size(); }

  /// Adds a vector; returns false (and keeps the first) if the token already exists.
  bool add(std::string token, std::span<const double> vec) {
    if (vec.size() != dimension_)
      throw InvalidArgument("embedding for '" + token + "' has " + std::to_string(vec.size()) +
                            " components, expected " + std::to_string(dimension_));
    for (double v : vec)
      if (!std::isfinite(v)) throw InvalidArgument("embedding for '" + token + "' is not finite");
    if (index_.count(token)) return false;
    index_.emplace(std::move(token), data_.size() / dimension_);
    data_.insert(data_.end(), vec.begin(), vec.end());
    return true;
  }

  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  std::span<const double> lookup(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return unk_;
    return std::span<const double>(data_).subspan(it->second * dimension_, dimension_);
  }

  std::span<const double> unk_vector() const noexcept { return unk_; }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> unk_;
};

/// Parses the plain-text `token v1 ... vD` format. Any line with the wrong
/// number of components (or an unparsable value) is a ParseError at that line.
inline EmbeddingTable load_embeddings(std::istream& in, const std::string& source = "<embeddings>",
                                      std::size_t dimension = kEmbeddingDimension) {
  EmbeddingTable table(dimension);
  std::string line;
  std::vector<double> vec;
  vec.reserve(dimension);
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest = detail::trim(line);
    if (rest.empty()) continue;
    auto sp = rest.find_first_of(" \t");
    if (sp == std::string_view::npos) throw ParseError(source, lineno, "expected token followed by values");
    std::string token(rest.substr(0, sp));
    rest.remove_prefix(sp);
    vec.clear();
    while (true) {
      while (!rest.empty() && detail::is_space(rest.front())) rest.remove_prefix(1);
      if (rest.empty()) break;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
      if (ec != std::errc{} || (ptr != rest.data() + rest.size() && !detail::is_space(*ptr)))
        throw ParseError(source, lineno, "unparsable value for token '" + token + "'");
      if (!std::isfinite(v)) throw ParseError(source, lineno, "non-finite value for token '" + token + "'");
      vec.push_back(v);
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
    if (vec.size() != dimension)
      throw ParseError(source, lineno,
                       "expected " + std::to_string(dimension) + " components, found " + std::to_string(vec.size()));
    table.add(std::move(token), vec);
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path, std::size_t dimension = kEmbeddingDimension) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path);
  return load_embeddings(in, path, dimension);
}

}  // namespace biaslens
