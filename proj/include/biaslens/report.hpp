#pragma once

// Static heatmap documents for strength reports and the quarter-pattern table.

#include <biaslens/analysis.hpp>
#include <biaslens/csv.hpp>
#include <biaslens/error.hpp>
#include <biaslens/text.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biaslens {

struct HeatmapSpan {
  std::string text;
  double strength = 0.0;
  double color_intensity = 0.0;  // strength / max |strength|, in [-1, 1]
};

struct Heatmap {
  std::string article_id;
  Granularity granularity = Granularity::sentence;
  double p_art = 0.0;
  std::vector<HeatmapSpan> spans;
};

/// Pairs each report segment with its text. Throws InvalidArgument when the
/// report does not cover the article's sentences exactly once, in order.
inline Heatmap build_heatmap(const BiasStrengthReport& report, std::string_view article_text,
                             const Abbreviations& abbrev = default_abbreviations()) {
  Article tmp;
  tmp.id = report.article_id;
  tmp.text = std::string(article_text);
  const auto seg = segment_article(tmp, abbrev);
  if (seg.sentences.size() != report.sentence_count)
    throw InvalidArgument("heatmap: report for '" + report.article_id + "' expects " +
                          std::to_string(report.sentence_count) + " sentences, article has " +
                          std::to_string(seg.sentences.size()));
  std::size_t next = 0;
  for (std::size_t i = 0; i < report.segments.size(); ++i) {
    const auto& s = report.segments[i];
    if (s.index != i || s.sentences.first != next || s.sentences.last <= s.sentences.first)
      throw InvalidArgument("heatmap: segments of '" + report.article_id + "' do not align with the article");
    next = s.sentences.last;
  }
  if (next != seg.sentences.size())
    throw InvalidArgument("heatmap: segments of '" + report.article_id + "' do not cover the article");

  double max_abs = 0.0;
  for (const auto& s : report.segments) max_abs = std::max(max_abs, std::abs(s.strength));

  Heatmap h;
  h.article_id = report.article_id;
  h.granularity = report.granularity;
  h.p_art = report.p_art;
  for (const auto& s : report.segments) {
    HeatmapSpan span;
    for (std::size_t k = s.sentences.first; k < s.sentences.last; ++k) {
      if (!span.text.empty()) span.text += ' ';
      span.text += seg.sentences[k];
    }
    span.strength = s.strength;
    span.color_intensity = max_abs > 0.0 ? s.strength / max_abs : 0.0;
    h.spans.push_back(std::move(span));
  }
  return h;
}

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Diverging scale anchored at white: +1 is pure red, -1 pure blue.
inline std::string background_color(double intensity) {
  const double c = std::clamp(intensity, -1.0, 1.0);
  const auto fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(c))));
  int r = 255, g = 255, b = 255;
  if (c > 0.0) {
    g = b = fade;
  } else if (c < 0.0) {
    r = g = fade;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

inline std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

inline std::string render_heatmap(const Heatmap& h) {
  std::ostringstream out;
  const std::string title = html_escape(h.article_id) + " (" + std::string(to_string(h.granularity)) + ")";
  out << "<!DOCTYPE html>\n"
      << "<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" << title << "</title>\n</head>\n"
      << "<body style=\"font-family:serif;max-width:48em;margin:2em auto;line-height:1.6\">\n"
      << "<h1 style=\"font-size:1.2em\">" << title << "</h1>\n"
      << "<p style=\"font-size:0.9em\">p_art = " << format_fixed(h.p_art) << "; granularity = "
      << to_string(h.granularity)
      << "; <span style=\"background:#ff0000\">&nbsp;&nbsp;</span> raises the biased-class probability, "
      << "<span style=\"background:#0000ff\">&nbsp;&nbsp;</span> lowers it</p>\n";
  const bool block = h.granularity == Granularity::paragraph;
  if (!block) out << "<p>\n";
  for (std::size_t i = 0; i < h.spans.size(); ++i) {
    const auto& s = h.spans[i];
    if (block) out << "<p>";
    out << "<span data-index=\"" << i << "\" title=\"strength " << format_fixed(s.strength)
        << "\" style=\"background:" << background_color(s.color_intensity) << "\">" << html_escape(s.text)
        << "</span>";
    out << (block ? "</p>\n" : "\n");
  }
  if (!block) out << "</p>\n";
  out << "</body>\n</html>\n";
  return out.str();
}

inline std::string render_heatmap(const BiasStrengthReport& report, std::string_view article_text,
                                  const Abbreviations& abbrev = default_abbreviations()) {
  return render_heatmap(build_heatmap(report, article_text, abbrev));
}

// ---------------------------------------------------------------------------
// Pattern table: bias_type,class,quarter,raw_mean,normalized

inline constexpr std::string_view kPatternHeader = "bias_type,class,quarter,raw_mean,normalized";

/// One row per (bias type, class, quarter), ordered by bias type, then biased before unbiased.
inline std::string emit_pattern_table(std::span<const QuartilePattern> patterns) {
  std::vector<QuartilePattern> sorted(patterns.begin(), patterns.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const QuartilePattern& a, const QuartilePattern& b) {
    return std::pair(a.bias_type, a.cls) < std::pair(b.bias_type, b.cls);
  });
  std::string out(kPatternHeader);
  out += '\n';
  for (const auto& p : sorted)
    for (std::size_t q = 0; q < 4; ++q) {
      out += std::string(to_string(p.bias_type)) + ',' + std::string(to_string(p.cls)) + ',' + std::to_string(q + 1) +
             ',' + csv::format_double(p.raw[q]) + ',' + csv::format_double(p.normalized[q]) + '\n';
    }
  return out;
}

inline std::vector<QuartilePattern> parse_pattern_table(std::istream& in, const std::string& source = "<pattern>") {
  std::map<std::pair<BiasType, PatternClass>, std::pair<QuartilePattern, unsigned>> by_key;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    if (header) {
      if (detail::trim(line) != kPatternHeader) throw ParseError(source, lineno, "expected header " + std::string(kPatternHeader));
      header = false;
      continue;
    }
    const auto f = csv::split_line(line, source, lineno);
    if (f.size() != 5) throw ParseError(source, lineno, "expected 5 fields");
    try {
      const BiasType type = parse_bias_type(f[0]);
      const PatternClass cls = parse_pattern_class(f[1]);
      const double quarter = csv::parse_double(f[2], source, lineno);
      if (quarter != 1 && quarter != 2 && quarter != 3 && quarter != 4)
        throw ParseError(source, lineno, "quarter must be 1-4");
      const auto q = static_cast<std::size_t>(quarter) - 1;
      auto& [pattern, seen] = by_key[{type, cls}];
      pattern.bias_type = type;
      pattern.cls = cls;
      if (seen & (1u << q)) throw ParseError(source, lineno, "duplicate quarter");
      seen |= 1u << q;
      pattern.raw[q] = csv::parse_double(f[3], source, lineno);
      pattern.normalized[q] = csv::parse_double(f[4], source, lineno);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  std::vector<QuartilePattern> out;
  for (const auto& [key, entry] : by_key) {
    if (entry.second != 0xF)
      throw ParseError(source, 0, "incomplete quarters for " + std::string(to_string(key.first)) + "/" +
                                      std::string(to_string(key.second)));
    out.push_back(entry.first);
  }
  return out;
}

}  // namespace biaslens
