#include <biaslens/text.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace biaslens;
using Strings = std::vector<std::string>;

TEST(SegmentSentences, SplitsOnTerminalPeriods) {
  EXPECT_EQ(segment_sentences("He won. She lost."), (Strings{"He won.", "She lost."}));
}

TEST(SegmentSentences, EmptyInputIsAnError) {
  EXPECT_THROW(segment_sentences(""), InvalidArgument);
  EXPECT_THROW(segment_sentences(" \n\t "), InvalidArgument);
}

TEST(SegmentSentences, NoBoundaryGivesOneSentence) {
  EXPECT_EQ(segment_sentences("no terminal punctuation here"), (Strings{"no terminal punctuation here"}));
}

// Abbreviation fixtures: expected sentence counts written out by hand.
TEST(SegmentSentences, AbbreviationFixtures) {
  const std::vector<std::pair<std::string, std::size_t>> fixtures = {
      {"Mr. Smith spoke.", 1},
      {"Mrs. Clinton and Dr. Jones met Gov. Brown.", 1},
      {"The U.S. Senate voted. It passed.", 2},
      {"John F. Kennedy spoke in Dallas. Crowds gathered.", 2},
      {"It ended at 5 p.m. Tuesday in Washington, D.C. and nobody left.", 1},
      {"Sen. Warren (D-Mass.) objected. Rep. Ryan did not.", 2},
      {"Prices rose 3.5 percent. Analysts were surprised!", 2},
      {"Really? Yes. \"Absolutely,\" he said.", 3},
      {"He said \"never.\" Then he left.", 2},
      {"lowercase after period. continues the sentence.", 1},
      {"Wait... What happened?", 2},
  };
  for (const auto& [text, count] : fixtures) EXPECT_EQ(segment_sentences(text).size(), count) << text;
}

TEST(SegmentSentences, BlankLinesAlwaysSplit) {
  EXPECT_EQ(segment_sentences("A headline without a period\n\nbody text starts here"),
            (Strings{"A headline without a period", "body text starts here"}));
  EXPECT_EQ(segment_sentences("one line\nstill same sentence").size(), 1u);
}

TEST(SegmentSentences, CustomStopList) {
  std::istringstream in("# comment\nAbbr.\n");
  const auto abbrev = load_abbreviations(in);
  EXPECT_EQ(segment_sentences("See Abbr. Next item.", abbrev).size(), 1u);
  EXPECT_EQ(segment_sentences("See Abbr. Next item.").size(), 2u);
}

TEST(Abbreviations, ShippedListMatchesBuiltIn) {
  std::ifstream in(std::string(BIASLENS_DATA_DIR) + "/abbreviations.txt");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t entries = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++entries;
    EXPECT_TRUE(default_abbreviations().contains(line)) << line;
  }
  EXPECT_EQ(entries, default_abbreviations().size());
}

TEST(Tokenize, SplitsPossessiveAndPunctuation) {
  EXPECT_EQ(tokenize("Trump's claim!"), (Strings{"trump", "'s", "claim", "!"}));
}

TEST(Tokenize, TrivialCases) {
  EXPECT_EQ(tokenize("abc"), (Strings{"abc"}));
  EXPECT_TRUE(tokenize("  ").empty());
}

// Tokenizer fixtures following the clitic and punctuation convention of
// common pre-trained embedding vocabularies.
TEST(Tokenize, Fixtures) {
  const std::vector<std::pair<std::string, Strings>> fixtures = {
      {"I don't know.", {"i", "do", "n't", "know", "."}},
      {"We can't, they won't.", {"we", "ca", "n't", ",", "they", "wo", "n't", "."}},
      {"I'm sure they're here and we've left", {"i", "'m", "sure", "they", "'re", "here", "and", "we", "'ve", "left"}},
      {"U.S. troops left.", {"u.s.", "troops", "left", "."}},
      {"Mr. Smith, 45, said (again).", {"mr.", "smith", ",", "45", ",", "said", "(", "again", ")", "."}},
      {"1,000 people, mostly well-known.", {"1,000", "people", ",", "mostly", "well-known", "."}},
      {"Trump\xE2\x80\x99s \xE2\x80\x9C" "deal\xE2\x80\x9D", {"trump", "'s", "\"", "deal", "\""}},
      {"wait... no -- yes", {"wait", "...", "no", "--", "yes"}},
      {"O'Brien's view", {"o'brien", "'s", "view"}},
      {"players' union", {"players", "'", "union"}},
  };
  for (const auto& [text, expected] : fixtures) EXPECT_EQ(tokenize(text), expected) << text;
}

TEST(TokenizedArticle, FlattenPreservesSequentialOrder) {
  std::mt19937_64 rng(11);
  const Strings pieces = {"The", "senator", "said", "Mr.", "Lee's", "plan", "won't", "work", ".", "!", "?",
                          "\n\n", "U.S.", "\"Quote\"", "It", "failed", "3.5", ","};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text = "Start";
    for (std::size_t k = len(rng); k > 0; --k) text += " " + pieces[pick(rng)];
    Strings sequential;
    for (const auto& s : segment_sentences(text)) {
      auto t = tokenize(s);
      sequential.insert(sequential.end(), t.begin(), t.end());
    }
    const auto art = tokenize_article(text);
    EXPECT_EQ(art.flatten(), sequential) << text;
    std::size_t total = 0;
    for (const auto& s : art.sentences) {
      EXPECT_FALSE(s.empty());
      total += s.size();
    }
    EXPECT_EQ(total, art.token_count);
  }
}

TEST(Paragraphs, ChunksOfThree) {
  EXPECT_EQ(paragraphs(7), (std::vector<SentenceRange>{{0, 3}, {3, 6}, {6, 7}}));
  EXPECT_EQ(paragraphs(3), (std::vector<SentenceRange>{{0, 3}}));
  EXPECT_THROW(paragraphs(0), InvalidArgument);
  const Strings sentences = {"a", "b", "c", "d"};
  EXPECT_EQ(paragraphs(std::span<const std::string>(sentences)).size(), 2u);
}

TEST(Paragraphs, PartitionTheSentenceList) {
  for (std::size_t n = 1; n <= 60; ++n) {
    std::size_t next = 0;
    for (const auto& r : paragraphs(n)) {
      EXPECT_EQ(r.first, next);
      EXPECT_GE(r.size(), 1u);
      EXPECT_LE(r.size(), 3u);
      next = r.last;
    }
    EXPECT_EQ(next, n);
  }
}

namespace {
std::string embedding_line(const std::string& token, std::size_t count, double base) {
  std::string line = token;
  for (std::size_t i = 0; i < count; ++i) line += " " + std::to_string(base + 0.01 * static_cast<double>(i));
  return line;
}
}  // namespace

TEST(Embeddings, DirectReadAndUnknownTokens) {
  std::istringstream in(embedding_line("the", 50, 0.1) + "\n" + embedding_line("news", 50, -0.3) + "\n");
  const auto table = load_embeddings(in);
  EXPECT_EQ(table.dimension(), 50u);
  EXPECT_EQ(table.size(), 2u);
  const auto v = table.lookup("the");
  ASSERT_EQ(v.size(), 50u);
  EXPECT_DOUBLE_EQ(v[0], 0.1);
  EXPECT_DOUBLE_EQ(v[49], 0.1 + 0.49);
  const auto unk = table.lookup("zzzqqq");
  ASSERT_EQ(unk.size(), 50u);
  for (double x : unk) EXPECT_EQ(x, 0.0);
}

TEST(Embeddings, WrongComponentCountReportsLine) {
  std::istringstream in(embedding_line("the", 50, 0.1) + "\n" + embedding_line("bad", 49, 0.1) + "\n");
  try {
    load_embeddings(in, "vectors.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("vectors.txt:2"), std::string::npos);
  }
}

TEST(Embeddings, RejectsUnparsableValues) {
  std::istringstream in("word 0.1 abc\n");
  EXPECT_THROW(load_embeddings(in, "x", 2), ParseError);
  std::istringstream nan_in("word 0.1 nan\n");
  EXPECT_THROW(load_embeddings(nan_in, "x", 2), ParseError);
}

TEST(Embeddings, LookupIsTotal) {
  std::istringstream in(embedding_line("a", 50, 0.5) + "\n");
  const auto table = load_embeddings(in);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> ch(1, 255), len(0, 12);
  for (int i = 0; i < 500; ++i) {
    std::string token;
    for (int k = len(rng); k > 0; --k) token += static_cast<char>(ch(rng));
    const auto v = table.lookup(token);
    ASSERT_EQ(v.size(), 50u);
    for (double x : v) ASSERT_TRUE(std::isfinite(x));
  }
}
