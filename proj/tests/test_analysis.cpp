#include <biaslens/analysis.hpp>
#include <biaslens/model.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace biaslens;

namespace {

// p_positive is the share of "bad" tokens, so every ablation has a closed form.
struct ShareModel {
  Prediction predict(const std::vector<std::string>& tokens) const {
    double bad = 0;
    for (const auto& t : tokens) bad += t == "bad";
    const double p = tokens.empty() ? 0.5 : bad / static_cast<double>(tokens.size());
    return Prediction::from_probabilities(1.0 - p, p);
  }
};

struct ConstantModel {
  Prediction predict(const std::vector<std::string>&) const { return Prediction::from_probabilities(0.3, 0.7); }
};

Article make(std::string id, std::string text, bool positive = true) {
  Article a;
  a.id = std::move(id);
  a.text = std::move(text);
  a.labels = {positive, false, positive};
  return a;
}

}  // namespace

TEST(BiasStrength, SentenceAblationClosedForm) {
  // Tokens per sentence: [bad bad .] [good .] [bad good good good .]
  const auto a = make("a", "Bad bad. Good. Bad good good good.");
  const auto r = bias_strength(ShareModel{}, a, Granularity::sentence);
  ASSERT_EQ(r.segments.size(), 3u);
  EXPECT_DOUBLE_EQ(r.p_art, 3.0 / 10.0);
  EXPECT_DOUBLE_EQ(r.segments[0].p_art_minus_i, 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(r.segments[1].p_art_minus_i, 3.0 / 8.0);
  EXPECT_DOUBLE_EQ(r.segments[2].p_art_minus_i, 2.0 / 5.0);
  for (const auto& s : r.segments) EXPECT_DOUBLE_EQ(s.strength, r.p_art - s.p_art_minus_i);
  EXPECT_GT(r.segments[0].strength, 0.0);
  EXPECT_LT(r.segments[2].strength, 0.0);
}

TEST(BiasStrength, ParagraphsAreThreeSentenceChunks) {
  const auto a = make("p", "Bad. Good. Good. Good. Bad.");
  const auto r = bias_strength(ShareModel{}, a, Granularity::paragraph);
  ASSERT_EQ(r.segments.size(), 2u);
  EXPECT_EQ(r.segments[0].sentences, (SentenceRange{0, 3}));
  EXPECT_EQ(r.segments[1].sentences, (SentenceRange{3, 5}));
  EXPECT_DOUBLE_EQ(r.segments[0].p_art_minus_i, 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.segments[1].p_art_minus_i, 1.0 / 6.0);
}

TEST(BiasStrength, SingleSegmentIsUndefined) {
  EXPECT_THROW(bias_strength(ShareModel{}, make("s", "Only one sentence."), Granularity::sentence), InvalidArgument);
  EXPECT_THROW(bias_strength(ShareModel{}, make("t", "One. Two. Three."), Granularity::paragraph), InvalidArgument);
}

TEST(BiasStrength, ConstantModelGivesZeroStrengths) {
  const auto r = bias_strength(ConstantModel{}, make("c", "A b. C d. E f. G h."), Granularity::sentence);
  for (const auto& s : r.segments) EXPECT_EQ(s.strength, 0.0);
}

// Each ablation must see the full article minus exactly one segment.
TEST(BiasStrength, AblationsAreIndependent) {
  struct Recorder {
    std::vector<std::vector<std::string>>* calls;
    Prediction predict(const std::vector<std::string>& tokens) const {
      calls->push_back(tokens);
      return Prediction::from_probabilities(0.5, 0.5);
    }
  };
  std::vector<std::vector<std::string>> calls;
  const auto a = make("r", "One a. Two b. Three c. Four d.");
  bias_strength(Recorder{&calls}, a, Granularity::sentence);
  ASSERT_EQ(calls.size(), 5u);
  EXPECT_EQ(calls[0].size(), 12u);
  const std::vector<std::string> first = {"one", "a", "."};
  for (std::size_t i = 1; i < calls.size(); ++i) EXPECT_EQ(calls[i].size(), 9u);
  EXPECT_EQ(std::vector<std::string>(calls[2].begin(), calls[2].begin() + 3), first);
  EXPECT_NE(std::vector<std::string>(calls[1].begin(), calls[1].begin() + 3), first);
}

TEST(FilterCorrect, KeepsMatchingPredictions) {
  const std::vector<Article> articles = {make("1", "Bad bad.", true), make("2", "Bad bad.", false),
                                         make("3", "Good good.", false)};
  const auto kept = filter_correct(ShareModel{}, articles, BiasType::political_bias);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "1");
  EXPECT_EQ(kept[1].id, "3");
}

TEST(Quartiles, SizesMatchRemainderRuleExhaustively) {
  EXPECT_EQ(quartile_sizes(10), (std::array<std::size_t, 4>{3, 3, 2, 2}));
  for (std::size_t n = 4; n <= 40; ++n) {
    const auto sizes = quartile_sizes(n);
    EXPECT_EQ(sizes[0] + sizes[1] + sizes[2] + sizes[3], n);
    // Oracle: deal sentences round-robin into four bins, then read the bin sizes.
    std::array<std::size_t, 4> dealt{};
    for (std::size_t k = 0; k < n; ++k) ++dealt[k % 4];
    EXPECT_EQ(sizes, dealt) << n;
    for (std::size_t q = 1; q < 4; ++q) EXPECT_LE(sizes[q], sizes[q - 1]);
  }
  EXPECT_THROW(quartile_sizes(3), InvalidArgument);
}

TEST(Quartiles, MeansOverConsecutiveRuns) {
  const std::vector<double> s = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto m = quartile_means(s);
  EXPECT_DOUBLE_EQ(m[0], 2.0);
  EXPECT_DOUBLE_EQ(m[1], 5.0);
  EXPECT_DOUBLE_EQ(m[2], 7.5);
  EXPECT_DOUBLE_EQ(m[3], 9.5);
}

TEST(Normalize, MeanZeroUnitPopulationStd) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 4> v;
    for (double& x : v) x = d(rng) * std::pow(10.0, static_cast<double>(trial % 7) - 3.0);
    const auto z = z_normalize(v);
    double mean = 0, var = 0;
    for (double x : z) mean += x;
    mean /= 4;
    for (double x : z) var += (x - mean) * (x - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(var / 4), 1.0, 1e-9);
  }
  EXPECT_EQ(z_normalize(std::array<double, 4>{2, 2, 2, 2}), (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(Pattern, AggregatesPerClassAndSkipsShort) {
  const std::vector<ArticleStrengths> in = {
      {1, {1, 0, 0, 0}}, {1, {3, 0, 0, 4}}, {0, {0, 0, 1, 1, 1, 1, 1, 1}}, {0, {1, 2}}};
  const auto r = quartile_pattern(in, BiasType::unfairness);
  EXPECT_EQ(r.skipped_short, 1u);
  EXPECT_EQ(r.biased.articles, 2u);
  EXPECT_EQ(r.unbiased.articles, 1u);
  EXPECT_EQ(r.biased.raw, (std::array<double, 4>{2, 0, 0, 2}));
  EXPECT_EQ(r.unbiased.raw, (std::array<double, 4>{0, 1, 1, 1}));
  EXPECT_EQ(r.biased.normalized, (std::array<double, 4>{1, -1, -1, 1}));
  EXPECT_EQ(r.biased.bias_type, BiasType::unfairness);
}

TEST(Pattern, PerBiasTypeScopeNormalizesJointly) {
  const std::vector<ArticleStrengths> in = {{1, {4, 4, 4, 4}}, {0, {0, 0, 0, 0}}};
  const auto per_curve = quartile_pattern(in, BiasType::political_bias, NormalizationScope::per_curve);
  EXPECT_EQ(per_curve.biased.normalized, (std::array<double, 4>{0, 0, 0, 0}));
  const auto joint = quartile_pattern(in, BiasType::political_bias, NormalizationScope::per_bias_type);
  EXPECT_EQ(joint.biased.normalized, (std::array<double, 4>{1, 1, 1, 1}));
  EXPECT_EQ(joint.unbiased.normalized, (std::array<double, 4>{-1, -1, -1, -1}));
}

TEST(Pattern, ZeroModelDegeneratesToZeros) {
  auto table = std::make_shared<EmbeddingTable>(50);
  const Classifier zero(GruParams::zeros({50, 8}), table);
  const std::vector<Article> articles = {make("1", "A b. C d. E f. G h. I j.", true),
                                         make("2", "K l. M n. O p. Q r.", false)};
  const auto r = quartile_pattern(zero, articles, BiasType::political_bias);
  EXPECT_EQ(r.biased.raw, (std::array<double, 4>{0, 0, 0, 0}));
  EXPECT_EQ(r.biased.normalized, (std::array<double, 4>{0, 0, 0, 0}));
  EXPECT_EQ(r.unbiased.normalized, (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(StrengthReports, JsonLinesRoundTrip) {
  const auto r = bias_strength(ShareModel{}, make("x", "Bad bad. Good. Bad good good good."), Granularity::sentence);
  std::stringstream io;
  io << to_json(r).dump() << "\n\n" << to_json(r).dump() << "\n";
  const auto back = read_strength_reports(io);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].article_id, "x");
  EXPECT_EQ(back[1].sentence_count, 3u);
  ASSERT_EQ(back[1].segments.size(), 3u);
  EXPECT_EQ(back[1].segments[2].strength, r.segments[2].strength);
  std::istringstream bad("{\"article_id\":1}\n");
  EXPECT_THROW(read_strength_reports(bad), ParseError);
}

// A paragraph ablation removes exactly the sentences its member sentence ablations remove.
TEST(BiasStrength, ParagraphRemovesUnionOfItsSentences) {
  struct Recorder {
    std::vector<std::vector<std::string>>* calls;
    Prediction predict(const std::vector<std::string>& tokens) const {
      calls->push_back(tokens);
      return Prediction::from_probabilities(0.5, 0.5);
    }
  };
  const auto a = make("u", "S0 w. S1 w. S2 w. S3 w. S4 w. S5 w. S6 w.");
  std::vector<std::vector<std::string>> calls;
  const auto r = bias_strength(Recorder{&calls}, a, Granularity::paragraph);
  ASSERT_EQ(r.segments.size(), 3u);
  for (std::size_t p = 0; p < r.segments.size(); ++p) {
    std::vector<std::string> expected;
    for (std::size_t s = 0; s < 7; ++s) {
      if (s >= r.segments[p].sentences.first && s < r.segments[p].sentences.last) continue;
      for (const auto& t : {"s" + std::to_string(s), std::string("w"), std::string(".")}) expected.push_back(t);
    }
    EXPECT_EQ(calls[p + 1], expected) << p;
  }
}
