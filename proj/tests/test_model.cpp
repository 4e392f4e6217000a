#include <biaslens/model.hpp>
#include <biaslens/synthetic.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace biaslens;

TEST(GruCell, MatchesScalarReference) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelShape shape{5, 4};
    const auto p = oracle::random_params(shape, rng, 0.5);
    std::vector<double> x(5), h(4);
    for (double& v : x) v = d(rng);
    for (double& v : h) v = std::tanh(d(rng));
    const auto got = gru_cell(x, h, p);
    const auto want = oracle::gru_cell(x, h, p);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t j = 0; j < got.size(); ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
  }
}

TEST(GruCell, ZeroParametersKeepStateAtHalfInterpolation) {
  // z = 0.5 and c = 0, so h' = h / 2.
  const auto p = GruParams::zeros({3, 2});
  const std::vector<double> x = {1.0, -2.0, 0.5}, h = {0.4, -0.8};
  const auto out = gru_cell(x, h, p);
  EXPECT_DOUBLE_EQ(out[0], 0.2);
  EXPECT_DOUBLE_EQ(out[1], -0.4);
}

TEST(GruCell, RejectsBadShapesAndNonFinite) {
  const auto p = GruParams::zeros({3, 2});
  EXPECT_THROW(gru_cell(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}, p), InvalidArgument);
  EXPECT_THROW(gru_cell(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{0.0}, p), InvalidArgument);
  EXPECT_ANY_THROW(gru_cell(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN(), 3.0},
                            std::vector<double>{0.0, 0.0}, p));
}

TEST(Forward, ZeroParametersGiveUniformDistribution) {
  std::mt19937_64 rng(2);
  const auto p = GruParams::zeros({50, 32});
  const auto ex = oracle::random_sequence(12, 50, 1, rng);
  const auto pred = forward_embedded(ex.inputs, ex.length, p);
  EXPECT_DOUBLE_EQ(pred.probabilities[0], 0.5);
  EXPECT_DOUBLE_EQ(pred.probabilities[1], 0.5);
  EXPECT_EQ(pred.label, 0);
}

TEST(Forward, LossMatchesScalarReference) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = oracle::random_params({6, 4}, rng, 0.6);
    std::vector<SequenceExample> batch;
    for (int k = 0; k < 3; ++k) batch.push_back(oracle::random_sequence(1 + rng() % 7, 6, k % 2, rng));
    EXPECT_NEAR(loss_and_grads(batch, p).loss, oracle::batch_loss(batch, p), 1e-12);
    for (const auto& ex : batch) {
      const auto pred = forward_embedded(ex.inputs, ex.length, p);
      EXPECT_NEAR(-std::log(pred.probabilities[static_cast<std::size_t>(ex.label)]), oracle::sequence_loss(ex, p), 1e-12);
    }
  }
}

TEST(Forward, TruncatesToLeadingTokens) {
  auto table = std::make_shared<EmbeddingTable>(4);
  table->add("a", std::vector<double>{1, 0, 0, 0});
  table->add("b", std::vector<double>{0, 1, 0, 0});
  std::mt19937_64 rng(4);
  const auto p = oracle::random_params({4, 3}, rng, 0.5);
  const std::vector<std::string> long_seq = {"a", "b", "a", "b", "b", "b"};
  const std::vector<std::string> head = {"a", "b", "a"};
  EXPECT_EQ(forward(long_seq, *table, p, 3).probabilities, forward(head, *table, p, 3).probabilities);
  EXPECT_THROW(forward(std::vector<std::string>{}, *table, p), InvalidArgument);
}

TEST(Gradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelShape shape{3, 4};
    const auto p = oracle::random_params(shape, rng, 0.5);
    std::vector<SequenceExample> batch;
    for (int k = 0; k < 2; ++k) batch.push_back(oracle::random_sequence(1 + rng() % 8, 3, (trial + k) % 2, rng));
    const auto analytic = loss_and_grads(batch, p).grads;
    const auto numeric = oracle::finite_difference_grads(batch, p);
    EXPECT_LT(oracle::max_relative_error(analytic, numeric), 1e-4) << "trial " << trial;
  }
}

TEST(Gradients, NonFiniteInputNamesExample) {
  auto p = GruParams::zeros({2, 2});
  SequenceExample ex{"bad-article", {1.0, std::numeric_limits<double>::infinity()}, 1, 1};
  try {
    loss_and_grads(std::vector<SequenceExample>{ex}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad-article"), std::string::npos) << e.what();
  }
}

// Scalar Adam written from the update rule, three steps with changing gradients.
TEST(Adam, MatchesScalarReference) {
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  std::vector<double> params = {0.5, -1.0, 2.0};
  std::vector<double> m(3, 0.0), v(3, 0.0);
  std::vector<double> ref = params, rm(3, 0.0), rv(3, 0.0);
  const std::vector<std::vector<double>> grads = {{0.1, -0.2, 0.0}, {0.3, 0.1, -5.0}, {-0.4, 0.0, 1e-3}};
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    adam_update(params, grads[t - 1], m, v, t, cfg);
    for (std::size_t i = 0; i < 3; ++i) {
      const double g = grads[t - 1][i];
      rm[i] = 0.9 * rm[i] + 0.1 * g;
      rv[i] = 0.999 * rv[i] + 0.001 * g * g;
      const double mh = rm[i] / (1.0 - std::pow(0.9, static_cast<double>(t)));
      const double vh = rv[i] / (1.0 - std::pow(0.999, static_cast<double>(t)));
      ref[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(params[i], ref[i], 1e-15);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update has magnitude lr for any nonzero gradient.
  std::vector<double> params = {1.0, 1.0}, m(2, 0.0), v(2, 0.0);
  adam_update(params, std::vector<double>{3.0, -1e-4}, m, v, 1, AdamConfig{});
  EXPECT_NEAR(params[0], 1.0 - 0.001, 1e-9);
  EXPECT_NEAR(params[1], 1.0 + 0.001, 1e-7);
  EXPECT_THROW(adam_update(params, std::vector<double>{1.0}, m, v, 1, AdamConfig{}), InvalidArgument);
}

TEST(Initialization, UniformWithinRangeAndSeeded) {
  const auto a = initialize_params({50, 32}, 9, 0.08);
  const auto b = initialize_params({50, 32}, 9, 0.08);
  const auto c = initialize_params({50, 32}, 10, 0.08);
  EXPECT_EQ(a.input_update.data, b.input_update.data);
  EXPECT_NE(a.input_update.data, c.input_update.data);
  double lo = 1.0, hi = -1.0;
  for (const Tensor* t : a.tensors())
    for (double v : t->data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  EXPECT_GE(lo, -0.08);
  EXPECT_LE(hi, 0.08);
  EXPECT_LT(lo, -0.07);
  EXPECT_GT(hi, 0.07);
  EXPECT_EQ(a.parameter_count(), 3u * 50 * 32 + 3u * 32 * 32 + 3u * 32 + 32u * 2 + 2u);
}

namespace {
struct SmallTask {
  synthetic::Config cfg;
  std::shared_ptr<EmbeddingTable> table;
  std::vector<SequenceExample> train, dev;
};

SmallTask small_task() {
  SmallTask t;
  t.cfg.articles_per_class = 40;
  t.cfg.seed = 3;
  t.table = synthetic::embeddings(t.cfg);
  auto articles = synthetic::corpus(t.cfg);
  auto examples = make_examples(articles, *t.table, BiasType::political_bias);
  for (std::size_t i = 0; i < examples.size(); ++i) (i % 5 == 4 ? t.dev : t.train).push_back(examples[i]);
  return t;
}
}  // namespace

TEST(Train, DeterministicForFixedSeed) {
  const auto task = small_task();
  TrainConfig cfg;
  cfg.max_epochs = 3;
  const auto a = train(task.train, task.dev, cfg);
  const auto b = train(task.train, task.dev, cfg);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
  EXPECT_EQ(a.params.output_weight.data, b.params.output_weight.data);
}

TEST(Train, EarlyStoppingKeepsBestEpoch) {
  const auto task = small_task();
  TrainConfig cfg;
  cfg.max_epochs = 40;
  cfg.patience = 2;
  const auto r = train(task.train, task.dev, cfg);
  ASSERT_FALSE(r.log.empty());
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& rec : r.log)
    if (rec.dev_macro_f1 > best) {
      best = rec.dev_macro_f1;
      best_epoch = rec.epoch;
    }
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_DOUBLE_EQ(r.best_dev_macro_f1, best);
  if (r.log.size() < cfg.max_epochs) {
    // Stopped early: exactly patience + 1 non-improving epochs after the best.
    EXPECT_EQ(r.log.size(), best_epoch + cfg.patience + 1);
  }
  std::vector<int> truth, pred;
  for (const auto& ex : task.dev) {
    truth.push_back(ex.label);
    pred.push_back(predict_label(ex, r.params));
  }
  EXPECT_DOUBLE_EQ(evaluate_predictions(truth, pred).macro_f1, r.best_dev_macro_f1);
}

TEST(Train, SingleClassDevWarns) {
  auto task = small_task();
  std::vector<SequenceExample> dev;
  for (const auto& ex : task.dev)
    if (ex.label == 1) dev.push_back(ex);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  EXPECT_FALSE(train(task.train, dev, cfg).warnings.empty());
  EXPECT_THROW(train(task.train, std::vector<SequenceExample>{}, cfg), InvalidArgument);
}

TEST(Classifier, SatisfiesPredictorAndChecksDimension) {
  static_assert(Predictor<Classifier>);
  auto table = std::make_shared<EmbeddingTable>(4);
  table->add("x", std::vector<double>{1, 2, 3, 4});
  EXPECT_THROW(Classifier(GruParams::zeros({50, 8}), table), InvalidArgument);
  const Classifier c(GruParams::zeros({4, 8}), table);
  EXPECT_DOUBLE_EQ(c.predict({"x", "unknown"}).p_positive, 0.5);
}

TEST(Checkpoint, RoundTripIsExact) {
  std::mt19937_64 rng(6);
  Checkpoint ck;
  ck.target = BiasType::unfairness;
  ck.embeddings_path = "/data/glove.6B.50d.txt";
  ck.config.seed = 77;
  ck.config.hidden = 5;
  ck.params = oracle::random_params({7, 5}, rng, 1.0);
  ck.history = {{1, 0.69, 0.4, true}, {2, 0.5, 0.35, false}};
  ck.best_epoch = 1;
  const std::string text = checkpoint_to_string(ck);
  const auto back = checkpoint_from_string(text);
  EXPECT_EQ(back.target, BiasType::unfairness);
  EXPECT_EQ(back.embeddings_path, ck.embeddings_path);
  EXPECT_EQ(back.config.seed, 77u);
  EXPECT_EQ(back.best_epoch, 1u);
  ASSERT_EQ(back.history.size(), 2u);
  EXPECT_FALSE(back.history[1].improved);
  auto a = ck.params.tensors();
  auto b = back.params.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k]->data, b[k]->data);
  EXPECT_EQ(checkpoint_to_string(back), text);

  const auto path = std::filesystem::temp_directory_path() / "biaslens_ck_test.json";
  save_checkpoint(ck, path.string());
  EXPECT_EQ(checkpoint_to_string(load_checkpoint(path.string())), text);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsMalformed) {
  EXPECT_THROW(checkpoint_from_string("{"), ParseError);
  EXPECT_THROW(checkpoint_from_string(R"({"format":"other"})"), ParseError);
  auto ck = Checkpoint{};
  ck.params = GruParams::zeros({3, 2});
  auto text = checkpoint_to_string(ck);
  const auto pos = text.find("\"rows\": 3");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "\"rows\": 4");
  EXPECT_THROW(checkpoint_from_string(text), ParseError);
}

TEST(Forward, SoftmaxIsValidDistribution) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_params({4, 3}, rng, 4.0);
    const auto ex = oracle::random_sequence(1 + rng() % 10, 4, 0, rng);
    const auto pred = forward_embedded(ex.inputs, ex.length, p);
    EXPECT_GE(pred.probabilities[0], 0.0);
    EXPECT_GE(pred.probabilities[1], 0.0);
    EXPECT_NEAR(pred.probabilities[0] + pred.probabilities[1], 1.0, 1e-9);
    EXPECT_EQ(pred.p_positive, pred.probabilities[1]);
  }
}
