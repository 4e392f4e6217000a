#pragma once

// Single-layer GRU classifier: forward pass, backpropagation through time,
// Adam, early-stopped training and checkpoint files.

#include <biaslens/corpus.hpp>
#include <biaslens/error.hpp>
#include <biaslens/eval.hpp>
#include <biaslens/prediction.hpp>
#include <biaslens/text.hpp>

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace biaslens {

/// Row-major dense matrix of doubles. Vectors are 1 x n.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Tensor& o) const noexcept { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct ModelShape {
  std::size_t input = kEmbeddingDimension;
  std::size_t hidden = 32;
  static constexpr std::size_t output = 2;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// GRU gates (update, reset, candidate), each with input weights
/// (input x hidden), recurrent weights (hidden x hidden) and a bias, followed
/// by a hidden x 2 output layer.
struct GruParams {
  Tensor input_update, input_reset, input_candidate;
  Tensor recurrent_update, recurrent_reset, recurrent_candidate;
  Tensor bias_update, bias_reset, bias_candidate;
  Tensor output_weight, output_bias;

  static constexpr std::size_t kTensorCount = 11;
  static constexpr std::array<std::string_view, kTensorCount> kNames = {
      "input_update",        "input_reset",  "input_candidate", "recurrent_update",
      "recurrent_reset",     "recurrent_candidate", "bias_update", "bias_reset",
      "bias_candidate",      "output_weight", "output_bias",
  };

  static GruParams zeros(ModelShape shape) {
    GruParams p;
    const auto in = shape.input, h = shape.hidden, out = ModelShape::output;
    p.input_update = p.input_reset = p.input_candidate = Tensor(in, h);
    p.recurrent_update = p.recurrent_reset = p.recurrent_candidate = Tensor(h, h);
    p.bias_update = p.bias_reset = p.bias_candidate = Tensor(1, h);
    p.output_weight = Tensor(h, out);
    p.output_bias = Tensor(1, out);
    return p;
  }

  ModelShape shape() const noexcept { return {input_update.rows, input_update.cols}; }

  std::array<Tensor*, kTensorCount> tensors() {
    return {&input_update,   &input_reset,     &input_candidate, &recurrent_update,
            &recurrent_reset, &recurrent_candidate, &bias_update, &bias_reset,
            &bias_candidate, &output_weight,   &output_bias};
  }
  std::array<const Tensor*, kTensorCount> tensors() const {
    return {&input_update,   &input_reset,     &input_candidate, &recurrent_update,
            &recurrent_reset, &recurrent_candidate, &bias_update, &bias_reset,
            &bias_candidate, &output_weight,   &output_bias};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* t : tensors()) n += t->size();
    return n;
  }

  /// Checks every tensor against `shape` and that all entries are finite.
  void validate() const {
    const GruParams expected = zeros(shape());
    auto mine = tensors();
    auto ref = expected.tensors();
    for (std::size_t i = 0; i < kTensorCount; ++i) {
      if (!mine[i]->same_shape(*ref[i]))
        throw InvalidArgument("parameter '" + std::string(kNames[i]) + "' has wrong shape");
      for (double v : mine[i]->data)
        if (!std::isfinite(v)) throw InvalidArgument("parameter '" + std::string(kNames[i]) + "' is not finite");
    }
  }

  friend bool operator==(const GruParams&, const GruParams&) = default;
};

namespace detail {

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// acc[j] += sum_i v[i] * m(i, j)
inline void add_transposed_product(std::span<double> acc, const Tensor& m, std::span<const double> v) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const double* row = m.data.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) acc[j] += vi * row[j];
  }
}

// acc[i] += sum_j m(i, j) * v[j]
inline void add_product(std::span<double> acc, const Tensor& m, std::span<const double> v) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + i * m.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * v[j];
    acc[i] += s;
  }
}

// m(i, j) += a[i] * b[j]
inline void add_outer(Tensor& m, std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    double* row = m.data.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) row[j] += ai * b[j];
  }
}

inline void add_to(Tensor& m, std::span<const double> v) {
  for (std::size_t j = 0; j < m.data.size(); ++j) m.data[j] += v[j];
}

struct GateValues {
  std::vector<double> update, reset, candidate, hidden;
};

inline GateValues gru_step(std::span<const double> x, std::span<const double> h_prev, const GruParams& p) {
  const std::size_t H = p.shape().hidden;
  GateValues g;
  g.update.assign(p.bias_update.data.begin(), p.bias_update.data.end());
  g.reset.assign(p.bias_reset.data.begin(), p.bias_reset.data.end());
  g.candidate.assign(p.bias_candidate.data.begin(), p.bias_candidate.data.end());
  add_transposed_product(g.update, p.input_update, x);
  add_transposed_product(g.update, p.recurrent_update, h_prev);
  add_transposed_product(g.reset, p.input_reset, x);
  add_transposed_product(g.reset, p.recurrent_reset, h_prev);
  for (std::size_t j = 0; j < H; ++j) {
    g.update[j] = sigmoid(g.update[j]);
    g.reset[j] = sigmoid(g.reset[j]);
  }
  std::vector<double> gated(H);
  for (std::size_t j = 0; j < H; ++j) gated[j] = g.reset[j] * h_prev[j];
  add_transposed_product(g.candidate, p.input_candidate, x);
  add_transposed_product(g.candidate, p.recurrent_candidate, gated);
  g.hidden.resize(H);
  for (std::size_t j = 0; j < H; ++j) {
    g.candidate[j] = std::tanh(g.candidate[j]);
    g.hidden[j] = (1.0 - g.update[j]) * h_prev[j] + g.update[j] * g.candidate[j];
  }
  return g;
}

inline std::array<double, 2> output_logits(std::span<const double> h, const GruParams& p) {
  std::array<double, 2> logits{p.output_bias.data[0], p.output_bias.data[1]};
  add_transposed_product(logits, p.output_weight, h);
  return logits;
}

inline void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contains a non-finite value");
}

}  // namespace detail

/// One GRU transition:
///   z = sigmoid(Wz'x + Uz'h + bz), r = sigmoid(Wr'x + Ur'h + br),
///   c = tanh(Wc'x + Uc'(r*h) + bc), h' = (1 - z)*h + z*c.
inline std::vector<double> gru_cell(std::span<const double> x, std::span<const double> h_prev, const GruParams& p) {
  const ModelShape s = p.shape();
  if (x.size() != s.input || h_prev.size() != s.hidden) throw InvalidArgument("gru_cell: shape mismatch");
  detail::require_finite(x, "gru_cell input");
  detail::require_finite(h_prev, "gru_cell state");
  return detail::gru_step(x, h_prev, p).hidden;
}

inline Prediction softmax_prediction(const std::array<double, 2>& logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m), e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  return Prediction::from_probabilities(e0 / z, e1 / z);
}

/// Embedded sequence (length x input, row-major) and its target.
struct SequenceExample {
  std::string id;
  std::vector<double> inputs;
  std::size_t length = 0;
  int label = 0;
};

inline constexpr std::size_t kDefaultMaxSequenceLength = 1000;

/// Embeds the first `max_length` tokens.
inline std::vector<double> embed(std::span<const std::string> tokens, const EmbeddingTable& table,
                                 std::size_t max_length = kDefaultMaxSequenceLength) {
  const std::size_t len = std::min(tokens.size(), max_length);
  std::vector<double> out;
  out.reserve(len * table.dimension());
  for (std::size_t t = 0; t < len; ++t) {
    auto v = table.lookup(tokens[t]);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

/// Runs the recurrence over an embedded sequence and returns the class distribution.
inline Prediction forward_embedded(std::span<const double> inputs, std::size_t length, const GruParams& p) {
  const ModelShape s = p.shape();
  if (length == 0) throw InvalidArgument("forward: empty sequence");
  if (inputs.size() != length * s.input) throw InvalidArgument("forward: input size mismatch");
  std::vector<double> h(s.hidden, 0.0);
  for (std::size_t t = 0; t < length; ++t) h = detail::gru_step(inputs.subspan(t * s.input, s.input), h, p).hidden;
  return softmax_prediction(detail::output_logits(h, p));
}

/// Embeds `tokens` (truncated to `max_length`, keeping the beginning) and classifies them.
inline Prediction forward(std::span<const std::string> tokens, const EmbeddingTable& table, const GruParams& p,
                          std::size_t max_length = kDefaultMaxSequenceLength) {
  if (table.dimension() != p.shape().input) throw InvalidArgument("forward: embedding dimension mismatch");
  const std::size_t len = std::min(tokens.size(), max_length);
  if (len == 0) throw InvalidArgument("forward: empty sequence");
  const auto inputs = embed(tokens, table, max_length);
  return forward_embedded(inputs, len, p);
}

struct LossAndGrads {
  double loss = 0.0;
  GruParams grads;
};

/// Mean cross-entropy over the batch and its exact gradient by backpropagation through time.
inline LossAndGrads loss_and_grads(std::span<const SequenceExample> batch, const GruParams& p) {
  if (batch.empty()) throw InvalidArgument("loss_and_grads: empty batch");
  const ModelShape s = p.shape();
  const std::size_t H = s.hidden, D = s.input;
  LossAndGrads out{0.0, GruParams::zeros(s)};
  GruParams& g = out.grads;

  std::vector<detail::GateValues> steps;
  std::vector<double> zeros(H, 0.0), dh(H), dh_prev(H), d_update(H), d_reset(H), d_cand(H), d_gated(H), gated(H);

  for (const auto& ex : batch) {
    if (ex.length == 0) throw InvalidArgument("loss_and_grads: empty sequence in '" + ex.id + "'");
    if (ex.inputs.size() != ex.length * D) throw InvalidArgument("loss_and_grads: input size mismatch in '" + ex.id + "'");
    std::span<const double> inputs(ex.inputs);

    steps.clear();
    steps.reserve(ex.length);
    for (std::size_t t = 0; t < ex.length; ++t) {
      std::span<const double> h_prev = t == 0 ? std::span<const double>(zeros) : std::span<const double>(steps.back().hidden);
      steps.push_back(detail::gru_step(inputs.subspan(t * D, D), h_prev, p));
    }
    const auto& h_last = steps.back().hidden;
    const auto logits = detail::output_logits(h_last, p);
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    const double loss = lse - logits[static_cast<std::size_t>(ex.label)];
    if (!std::isfinite(loss)) throw Error("non-finite loss for article '" + ex.id + "'");
    out.loss += loss;

    std::array<double, 2> d_logits{std::exp(logits[0] - lse), std::exp(logits[1] - lse)};
    d_logits[static_cast<std::size_t>(ex.label)] -= 1.0;
    detail::add_outer(g.output_weight, h_last, d_logits);
    detail::add_to(g.output_bias, d_logits);
    std::fill(dh.begin(), dh.end(), 0.0);
    detail::add_product(dh, p.output_weight, d_logits);

    for (std::size_t t = ex.length; t-- > 0;) {
      const auto& st = steps[t];
      std::span<const double> h_prev = t == 0 ? std::span<const double>(zeros) : std::span<const double>(steps[t - 1].hidden);
      std::span<const double> x = inputs.subspan(t * D, D);

      for (std::size_t j = 0; j < H; ++j) {
        const double z = st.update[j], c = st.candidate[j];
        d_update[j] = dh[j] * (c - h_prev[j]) * z * (1.0 - z);
        d_cand[j] = dh[j] * z * (1.0 - c * c);
        dh_prev[j] = dh[j] * (1.0 - z);
        gated[j] = st.reset[j] * h_prev[j];
      }

      detail::add_outer(g.input_candidate, x, d_cand);
      detail::add_outer(g.recurrent_candidate, gated, d_cand);
      detail::add_to(g.bias_candidate, d_cand);
      std::fill(d_gated.begin(), d_gated.end(), 0.0);
      detail::add_product(d_gated, p.recurrent_candidate, d_cand);
      for (std::size_t j = 0; j < H; ++j) {
        const double r = st.reset[j];
        d_reset[j] = d_gated[j] * h_prev[j] * r * (1.0 - r);
        dh_prev[j] += d_gated[j] * r;
      }

      detail::add_outer(g.input_update, x, d_update);
      detail::add_outer(g.recurrent_update, h_prev, d_update);
      detail::add_to(g.bias_update, d_update);
      detail::add_outer(g.input_reset, x, d_reset);
      detail::add_outer(g.recurrent_reset, h_prev, d_reset);
      detail::add_to(g.bias_reset, d_reset);
      detail::add_product(dh_prev, p.recurrent_update, d_update);
      detail::add_product(dh_prev, p.recurrent_reset, d_reset);

      std::swap(dh, dh_prev);
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  out.loss *= scale;
  for (Tensor* t : g.tensors())
    for (double& v : t->data) v *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// In-place bias-corrected Adam update of one flat parameter block. `step` is
/// the 1-based step number after incrementing.
inline void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                        std::span<double> v, std::uint64_t step, const AdamConfig& cfg) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size())
    throw InvalidArgument("adam: shape mismatch");
  if (step == 0) throw InvalidArgument("adam: step must be positive");
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double gi = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

/// First and second moment accumulators mirroring a parameter set.
struct AdamState {
  GruParams m;
  GruParams v;
  std::uint64_t step_count = 0;
  AdamConfig config;

  explicit AdamState(ModelShape shape, AdamConfig cfg = {})
      : m(GruParams::zeros(shape)), v(GruParams::zeros(shape)), config(cfg) {}
};

/// Advances `state` by one step and applies the update to `params`.
inline void adam_step(GruParams& params, const GruParams& grads, AdamState& state) {
  if (params.shape() != grads.shape() || params.shape() != state.m.shape())
    throw InvalidArgument("adam_step: shape mismatch");
  ++state.step_count;
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < GruParams::kTensorCount; ++i)
    adam_update(p[i]->data, g[i]->data, m[i]->data, v[i]->data, state.step_count, state.config);
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  std::size_t patience = 3;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double init_range = 0.08;
  std::size_t hidden = 32;
  std::size_t max_sequence_length = kDefaultMaxSequenceLength;

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_macro_f1 = 0.0;
  bool improved = false;
};

struct TrainResult {
  GruParams params;  // best-dev checkpoint
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_dev_macro_f1 = 0.0;
  std::vector<std::string> warnings;
};

/// Uniform initialization in [-range, range], tensors filled in declaration order.
inline GruParams initialize_params(ModelShape shape, std::uint64_t seed, double range) {
  GruParams p = GruParams::zeros(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-range, range);
  for (Tensor* t : p.tensors())
    for (double& v : t->data) v = dist(rng);
  return p;
}

inline int predict_label(const SequenceExample& ex, const GruParams& p) {
  return forward_embedded(ex.inputs, ex.length, p).label;
}

/// Mini-batch Adam with dev macro-F1 early stopping. Training stops once
/// `patience` + 1 consecutive epochs fail to improve the best dev score, or
/// after `max_epochs`; the best-scoring parameters are returned.
inline TrainResult train(std::span<const SequenceExample> train_set, std::span<const SequenceExample> dev_set,
                         const TrainConfig& cfg, std::size_t input_dimension = kEmbeddingDimension) {
  if (train_set.empty() || dev_set.empty()) throw InvalidArgument("train: empty training or development set");
  if (cfg.batch_size == 0 || cfg.max_epochs == 0) throw InvalidArgument("train: batch size and epochs must be positive");

  TrainResult result;
  std::vector<int> dev_truth;
  for (const auto& ex : dev_set) dev_truth.push_back(ex.label);
  if (std::all_of(dev_truth.begin(), dev_truth.end(), [&](int l) { return l == dev_truth.front(); }))
    result.warnings.push_back("development set contains a single class; macro-F1 is degenerate");

  const ModelShape shape{input_dimension, cfg.hidden};
  GruParams params = initialize_params(shape, cfg.seed, cfg.init_range);
  AdamState adam(shape, cfg.adam());
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<SequenceExample> batch;
  double best = -1.0;
  std::size_t stale = 0;
  result.params = params;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      for (std::size_t k = start; k < std::min(start + cfg.batch_size, order.size()); ++k)
        batch.push_back(train_set[order[k]]);
      auto lg = loss_and_grads(batch, params);
      adam_step(params, lg.grads, adam);
      loss_sum += lg.loss;
      ++batches;
    }

    std::vector<int> predicted;
    predicted.reserve(dev_set.size());
    for (const auto& ex : dev_set) predicted.push_back(predict_label(ex, params));
    const double dev_f1 = evaluate_predictions(dev_truth, predicted).macro_f1;

    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), dev_f1, dev_f1 > best};
    result.log.push_back(rec);
    if (rec.improved) {
      best = dev_f1;
      stale = 0;
      result.params = params;
      result.best_epoch = epoch;
      result.best_dev_macro_f1 = dev_f1;
    } else if (++stale > cfg.patience) {
      break;
    }
  }
  return result;
}

/// Tokenizes, truncates and embeds an article for one target label.
inline SequenceExample make_example(const Article& a, const EmbeddingTable& table, BiasType target,
                                    std::size_t max_length = kDefaultMaxSequenceLength,
                                    const Abbreviations& abbrev = default_abbreviations()) {
  const auto tokens = tokenize_article(a.text, abbrev).flatten();
  SequenceExample ex;
  ex.id = a.id;
  ex.length = std::min(tokens.size(), max_length);
  ex.inputs = embed(tokens, table, max_length);
  ex.label = a.labels.get(target) ? 1 : 0;
  if (ex.length == 0) throw InvalidArgument("article '" + a.id + "' has no tokens");
  return ex;
}

inline std::vector<SequenceExample> make_examples(std::span<const Article> articles, const EmbeddingTable& table,
                                                  BiasType target,
                                                  std::size_t max_length = kDefaultMaxSequenceLength) {
  std::vector<SequenceExample> out;
  out.reserve(articles.size());
  for (const auto& a : articles) out.push_back(make_example(a, table, target, max_length));
  return out;
}

/// Trained parameters bound to an embedding table; satisfies Predictor.
class Classifier {
 public:
  Classifier(GruParams params, std::shared_ptr<const EmbeddingTable> table,
             std::size_t max_sequence_length = kDefaultMaxSequenceLength)
      : params_(std::move(params)), table_(std::move(table)), max_length_(max_sequence_length) {
    if (!table_) throw InvalidArgument("Classifier: null embedding table");
    if (table_->dimension() != params_.shape().input)
      throw InvalidArgument("Classifier: embedding dimension does not match parameters");
    params_.validate();
  }

  Prediction predict(const std::vector<std::string>& tokens) const {
    return forward(tokens, *table_, params_, max_length_);
  }

  const GruParams& params() const noexcept { return params_; }
  const EmbeddingTable& table() const noexcept { return *table_; }
  std::size_t max_sequence_length() const noexcept { return max_length_; }

 private:
  GruParams params_;
  std::shared_ptr<const EmbeddingTable> table_;
  std::size_t max_length_;
};

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  BiasType target = BiasType::political_bias;
  std::string embeddings_path;
  TrainConfig config;
  GruParams params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

inline std::string checkpoint_to_string(const Checkpoint& ck) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "biaslens-checkpoint";
  j["version"] = kCheckpointVersion;
  j["target"] = std::string(to_string(ck.target));
  j["embeddings"] = ck.embeddings_path;
  const auto& c = ck.config;
  j["config"] = {{"seed", c.seed},
                 {"batch_size", c.batch_size},
                 {"max_epochs", c.max_epochs},
                 {"patience", c.patience},
                 {"learning_rate", c.learning_rate},
                 {"beta1", c.beta1},
                 {"beta2", c.beta2},
                 {"epsilon", c.epsilon},
                 {"init_range", c.init_range},
                 {"hidden", c.hidden},
                 {"max_sequence_length", c.max_sequence_length}};
  const ModelShape s = ck.params.shape();
  j["shape"] = {{"input", s.input}, {"hidden", s.hidden}, {"output", ModelShape::output}};
  ordered_json params = ordered_json::object();
  auto tensors = ck.params.tensors();
  for (std::size_t i = 0; i < GruParams::kTensorCount; ++i)
    params[std::string(GruParams::kNames[i])] = {
        {"rows", tensors[i]->rows}, {"cols", tensors[i]->cols}, {"data", tensors[i]->data}};
  j["params"] = std::move(params);
  ordered_json history = ordered_json::array();
  for (const auto& e : ck.history)
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"dev_macro_f1", e.dev_macro_f1},
                       {"improved", e.improved}});
  j["history"] = std::move(history);
  j["best_epoch"] = ck.best_epoch;
  return j.dump(1) + "\n";
}

inline Checkpoint checkpoint_from_string(std::string_view text, const std::string& source = "<checkpoint>") {
  Checkpoint ck;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "biaslens-checkpoint") throw ParseError(source, 0, "not a checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw ParseError(source, 0, "unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
    ck.target = parse_bias_type(j.at("target").get<std::string>());
    ck.embeddings_path = j.value("embeddings", std::string{});
    const auto& c = j.at("config");
    ck.config.seed = c.at("seed").get<std::uint64_t>();
    ck.config.batch_size = c.at("batch_size").get<std::size_t>();
    ck.config.max_epochs = c.at("max_epochs").get<std::size_t>();
    ck.config.patience = c.at("patience").get<std::size_t>();
    ck.config.learning_rate = c.at("learning_rate").get<double>();
    ck.config.beta1 = c.at("beta1").get<double>();
    ck.config.beta2 = c.at("beta2").get<double>();
    ck.config.epsilon = c.at("epsilon").get<double>();
    ck.config.init_range = c.at("init_range").get<double>();
    ck.config.hidden = c.at("hidden").get<std::size_t>();
    ck.config.max_sequence_length = c.at("max_sequence_length").get<std::size_t>();
    const ModelShape shape{j.at("shape").at("input").get<std::size_t>(), j.at("shape").at("hidden").get<std::size_t>()};
    ck.params = GruParams::zeros(shape);
    auto tensors = ck.params.tensors();
    const auto& params = j.at("params");
    for (std::size_t i = 0; i < GruParams::kTensorCount; ++i) {
      const auto& t = params.at(std::string(GruParams::kNames[i]));
      if (t.at("rows").get<std::size_t>() != tensors[i]->rows || t.at("cols").get<std::size_t>() != tensors[i]->cols)
        throw ParseError(source, 0, "tensor '" + std::string(GruParams::kNames[i]) + "' has wrong shape");
      auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != tensors[i]->size())
        throw ParseError(source, 0, "tensor '" + std::string(GruParams::kNames[i]) + "' has wrong size");
      tensors[i]->data = std::move(data);
    }
    for (const auto& e : j.at("history"))
      ck.history.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                            e.at("dev_macro_f1").get<double>(), e.at("improved").get<bool>()});
    ck.best_epoch = j.at("best_epoch").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    ck.params.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << checkpoint_to_string(ck);
  if (!out) throw Error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str(), path);
}

}  // namespace biaslens
