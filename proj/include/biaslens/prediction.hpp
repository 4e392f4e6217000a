#pragma once

#include <array>
#include <concepts>
#include <string>
#include <vector>

namespace biaslens {

/// Two-way class distribution. Index 0 is the unbiased / fair / objective
/// class, index 1 the biased / unfair / non-objective class.
struct Prediction {
  std::array<double, 2> probabilities{0.5, 0.5};
  int label = 0;  // argmax, ties resolve to 0
  double p_positive = 0.5;

  static Prediction from_probabilities(double p0, double p1) {
    Prediction p;
    p.probabilities = {p0, p1};
    p.label = p1 > p0 ? 1 : 0;
    p.p_positive = p1;
    return p;
  }
};

/// Anything that maps a token sequence to a Prediction.
template <typename P>
concept Predictor = requires(const P& p, const std::vector<std::string>& tokens) {
  { p.predict(tokens) } -> std::convertible_to<Prediction>;
};

}  // namespace biaslens
