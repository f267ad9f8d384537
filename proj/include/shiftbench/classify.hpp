#pragma once

// Cosine-similarity classification over unit-norm embeddings.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "common.hpp"

namespace shiftbench {

/// Unit-L2-norm embedding produced by a backend.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double norm() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  bool operator==(const EmbeddingVector&) const = default;
};

inline EmbeddingVector normalized(std::vector<double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  const double n = std::sqrt(s);
  if (!(n > 0)) throw Error("cannot normalize a zero vector");
  for (double& x : v) x /= n;
  return {std::move(v)};
}

inline constexpr double kNormTolerance = 1e-3;
inline constexpr double kDefaultLogitScale = 100.0;

struct ClassScores {
  std::vector<double> scores;  // cosine similarity per class
  std::size_t predicted = 0;   // argmax, ties -> lowest index

  /// Softmax over logit_scale * scores.
  std::vector<double> probabilities(double logit_scale = kDefaultLogitScale) const {
    std::vector<double> p(scores.size());
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) z += p[i] = std::exp(logit_scale * (scores[i] - m));
    for (double& x : p) x /= z;
    return p;
  }

  /// Whether `cls` is among the k highest scores (ties resolved by index).
  bool in_top_k(std::size_t cls, std::size_t k) const {
    std::size_t better = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] > scores[cls] || (scores[i] == scores[cls] && i < cls)) ++better;
    return better < k;
  }
};

inline void check_unit(const EmbeddingVector& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > kNormTolerance)
    throw Error(concat(what, " embedding is not unit norm (|v| = ", v.norm(), ")"));
}

/// Scores are dot products of unit vectors, i.e. cosine similarities.
inline ClassScores classify(const EmbeddingVector& image,
                            std::span<const EmbeddingVector> texts) {
  if (texts.size() < 2) throw Error("classification needs at least 2 classes");
  check_unit(image, "image");
  const std::size_t d = image.dim();
  ClassScores out;
  out.scores.reserve(texts.size());
  for (const auto& t : texts) {
    if (t.dim() != d)
      throw Error(concat("dimension mismatch: image ", d, " vs text ", t.dim()));
    check_unit(t, "text");
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += image.values[k] * t.values[k];
    out.scores.push_back(s);
  }
  for (std::size_t i = 1; i < out.scores.size(); ++i)
    if (out.scores[i] > out.scores[out.predicted]) out.predicted = i;
  return out;
}

}  // namespace shiftbench
