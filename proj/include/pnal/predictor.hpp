#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pnal/matrix.hpp"

namespace pnal {

// Mean cross-entropy over masked-in samples: -log p[target], with p clamped
// at 1e-12 inside the log. Targets are one-hot, passed as class ids. An
// all-false mask yields 0.
double cross_entropy(const Matrix& probs, const std::vector<int>& targets,
                     const std::vector<bool>& mask);

// Per-point classifier contract: predict emits one distribution per row,
// fit_step performs one update from a masked batch. fit_step with an
// all-false mask must leave the parameters untouched.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual void fit_step(const Matrix& features, const std::vector<int>& targets,
                        const std::vector<bool>& mask) = 0;
  virtual Matrix predict(const Matrix& features) const = 0;
  virtual int class_count() const = 0;
  virtual std::unique_ptr<Predictor> clone() const = 0;
};

// Multinomial linear classifier (softmax over an affine map) trained with
// constant-rate gradient steps on the masked cross-entropy. Deterministic:
// the seed fixes the (small) initial weights and nothing else is stochastic.
std::unique_ptr<Predictor> make_default_predictor(int feature_dim, int class_count, double lr,
                                                  std::uint64_t seed);

}  // namespace pnal
