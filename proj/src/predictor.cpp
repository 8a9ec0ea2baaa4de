#include "pnal/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnal/rng.hpp"

namespace pnal {

double cross_entropy(const Matrix& probs, const std::vector<int>& targets,
                     const std::vector<bool>& mask) {
  if (static_cast<int>(targets.size()) != probs.rows ||
      static_cast<int>(mask.size()) != probs.rows)
    throw std::invalid_argument("cross_entropy: shape mismatch");
  double sum = 0.0;
  long used = 0;
  for (int i = 0; i < probs.rows; ++i) {
    if (!mask[i]) continue;
    const int t = targets[i];
    if (t < 0 || t >= probs.cols)
      throw std::invalid_argument("cross_entropy: target outside class range");
    sum -= std::log(std::max(probs.at(i, t), 1e-12));
    ++used;
  }
  return used > 0 ? sum / static_cast<double>(used) : 0.0;
}

namespace {

class LinearPredictor final : public Predictor {
 public:
  LinearPredictor(int feature_dim, int class_count, double lr, std::uint64_t seed)
      : dim_(feature_dim), classes_(class_count), lr_(lr),
        weights_(static_cast<std::size_t>(class_count) * (feature_dim + 1), 0.0) {
    if (feature_dim < 1 || class_count < 2)
      throw std::invalid_argument("predictor: dims must be >= 1 and classes >= 2");
    Rng rng(derive_seed(seed, "predictor-init"));
    for (double& w : weights_) w = 0.01 * rng.normal();
  }

  void fit_step(const Matrix& features, const std::vector<int>& targets,
                const std::vector<bool>& mask) override {
    check_shape(features);
    if (static_cast<int>(targets.size()) != features.rows ||
        static_cast<int>(mask.size()) != features.rows)
      throw std::invalid_argument("fit_step: shape mismatch");
    long used = 0;
    for (int i = 0; i < features.rows; ++i)
      if (mask[i]) ++used;
    if (used == 0) return;  // masked-out batch contributes no gradient

    std::vector<double> grad(weights_.size(), 0.0);
    std::vector<double> p(classes_);
    for (int i = 0; i < features.rows; ++i) {
      if (!mask[i]) continue;
      const double* x = features.row(i);
      softmax(x, p.data());
      p[targets[i]] -= 1.0;
      for (int m = 0; m < classes_; ++m) {
        double* g = grad.data() + static_cast<std::size_t>(m) * (dim_ + 1);
        const double pm = p[m];
        for (int d = 0; d < dim_; ++d) g[d] += pm * x[d];
        g[dim_] += pm;  // bias
      }
    }
    const double step = lr_ / static_cast<double>(used);
    for (std::size_t w = 0; w < weights_.size(); ++w) weights_[w] -= step * grad[w];
  }

  Matrix predict(const Matrix& features) const override {
    check_shape(features);
    Matrix out(features.rows, classes_);
    for (int i = 0; i < features.rows; ++i) softmax(features.row(i), out.row(i));
    return out;
  }

  int class_count() const override { return classes_; }

  std::unique_ptr<Predictor> clone() const override {
    return std::make_unique<LinearPredictor>(*this);
  }

 private:
  void check_shape(const Matrix& features) const {
    if (features.cols != dim_) throw std::invalid_argument("predictor: feature dim mismatch");
  }

  void softmax(const double* x, double* out) const {
    double top = -1e300;
    for (int m = 0; m < classes_; ++m) {
      const double* w = weights_.data() + static_cast<std::size_t>(m) * (dim_ + 1);
      double z = w[dim_];
      for (int d = 0; d < dim_; ++d) z += w[d] * x[d];
      out[m] = z;
      top = std::max(top, z);
    }
    double sum = 0.0;
    for (int m = 0; m < classes_; ++m) sum += (out[m] = std::exp(out[m] - top));
    for (int m = 0; m < classes_; ++m) out[m] /= sum;
  }

  int dim_;
  int classes_;
  double lr_;
  std::vector<double> weights_;  // class-major rows of [dim | bias]
};

}  // namespace

std::unique_ptr<Predictor> make_default_predictor(int feature_dim, int class_count, double lr,
                                                  std::uint64_t seed) {
  return std::make_unique<LinearPredictor>(feature_dim, class_count, lr, seed);
}

}  // namespace pnal
