#include "msl/model.hpp"

#include <cmath>

namespace msl {

namespace {

void check_coefficients(const Matrix& b, Index d) {
  if (b.rows() != d) throw InvalidInput("coefficient rows must equal the feature dimension");
  if (b.cols() < 1) throw InvalidInput("coefficient matrix has no columns");
}

void check_coefficients(const Matrix& b, const Dataset& data) {
  check_coefficients(b, data.d());
  if (b.cols() != data.num_classes()) {
    throw InvalidInput("coefficient columns must equal the number of classes");
  }
}

// Replaces each row of `scores` by its softmax and returns the row-wise
// log-sum-exp values.
Vector softmax_rows_inplace(Matrix& scores) {
  const Vector row_max = scores.rowwise().maxCoeff();
  scores.colwise() -= row_max;
  scores = scores.array().exp().matrix();
  const Vector sums = scores.rowwise().sum();
  scores.array().colwise() /= sums.array();
  return row_max.array() + sums.array().log();
}

}  // namespace

ModelBounds ModelBounds::from_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("delta must lie in (0, 1/2)");
  return ModelBounds{delta, std::log((1.0 - delta) / delta)};
}

Vector class_probs(const Matrix& b, const Eigen::Ref<const Vector>& x) {
  check_coefficients(b, x.size());
  Vector s = b.transpose() * x;
  s.array() -= s.maxCoeff();
  s = s.array().exp().matrix();
  return s / s.sum();
}

Matrix class_probs_batch(const Matrix& b, const Matrix& features) {
  check_coefficients(b, features.cols());
  Matrix scores = features * b;
  softmax_rows_inplace(scores);
  return scores;
}

double nll_with_grad(const Matrix& b, const Dataset& data, Matrix& grad) {
  check_coefficients(b, data);
  const auto& x = data.features();
  const auto& y = data.labels();
  const Index n = data.n();
  Matrix scores = x * b;
  double linear = 0.0;
  for (Index i = 0; i < n; ++i) linear += scores(i, y[i]);
  const Vector lse = softmax_rows_inplace(scores);
  for (Index i = 0; i < n; ++i) scores(i, y[i]) -= 1.0;
  grad.noalias() = x.transpose() * scores / static_cast<double>(n);
  return (lse.sum() - linear) / static_cast<double>(n);
}

double nll(const Matrix& b, const Dataset& data) {
  check_coefficients(b, data);
  const auto& y = data.labels();
  Matrix scores = data.features() * b;
  double linear = 0.0;
  for (Index i = 0; i < data.n(); ++i) linear += scores(i, y[i]);
  const Vector lse = softmax_rows_inplace(scores);
  return (lse.sum() - linear) / static_cast<double>(data.n());
}

Matrix grad_nll(const Matrix& b, const Dataset& data) {
  Matrix g;
  nll_with_grad(b, data, g);
  return g;
}

int predict(const Matrix& b, const Eigen::Ref<const Vector>& x) {
  check_coefficients(b, x.size());
  const Vector s = b.transpose() * x;
  Index best = 0;
  for (Index l = 1; l < s.size(); ++l) {
    if (s[l] > s[best]) best = l;
  }
  return static_cast<int>(best);
}

std::vector<int> predict_batch(const Matrix& b, const Matrix& features) {
  check_coefficients(b, features.cols());
  const Matrix s = features * b;
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Index i = 0; i < s.rows(); ++i) {
    Index best = 0;
    for (Index l = 1; l < s.cols(); ++l) {
      if (s(i, l) > s(i, best)) best = l;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double kl_divergence(const Matrix& b1, const Matrix& b2, const Matrix& x_sample) {
  if (b1.rows() != b2.rows() || b1.cols() != b2.cols()) {
    throw InvalidInput("kl_divergence: coefficient shapes differ");
  }
  if (x_sample.rows() < 1) throw InvalidInput("kl_divergence needs at least one sample");
  check_coefficients(b1, x_sample.cols());
  // KL(p1, p2) = sum_l p1_l (s1_l - lse1) - (s2_l - lse2) with log-probabilities
  // taken straight from the scores, so tiny probabilities never hit log(0).
  Matrix s1 = x_sample * b1;
  Matrix s2 = x_sample * b2;
  Matrix p1 = s1;
  const Vector lse1 = softmax_rows_inplace(p1);
  Matrix p2 = s2;
  const Vector lse2 = softmax_rows_inplace(p2);
  double total = 0.0;
  for (Index i = 0; i < x_sample.rows(); ++i) {
    double kl = 0.0;
    for (Index l = 0; l < b1.cols(); ++l) {
      const double logratio = (s1(i, l) - lse1[i]) - (s2(i, l) - lse2[i]);
      kl += p1(i, l) * logratio;
    }
    total += kl;
  }
  return total / static_cast<double>(x_sample.rows());
}

}  // namespace msl
