#pragma once

// Multinomial logistic regression primitives.
//
//   p_l(x) = exp(beta_l' x) / sum_k exp(beta_k' x)
//
// All log-partition sums subtract the row maximum first, so arbitrary
// (unbounded) user coefficients never overflow.

#include "msl/core.hpp"

namespace msl {

/// Boundedness constants: delta <= p_l(x) <= 1 - delta, i.e. |beta_l' x| <= c_star.
struct ModelBounds {
  double delta;
  double c_star;

  static ModelBounds from_delta(double delta);
};

Vector class_probs(const Matrix& b, const Eigen::Ref<const Vector>& x);
inline Vector class_probs(const CoefficientMatrix& b, const Eigen::Ref<const Vector>& x) {
  return class_probs(b.values(), x);
}

/// Row-wise class probabilities for every row of `features` (m x L).
Matrix class_probs_batch(const Matrix& b, const Matrix& features);

/// Averaged negative log-likelihood
///   (1/n) sum_i [ log sum_l exp(beta_l' X_i) - X_i' B xi_i ].
double nll(const Matrix& b, const Dataset& data);
inline double nll(const CoefficientMatrix& b, const Dataset& data) {
  return nll(b.values(), data);
}

/// Gradient of nll: (1/n) sum_i X_i (p(X_i) - xi_i)'.
Matrix grad_nll(const Matrix& b, const Dataset& data);
inline Matrix grad_nll(const CoefficientMatrix& b, const Dataset& data) {
  return grad_nll(b.values(), data);
}

/// nll and its gradient from one pass over the data.
double nll_with_grad(const Matrix& b, const Dataset& data, Matrix& grad);

/// argmax_l beta_l' x as a 0-based class index; ties go to the lowest index.
int predict(const Matrix& b, const Eigen::Ref<const Vector>& x);
inline int predict(const CoefficientMatrix& b, const Eigen::Ref<const Vector>& x) {
  return predict(b.values(), x);
}
std::vector<int> predict_batch(const Matrix& b, const Matrix& features);

/// Monte-Carlo estimate over the rows of `x_sample` of
///   E_X sum_l p1_l(X) log(p1_l(X) / p2_l(X)).
double kl_divergence(const Matrix& b1, const Matrix& b2, const Matrix& x_sample);
inline double kl_divergence(const CoefficientMatrix& b1, const CoefficientMatrix& b2,
                            const Matrix& x_sample) {
  return kl_divergence(b1.values(), b2.values(), x_sample);
}

}  // namespace msl
