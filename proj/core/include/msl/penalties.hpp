#pragma once

// Norm values, proximal operators, dual norms and weight sequences for the
// group Slope, sparse group Slope, nuclear and Lasso penalty families.
//
// Every prox here solves
//     argmin_U  1/2 ||U - V||_F^2 + step * pen(U).

#include <utility>

#include "msl/core.hpp"

namespace msl {

/// Constants in the weight formulas. All must be strictly positive.
struct WeightConfig {
  double c0 = 1.0;         // group Slope: lambda_j = (1/c0) sqrt((L + ln(d/j)) / n)
  double c1 = 1.0;         // sparse group Slope row weights
  double c2 = 1.0;         // sparse group Slope within-row weights
  double c_nuclear = 1.0;  // nuclear lambda multiplier

  void validate() const;
};

/// sum_i w_i |v|_(i) with |v|_(1) >= |v|_(2) >= ...
double sorted_l1_norm(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& w);

/// Dual of the sorted-l1 norm: max_k (sum_{i<=k} |a|_(i)) / (sum_{i<=k} w_i).
double sorted_l1_dual(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& w);

double penalty_value(const PenaltySpec& spec, const Matrix& b);

/// Prox of the sorted-l1 norm by stack-based pool-adjacent-violators.
/// Weights must be nonnegative and nonincreasing (zero weights allowed).
/// Ties in |v| are ordered by original index.
Vector prox_sorted_l1(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& weights,
                      double step);

/// Sorted-l1 prox applied to every row with the within-row weights `kappa`.
Matrix prox_rowwise_sorted_l1(const Matrix& b, const Vector& kappa, double step);

/// Row-wise sorted-l1 prox restricted to rows summing to zero. Each row is
/// prox(v - c 1) with the scalar shift c chosen so the result sums to 0.
/// When `shifts` is non-null it receives c for every row.
Matrix prox_rowwise_sorted_l1_centered(const Matrix& b, const Vector& kappa, double step,
                                       Vector* shifts = nullptr);

/// Group Slope prox: sorted-l1 prox of the row-norm vector, rows rescaled.
Matrix prox_group_slope(const Matrix& b, const Vector& lambda, double step);

/// Singular value soft-thresholding by step * lambda; values below 1e-12
/// after thresholding are set to 0.
Matrix prox_nuclear(const Matrix& b, double lambda, double step);

struct SgsProxOptions {
  double tol = 1e-9;
  int max_iter = 100000;
  bool enforce_centering = false;
  bool force_dykstra = false;
};

struct SgsProxResult {
  Matrix value;
  bool fast_path = false;
  int dykstra_iterations = 0;
};

/// Prox of group Slope (lambda) + row-wise Slope (kappa), optionally plus the
/// indicator of {B 1 = 0}. The composition prox_lambda(prox_kappa(B)) is
/// tried first and accepted when it passes a subgradient optimality check;
/// otherwise Dykstra-like alternation between the two sub-proxes runs until
/// successive iterates differ by less than `tol` (Frobenius).
/// Throws ConvergenceError after `max_iter` Dykstra sweeps.
SgsProxResult prox_sparse_group_slope(const Matrix& b, const Vector& lambda,
                                      const Vector& kappa, double step,
                                      const SgsProxOptions& options = {});

struct ProxOptions {
  double tol = 1e-9;
  bool enforce_centering = false;
};

/// Prox of step * pen for any penalty family, optionally restricted to
/// matrices with zero row sums.
Matrix prox(const PenaltySpec& spec, const Matrix& b, double step,
            const ProxOptions& options = {});

/// sup { <A, B> : pen(B) <= 1 }. Exact for every family; the sparse group
/// Slope case bisects on t using prox_{t pen}(A) = 0  <=>  dual(A) <= t.
double dual_norm(const PenaltySpec& spec, const Matrix& a);

/// lambda_j = (1/c0) sqrt((L + ln(d/j)) / n), j = 1..d.
Vector group_slope_weights(Index d, Index num_classes, Index n, const WeightConfig& cfg = {});

/// lambda_j = c1 sqrt(ln(d e / j) / n), kappa_l = c2 sqrt(ln(L e / l) / n).
std::pair<Vector, Vector> sparse_group_slope_weights(Index d, Index num_classes, Index n,
                                                     const WeightConfig& cfg = {});

/// Constant group Lasso weight (1/c0) sqrt((L + ln d) / n).
double group_lasso_lambda(Index d, Index num_classes, Index n, const WeightConfig& cfg = {});

/// Constant sparse group Lasso weights c1 sqrt(ln d / n), c2 sqrt(ln L / n).
/// Needs d >= 2 and L >= 2.
std::pair<double, double> sparse_group_lasso_weights(Index d, Index num_classes, Index n,
                                                     const WeightConfig& cfg = {});

/// lambda = C (sqrt(tau_1) + sqrt(m ln d / n)) (sqrt(L - 1) + sqrt(d)) / sqrt(n)
/// with tau_1 the top eigenvalue of X'X/n and m the mean squared row norm.
double nuclear_lambda(const Matrix& features, Index num_classes, const WeightConfig& cfg = {});
inline double nuclear_lambda(const Dataset& data, Index num_classes,
                             const WeightConfig& cfg = {}) {
  return nuclear_lambda(data.features(), num_classes, cfg);
}

/// Formula weights for `family` on data of shape (n, d, L), times `scale`.
/// Nuclear uses the sample moments of `features`.
PenaltySpec formula_penalty(PenaltyFamily family, const Matrix& features, Index num_classes,
                            const WeightConfig& cfg, double scale = 1.0);

}  // namespace msl
