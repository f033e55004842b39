#pragma once

// Synthetic data with known truth, risk estimation, margin diagnostics,
// Rademacher-complexity Monte Carlo and second-moment estimation.

#include <cstdint>
#include <optional>
#include <vector>

#include "msl/core.hpp"
#include "msl/rng.hpp"

namespace msl {

// Stream ids under SyntheticSpec::seed.
inline constexpr std::uint64_t kCoefficientStream = 0;
inline constexpr std::uint64_t kFeatureStream = 1;
inline constexpr std::uint64_t kLabelStream = 2;
inline constexpr std::uint64_t kTestFeatureStream = 3;
inline constexpr std::uint64_t kTestLabelStream = 4;
inline constexpr std::uint64_t kBayesStream = 5;

struct SecondMomentReport {
  double tau_1 = 0.0;  // largest eigenvalue of X'X / n
  double tau_d = 0.0;  // smallest eigenvalue (clamped at 0)
  double m_hat = 0.0;  // mean of |X_i|^2
};

SecondMomentReport second_moments(const Matrix& features);

struct MarginReport {
  std::vector<double> h_grid;
  std::vector<double> cdf;  // empirical P(p_(1)(X) - p_(2)(X) <= h)
  /// Least-squares slope of ln cdf on ln h over the smallest grid decade.
  /// Diagnostic only; empty when fewer than two usable points exist.
  std::optional<double> fitted_alpha;
};

/// `points` geometric steps from 1e-3 to 1 inclusive.
std::vector<double> default_margin_grid(int points = 31);

MarginReport margin_report(const Matrix& b, const Matrix& features,
                           const std::vector<double>& h_grid);

struct GeneratedData {
  Dataset data;
  CoefficientMatrix truth;
};

/// Draws a centered truth with the requested structure, draws n feature
/// rows, shrinks B globally until max_{i,l} |beta_l' x_i| <= C*, then draws
/// labels. Deterministic in spec.seed.
GeneratedData generate(const SyntheticSpec& spec);

/// m feature rows from spec.feature_law.
Matrix draw_features(const SyntheticSpec& spec, Index m, RandomStream& rng);

/// Labels (0-based) drawn from the multinomial logistic probabilities.
std::vector<int> draw_labels(const Matrix& b, const Matrix& features, RandomStream& rng);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo average of 1 - max_l p_l(X) over fresh feature draws.
MonteCarloEstimate estimate_bayes_risk(const CoefficientMatrix& b, const SyntheticSpec& spec,
                                       int mc_samples,
                                       std::uint64_t stream_id = kBayesStream);

/// Risks of the plug-in classifier of `b_hat` against truth `b_true`.
///
/// A fresh test set of `test_size` rows (shared by every caller using the
/// same spec) gives test_error (label mismatch rate), kl_risk and the margin
/// CDF of the truth. bayes_risk comes from estimate_bayes_risk. excess_risk
/// is the conditional form E_X[max_l p_l(X) - p_{eta_hat(X)}(X)] evaluated
/// on the test features, which has the same expectation as
/// test_error - bayes_risk with far less variance. train_error is NaN when
/// `train` is null.
RiskReport risk_report(const CoefficientMatrix& b_hat, const CoefficientMatrix& b_true,
                       const SyntheticSpec& spec, int test_size, int mc_samples,
                       const Dataset* train = nullptr);

struct RademacherEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<double> draws;
};

/// Empirical Rademacher complexity of the unit penalty ball:
/// mean over Sigma (n x L, uniform signs) of dual_norm(spec, X' Sigma / sqrt(n)).
RademacherEstimate rademacher_mc(const PenaltySpec& spec, const Matrix& features,
                                 Index num_classes, int num_draws, std::uint64_t seed);

}  // namespace msl
