#pragma once

// Domain data model shared by every msl module.
//
// Class labels are 1-based (1..L) in every external interface (CSV files,
// CLI output) and 0-based (0..L-1) everywhere inside the library. The
// conversion happens exactly once, in msl/io.hpp.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace msl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A labelled sample (X_i, Y_i), i = 1..n. Rows of `features` are samples.
class Dataset {
 public:
  /// `labels` are 0-based class indices in [0, num_classes).
  Dataset(Matrix features, std::vector<int> labels, int num_classes,
          bool standardized = false);

  Index n() const noexcept { return features_.rows(); }
  Index d() const noexcept { return features_.cols(); }
  int num_classes() const noexcept { return num_classes_; }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  bool standardized() const noexcept { return standardized_; }

  /// True when every column has mean square 1 within `tol`.
  bool has_unit_mean_squares(double tol = 1e-8) const;
  /// Columns rescaled to unit mean square; the result carries the flag.
  Dataset standardize() const;
  /// Keeps only the listed feature columns, in the given order.
  Dataset select_features(std::span<const int> columns) const;

 private:
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_;
  bool standardized_;
};

/// d x L coefficient matrix B with columns beta_1..beta_L.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  /// Throws InvalidInput on non-finite entries, or when `centered` is set and
  /// some row sum exceeds 1e-10 in magnitude.
  explicit CoefficientMatrix(Matrix values, bool centered = false);

  const Matrix& values() const noexcept { return values_; }
  bool centered() const noexcept { return centered_; }
  Index d() const noexcept { return values_.rows(); }
  Index num_classes() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
  bool centered_ = false;
};

/// Subtracts each row's mean. Throws InvalidInput on non-finite input.
Matrix center_rows(const Matrix& b);
CoefficientMatrix center_rows(const CoefficientMatrix& b);

enum class PenaltyFamily {
  kGroupSlope,
  kSparseGroupSlope,
  kNuclear,
  kGroupLasso,
  kSparseGroupLasso,
  kLasso,
};

/// Sum_j lambda_j |B|_(j) over descendingly ordered row l2-norms.
struct GroupSlopeWeights {
  Vector lambda;
};
/// Group Slope plus Sum_j Sum_l kappa_l |B|_j(l) within each row.
struct SparseGroupSlopeWeights {
  Vector lambda;
  Vector kappa;
};
/// lambda * ||B||_*.
struct NuclearWeight {
  double lambda;
};
/// kappa * Sum_jl |B_jl|.
struct LassoWeight {
  double kappa;
};

using PenaltyForm =
    std::variant<GroupSlopeWeights, SparseGroupSlopeWeights, NuclearWeight, LassoWeight>;

/// Penalty family plus its weights. Construction rejects non-monotone or
/// non-positive weight sequences.
class PenaltySpec {
 public:
  static PenaltySpec group_slope(Vector lambda);
  static PenaltySpec sparse_group_slope(Vector lambda, Vector kappa);
  static PenaltySpec nuclear(double lambda);
  static PenaltySpec group_lasso(Index d, double lambda);
  static PenaltySpec sparse_group_lasso(Index d, Index num_classes, double lambda,
                                        double kappa);
  static PenaltySpec lasso(double kappa);

  PenaltyFamily family() const noexcept { return family_; }
  const PenaltyForm& form() const noexcept { return form_; }
  /// CLI spelling, e.g. "group-slope".
  std::string name() const;

  /// Every weight multiplied by `factor` > 0.
  PenaltySpec scaled(double factor) const;
  /// The penalty seen by a matrix whose rows outside a support of size `rows`
  /// are zero: row-norm weights truncated to their first `rows` entries.
  PenaltySpec restricted(Index rows) const;

  /// Throws InvalidInput when the weights do not fit a d x L matrix.
  void check_dimensions(Index d, Index num_classes) const;

 private:
  PenaltySpec(PenaltyFamily family, PenaltyForm form);

  PenaltyFamily family_;
  PenaltyForm form_;
};

std::string to_string(PenaltyFamily family);
/// Parses a CLI spelling; throws InvalidInput on unknown names.
PenaltyFamily parse_penalty_family(const std::string& name);

struct FitResult {
  CoefficientMatrix coefficients;
  /// Objective after every accepted step; nonincreasing up to rounding
  /// (relative 1e-13).
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// ||B - prox_{t pen}(B - t grad)||_F / t at the returned iterate.
  double fixed_point_residual = 0.0;
  double step = 0.0;
  double objective = 0.0;
  /// Largest |row mean| of the iterate before any explicit centering.
  double max_row_mean_before_centering = 0.0;
};

// Synthetic truth structures.
struct GlobalRowSparse {
  int d0;
};
struct DoubleRowSparse {
  int d0;
  std::vector<int> m;  // non-zeros per non-zero row, length d0
};
struct LowRank {
  int r0;
};
using Structure = std::variant<GlobalRowSparse, DoubleRowSparse, LowRank>;

// Feature laws. Every law has unit second moment per coordinate.
struct GaussianLaw {
  Matrix covariance;  // empty means identity
};
struct RademacherLaw {};
struct StudentTLaw {
  double dof;  // > 2; draws are rescaled to unit variance
};
using FeatureLaw = std::variant<GaussianLaw, RademacherLaw, StudentTLaw>;

/// Toeplitz covariance rho^|i-j|.
Matrix ar1_covariance(Index d, double rho);

struct SyntheticSpec {
  int n = 100;
  int d = 10;
  int num_classes = 3;
  Structure structure = GlobalRowSparse{2};
  double signal_scale = 1.0;
  double delta = 0.05;
  FeatureLaw feature_law = GaussianLaw{};
  std::uint64_t seed = 0;

  /// Throws InvalidInput when the structure is infeasible for (n, d, L).
  void validate() const;
  /// C* = ln((1 - delta) / delta).
  double c_star() const;
};

std::string structure_name(const Structure& s);
/// d0 for row-sparse structures, r0 for low rank.
int structure_size(const Structure& s);

struct RiskReport {
  double train_error = 0.0;
  double test_error = 0.0;
  double bayes_risk = 0.0;
  double bayes_stderr = 0.0;
  double excess_risk = 0.0;
  double excess_stderr = 0.0;
  double kl_risk = 0.0;
  /// (h, P(p_(1)(X) - p_(2)(X) <= h)) under the true coefficients.
  std::vector<std::pair<double, double>> margin_cdf;
};

}  // namespace msl
