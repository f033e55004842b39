#include "msl/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace msl {

namespace {

void require_nonincreasing_positive(const Vector& w, const char* what) {
  if (w.size() == 0) {
    throw InvalidInput(std::string(what) + " must not be empty");
  }
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] <= 0.0) {
      std::ostringstream os;
      os << what << "[" << i << "] = " << w[i] << " is not finite and positive";
      throw InvalidInput(os.str());
    }
    if (i > 0 && w[i] > w[i - 1]) {
      std::ostringstream os;
      os << what << " must be nonincreasing (entry " << i << ")";
      throw InvalidInput(os.str());
    }
  }
}

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidInput(std::string(what) + " must be finite and positive");
  }
}

}  // namespace

Dataset::Dataset(Matrix features, std::vector<int> labels, int num_classes,
                 bool standardized)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      standardized_(standardized) {
  if (num_classes_ < 2) throw InvalidInput("a dataset needs at least 2 classes");
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw InvalidInput("a dataset needs n >= 1 and d >= 1");
  }
  if (static_cast<Index>(labels_.size()) != features_.rows()) {
    throw InvalidInput("label count does not match feature rows");
  }
  if (!features_.allFinite()) throw InvalidInput("features must be finite");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      std::ostringstream os;
      os << "label of sample " << i << " outside [1, " << num_classes_ << "]";
      throw InvalidInput(os.str());
    }
  }
  if (standardized_ && !has_unit_mean_squares()) {
    throw InvalidInput("dataset flagged standardized but a column mean square is not 1");
  }
}

bool Dataset::has_unit_mean_squares(double tol) const {
  const Vector ms = features_.colwise().squaredNorm().transpose() / static_cast<double>(n());
  return ((ms.array() - 1.0).abs() <= tol).all();
}

Dataset Dataset::standardize() const {
  const Vector rms =
      (features_.colwise().squaredNorm().transpose() / static_cast<double>(n())).cwiseSqrt();
  if ((rms.array() <= 0.0).any()) throw InvalidInput("cannot standardize a zero column");
  Matrix scaled = features_ * rms.cwiseInverse().asDiagonal();
  return Dataset(std::move(scaled), labels_, num_classes_, true);
}

Dataset Dataset::select_features(std::span<const int> columns) const {
  if (columns.empty()) throw InvalidInput("feature selection must keep at least one column");
  Matrix sub(n(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] < 0 || columns[k] >= d()) throw InvalidInput("feature index out of range");
    sub.col(static_cast<Index>(k)) = features_.col(columns[k]);
  }
  return Dataset(std::move(sub), labels_, num_classes_, false);
}

CoefficientMatrix::CoefficientMatrix(Matrix values, bool centered)
    : values_(std::move(values)), centered_(centered) {
  if (!values_.allFinite()) throw InvalidInput("coefficients must be finite");
  if (centered_ && values_.size() > 0 &&
      values_.rowwise().sum().cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidInput("coefficient matrix flagged centered but a row sum is not 0");
  }
}

Matrix center_rows(const Matrix& b) {
  if (!b.allFinite()) throw InvalidInput("center_rows: non-finite input");
  if (b.cols() == 0) return b;
  // A row counts as centered once its mean is at the rounding level of its
  // sum. Cancellation in nearly constant rows can leave a larger residual
  // mean after one subtraction, so subtract until the test passes; a
  // centered row is then returned untouched, which makes the map idempotent.
  const double eps = std::numeric_limits<double>::epsilon();
  const double level = 4.0 * static_cast<double>(b.cols() + 1) * eps;
  Matrix out = b;
  for (Index j = 0; j < b.rows(); ++j) {
    for (int pass = 0; pass < 8; ++pass) {
      const double mean = out.row(j).mean();
      if (std::abs(mean) <= level * out.row(j).cwiseAbs().maxCoeff()) break;
      out.row(j).array() -= mean;
    }
  }
  return out;
}

CoefficientMatrix center_rows(const CoefficientMatrix& b) {
  // Row sums of a mean-subtracted row can differ from 0 by rounding; the
  // centered flag tolerates 1e-10.
  return CoefficientMatrix(center_rows(b.values()), true);
}

PenaltySpec::PenaltySpec(PenaltyFamily family, PenaltyForm form)
    : family_(family), form_(std::move(form)) {}

PenaltySpec PenaltySpec::group_slope(Vector lambda) {
  require_nonincreasing_positive(lambda, "lambda");
  return PenaltySpec(PenaltyFamily::kGroupSlope, GroupSlopeWeights{std::move(lambda)});
}

PenaltySpec PenaltySpec::sparse_group_slope(Vector lambda, Vector kappa) {
  require_nonincreasing_positive(lambda, "lambda");
  require_nonincreasing_positive(kappa, "kappa");
  return PenaltySpec(PenaltyFamily::kSparseGroupSlope,
                     SparseGroupSlopeWeights{std::move(lambda), std::move(kappa)});
}

PenaltySpec PenaltySpec::nuclear(double lambda) {
  require_positive(lambda, "lambda");
  return PenaltySpec(PenaltyFamily::kNuclear, NuclearWeight{lambda});
}

PenaltySpec PenaltySpec::group_lasso(Index d, double lambda) {
  require_positive(lambda, "lambda");
  if (d < 1) throw InvalidInput("group lasso needs d >= 1");
  return PenaltySpec(PenaltyFamily::kGroupLasso,
                     GroupSlopeWeights{Vector::Constant(d, lambda)});
}

PenaltySpec PenaltySpec::sparse_group_lasso(Index d, Index num_classes, double lambda,
                                            double kappa) {
  require_positive(lambda, "lambda");
  require_positive(kappa, "kappa");
  if (d < 1 || num_classes < 1) throw InvalidInput("sparse group lasso needs d, L >= 1");
  return PenaltySpec(PenaltyFamily::kSparseGroupLasso,
                     SparseGroupSlopeWeights{Vector::Constant(d, lambda),
                                             Vector::Constant(num_classes, kappa)});
}

PenaltySpec PenaltySpec::lasso(double kappa) {
  require_positive(kappa, "kappa");
  return PenaltySpec(PenaltyFamily::kLasso, LassoWeight{kappa});
}

std::string PenaltySpec::name() const { return to_string(family_); }

PenaltySpec PenaltySpec::scaled(double factor) const {
  require_positive(factor, "scale factor");
  PenaltyForm f = form_;
  std::visit(
      [factor](auto& w) {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, GroupSlopeWeights>) {
          w.lambda *= factor;
        } else if constexpr (std::is_same_v<T, SparseGroupSlopeWeights>) {
          w.lambda *= factor;
          w.kappa *= factor;
        } else if constexpr (std::is_same_v<T, NuclearWeight>) {
          w.lambda *= factor;
        } else {
          w.kappa *= factor;
        }
      },
      f);
  return PenaltySpec(family_, std::move(f));
}

PenaltySpec PenaltySpec::restricted(Index rows) const {
  PenaltyForm f = form_;
  std::visit(
      [rows](auto& w) {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, GroupSlopeWeights> ||
                      std::is_same_v<T, SparseGroupSlopeWeights>) {
          if (rows < 1 || rows > w.lambda.size()) {
            throw InvalidInput("restricted support size out of range");
          }
          w.lambda = Vector(w.lambda.head(rows));
        }
      },
      f);
  return PenaltySpec(family_, std::move(f));
}

void PenaltySpec::check_dimensions(Index d, Index num_classes) const {
  std::visit(
      [&](const auto& w) {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, GroupSlopeWeights>) {
          if (w.lambda.size() != d) throw InvalidInput("lambda length must equal d");
        } else if constexpr (std::is_same_v<T, SparseGroupSlopeWeights>) {
          if (w.lambda.size() != d) throw InvalidInput("lambda length must equal d");
          if (w.kappa.size() != num_classes) {
            throw InvalidInput("kappa length must equal the number of classes");
          }
        }
      },
      form_);
}

std::string to_string(PenaltyFamily family) {
  switch (family) {
    case PenaltyFamily::kGroupSlope: return "group-slope";
    case PenaltyFamily::kSparseGroupSlope: return "sparse-group-slope";
    case PenaltyFamily::kNuclear: return "nuclear";
    case PenaltyFamily::kGroupLasso: return "group-lasso";
    case PenaltyFamily::kSparseGroupLasso: return "sparse-group-lasso";
    case PenaltyFamily::kLasso: return "lasso";
  }
  return "unknown";
}

PenaltyFamily parse_penalty_family(const std::string& name) {
  for (auto f : {PenaltyFamily::kGroupSlope, PenaltyFamily::kSparseGroupSlope,
                 PenaltyFamily::kNuclear, PenaltyFamily::kGroupLasso,
                 PenaltyFamily::kSparseGroupLasso, PenaltyFamily::kLasso}) {
    if (to_string(f) == name) return f;
  }
  throw InvalidInput("unknown penalty family '" + name + "'");
}

Matrix ar1_covariance(Index d, double rho) {
  if (!(std::abs(rho) < 1.0)) throw InvalidInput("AR(1) correlation must lie in (-1, 1)");
  Matrix c(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) c(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return c;
}

void SyntheticSpec::validate() const {
  if (n < 1 || d < 1) throw InvalidInput("synthetic spec needs n >= 1 and d >= 1");
  if (num_classes < 2) throw InvalidInput("synthetic spec needs L >= 2");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("delta must lie in (0, 1/2)");
  if (!std::isfinite(signal_scale) || signal_scale < 0.0) {
    throw InvalidInput("signal_scale must be finite and nonnegative");
  }
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GlobalRowSparse>) {
          if (s.d0 < 1 || s.d0 > std::min(d, n)) {
            throw InvalidInput("d0 must satisfy 1 <= d0 <= min(d, n)");
          }
        } else if constexpr (std::is_same_v<T, DoubleRowSparse>) {
          if (s.d0 < 1 || s.d0 > std::min(d, n)) {
            throw InvalidInput("d0 must satisfy 1 <= d0 <= min(d, n)");
          }
          if (static_cast<int>(s.m.size()) != s.d0) {
            throw InvalidInput("m must list one row sparsity per non-zero row");
          }
          for (int mj : s.m) {
            // A centered row with a single non-zero entry is impossible.
            if (mj < 2 || mj > num_classes) throw InvalidInput("each m_j must satisfy 2 <= m_j <= L");
          }
        } else {
          if (s.r0 < 1 || s.r0 > std::min(num_classes - 1, d)) {
            throw InvalidInput("r0 must satisfy 1 <= r0 <= min(L - 1, d)");
          }
        }
      },
      structure);
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, GaussianLaw>) {
          if (law.covariance.size() != 0 &&
              (law.covariance.rows() != d || law.covariance.cols() != d)) {
            throw InvalidInput("Gaussian covariance must be d x d");
          }
        } else if constexpr (std::is_same_v<T, StudentTLaw>) {
          if (!(law.dof > 2.0)) throw InvalidInput("Student-t features need dof > 2");
        }
      },
      feature_law);
}

double SyntheticSpec::c_star() const { return std::log((1.0 - delta) / delta); }

std::string structure_name(const Structure& s) {
  switch (s.index()) {
    case 0: return "global-row-sparse";
    case 1: return "double-row-sparse";
    default: return "low-rank";
  }
}

int structure_size(const Structure& s) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LowRank>) {
          return v.r0;
        } else {
          return v.d0;
        }
      },
      s);
}

}  // namespace msl
