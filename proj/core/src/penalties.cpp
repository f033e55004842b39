#include "msl/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/SVD>

namespace msl {

namespace {

std::vector<Index> order_by_magnitude_desc(const Eigen::Ref<const Vector>& v) {
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&v](Index a, Index b) { return std::abs(v[a]) > std::abs(v[b]); });
  return order;
}

void check_weights(const Eigen::Ref<const Vector>& w, Index expected) {
  if (w.size() != expected) throw InvalidInput("weight length does not match the input");
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
      throw InvalidInput("weights must be finite and nonnegative");
    }
    if (i > 0 && w[i] > w[i - 1]) throw InvalidInput("weights must be nonincreasing");
  }
}

void check_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("step must be finite and positive");
}

double group_slope_value(const Matrix& b, const Vector& lambda) {
  const Vector norms = b.rowwise().norm();
  return sorted_l1_norm(norms, lambda);
}

double rowwise_slope_value(const Matrix& b, const Vector& kappa) {
  double total = 0.0;
  for (Index j = 0; j < b.rows(); ++j) total += sorted_l1_norm(b.row(j).transpose(), kappa);
  return total;
}

// Subgradient test for a norm N at u: G is in dN(u) iff N°(G) <= 1 and <G, u> = N(u).
bool is_norm_subgradient(double dual_of_g, double inner, double norm_value, double tol) {
  return dual_of_g <= 1.0 + tol && std::abs(inner - norm_value) <= tol * (1.0 + norm_value);
}

// Certifies U = prox_f(Y), Y = prox_g(V) as the prox of f + g (+ centering):
// G_g = (V - Y)/t (less the centering shifts) must lie in dg(U) and
// G_f = (Y - U)/t in df(U).
bool composition_is_optimal(const Matrix& v, const Matrix& y, const Matrix& u,
                            const Vector& lambda, const Vector& kappa, double step,
                            const Vector* shifts, double tol) {
  const Matrix g_f = (y - u) / step;
  const Vector u_norms = u.rowwise().norm();
  const double f_u = sorted_l1_norm(u_norms, lambda);
  const double inner_f = (g_f.array() * u.array()).sum();
  if (!is_norm_subgradient(sorted_l1_dual(g_f.rowwise().norm(), lambda), inner_f, f_u, tol)) {
    return false;
  }
  Matrix g_g = (v - y) / step;
  if (shifts != nullptr) {
    g_g.colwise() -= *shifts / step;
    if (u.rowwise().sum().cwiseAbs().maxCoeff() > tol * (1.0 + u.cwiseAbs().maxCoeff())) {
      return false;
    }
  }
  for (Index j = 0; j < u.rows(); ++j) {
    const Vector gj = g_g.row(j).transpose();
    const Vector uj = u.row(j).transpose();
    if (!is_norm_subgradient(sorted_l1_dual(gj, kappa), gj.dot(uj), sorted_l1_norm(uj, kappa),
                             tol)) {
      return false;
    }
  }
  return true;
}

Matrix row_prox(const Matrix& b, const Vector& kappa, double step, bool centered,
                Vector* shifts) {
  return centered ? prox_rowwise_sorted_l1_centered(b, kappa, step, shifts)
                  : prox_rowwise_sorted_l1(b, kappa, step);
}

}  // namespace

void WeightConfig::validate() const {
  for (double c : {c0, c1, c2, c_nuclear}) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("weight constants must be positive");
  }
}

double sorted_l1_norm(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& w) {
  if (v.size() != w.size()) throw InvalidInput("sorted_l1_norm: length mismatch");
  Vector mags = v.cwiseAbs();
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags.dot(w);
}

double sorted_l1_dual(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& w) {
  if (a.size() != w.size()) throw InvalidInput("sorted_l1_dual: length mismatch");
  Vector mags = a.cwiseAbs();
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double num = 0.0, den = 0.0, best = 0.0;
  for (Index k = 0; k < mags.size(); ++k) {
    num += mags[k];
    den += w[k];
    best = std::max(best, num / den);
  }
  return best;
}

double penalty_value(const PenaltySpec& spec, const Matrix& b) {
  spec.check_dimensions(b.rows(), b.cols());
  return std::visit(
      [&b](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, GroupSlopeWeights>) {
          return group_slope_value(b, w.lambda);
        } else if constexpr (std::is_same_v<T, SparseGroupSlopeWeights>) {
          return group_slope_value(b, w.lambda) + rowwise_slope_value(b, w.kappa);
        } else if constexpr (std::is_same_v<T, NuclearWeight>) {
          if (b.size() == 0) return 0.0;
          Eigen::JacobiSVD<Matrix> svd(b);
          return w.lambda * svd.singularValues().sum();
        } else {
          return w.kappa * b.cwiseAbs().sum();
        }
      },
      spec.form());
}

Vector prox_sorted_l1(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& weights,
                      double step) {
  check_weights(weights, v.size());
  check_step(step);
  const Index k = v.size();
  const std::vector<Index> order = order_by_magnitude_desc(v);

  // Blocks of the isotonic (nonincreasing) fit of |v|_(i) - step * w_i.
  std::vector<Index> block_start(static_cast<std::size_t>(k));
  std::vector<Index> block_end(static_cast<std::size_t>(k));
  std::vector<double> block_sum(static_cast<std::size_t>(k));
  std::vector<double> block_val(static_cast<std::size_t>(k));
  std::size_t top = 0;
  for (Index i = 0; i < k; ++i) {
    const double z = std::abs(v[order[static_cast<std::size_t>(i)]]) - step * weights[i];
    block_start[top] = i;
    block_end[top] = i;
    block_sum[top] = z;
    block_val[top] = z;
    while (top > 0 && block_val[top - 1] < block_val[top]) {
      --top;
      block_end[top] = i;
      block_sum[top] += block_sum[top + 1];
      block_val[top] = block_sum[top] / static_cast<double>(i - block_start[top] + 1);
    }
    ++top;
  }

  Vector out(k);
  for (std::size_t b = 0; b < top; ++b) {
    const double val = std::max(block_val[b], 0.0);
    for (Index i = block_start[b]; i <= block_end[b]; ++i) {
      const Index idx = order[static_cast<std::size_t>(i)];
      out[idx] = std::copysign(val, v[idx]);
      if (val == 0.0) out[idx] = 0.0;
    }
  }
  return out;
}

Matrix prox_rowwise_sorted_l1(const Matrix& b, const Vector& kappa, double step) {
  if (kappa.size() != b.cols()) throw InvalidInput("kappa length must equal the column count");
  Matrix out(b.rows(), b.cols());
  for (Index j = 0; j < b.rows(); ++j) {
    out.row(j) = prox_sorted_l1(b.row(j).transpose(), kappa, step).transpose();
  }
  return out;
}

Matrix prox_rowwise_sorted_l1_centered(const Matrix& b, const Vector& kappa, double step,
                                       Vector* shifts) {
  if (kappa.size() != b.cols()) throw InvalidInput("kappa length must equal the column count");
  check_weights(kappa, b.cols());
  check_step(step);
  Matrix out(b.rows(), b.cols());
  if (shifts != nullptr) shifts->setZero(b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    const Vector row = b.row(j).transpose();
    // s(c) = sum(prox(row - c)) is continuous and nonincreasing in c with
    // s(min row) >= 0 >= s(max row).
    double lo = row.minCoeff();
    double hi = row.maxCoeff();
    auto total = [&](double c) {
      return prox_sorted_l1((row.array() - c).matrix(), kappa, step).sum();
    };
    double c = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      c = 0.5 * (lo + hi);
      if (c <= lo || c >= hi) break;
      const double s = total(c);
      if (s > 0.0) {
        lo = c;
      } else if (s < 0.0) {
        hi = c;
      } else {
        break;
      }
    }
    Vector u = prox_sorted_l1((row.array() - c).matrix(), kappa, step);
    // The sum is piecewise linear in c with slope -(number of non-zeros);
    // one Newton step removes the residual left by bisection.
    const Index nnz = (u.array() != 0.0).count();
    if (nnz > 0) {
      c += u.sum() / static_cast<double>(nnz);
      u = prox_sorted_l1((row.array() - c).matrix(), kappa, step);
    }
    out.row(j) = u.transpose();
    if (shifts != nullptr) (*shifts)[j] = c;
  }
  return out;
}

Matrix prox_group_slope(const Matrix& b, const Vector& lambda, double step) {
  if (lambda.size() != b.rows()) throw InvalidInput("lambda length must equal the row count");
  const Vector norms = b.rowwise().norm();
  const Vector shrunk = prox_sorted_l1(norms, lambda, step);
  Matrix out = Matrix::Zero(b.rows(), b.cols());
  for (Index j = 0; j < b.rows(); ++j) {
    if (norms[j] > 0.0 && shrunk[j] > 0.0) out.row(j) = b.row(j) * (shrunk[j] / norms[j]);
  }
  return out;
}

Matrix prox_nuclear(const Matrix& b, double lambda, double step) {
  if (!(lambda > 0.0)) throw InvalidInput("nuclear lambda must be positive");
  check_step(step);
  if (!b.allFinite()) throw NumericError("prox_nuclear: non-finite input");
  if (b.size() == 0) return b;
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("prox_nuclear: SVD failed");
  Vector s = (svd.singularValues().array() - step * lambda).cwiseMax(0.0);
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] < 1e-12) s[i] = 0.0;
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

SgsProxResult prox_sparse_group_slope(const Matrix& b, const Vector& lambda,
                                      const Vector& kappa, double step,
                                      const SgsProxOptions& options) {
  if (lambda.size() != b.rows()) throw InvalidInput("lambda length must equal the row count");
  if (kappa.size() != b.cols()) throw InvalidInput("kappa length must equal the column count");
  if (!(options.tol > 0.0)) throw InvalidInput("prox tolerance must be positive");
  check_step(step);
  const bool centered = options.enforce_centering;

  SgsProxResult result;
  if (!options.force_dykstra) {
    Vector shifts;
    const Matrix y = row_prox(b, kappa, step, centered, &shifts);
    Matrix u = prox_group_slope(y, lambda, step);
    if (composition_is_optimal(b, y, u, lambda, kappa, step, centered ? &shifts : nullptr,
                               std::max(options.tol, 1e-9))) {
      result.value = std::move(u);
      result.fast_path = true;
      return result;
    }
  }

  // Dykstra-like splitting for prox_{f+g}: g = row-wise Slope (+ centering),
  // f = group Slope.
  Matrix x = b;
  Matrix p = Matrix::Zero(b.rows(), b.cols());
  Matrix q = Matrix::Zero(b.rows(), b.cols());
  double change = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    const Matrix y = row_prox(x + p, kappa, step, centered, nullptr);
    p += x - y;
    Matrix x_next = prox_group_slope(y + q, lambda, step);
    q += y - x_next;
    change = (x_next - x).norm();
    x = std::move(x_next);
    if (change < options.tol) {
      result.value = std::move(x);
      result.dykstra_iterations = it;
      return result;
    }
  }
  std::ostringstream os;
  os << "sparse group Slope prox did not converge in " << options.max_iter
     << " Dykstra iterations (last change " << change << ")";
  throw ConvergenceError(os.str(), change);
}

Matrix prox(const PenaltySpec& spec, const Matrix& b, double step, const ProxOptions& options) {
  spec.check_dimensions(b.rows(), b.cols());
  return std::visit(
      [&](const auto& w) -> Matrix {
        using T = std::decay_t<decltype(w)>;
        // Group Slope and nuclear proxes scale rows / keep the row space, so
        // they map centered matrices to centered matrices; the constrained
        // prox is the unconstrained one applied after centering.
        if constexpr (std::is_same_v<T, GroupSlopeWeights>) {
          return prox_group_slope(options.enforce_centering ? center_rows(b) : b, w.lambda,
                                  step);
        } else if constexpr (std::is_same_v<T, NuclearWeight>) {
          return prox_nuclear(options.enforce_centering ? center_rows(b) : b, w.lambda, step);
        } else if constexpr (std::is_same_v<T, SparseGroupSlopeWeights>) {
          SgsProxOptions o;
          o.tol = options.tol;
          o.enforce_centering = options.enforce_centering;
          return prox_sparse_group_slope(b, w.lambda, w.kappa, step, o).value;
        } else {
          const Vector kappa = Vector::Constant(b.cols(), w.kappa);
          return options.enforce_centering ? prox_rowwise_sorted_l1_centered(b, kappa, step)
                                           : prox_rowwise_sorted_l1(b, kappa, step);
        }
      },
      spec.form());
}

double dual_norm(const PenaltySpec& spec, const Matrix& a) {
  spec.check_dimensions(a.rows(), a.cols());
  return std::visit(
      [&a](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, GroupSlopeWeights>) {
          return sorted_l1_dual(a.rowwise().norm(), w.lambda);
        } else if constexpr (std::is_same_v<T, NuclearWeight>) {
          if (a.size() == 0) return 0.0;
          Eigen::JacobiSVD<Matrix> svd(a);
          return svd.singularValues()[0] / w.lambda;
        } else if constexpr (std::is_same_v<T, LassoWeight>) {
          return a.cwiseAbs().maxCoeff() / w.kappa;
        } else {
          // A lies in t * (dual ball of f + g) iff prox_{t(f+g)}(A) = 0. With
          // the exact composition prox this reads dual_f(prox_{t g}(A)) <= t.
          const double dual_f = sorted_l1_dual(a.rowwise().norm(), w.lambda);
          double dual_g = 0.0;
          for (Index j = 0; j < a.rows(); ++j) {
            dual_g = std::max(dual_g, sorted_l1_dual(a.row(j).transpose(), w.kappa));
          }
          double hi = std::min(dual_f, dual_g);
          double lo = 0.0;
          if (hi == 0.0) return 0.0;
          for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
            const double t = 0.5 * (lo + hi);
            const Matrix y = prox_rowwise_sorted_l1(a, w.kappa, t);
            if (sorted_l1_dual(y.rowwise().norm(), w.lambda) <= t) {
              hi = t;
            } else {
              lo = t;
            }
          }
          return 0.5 * (lo + hi);
        }
      },
      spec.form());
}

Vector group_slope_weights(Index d, Index num_classes, Index n, const WeightConfig& cfg) {
  if (d < 1 || num_classes < 1 || n < 1) throw InvalidInput("d, L, n must be >= 1");
  cfg.validate();
  Vector lambda(d);
  for (Index j = 1; j <= d; ++j) {
    lambda[j - 1] = std::sqrt((static_cast<double>(num_classes) +
                               std::log(static_cast<double>(d) / static_cast<double>(j))) /
                              static_cast<double>(n)) /
                    cfg.c0;
  }
  return lambda;
}

std::pair<Vector, Vector> sparse_group_slope_weights(Index d, Index num_classes, Index n,
                                                     const WeightConfig& cfg) {
  if (d < 1 || num_classes < 1 || n < 1) throw InvalidInput("d, L, n must be >= 1");
  cfg.validate();
  const double e = std::exp(1.0);
  Vector lambda(d);
  for (Index j = 1; j <= d; ++j) {
    lambda[j - 1] = cfg.c1 * std::sqrt(std::log(static_cast<double>(d) * e / static_cast<double>(j)) /
                                       static_cast<double>(n));
  }
  Vector kappa(num_classes);
  for (Index l = 1; l <= num_classes; ++l) {
    kappa[l - 1] = cfg.c2 * std::sqrt(std::log(static_cast<double>(num_classes) * e /
                                               static_cast<double>(l)) /
                                      static_cast<double>(n));
  }
  return {lambda, kappa};
}

double group_lasso_lambda(Index d, Index num_classes, Index n, const WeightConfig& cfg) {
  if (d < 1 || num_classes < 1 || n < 1) throw InvalidInput("d, L, n must be >= 1");
  cfg.validate();
  return std::sqrt((static_cast<double>(num_classes) + std::log(static_cast<double>(d))) /
                   static_cast<double>(n)) /
         cfg.c0;
}

std::pair<double, double> sparse_group_lasso_weights(Index d, Index num_classes, Index n,
                                                     const WeightConfig& cfg) {
  if (d < 2 || num_classes < 2 || n < 1) {
    throw InvalidInput("sparse group lasso weights need d >= 2, L >= 2, n >= 1");
  }
  cfg.validate();
  const double nn = static_cast<double>(n);
  return {cfg.c1 * std::sqrt(std::log(static_cast<double>(d)) / nn),
          cfg.c2 * std::sqrt(std::log(static_cast<double>(num_classes)) / nn)};
}

double nuclear_lambda(const Matrix& features, Index num_classes, const WeightConfig& cfg) {
  const Index n = features.rows();
  const Index d = features.cols();
  if (n < 2) throw InvalidInput("nuclear_lambda needs n >= 2");
  if (num_classes < 2) throw InvalidInput("nuclear_lambda needs L >= 2");
  cfg.validate();
  const Matrix v = features.transpose() * features / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v, Eigen::EigenvaluesOnly);
  const double tau1 = eig.eigenvalues().maxCoeff();
  const double m = v.trace();
  if (!(tau1 > 0.0) || !(m > 0.0)) throw InvalidInput("features have zero second moment");
  const double nn = static_cast<double>(n);
  return cfg.c_nuclear *
         (std::sqrt(tau1) + std::sqrt(m * std::log(static_cast<double>(d)) / nn)) *
         (std::sqrt(static_cast<double>(num_classes - 1)) + std::sqrt(static_cast<double>(d))) /
         std::sqrt(nn);
}

PenaltySpec formula_penalty(PenaltyFamily family, const Matrix& features, Index num_classes,
                            const WeightConfig& cfg, double scale) {
  const Index n = features.rows();
  const Index d = features.cols();
  switch (family) {
    case PenaltyFamily::kGroupSlope:
      return PenaltySpec::group_slope(group_slope_weights(d, num_classes, n, cfg) * scale);
    case PenaltyFamily::kSparseGroupSlope: {
      auto [lambda, kappa] = sparse_group_slope_weights(d, num_classes, n, cfg);
      return PenaltySpec::sparse_group_slope(lambda * scale, kappa * scale);
    }
    case PenaltyFamily::kNuclear:
      return PenaltySpec::nuclear(nuclear_lambda(features, num_classes, cfg) * scale);
    case PenaltyFamily::kGroupLasso:
      return PenaltySpec::group_lasso(d, group_lasso_lambda(d, num_classes, n, cfg) * scale);
    case PenaltyFamily::kSparseGroupLasso: {
      auto [lambda, kappa] = sparse_group_lasso_weights(d, num_classes, n, cfg);
      return PenaltySpec::sparse_group_lasso(d, num_classes, lambda * scale, kappa * scale);
    }
    case PenaltyFamily::kLasso:
      break;
  }
  throw InvalidInput("no weight formula exists for the plain lasso; give kappa explicitly");
}

}  // namespace msl
