#include "msl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "msl/model.hpp"
#include "msl/penalties.hpp"

namespace msl {

namespace {

MonteCarloEstimate mean_and_stderr(const Vector& values) {
  const double m = static_cast<double>(values.size());
  MonteCarloEstimate out;
  out.estimate = values.mean();
  if (values.size() > 1) {
    const double var = (values.array() - out.estimate).square().sum() / (m - 1.0);
    out.std_error = std::sqrt(var / m);
  }
  return out;
}

// k distinct indices from [0, n), sorted.
std::vector<int> choose_subset(int n, int k, RandomStream& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

Matrix draw_truth(const SyntheticSpec& spec, RandomStream& rng) {
  const int d = spec.d;
  const int L = spec.num_classes;
  Matrix b = Matrix::Zero(d, L);
  if (spec.signal_scale == 0.0) return b;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GlobalRowSparse>) {
          for (int j : choose_subset(d, s.d0, rng)) {
            for (int l = 0; l < L; ++l) b(j, l) = rng.normal();
          }
          b = center_rows(b);
        } else if constexpr (std::is_same_v<T, DoubleRowSparse>) {
          const std::vector<int> rows = choose_subset(d, s.d0, rng);
          for (std::size_t k = 0; k < rows.size(); ++k) {
            // Centering within the m_j chosen entries keeps the row both
            // m_j-sparse and zero-sum.
            const std::vector<int> cols = choose_subset(L, s.m[k], rng);
            double mean = 0.0;
            for (int l : cols) {
              b(rows[k], l) = rng.normal();
              mean += b(rows[k], l);
            }
            mean /= static_cast<double>(cols.size());
            for (int l : cols) b(rows[k], l) -= mean;
          }
        } else {
          Matrix u(d, s.r0), v(s.r0, L);
          for (Index i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
          for (Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
          b = center_rows(Matrix(u * v / std::sqrt(static_cast<double>(s.r0))));
        }
      },
      spec.structure);
  return b * spec.signal_scale;
}

}  // namespace

SecondMomentReport second_moments(const Matrix& features) {
  if (features.rows() < 1) throw InvalidInput("second_moments needs n >= 1");
  const Matrix v = features.transpose() * features / static_cast<double>(features.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v, Eigen::EigenvaluesOnly);
  SecondMomentReport r;
  r.tau_1 = eig.eigenvalues().maxCoeff();
  r.tau_d = std::max(0.0, eig.eigenvalues().minCoeff());
  r.m_hat = features.rowwise().squaredNorm().mean();
  return r;
}

std::vector<double> default_margin_grid(int points) {
  if (points < 2) throw InvalidInput("margin grid needs at least 2 points");
  std::vector<double> h(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    h[static_cast<std::size_t>(k)] =
        std::pow(10.0, -3.0 + 3.0 * static_cast<double>(k) / static_cast<double>(points - 1));
  }
  h.back() = 1.0;
  return h;
}

MarginReport margin_report(const Matrix& b, const Matrix& features,
                           const std::vector<double>& h_grid) {
  if (!std::is_sorted(h_grid.begin(), h_grid.end())) {
    throw InvalidInput("margin grid must be nondecreasing");
  }
  const Matrix p = class_probs_batch(b, features);
  std::vector<double> gaps(static_cast<std::size_t>(p.rows()));
  for (Index i = 0; i < p.rows(); ++i) {
    double first = -1.0, second = -1.0;
    for (Index l = 0; l < p.cols(); ++l) {
      const double v = p(i, l);
      if (v > first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
    gaps[static_cast<std::size_t>(i)] = p.cols() > 1 ? first - second : 1.0;
  }
  std::sort(gaps.begin(), gaps.end());

  MarginReport r;
  r.h_grid = h_grid;
  const double m = static_cast<double>(gaps.size());
  for (double h : h_grid) {
    // Gaps never exceed 1, so h >= 1 counts every sample.
    const double count =
        h >= 1.0 ? m : static_cast<double>(std::upper_bound(gaps.begin(), gaps.end(), h) - gaps.begin());
    r.cdf.push_back(count / m);
  }

  if (!h_grid.empty() && h_grid.front() > 0.0) {
    const double h_max = 10.0 * h_grid.front();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (std::size_t i = 0; i < h_grid.size() && h_grid[i] <= h_max * (1 + 1e-12); ++i) {
      if (r.cdf[i] <= 0.0) continue;
      const double x = std::log(h_grid[i]), y = std::log(r.cdf[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++k;
    }
    const double denom = k * sxx - sx * sx;
    if (k >= 2 && denom > 0.0) r.fitted_alpha = (k * sxy - sx * sy) / denom;
  }
  return r;
}

Matrix draw_features(const SyntheticSpec& spec, Index m, RandomStream& rng) {
  const Index d = spec.d;
  Matrix x(m, d);
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, GaussianLaw>) {
          for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < d; ++j) x(i, j) = rng.normal();
          }
          if (law.covariance.size() != 0) {
            Eigen::LLT<Matrix> llt(law.covariance);
            if (llt.info() != Eigen::Success) {
              throw InvalidInput("Gaussian covariance is not positive definite");
            }
            x = x * llt.matrixL().transpose().toDenseMatrix();
          }
        } else if constexpr (std::is_same_v<T, RademacherLaw>) {
          for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < d; ++j) x(i, j) = rng.rademacher();
          }
        } else {
          const double scale = std::sqrt((law.dof - 2.0) / law.dof);
          for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < d; ++j) x(i, j) = scale * rng.student_t(law.dof);
          }
        }
      },
      spec.feature_law);
  return x;
}

std::vector<int> draw_labels(const Matrix& b, const Matrix& features, RandomStream& rng) {
  const Matrix p = class_probs_batch(b, features);
  std::vector<int> y(static_cast<std::size_t>(p.rows()));
  std::vector<double> row(static_cast<std::size_t>(p.cols()));
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index l = 0; l < p.cols(); ++l) row[static_cast<std::size_t>(l)] = p(i, l);
    y[static_cast<std::size_t>(i)] = rng.categorical(row);
  }
  return y;
}

GeneratedData generate(const SyntheticSpec& spec) {
  spec.validate();
  RandomStream coef_rng = rng_stream(spec.seed, kCoefficientStream);
  RandomStream feat_rng = rng_stream(spec.seed, kFeatureStream);
  RandomStream label_rng = rng_stream(spec.seed, kLabelStream);

  Matrix b = draw_truth(spec, coef_rng);
  Matrix x = draw_features(spec, spec.n, feat_rng);
  const double c_star = spec.c_star();
  const double max_score = (x * b).cwiseAbs().maxCoeff();
  if (max_score > c_star) b *= c_star / max_score;
  std::vector<int> y = draw_labels(b, x, label_rng);
  return GeneratedData{Dataset(std::move(x), std::move(y), spec.num_classes),
                       CoefficientMatrix(std::move(b), true)};
}

MonteCarloEstimate estimate_bayes_risk(const CoefficientMatrix& b, const SyntheticSpec& spec,
                                       int mc_samples, std::uint64_t stream_id) {
  if (mc_samples < 1) throw InvalidInput("mc_samples must be >= 1");
  RandomStream rng = rng_stream(spec.seed, stream_id);
  const Matrix x = draw_features(spec, mc_samples, rng);
  const Matrix p = class_probs_batch(b.values(), x);
  const Vector loss = 1.0 - p.rowwise().maxCoeff().array();
  return mean_and_stderr(loss);
}

RiskReport risk_report(const CoefficientMatrix& b_hat, const CoefficientMatrix& b_true,
                       const SyntheticSpec& spec, int test_size, int mc_samples,
                       const Dataset* train) {
  if (b_hat.d() != b_true.d() || b_hat.num_classes() != b_true.num_classes()) {
    throw InvalidInput("risk_report: coefficient shapes differ");
  }
  if (b_true.d() != spec.d || b_true.num_classes() != spec.num_classes) {
    throw InvalidInput("risk_report: coefficients do not match the synthetic spec");
  }
  if (test_size < 1) throw InvalidInput("test_size must be >= 1");

  RandomStream feat_rng = rng_stream(spec.seed, kTestFeatureStream);
  RandomStream label_rng = rng_stream(spec.seed, kTestLabelStream);
  const Matrix x = draw_features(spec, test_size, feat_rng);
  const std::vector<int> y = draw_labels(b_true.values(), x, label_rng);
  const std::vector<int> pred = predict_batch(b_hat.values(), x);
  const Matrix p_true = class_probs_batch(b_true.values(), x);

  RiskReport r;
  Vector gap(test_size);
  std::size_t wrong = 0;
  for (Index i = 0; i < test_size; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (pred[k] != y[k]) ++wrong;
    gap[i] = p_true.row(i).maxCoeff() - p_true(i, pred[k]);
  }
  r.test_error = static_cast<double>(wrong) / static_cast<double>(test_size);

  if (train != nullptr) {
    const std::vector<int> train_pred = predict_batch(b_hat.values(), train->features());
    std::size_t train_wrong = 0;
    for (std::size_t i = 0; i < train_pred.size(); ++i) {
      if (train_pred[i] != train->labels()[i]) ++train_wrong;
    }
    r.train_error = static_cast<double>(train_wrong) / static_cast<double>(train_pred.size());
  } else {
    r.train_error = std::numeric_limits<double>::quiet_NaN();
  }

  const MonteCarloEstimate bayes = estimate_bayes_risk(b_true, spec, mc_samples);
  r.bayes_risk = bayes.estimate;
  r.bayes_stderr = bayes.std_error;
  const MonteCarloEstimate excess = mean_and_stderr(gap);
  r.excess_risk = excess.estimate;
  r.excess_stderr = excess.std_error;
  r.kl_risk = kl_divergence(b_true.values(), b_hat.values(), x);

  const MarginReport margin = margin_report(b_true.values(), x, default_margin_grid());
  for (std::size_t k = 0; k < margin.h_grid.size(); ++k) {
    r.margin_cdf.emplace_back(margin.h_grid[k], margin.cdf[k]);
  }
  return r;
}

RademacherEstimate rademacher_mc(const PenaltySpec& spec, const Matrix& features,
                                 Index num_classes, int num_draws, std::uint64_t seed) {
  if (num_draws < 1) throw InvalidInput("num_draws must be >= 1");
  if (num_classes < 1) throw InvalidInput("num_classes must be >= 1");
  spec.check_dimensions(features.cols(), num_classes);
  const Index n = features.rows();
  const double root_n = std::sqrt(static_cast<double>(n));
  RandomStream rng = rng_stream(seed, 0);
  RademacherEstimate out;
  Vector values(num_draws);
  Matrix sigma(n, num_classes);
  for (int k = 0; k < num_draws; ++k) {
    for (Index c = 0; c < num_classes; ++c) {
      for (Index i = 0; i < n; ++i) sigma(i, c) = rng.rademacher();
    }
    const Matrix a = features.transpose() * sigma / root_n;
    values[k] = dual_norm(spec, a);
  }
  const MonteCarloEstimate m = mean_and_stderr(values);
  out.estimate = m.estimate;
  out.std_error = m.std_error;
  out.draws.assign(values.begin(), values.end());
  return out;
}

}  // namespace msl
