#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "msl/core.hpp"
#include "msl/penalties.hpp"
#include "oracles.hpp"

using msl::Matrix;
using msl::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double prox_objective(const Matrix& u, const Matrix& v, double step, const msl::PenaltySpec& s) {
  return 0.5 * (u - v).squaredNorm() + step * msl::penalty_value(s, u);
}

// One spec of every family on d x L matrices.
std::vector<msl::PenaltySpec> all_specs(int d, int L, std::mt19937_64& rng) {
  return {msl::PenaltySpec::group_slope(oracle::decreasing_weights(d, rng)),
          msl::PenaltySpec::sparse_group_slope(oracle::decreasing_weights(d, rng),
                                               oracle::decreasing_weights(L, rng, 0.5)),
          msl::PenaltySpec::nuclear(0.7),
          msl::PenaltySpec::group_lasso(d, 0.6),
          msl::PenaltySpec::sparse_group_lasso(d, L, 0.5, 0.3),
          msl::PenaltySpec::lasso(0.4)};
}

oracle::MatrixPenalty oracle_penalty(const msl::PenaltySpec& s) {
  return std::visit(
      [&](const auto& w) -> oracle::MatrixPenalty {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, msl::GroupSlopeWeights>) {
          return oracle::group_slope_penalty(w.lambda);
        } else if constexpr (std::is_same_v<T, msl::SparseGroupSlopeWeights>) {
          return oracle::sparse_group_slope_penalty(w.lambda, w.kappa);
        } else if constexpr (std::is_same_v<T, msl::NuclearWeight>) {
          return oracle::nuclear_penalty(w.lambda);
        } else {
          const double k = w.kappa;
          return {[k](const Matrix& b) { return k * b.cwiseAbs().sum(); },
                  [k](const Matrix& b) { return Matrix(k * b.array().sign().matrix()); }};
        }
      },
      s.form());
}

}  // namespace

// ---- values --------------------------------------------------------------

TEST(PenaltyValue, ZeroMatrixIsZeroForEverySpec) {
  std::mt19937_64 rng(1);
  for (const auto& s : all_specs(4, 3, rng)) EXPECT_EQ(msl::penalty_value(s, Matrix::Zero(4, 3)), 0.0);
}

TEST(PenaltyValue, GroupSlopeExample) {
  Matrix b(2, 2);
  b << 0, 1, 3, 0;  // row norms (1, 3)
  EXPECT_DOUBLE_EQ(msl::penalty_value(msl::PenaltySpec::group_slope(vec({2, 1})), b), 7.0);
}

TEST(PenaltyValue, NuclearExample) {
  Matrix b(2, 2);
  b << 2, 0, 0, 1;
  EXPECT_NEAR(msl::penalty_value(msl::PenaltySpec::nuclear(0.5), b), 1.5, 1e-15);
}

TEST(PenaltyValue, MatchesDefinitions) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Matrix b = oracle::gaussian_matrix(5, 4, rng);
    for (const auto& s : all_specs(5, 4, rng)) {
      EXPECT_NEAR(msl::penalty_value(s, b), oracle_penalty(s).value(b), 1e-12) << s.name();
    }
  }
}

TEST(PenaltyValue, DimensionMismatch) {
  EXPECT_THROW(msl::penalty_value(msl::PenaltySpec::group_slope(vec({2, 1})), Matrix::Zero(3, 2)),
               msl::InvalidInput);
}

TEST(SortedL1, NormAndDual) {
  EXPECT_DOUBLE_EQ(msl::sorted_l1_norm(vec({-1, 3, 2}), vec({3, 2, 1})), 9 + 4 + 1);
  // max(3/3, 5/5, 6/6)
  EXPECT_DOUBLE_EQ(msl::sorted_l1_dual(vec({-1, 3, 2}), vec({3, 2, 1})), 1.0);
}

// ---- sorted-l1 prox ------------------------------------------------------

TEST(ProxSortedL1, ZeroWeightsIsIdentity) {
  const Vector v = vec({0.3, -2, 1});
  EXPECT_EQ(msl::prox_sorted_l1(v, Vector::Zero(3), 1.0), v);
}

TEST(ProxSortedL1, EqualWeightsExample) {
  const Vector u = msl::prox_sorted_l1(vec({3, 1}), vec({2, 2}), 1.0);
  EXPECT_EQ(u, vec({1, 0}));
}

TEST(ProxSortedL1, BruteForceExample) {
  std::mt19937_64 rng(3);
  const Vector w = vec({1.0, 0.1});
  const Matrix v = vec({1.0, 0.9});
  const Vector u = msl::prox_sorted_l1(v.col(0), w, 1.0);
  const Matrix ref = oracle::brute_force_prox(oracle::sorted_l1_penalty(w), v, 1.0, false, 4, rng);
  EXPECT_LE((u - ref.col(0)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(ProxSortedL1, ConstantWeightsAreSoftThresholding) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vector v = oracle::gaussian_matrix(8, 1, rng).col(0);
    const double w = 0.4, step = 0.9;
    const Vector u = msl::prox_sorted_l1(v, Vector::Constant(8, w), step);
    for (int i = 0; i < 8; ++i) {
      const double soft = std::copysign(std::max(std::abs(v(i)) - step * w, 0.0), v(i));
      EXPECT_EQ(u(i), soft);
    }
  }
}

TEST(ProxSortedL1, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const Vector w = oracle::decreasing_weights(5, rng);
    const Matrix v = oracle::gaussian_matrix(5, 1, rng);
    const Vector u = msl::prox_sorted_l1(v.col(0), w, 0.8);
    const Matrix ref =
        oracle::brute_force_prox(oracle::sorted_l1_penalty(w), v, 0.8, false, 4, rng);
    EXPECT_LE((u - ref.col(0)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(ProxSortedL1, TiesKeepSymmetry) {
  const Vector u = msl::prox_sorted_l1(vec({1, -1, 1}), vec({1, 0.5, 0.1}), 0.5);
  EXPECT_DOUBLE_EQ(std::abs(u(0)), std::abs(u(1)));
  EXPECT_DOUBLE_EQ(std::abs(u(1)), std::abs(u(2)));
}

TEST(ProxSortedL1, RejectsIncreasingWeights) {
  EXPECT_THROW(msl::prox_sorted_l1(vec({1, 2}), vec({1, 2}), 1.0), msl::InvalidInput);
}

// ---- group Slope prox ----------------------------------------------------

TEST(ProxGroupSlope, ZeroAndFullShrinkage) {
  EXPECT_EQ(msl::prox_group_slope(Matrix::Zero(3, 2), vec({3, 2, 1}), 1.0), Matrix::Zero(3, 2));
  Matrix b(1, 3);
  b << 0.3, -0.2, 0.1;
  EXPECT_EQ(msl::prox_group_slope(b, vec({1.0}), 1.0), Matrix::Zero(1, 3));
}

TEST(ProxGroupSlope, RandomPerturbationOptimality) {
  std::mt19937_64 rng(6);
  const Vector lambda = oracle::decreasing_weights(4, rng);
  const auto spec = msl::PenaltySpec::group_slope(lambda);
  const Matrix v = oracle::gaussian_matrix(4, 3, rng);
  const Matrix u = msl::prox_group_slope(v, lambda, 0.7);
  const double at = prox_objective(u, v, 0.7, spec);
  for (int k = 0; k < 1000; ++k) {
    const Matrix delta = oracle::gaussian_matrix(4, 3, rng);
    EXPECT_LE(at, prox_objective(u + 1e-3 * delta, v, 0.7, spec) + 1e-14);
  }
}

TEST(ProxGroupSlope, PreservesRowDirections) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const Matrix v = oracle::gaussian_matrix(6, 3, rng);
    const Matrix u = msl::prox_group_slope(v, oracle::decreasing_weights(6, rng, 2.0), 1.0);
    for (int j = 0; j < 6; ++j) {
      const double c = u.row(j).dot(v.row(j)) / v.row(j).squaredNorm();
      EXPECT_GE(c, 0.0);
      EXPECT_LE((u.row(j) - c * v.row(j)).norm(), 1e-14);
    }
  }
}

TEST(ProxGroupSlope, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const Vector lambda = oracle::decreasing_weights(3, rng);
    const Matrix v = oracle::gaussian_matrix(3, 2, rng);
    const Matrix u = msl::prox_group_slope(v, lambda, 1.0);
    const Matrix ref =
        oracle::brute_force_prox(oracle::group_slope_penalty(lambda), v, 1.0, false, 4, rng);
    EXPECT_LE((u - ref).cwiseAbs().maxCoeff(), 1e-5);
  }
}

// ---- sparse group Slope prox ---------------------------------------------

TEST(ProxSparseGroupSlope, ZeroMatrix) {
  const auto r = msl::prox_sparse_group_slope(Matrix::Zero(3, 3), vec({3, 2, 1}), vec({1, 0.5, 0.2}), 1.0);
  EXPECT_EQ(r.value, Matrix::Zero(3, 3));
}

TEST(ProxSparseGroupSlope, ConstantWeightsMatchClosedForm) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const Matrix v = oracle::gaussian_matrix(5, 4, rng);
    const double lambda = 0.6, kappa = 0.3, step = 0.9;
    const Matrix ref = oracle::sparse_group_lasso_prox(v, lambda, kappa, step);
    const Vector l = Vector::Constant(5, lambda), kv = Vector::Constant(4, kappa);
    const auto fast = msl::prox_sparse_group_slope(v, l, kv, step);
    EXPECT_TRUE(fast.fast_path);
    EXPECT_LE((fast.value - ref).cwiseAbs().maxCoeff(), 1e-12);
    msl::SgsProxOptions opt;
    opt.force_dykstra = true;
    opt.tol = 1e-12;
    const auto slow = msl::prox_sparse_group_slope(v, l, kv, step, opt);
    EXPECT_FALSE(slow.fast_path);
    EXPECT_LE((slow.value - ref).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProxSparseGroupSlope, MatchesBruteForce) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 5; ++k) {
    const Vector lambda = oracle::decreasing_weights(3, rng);
    const Vector kappa = oracle::decreasing_weights(3, rng, 0.6);
    const Matrix v = oracle::gaussian_matrix(3, 3, rng, 1.5);
    const auto r = msl::prox_sparse_group_slope(v, lambda, kappa, 1.0);
    const Matrix ref = oracle::brute_force_prox(oracle::sparse_group_slope_penalty(lambda, kappa),
                                                v, 1.0, false, 4, rng);
    EXPECT_LE((r.value - ref).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(ProxSparseGroupSlope, CenteredMatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const Vector lambda = oracle::decreasing_weights(3, rng);
    const Vector kappa = oracle::decreasing_weights(3, rng, 0.6);
    const Matrix v = oracle::gaussian_matrix(3, 3, rng, 1.5);
    msl::SgsProxOptions opt;
    opt.enforce_centering = true;
    const auto r = msl::prox_sparse_group_slope(v, lambda, kappa, 1.0, opt);
    EXPECT_LE(r.value.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9);
    const Matrix ref = oracle::brute_force_prox(oracle::sparse_group_slope_penalty(lambda, kappa),
                                                v, 1.0, true, 4, rng);
    EXPECT_LE((r.value - ref).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(ProxSparseGroupSlope, DykstraAgreesWithFastPath) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20; ++k) {
    const Vector lambda = oracle::decreasing_weights(4, rng);
    const Vector kappa = oracle::decreasing_weights(3, rng, 0.5);
    const Matrix v = oracle::gaussian_matrix(4, 3, rng, 1.5);
    const auto a = msl::prox_sparse_group_slope(v, lambda, kappa, 0.8);
    msl::SgsProxOptions opt;
    opt.force_dykstra = true;
    opt.tol = 1e-12;
    const auto b = msl::prox_sparse_group_slope(v, lambda, kappa, 0.8, opt);
    EXPECT_LE((a.value - b.value).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProxSparseGroupSlope, IterationCapRaisesConvergenceError) {
  std::mt19937_64 rng(13);
  msl::SgsProxOptions opt;
  opt.force_dykstra = true;
  opt.max_iter = 1;
  opt.tol = 1e-300;
  const Matrix v = oracle::gaussian_matrix(4, 3, rng, 2.0);
  EXPECT_THROW(msl::prox_sparse_group_slope(v, oracle::decreasing_weights(4, rng),
                                            oracle::decreasing_weights(3, rng), 1.0, opt),
               msl::ConvergenceError);
}

TEST(ProxRowwise, CenteredRowsSumToZeroAndMatchBruteForce) {
  std::mt19937_64 rng(14);
  const Vector kappa = oracle::decreasing_weights(4, rng);
  const oracle::MatrixPenalty pen{
      [kappa](const Matrix& b) { return oracle::rowwise_slope(b, kappa); },
      [kappa](const Matrix& b) { return oracle::rowwise_slope_subgradient(b, kappa); }};
  for (int k = 0; k < 5; ++k) {
    const Matrix v = oracle::gaussian_matrix(2, 4, rng, 1.5);
    Vector shifts;
    const Matrix u = msl::prox_rowwise_sorted_l1_centered(v, kappa, 1.0, &shifts);
    EXPECT_EQ(shifts.size(), 2);
    EXPECT_LE(u.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    const Matrix ref = oracle::brute_force_prox(pen, v, 1.0, true, 4, rng);
    EXPECT_LE((u - ref).cwiseAbs().maxCoeff(), 1e-4);
  }
}

// ---- nuclear prox --------------------------------------------------------

TEST(ProxNuclear, DiagonalExample) {
  Matrix b(2, 2);
  b << 2, 0, 0, 0.5;
  Matrix expected(2, 2);
  expected << 1, 0, 0, 0;
  EXPECT_LE((msl::prox_nuclear(b, 1.0, 1.0) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProxNuclear, RankOne) {
  std::mt19937_64 rng(15);
  const Vector u = oracle::gaussian_matrix(4, 1, rng).col(0).normalized();
  const Vector v = oracle::gaussian_matrix(3, 1, rng).col(0).normalized();
  const Matrix b = 3.0 * u * v.transpose();
  EXPECT_LE((msl::prox_nuclear(b, 2.0, 0.5) - 2.0 * u * v.transpose()).cwiseAbs().maxCoeff(),
            1e-14);
  EXPECT_EQ(msl::prox_nuclear(b, 4.0, 1.0), Matrix::Zero(4, 3));
}

TEST(ProxNuclear, RandomPerturbationOptimality) {
  std::mt19937_64 rng(16);
  const auto spec = msl::PenaltySpec::nuclear(0.8);
  const Matrix v = oracle::gaussian_matrix(4, 3, rng);
  const Matrix u = msl::prox_nuclear(v, 0.8, 1.0);
  const double at = prox_objective(u, v, 1.0, spec);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_LE(at, prox_objective(u + 1e-3 * oracle::gaussian_matrix(4, 3, rng), v, 1.0, spec) +
                      1e-14);
  }
}

TEST(ProxNuclear, RankDoesNotGrow) {
  std::mt19937_64 rng(17);
  const Matrix b = oracle::gaussian_matrix(5, 2, rng) * oracle::gaussian_matrix(2, 4, rng);
  const Matrix u = msl::prox_nuclear(b, 0.3, 1.0);
  Eigen::JacobiSVD<Matrix> svd(u);
  EXPECT_LE(svd.singularValues()(2), 1e-12);
}

// ---- properties shared by every prox ---------------------------------------

TEST(Prox, NonexpansiveOnRandomPairs) {
  std::mt19937_64 rng(18);
  for (const auto& s : all_specs(4, 3, rng)) {
    for (bool centered : {false, true}) {
      msl::ProxOptions opt;
      opt.enforce_centering = centered;
      opt.tol = 1e-12;
      for (int k = 0; k < 100; ++k) {
        const Matrix a = oracle::gaussian_matrix(4, 3, rng);
        const Matrix b = oracle::gaussian_matrix(4, 3, rng);
        const double lhs = (msl::prox(s, a, 0.9, opt) - msl::prox(s, b, 0.9, opt)).norm();
        EXPECT_LE(lhs, (a - b).norm() + 1e-10) << s.name();
      }
    }
  }
}

TEST(Prox, DecreasesPenaltyAndObjective) {
  std::mt19937_64 rng(19);
  for (const auto& s : all_specs(4, 3, rng)) {
    for (int k = 0; k < 100; ++k) {
      const Matrix v = oracle::gaussian_matrix(4, 3, rng, 2.0);
      const Matrix u = msl::prox(s, v, 0.7);
      EXPECT_LE(msl::penalty_value(s, u), msl::penalty_value(s, v) + 1e-10) << s.name();
      EXPECT_LE(prox_objective(u, v, 0.7, s), prox_objective(v, v, 0.7, s) + 1e-10) << s.name();
    }
  }
}

TEST(Prox, CenteredOutputHasZeroRowSums) {
  std::mt19937_64 rng(20);
  msl::ProxOptions opt;
  opt.enforce_centering = true;
  for (const auto& s : all_specs(4, 3, rng)) {
    const Matrix u = msl::prox(s, oracle::gaussian_matrix(4, 3, rng, 2.0), 0.5, opt);
    EXPECT_LE(u.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9) << s.name();
  }
}

// ---- dual norms ------------------------------------------------------------

TEST(DualNorm, GroupSlopeExamples) {
  Matrix a(2, 2);
  a << 1, 0, 0, 1;
  EXPECT_DOUBLE_EQ(msl::dual_norm(msl::PenaltySpec::group_slope(vec({1, 1})), a), 1.0);
  a << 2, 0, 0, 0;
  EXPECT_DOUBLE_EQ(msl::dual_norm(msl::PenaltySpec::group_slope(vec({1, 1})), a), 2.0);
}

TEST(DualNorm, NuclearIsScaledSpectralNorm) {
  std::mt19937_64 rng(21);
  const Matrix a = oracle::gaussian_matrix(5, 3, rng);
  const double top = std::sqrt(oracle::jacobi_eigenvalues(a.transpose() * a)(0));
  EXPECT_NEAR(msl::dual_norm(msl::PenaltySpec::nuclear(0.5), a), top / 0.5, 1e-12);
}

TEST(DualNorm, RandomSearchLowerBoundsWithinFivePercent) {
  std::mt19937_64 rng(22);
  for (const auto& s : all_specs(4, 3, rng)) {
    const Matrix a = oracle::gaussian_matrix(4, 3, rng);
    const double dual = msl::dual_norm(s, a);
    const double found = oracle::random_search_dual(
        [&s](const Matrix& b) { return msl::penalty_value(s, b); }, a, 2000, rng);
    EXPECT_LE(found, dual * (1 + 1e-6)) << s.name();
    EXPECT_GE(found, 0.95 * dual) << s.name();
  }
}

TEST(DualNorm, CauchySchwarz) {
  std::mt19937_64 rng(23);
  for (const auto& s : all_specs(4, 3, rng)) {
    for (int k = 0; k < 100; ++k) {
      const Matrix a = oracle::gaussian_matrix(4, 3, rng);
      const Matrix b = oracle::gaussian_matrix(4, 3, rng);
      EXPECT_LE((a.array() * b.array()).sum(),
                msl::dual_norm(s, a) * msl::penalty_value(s, b) * (1 + 1e-6) + 1e-12)
          << s.name();
    }
  }
}

TEST(DualNorm, InverseHomogeneousInWeights) {
  std::mt19937_64 rng(24);
  for (const auto& s : all_specs(4, 3, rng)) {
    const Matrix a = oracle::gaussian_matrix(4, 3, rng);
    EXPECT_NEAR(msl::dual_norm(s.scaled(4.0), a), msl::dual_norm(s, a) / 4.0,
                1e-6 * msl::dual_norm(s, a))
        << s.name();
  }
}

// ---- weight formulas -------------------------------------------------------

TEST(Weights, GroupSlopeExamples) {
  const Vector l = msl::group_slope_weights(4, 3, 100);
  EXPECT_NEAR(l(0), 0.20943, 5e-6);
  EXPECT_NEAR(l(0), std::sqrt((3 + std::log(4.0)) / 100), 1e-15);
  EXPECT_NEAR(l(3), std::sqrt(3.0 / 100), 1e-15);
  for (int j = 1; j < 4; ++j) EXPECT_LT(l(j), l(j - 1));
}

TEST(Weights, SparseGroupSlopeExamples) {
  const auto [lambda, kappa] = msl::sparse_group_slope_weights(10, 4, 100);
  EXPECT_NEAR(lambda(0), 0.18173, 5e-6);  // sqrt(ln(10 e) / 100)
  EXPECT_NEAR(lambda(9), std::sqrt(1.0 / 100), 1e-15);
  EXPECT_NEAR(kappa(3), std::sqrt(1.0 / 100), 1e-15);
}

TEST(Weights, ClosedFormsWithConstants) {
  msl::WeightConfig cfg;
  cfg.c0 = 1.7;
  cfg.c1 = 0.3;
  cfg.c2 = 2.2;
  const int d = 13, L = 6, n = 321;
  const Vector gs = msl::group_slope_weights(d, L, n, cfg);
  const auto [lambda, kappa] = msl::sparse_group_slope_weights(d, L, n, cfg);
  for (int j = 1; j <= d; ++j) {
    EXPECT_NEAR(gs(j - 1), (1 / 1.7) * std::sqrt((L + std::log(double(d) / j)) / n), 1e-12);
    EXPECT_NEAR(lambda(j - 1), 0.3 * std::sqrt(std::log(d * std::exp(1.0) / j) / n), 1e-12);
  }
  for (int l = 1; l <= L; ++l) {
    EXPECT_NEAR(kappa(l - 1), 2.2 * std::sqrt(std::log(L * std::exp(1.0) / l) / n), 1e-12);
  }
  EXPECT_NEAR(msl::group_lasso_lambda(d, L, n, cfg), (1 / 1.7) * std::sqrt((L + std::log(13.0)) / n),
              1e-12);
  const auto [gl, kl] = msl::sparse_group_lasso_weights(d, L, n, cfg);
  EXPECT_NEAR(gl, 0.3 * std::sqrt(std::log(13.0) / n), 1e-12);
  EXPECT_NEAR(kl, 2.2 * std::sqrt(std::log(6.0) / n), 1e-12);
}

TEST(Weights, ConfigMustBePositive) {
  msl::WeightConfig cfg;
  cfg.c2 = 0.0;
  EXPECT_THROW(cfg.validate(), msl::InvalidInput);
  EXPECT_THROW(msl::sparse_group_slope_weights(3, 3, 10, cfg), msl::InvalidInput);
}

TEST(NuclearLambda, MatchesFormulaWithOracleMoments) {
  std::mt19937_64 rng(25);
  const Matrix x = oracle::gaussian_matrix(200, 6, rng);
  const double n = 200, d = 6, L = 4;
  const double tau1 = oracle::jacobi_eigenvalues(x.transpose() * x / n)(0);
  const double m = x.rowwise().squaredNorm().mean();
  const double expected =
      (std::sqrt(tau1) + std::sqrt(m * std::log(d) / n)) * (std::sqrt(L - 1) + std::sqrt(d)) /
      std::sqrt(n);
  EXPECT_NEAR(msl::nuclear_lambda(x, 4), expected, 1e-10);
  msl::WeightConfig cfg;
  cfg.c_nuclear = 3.0;
  EXPECT_NEAR(msl::nuclear_lambda(x, 4, cfg), 3.0 * expected, 1e-10);
}

TEST(NuclearLambda, DoublesWhenFeaturesDouble) {
  std::mt19937_64 rng(26);
  const Matrix x = oracle::gaussian_matrix(100, 5, rng);
  EXPECT_NEAR(msl::nuclear_lambda(2.0 * x, 3), 2.0 * msl::nuclear_lambda(x, 3), 1e-12);
}

TEST(NuclearLambda, IdentityCovarianceLargeN) {
  std::mt19937_64 rng(27);
  const int n = 20000, d = 5, L = 3;
  const Matrix x = oracle::gaussian_matrix(n, d, rng);
  const double approx = (1 + std::sqrt(d * std::log(double(d)) / n)) *
                        (std::sqrt(L - 1.0) + std::sqrt(double(d))) / std::sqrt(double(n));
  EXPECT_NEAR(msl::nuclear_lambda(x, L) / approx, 1.0, 0.03);
}

TEST(NuclearLambda, DegenerateDataRejected) {
  EXPECT_THROW(msl::nuclear_lambda(Matrix::Zero(10, 3), 3), msl::InvalidInput);
}

TEST(FormulaPenalty, FamiliesAndScale) {
  std::mt19937_64 rng(28);
  const Matrix x = oracle::gaussian_matrix(50, 6, rng);
  const msl::WeightConfig cfg;
  const auto gs = msl::formula_penalty(msl::PenaltyFamily::kGroupSlope, x, 3, cfg, 2.0);
  EXPECT_EQ(gs.family(), msl::PenaltyFamily::kGroupSlope);
  EXPECT_LE((std::get<msl::GroupSlopeWeights>(gs.form()).lambda -
             2.0 * msl::group_slope_weights(6, 3, 50))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  const auto nuc = msl::formula_penalty(msl::PenaltyFamily::kNuclear, x, 3, cfg);
  EXPECT_DOUBLE_EQ(std::get<msl::NuclearWeight>(nuc.form()).lambda, msl::nuclear_lambda(x, 3));
  EXPECT_THROW(msl::formula_penalty(msl::PenaltyFamily::kLasso, x, 3, cfg), msl::InvalidInput);
}
